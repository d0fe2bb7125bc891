//! Local-realistic bound of the `(N, 3)` Bell expression with two settings
//! per party.
//!
//! For a deterministic strategy assigning outcomes `α_l(0), α_l(1)` to every
//! party, the double sum over settings factorizes:
//!
//! `Σ_m |f_n| cos Θ_n = Re[f_n Π_l z_l^{(n)}]`,
//! `z_l^{(n)} = Σ_{m∈{0,1}} ω^{c_l n (α_l(m) + m/2)}`,
//!
//! so `β_LR = max_α 2 Re[f₁ Z₁ + f₂ Z₂]`. Every `z_l^{(n)}` is either zero or
//! has a phase that is a multiple of `π/6`, with `|z^{(1)}| ∈ {0, √3}`,
//! `|z^{(2)}| ∈ {1, 2}` and `z^{(1)} = 0 ⇔ |z^{(2)}| = 2`. The dynamic
//! program tracks the reachable `(phase of Z₁, phase of Z₂)` classes while
//! `Z₁ ≠ 0`, and `(number of zero factors, phase of Z₂)` afterwards.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bell::{alternating_pattern, omega_pow, BellWeights};
use crate::error::{Error, Result};

/// Largest `N` accepted by the exhaustive enumeration (`9^N` strategies).
pub const BRUTE_FORCE_MAX_SITES: usize = 7;
/// Largest `N` accepted by the literal double-sum form (`9^N · 2^N` terms).
pub const LITERAL_MAX_SITES: usize = 4;

/// `z^{(n)} = ω^{c n α(0)} + ω^{c n (α(1) + 1/2)}`.
pub fn party_factor(alpha0: u8, alpha1: u8, c: i8, n: u8) -> Complex64 {
    let cn = f64::from(c) * f64::from(n);
    omega_pow(cn * f64::from(alpha0), 3) + omega_pow(cn * (f64::from(alpha1) + 0.5), 3)
}

/// Both harmonics of one party's deterministic assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartyFactor {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl PartyFactor {
    pub fn new(alpha0: u8, alpha1: u8, c: i8) -> Self {
        Self {
            z1: party_factor(alpha0, alpha1, c, 1),
            z2: party_factor(alpha0, alpha1, c, 2),
        }
    }
}

/// Exact form of a party factor: zero, or magnitude class and phase in
/// units of `π/6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExactFactor {
    Zero,
    /// `|z| = 2cos(π·h/6)` for `h ∈ {0, 1, 2}` i.e. 2, √3, 1.
    Polar { phase: u8 },
}

/// Exact factor and magnitude class `h` (0 → 2, 1 → √3, 2 → 1).
fn exact_factor(alpha0: u8, alpha1: u8, c: i8, n: u8) -> (ExactFactor, u8) {
    let cn = i32::from(c) * i32::from(n);
    // term phases in units of π/6
    let u = 4 * cn * i32::from(alpha0);
    let v = cn * (4 * i32::from(alpha1) + 2);
    let mut phase = ((u + v) / 2).rem_euclid(12);
    let h = ((u - v) / 2).rem_euclid(12);
    // 2cos(πh/6): fold into a nonnegative magnitude and a phase shift of π
    let (mag_class, flip) = match h {
        0 => (0, false),
        1 | 11 => (1, false),
        2 | 10 => (2, false),
        3 | 9 => return (ExactFactor::Zero, 3),
        4 | 8 => (2, true),
        5 | 7 => (1, true),
        6 => (0, true),
        _ => unreachable!(),
    };
    if flip {
        phase = (phase + 6) % 12;
    }
    (ExactFactor::Polar { phase: phase as u8 }, mag_class)
}

/// Reachable phase classes of `(Z₁, Z₂)` for a fixed conjugation pattern;
/// independent of the weights, so one table serves a whole `f̃` scan.
#[derive(Debug, Clone)]
pub struct LrBoundTable {
    n_sites: usize,
    /// `[p1][p2]` reachable with no zero `z^{(1)}` factor.
    nonzero: [[bool; 12]; 12],
    /// `[k][p2]` reachable with exactly `k ≥ 1` zero `z^{(1)}` factors.
    zero: Vec<[bool; 12]>,
}

impl LrBoundTable {
    pub fn new(c: &[i8]) -> Result<Self> {
        if c.is_empty() || c.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidArgument("conjugation pattern entries must be ±1".into()));
        }
        let n = c.len();
        let mut nonzero = [[false; 12]; 12];
        nonzero[0][0] = true;
        let mut zero = vec![[false; 12]; n + 1];

        for &cl in c {
            // (z1 phase or None, z2 phase); z1 = 0 exactly when |z2| = 2
            let moves: Vec<(Option<u8>, u8)> = (0..3u8)
                .flat_map(|a0| (0..3u8).map(move |a1| (a0, a1)))
                .map(|(a0, a1)| {
                    let (f1, _) = exact_factor(a0, a1, cl, 1);
                    let (f2, m2) = exact_factor(a0, a1, cl, 2);
                    let ExactFactor::Polar { phase: p2 } = f2 else {
                        unreachable!("second harmonic never vanishes")
                    };
                    match f1 {
                        ExactFactor::Zero => {
                            debug_assert_eq!(m2, 0);
                            (None, p2)
                        }
                        ExactFactor::Polar { phase } => {
                            debug_assert_eq!(m2, 2);
                            (Some(phase), p2)
                        }
                    }
                })
                .collect();

            let mut next_nonzero = [[false; 12]; 12];
            let mut next_zero = vec![[false; 12]; n + 1];
            for p1 in 0..12 {
                for p2 in 0..12 {
                    if !nonzero[p1][p2] {
                        continue;
                    }
                    for &(q1, q2) in &moves {
                        let r2 = (p2 + q2 as usize) % 12;
                        match q1 {
                            Some(q1) => next_nonzero[(p1 + q1 as usize) % 12][r2] = true,
                            None => next_zero[1][r2] = true,
                        }
                    }
                }
            }
            for k in 1..n {
                for p2 in 0..12 {
                    if !zero[k][p2] {
                        continue;
                    }
                    for &(q1, q2) in &moves {
                        let r2 = (p2 + q2 as usize) % 12;
                        let k2 = if q1.is_some() { k } else { k + 1 };
                        next_zero[k2][r2] = true;
                    }
                }
            }
            nonzero = next_nonzero;
            zero = next_zero;
        }
        Ok(Self {
            n_sites: n,
            nonzero,
            zero,
        })
    }

    pub fn alternating(n: usize) -> Self {
        Self::new(&alternating_pattern(n)).expect("alternating pattern is valid")
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Number of reachable classes.
    pub fn len(&self) -> usize {
        self.nonzero.iter().flatten().filter(|&&b| b).count()
            + self.zero.iter().flatten().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `β_LR` for the given weights (their pattern must match the table's).
    pub fn bound(&self, w: &BellWeights) -> f64 {
        let step = PI / 6.0;
        let mag1 = 3f64.powf(self.n_sites as f64 / 2.0);
        let mut best = f64::NEG_INFINITY;
        for p1 in 0..12 {
            for p2 in 0..12 {
                if self.nonzero[p1][p2] {
                    let v = w.f1_mag * mag1 * (w.theta1 + step * p1 as f64).cos()
                        + w.f2_mag * (w.theta2 + step * p2 as f64).cos();
                    best = best.max(2.0 * v);
                }
            }
        }
        for (k, row) in self.zero.iter().enumerate() {
            let mag2 = 2f64.powi(k as i32);
            for (p2, &reached) in row.iter().enumerate() {
                if reached {
                    best = best.max(2.0 * w.f2_mag * mag2 * (w.theta2 + step * p2 as f64).cos());
                }
            }
        }
        best
    }
}

/// Exact bound by the factorized dynamic program.
pub fn lr_bound_dp(n: usize, w: &BellWeights) -> Result<f64> {
    w.validate()?;
    if w.c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.c.len(),
        });
    }
    Ok(LrBoundTable::new(&w.c)?.bound(w))
}

/// Exhaustive maximum over all `9^N` deterministic strategies of
/// `2 Re[f₁ Π z^{(1)} + f₂ Π z^{(2)}]`.
pub fn lr_bound_bruteforce(n: usize, w: &BellWeights) -> Result<f64> {
    w.validate()?;
    check_sites(n, w, BRUTE_FORCE_MAX_SITES, "brute-force bound sites")?;
    let (f1, f2) = (w.f(1), w.f(2));
    let factors: Vec<Vec<PartyFactor>> = w
        .c
        .iter()
        .map(|&cl| {
            (0..9u8)
                .map(|s| PartyFactor::new(s / 3, s % 3, cl))
                .collect()
        })
        .collect();

    fn descend(factors: &[Vec<PartyFactor>], site: usize, z1: Complex64, z2: Complex64, f1: Complex64, f2: Complex64) -> f64 {
        if site == factors.len() {
            return 2.0 * (f1 * z1 + f2 * z2).re;
        }
        factors[site]
            .iter()
            .map(|p| descend(factors, site + 1, z1 * p.z1, z2 * p.z2, f1, f2))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    let one = Complex64::new(1.0, 0.0);
    Ok(factors[0]
        .par_iter()
        .map(|p| descend(&factors, 1, one * p.z1, one * p.z2, f1, f2))
        .reduce(|| f64::NEG_INFINITY, f64::max))
}

/// The bound as the literal double sum over outcome assignments and
/// setting choices: `max_α 2 Σ_m Σ_n |f_n| cos Θ_n` with
/// `Θ_n = θ_n + (2πn/3) c·α(m) + (πn/3) c·m`.
pub fn lr_bound_literal(n: usize, w: &BellWeights) -> Result<f64> {
    w.validate()?;
    check_sites(n, w, LITERAL_MAX_SITES, "literal bound sites")?;
    let strategies = 9usize.pow(n as u32);
    let mut best = f64::NEG_INFINITY;
    for s in 0..strategies {
        let mut rest = s;
        let assignment: Vec<[u8; 2]> = (0..n)
            .map(|_| {
                let code = rest % 9;
                rest /= 9;
                [(code / 3) as u8, (code % 3) as u8]
            })
            .collect();
        let mut total = 0.0;
        for settings in 0..(1usize << n) {
            let mut c_alpha = 0.0;
            let mut c_m = 0.0;
            for l in 0..n {
                let m = (settings >> l) & 1;
                let cl = f64::from(w.c[l]);
                c_alpha += cl * f64::from(assignment[l][m]);
                c_m += cl * m as f64;
            }
            for (harmonic, mag, theta) in [(1.0, w.f1_mag, w.theta1), (2.0, w.f2_mag, w.theta2)] {
                let big_theta = theta + 2.0 * PI * harmonic / 3.0 * c_alpha + PI * harmonic / 3.0 * c_m;
                total += mag * big_theta.cos();
            }
        }
        best = best.max(2.0 * total);
    }
    Ok(best)
}

fn check_sites(n: usize, w: &BellWeights, limit: usize, what: &'static str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSize(n));
    }
    if n > limit {
        return Err(Error::SizeLimit { what, size: n, limit });
    }
    if w.c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.c.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> BellWeights {
        BellWeights {
            f1_mag: rng.gen_range(0.0..2.0),
            f2_mag: rng.gen_range(0.0..2.0),
            theta1: rng.gen_range(-PI..PI),
            theta2: rng.gen_range(-PI..PI),
            theta_nu: 0.0,
            c: (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect(),
        }
    }

    #[test]
    fn party_factor_examples() {
        let z = party_factor(0, 0, 1, 1);
        assert!((z - (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, PI / 3.0))).norm() < 1e-15);
        assert!((z.norm() - 3f64.sqrt()).abs() < 1e-15);
        assert!(party_factor(0, 1, 1, 1).norm() < 1e-15);
        assert!((party_factor(0, 1, 1, 2) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn party_factor_invariants_and_exact_classes() {
        for c in [1i8, -1] {
            for a0 in 0..3 {
                for a1 in 0..3 {
                    let p = PartyFactor::new(a0, a1, c);
                    let m1 = p.z1.norm();
                    let m2 = p.z2.norm();
                    assert!(m1 < 1e-12 || (m1 - 3f64.sqrt()).abs() < 1e-12);
                    assert!((m2 - 1.0).abs() < 1e-12 || (m2 - 2.0).abs() < 1e-12);
                    assert_eq!(m1 < 1e-12, (m2 - 2.0).abs() < 1e-12);
                    assert_eq!(m1 < 1e-12, (i32::from(a1) - i32::from(a0)).rem_euclid(3) == 1);
                    for (n, z) in [(1u8, p.z1), (2, p.z2)] {
                        let (exact, class) = exact_factor(a0, a1, c, n);
                        match exact {
                            ExactFactor::Zero => assert!(z.norm() < 1e-12),
                            ExactFactor::Polar { phase } => {
                                let mag = [2.0, 3f64.sqrt(), 1.0][class as usize];
                                let rebuilt = Complex64::from_polar(mag, PI / 6.0 * f64::from(phase));
                                assert!((rebuilt - z).norm() < 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_weights_give_zero() {
        let w = BellWeights {
            f1_mag: 0.0,
            f2_mag: 0.0,
            ..BellWeights::maximizing(4, 0.0)
        };
        assert_eq!(lr_bound_bruteforce(4, &w).unwrap(), 0.0);
        assert_eq!(lr_bound_dp(4, &w).unwrap(), 0.0);
    }

    #[test]
    fn first_harmonic_only_bound() {
        // |f₁| = 1, f₂ = 0, θ₁ = π/2: 2·9·cos(π/6) = 9√3
        let w = BellWeights {
            f1_mag: 1.0,
            f2_mag: 0.0,
            theta1: PI / 2.0,
            ..BellWeights::maximizing(4, 0.0)
        };
        let expect = 9.0 * 3f64.sqrt();
        assert!((lr_bound_bruteforce(4, &w).unwrap() - expect).abs() < 1e-12);
        assert!((lr_bound_dp(4, &w).unwrap() - expect).abs() < 1e-12);
        assert!((lr_bound_literal(4, &w).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn cglmp_weights_two_parties() {
        // f_n = ω^{−n/4} sec(nπ/6) / 4 with c = (1, 1)
        let f = |n: f64| omega_pow(-n / 4.0, 3) * (1.0 / (n * PI / 6.0).cos() / 4.0);
        let w = BellWeights::from_complex(f(1.0), f(2.0), 0.0, vec![1, 1]);
        let brute = lr_bound_bruteforce(2, &w).unwrap();
        let literal = lr_bound_literal(2, &w).unwrap();
        assert!((brute - literal).abs() < 1e-12);
        assert!((lr_bound_dp(2, &w).unwrap() - brute).abs() < 1e-12);
        // the CGLMP local bound in this normalization
        assert!((brute - 2.0).abs() < 1e-12, "{brute}");
    }

    #[test]
    fn literal_sum_matches_factorized_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=4 {
            for _ in 0..5 {
                let w = random_weights(&mut rng, n);
                let a = lr_bound_literal(n, &w).unwrap();
                let b = lr_bound_bruteforce(n, &w).unwrap();
                assert!((a - b).abs() < 1e-10, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dp_matches_bruteforce_on_random_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1usize, 2, 3, 4, 5] {
            for _ in 0..20 {
                let w = random_weights(&mut rng, n);
                let a = lr_bound_dp(n, &w).unwrap();
                let b = lr_bound_bruteforce(n, &w).unwrap();
                assert!((a - b).abs() <= 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn table_size_is_bounded() {
        for n in [2usize, 10, 20, 40] {
            let t = LrBoundTable::alternating(n);
            assert!(t.len() <= 144 + 12 * n);
        }
    }

    #[test]
    fn guards() {
        let w = BellWeights::maximizing(8, 0.5);
        assert!(matches!(lr_bound_bruteforce(8, &w), Err(Error::SizeLimit { .. })));
        assert!(lr_bound_dp(6, &w).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scale_covariance(n in 1usize..=12, f1 in 0.0f64..3.0, f2 in 0.0f64..3.0,
                            t1 in -PI..PI, t2 in -PI..PI, s in 0.01f64..10.0) {
            let w = BellWeights { f1_mag: f1, f2_mag: f2, theta1: t1, theta2: t2, theta_nu: 0.0, c: alternating_pattern(n) };
            let scaled = BellWeights { f1_mag: s * f1, f2_mag: s * f2, ..w.clone() };
            let a = lr_bound_dp(n, &w).unwrap();
            let b = lr_bound_dp(n, &scaled).unwrap();
            prop_assert!((s * a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }

        #[test]
        fn convex_in_the_magnitudes(n in 1usize..=12, a1 in 0.0f64..3.0, a2 in 0.0f64..3.0,
                                    b1 in 0.0f64..3.0, b2 in 0.0f64..3.0, t1 in -PI..PI, t2 in -PI..PI) {
            // a maximum of functions linear in (|f₁|, |f₂|)
            let at = |f1: f64, f2: f64| {
                let w = BellWeights { f1_mag: f1, f2_mag: f2, theta1: t1, theta2: t2, theta_nu: 0.0, c: alternating_pattern(n) };
                lr_bound_dp(n, &w).unwrap()
            };
            let mid = at((a1 + b1) / 2.0, (a2 + b2) / 2.0);
            prop_assert!(mid <= (at(a1, a2) + at(b1, b2)) / 2.0 + 1e-9);
        }
    }
}
