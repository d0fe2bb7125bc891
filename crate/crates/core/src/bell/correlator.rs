use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::pow3;
use crate::state::SectorState;

/// `c_l = +1` on odd sites (1-based) and `−1` on even sites.
pub fn alternating_pattern(n: usize) -> Vec<i8> {
    (0..n).map(|l| if l % 2 == 0 { 1 } else { -1 }).collect()
}

/// Weights `f_n = |f_n| e^{iθ_n}`, the total local phase angle `θ_ν` and
/// the conjugation pattern `c` of one Bell expression.
#[derive(Debug, Clone, PartialEq)]
pub struct BellWeights {
    pub f1_mag: f64,
    pub f2_mag: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta_nu: f64,
    pub c: Vec<i8>,
}

impl BellWeights {
    /// `|f_1| = 1`, `|f_2| = f̃` with the maximizing angles
    /// `θ_1 = (−1)^{N/2} π/2`, `θ_2 = π`, `θ_ν = π/2`.
    pub fn maximizing(n: usize, f_ratio: f64) -> Self {
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        Self {
            f1_mag: 1.0,
            f2_mag: f_ratio,
            theta1: sign * PI / 2.0,
            theta2: PI,
            theta_nu: PI / 2.0,
            c: alternating_pattern(n),
        }
    }

    pub fn from_complex(f1: Complex64, f2: Complex64, theta_nu: f64, c: Vec<i8>) -> Self {
        Self {
            f1_mag: f1.norm(),
            f2_mag: f2.norm(),
            theta1: f1.arg(),
            theta2: f2.arg(),
            theta_nu,
            c,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.c.len()
    }

    /// Complex weight `f_n`, `n ∈ {1, 2}`.
    pub fn f(&self, n: u8) -> Complex64 {
        match n {
            1 => Complex64::from_polar(self.f1_mag, self.theta1),
            2 => Complex64::from_polar(self.f2_mag, self.theta2),
            _ => panic!("harmonic must be 1 or 2"),
        }
    }

    pub fn with_f_ratio(&self, f_ratio: f64) -> Self {
        Self {
            f2_mag: f_ratio * self.f1_mag,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.is_empty() {
            return Err(Error::InvalidArgument("empty conjugation pattern".into()));
        }
        if self.c.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidArgument("conjugation pattern entries must be ±1".into()));
        }
        if !(self.f1_mag >= 0.0 && self.f2_mag >= 0.0) {
            return Err(Error::InvalidArgument("weight magnitudes must be nonnegative".into()));
        }
        Ok(())
    }

    /// The `θ_ν` that makes the shift-correlator form agree with the full
    /// operator built from per-site phases `ν_l`: `θ_ν = −(2π/3) Σ_l c_l ν_l`.
    pub fn theta_nu_for_phases(c: &[i8], nu: &[f64]) -> f64 {
        let total: f64 = c.iter().zip(nu).map(|(&cl, &v)| f64::from(cl) * v).sum();
        -2.0 * PI * total / 3.0
    }
}

/// `⟨⊗_l Ĵ_l^{c_l n}⟩` with its symmetry diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlator {
    pub value: Complex64,
    /// The operator changes the magnetization (odd `N` or `Σ c_l ≠ 0`), so
    /// the value vanishes identically.
    pub vanishes_by_symmetry: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorSet {
    pub g1: Complex64,
    pub g2: Complex64,
    pub vanishes_by_symmetry: bool,
}

/// Exact `⟨ψ| ⊗_l Ĵ_l^{c_l n} |ψ⟩`, where `Ĵ^{+n}` lowers the local level by
/// `n` and `Ĵ^{−n} = (Ĵ†)^n` raises it.
pub fn shift_correlator(state: &SectorState, n: u8, c: &[i8]) -> Result<Correlator> {
    let sites = state.n_sites();
    if c.len() != sites {
        return Err(Error::DimensionMismatch {
            expected: sites,
            got: c.len(),
        });
    }
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidArgument(format!("harmonic {n} outside {{1, 2}}")));
    }
    let shift: i32 = c.iter().map(|&x| i32::from(x)).sum::<i32>() * i32::from(n);
    if shift != 0 {
        return Ok(Correlator {
            value: Complex64::new(0.0, 0.0),
            vanishes_by_symmetry: true,
        });
    }
    let basis = state.basis();
    let amps = state.amplitudes();
    let weights: Vec<i64> = (0..sites).map(|l| i64::from(pow3(sites - 1 - l))).collect();
    let mut acc = 0.0;
    for (i, &packed) in basis.packed_configs().iter().enumerate() {
        if amps[i] == 0.0 {
            continue;
        }
        let mut p = packed as i64;
        let mut rest = packed;
        let mut alive = true;
        for l in (0..sites).rev() {
            let level = (rest % 3) as i32;
            rest /= 3;
            let moved = level - i32::from(c[l]) * i32::from(n);
            if !(0..=2).contains(&moved) {
                alive = false;
                break;
            }
            p += i64::from(moved - level) * weights[l];
        }
        if !alive {
            continue;
        }
        if let Some(j) = basis.index_of_packed(p as u32) {
            acc += amps[j] * amps[i];
        }
    }
    Ok(Correlator {
        value: Complex64::new(acc, 0.0),
        vanishes_by_symmetry: false,
    })
}

pub fn correlators(state: &SectorState, c: &[i8]) -> Result<CorrelatorSet> {
    let g1 = shift_correlator(state, 1, c)?;
    let g2 = shift_correlator(state, 2, c)?;
    Ok(CorrelatorSet {
        g1: g1.value,
        g2: g2.value,
        vanishes_by_symmetry: g1.vanishes_by_symmetry && g2.vanishes_by_symmetry,
    })
}

/// `2^{N+1} Σ_n |f_n| Re[e^{i(θ_n − nθ_ν)} g_n]`, which for real correlators
/// is `2^{N+1} Σ_n |f_n| cos(θ_n − nθ_ν) g_n`.
pub fn bell_from_correlators(n_sites: usize, g: &CorrelatorSet, w: &BellWeights) -> f64 {
    let prefactor = 2f64.powi(n_sites as i32 + 1);
    let term = |mag: f64, theta: f64, harmonic: f64, gn: Complex64| {
        mag * (Complex64::from_polar(1.0, theta - harmonic * w.theta_nu) * gn).re
    };
    prefactor * (term(w.f1_mag, w.theta1, 1.0, g.g1) + term(w.f2_mag, w.theta2, 2.0, g.g2))
}

/// Bell correlation of a fixed-magnetization state; zero for odd chains.
pub fn bell_correlation(state: &SectorState, w: &BellWeights) -> Result<f64> {
    w.validate()?;
    let g = correlators(state, &w.c)?;
    Ok(bell_from_correlators(state.n_sites(), &g, w))
}
