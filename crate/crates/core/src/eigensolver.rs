//! Lowest eigenpair of a symmetric sector operator by Lanczos iteration with
//! full reorthogonalization and explicit restarts, plus a dense oracle.
//!
//! When the operator carries chain symmetries (spin flip at `Mz = 0`,
//! translation for periodic chains) the iteration runs inside the fully
//! symmetric subspace, where the ground state of the non-negative-coupling
//! chain lives, and a second run in the flip-odd subspace decides whether
//! the Néel-like pair is numerically degenerate.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::SparseOperator;
use crate::state::SectorState;

/// Largest sector dimension `dense_spectrum` accepts.
pub const DENSE_LIMIT: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on the residual `‖Hv − Ev‖₂`.
    pub tol: f64,
    /// Cap on matrix-vector products over all restarts and sectors.
    pub max_iter: usize,
    /// Krylov basis size before a restart.
    pub krylov_dim: usize,
    pub seed: u64,
    /// Energy splitting below which the two lowest states count as degenerate.
    pub degeneracy_threshold: f64,
    pub use_symmetries: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50_000,
            krylov_dim: 300,
            seed: 0x5eed,
            degeneracy_threshold: 1e-8,
            use_symmetries: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: SectorState,
    pub energy: f64,
    pub residual: f64,
    /// Matrix-vector products used.
    pub iterations: usize,
    /// Set when the two lowest levels are split by less than the threshold;
    /// `state` is then the spin-flip-even combination.
    pub degenerate: bool,
    /// Lowest flip-odd energy minus the returned energy, when computed.
    pub odd_gap: Option<f64>,
}

impl GroundState {
    pub fn vector(&self) -> &[f64] {
        self.state.amplitudes()
    }
}

/// Convenience form of [`ground_state_with`].
pub fn ground_state(op: &SparseOperator, tol: f64, max_iter: usize, seed: u64) -> Result<GroundState> {
    ground_state_with(
        op,
        &SolverOptions {
            tol,
            max_iter,
            seed,
            ..SolverOptions::default()
        },
    )
}

pub fn ground_state_with(op: &SparseOperator, opts: &SolverOptions) -> Result<GroundState> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let dim = op.dim();
    if dim == 0 {
        return Err(Error::InvalidArgument("empty operator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut budget = opts.max_iter;

    let sym = if opts.use_symmetries { op.symmetry() } else { None };
    let (ground, second) = match sym {
        Some(sym) if sym.flip.is_some() || sym.translation.is_some() => {
            let orbits = Constraint::orbit_average(sym.orbits(dim));
            let even = lanczos_lowest(op, start.clone(), &orbits, opts, &mut budget)?;
            let odd = match &sym.flip {
                Some(flip) => {
                    let constraint = Constraint::FlipOdd(flip.clone());
                    let mut s = start;
                    constraint.apply(&mut s);
                    if norm(&s) > 1e-12 {
                        Some(lanczos_lowest(op, s, &constraint, opts, &mut budget)?)
                    } else {
                        None
                    }
                }
                None => None,
            };
            match odd {
                Some(odd) if odd.value < even.value - opts.degeneracy_threshold => (odd, Some(even.value)),
                Some(odd) => (even, Some(odd.value)),
                None => (even, None),
            }
        }
        _ => {
            let first = lanczos_lowest(op, start.clone(), &Constraint::None, opts, &mut budget)?;
            let deflate = Constraint::Deflate(first.vector.clone());
            let second = if dim > 1 {
                let mut s = start;
                deflate.apply(&mut s);
                Some(lanczos_lowest(op, s, &deflate, opts, &mut budget)?.value)
            } else {
                None
            };
            (first, second)
        }
    };

    let mut state = SectorState::new(op.basis().clone(), ground.vector)?;
    state.fix_phase();
    let odd_gap = second.map(|e| e - ground.value);
    Ok(GroundState {
        state,
        energy: ground.value,
        residual: ground.residual,
        iterations: opts.max_iter - budget,
        degenerate: odd_gap.is_some_and(|g| g.abs() < opts.degeneracy_threshold),
        odd_gap,
    })
}

/// All eigenvalues in ascending order (dense oracle).
pub fn dense_spectrum(op: &SparseOperator) -> Result<Vec<f64>> {
    if op.dim() > DENSE_LIMIT {
        return Err(Error::SizeLimit {
            what: "dense spectrum",
            size: op.dim(),
            limit: DENSE_LIMIT,
        });
    }
    let mut values: Vec<f64> = SymmetricEigen::new(op.to_dense()).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Lowest eigenpair from a dense solve; test and small-system helper.
pub fn dense_ground_state(op: &SparseOperator) -> Result<(f64, Vec<f64>)> {
    if op.dim() > DENSE_LIMIT {
        return Err(Error::SizeLimit {
            what: "dense spectrum",
            size: op.dim(),
            limit: DENSE_LIMIT,
        });
    }
    let eig = SymmetricEigen::new(op.to_dense());
    let k = eig.eigenvalues.imin();
    Ok((eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
}

/// Chain symmetries of an operator, as index permutations of its basis.
#[derive(Debug, Clone, Default)]
pub struct Symmetry {
    pub flip: Option<Vec<usize>>,
    pub translation: Option<Vec<usize>>,
}

impl Symmetry {
    /// Orbit label of every basis index under the group generated by the maps.
    fn orbits(&self, dim: usize) -> Vec<usize> {
        let mut label = vec![usize::MAX; dim];
        let mut next = 0;
        let mut stack = Vec::new();
        for seed in 0..dim {
            if label[seed] != usize::MAX {
                continue;
            }
            label[seed] = next;
            stack.push(seed);
            while let Some(i) = stack.pop() {
                for map in self.flip.iter().chain(self.translation.iter()) {
                    let j = map[i];
                    if label[j] == usize::MAX {
                        label[j] = next;
                        stack.push(j);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

enum Constraint {
    None,
    /// Replace each amplitude by the mean over its symmetry orbit.
    OrbitAverage { label: Vec<usize>, size: Vec<f64> },
    FlipOdd(Vec<usize>),
    Deflate(Vec<f64>),
}

impl Constraint {
    fn orbit_average(label: Vec<usize>) -> Self {
        let count = label.iter().max().map_or(0, |m| m + 1);
        let mut size = vec![0.0; count];
        for &l in &label {
            size[l] += 1.0;
        }
        Constraint::OrbitAverage { label, size }
    }

    fn apply(&self, v: &mut [f64]) {
        match self {
            Constraint::None => {}
            Constraint::OrbitAverage { label, size } => {
                let mut sum = vec![0.0; size.len()];
                for (x, &l) in v.iter().zip(label) {
                    sum[l] += x;
                }
                for (x, &l) in v.iter_mut().zip(label) {
                    *x = sum[l] / size[l];
                }
            }
            Constraint::FlipOdd(flip) => {
                let orig = v.to_vec();
                for (i, x) in v.iter_mut().enumerate() {
                    *x = 0.5 * (orig[i] - orig[flip[i]]);
                }
            }
            Constraint::Deflate(u) => {
                let c = dot(u, v);
                axpy(-c, u, v);
            }
        }
    }
}

struct Eigenpair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
}

fn lanczos_lowest(
    op: &SparseOperator,
    mut start: Vec<f64>,
    constraint: &Constraint,
    opts: &SolverOptions,
    budget: &mut usize,
) -> Result<Eigenpair> {
    let dim = op.dim();
    let krylov_dim = opts.krylov_dim.clamp(2, dim.max(2));
    constraint.apply(&mut start);
    let mut best_residual = f64::INFINITY;
    let mut used = 0usize;
    let mut w = vec![0.0; dim];

    loop {
        let nrm = norm(&start);
        if !(nrm > 0.0) {
            return Err(Error::InvalidArgument("start vector vanished under the symmetry projection".into()));
        }
        start.iter_mut().for_each(|x| *x /= nrm);

        let mut vecs: Vec<Vec<f64>> = vec![start];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut s;
        loop {
            if *budget == 0 {
                return Err(Error::NotConverged {
                    iterations: used,
                    residual: best_residual,
                });
            }
            let j = vecs.len() - 1;
            op.apply_into(&vecs[j], &mut w);
            *budget -= 1;
            used += 1;
            let alpha = dot(&vecs[j], &w);
            axpy(-alpha, &vecs[j], &mut w);
            if j > 0 {
                axpy(-betas[j - 1], &vecs[j - 1], &mut w);
            }
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for v in &vecs {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            constraint.apply(&mut w);
            let beta = norm(&w);
            alphas.push(alpha);
            let theta;
            (theta, s) = tridiagonal_lowest(&alphas, &betas);
            let scale = theta.abs().max(1.0);
            let estimate = beta * s.last().unwrap().abs();
            let exhausted = beta <= 1e-12 * scale || vecs.len() >= dim;
            if estimate <= 0.1 * opts.tol || exhausted || vecs.len() >= krylov_dim || *budget == 0 {
                break;
            }
            betas.push(beta);
            w.iter_mut().for_each(|x| *x /= beta);
            vecs.push(std::mem::replace(&mut w, vec![0.0; dim]));
        }

        let mut y = vec![0.0; dim];
        for (v, &c) in vecs.iter().zip(&s) {
            axpy(c, v, &mut y);
        }
        constraint.apply(&mut y);
        let ny = norm(&y);
        y.iter_mut().for_each(|x| *x /= ny);
        op.apply_into(&y, &mut w);
        let value = dot(&y, &w);
        axpy(-value, &y, &mut w);
        let residual = norm(&w);
        best_residual = best_residual.min(residual);
        if residual <= opts.tol {
            return Ok(Eigenpair {
                value,
                vector: y,
                residual,
            });
        }
        if *budget == 0 {
            return Err(Error::NotConverged {
                iterations: used,
                residual: best_residual,
            });
        }
        start = y;
    }
}

/// Lowest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta` (`beta.len() == alpha.len() − 1`), by
/// Sturm bisection followed by inverse iteration.
pub(crate) fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let n = alpha.len();
    debug_assert_eq!(beta.len() + 1, n);
    if n == 1 {
        return (alpha[0], vec![1.0]);
    }
    let radius = |i: usize| {
        let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { beta[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n).map(|i| alpha[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|i| alpha[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
        if sturm_count(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);

    let mut x = vec![1.0; n];
    for _ in 0..3 {
        x = solve_shifted(alpha, beta, theta, x);
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
    }
    (theta, x)
}

/// Number of eigenvalues strictly below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = alpha[0] - x;
    for i in 0..alpha.len() {
        if i > 0 {
            let denom = if q == 0.0 { f64::EPSILON * beta[i - 1].abs().max(1.0) } else { q };
            q = alpha[i] - x - beta[i - 1] * beta[i - 1] / denom;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(T − σI) x = rhs` by Gaussian elimination with partial pivoting.
fn solve_shifted(alpha: &[f64], beta: &[f64], sigma: f64, mut b: Vec<f64>) -> Vec<f64> {
    let n = alpha.len();
    let tiny = f64::EPSILON * alpha.iter().chain(beta).fold(1.0f64, |m, v| m.max(v.abs()));
    let mut d: Vec<f64> = alpha.iter().map(|a| a - sigma).collect();
    let mut dl = beta.to_vec();
    let mut du = beta.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            b.swap(i, i + 1);
            b[i + 1] -= fact * b[i];
        }
        dl[i] = 0.0;
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

#[allow(dead_code)]
fn dense_tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let n = alpha.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, diagonal_energy, HamiltonianParams};
    use crate::hilbert::enumerate_sector;
    use std::sync::Arc;

    fn hamiltonian(n: usize, jz: f64, d: f64) -> SparseOperator {
        let basis = Arc::new(enumerate_sector(n, 0).unwrap());
        build_hamiltonian(&HamiltonianParams::periodic(n, jz, d), basis).unwrap()
    }

    #[test]
    fn tridiagonal_lowest_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [1usize, 2, 3, 7, 40] {
            let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let beta: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(0.1..2.0)).collect();
            let (theta, s) = tridiagonal_lowest(&alpha, &beta);
            let eig = SymmetricEigen::new(dense_tridiagonal(&alpha, &beta));
            let k = eig.eigenvalues.imin();
            assert!((theta - eig.eigenvalues[k]).abs() < 1e-12);
            let overlap: f64 = eig.eigenvectors.column(k).iter().zip(&s).map(|(a, b)| a * b).sum();
            assert!((overlap.abs() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn heisenberg_four_sites_matches_dense() {
        let h = hamiltonian(4, 1.0, 0.0);
        let gs = ground_state(&h, 1e-10, 10_000, 1).unwrap();
        let spec = dense_spectrum(&h).unwrap();
        assert!((gs.energy - spec[0]).abs() < 1e-9);
        assert!((gs.energy + 6.0).abs() < 1e-9);
        assert!(gs.residual <= 1e-10);
        let n: f64 = gs.vector().iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn every_sector_matches_dense() {
        // includes odd rings and odd-Mz sectors, whose ground states carry
        // nonzero momentum
        for n in 2..=6usize {
            for mz in 0..=(n as i32).min(3) {
                let basis = Arc::new(enumerate_sector(n, mz).unwrap());
                for &(jz, d) in &[(0.5, 0.5), (3.0, 12.0), (12.0, 3.0), (-1.0, 0.5)] {
                    let h = build_hamiltonian(&HamiltonianParams::periodic(n, jz, d), basis.clone()).unwrap();
                    let gs = ground_state_with(&h, &SolverOptions::default()).unwrap();
                    let e = dense_ground_state(&h).unwrap().0;
                    assert!((gs.energy - e).abs() < 1e-9, "n={n} mz={mz} jz={jz} d={d}: {} vs {e}", gs.energy);
                }
            }
        }
    }

    #[test]
    fn strong_anisotropy_matches_dense() {
        let h = hamiltonian(4, 12.0, 20.0);
        let gs = ground_state(&h, 1e-10, 10_000, 1).unwrap();
        assert!((gs.energy - dense_spectrum(&h).unwrap()[0]).abs() < 1e-9);
    }

    #[test]
    fn variational_bound_from_neel_state() {
        for &(jz, d) in &[(0.0, 0.0), (3.0, 1.0), (12.0, 11.9), (1.0, 16.0)] {
            let h = hamiltonian(6, jz, d);
            let gs = ground_state(&h, 1e-10, 10_000, 7).unwrap();
            let p = HamiltonianParams::periodic(6, jz, d);
            let neel = diagonal_energy(&p, &[0, 2, 0, 2, 0, 2]);
            assert!((neel - 6.0 * (d - jz)).abs() < 1e-12);
            assert!(gs.energy <= neel + 1e-12);
        }
    }

    #[test]
    fn six_site_cross_check_and_residual() {
        let h = hamiltonian(6, 2.5, 1.0);
        let gs = ground_state(&h, 1e-10, 10_000, 11).unwrap();
        let spec = dense_spectrum(&h).unwrap();
        assert!((gs.energy - spec[0]).abs() < 1e-9);
        let hv = h.apply(gs.vector()).unwrap();
        let r: f64 = hv
            .iter()
            .zip(gs.vector())
            .map(|(a, b)| (a - gs.energy * b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(r <= 1e-10);
    }

    #[test]
    fn unconstrained_path_agrees() {
        let h = hamiltonian(6, 1.3, 0.4);
        let opts = SolverOptions {
            use_symmetries: false,
            ..SolverOptions::default()
        };
        let free = ground_state_with(&h, &opts).unwrap();
        let sym = ground_state_with(&h, &SolverOptions::default()).unwrap();
        assert!((free.energy - sym.energy).abs() < 1e-9);
        let ov: f64 = free.vector().iter().zip(sym.vector()).map(|(a, b)| a * b).sum();
        assert!((ov.abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let h = hamiltonian(6, 3.0, 2.0);
        let a = ground_state(&h, 1e-10, 10_000, 5).unwrap();
        let b = ground_state(&h, 1e-10, 10_000, 5).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.vector(), b.vector());
        // global phase: largest coefficient positive
        let lead = a.vector().iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        assert!(lead > 0.0);
    }

    #[test]
    fn deep_neel_pair_flagged_degenerate() {
        // the Néel splitting at large Jz and N = 8 is far below the threshold
        let h = hamiltonian(8, 40.0, 0.0);
        let gs = ground_state(&h, 1e-10, 50_000, 2).unwrap();
        let gap = gs.odd_gap.unwrap();
        assert!(gap >= -1e-8);
        assert_eq!(gs.degenerate, gap.abs() < 1e-8);
        if gs.degenerate {
            let basis = gs.state.basis();
            let a = gs.state.amplitude(crate::hilbert::SpinConfig::parse("02020202").unwrap());
            let b = gs.state.amplitude(crate::hilbert::SpinConfig::parse("20202020").unwrap());
            assert!((a - b).abs() < 1e-8, "{a} {b} dim {}", basis.dim());
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let h = hamiltonian(8, 1.0, 0.5);
        let err = ground_state(&h, 1e-14, 5, 1).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
        assert!(ground_state(&h, 0.0, 5, 1).is_err());
    }

    #[test]
    fn dense_spectrum_of_diagonal_operator() {
        let basis = Arc::new(enumerate_sector(3, 0).unwrap());
        let diag = [3.0, -1.0, 2.0, 0.5, -7.0, 1.0, 4.0];
        let rows = diag.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect();
        let op = SparseOperator::from_rows(basis, rows).unwrap();
        let mut sorted = diag.to_vec();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(dense_spectrum(&op).unwrap(), sorted);
    }

    #[test]
    fn dense_spectrum_preserves_trace() {
        let h = hamiltonian(6, 2.0, 3.0);
        let spec = dense_spectrum(&h).unwrap();
        let tr: f64 = h.diagonal().iter().sum();
        assert!((spec.iter().sum::<f64>() - tr).abs() < 1e-8);
    }

    #[test]
    fn dense_guard() {
        let h = hamiltonian(10, 1.0, 0.0);
        assert!(matches!(dense_spectrum(&h), Err(Error::SizeLimit { .. })));
    }
}
