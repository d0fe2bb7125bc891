//! Entanglement entropy, fidelity with reference states and exponential
//! scaling fits.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::pow3;
use crate::state::SectorState;

/// Schmidt coefficients (singular values, descending) across the cut
/// between sites `0..cut` and `cut..N`.
///
/// The amplitude matrix is block diagonal in the magnetization of the left
/// block, so each block is decomposed separately.
pub fn schmidt_values(state: &SectorState, cut: usize) -> Result<Vec<f64>> {
    let n = state.n_sites();
    if cut == 0 || cut >= n {
        return Err(Error::InvalidArgument(format!("cut must lie in 1..{n}, got {cut}")));
    }
    let right_dim = pow3(n - cut);
    // left magnetization -> (left index map, right index map, entries)
    type Block = (HashMap<u32, usize>, HashMap<u32, usize>, Vec<(usize, usize, f64)>);
    let mut blocks: HashMap<i32, Block> = HashMap::new();
    for (i, &packed) in state.basis().packed_configs().iter().enumerate() {
        let amp = state.amplitudes()[i];
        if amp == 0.0 {
            continue;
        }
        let left = packed / right_dim;
        let right = packed % right_dim;
        let m_left = block_magnetization(left, cut);
        let (rows, cols, entries) = blocks.entry(m_left).or_default();
        let r = next_index(rows, left);
        let c = next_index(cols, right);
        entries.push((r, c, amp));
    }
    let mut values = Vec::new();
    for (rows, cols, entries) in blocks.into_values() {
        let mut m = DMatrix::<f64>::zeros(rows.len(), cols.len());
        for (r, c, a) in entries {
            m[(r, c)] = a;
        }
        values.extend(m.singular_values().iter().copied());
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn next_index(map: &mut HashMap<u32, usize>, key: u32) -> usize {
    let len = map.len();
    *map.entry(key).or_insert(len)
}

fn block_magnetization(mut packed: u32, len: usize) -> i32 {
    let mut m = 0;
    for _ in 0..len {
        m += 1 - (packed % 3) as i32;
        packed /= 3;
    }
    m
}

/// Von Neumann entropy of the reduced state of sites `0..cut`, natural log.
pub fn entanglement_entropy(state: &SectorState, cut: usize) -> Result<f64> {
    let norm2 = state.norm().powi(2);
    if norm2 == 0.0 {
        return Err(Error::InvalidArgument("zero state".into()));
    }
    Ok(schmidt_values(state, cut)?
        .iter()
        .map(|s| s * s / norm2)
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum())
}

/// Same as [`entanglement_entropy`] in bits.
pub fn entanglement_entropy_bits(state: &SectorState, cut: usize) -> Result<f64> {
    Ok(entanglement_entropy(state, cut)? / std::f64::consts::LN_2)
}

/// `|⟨a|b⟩| / (‖a‖‖b‖)`; the states may live in different sectors of the
/// same chain, in which case the fidelity is zero.
pub fn fidelity(a: &SectorState, b: &SectorState) -> Result<f64> {
    if a.n_sites() != b.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: a.n_sites(),
            got: b.n_sites(),
        });
    }
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidArgument("zero state".into()));
    }
    if a.basis().magnetization() != b.basis().magnetization() {
        return Ok(0.0);
    }
    let mut dot = 0.0;
    for (i, &packed) in a.basis().packed_configs().iter().enumerate() {
        if let Some(j) = b.basis().index_of_packed(packed) {
            dot += a.amplitudes()[i] * b.amplitudes()[j];
        }
    }
    Ok((dot / (na * nb)).abs().min(1.0))
}

/// Least-squares fit `y ≈ A γ^N` in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub gamma: f64,
    /// `ln A`.
    pub log_prefactor: f64,
    /// Root-mean-square residual of `ln y`.
    pub rms_log_residual: f64,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.log_prefactor + n * self.gamma.ln()).exp()
    }
}

pub fn fit_exponential_scaling(ns: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if ns.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: ns.len(),
            got: ys.len(),
        });
    }
    if ns.len() < 3 {
        return Err(Error::InvalidArgument("scaling fit needs at least three points".into()));
    }
    if ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::InvalidArgument("scaling fit needs positive values".into()));
    }
    let k = ns.len() as f64;
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = ns.iter().sum::<f64>() / k;
    let my = logs.iter().sum::<f64>() / k;
    let sxx: f64 = ns.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("scaling fit needs distinct N".into()));
    }
    let sxy: f64 = ns.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = ns
        .iter()
        .zip(&logs)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(ScalingFit {
        gamma: slope.exp(),
        log_prefactor: intercept,
        rms_log_residual: (rss / k).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::enumerate_sector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn sector(n: usize) -> Arc<crate::hilbert::SectorBasis> {
        Arc::new(enumerate_sector(n, 0).unwrap())
    }

    fn random_state(n: usize, seed: u64) -> SectorState {
        let basis = sector(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..basis.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut s = SectorState::new(basis, amps).unwrap();
        s.normalize();
        s
    }

    /// Reduced density matrix spectrum from the full `3^N` vector.
    fn dense_entropy(state: &SectorState, cut: usize) -> f64 {
        let n = state.n_sites();
        let full = state.to_full();
        let rd = pow3(n - cut) as usize;
        let m = DMatrix::from_fn(pow3(cut) as usize, rd, |r, c| full[r * rd + c]);
        let rho = &m * m.transpose();
        rho.symmetric_eigenvalues()
            .iter()
            .filter(|&&p| p > 1e-15)
            .map(|p| -p * p.ln())
            .sum()
    }

    #[test]
    fn product_state_has_zero_entropy() {
        let s = SectorState::from_terms(sector(4), &[("1111", 1.0)]).unwrap();
        for cut in 1..4 {
            assert!(entanglement_entropy(&s, cut).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn three_term_ghz_has_ln3() {
        let s = SectorState::from_terms(sector(4), &[("0202", 1.0), ("1111", 1.0), ("2020", 1.0)]).unwrap();
        for cut in 1..4 {
            let e = entanglement_entropy(&s, cut).unwrap();
            assert!((e - 3f64.ln()).abs() < 1e-13, "cut {cut}: {e}");
        }
        assert!((entanglement_entropy_bits(&s, 2).unwrap() - 3f64.log2()).abs() < 1e-13);
    }

    #[test]
    fn blocked_svd_matches_dense_reduced_density_matrix() {
        for n in [4usize, 6] {
            let s = random_state(n, n as u64);
            for cut in 1..n {
                let a = entanglement_entropy(&s, cut).unwrap();
                let b = dense_entropy(&s, cut);
                assert!((a - b).abs() < 1e-11, "n={n} cut={cut}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn entropy_bounded_by_smaller_block() {
        let s = random_state(6, 3);
        for cut in 1..6 {
            let a = entanglement_entropy(&s, cut).unwrap();
            let limit = (cut.min(6 - cut) as f64) * 3f64.ln();
            assert!(a >= 0.0 && a <= limit + 1e-12);
        }
        let schmidt = schmidt_values(&s, 3).unwrap();
        let total: f64 = schmidt.iter().map(|x| x * x).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translation_invariant_ground_state_is_cut_symmetric() {
        use crate::eigensolver::ground_state_with;
        use crate::hamiltonian::{build_hamiltonian, HamiltonianParams};
        let h = build_hamiltonian(&HamiltonianParams::periodic(6, 2.0, 1.0), sector(6)).unwrap();
        let gs = ground_state_with(&h, &Default::default()).unwrap();
        for cut in 1..6 {
            let a = entanglement_entropy(&gs.state, cut).unwrap();
            let b = entanglement_entropy(&gs.state, 6 - cut).unwrap();
            assert!((a - b).abs() < 1e-9, "cut {cut}: {a} vs {b}");
        }
    }

    #[test]
    fn bad_cuts_rejected() {
        let s = random_state(4, 1);
        assert!(entanglement_entropy(&s, 0).is_err());
        assert!(entanglement_entropy(&s, 4).is_err());
    }

    #[test]
    fn fidelity_basics() {
        let a = random_state(4, 7);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-14);
        let neel = SectorState::from_terms(sector(4), &[("0202", 1.0)]).unwrap();
        let idx = a.basis().index_of(crate::hilbert::SpinConfig::parse("0202").unwrap()).unwrap();
        assert!((fidelity(&a, &neel).unwrap() - a.amplitudes()[idx].abs()).abs() < 1e-14);
        let other = Arc::new(enumerate_sector(4, 1).unwrap());
        let b = SectorState::from_terms(other, &[("0111", 1.0)]).unwrap();
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn constant_data_has_unit_base() {
        let fit = fit_exponential_scaling(&[4.0, 6.0, 8.0], &[1.7, 1.7, 1.7]).unwrap();
        assert!((fit.gamma - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_of_uniform_state_with_psi_max() {
        let p = crate::bell::psi_max_state(6, 0.7423).unwrap();
        let psi = p.state(sector(6)).unwrap();
        let uniform = SectorState::from_terms(sector(6), &[("111111", 1.0)]).unwrap();
        let f = fidelity(&uniform, &psi).unwrap();
        assert!((f - (1.0 - 2.0 * p.b * p.b).sqrt()).abs() < 1e-14);
        let negated = psi.amplitudes().iter().map(|a| -a).collect();
        let flipped = SectorState::new(psi.basis().clone(), negated).unwrap();
        assert!((fidelity(&uniform, &flipped).unwrap() - f).abs() < 1e-15);
    }

    #[test]
    fn exact_exponential_recovers_base() {
        let ns = [4.0, 6.0, 8.0, 10.0];
        let ys: Vec<f64> = ns.iter().map(|&n| 0.5 * 2f64.powf(n)).collect();
        let fit = fit_exponential_scaling(&ns, &ys).unwrap();
        assert!((fit.gamma - 2.0).abs() < 1e-12);
        assert!((fit.log_prefactor - 0.5f64.ln()).abs() < 1e-12);
        assert!(fit.rms_log_residual < 1e-12);
        assert!((fit.predict(12.0) - 2048.0).abs() < 1e-8);
    }

    #[test]
    fn table_ratios_scale_with_gamma_near_1_126() {
        let fit = fit_exponential_scaling(&[4.0, 6.0, 8.0, 10.0], &[1.94965, 2.46967, 3.11854, 3.97349]).unwrap();
        assert!((fit.gamma - 1.1257).abs() < 5e-4, "{}", fit.gamma);
    }

    #[test]
    fn degenerate_fits_rejected() {
        assert!(fit_exponential_scaling(&[4.0], &[1.0]).is_err());
        assert!(fit_exponential_scaling(&[4.0, 6.0], &[1.0, 2.0]).is_err());
        assert!(fit_exponential_scaling(&[4.0, 4.0, 4.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_exponential_scaling(&[4.0, 6.0, 8.0], &[1.0, -2.0, 1.0]).is_err());
        assert!(fit_exponential_scaling(&[4.0, 6.0], &[1.0]).is_err());
    }
}
