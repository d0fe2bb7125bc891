use std::sync::Arc;

use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hilbert::SectorBasis;
use crate::state::SectorState;

/// Top eigenstate of the Bell operator restricted to
/// `span{|0202…⟩, |11…1⟩, |2020…⟩}`, written as
/// `b|0202…⟩ + √(1−2b²)|11…1⟩ + b|2020…⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiMax {
    pub n_sites: usize,
    pub f_ratio: f64,
    pub b: f64,
    /// Top eigenvalue of the restricted 3×3 operator (weights `|f_1| = 1`,
    /// `|f_2| = f̃`, no `2^N` prefactor).
    pub eigenvalue: f64,
}

impl PsiMax {
    pub fn center(&self) -> f64 {
        (1.0 - 2.0 * self.b * self.b).max(0.0).sqrt()
    }

    /// `⟨ψ_max|B̂|ψ_max⟩` on the same scale as the shift-correlator form:
    /// `2^{N+1}(s₁ g₁ + f̃ g₂) = 2^N λ`.
    pub fn bell_value(&self) -> f64 {
        2f64.powi(self.n_sites as i32) * self.eigenvalue
    }

    /// The state embedded in an `Mz = 0` sector basis.
    pub fn state(&self, basis: Arc<SectorBasis>) -> Result<SectorState> {
        if basis.n_sites() != self.n_sites || basis.magnetization() != 0 {
            return Err(Error::InvalidArgument(format!(
                "ψ_max needs the Mz = 0 sector of {} sites",
                self.n_sites
            )));
        }
        let n = self.n_sites;
        let neel_a: String = (0..n).map(|l| if l % 2 == 0 { '0' } else { '2' }).collect();
        let neel_b: String = (0..n).map(|l| if l % 2 == 0 { '2' } else { '0' }).collect();
        SectorState::from_terms(
            basis,
            &[(&neel_a, self.b), (&"1".repeat(n), self.center()), (&neel_b, self.b)],
        )
    }
}

/// Restricted operator in the ordered basis `(|0202…⟩, |11…1⟩, |2020…⟩)`:
/// `s₁` couples neighbours, `s₂ f̃` couples the two Néel states, with
/// `s_n = (−1)^{nN/2}`.
pub fn restricted_operator(n: usize, f_ratio: f64) -> Matrix3<f64> {
    let s1 = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let s2 = if n % 2 == 0 { 1.0 } else { -1.0 };
    let f2 = s2 * f_ratio;
    Matrix3::new(0.0, s1, f2, s1, 0.0, s1, f2, s1, 0.0)
}

pub fn psi_max_state(n: usize, f_ratio: f64) -> Result<PsiMax> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::OddChain(n));
    }
    if !(f_ratio >= 0.0) {
        return Err(Error::InvalidArgument(format!("weight ratio must be nonnegative, got {f_ratio}")));
    }
    let eig = SymmetricEigen::new(restricted_operator(n, f_ratio));
    let k = eig.eigenvalues.imax();
    let mut v = eig.eigenvectors.column(k).into_owned();
    if v[1] < 0.0 {
        v = -v;
    }
    // the top state is symmetric under exchanging the Néel states
    let b = 0.5 * (v[0] + v[2]);
    Ok(PsiMax {
        n_sites: n,
        f_ratio,
        b,
        eigenvalue: eig.eigenvalues[k],
    })
}
