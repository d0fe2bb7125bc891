use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{pow3, SectorBasis, SpinConfig};

/// Real amplitudes over a sector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    basis: Arc<SectorBasis>,
    amplitudes: Vec<f64>,
}

impl SectorState {
    pub fn new(basis: Arc<SectorBasis>, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalized superposition of labelled configurations, e.g.
    /// `[("0202", b), ("1111", a), ("2020", b)]`.
    pub fn from_terms(basis: Arc<SectorBasis>, terms: &[(&str, f64)]) -> Result<Self> {
        let mut amps = vec![0.0; basis.dim()];
        for &(label, amp) in terms {
            let c = SpinConfig::parse(label)?;
            let i = basis
                .index_of(c)
                .ok_or_else(|| Error::InvalidArgument(format!("{c} is not in the sector")))?;
            amps[i] += amp;
        }
        let mut s = Self::new(basis, amps)?;
        s.normalize();
        Ok(s)
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn n_sites(&self) -> usize {
        self.basis.n_sites()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, c: SpinConfig) -> f64 {
        self.basis.index_of(c).map_or(0.0, |i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        }
    }

    /// Makes the largest-magnitude coefficient positive.
    pub fn fix_phase(&mut self) {
        let lead = self
            .amplitudes
            .iter()
            .copied()
            .fold(0.0f64, |best, a| if a.abs() > best.abs() { a } else { best });
        if lead < 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a = -*a);
        }
    }

    pub fn overlap(&self, other: &[f64]) -> Result<f64> {
        if other.len() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: other.len(),
            });
        }
        Ok(self.amplitudes.iter().zip(other).map(|(a, b)| a * b).sum())
    }

    /// Amplitudes on the full `3^N` space, indexed by packed configuration.
    pub fn to_full(&self) -> Vec<f64> {
        let mut full = vec![0.0; pow3(self.n_sites()) as usize];
        for (&p, &a) in self.basis.packed_configs().iter().zip(&self.amplitudes) {
            full[p as usize] = a;
        }
        full
    }
}
