use num_complex::Complex64;

use super::correlator::BellWeights;
use super::measurement::{measurement_operator, omega_pow, signed_power, MeasurementSpec};
use crate::error::{Error, Result};
use crate::hilbert::pow3;

/// Memory guard for the full-space verification path.
pub const FULL_OPERATOR_MAX_SITES: usize = 8;

/// Local factor entries below this magnitude are treated as exact zeros.
const PRUNE: f64 = 1e-12;

/// Bell operator on the full `3^N` space, row-compressed with complex entries.
#[derive(Debug, Clone)]
pub struct FullBellOperator {
    n_sites: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

/// Assembles `Σ_n f_n ⊗_l (Â_l^{c_l n} + ω^{c_l n/2} B̂_l^{c_l n}) + h.c.` from
/// the Fourier measurement operators with per-site phases `nu`.
pub fn build_full_bell_operator(n: usize, w: &BellWeights, nu: &[f64]) -> Result<FullBellOperator> {
    if n == 0 {
        return Err(Error::InvalidSize(n));
    }
    if n > FULL_OPERATOR_MAX_SITES {
        return Err(Error::SizeLimit {
            what: "full Bell operator sites",
            size: n,
            limit: FULL_OPERATOR_MAX_SITES,
        });
    }
    w.validate()?;
    if w.c.len() != n || nu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if w.c.len() != n { w.c.len() } else { nu.len() },
        });
    }
    let dim = pow3(n) as usize;
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();

    for harmonic in 1..=2u8 {
        let f = w.f(harmonic);
        if f.norm() == 0.0 {
            continue;
        }
        // per site: for each column β, the nonzero (row, value) pairs
        let local: Vec<Vec<Vec<(usize, Complex64)>>> = (0..n)
            .map(|l| {
                let power = i32::from(w.c[l]) * i32::from(harmonic);
                let a = measurement_operator(&MeasurementSpec::qutrit(0, nu[l]));
                let b = measurement_operator(&MeasurementSpec::qutrit(1, nu[l]));
                let m = signed_power(&a, power) + signed_power(&b, power) * omega_pow(f64::from(power) / 2.0, 3);
                (0..3)
                    .map(|col| {
                        (0..3)
                            .filter(|&row| m[(row, col)].norm() > PRUNE)
                            .map(|row| (row, m[(row, col)]))
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let mut levels = vec![0usize; n];
        for col in 0..dim {
            let mut rest = col;
            for l in (0..n).rev() {
                levels[l] = rest % 3;
                rest /= 3;
            }
            expand(&local, &levels, 0, 0, f, &mut |row, v| triplets.push((row, col, v)));
        }
    }

    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
    for &(r, c, v) in &triplets {
        rows[r].push((c, v));
        rows[c].push((r, v.conj()));
    }
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for mut row in rows {
        row.sort_by_key(|&(c, _)| c);
        let mut iter = row.into_iter().peekable();
        while let Some((c, mut v)) = iter.next() {
            while let Some(&(c2, v2)) = iter.peek() {
                if c2 != c {
                    break;
                }
                v += v2;
                iter.next();
            }
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(FullBellOperator {
        n_sites: n,
        row_ptr,
        cols,
        vals,
    })
}

fn expand(
    local: &[Vec<Vec<(usize, Complex64)>>],
    levels: &[usize],
    site: usize,
    row: usize,
    acc: Complex64,
    emit: &mut impl FnMut(usize, Complex64),
) {
    if site == levels.len() {
        emit(row, acc);
        return;
    }
    for &(r, v) in &local[site][levels[site]] {
        expand(local, levels, site + 1, row * 3 + r, acc * v, emit);
    }
}

impl FullBellOperator {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[span.clone()].binary_search(&j) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim()).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    /// Largest `|B_ij − conj(B_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `⟨ψ|B|ψ⟩` for real amplitudes on the full space.
    pub fn expectation(&self, psi: &[f64]) -> Result<Complex64> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.len(),
            });
        }
        Ok(self.entries().map(|(i, j, v)| v * (psi[i] * psi[j])).sum())
    }
}
