use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `ω^x = exp(2πi x / d)`.
pub fn omega_pow(x: f64, d: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x / d as f64)
}

/// One local measurement: `d` outcomes, setting `m ∈ {0, 1}` and local phase `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSpec {
    pub d: usize,
    pub setting: u8,
    pub nu: f64,
}

impl MeasurementSpec {
    pub fn qutrit(setting: u8, nu: f64) -> Self {
        Self { d: 3, setting, nu }
    }
}

/// Fourier basis of setting `m`: column `α` has amplitude
/// `ω^{β(α + m/2 − ν)} / √d` on computational state `β`.
pub fn fourier_basis(d: usize, m: u8, nu: f64) -> DMatrix<Complex64> {
    assert!(d >= 2, "need at least two outcomes");
    assert!(m <= 1, "setting label must be 0 or 1");
    let norm = 1.0 / (d as f64).sqrt();
    DMatrix::from_fn(d, d, |beta, alpha| {
        omega_pow(beta as f64 * (alpha as f64 + f64::from(m) / 2.0 - nu), d) * norm
    })
}

/// `Σ_α ω^α |α(m)⟩⟨α(m)|`.
pub fn measurement_operator(spec: &MeasurementSpec) -> DMatrix<Complex64> {
    let basis = fourier_basis(spec.d, spec.setting, spec.nu);
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(spec.d, |a, _| omega_pow(a as f64, spec.d)));
    &basis * phases * basis.adjoint()
}

/// `Ĵ = Σ_{β≥1} |β−1⟩⟨β|`.
pub fn lower_shift(d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |r, c| if c == r + 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// `M^k` for `k ≥ 0` and `(M†)^{|k|}` for `k < 0`.
pub fn signed_power(m: &DMatrix<Complex64>, k: i32) -> DMatrix<Complex64> {
    let base = if k < 0 { m.adjoint() } else { m.clone() };
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k.unsigned_abs() {
        out = &out * &base;
    }
    out
}
