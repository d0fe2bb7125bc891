//! Generalized Bell correlations of the `(N, 3)` scenario with two Fourier
//! measurement settings per party.
//!
//! Combining the two Fourier measurements of one party gives the lower
//! shift operator, `Â^n + ω^{n/2} B̂^n = 2 ω^{nν} Ĵ^n`, so on a
//! fixed-magnetization state the full Bell operator reduces to the two
//! shift correlators `⟨⊗_l Ĵ_l^{c_l n}⟩`, `n = 1, 2`.

mod correlator;
mod full_operator;
mod measurement;
mod optimize;
mod psi_max;

pub use correlator::{
    alternating_pattern, bell_correlation, bell_from_correlators, correlators, shift_correlator, BellWeights,
    Correlator, CorrelatorSet,
};
pub use full_operator::{build_full_bell_operator, FullBellOperator, FULL_OPERATOR_MAX_SITES};
pub use measurement::{
    fourier_basis, lower_shift, measurement_operator, omega_pow, signed_power, MeasurementSpec,
};
pub use optimize::{optimize_weight_ratio, AngleOverrides, LocalMaximum, RatioScan, WeightOptimum};
pub use psi_max::{psi_max_state, restricted_operator, PsiMax};
