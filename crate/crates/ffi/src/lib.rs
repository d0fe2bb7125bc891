//! C ABI over `spinbell`.
//!
//! Every function returns an [`SbStatus`]; on failure the message is
//! available from [`sb_last_error_message`] on the same thread. Ground
//! states are opaque handles released with [`sb_ground_state_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use spinbell::bell::{bell_correlation, optimize_weight_ratio, psi_max_state, BellWeights, RatioScan};
use spinbell::diagnostics::entanglement_entropy;
use spinbell::eigensolver::{ground_state_with, GroundState, SolverOptions};
use spinbell::hamiltonian::{build_hamiltonian, HamiltonianParams};
use spinbell::hilbert::enumerate_sector;
use spinbell::lrbound::LrBoundTable;
use spinbell::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SizeLimit = 3,
    NotConverged = 4,
    OddChain = 5,
    EmptySector = 6,
    BufferTooSmall = 7,
    Io = 8,
    Panic = 9,
}

/// Weights `f_n = |f_n| e^{iθ_n}` and total phase angle; the conjugation
/// pattern is the alternating one.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SbWeights {
    pub f1_mag: f64,
    pub f2_mag: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta_nu: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SbBellResult {
    pub g1: f64,
    pub g2: f64,
    /// NaN when the correlators vanish.
    pub f_ratio: f64,
    pub bell: f64,
    pub beta_lr: f64,
    pub ratio: f64,
}

/// Opaque ground state.
pub struct SbGroundState {
    inner: GroundState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> SbStatus {
    match err {
        Error::SizeLimit { .. } => SbStatus::SizeLimit,
        Error::NotConverged { .. } => SbStatus::NotConverged,
        Error::OddChain(_) => SbStatus::OddChain,
        Error::EmptySector { .. } => SbStatus::EmptySector,
        Error::Io(_) => SbStatus::Io,
        _ => SbStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (SbStatus, String)>) -> SbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SbStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SbStatus::Panic
        }
    }
}

fn lib(err: Error) -> (SbStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (SbStatus, String) {
    (SbStatus::NullPointer, format!("{name} is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (SbStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a>(p: *const SbGroundState) -> Result<&'a SbGroundState, (SbStatus, String)> {
    p.as_ref().ok_or_else(|| null("state"))
}

fn weights(n: usize, w: &SbWeights) -> BellWeights {
    BellWeights {
        f1_mag: w.f1_mag,
        f2_mag: w.f2_mag,
        theta1: w.theta1,
        theta2: w.theta2,
        theta_nu: w.theta_nu,
        ..BellWeights::maximizing(n, 0.0)
    }
}

/// Message for the last failing call on this thread; empty after a
/// success. Valid until the next call into the library.
#[no_mangle]
pub extern "C" fn sb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn sb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The maximizing weights for `n` sites at ratio `f_ratio`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_weights_maximizing(n: usize, f_ratio: f64, out: *mut SbWeights) -> SbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let w = BellWeights::maximizing(n, f_ratio);
        *out = SbWeights {
            f1_mag: w.f1_mag,
            f2_mag: w.f2_mag,
            theta1: w.theta1,
            theta2: w.theta2,
            theta_nu: w.theta_nu,
        };
        Ok(())
    })
}

/// Ground state of the `n`-site chain in the `Mz = 0` sector. `tol <= 0`
/// selects the default tolerance.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_ground_state_new(
    n: usize,
    jz: f64,
    d: f64,
    periodic: bool,
    tol: f64,
    seed: u64,
    out: *mut *mut SbGroundState,
) -> SbStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        let basis = Arc::new(enumerate_sector(n, 0).map_err(lib)?);
        let params = HamiltonianParams { jz, d, n, periodic };
        let h = build_hamiltonian(&params, basis).map_err(lib)?;
        let mut opts = SolverOptions {
            seed,
            ..SolverOptions::default()
        };
        if tol > 0.0 {
            opts.tol = tol;
        }
        let gs = ground_state_with(&h, &opts).map_err(lib)?;
        *out = Box::into_raw(Box::new(SbGroundState { inner: gs }));
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle from [`sb_ground_state_new`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn sb_ground_state_free(state: *mut SbGroundState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `energy` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_ground_state_energy(state: *const SbGroundState, energy: *mut f64) -> SbStatus {
    guard(|| {
        *out_ref(energy, "energy")? = handle(state)?.inner.energy;
        Ok(())
    })
}

/// Whether the flip-odd sector is degenerate with the ground state.
///
/// # Safety
/// `state` must be a live handle; `degenerate` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_ground_state_degenerate(state: *const SbGroundState, degenerate: *mut bool) -> SbStatus {
    guard(|| {
        *out_ref(degenerate, "degenerate")? = handle(state)?.inner.degenerate;
        Ok(())
    })
}

/// Sector dimension, the length needed by the copy functions.
///
/// # Safety
/// `state` must be a live handle; `dim` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_ground_state_dim(state: *const SbGroundState, dim: *mut usize) -> SbStatus {
    guard(|| {
        *out_ref(dim, "dim")? = handle(state)?.inner.state.amplitudes().len();
        Ok(())
    })
}

/// Copies the amplitudes and their base-3 packed configurations (site 0
/// most significant). Either buffer may be null.
///
/// # Safety
/// Non-null buffers must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn sb_ground_state_copy(
    state: *const SbGroundState,
    amplitudes: *mut f64,
    configs: *mut u32,
    len: usize,
) -> SbStatus {
    guard(|| {
        let s = &handle(state)?.inner.state;
        let dim = s.amplitudes().len();
        if len < dim {
            return Err((SbStatus::BufferTooSmall, format!("buffer holds {len}, need {dim}")));
        }
        if !amplitudes.is_null() {
            std::slice::from_raw_parts_mut(amplitudes, dim).copy_from_slice(s.amplitudes());
        }
        if !configs.is_null() {
            std::slice::from_raw_parts_mut(configs, dim).copy_from_slice(s.basis().packed_configs());
        }
        Ok(())
    })
}

/// Entropy of sites `0..cut`, natural log.
///
/// # Safety
/// `state` must be a live handle; `entropy` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_entanglement_entropy(state: *const SbGroundState, cut: usize, entropy: *mut f64) -> SbStatus {
    guard(|| {
        let out = out_ref(entropy, "entropy")?;
        *out = entanglement_entropy(&handle(state)?.inner.state, cut).map_err(lib)?;
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle, `w` readable, `bell` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_bell_correlation(state: *const SbGroundState, w: *const SbWeights, bell: *mut f64) -> SbStatus {
    guard(|| {
        let s = &handle(state)?.inner.state;
        let w = w.as_ref().ok_or_else(|| null("w"))?;
        let out = out_ref(bell, "bell")?;
        *out = bell_correlation(s, &weights(s.n_sites(), w)).map_err(lib)?;
        Ok(())
    })
}

/// Optimal `f̃` in `(0, f_max]` at the maximizing angles.
///
/// # Safety
/// `state` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_optimize_weight_ratio(
    state: *const SbGroundState,
    f_max: f64,
    points: usize,
    out: *mut SbBellResult,
) -> SbStatus {
    guard(|| {
        let s = &handle(state)?.inner.state;
        let out = out_ref(out, "out")?;
        let table = LrBoundTable::alternating(s.n_sites());
        let scan = RatioScan {
            f_max,
            points,
            ..RatioScan::default()
        };
        let opt = optimize_weight_ratio(s, |w| table.bound(w), &scan).map_err(lib)?;
        *out = SbBellResult {
            g1: opt.correlators.g1.re,
            g2: opt.correlators.g2.re,
            f_ratio: opt.f_best.unwrap_or(f64::NAN),
            bell: opt.bell,
            beta_lr: opt.beta_lr,
            ratio: opt.ratio,
        };
        Ok(())
    })
}

/// Local-realistic bound for `n` parties (exact dynamic program).
///
/// # Safety
/// `w` readable; `bound` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_lr_bound(n: usize, w: *const SbWeights, bound: *mut f64) -> SbStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("w"))?;
        let out = out_ref(bound, "bound")?;
        if n == 0 {
            return Err(lib(Error::InvalidSize(0)));
        }
        *out = spinbell::lrbound::lr_bound_dp(n, &weights(n, w)).map_err(lib)?;
        Ok(())
    })
}

/// `b` and the restricted-operator eigenvalue of ψ_max.
///
/// # Safety
/// `b` and `eigenvalue` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sb_psi_max(n: usize, f_ratio: f64, b: *mut f64, eigenvalue: *mut f64) -> SbStatus {
    guard(|| {
        let b = out_ref(b, "b")?;
        let eigenvalue = out_ref(eigenvalue, "eigenvalue")?;
        let p = psi_max_state(n, f_ratio).map_err(lib)?;
        *b = p.b;
        *eigenvalue = p.eigenvalue;
        Ok(())
    })
}
