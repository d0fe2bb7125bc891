use super::correlator::{bell_from_correlators, correlators, BellWeights, CorrelatorSet};
use crate::error::{Error, Result};
use crate::state::SectorState;

/// Optional replacements for the maximizing angles.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AngleOverrides {
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub theta_nu: Option<f64>,
}

impl AngleOverrides {
    pub fn weights(&self, n: usize, f_ratio: f64) -> BellWeights {
        let mut w = BellWeights::maximizing(n, f_ratio);
        if let Some(t) = self.theta1 {
            w.theta1 = t;
        }
        if let Some(t) = self.theta2 {
            w.theta2 = t;
        }
        if let Some(t) = self.theta_nu {
            w.theta_nu = t;
        }
        w
    }
}

/// Grid-then-refine scan of `f̃ = |f_2|/|f_1|` over `(0, f_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioScan {
    pub f_max: f64,
    pub points: usize,
    /// Golden-section bracket width at which refinement stops.
    pub tol: f64,
    pub angles: AngleOverrides,
}

impl Default for RatioScan {
    fn default() -> Self {
        Self {
            f_max: 4.0,
            points: 400,
            tol: 1e-10,
            angles: AngleOverrides::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMaximum {
    pub f_ratio: f64,
    pub ratio: f64,
    pub violating: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightOptimum {
    pub correlators: CorrelatorSet,
    /// Largest local maximum of `B/β_LR`; `None` for a flat objective.
    pub f_best: Option<f64>,
    pub ratio: f64,
    pub bell: f64,
    pub beta_lr: f64,
    /// Every local maximum, largest ratio first.
    pub maxima: Vec<LocalMaximum>,
}

/// Maximizes `B(f̃)/β_LR(f̃)` for the given state at fixed angles.
pub fn optimize_weight_ratio<F>(state: &SectorState, beta_fn: F, scan: &RatioScan) -> Result<WeightOptimum>
where
    F: Fn(&BellWeights) -> f64,
{
    if scan.points < 3 || !(scan.f_max > 0.0) {
        return Err(Error::InvalidArgument("f̃ scan needs f_max > 0 and at least 3 points".into()));
    }
    let n = state.n_sites();
    let base = scan.angles.weights(n, 0.0);
    let g = correlators(state, &base.c)?;
    if g.g1.norm() == 0.0 && g.g2.norm() == 0.0 {
        return Ok(WeightOptimum {
            correlators: g,
            f_best: None,
            ratio: 0.0,
            bell: 0.0,
            beta_lr: beta_fn(&base.with_f_ratio(1.0)),
            maxima: Vec::new(),
        });
    }
    let evaluate = |f: f64| {
        let w = base.with_f_ratio(f);
        let bell = bell_from_correlators(n, &g, &w);
        let bound = beta_fn(&w);
        (bell / bound, bell, bound)
    };
    let ratio = |f: f64| evaluate(f).0;

    let step = scan.f_max / scan.points as f64;
    let grid: Vec<f64> = (1..=scan.points).map(|i| step * i as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&f| ratio(f)).collect();

    let mut maxima = Vec::new();
    for i in 0..grid.len() {
        let left = if i > 0 { values[i - 1] } else { f64::NEG_INFINITY };
        let right = values.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        // strict on the left so plateaus report once
        if values[i] > left && values[i] >= right {
            let lo = if i > 0 { grid[i - 1] } else { 0.0 };
            let hi = grid.get(i + 1).copied().unwrap_or(scan.f_max);
            let (f, r) = golden_max(&ratio, lo, hi, scan.tol, grid[i], values[i]);
            maxima.push(LocalMaximum {
                f_ratio: f,
                ratio: r,
                violating: r > 1.0,
            });
        }
    }
    maxima.sort_by(|a, b| b.ratio.total_cmp(&a.ratio));
    let best = maxima[0];
    let (ratio, bell, beta_lr) = evaluate(best.f_ratio);
    Ok(WeightOptimum {
        correlators: g,
        f_best: Some(best.f_ratio),
        ratio,
        bell,
        beta_lr,
        maxima,
    })
}

/// Golden-section maximization on `[lo, hi]`; never returns worse than the
/// supplied grid point.
pub(crate) fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, x0: f64, f0: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    let (mut best_x, mut best_f) = (x0, f0);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
        for (x, v) in [(a, fa), (b, fb)] {
            if v > best_f {
                best_x = x;
                best_f = v;
            }
        }
    }
    (best_x, best_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::psi_max_state;
    use crate::hilbert::enumerate_sector;
    use crate::lrbound::LrBoundTable;
    use std::sync::Arc;

    #[test]
    fn flat_objective_for_uniform_state() {
        let basis = Arc::new(enumerate_sector(4, 0).unwrap());
        let s = SectorState::from_terms(basis, &[("1111", 1.0)]).unwrap();
        let table = LrBoundTable::alternating(4);
        let opt = optimize_weight_ratio(&s, |w| table.bound(w), &RatioScan::default()).unwrap();
        assert_eq!(opt.ratio, 0.0);
        assert!(opt.maxima.is_empty());
        assert!(opt.f_best.is_none());
    }

    #[test]
    fn psi_max_states_peak_near_their_own_weight() {
        // the bound is piecewise linear in f̃, so the optimum sits on a kink
        let cases = [(4usize, 1.039), (6, 0.7423), (8, 0.5502)];
        for &(n, f) in &cases {
            let p = psi_max_state(n, f).unwrap();
            let s = p.state(Arc::new(enumerate_sector(n, 0).unwrap())).unwrap();
            let table = LrBoundTable::alternating(n);
            let opt = optimize_weight_ratio(&s, |w| table.bound(w), &RatioScan::default()).unwrap();
            let best = opt.f_best.unwrap();
            assert!((best - f).abs() < 5e-3, "n={n}: {best}");
            assert!(opt.ratio > 1.0);
            assert!(opt.maxima[0].violating);
        }
    }

    #[test]
    fn golden_section_finds_interior_peak() {
        let f = |x: f64| -(x - 0.3712).abs();
        let (x, _) = golden_max(&f, 0.0, 1.0, 1e-12, 0.5, f(0.5));
        assert!((x - 0.3712).abs() < 1e-9);
    }
}
