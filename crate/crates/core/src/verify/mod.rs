//! Named checks built from the integral identities, with convergence tables.
//!
//! Every check compares a computed number against a target. Inequalities are
//! stated as equalities on their violation, `max(0, lhs - rhs)` against the
//! target 0, so that every row of a report obeys
//! `pass ⇔ |computed - target| ≤ max(abs_tol, rel_tol·|target|)`.

mod cgb;
mod chain;
mod identities;
mod probe;
mod spectrum;

pub use cgb::{
    boundary_pin_checks, cgb4_check, cgb4_terms, cgb6_check, cgb6_gradient_form_check, cgb6_terms,
    constant_scalar_check, escobar_check, escobar_constant, gradient_form_terms, lcf_terms,
    require_geodesic_boundary, tr_e3_identity_check, tr_e3_terms, Cgb4Terms, Cgb6Terms,
    GradientFormTerms, LcfTerms, TrE3Terms, GAUSS_BONNET_MIN_ORDER, GEODESIC_BOUNDARY_TOL,
    TR_E3_MIN_ORDER,
};
pub use chain::{
    chain_sample, f2_check, f2_invariance_check, inequality_sweep_check, masspo_chain_check,
    run_sweep, sweep_models, ChainSample, Sweep, F2_HEMISPHERE, HEMISPHERE_YAMABE_SQUARED,
    SWEEP_MAX_AMPLITUDE, SWEEP_SIZE,
};
pub use identities::{identity_checks, IdentityCase, IDENTITY_TOL};
pub use probe::{rigidity_probe, ProbeResult, MIN_SUP_NORM};
pub use spectrum::{spectrum_checks, HEMISPHERE_LAMBDA1};

use crate::grid::BallGrid;
use crate::Result;
use serde::Serialize;
use std::time::Instant;

/// Grid parameters of the finest refinement level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridParams {
    pub dimension: usize,
    pub radial: usize,
    pub angular: usize,
    #[serde(serialize_with = "crate::report::num")]
    pub fd_step: f64,
    pub radial_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<usize>,
}

impl GridParams {
    pub fn of(grid: &BallGrid, angular_per_axis: usize) -> Self {
        Self {
            dimension: grid.dimension,
            radial: grid.radial_nodes.len(),
            angular: angular_per_axis,
            fd_step: grid.fd_step,
            radial_only: grid.radial_only,
            mesh: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    /// Finite-difference step, or spectral mesh size, of this level.
    #[serde(serialize_with = "crate::report::num")]
    pub resolution: f64,
    #[serde(serialize_with = "crate::report::num")]
    pub value: f64,
    #[serde(serialize_with = "crate::report::num")]
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub id: String,
    #[serde(serialize_with = "crate::report::num")]
    pub computed: f64,
    #[serde(serialize_with = "crate::report::num")]
    pub target: f64,
    #[serde(serialize_with = "crate::report::num")]
    pub abs_tol: f64,
    #[serde(serialize_with = "crate::report::num")]
    pub rel_tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridParams>,
    pub convergence: Vec<ConvergenceRow>,
    #[serde(serialize_with = "crate::report::opt_num")]
    pub order_estimate: Option<f64>,
    #[serde(serialize_with = "crate::report::num")]
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn abs(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub const fn rel(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub fn accepts(&self, computed: f64, target: f64) -> bool {
        let err = (computed - target).abs();
        err <= self.abs.max(self.rel * target.abs())
    }
}

/// Errors below this multiple of `max(1, |target|)` are treated as exact and
/// yield no order estimate.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Observed order from the last two levels of a table whose resolution
/// halves from one level to the next.
pub fn observed_order(rows: &[ConvergenceRow], target: f64) -> Option<f64> {
    let [.., a, b] = rows else { return None };
    let floor = ROUNDING_FLOOR * target.abs().max(1.0);
    if b.error <= floor || a.error <= floor {
        return None;
    }
    Some((a.error / b.error).log2())
}

impl CheckReport {
    pub fn new(id: impl Into<String>, computed: f64, target: f64, tol: Tolerance) -> Self {
        Self {
            id: id.into(),
            computed,
            target,
            abs_tol: tol.abs,
            rel_tol: tol.rel,
            pass: computed.is_finite() && tol.accepts(computed, target),
            grid: None,
            convergence: Vec::new(),
            order_estimate: None,
            seconds: 0.0,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_grid(mut self, grid: GridParams) -> Self {
        self.grid = Some(grid);
        self
    }

    fn timed(mut self, start: Instant) -> Self {
        self.seconds = start.elapsed().as_secs_f64();
        self
    }

    /// Ensures `order_estimate ≥ min_order` whenever one was measured; an
    /// order below the bound fails the check.
    pub fn require_order(mut self, min_order: f64) -> Self {
        if let Some(p) = self.order_estimate {
            if p < min_order {
                self.pass = false;
                let msg = format!("observed order {p:.2} < {min_order}");
                self.note = Some(match self.note.take() {
                    Some(n) => format!("{n}; {msg}"),
                    None => msg,
                });
            }
        }
        self
    }
}

/// Finest step of the order table built by [`refine`]. At the default step
/// the Gauss-Bonnet integrals already sit at rounding level, so their order
/// is only visible on coarser steps.
pub const ORDER_BASE_STEP: f64 = 0.01;

/// `levels` steps `b·2^(levels-1), ..., b` with `b = max(fd_step,
/// ORDER_BASE_STEP)`; empty for a single level.
pub fn order_steps(fd_step: f64, levels: usize) -> Vec<f64> {
    if levels <= 1 {
        return Vec::new();
    }
    let base = fd_step.max(ORDER_BASE_STEP);
    (0..levels)
        .rev()
        .map(|k| base * f64::from(1u32 << k))
        .collect()
}

/// Evaluates `eval` on the [`order_steps`] for `levels` and at
/// `grid.fd_step`, reports the value at `grid.fd_step` and the order from the
/// last two order steps.
pub fn refine<F>(
    id: &str,
    target: f64,
    tol: Tolerance,
    grid: &BallGrid,
    levels: usize,
    eval: F,
) -> Result<CheckReport>
where
    F: Fn(&BallGrid) -> Result<f64>,
{
    refine_on_steps(
        id,
        target,
        tol,
        grid,
        &order_steps(grid.fd_step, levels),
        eval,
    )
}

/// Like [`refine`], but the order is estimated on the explicit `order_steps`
/// (coarsest first), where truncation error still dominates rounding in
/// nested differences. The reported value is the one at `grid.fd_step`,
/// appended as the last row unless it is already the finest order step.
pub fn refine_on_steps<F>(
    id: &str,
    target: f64,
    tol: Tolerance,
    grid: &BallGrid,
    order_steps: &[f64],
    eval: F,
) -> Result<CheckReport>
where
    F: Fn(&BallGrid) -> Result<f64>,
{
    let start = Instant::now();
    let mut rows = Vec::with_capacity(order_steps.len() + 1);
    for &h in order_steps {
        let value = eval(&grid.with_fd_step(h)?)?;
        rows.push(ConvergenceRow {
            resolution: h,
            value,
            error: (value - target).abs(),
        });
    }
    let order_estimate = observed_order(&rows, target);
    if rows.last().map(|r| r.resolution) != Some(grid.fd_step) {
        let value = eval(grid)?;
        rows.push(ConvergenceRow {
            resolution: grid.fd_step,
            value,
            error: (value - target).abs(),
        });
    }
    let computed = rows.last().expect("at least one row").value;
    let mut report = CheckReport::new(id, computed, target, tol);
    report.order_estimate = order_estimate;
    report.convergence = rows;
    Ok(report.timed(start))
}

/// A single evaluation without refinement, timed.
pub fn single<F>(id: &str, target: f64, tol: Tolerance, eval: F) -> Result<CheckReport>
where
    F: FnOnce() -> Result<f64>,
{
    let start = Instant::now();
    let value = eval()?;
    Ok(CheckReport::new(id, value, target, tol).timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn pass_matches_the_tolerance_rule(
            computed in -1e3f64..1e3,
            target in -1e3f64..1e3,
            abs in 0.0f64..10.0,
            rel in 0.0f64..1e-2,
        ) {
            let r = CheckReport::new("p", computed, target, Tolerance { abs, rel });
            prop_assert_eq!(r.pass, (computed - target).abs() <= abs.max(rel * target.abs()));
        }
    }

    #[test]
    fn tolerance_semantics() {
        assert!(Tolerance::abs(1e-6).accepts(1.0 + 5e-7, 1.0));
        assert!(!Tolerance::abs(1e-6).accepts(1.0 + 2e-6, 1.0));
        assert!(Tolerance::rel(1e-5).accepts(1000.005, 1000.0));
        assert!(!CheckReport::new("nan", f64::NAN, 0.0, Tolerance::abs(1.0)).pass);
    }

    #[test]
    fn order_from_table() {
        let rows: Vec<ConvergenceRow> = [1e-4, 1e-4 / 16.0]
            .iter()
            .map(|&e| ConvergenceRow {
                resolution: 0.0,
                value: 1.0 + e,
                error: e,
            })
            .collect();
        assert!((observed_order(&rows, 1.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(observed_order(&rows[..1], 1.0).is_none());
        let exact = vec![
            rows[0].clone(),
            ConvergenceRow {
                resolution: 0.0,
                value: 1.0,
                error: 0.0,
            },
        ];
        assert!(observed_order(&exact, 1.0).is_none());
    }

    #[test]
    fn refine_uses_coarse_steps_for_the_order() {
        assert_eq!(order_steps(1e-3, 3), vec![0.04, 0.02, 0.01]);
        assert_eq!(order_steps(0.02, 2), vec![0.04, 0.02]);
        assert!(order_steps(1e-3, 1).is_empty());
        let grid = BallGrid::build(4, 8, 4, 1e-3, true).unwrap();
        let r = refine("h2", 0.0, Tolerance::abs(1.0), &grid, 3, |g| {
            Ok(g.fd_step.powi(2))
        })
        .unwrap();
        let steps: Vec<f64> = r.convergence.iter().map(|c| c.resolution).collect();
        assert_eq!(steps, vec![0.04, 0.02, 0.01, 1e-3]);
        assert!((r.order_estimate.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(r.computed, 1e-6);
        assert!(!r.clone().require_order(3.0).pass);
        let single = refine("h2", 0.0, Tolerance::abs(1.0), &grid, 1, |g| Ok(g.fd_step)).unwrap();
        assert_eq!(single.convergence.len(), 1);
        assert!(single.order_estimate.is_none());
    }

    #[test]
    fn order_steps_then_default_value() {
        let grid = BallGrid::build(4, 8, 4, 1e-3, true).unwrap();
        let r = refine_on_steps("h3", 0.0, Tolerance::abs(1e-6), &grid, &[8e-3, 4e-3], |g| {
            Ok(g.fd_step.powi(3))
        })
        .unwrap();
        assert_eq!(r.convergence.len(), 3);
        assert!((r.order_estimate.unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(r.computed, 1e-9);
        assert!(r.pass);
    }
}
