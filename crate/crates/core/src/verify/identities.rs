//! Pointwise tensor identities of locally conformally flat metrics, sampled
//! on seeded models, plus the integrated `Tr(E³)` identity.

use super::cgb::lcf_terms;
use super::{refine_on_steps, CheckReport, Tolerance};
use crate::boundary::codazzi_residual;
use crate::curvature::identities::{
    contracted_bianchi_residual, lcf_laplace_trace_free_residual, lcf_weyl_residual,
    weyl_decomposition_residual_dim6, weyl_norm, LCF_LAPLACIAN_SIGN,
};
use crate::curvature::{models, MetricSpec};
use crate::grid::BallGrid;
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const IDENTITY_TOL: f64 = 1e-4;
const SAMPLE_POINTS: usize = 4;
/// Quadrature nodes of the small grids used for pointwise checks; only their
/// steps matter.
const POINT_GRID_RADIAL: usize = 8;

type Residual = Box<dyn Fn(&BallGrid) -> Result<f64> + Sync>;

/// One identity on one model: the residual as a function of the grid, the
/// steps on which its order is measured and the order it must reach.
pub struct IdentityCase {
    pub id: String,
    pub dimension: usize,
    pub order_steps: Vec<f64>,
    pub min_order: f64,
    /// Use the full radial resolution instead of a small point grid.
    pub integrated: bool,
    residual: Residual,
}

impl std::fmt::Debug for IdentityCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdentityCase")
            .field("id", &self.id)
            .field("order_steps", &self.order_steps)
            .field("min_order", &self.min_order)
            .finish()
    }
}

fn points(n: usize, seed: u64, max_radius: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..SAMPLE_POINTS)
        .map(|_| {
            let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let r = max_radius * rng.gen_range(0.3..1.0);
            dir.iter().map(|v| r * v / norm).collect()
        })
        .collect()
}

fn sphere_points(n: usize, seed: u64) -> Vec<Vec<f64>> {
    points(n, seed, 1.0)
        .into_iter()
        .map(|x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter().map(|v| v / r).collect()
        })
        .collect()
}

fn worst_over<F>(metric: MetricSpec, xs: Vec<Vec<f64>>, f: F) -> Residual
where
    F: Fn(&MetricSpec, &BallGrid, &[f64]) -> Result<f64> + Sync + 'static,
{
    Box::new(move |g: &BallGrid| {
        let mut worst = 0.0_f64;
        for x in &xs {
            worst = worst.max(f(&metric, g, x)?);
        }
        Ok(worst)
    })
}

impl IdentityCase {
    fn pointwise(
        id: String,
        dimension: usize,
        order_steps: &[f64],
        min_order: f64,
        residual: Residual,
    ) -> Self {
        Self {
            id,
            dimension,
            order_steps: order_steps.to_vec(),
            min_order,
            integrated: false,
            residual,
        }
    }

    /// The seeded catalogue. Orders are measured on steps where truncation
    /// dominates: residuals built from second derivatives only go down to
    /// rounding quickly and are measured on coarse steps; those with nested
    /// derivatives are measured near the default step.
    pub fn catalogue(seed: u64) -> Result<Vec<Self>> {
        const SECOND: &[f64] = &[0.04, 0.02, 0.01];
        const NESTED_LAPLACE: &[f64] = &[8e-3, 4e-3, 2e-3];
        const NESTED: &[f64] = &[4e-3, 2e-3, 1e-3];
        let bump4 = models::generic_bump(4, seed, 0.2)?;
        let bump6 = models::generic_bump(6, seed, 0.2)?;
        let mut cases = vec![
            Self::pointwise(
                format!("weyl_lcf:{}:n4", bump4.name),
                4,
                SECOND,
                3.5,
                worst_over(bump4.clone(), points(4, seed, 0.9), lcf_weyl_residual),
            ),
            Self::pointwise(
                format!("weyl_lcf:{}:n6", bump6.name),
                6,
                SECOND,
                3.5,
                worst_over(bump6, points(6, seed, 0.9), lcf_weyl_residual),
            ),
            Self::pointwise(
                "weyl_lcf:warped_hemisphere(0.2):n4".into(),
                4,
                SECOND,
                3.5,
                worst_over(
                    models::warped_hemisphere(4, 0.2),
                    points(4, seed, 0.9),
                    weyl_norm,
                ),
            ),
            Self::pointwise(
                "weyl_dim6:warped_hemisphere(0.2)".into(),
                6,
                SECOND,
                3.5,
                worst_over(
                    models::warped_hemisphere(6, 0.2),
                    points(6, seed, 0.9),
                    weyl_decomposition_residual_dim6,
                ),
            ),
            Self::pointwise(
                format!("laplace_trace_free:{}:n4", bump4.name),
                4,
                NESTED_LAPLACE,
                2.5,
                worst_over(bump4.clone(), points(4, seed, 0.5), |m, g, x| {
                    lcf_laplace_trace_free_residual(m, g, x, LCF_LAPLACIAN_SIGN)
                }),
            ),
            Self::pointwise(
                format!("codazzi:{}:n4", bump4.name),
                4,
                NESTED,
                2.5,
                worst_over(bump4.clone(), sphere_points(4, seed), codazzi_residual),
            ),
            Self::pointwise(
                format!("bianchi:{}:n4", bump4.name),
                4,
                NESTED,
                2.5,
                worst_over(bump4, points(4, seed, 0.9), contracted_bianchi_residual),
            ),
        ];
        for n in [4, 6] {
            let m = models::radial_bump(n, 11, 0.15)?;
            cases.push(Self {
                id: format!("tr_e3:{}:n{n}", m.name),
                dimension: n,
                order_steps: NESTED_LAPLACE.to_vec(),
                min_order: 2.5,
                integrated: true,
                residual: Box::new(move |g: &BallGrid| Ok(lcf_terms(&m, g)?.tr_e3_residual())),
            });
        }
        Ok(cases)
    }

    /// Runs the case at `fd_step`; integrated cases use `radial` nodes on a
    /// single ray.
    pub fn run(&self, radial: usize, fd_step: f64) -> Result<CheckReport> {
        let count = if self.integrated {
            radial
        } else {
            POINT_GRID_RADIAL
        };
        let grid = BallGrid::build(self.dimension, count, 4, fd_step, true)?;
        let report = refine_on_steps(
            &self.id,
            0.0,
            Tolerance::abs(IDENTITY_TOL),
            &grid,
            &self.order_steps,
            &self.residual,
        )?;
        Ok(report.require_order(self.min_order))
    }
}

pub fn identity_checks(seed: u64, radial: usize, fd_step: f64) -> Result<Vec<CheckReport>> {
    IdentityCase::catalogue(seed)?
        .iter()
        .map(|c| c.run(radial, fd_step))
        .collect()
}
