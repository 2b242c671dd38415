//! Conformal rescaling `g ↦ f² g` and the quantities that behave well under
//! it: the transformation laws of scalar and mean curvature in dimension 4,
//! the invariant `F2` and the Yamabe quotient.
//!
//! The Laplacian has positive spectrum, `Δf = -div grad f`, so that the
//! Yamabe operator `L = 6Δ + R` is positive on the hemisphere.

use crate::boundary::{boundary_integrals, boundary_package};
use crate::curvature::models::{random_field, scan_factor, RadialProfile};
use crate::curvature::{
    curvature_integrals, point_curvature, MetricKind, MetricSpec, ScalarCallback,
};
use crate::grid::BallGrid;
use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Largest `|H_mean|` accepted by [`yamabe_quotient`].
pub const MINIMAL_BOUNDARY_TOL: f64 = 1e-4;

/// A positive function `f`; rescaling multiplies the metric by `f²` in every
/// dimension.
#[derive(Clone)]
pub struct ConformalFactor {
    pub name: String,
    pub radial: bool,
    pub f: ScalarCallback,
}

impl fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalFactor")
            .field("name", &self.name)
            .field("radial", &self.radial)
            .finish()
    }
}

impl ConformalFactor {
    pub fn new(
        name: impl Into<String>,
        radial: bool,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            radial,
            f: Arc::new(f),
        }
    }

    /// `f = e^w`.
    pub fn exponential(
        name: impl Into<String>,
        radial: bool,
        w: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, radial, move |x| w(x).exp())
    }

    pub fn identity() -> Self {
        Self::new("1", true, |_| 1.0)
    }

    /// `e^{amplitude · p}` with `p` a random radial polynomial in `1 - r²`
    /// (vanishing on the boundary) or a random non-radial analytic field.
    pub fn random(dimension: usize, seed: u64, amplitude: f64, radial: bool) -> Self {
        if radial {
            let profile = RadialProfile::random(seed, amplitude, 1, 4);
            Self::exponential(
                format!("radial_factor({seed},{amplitude})"),
                true,
                move |x| profile.eval(x.iter().map(|v| v * v).sum()),
            )
        } else {
            let p = random_field(dimension, seed);
            Self::exponential(
                format!("field_factor({seed},{amplitude})"),
                false,
                move |x| amplitude * p(x),
            )
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// The metric `f² g`.
pub fn rescale(metric: &MetricSpec, factor: &ConformalFactor) -> Result<MetricSpec> {
    scan_factor(metric.dimension, factor.f.as_ref())?;
    let f = factor.f.clone();
    let name = format!("{}*{}", factor.name, metric.name);
    let radial = metric.rotationally_symmetric && factor.radial;
    let mut out = match &metric.kind {
        MetricKind::ConformalToFlat(phi) => {
            let phi = phi.clone();
            MetricSpec::conformal(name, metric.dimension, radial, move |x| phi(x) * f(x))
        }
        MetricKind::GeneralMatrix(g) => {
            let g = g.clone();
            MetricSpec::general(name, metric.dimension, radial, move |x| {
                let s = f(x);
                g(x) * (s * s)
            })
        }
    };
    out.domain_radius = metric.domain_radius;
    Ok(out)
}

fn require_dim4(metric: &MetricSpec) -> Result<()> {
    if metric.dimension != 4 {
        return Err(Error::Unsupported(format!(
            "the transformation laws are implemented in dimension 4, got {}",
            metric.dimension
        )));
    }
    Ok(())
}

/// `|R_{f²g} - f^{-3}(6Δ_g f + R_g f)|` at an interior node (dimension 4).
pub fn scalar_transform_residual(
    metric: &MetricSpec,
    factor: &ConformalFactor,
    grid: &BallGrid,
    x: &[f64],
) -> Result<f64> {
    require_dim4(metric)?;
    let n = metric.dimension;
    let base = point_curvature(metric, grid, x)?;
    let scaled = point_curvature(&rescale(metric, factor)?, grid, x)?;
    let jet = grid
        .fd_engine(metric.domain_radius)?
        .jet2(|p| Ok(vec![factor.value(p)]), x)?;
    let f = jet.value[0];
    let mut trace = 0.0;
    for a in 0..n {
        for b in 0..n {
            let hess = jet.d2[a][b][0]
                - (0..n)
                    .map(|m| base.christoffel.get(m, a, b) * jet.d1[m][0])
                    .sum::<f64>();
            trace += base.ginv[(a, b)] * hess;
        }
    }
    let laplacian = -trace;
    let predicted = (6.0 * laplacian + base.scalar * f) / f.powi(3);
    Ok((scaled.scalar - predicted).abs())
}

/// `|H_mean(f²g) - f^{-2}(∂_N f + H_mean f)|` at a boundary node (dimension 4).
pub fn mean_curvature_transform_residual(
    metric: &MetricSpec,
    factor: &ConformalFactor,
    grid: &BallGrid,
    x: &[f64],
) -> Result<f64> {
    require_dim4(metric)?;
    let base = boundary_package(metric, grid, x)?;
    let scaled = boundary_package(&rescale(metric, factor)?, grid, x)?;
    let jet = grid
        .fd_engine(metric.domain_radius)?
        .jet1(|p| Ok(vec![factor.value(p)]), x)?;
    let f = jet.value[0];
    let normal_derivative: f64 = base.normal.iter().zip(&jet.d1).map(|(v, d)| v * d[0]).sum();
    let predicted = (normal_derivative + base.h_mean * f) / (f * f);
    Ok((scaled.h_mean - predicted).abs())
}

/// The three pieces of `F2 = ∫(R²/96 - |E|²/8) dv + ½∫𝓑 ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F2Parts {
    pub scalar_term: f64,
    pub trace_free_term: f64,
    pub boundary_term: f64,
    pub volume: f64,
    /// `∫ R² dv`, kept for the bound `F2 ≤ ∫R²/96`.
    pub scalar_sq: f64,
}

impl F2Parts {
    pub fn total(&self) -> f64 {
        self.scalar_term - self.trace_free_term + self.boundary_term
    }
}

pub fn f2_parts(metric: &MetricSpec, grid: &BallGrid) -> Result<F2Parts> {
    require_dim4(metric)?;
    let bulk = curvature_integrals(metric, grid)?;
    let boundary = boundary_integrals(metric, grid)?;
    Ok(F2Parts {
        scalar_term: bulk.scalar_sq / 96.0,
        trace_free_term: bulk.trace_free_sq / 8.0,
        boundary_term: 0.5 * boundary.gauss_bonnet,
        volume: bulk.volume,
        scalar_sq: bulk.scalar_sq,
    })
}

pub fn f2_invariant(metric: &MetricSpec, grid: &BallGrid) -> Result<f64> {
    Ok(f2_parts(metric, grid)?.total())
}

/// `∫R dv / Vol^{(n-2)/n}` for a representative with minimal boundary.
pub fn yamabe_quotient(metric: &MetricSpec, grid: &BallGrid) -> Result<f64> {
    let boundary = boundary_integrals(metric, grid)?;
    if boundary.max_abs_h_mean > MINIMAL_BOUNDARY_TOL {
        return Err(Error::Precondition(format!(
            "boundary mean curvature of `{}` reaches {:.3e} (> {MINIMAL_BOUNDARY_TOL:e}); \
             rescale to a representative with minimal boundary first",
            metric.name, boundary.max_abs_h_mean
        )));
    }
    let bulk = curvature_integrals(metric, grid)?;
    let n = metric.dimension as f64;
    Ok(bulk.scalar / bulk.volume.powf((n - 2.0) / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::models;
    use std::f64::consts::PI;

    fn ray(n: usize) -> BallGrid {
        BallGrid::build(n, 48, 4, 1e-3, true).unwrap()
    }

    fn sphere_node(v: &[f64]) -> Vec<f64> {
        let r = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v.iter().map(|t| t / r).collect()
    }

    fn tilt() -> ConformalFactor {
        ConformalFactor::exponential("tilt", true, |x| {
            0.1 * (1.0 - x.iter().map(|v| v * v).sum::<f64>())
        })
    }

    #[test]
    fn rescale_composes_factors() {
        let flat = models::flat(4);
        let same = rescale(&flat, &ConformalFactor::identity()).unwrap();
        let x = [0.2, -0.1, 0.4, 0.3];
        assert_eq!(same.matrix_at(&x), flat.matrix_at(&x));
        let stereo = ConformalFactor::new("stereo", true, models::hemisphere_factor);
        let hemi = rescale(&flat, &stereo).unwrap();
        assert_eq!(hemi.matrix_at(&x), models::hemisphere(4).matrix_at(&x));
        let general = rescale(&models::perturbed_flat(4), &stereo).unwrap();
        let expect =
            models::perturbed_flat(4).matrix_at(&x) * models::hemisphere_factor(&x).powi(2);
        assert_eq!(general.matrix_at(&x), expect);
        let bad = ConformalFactor::new("bad", true, |x| x[0]);
        assert!(rescale(&flat, &bad).is_err());
    }

    #[test]
    fn rescaled_hemisphere_loses_constant_curvature() {
        let g = ray(4);
        let m = rescale(&models::hemisphere(4), &tilt()).unwrap();
        let worst = g
            .map_bulk(|node| Ok((point_curvature(&m, &g, &node.position)?.scalar - 12.0).abs()))
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max);
        assert!(worst > 0.1, "{worst}");
    }

    #[test]
    fn scalar_transform_law() {
        let g = ray(4);
        let x = [0.3, -0.2, 0.1, 0.4];
        let flat = models::flat(4);
        assert_eq!(
            scalar_transform_residual(&flat, &ConformalFactor::identity(), &g, &x).unwrap(),
            0.0
        );
        let stereo = ConformalFactor::new("stereo", true, models::hemisphere_factor);
        // both sides equal 12 for the stereographic factor
        assert!(scalar_transform_residual(&flat, &stereo, &g, &x).unwrap() < 1e-6);
        let quad = ConformalFactor::new("quad", true, |x| {
            1.0 + 0.2 * x.iter().map(|v| v * v).sum::<f64>()
        });
        assert!(scalar_transform_residual(&flat, &quad, &g, &x).unwrap() < 1e-5);
        let bump = models::generic_bump(4, 4, 0.3).unwrap();
        let field = ConformalFactor::random(4, 8, 0.4, false);
        assert!(scalar_transform_residual(&bump, &field, &g, &x).unwrap() < 1e-5);
    }

    #[test]
    fn scalar_transform_law_converges() {
        let x = [0.3, -0.2, 0.1, 0.4];
        let bump = models::generic_bump(4, 4, 0.3).unwrap();
        let field = ConformalFactor::random(4, 8, 0.4, false);
        let e: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&h| {
                scalar_transform_residual(&bump, &field, &ray(4).with_fd_step(h).unwrap(), &x)
                    .unwrap()
            })
            .collect();
        for w in e.windows(2) {
            assert!((w[0] / w[1]).log2() >= 2.5, "{e:?}");
        }
    }

    #[test]
    fn mean_curvature_transform_law() {
        let g = ray(4);
        let x = sphere_node(&[0.3, -0.2, 0.5, 0.1]);
        let flat = models::flat(4);
        assert!(
            mean_curvature_transform_residual(&flat, &ConformalFactor::identity(), &g, &x).unwrap()
                < 1e-12
        );
        let stereo = ConformalFactor::new("stereo", true, models::hemisphere_factor);
        assert!(mean_curvature_transform_residual(&flat, &stereo, &g, &x).unwrap() < 1e-10);
        let cap = models::cap(4, 0.7).unwrap();
        for seed in 0..3 {
            let f = ConformalFactor::random(4, seed, 0.3, true);
            assert!(mean_curvature_transform_residual(&cap, &f, &g, &x).unwrap() < 1e-5);
        }
    }

    #[test]
    fn f2_on_hemisphere_and_flat_ball() {
        let target = 2.0 * PI * PI;
        let hemi = f2_invariant(&models::hemisphere(4), &ray(4)).unwrap();
        assert!((hemi - target).abs() < 1e-6, "{hemi}");
        let flat = f2_invariant(&models::flat(4), &ray(4)).unwrap();
        assert!((flat - target).abs() < 1e-8, "{flat}");
        let tilted = rescale(&models::hemisphere(4), &tilt()).unwrap();
        let v = f2_invariant(&tilted, &ray(4)).unwrap();
        assert!((v - target).abs() < 1e-4, "{v}");
    }

    #[test]
    fn f2_is_bounded_by_scalar_energy_on_minimal_representatives() {
        for seed in 0..4 {
            let m = models::geodesic_bump(4, seed, 0.3).unwrap();
            let parts = f2_parts(&m, &ray(4)).unwrap();
            assert!(parts.total() <= parts.scalar_sq / 96.0 + 1e-6);
        }
    }

    #[test]
    fn yamabe_quotients() {
        let q4 = yamabe_quotient(&models::hemisphere(4), &ray(4)).unwrap();
        assert!((q4 - 8.0 * PI * 3f64.sqrt()).abs() < 1e-6, "{q4}");
        let q6 = yamabe_quotient(&models::hemisphere(6), &ray(6)).unwrap();
        let escobar = 30.0 * (8.0 * PI.powi(3) / 15.0).cbrt();
        assert!((q6 - escobar).abs() < 1e-6, "{q6} vs {escobar}");
        assert!(matches!(
            yamabe_quotient(&models::flat(4), &ray(4)),
            Err(Error::Precondition(_))
        ));
    }
}
