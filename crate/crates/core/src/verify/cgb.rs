//! Gauss-Bonnet checks in dimensions 4 and 6 and the integrated `Tr(E³)`
//! identity.

use super::{refine, single, CheckReport, GridParams, Tolerance};
use crate::boundary::{boundary_integrals, boundary_package, boundary_packages};
use crate::conformal::yamabe_quotient;
use crate::curvature::{
    curvature_integrals, curvature_package, models, CurvaturePackage, MetricSpec,
};
use crate::grid::quadrature::sphere_volume;
use crate::grid::{integrate_boundary_many, integrate_bulk_many, BallGrid};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Largest boundary `|H_mean|` and umbilicity residual accepted as a totally
/// geodesic boundary.
pub const GEODESIC_BOUNDARY_TOL: f64 = 1e-6;
/// Smallest accepted order of the Gauss-Bonnet tables.
pub const GAUSS_BONNET_MIN_ORDER: f64 = 3.5;
/// Smallest accepted order of the `Tr(E³)` residual, which involves nested
/// derivatives.
pub const TR_E3_MIN_ORDER: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cgb4Terms {
    /// `∫ |W|² dv`.
    pub weyl: f64,
    /// `∫ (R²/6 - 2|E|²) dv`.
    pub scalar: f64,
    /// `8 ∫ 𝓑 ds`.
    pub boundary: f64,
}

impl Cgb4Terms {
    pub fn chi(&self) -> f64 {
        (self.weyl + self.scalar + self.boundary) / (32.0 * PI * PI)
    }
}

fn require_dim(metric: &MetricSpec, n: usize) -> Result<()> {
    if metric.dimension != n {
        return Err(Error::Precondition(format!(
            "`{}` has dimension {}, this check needs {n}",
            metric.name, metric.dimension
        )));
    }
    Ok(())
}

pub fn cgb4_terms(metric: &MetricSpec, grid: &BallGrid) -> Result<Cgb4Terms> {
    require_dim(metric, 4)?;
    let bulk = curvature_integrals(metric, grid)?;
    let boundary = boundary_integrals(metric, grid)?;
    Ok(Cgb4Terms {
        weyl: bulk.weyl_sq,
        scalar: bulk.scalar_sq / 6.0 - 2.0 * bulk.trace_free_sq,
        boundary: 8.0 * boundary.gauss_bonnet,
    })
}

/// `χ̂ = (∫|W|² + ∫(R²/6 - 2|E|²) + 8∫𝓑) / 32π²` against `χ = 1`.
pub fn cgb4_check(
    metric: &MetricSpec,
    grid: &BallGrid,
    angular: usize,
    levels: usize,
    tol: Tolerance,
) -> Result<CheckReport> {
    require_dim(metric, 4)?;
    let id = format!("cgb4:{}", metric.name);
    let report = refine(&id, 1.0, tol, grid, levels, |g| {
        Ok(cgb4_terms(metric, g)?.chi())
    })?;
    Ok(report
        .with_grid(GridParams::of(grid, angular))
        .require_order(GAUSS_BONNET_MIN_ORDER))
}

/// Bulk and boundary integrals entering the dimension-6 formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcfTerms {
    pub dimension: usize,
    pub volume: f64,
    /// `∫ Tr(E³) dv`.
    pub tr_e3: f64,
    /// `∫ R |E|² dv`.
    pub r_e2: f64,
    /// `∫ R³ dv`.
    pub r3: f64,
    /// `∫ |∇R|² dv`.
    pub grad_r: f64,
    /// `∫ |∇E|² dv`.
    pub grad_e: f64,
    /// `∫ ½ ∂_N |E|² ds`.
    pub normal_e2: f64,
    /// `∫ E(N, ∇R) ds`.
    pub e_normal_grad_r: f64,
}

pub type Cgb6Terms = LcfTerms;
pub type GradientFormTerms = LcfTerms;
pub type TrE3Terms = LcfTerms;

fn normal_terms(pkg: &CurvaturePackage, normal: &[f64]) -> (f64, f64) {
    let pc = &pkg.point;
    let n = pc.dim();
    let e_up = &pc.ginv * &pc.trace_free * &pc.ginv;
    let mut half_normal_e2 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                half_normal_e2 += normal[a] * pkg.cov_trace_free.get(a, b, c) * e_up[(b, c)];
            }
        }
    }
    let grad_up = &pc.ginv * nalgebra::DVector::from_column_slice(&pkg.scalar_gradient);
    let mut e_n_grad = 0.0;
    for a in 0..n {
        for b in 0..n {
            e_n_grad += pc.trace_free[(a, b)] * normal[a] * grad_up[b];
        }
    }
    (half_normal_e2, e_n_grad)
}

pub fn lcf_terms(metric: &MetricSpec, grid: &BallGrid) -> Result<LcfTerms> {
    metric.validate(grid)?;
    let bulk = integrate_bulk_many(grid, 6, |node| {
        let pkg = curvature_package(metric, grid, &node.position)?;
        let pc = &pkg.point;
        let dv = pc.volume_density;
        let r = pc.scalar;
        Ok(vec![
            dv,
            pc.trace_free_cubed * dv,
            r * pc.trace_free_norm_sq * dv,
            r * r * r * dv,
            pkg.scalar_gradient_norm_sq * dv,
            pkg.cov_trace_free_norm_sq * dv,
        ])
    })?;
    let boundary = integrate_boundary_many(grid, 2, |_, x| {
        let bp = boundary_package(metric, grid, x)?;
        let pkg = curvature_package(metric, grid, x)?;
        let (a, b) = normal_terms(&pkg, &bp.normal);
        Ok(vec![a * bp.area_density, b * bp.area_density])
    })?;
    Ok(LcfTerms {
        dimension: metric.dimension,
        volume: bulk[0],
        tr_e3: bulk[1],
        r_e2: bulk[2],
        r3: bulk[3],
        grad_r: bulk[4],
        grad_e: bulk[5],
        normal_e2: boundary[0],
        e_normal_grad_r: boundary[1],
    })
}

pub fn cgb6_terms(metric: &MetricSpec, grid: &BallGrid) -> Result<Cgb6Terms> {
    lcf_terms(metric, grid)
}

pub fn gradient_form_terms(metric: &MetricSpec, grid: &BallGrid) -> Result<GradientFormTerms> {
    lcf_terms(metric, grid)
}

pub fn tr_e3_terms(metric: &MetricSpec, grid: &BallGrid) -> Result<TrE3Terms> {
    lcf_terms(metric, grid)
}

impl LcfTerms {
    fn nf(&self) -> f64 {
        self.dimension as f64
    }

    /// `(∫Tr(E³) - (2/5)∫R|E|² + (4/225)∫R³) / 256π³`.
    pub fn cgb6_chi(&self) -> f64 {
        (self.tr_e3 - 0.4 * self.r_e2 + 4.0 / 225.0 * self.r3) / (256.0 * PI.powi(3))
    }

    /// Right-hand side of the integrated `Tr(E³)` identity, as obtained by
    /// pairing the `ΔE` identity with `E` and integrating by parts:
    ///
    /// ```text
    /// (n-2)³/(4n²(n-1)) ∫|∇R|² - (n-2)/n ∫|∇E|² - (n-2)/(n(n-1)) ∫R|E|²
    ///   + (n-2)/n ∫_∂ (½∂_N|E|² - ½ (n-2)/(n-1) E(N,∇R))
    /// ```
    pub fn tr_e3_rhs(&self) -> f64 {
        let n = self.nf();
        let c = (n - 2.0) / (n - 1.0);
        (n - 2.0).powi(3) / (4.0 * n * n * (n - 1.0)) * self.grad_r
            - (n - 2.0) / n * self.grad_e
            - (n - 2.0) / (n * (n - 1.0)) * self.r_e2
            + (n - 2.0) / n * (self.normal_e2 - 0.5 * c * self.e_normal_grad_r)
    }

    /// The same identity with `+(n-2)/(n(n-1)) ∫R|E|²` and a unit coefficient
    /// on `E(N,∇R)`, the form in which it is usually quoted.
    pub fn tr_e3_rhs_quoted(&self) -> f64 {
        let n = self.nf();
        (n - 2.0).powi(3) / (4.0 * n * n * (n - 1.0)) * self.grad_r - (n - 2.0) / n * self.grad_e
            + (n - 2.0) / (n * (n - 1.0)) * self.r_e2
            + (n - 2.0) / n * (self.normal_e2 - self.e_normal_grad_r)
    }

    /// `|LHS - RHS| / (1 + |LHS|)` of the `Tr(E³)` identity.
    pub fn tr_e3_residual(&self) -> f64 {
        (self.tr_e3 - self.tr_e3_rhs()).abs() / (1.0 + self.tr_e3.abs())
    }

    pub fn tr_e3_residual_quoted(&self) -> f64 {
        (self.tr_e3 - self.tr_e3_rhs_quoted()).abs() / (1.0 + self.tr_e3.abs())
    }

    /// Dimension-6 Gauss-Bonnet with `Tr(E³)` eliminated through the identity
    /// above, divided by `384π³`:
    ///
    /// ```text
    /// (2/75)∫R³ + (2/15)∫|∇R|² - ∫|∇E|² - (4/5)∫R|E|² + ∫_∂(½∂_N|E|² - (2/5)E(N,∇R))
    /// ```
    pub fn gradient_form_chi(&self) -> f64 {
        (2.0 / 75.0 * self.r3 + 2.0 / 15.0 * self.grad_r - self.grad_e - 0.8 * self.r_e2
            + self.normal_e2
            - 0.4 * self.e_normal_grad_r)
            / (384.0 * PI.powi(3))
    }

    /// The gradient form without the `∫|∇E|²` term and with a unit
    /// coefficient on `E(N,∇R)`, as usually quoted.
    pub fn gradient_form_chi_quoted(&self) -> f64 {
        (2.0 / 75.0 * self.r3 + 2.0 / 15.0 * self.grad_r - 0.8 * self.r_e2 + self.normal_e2
            - self.e_normal_grad_r)
            / (384.0 * PI.powi(3))
    }

    /// `∫_∂ (½∂_N|E|² - (2/5)E(N,∇R)) ds`.
    pub fn gradient_form_boundary(&self) -> f64 {
        self.normal_e2 - 0.4 * self.e_normal_grad_r
    }
}

/// Rejects metrics whose boundary is not totally geodesic.
pub fn require_geodesic_boundary(metric: &MetricSpec, grid: &BallGrid) -> Result<()> {
    let b = boundary_integrals(metric, grid)?;
    if b.max_abs_h_mean > GEODESIC_BOUNDARY_TOL {
        return Err(Error::Precondition(format!(
            "boundary of `{}` is not totally geodesic: max |H_mean| = {:.3e} > {GEODESIC_BOUNDARY_TOL:e}",
            metric.name, b.max_abs_h_mean
        )));
    }
    if b.max_umbilicity > GEODESIC_BOUNDARY_TOL {
        return Err(Error::Precondition(format!(
            "boundary of `{}` is not umbilic: max umbilicity residual = {:.3e} > {GEODESIC_BOUNDARY_TOL:e}",
            metric.name, b.max_umbilicity
        )));
    }
    Ok(())
}

pub fn cgb6_check(
    metric: &MetricSpec,
    grid: &BallGrid,
    angular: usize,
    levels: usize,
    tol: Tolerance,
) -> Result<CheckReport> {
    require_dim(metric, 6)?;
    require_geodesic_boundary(metric, grid)?;
    let id = format!("cgb6:{}", metric.name);
    let report = refine(&id, 1.0, tol, grid, levels, |g| {
        let b = curvature_integrals(metric, g)?;
        Ok(
            (b.trace_free_cubed - 0.4 * b.scalar_trace_free_sq + 4.0 / 225.0 * b.scalar_cubed)
                / (256.0 * PI.powi(3)),
        )
    })?;
    Ok(report
        .with_grid(GridParams::of(grid, angular))
        .require_order(GAUSS_BONNET_MIN_ORDER))
}

pub fn cgb6_gradient_form_check(
    metric: &MetricSpec,
    grid: &BallGrid,
    angular: usize,
    levels: usize,
    tol: Tolerance,
) -> Result<CheckReport> {
    require_dim(metric, 6)?;
    require_geodesic_boundary(metric, grid)?;
    let id = format!("cgb6_gradient:{}", metric.name);
    let report = refine(&id, 1.0, tol, grid, levels, |g| {
        Ok(lcf_terms(metric, g)?.gradient_form_chi())
    })?;
    let quoted = lcf_terms(metric, grid)?;
    let note = format!(
        "quoted form (no ∫|∇E|², unit E(N,∇R) coefficient) gives {:.12}; boundary term {:.3e}",
        quoted.gradient_form_chi_quoted(),
        quoted.gradient_form_boundary()
    );
    Ok(report
        .with_grid(GridParams::of(grid, angular))
        .with_note(note)
        .require_order(GAUSS_BONNET_MIN_ORDER))
}

pub fn tr_e3_identity_check(
    metric: &MetricSpec,
    grid: &BallGrid,
    angular: usize,
    levels: usize,
    tol: Tolerance,
) -> Result<CheckReport> {
    if !metric.is_conformally_flat() {
        return Err(Error::Unsupported(format!(
            "the Tr(E³) identity needs a conformally flat metric, `{}` is a general matrix",
            metric.name
        )));
    }
    let id = format!("tr_e3:{}:n{}", metric.name, metric.dimension);
    let report = refine(&id, 0.0, tol, grid, levels, |g| {
        Ok(lcf_terms(metric, g)?.tr_e3_residual())
    })?;
    let t = lcf_terms(metric, grid)?;
    let note = format!(
        "∫Tr(E³) = {:.10e}; quoted-sign residual {:.3e}",
        t.tr_e3,
        t.tr_e3_residual_quoted()
    );
    Ok(report
        .with_grid(GridParams::of(grid, angular))
        .with_note(note)
        .require_order(TR_E3_MIN_ORDER))
}

/// `(2/75)R³Vol - (4R/5)∫|E|²` against `384π³` for a metric of constant
/// scalar curvature (`R` taken as the volume average).
pub fn constant_scalar_check(
    metric: &MetricSpec,
    grid: &BallGrid,
    tol: Tolerance,
) -> Result<CheckReport> {
    require_dim(metric, 6)?;
    let id = format!("constant_scalar:{}", metric.name);
    single(&id, 1.0, tol, || {
        let b = curvature_integrals(metric, grid)?;
        let r = b.scalar / b.volume;
        let spread = (b.scalar_sq / b.volume - r * r).abs().sqrt();
        if spread > 1e-6 * r.abs().max(1.0) {
            return Err(Error::Precondition(format!(
                "scalar curvature of `{}` is not constant (L² spread {spread:.3e})",
                metric.name
            )));
        }
        Ok((2.0 / 75.0 * r.powi(3) * b.volume - 0.8 * r * b.trace_free_sq) / (384.0 * PI.powi(3)))
    })
}

/// On the flat ball `𝓑 ≡ 2` on the unit sphere, so `∫𝓑 ds = 4π²`.
pub fn boundary_pin_checks(grid: &BallGrid, angular: usize) -> Result<Vec<CheckReport>> {
    require_grid_dim(grid, 4)?;
    let flat = models::flat(4);
    let params = GridParams::of(grid, angular);
    let pointwise = single(
        "boundary_pin:flat:pointwise",
        0.0,
        Tolerance::abs(1e-8),
        || {
            Ok(boundary_packages(&flat, grid)?
                .iter()
                .map(|p| (p.gauss_bonnet - 2.0).abs())
                .fold(0.0, f64::max))
        },
    )?
    .with_note("max |𝓑 - 2| over boundary nodes");
    let integral = single(
        "boundary_pin:flat:integral",
        2.0 * sphere_volume(4),
        Tolerance::abs(1e-8),
        || Ok(boundary_integrals(&flat, grid)?.gauss_bonnet),
    )?;
    Ok(vec![
        pointwise.with_grid(params.clone()),
        integral.with_grid(params),
    ])
}

/// `Y(S⁶₊) = 30 (8π³/15)^{1/3}`, the Yamabe quotient of the round hemisphere.
pub fn escobar_constant() -> f64 {
    30.0 * (8.0 * PI.powi(3) / 15.0).cbrt()
}

pub fn escobar_check(grid: &BallGrid, angular: usize) -> Result<CheckReport> {
    require_grid_dim(grid, 6)?;
    let r = single(
        "yamabe:hemisphere:n6",
        escobar_constant(),
        Tolerance::rel(1e-6),
        || yamabe_quotient(&models::hemisphere(6), grid),
    )?;
    Ok(r.with_grid(GridParams::of(grid, angular)))
}

fn require_grid_dim(grid: &BallGrid, n: usize) -> Result<()> {
    if grid.dimension != n {
        return Err(Error::Precondition(format!(
            "grid has dimension {}, this check needs {n}",
            grid.dimension
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::models;

    fn ray(n: usize) -> BallGrid {
        BallGrid::build(n, 48, 4, 1e-3, true).unwrap()
    }

    #[test]
    fn cgb4_on_radial_models() {
        let g = ray(4);
        let flat = cgb4_terms(&models::flat(4), &g).unwrap();
        assert!((flat.chi() - 1.0).abs() < 1e-8);
        let hemi = cgb4_terms(&models::hemisphere(4), &g).unwrap();
        assert!((hemi.chi() - 1.0).abs() < 1e-6);
        let cap = cgb4_terms(&models::cap(4, 0.6).unwrap(), &g).unwrap();
        assert!((cap.chi() - 1.0).abs() < 1e-5, "{}", cap.chi());
        let bump = cgb4_terms(&models::radial_bump(4, 3, 0.2).unwrap(), &g).unwrap();
        assert!((bump.chi() - 1.0).abs() < 1e-5, "{}", bump.chi());
    }

    #[test]
    fn cgb6_hemisphere_and_precondition() {
        let g = ray(6);
        let hemi = lcf_terms(&models::hemisphere(6), &g).unwrap();
        assert!((hemi.cgb6_chi() - 1.0).abs() < 1e-6);
        assert!((hemi.gradient_form_chi() - 1.0).abs() < 1e-6);
        assert!(hemi.tr_e3_residual() < 1e-6);
        let err = cgb6_check(&models::flat(6), &g, 4, 1, Tolerance::abs(1e-6)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn tr_e3_identity_distinguishes_the_two_forms() {
        for n in [4, 6] {
            let m = models::radial_bump(n, 11, 0.15).unwrap();
            let t = lcf_terms(&m, &ray(n)).unwrap();
            assert!(t.tr_e3_residual() < 1e-4, "n={n} {t:?}");
            assert!(
                t.tr_e3_residual_quoted() > 1e-3,
                "n={n} {}",
                t.tr_e3_residual_quoted()
            );
        }
    }

    #[test]
    fn gradient_form_on_a_geodesic_bump() {
        let m = models::geodesic_bump(6, 4, 0.2).unwrap();
        let t = lcf_terms(&m, &ray(6)).unwrap();
        assert!((t.cgb6_chi() - 1.0).abs() < 1e-5, "{}", t.cgb6_chi());
        assert!(
            (t.gradient_form_chi() - 1.0).abs() < 1e-5,
            "{}",
            t.gradient_form_chi()
        );
    }

    #[test]
    fn flat_pin_and_escobar() {
        assert!(boundary_pin_checks(&ray(4), 4)
            .unwrap()
            .iter()
            .all(|r| r.pass));
        assert!(escobar_check(&ray(6), 4).unwrap().pass);
        assert!(escobar_check(&ray(4), 4).is_err());
        assert!(
            (escobar_constant() - 30.0 * (8.0 * PI.powi(3) / 15.0).powf(1.0 / 3.0)).abs() < 1e-12
        );
    }

    #[test]
    fn constant_scalar_on_hemisphere() {
        let r =
            constant_scalar_check(&models::hemisphere(6), &ray(6), Tolerance::abs(1e-6)).unwrap();
        assert!(r.pass, "{r:?}");
        let bump = models::radial_bump(6, 1, 0.2).unwrap();
        assert!(constant_scalar_check(&bump, &ray(6), Tolerance::abs(1e-6)).is_err());
    }
}
