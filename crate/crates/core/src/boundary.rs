//! Extrinsic geometry of the unit sphere `|x| = 1` inside a metric on the ball.
//!
//! The outward unit normal is `N = ∇r / |∇r|_g` and the second fundamental
//! form is `S(X, Y) = g(∇_X N, Y) = Hess_g r(X, Y) / |∇r|_g` on tangent
//! vectors, so the flat ball has `S = +g`. Two mean curvatures are kept:
//! `h_trace = tr S` (used by the Gauss-Bonnet integrand) and
//! `h_mean = tr S / (n - 1)` (used by the Robin operator).

use crate::curvature::{
    covariant_derivative_sym2, field_jet1, point_curvature, point_curvature_with, MetricSpec,
    PointCurvature, T3,
};
use crate::grid::{integrate_boundary, BallGrid};
use crate::{Error, Result};
use nalgebra::DMatrix;

/// Sign in the Codazzi equation
/// `Riem(X, Y, Z, N) = σ [(∇_X S)(Y, Z) - (∇_Y S)(X, Z)]`.
///
/// With the crate's Riemann convention `σ = +1`; the opposite ordering
/// `S_{ik,j} - S_{jk,i}` corresponds to `σ = -1` and fails on non-radial
/// models (see the tests).
pub const CODAZZI_SIGN: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct BoundaryPackage {
    pub position: Vec<f64>,
    /// Coordinate components of the outward unit normal.
    pub normal: Vec<f64>,
    /// g-orthonormal tangent frame, as coordinate vectors.
    pub frame: Vec<Vec<f64>>,
    /// `S(e_α, e_β)` in the tangent frame.
    pub second_fundamental: DMatrix<f64>,
    pub h_trace: f64,
    pub h_mean: f64,
    /// `max |S_αβ - h_mean δ_αβ|`.
    pub umbilicity: f64,
    /// Induced area element relative to the flat unit sphere.
    pub area_density: f64,
    pub normal_ricci: f64,
    /// `Σ Riem(e_γ, e_α, e_γ, e_β) S_αβ`.
    pub tangential_riemann: f64,
    pub s_norm_sq: f64,
    pub s_cubed: f64,
    /// Gauss-Bonnet boundary integrand.
    pub gauss_bonnet: f64,
    pub curvature: PointCurvature,
}

fn require_boundary(x: &[f64]) -> Result<()> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (r - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "{x:?} is not a boundary node (|x| = {r})"
        )));
    }
    Ok(())
}

fn g_dot(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            acc += g[(a, b)] * u[a] * v[b];
        }
    }
    acc
}

/// Coordinate gradient `∂r` and Hessian `∂²r` of `r = |x|`.
fn radius_derivatives(x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = x.len();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dr: Vec<f64> = x.iter().map(|v| v / r).collect();
    let ddr = DMatrix::from_fn(n, n, |a, b| {
        ((if a == b { 1.0 } else { 0.0 }) - dr[a] * dr[b]) / r
    });
    (dr, ddr)
}

/// `(N, |∇r|_g, Hess_g r)` at `x`.
fn normal_data(pc: &PointCurvature) -> (Vec<f64>, f64, DMatrix<f64>) {
    let n = pc.dim();
    let (dr, ddr) = radius_derivatives(&pc.position);
    let up: Vec<f64> = (0..n)
        .map(|a| (0..n).map(|b| pc.ginv[(a, b)] * dr[b]).sum())
        .collect();
    let grad_norm = up.iter().zip(&dr).map(|(u, d)| u * d).sum::<f64>().sqrt();
    let normal = up.iter().map(|u| u / grad_norm).collect();
    let hess = DMatrix::from_fn(n, n, |a, b| {
        ddr[(a, b)]
            - (0..n)
                .map(|m| pc.christoffel.get(m, a, b) * dr[m])
                .sum::<f64>()
    });
    (normal, grad_norm, hess)
}

/// Coordinate axes projected g-orthogonally off `N`, dropping the axis most
/// aligned with the position (first one on ties), then Gram-Schmidt in `g`.
fn tangent_frame(g: &DMatrix<f64>, x: &[f64], normal: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut drop = 0;
    for i in 1..n {
        if x[i].abs() > x[drop].abs() {
            drop = i;
        }
    }
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in (0..n).filter(|&i| i != drop) {
        let mut t = vec![0.0; n];
        t[i] = 1.0;
        let c = g_dot(g, &t, normal);
        for a in 0..n {
            t[a] -= c * normal[a];
        }
        for e in &frame {
            let c = g_dot(g, &t, e);
            for a in 0..n {
                t[a] -= c * e[a];
            }
        }
        let norm = g_dot(g, &t, &t).sqrt();
        frame.push(t.into_iter().map(|v| v / norm).collect());
    }
    frame
}

pub fn boundary_package(
    metric: &MetricSpec,
    grid: &BallGrid,
    x: &[f64],
) -> Result<BoundaryPackage> {
    require_boundary(x)?;
    let pc = point_curvature(metric, grid, x)?;
    Ok(package_from_curvature(pc))
}

fn package_from_curvature(pc: PointCurvature) -> BoundaryPackage {
    let n = pc.dim();
    let (normal, grad_norm, hess) = normal_data(&pc);
    let frame = tangent_frame(&pc.g, &pc.position, &normal);
    let m = n - 1;
    let s = DMatrix::from_fn(m, m, |a, b| g_dot(&hess, &frame[a], &frame[b]) / grad_norm);
    let s = (&s + s.transpose()) * 0.5;
    let h_trace = s.trace();
    let h_mean = h_trace / m as f64;
    let umbilicity = (&s - DMatrix::<f64>::identity(m, m) * h_mean).abs().max();
    let s_norm_sq = s.norm_squared();
    let s_cubed = (&s * &s * &s).trace();
    let normal_ricci = g_dot(&pc.ricci, &normal, &normal);
    let mut tangential_riemann = 0.0;
    for eg in &frame {
        for a in 0..m {
            for b in 0..m {
                tangential_riemann += pc.riemann_on(eg, &frame[a], eg, &frame[b]) * s[(a, b)];
            }
        }
    }
    let h = h_trace;
    let gauss_bonnet = 0.5 * pc.scalar * h - normal_ricci * h - tangential_riemann
        + h.powi(3) / 3.0
        - h * s_norm_sq
        + 2.0 / 3.0 * s_cubed;
    BoundaryPackage {
        position: pc.position.clone(),
        area_density: pc.volume_density * grad_norm,
        normal,
        frame,
        second_fundamental: s,
        h_trace,
        h_mean,
        umbilicity,
        normal_ricci,
        tangential_riemann,
        s_norm_sq,
        s_cubed,
        gauss_bonnet,
        curvature: pc,
    }
}

/// Boundary packages at every boundary node of `grid`, in node order.
pub fn boundary_packages(metric: &MetricSpec, grid: &BallGrid) -> Result<Vec<BoundaryPackage>> {
    grid.map_boundary(|_, x| boundary_package(metric, grid, x))
}

/// Boundary integrals and extremal boundary statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryIntegrals {
    pub area: f64,
    /// `∫ 𝓑 ds`.
    pub gauss_bonnet: f64,
    pub max_abs_h_mean: f64,
    pub max_umbilicity: f64,
}

pub fn boundary_integrals(metric: &MetricSpec, grid: &BallGrid) -> Result<BoundaryIntegrals> {
    metric.validate(grid)?;
    let packs = boundary_packages(metric, grid)?;
    let area: Vec<f64> = packs.iter().map(|p| p.area_density).collect();
    let field = |f: &dyn Fn(&BoundaryPackage) -> f64| -> Vec<f64> { packs.iter().map(f).collect() };
    Ok(BoundaryIntegrals {
        area: integrate_boundary(grid, &vec![1.0; area.len()], &area)?,
        gauss_bonnet: integrate_boundary(grid, &field(&|p| p.gauss_bonnet), &area)?,
        max_abs_h_mean: packs.iter().map(|p| p.h_mean.abs()).fold(0.0, f64::max),
        max_umbilicity: packs.iter().map(|p| p.umbilicity).fold(0.0, f64::max),
    })
}

/// Ambient covariant derivative `∇_a Ŝ_{bc}` of the extension
/// `Ŝ = P Hess_g r P / |∇r|_g` (P the g-projection onto the level sphere of
/// `r`). Restricted to tangent arguments this is the induced covariant
/// derivative of the second fundamental form, because `Ŝ(N, ·) = 0`.
fn second_fundamental_derivative(
    metric: &MetricSpec,
    grid: &BallGrid,
    pc: &PointCurvature,
) -> Result<T3> {
    let n = pc.dim();
    let extension = |q: &PointCurvature| {
        let (normal, grad_norm, hess) = normal_data(q);
        // P^a_b = δ^a_b - N^a N_b
        let n_low: Vec<f64> = (0..n)
            .map(|b| (0..n).map(|c| q.g[(b, c)] * normal[c]).sum())
            .collect();
        let p = DMatrix::from_fn(n, n, |a, b| {
            (if a == b { 1.0 } else { 0.0 }) - normal[a] * n_low[b]
        });
        let s_hat = p.transpose() * hess * p / grad_norm;
        s_hat.as_slice().to_vec()
    };
    let jet = field_jet1(metric, grid, &pc.position, extension)?;
    let s_hat = DMatrix::from_column_slice(n, n, &jet.value);
    let ds: Vec<DMatrix<f64>> = (0..n)
        .map(|a| DMatrix::from_column_slice(n, n, &jet.d1[a]))
        .collect();
    Ok(covariant_derivative_sym2(&s_hat, &ds, &pc.christoffel))
}

/// Components `Riem(e_i, e_j, e_k, N)` and `(∇_{e_i} S)(e_j, e_k)` over the
/// tangent frame, indexed `[i][j][k]`.
pub struct CodazziSides {
    pub riemann: Vec<Vec<Vec<f64>>>,
    pub derivative: Vec<Vec<Vec<f64>>>,
}

impl CodazziSides {
    /// `max |Riem(e_i,e_j,e_k,N) - sign·[(∇_i S)_jk - (∇_j S)_ik]|`.
    pub fn residual(&self, sign: f64) -> f64 {
        let m = self.riemann.len();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let rhs = self.derivative[i][j][k] - self.derivative[j][i][k];
                    worst = worst.max((self.riemann[i][j][k] - sign * rhs).abs());
                }
            }
        }
        worst
    }
}

pub fn codazzi_sides(metric: &MetricSpec, grid: &BallGrid, x: &[f64]) -> Result<CodazziSides> {
    require_boundary(x)?;
    let fd = grid.nested_engine(metric.domain_radius)?;
    let pc = point_curvature_with(metric, &fd, x)?;
    let ds = second_fundamental_derivative(metric, grid, &pc)?;
    let bp = package_from_curvature(pc);
    let n = bp.normal.len();
    let e = &bp.frame;
    let m = e.len();
    let contract3 = |t: &T3, u: &[f64], v: &[f64], w: &[f64]| {
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    acc += t.get(a, b, c) * u[a] * v[b] * w[c];
                }
            }
        }
        acc
    };
    let table = |f: &dyn Fn(usize, usize, usize) -> f64| -> Vec<Vec<Vec<f64>>> {
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| (0..m).map(|k| f(i, j, k)).collect())
                    .collect()
            })
            .collect()
    };
    Ok(CodazziSides {
        riemann: table(&|i, j, k| bp.curvature.riemann_on(&e[i], &e[j], &e[k], &bp.normal)),
        derivative: table(&|i, j, k| contract3(&ds, &e[i], &e[j], &e[k])),
    })
}

/// Codazzi residual at a boundary node with the crate's sign.
pub fn codazzi_residual(metric: &MetricSpec, grid: &BallGrid, x: &[f64]) -> Result<f64> {
    Ok(codazzi_sides(metric, grid, x)?.residual(CODAZZI_SIGN))
}

/// `⟨∇_N Ric, Ric⟩ = N^a ∇_a Ric_{bc} Ric^{bc}` at a boundary node.
pub fn normal_ricci_product(metric: &MetricSpec, grid: &BallGrid, x: &[f64]) -> Result<f64> {
    require_boundary(x)?;
    let fd = grid.nested_engine(metric.domain_radius)?;
    let pc = point_curvature_with(metric, &fd, x)?;
    let n = pc.dim();
    let jet = field_jet1(metric, grid, x, |q| q.ricci.as_slice().to_vec())?;
    let d_ric: Vec<DMatrix<f64>> = (0..n)
        .map(|a| DMatrix::from_column_slice(n, n, &jet.d1[a]))
        .collect();
    let cov = covariant_derivative_sym2(&pc.ricci, &d_ric, &pc.christoffel);
    let (normal, _, _) = normal_data(&pc);
    let ric_up = &pc.ginv * &pc.ricci * &pc.ginv;
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                acc += normal[a] * cov.get(a, b, c) * ric_up[(b, c)];
            }
        }
    }
    Ok(acc)
}
