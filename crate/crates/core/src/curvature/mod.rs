//! Pointwise curvature of metrics on the ball.
//!
//! Index conventions: `riemann[i][j][k][l]` is `Riem_{ijkl} = g(R(∂_i,∂_j)∂_l, ∂_k)`
//! with `R(X,Y) = ∇_X∇_Y - ∇_Y∇_X - ∇_{[X,Y]}`, so that `Riem_{ijij}` is the
//! sectional curvature of an orthonormal pair and `Ric_{ij} = g^{kl} Riem_{ikjl}`.
//! The round metric has `R = n(n-1)`.

pub mod identities;
pub mod models;
mod tensor;

pub use tensor::{T3, T4};

use crate::grid::{BallGrid, FdEngine, Jet1, Jet2};
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

pub type ScalarCallback = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type MatrixCallback = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

#[derive(Clone)]
pub enum MetricKind {
    /// `g = φ² · flat`.
    ConformalToFlat(ScalarCallback),
    /// Arbitrary symmetric positive-definite matrix field.
    GeneralMatrix(MatrixCallback),
}

#[derive(Clone)]
pub struct MetricSpec {
    pub dimension: usize,
    pub kind: MetricKind,
    pub rotationally_symmetric: bool,
    pub name: String,
    /// Radius of the ball on which the callback may be evaluated.
    pub domain_radius: f64,
}

impl fmt::Debug for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            MetricKind::ConformalToFlat(_) => "ConformalToFlat",
            MetricKind::GeneralMatrix(_) => "GeneralMatrix",
        };
        f.debug_struct("MetricSpec")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("kind", &kind)
            .field("rotationally_symmetric", &self.rotationally_symmetric)
            .field("domain_radius", &self.domain_radius)
            .finish()
    }
}

impl MetricSpec {
    pub fn conformal(
        name: impl Into<String>,
        dimension: usize,
        rotationally_symmetric: bool,
        factor: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            dimension,
            kind: MetricKind::ConformalToFlat(Arc::new(factor)),
            rotationally_symmetric,
            name: name.into(),
            domain_radius: models::DOMAIN_RADIUS,
        }
    }

    pub fn general(
        name: impl Into<String>,
        dimension: usize,
        rotationally_symmetric: bool,
        matrix: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dimension,
            kind: MetricKind::GeneralMatrix(Arc::new(matrix)),
            rotationally_symmetric,
            name: name.into(),
            domain_radius: models::DOMAIN_RADIUS,
        }
    }

    pub fn is_conformally_flat(&self) -> bool {
        matches!(self.kind, MetricKind::ConformalToFlat(_))
    }

    /// The conformal factor `φ`, if the metric is given as `φ² · flat`.
    pub fn factor(&self) -> Option<&ScalarCallback> {
        match &self.kind {
            MetricKind::ConformalToFlat(phi) => Some(phi),
            MetricKind::GeneralMatrix(_) => None,
        }
    }

    pub fn matrix_at(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.kind {
            MetricKind::ConformalToFlat(phi) => {
                let p = phi(x);
                DMatrix::identity(self.dimension, self.dimension) * (p * p)
            }
            MetricKind::GeneralMatrix(m) => m(x),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        match &self.kind {
            MetricKind::ConformalToFlat(phi) => {
                let v = phi(x);
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::NonPositiveFactor {
                        point: x.to_vec(),
                        value: v,
                    });
                }
            }
            MetricKind::GeneralMatrix(m) => {
                let g = m(x);
                let sym = (&g - g.transpose()).abs().max();
                if sym > 1e-12 * g.abs().max().max(1.0) || g.clone().cholesky().is_none() {
                    return Err(Error::NotPositiveDefinite { point: x.to_vec() });
                }
            }
        }
        Ok(())
    }

    /// Positivity / SPD scan over every bulk and boundary node of `grid`, plus
    /// a rotational-symmetry spot check for metrics flagged as radial.
    pub fn validate(&self, grid: &BallGrid) -> Result<()> {
        if self.dimension != grid.dimension {
            return Err(Error::Precondition(format!(
                "metric `{}` has dimension {} but the grid has dimension {}",
                self.name, self.dimension, grid.dimension
            )));
        }
        if grid.radial_only && !self.rotationally_symmetric {
            return Err(Error::Precondition(format!(
                "metric `{}` is not rotationally symmetric; the single-ray grid needs a radial metric",
                self.name
            )));
        }
        grid.map_bulk(|node| self.check_point(&node.position))?;
        grid.map_boundary(|_, x| self.check_point(x))?;
        if self.rotationally_symmetric {
            self.check_rotational_symmetry(16)?;
        }
        Ok(())
    }

    fn check_rotational_symmetry(&self, pairs: usize) -> Result<()> {
        let n = self.dimension;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..pairs {
            let r: f64 = rng.gen_range(0.0..1.0);
            let a = random_unit(&mut rng, n);
            let b = random_unit(&mut rng, n);
            let (xa, xb): (Vec<f64>, Vec<f64>) = (
                a.iter().map(|v| r * v).collect(),
                b.iter().map(|v| r * v).collect(),
            );
            let (va, vb) = match &self.kind {
                MetricKind::ConformalToFlat(phi) => (phi(&xa), phi(&xb)),
                MetricKind::GeneralMatrix(m) => (m(&xa).trace(), m(&xb).trace()),
            };
            if (va - vb).abs() > 1e-12 * va.abs().max(vb.abs()).max(1e-300) {
                return Err(Error::Precondition(format!(
                    "metric `{}` is flagged rotationally symmetric but differs at {xa:?} and {xb:?}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Metric with first and second coordinate derivatives at a point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    /// `dg[a]` is `∂_a g`.
    pub dg: Vec<DMatrix<f64>>,
    /// `ddg[a][b]` is `∂_a ∂_b g`.
    pub ddg: Vec<Vec<DMatrix<f64>>>,
}

impl MetricJet {
    pub fn at(metric: &MetricSpec, fd: &FdEngine, x: &[f64]) -> Result<Self> {
        let n = metric.dimension;
        match &metric.kind {
            MetricKind::ConformalToFlat(phi) => {
                let jet = fd.jet2(|p| Ok(vec![phi(p)]), x)?;
                let p = jet.value[0];
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::NonPositiveFactor {
                        point: x.to_vec(),
                        value: p,
                    });
                }
                let id = DMatrix::<f64>::identity(n, n);
                let dg = (0..n).map(|a| &id * (2.0 * p * jet.d1[a][0])).collect();
                let ddg = (0..n)
                    .map(|a| {
                        (0..n)
                            .map(|b| {
                                &id * (2.0 * (jet.d1[a][0] * jet.d1[b][0] + p * jet.d2[a][b][0]))
                            })
                            .collect()
                    })
                    .collect();
                Ok(Self {
                    g: &id * (p * p),
                    dg,
                    ddg,
                })
            }
            MetricKind::GeneralMatrix(m) => {
                let jet = fd.jet2(|p| Ok(m(p).as_slice().to_vec()), x)?;
                let mat = |v: &[f64]| DMatrix::from_column_slice(n, n, v);
                let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
                Ok(Self {
                    g: sym(mat(&jet.value)),
                    dg: jet.d1.iter().map(|v| sym(mat(v))).collect(),
                    ddg: jet
                        .d2
                        .iter()
                        .map(|row| row.iter().map(|v| sym(mat(v))).collect())
                        .collect(),
                })
            }
        }
    }
}

/// Curvature quantities that need at most second derivatives of the metric.
#[derive(Debug, Clone)]
pub struct PointCurvature {
    pub position: Vec<f64>,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// `sqrt(det g)`.
    pub volume_density: f64,
    /// `christoffel.get(m, b, c)` is `Γ^m_{bc}`.
    pub christoffel: T3,
    /// `d_christoffel.get(a, m, b, c)` is `∂_a Γ^m_{bc}`.
    pub d_christoffel: T4,
    pub riemann: T4,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub weyl: T4,
    pub trace_free: DMatrix<f64>,
    pub weyl_norm_sq: f64,
    pub trace_free_norm_sq: f64,
    /// `E_i^j E_j^k E_k^i`.
    pub trace_free_cubed: f64,
}

impl PointCurvature {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn from_jet(position: &[f64], jet: &MetricJet) -> Result<Self> {
        let n = jet.g.nrows();
        let chol = jet
            .g
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite {
                point: position.to_vec(),
            })?;
        let ginv = chol.inverse();
        let volume_density = chol.determinant().sqrt();

        // Γ_{q,bc} and Γ^m_{bc}
        let mut lower = T3::zeros(n);
        for q in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = 0.5 * (jet.dg[b][(q, c)] + jet.dg[c][(q, b)] - jet.dg[q][(b, c)]);
                    lower.set(q, b, c, v);
                }
            }
        }
        let mut gamma = T3::zeros(n);
        for m in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = (0..n).map(|q| ginv[(m, q)] * lower.get(q, b, c)).sum();
                    gamma.set(m, b, c, v);
                }
            }
        }

        // ∂_a Γ^m_{bc} = ∂_a g^{mq} Γ_{q,bc} + g^{mq} ∂_a Γ_{q,bc}
        let mut dgamma = T4::zeros(n);
        let mut dlower = T3::zeros(n);
        for a in 0..n {
            let dginv = -(&ginv * &jet.dg[a] * &ginv);
            let dd = &jet.ddg[a];
            for q in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        dlower.set(
                            q,
                            b,
                            c,
                            0.5 * (dd[b][(q, c)] + dd[c][(q, b)] - dd[q][(b, c)]),
                        );
                    }
                }
            }
            for m in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut v = 0.0;
                        for q in 0..n {
                            v += dginv[(m, q)] * lower.get(q, b, c)
                                + ginv[(m, q)] * dlower.get(q, b, c);
                        }
                        dgamma.set(a, m, b, c, v);
                    }
                }
            }
        }

        // R^m_{c a b} = ∂_aΓ^m_{bc} - ∂_bΓ^m_{ac} + Γ^m_{ap}Γ^p_{bc} - Γ^m_{bp}Γ^p_{ac}
        let mut rup = T4::zeros(n); // rup.get(m, c, a, b)
        for m in 0..n {
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut v = dgamma.get(a, m, b, c) - dgamma.get(b, m, a, c);
                        for p in 0..n {
                            v += gamma.get(m, a, p) * gamma.get(p, b, c)
                                - gamma.get(m, b, p) * gamma.get(p, a, c);
                        }
                        rup.set(m, c, a, b, v);
                    }
                }
            }
        }
        // Riem_{ijkl} = g_{km} R^m_{l i j}
        let mut riemann = T4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = (0..n).map(|m| jet.g[(k, m)] * rup.get(m, l, i, j)).sum();
                        riemann.set(i, j, k, l, v);
                    }
                }
            }
        }

        let mut ricci = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        v += ginv[(k, l)] * riemann.get(i, k, j, l);
                    }
                }
                ricci[(i, j)] = v;
            }
        }
        let ricci = (&ricci + ricci.transpose()) * 0.5;
        let scalar = ginv.component_mul(&ricci).sum();
        let trace_free = &ricci - &jet.g * (scalar / n as f64);

        let weyl = weyl_part(&riemann, &ricci, scalar, &jet.g);
        let weyl_norm_sq = weyl.norm_sq(&ginv);
        let mixed = &ginv * &trace_free;
        let sq = &mixed * &mixed;
        let trace_free_norm_sq = sq.trace();
        let trace_free_cubed = (&sq * &mixed).trace();

        Ok(Self {
            position: position.to_vec(),
            g: jet.g.clone(),
            ginv,
            volume_density,
            christoffel: gamma,
            d_christoffel: dgamma,
            riemann,
            ricci,
            scalar,
            weyl,
            trace_free,
            weyl_norm_sq,
            trace_free_norm_sq,
            trace_free_cubed,
        })
    }

    /// `Riem(u, v, w, z)` for coordinate vectors.
    pub fn riemann_on(&self, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if v[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        acc += u[i] * v[j] * w[k] * z[l] * self.riemann.get(i, j, k, l);
                    }
                }
            }
        }
        acc
    }
}

/// `A ⊙ g` with `(A ⊙ g)_{ijkl} = A_ik g_jl + A_jl g_ik - A_il g_jk - A_jk g_il`.
pub fn kulkarni_nomizu(a: &DMatrix<f64>, g: &DMatrix<f64>) -> T4 {
    let n = g.nrows();
    let mut t = T4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = a[(i, k)] * g[(j, l)] + a[(j, l)] * g[(i, k)]
                        - a[(i, l)] * g[(j, k)]
                        - a[(j, k)] * g[(i, l)];
                    t.set(i, j, k, l, v);
                }
            }
        }
    }
    t
}

fn weyl_part(riemann: &T4, ricci: &DMatrix<f64>, scalar: f64, g: &DMatrix<f64>) -> T4 {
    let n = g.nrows();
    let nf = n as f64;
    let ric_g = kulkarni_nomizu(ricci, g);
    let g_g = kulkarni_nomizu(g, g); // 2 (g_ik g_jl - g_il g_jk)
    let mut w = T4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = riemann.get(i, j, k, l) - ric_g.get(i, j, k, l) / (nf - 2.0)
                        + scalar / ((nf - 1.0) * (nf - 2.0)) * 0.5 * g_g.get(i, j, k, l);
                    w.set(i, j, k, l, v);
                }
            }
        }
    }
    w
}

/// Curvature at `x` using the grid's metric step.
pub fn point_curvature(metric: &MetricSpec, grid: &BallGrid, x: &[f64]) -> Result<PointCurvature> {
    let fd = grid.fd_engine(metric.domain_radius)?;
    point_curvature_with(metric, &fd, x)
}

pub(crate) fn point_curvature_with(
    metric: &MetricSpec,
    fd: &FdEngine,
    x: &[f64],
) -> Result<PointCurvature> {
    if x.len() != metric.dimension {
        return Err(Error::Precondition(format!(
            "point of dimension {} for a metric of dimension {}",
            x.len(),
            metric.dimension
        )));
    }
    PointCurvature::from_jet(x, &MetricJet::at(metric, fd, x)?)
}

/// First derivatives of a curvature-derived field. Both the curvature
/// pipeline and the outer difference use the grid's nested step, which keeps
/// rounding noise at `ε/H^3` instead of `ε/(h^2 H)`.
pub fn field_jet1<F>(metric: &MetricSpec, grid: &BallGrid, x: &[f64], extract: F) -> Result<Jet1>
where
    F: Fn(&PointCurvature) -> Vec<f64>,
{
    let inner = grid.nested_engine(metric.domain_radius)?;
    let outer = grid.nested_engine(metric.domain_radius - 2.0 * grid.nested_step)?;
    outer.jet1(
        |p| Ok(extract(&point_curvature_with(metric, &inner, p)?)),
        x,
    )
}

/// Second derivatives of a curvature-derived field at the nested step.
pub fn field_jet2<F>(metric: &MetricSpec, grid: &BallGrid, x: &[f64], extract: F) -> Result<Jet2>
where
    F: Fn(&PointCurvature) -> Vec<f64>,
{
    let inner = grid.nested_engine(metric.domain_radius)?;
    let outer = grid.nested_engine(metric.domain_radius - 2.0 * grid.nested_step)?;
    outer.jet2(
        |p| Ok(extract(&point_curvature_with(metric, &inner, p)?)),
        x,
    )
}

/// Full pointwise curvature data including first covariant derivatives of
/// the scalar and trace-free Ricci curvature.
#[derive(Debug, Clone)]
pub struct CurvaturePackage {
    pub point: PointCurvature,
    /// `∂_a R`.
    pub scalar_gradient: Vec<f64>,
    /// `cov_trace_free.get(a, b, c)` is `∇_a E_{bc}`.
    pub cov_trace_free: T3,
    pub scalar_gradient_norm_sq: f64,
    pub cov_trace_free_norm_sq: f64,
}

pub(crate) fn pack_scalar_and_trace_free(pc: &PointCurvature) -> Vec<f64> {
    let mut v = Vec::with_capacity(1 + pc.trace_free.len());
    v.push(pc.scalar);
    v.extend_from_slice(pc.trace_free.as_slice());
    v
}

/// `∇_a T_{bc}` for a symmetric 2-tensor given its coordinate derivatives.
pub fn covariant_derivative_sym2(t: &DMatrix<f64>, dt: &[DMatrix<f64>], gamma: &T3) -> T3 {
    let n = t.nrows();
    let mut out = T3::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut v = dt[a][(b, c)];
                for m in 0..n {
                    v -= gamma.get(m, a, b) * t[(m, c)] + gamma.get(m, a, c) * t[(b, m)];
                }
                out.set(a, b, c, v);
            }
        }
    }
    out
}

pub fn curvature_package(
    metric: &MetricSpec,
    grid: &BallGrid,
    x: &[f64],
) -> Result<CurvaturePackage> {
    let point = point_curvature(metric, grid, x)?;
    let n = point.dim();
    let jet = field_jet1(metric, grid, x, pack_scalar_and_trace_free)?;
    let scalar_gradient: Vec<f64> = (0..n).map(|a| jet.d1[a][0]).collect();
    let d_e: Vec<DMatrix<f64>> = (0..n)
        .map(|a| DMatrix::from_column_slice(n, n, &jet.d1[a][1..]))
        .collect();
    let cov_trace_free = covariant_derivative_sym2(&point.trace_free, &d_e, &point.christoffel);
    let grad = nalgebra::DVector::from_column_slice(&scalar_gradient);
    let scalar_gradient_norm_sq = (grad.transpose() * &point.ginv * &grad)[(0, 0)];
    let cov_trace_free_norm_sq = cov_trace_free.norm_sq(&point.ginv);
    Ok(CurvaturePackage {
        point,
        scalar_gradient,
        cov_trace_free,
        scalar_gradient_norm_sq,
        cov_trace_free_norm_sq,
    })
}

/// Bulk integrals of the curvature scalars that enter the Gauss-Bonnet
/// formulas, accumulated in one pass over the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureIntegrals {
    pub volume: f64,
    /// `∫ R dv`.
    pub scalar: f64,
    /// `∫ R² dv`.
    pub scalar_sq: f64,
    /// `∫ R³ dv`.
    pub scalar_cubed: f64,
    /// `∫ |W|² dv`.
    pub weyl_sq: f64,
    /// `∫ |E|² dv`.
    pub trace_free_sq: f64,
    /// `∫ R |E|² dv`.
    pub scalar_trace_free_sq: f64,
    /// `∫ Tr(E³) dv`.
    pub trace_free_cubed: f64,
}

pub fn curvature_integrals(metric: &MetricSpec, grid: &BallGrid) -> Result<CurvatureIntegrals> {
    metric.validate(grid)?;
    let v = crate::grid::integrate_bulk_many(grid, 8, |node| {
        let pc = point_curvature(metric, grid, &node.position)?;
        let dv = pc.volume_density;
        let r = pc.scalar;
        Ok(vec![
            dv,
            r * dv,
            r * r * dv,
            r * r * r * dv,
            pc.weyl_norm_sq * dv,
            pc.trace_free_norm_sq * dv,
            r * pc.trace_free_norm_sq * dv,
            pc.trace_free_cubed * dv,
        ])
    })?;
    Ok(CurvatureIntegrals {
        volume: v[0],
        scalar: v[1],
        scalar_sq: v[2],
        scalar_cubed: v[3],
        weyl_sq: v[4],
        trace_free_sq: v[5],
        scalar_trace_free_sq: v[6],
        trace_free_cubed: v[7],
    })
}
