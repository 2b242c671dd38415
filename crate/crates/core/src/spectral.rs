//! First Robin eigenvalue of the Yamabe operator `L = 6Δ + R` for radial
//! metrics `g = φ(r)² · flat` in dimension 4.
//!
//! With `h = φ f` the problem `L_g f = λ f`, `∂_N f + H_mean f = 0` becomes
//! `6 Δ_flat h = λ φ² h` with `h'(1) + h(1) = 0`, whose quadratic forms are
//!
//! ```text
//! stiffness  6 (∫₀¹ h'² r³ dr + h(1)²)
//! mass       ∫₀¹ φ² h² r³ dr
//! ```
//!
//! Both are discretized with piecewise-linear elements on a uniform mesh:
//! exact cell integrals of `r³` in the stiffness, and a mass matrix that is
//! the average of the consistent and the lumped one. Everything stays
//! three-point and second order, but the averaged mass cancels most of the
//! leading nodal error of the eigenfunction. Regularity at the origin
//! (`h'(0) = 0`) is natural in this form. [`lambda1_extrapolated`] removes
//! the `O(m^-2)` term by Richardson extrapolation.

use crate::conformal::f2_parts;
use crate::curvature::MetricSpec;
use crate::grid::BallGrid;
use crate::{Error, Result};

pub const MIN_MESH: usize = 16;
pub const MAX_ITERATIONS: usize = 10_000;
/// Stopping threshold on the max-norm change of the iterate, relative to its
/// size. The quotient converges twice as fast as the vector, so a test on the
/// quotient alone leaves `O(1e-6)` errors in `f`; it also carries summation
/// noise of order `1e-12` relative and can cycle at that level.
pub const VECTOR_TOL: f64 = 1e-13;
/// Below this relative step an iterate that stops contracting is taken as
/// converged to rounding.
pub const STAGNATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RadialOperator {
    /// Mesh nodes `r_i = i/m`, `i = 0..=m`.
    pub radii: Vec<f64>,
    pub phi: Vec<f64>,
    pub stiffness_diag: Vec<f64>,
    /// `stiffness_off[i]` couples nodes `i` and `i + 1`.
    pub stiffness_off: Vec<f64>,
    pub mass_diag: Vec<f64>,
    pub mass_off: Vec<f64>,
}

/// Weight of the consistent mass in the averaged mass matrix.
pub const CONSISTENT_MASS_WEIGHT: f64 = 0.5;

/// Three-point Gauss-Legendre rule on `[-1, 1]`.
const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// `∫_a^b r³ dr`.
fn cubic_moment(a: f64, b: f64) -> f64 {
    (b.powi(4) - a.powi(4)) / 4.0
}

pub fn assemble(metric: &MetricSpec, mesh_size: usize) -> Result<RadialOperator> {
    if mesh_size < MIN_MESH {
        return Err(Error::InvalidGrid(format!(
            "mesh size {mesh_size} < {MIN_MESH}"
        )));
    }
    if metric.dimension != 4 || !metric.rotationally_symmetric {
        return Err(Error::Unsupported(format!(
            "the radial eigensolver needs a rotationally symmetric metric in dimension 4, got `{}`",
            metric.name
        )));
    }
    let factor = metric.factor().ok_or_else(|| {
        Error::Unsupported(format!(
            "`{}` is not given by a conformal factor",
            metric.name
        ))
    })?;
    let m = mesh_size;
    let dr = 1.0 / m as f64;
    let radii: Vec<f64> = (0..=m).map(|i| i as f64 * dr).collect();
    let phi_at = |r: f64| -> Result<f64> {
        let x = [r, 0.0, 0.0, 0.0];
        let v = factor(&x);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonPositiveFactor {
                point: x.to_vec(),
                value: v,
            })
        }
    };
    let phi = radii
        .iter()
        .map(|&r| phi_at(r))
        .collect::<Result<Vec<f64>>>()?;

    let mut stiffness_diag = vec![0.0; m + 1];
    let mut stiffness_off = vec![0.0; m];
    let mut mass_diag = vec![0.0; m + 1];
    let mut mass_off = vec![0.0; m];
    let w = CONSISTENT_MASS_WEIGHT;
    for e in 0..m {
        let (a, b) = (radii[e], radii[e + 1]);
        let k = 6.0 * cubic_moment(a, b) / (dr * dr);
        stiffness_diag[e] += k;
        stiffness_diag[e + 1] += k;
        stiffness_off[e] -= k;

        let mut consistent = [[0.0; 2]; 2];
        for (t, wt) in GAUSS3 {
            let r = 0.5 * (a + b) + 0.5 * dr * t;
            let p = phi_at(r)?;
            let weight = 0.5 * dr * wt * p * p * r.powi(3);
            let shape = [(b - r) / dr, (r - a) / dr];
            for i in 0..2 {
                for j in 0..2 {
                    consistent[i][j] += weight * shape[i] * shape[j];
                }
            }
        }
        let mid = 0.5 * (a + b);
        let lumped = [
            phi[e] * phi[e] * cubic_moment(a, mid),
            phi[e + 1] * phi[e + 1] * cubic_moment(mid, b),
        ];
        mass_diag[e] += w * consistent[0][0] + (1.0 - w) * lumped[0];
        mass_diag[e + 1] += w * consistent[1][1] + (1.0 - w) * lumped[1];
        mass_off[e] += w * consistent[0][1];
    }
    stiffness_diag[m] += 6.0;
    Ok(RadialOperator {
        radii,
        phi,
        stiffness_diag,
        stiffness_off,
        mass_diag,
        mass_off,
    })
}

fn tridiagonal_apply(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += off[i] * x[i + 1];
            }
            v
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl RadialOperator {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn apply_stiffness(&self, x: &[f64]) -> Vec<f64> {
        tridiagonal_apply(&self.stiffness_diag, &self.stiffness_off, x)
    }

    pub fn apply_mass(&self, x: &[f64]) -> Vec<f64> {
        tridiagonal_apply(&self.mass_diag, &self.mass_off, x)
    }

    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        dot(&self.apply_stiffness(x), x) / dot(&self.apply_mass(x), x)
    }

    /// Solves `K y = b` (Thomas algorithm; `K` is symmetric tridiagonal and
    /// positive definite).
    pub fn solve_stiffness(&self, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = self.stiffness_off.first().copied().unwrap_or(0.0) / self.stiffness_diag[0];
        d[0] = b[0] / self.stiffness_diag[0];
        for i in 1..n {
            let sub = self.stiffness_off[i - 1];
            let denom = self.stiffness_diag[i] - sub * c[i - 1];
            c[i] = if i + 1 < n {
                self.stiffness_off[i] / denom
            } else {
                0.0
            };
            d[i] = (b[i] - sub * d[i - 1]) / denom;
        }
        let mut y = d;
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        y
    }
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub lambda1: f64,
    pub radii: Vec<f64>,
    /// `h = φ f`.
    pub h: Vec<f64>,
    /// First eigenfunction of `L`, normalized by `f(1) = 1`.
    pub f: Vec<f64>,
    pub rayleigh: f64,
    /// `|h'(1) + h(1)|` relative to `h(1)`, with a one-sided second-order
    /// difference.
    pub robin_residual: f64,
    pub min_f: f64,
    pub iterations: usize,
}

/// Smallest eigenvalue by inverse power iteration (shift 0) from the
/// all-ones vector, iterated until the vector settles.
pub fn lambda1(op: &RadialOperator) -> Result<SpectralResult> {
    let n = op.len();
    let mut x = vec![1.0; n];
    let mut prev_step = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let y = op.solve_stiffness(&op.apply_mass(&x));
        let norm = dot(&op.apply_mass(&y), &y).sqrt();
        let y: Vec<f64> = y.into_iter().map(|v| v / norm).collect();
        let step = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let size = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        x = y;
        if step <= VECTOR_TOL * size || (step <= STAGNATION_TOL * size && step > 0.5 * prev_step) {
            let rq = op.rayleigh_quotient(&x);
            return Ok(finish(op, x, rq, it));
        }
        prev_step = step;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

fn finish(op: &RadialOperator, h: Vec<f64>, rayleigh: f64, iterations: usize) -> SpectralResult {
    let m = op.len() - 1;
    let scale = h[m] / op.phi[m];
    let h: Vec<f64> = h.into_iter().map(|v| v / scale).collect();
    let f: Vec<f64> = h.iter().zip(&op.phi).map(|(a, p)| a / p).collect();
    let dr = op.radii[1];
    let slope = (3.0 * h[m] - 4.0 * h[m - 1] + h[m - 2]) / (2.0 * dr);
    SpectralResult {
        lambda1: rayleigh,
        robin_residual: (slope + h[m]).abs() / h[m].abs(),
        min_f: f.iter().copied().fold(f64::INFINITY, f64::min),
        radii: op.radii.clone(),
        h,
        f,
        rayleigh,
        iterations,
    }
}

/// Solve on meshes `m` and `m/2` and combine them by Richardson
/// extrapolation, removing the `O(m^-2)` error term. Eigenfunction samples
/// are extrapolated on the coarse nodes.
#[derive(Debug, Clone)]
pub struct ExtrapolatedSpectrum {
    pub lambda1: f64,
    pub fine: SpectralResult,
    pub coarse: SpectralResult,
    pub radii: Vec<f64>,
    pub f: Vec<f64>,
    /// `max |f - f(1)|` of the extrapolated eigenfunction.
    pub f_deviation: f64,
}

pub fn lambda1_extrapolated(metric: &MetricSpec, mesh_size: usize) -> Result<ExtrapolatedSpectrum> {
    if mesh_size % 2 != 0 || mesh_size / 2 < MIN_MESH {
        return Err(Error::InvalidGrid(format!(
            "extrapolation needs an even mesh size ≥ {}, got {mesh_size}",
            2 * MIN_MESH
        )));
    }
    let fine = lambda1(&assemble(metric, mesh_size)?)?;
    let coarse = lambda1(&assemble(metric, mesh_size / 2)?)?;
    let lambda1 = (4.0 * fine.lambda1 - coarse.lambda1) / 3.0;
    let f: Vec<f64> = coarse
        .f
        .iter()
        .enumerate()
        .map(|(i, c)| (4.0 * fine.f[2 * i] - c) / 3.0)
        .collect();
    let last = *f.last().expect("non-empty mesh");
    let f_deviation = f.iter().map(|v| (v - last).abs()).fold(0.0, f64::max);
    Ok(ExtrapolatedSpectrum {
        lambda1,
        radii: coarse.radii.clone(),
        f,
        f_deviation,
        fine,
        coarse,
    })
}

/// `λ₁² - 96 F2 / Vol`, non-negative for every admissible metric.
#[derive(Debug, Clone, Copy)]
pub struct InequalityGap {
    pub lambda1: f64,
    pub f2: f64,
    pub volume: f64,
    pub gap: f64,
}

pub fn inequality_gap(
    metric: &MetricSpec,
    grid: &BallGrid,
    mesh_size: usize,
) -> Result<InequalityGap> {
    let spectrum = lambda1_extrapolated(metric, mesh_size)?;
    let parts = f2_parts(metric, grid)?;
    let (lambda1, f2, volume) = (spectrum.lambda1, parts.total(), parts.volume);
    Ok(InequalityGap {
        lambda1,
        f2,
        volume,
        gap: lambda1 * lambda1 - 96.0 * f2 / volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::models;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        })
    }

    /// Smallest eigenvalue of the same pencil by a dense symmetric solve of
    /// `L^{-1} K L^{-T}` with `M = L L^T`.
    fn dense_lambda1(op: &RadialOperator) -> f64 {
        let k = dense(&op.stiffness_diag, &op.stiffness_off);
        let l = dense(&op.mass_diag, &op.mass_off).cholesky().unwrap().l();
        let li = l.try_inverse().unwrap();
        let a = &li * k * li.transpose();
        let a = (&a + a.transpose()) * 0.5;
        SymmetricEigen::new(a)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn exact_eigenpair_satisfies_the_continuous_problem() {
        // h = 2/(1+r²): Δ_flat h = 16/(1+r²)³ = 12 φ² h / 6 and h'(1) + h(1) = 0
        let h = |r: f64| 2.0 / (1.0 + r * r);
        let dh = |r: f64| -4.0 * r / (1.0 + r * r).powi(2);
        let d2h = |r: f64| (12.0 * r * r - 4.0) / (1.0 + r * r).powi(3);
        for r in [0.1, 0.5, 0.9] {
            let lap = -(d2h(r) + 3.0 / r * dh(r));
            assert!((6.0 * lap - 12.0 * h(r).powi(2) * h(r)).abs() < 1e-12);
        }
        assert!((dh(1.0) + h(1.0)).abs() < 1e-15);
    }

    #[test]
    fn power_iteration_matches_dense_solve() {
        for metric in [
            models::flat(4),
            models::hemisphere(4),
            models::radial_bump(4, 5, 0.3).unwrap(),
        ] {
            let op = assemble(&metric, 128).unwrap();
            let iterative = lambda1(&op).unwrap();
            let dense = dense_lambda1(&op);
            assert!(
                (iterative.lambda1 - dense).abs() < 1e-9 * dense,
                "{} {dense}",
                iterative.lambda1
            );
            assert!(iterative.min_f > 0.0);
        }
    }

    #[test]
    fn hemisphere_converges_at_second_order() {
        let m = models::hemisphere(4);
        let e: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&k| (lambda1(&assemble(&m, k).unwrap()).unwrap().lambda1 - 12.0).abs())
            .collect();
        for w in e.windows(2) {
            assert!(((w[0] / w[1]).log2() - 2.0).abs() < 0.1, "{e:?}");
        }
    }

    #[test]
    fn hemisphere_extrapolated() {
        let s = lambda1_extrapolated(&models::hemisphere(4), 2048).unwrap();
        assert!((s.lambda1 - 12.0).abs() < 1e-8, "{}", s.lambda1);
        assert!(s.f_deviation < 1e-7, "{}", s.f_deviation);
        assert!((s.fine.rayleigh - s.fine.lambda1).abs() < 1e-10);
    }

    #[test]
    fn scaling_law() {
        let base = models::radial_bump(4, 2, 0.2).unwrap();
        let phi = base.factor().unwrap().clone();
        let c = 1.7;
        let scaled = MetricSpec::conformal("scaled", 4, true, move |x| c * phi(x));
        let a = lambda1_extrapolated(&base, 512).unwrap().lambda1;
        let b = lambda1_extrapolated(&scaled, 512).unwrap().lambda1;
        assert!((b - a / (c * c)).abs() < 1e-8 * a);
    }

    #[test]
    fn flat_ball_eigenvalue_is_positive_with_positive_ground_state() {
        let s = lambda1(&assemble(&models::flat(4), 256).unwrap()).unwrap();
        assert!(s.lambda1 > 0.0);
        assert!(s.min_f > 0.0);
        assert!(s.robin_residual < 1e-3);
    }

    #[test]
    fn rejects_small_meshes_and_non_radial_metrics() {
        assert!(assemble(&models::hemisphere(4), 8).is_err());
        assert!(assemble(&models::generic_bump(4, 1, 0.1).unwrap(), 64).is_err());
        assert!(assemble(&models::hemisphere(6), 64).is_err());
    }

    #[test]
    fn hemisphere_gap_vanishes() {
        let grid = BallGrid::build(4, 64, 4, 1e-3, true).unwrap();
        let g = inequality_gap(&models::hemisphere(4), &grid, 2048).unwrap();
        assert!(g.gap.abs() < 1e-5, "{g:?}");
    }
}
