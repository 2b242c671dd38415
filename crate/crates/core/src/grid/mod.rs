//! Discretization of the closed unit ball in dimensions 4 and 6.
//!
//! Bulk integrals use a radial Gauss-Legendre rule on `[0, 1]` (with the
//! `r^{n-1}` Jacobian applied at integration time) times a tensorized Gauss
//! rule in hyperspherical angles. Boundary integrals reuse the angular rule at
//! radius 1. In radial-only mode the angular rule collapses to a single
//! direction carrying the full sphere volume.

mod fd;
pub mod quadrature;
mod sum;

pub use fd::{FdEngine, Jet1, Jet2};
pub use sum::pairwise_sum;

use crate::{Error, Result};
use quadrature::{gauss_jacobi_symmetric, gauss_legendre_unit, sphere_volume};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Largest admissible finite-difference step.
pub const MAX_FD_STEP: f64 = 0.05;

/// Ratio between the nested step and the metric step. Quantities that need
/// third or fourth metric derivatives (`∇R`, `∇E`, `ΔE`, `∇S`) are obtained
/// by differencing the curvature pipeline, both levels at the nested step.
pub const NESTED_STEP_RATIO: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode {
    pub r: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularNode {
    pub direction: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallGrid {
    pub dimension: usize,
    pub radial_nodes: Vec<RadialNode>,
    pub angular_nodes: Vec<AngularNode>,
    pub fd_step: f64,
    /// Step for differencing curvature fields, see [`NESTED_STEP_RATIO`].
    pub nested_step: f64,
    pub radial_only: bool,
}

/// A bulk quadrature node: position and weight (including `r^{n-1}`).
#[derive(Debug, Clone, PartialEq)]
pub struct BulkNode {
    pub index: usize,
    pub position: Vec<f64>,
    pub weight: f64,
}

impl BallGrid {
    /// Builds the grid. `angular_count_per_axis` is the Gauss order in each
    /// polar angle; the azimuth uses twice as many equispaced nodes. It is
    /// ignored when `radial_only` is set.
    pub fn build(
        dimension: usize,
        radial_count: usize,
        angular_count_per_axis: usize,
        fd_step: f64,
        radial_only: bool,
    ) -> Result<Self> {
        if dimension != 4 && dimension != 6 {
            return Err(Error::InvalidGrid(format!(
                "dimension {dimension} (expected 4 or 6)"
            )));
        }
        if radial_count < 4 {
            return Err(Error::InvalidGrid(format!(
                "radial count {radial_count} < 4"
            )));
        }
        if !radial_only && angular_count_per_axis < 4 {
            return Err(Error::InvalidGrid(format!(
                "angular count {angular_count_per_axis} < 4"
            )));
        }
        if !(fd_step > 0.0 && fd_step <= MAX_FD_STEP) {
            return Err(Error::InvalidGrid(format!(
                "fd_step {fd_step} outside (0, {MAX_FD_STEP}]"
            )));
        }
        let radial_nodes = gauss_legendre_unit(radial_count)
            .into_iter()
            .map(|(r, weight)| RadialNode { r, weight })
            .collect();
        let angular_nodes = if radial_only {
            let mut direction = vec![0.0; dimension];
            direction[0] = 1.0;
            vec![AngularNode {
                direction,
                weight: sphere_volume(dimension),
            }]
        } else {
            hyperspherical_rule(dimension, angular_count_per_axis)
        };
        Ok(Self {
            dimension,
            radial_nodes,
            angular_nodes,
            fd_step,
            nested_step: NESTED_STEP_RATIO * fd_step,
            radial_only,
        })
    }

    pub fn with_nested_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "nested step {step} must be positive"
            )));
        }
        self.nested_step = step;
        Ok(self)
    }

    /// Same quadrature with a different finite-difference step (the nested
    /// step keeps its ratio).
    pub fn with_fd_step(&self, fd_step: f64) -> Result<Self> {
        if !(fd_step > 0.0 && fd_step <= MAX_FD_STEP) {
            return Err(Error::InvalidGrid(format!(
                "fd_step {fd_step} outside (0, {MAX_FD_STEP}]"
            )));
        }
        let ratio = self.nested_step / self.fd_step;
        let mut g = self.clone();
        g.fd_step = fd_step;
        g.nested_step = ratio * fd_step;
        Ok(g)
    }

    pub fn bulk_len(&self) -> usize {
        self.radial_nodes.len() * self.angular_nodes.len()
    }

    pub fn boundary_len(&self) -> usize {
        self.angular_nodes.len()
    }

    pub fn bulk_node(&self, index: usize) -> BulkNode {
        let na = self.angular_nodes.len();
        let (ir, ia) = (index / na, index % na);
        let rn = self.radial_nodes[ir];
        let an = &self.angular_nodes[ia];
        BulkNode {
            index,
            position: an.direction.iter().map(|d| rn.r * d).collect(),
            weight: rn.weight * rn.r.powi(self.dimension as i32 - 1) * an.weight,
        }
    }

    pub fn bulk_nodes(&self) -> impl Iterator<Item = BulkNode> + '_ {
        (0..self.bulk_len()).map(move |i| self.bulk_node(i))
    }

    /// Boundary node positions (the angular directions at radius 1).
    pub fn boundary_node(&self, index: usize) -> &[f64] {
        &self.angular_nodes[index].direction
    }

    pub fn fd_engine(&self, domain_radius: f64) -> Result<FdEngine> {
        FdEngine::new(self.fd_step, domain_radius)
    }

    pub fn nested_engine(&self, domain_radius: f64) -> Result<FdEngine> {
        FdEngine::new(self.nested_step, domain_radius)
    }

    /// Evaluates `f` at every bulk node in parallel; results are in node order.
    pub fn map_bulk<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&BulkNode) -> Result<T> + Sync,
    {
        (0..self.bulk_len())
            .into_par_iter()
            .map(|i| f(&self.bulk_node(i)))
            .collect()
    }

    /// Evaluates `f` at every boundary node in parallel, in node order.
    pub fn map_boundary<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &[f64]) -> Result<T> + Sync,
    {
        (0..self.boundary_len())
            .into_par_iter()
            .map(|i| f(i, self.boundary_node(i)))
            .collect()
    }
}

/// Tensorized rule on `S^{n-1}`: Gauss-Jacobi in `cos θ_k` for the polar
/// angles (absorbing the `sin^{n-1-k} θ_k` factors) and the trapezoid rule in
/// the azimuth.
fn hyperspherical_rule(n: usize, count: usize) -> Vec<AngularNode> {
    let polar: Vec<Vec<(f64, f64)>> = (1..=n - 2)
        .map(|k| {
            let power = (n - 1 - k) as u32;
            gauss_jacobi_symmetric(count, power - 1)
        })
        .collect();
    let n_az = 2 * count;
    let az_weight = 2.0 * PI / n_az as f64;
    let mut nodes = Vec::new();
    let mut idx = vec![0usize; n - 2];
    loop {
        for j in 0..n_az {
            let phi = (j as f64 + 0.5) * az_weight;
            let mut dir = Vec::with_capacity(n);
            let mut s = 1.0;
            let mut w = az_weight;
            for (k, rule) in polar.iter().enumerate() {
                let (t, wt) = rule[idx[k]];
                dir.push(s * t);
                s *= (1.0 - t * t).sqrt();
                w *= wt;
            }
            dir.push(s * phi.cos());
            dir.push(s * phi.sin());
            nodes.push(AngularNode {
                direction: dir,
                weight: w,
            });
        }
        // odometer over the polar indices, last axis fastest
        let mut k = n - 2;
        loop {
            if k == 0 {
                return nodes;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < count {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// `Σ weight · field · density` over the bulk nodes.
pub fn integrate_bulk(grid: &BallGrid, field: &[f64], density: &[f64]) -> Result<f64> {
    let len = grid.bulk_len();
    check_len(len, field.len(), density.len())?;
    let terms = (0..len)
        .map(|i| {
            let node = grid.bulk_node(i);
            let t = node.weight * field[i] * density[i];
            if !(field[i].is_finite() && density[i].is_finite()) {
                let value = if field[i].is_finite() {
                    density[i]
                } else {
                    field[i]
                };
                return Err(Error::NonFinite {
                    node: i,
                    location: node.position,
                    value,
                });
            }
            Ok(t)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// `Σ weight · field · area_density` over the boundary nodes.
pub fn integrate_boundary(grid: &BallGrid, field: &[f64], area_density: &[f64]) -> Result<f64> {
    let len = grid.boundary_len();
    check_len(len, field.len(), area_density.len())?;
    let terms = (0..len)
        .map(|i| {
            if !(field[i].is_finite() && area_density[i].is_finite()) {
                let value = if field[i].is_finite() {
                    area_density[i]
                } else {
                    field[i]
                };
                return Err(Error::NonFinite {
                    node: i,
                    location: grid.boundary_node(i).to_vec(),
                    value,
                });
            }
            Ok(grid.angular_nodes[i].weight * field[i] * area_density[i])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Integrates `k` fields at once; `f` returns the integrands (densities
/// already applied) at a bulk node.
pub fn integrate_bulk_many<F>(grid: &BallGrid, k: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&BulkNode) -> Result<Vec<f64>> + Sync,
{
    let values = grid.map_bulk(|node| {
        let v = f(node)?;
        check_arity(k, v.len())?;
        Ok(v)
    })?;
    let ones = vec![1.0; values.len()];
    (0..k)
        .map(|j| {
            integrate_bulk(
                grid,
                &values.iter().map(|v| v[j]).collect::<Vec<_>>(),
                &ones,
            )
        })
        .collect()
}

/// Boundary counterpart of [`integrate_bulk_many`].
pub fn integrate_boundary_many<F>(grid: &BallGrid, k: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &[f64]) -> Result<Vec<f64>> + Sync,
{
    let values = grid.map_boundary(|i, x| {
        let v = f(i, x)?;
        check_arity(k, v.len())?;
        Ok(v)
    })?;
    let ones = vec![1.0; values.len()];
    (0..k)
        .map(|j| {
            integrate_boundary(
                grid,
                &values.iter().map(|v| v[j]).collect::<Vec<_>>(),
                &ones,
            )
        })
        .collect()
}

fn check_arity(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidGrid(format!(
            "integrand returned {got} values, expected {expected}"
        )));
    }
    Ok(())
}

fn check_len(expected: usize, field: usize, density: usize) -> Result<()> {
    if field != expected || density != expected {
        return Err(Error::InvalidGrid(format!(
            "expected {expected} node values, got field {field} and density {density}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadrature::ball_volume;

    fn integrate_fn(grid: &BallGrid, f: impl Fn(&[f64]) -> f64) -> f64 {
        let field: Vec<f64> = grid.bulk_nodes().map(|n| f(&n.position)).collect();
        integrate_bulk(grid, &field, &vec![1.0; field.len()]).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BallGrid::build(5, 16, 8, 1e-3, false).is_err());
        assert!(BallGrid::build(4, 16, 8, 0.0, false).is_err());
        assert!(BallGrid::build(4, 16, 8, -1e-3, false).is_err());
        assert!(BallGrid::build(4, 16, 8, 0.06, false).is_err());
        assert!(BallGrid::build(4, 3, 8, 1e-3, false).is_err());
    }

    #[test]
    fn angular_weights_sum_to_sphere_volume() {
        for n in [4, 6] {
            let g = BallGrid::build(n, 8, 6, 1e-3, false).unwrap();
            assert!(g.angular_nodes.iter().all(|a| a.weight > 0.0));
            let s: f64 =
                pairwise_sum(&g.angular_nodes.iter().map(|a| a.weight).collect::<Vec<_>>());
            let exact = sphere_volume(n);
            assert!(((s - exact) / exact).abs() < 1e-12, "n = {n}");
            for a in &g.angular_nodes {
                let norm: f64 = a.direction.iter().map(|v| v * v).sum();
                assert!((norm - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unit_integrand_gives_ball_volume() {
        let g = BallGrid::build(4, 32, 12, 1e-3, false).unwrap();
        let v = integrate_fn(&g, |_| 1.0);
        assert!((v - PI * PI / 2.0).abs() < 1e-10);
        let g6 = BallGrid::build(6, 32, 4, 1e-3, true).unwrap();
        assert!((integrate_fn(&g6, |_| 1.0) - ball_volume(6)).abs() < 1e-10);
        let ones = vec![1.0; g6.boundary_len()];
        let s = integrate_boundary(&g6, &ones, &ones).unwrap();
        assert!((s - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn radius_squared_integrates_exactly() {
        let r2 = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let coarse = BallGrid::build(4, 16, 8, 1e-3, false).unwrap();
        let fine = BallGrid::build(4, 32, 16, 1e-3, false).unwrap();
        for g in [&coarse, &fine] {
            assert!((integrate_fn(g, r2) - PI * PI / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn angular_rule_integrates_non_radial_polynomial() {
        // ∫_{S^3} x1^2 x2^2 = 2π²/24 ; ∫_{S^5} x1^4 = 3π³/48
        let g4 = BallGrid::build(4, 8, 8, 1e-3, false).unwrap();
        let s4: f64 = g4
            .angular_nodes
            .iter()
            .map(|a| a.weight * a.direction[0].powi(2) * a.direction[3].powi(2))
            .sum();
        assert!((s4 - 2.0 * PI * PI / 24.0).abs() < 1e-13);
        let g6 = BallGrid::build(6, 8, 6, 1e-3, false).unwrap();
        let s6: f64 = g6
            .angular_nodes
            .iter()
            .map(|a| a.weight * a.direction[5].powi(4))
            .sum();
        assert!((s6 - 3.0 * PI.powi(3) / 48.0).abs() < 1e-13);
    }

    #[test]
    fn boundary_integrals() {
        let g = BallGrid::build(4, 16, 8, 1e-3, false).unwrap();
        let ones = vec![1.0; g.boundary_len()];
        let twos = vec![2.0; g.boundary_len()];
        assert!((integrate_boundary(&g, &ones, &ones).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
        assert!((integrate_boundary(&g, &twos, &ones).unwrap() - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn non_finite_value_names_the_node() {
        let g = BallGrid::build(4, 4, 4, 1e-3, false).unwrap();
        let mut f = vec![1.0; g.bulk_len()];
        f[17] = f64::NAN;
        match integrate_bulk(&g, &f, &vec![1.0; f.len()]) {
            Err(Error::NonFinite { node, .. }) => assert_eq!(node, 17),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn integration_is_deterministic() {
        let g = BallGrid::build(4, 16, 8, 1e-3, false).unwrap();
        let f = |x: &[f64]| (x[0] + 0.3 * x[1]).exp();
        let a = integrate_fn(&g, f);
        let b = integrate_fn(&g, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
