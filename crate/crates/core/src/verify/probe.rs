//! Falsification harness for scalar-curvature rigidity of the hemisphere:
//! search radial conformal deformations `e^{2u} g_st` with `u(1) = 0` for
//! one with `R ≥ 12` everywhere.

use super::{CheckReport, GridParams, Tolerance};
use crate::curvature::models::hemisphere_factor;
use crate::curvature::{point_curvature, MetricSpec};
use crate::grid::BallGrid;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Smallest admissible `‖u‖∞`; smaller deformations are scaled up to it.
pub const MIN_SUP_NORM: f64 = 0.01;
const SUP_SAMPLES: usize = 257;
const GRADIENT_STEP: f64 = 1e-4;
const INITIAL_STEP: f64 = 0.05;
const MAX_STEP: f64 = 1.0;
const MAX_COEFFICIENT: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub basis: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Largest `min(R - 12)` found.
    pub best: f64,
    /// Coefficients of `u = Σ c_k (1 - r²)^k` at the best point, normalized.
    pub coefficients: Vec<f64>,
    /// Best objective after each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
    /// Trial points discarded because the pipeline rejected the metric.
    pub rejected: usize,
    pub grid: GridParams,
    pub seconds: f64,
}

fn profile(c: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    let mut p = s;
    for ck in c {
        acc += ck * p;
        p *= s;
    }
    acc
}

/// Scales `c` so that `‖u‖∞ ≥ MIN_SUP_NORM`; `None` for `u ≡ 0`.
fn normalize(c: &[f64]) -> Option<Vec<f64>> {
    let sup = (0..SUP_SAMPLES)
        .map(|i| profile(c, i as f64 / (SUP_SAMPLES - 1) as f64).abs())
        .fold(0.0, f64::max);
    if !(sup > 0.0 && sup.is_finite()) {
        return None;
    }
    let scale = if sup < MIN_SUP_NORM {
        MIN_SUP_NORM / sup
    } else {
        1.0
    };
    Some(c.iter().map(|v| v * scale).collect())
}

fn probe_metric(c: Vec<f64>) -> MetricSpec {
    MetricSpec::conformal("probe", 4, true, move |x| {
        let q: f64 = x.iter().map(|v| v * v).sum();
        hemisphere_factor(x) * profile(&c, 1.0 - q).exp()
    })
}

struct Objective<'a> {
    grid: &'a BallGrid,
    nodes: Vec<Vec<f64>>,
    evaluations: usize,
}

impl<'a> Objective<'a> {
    fn new(grid: &'a BallGrid) -> Self {
        let mut nodes: Vec<Vec<f64>> = grid
            .radial_nodes
            .iter()
            .map(|n| {
                let mut x = vec![0.0; 4];
                x[0] = n.r;
                x
            })
            .collect();
        nodes.push(vec![1.0, 0.0, 0.0, 0.0]);
        Self {
            grid,
            nodes,
            evaluations: 0,
        }
    }

    /// `min(R - 12)` over the radial nodes and the boundary point.
    fn eval(&mut self, c: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let c = normalize(c).ok_or_else(|| Error::Precondition("u vanishes identically".into()))?;
        let m = probe_metric(c);
        let mut worst = f64::INFINITY;
        for x in &self.nodes {
            worst = worst.min(point_curvature(&m, self.grid, x)?.scalar - 12.0);
        }
        if !worst.is_finite() {
            return Err(Error::NonFinite {
                node: 0,
                location: vec![0.0; 4],
                value: worst,
            });
        }
        Ok(worst)
    }
}

/// Coordinate ascent on `min(R - 12)`: each iteration picks the next
/// coefficient, takes the sign of a central difference, and keeps the step
/// only if it improves the best value, so `history` never decreases.
pub fn rigidity_probe(
    basis: usize,
    iterations: usize,
    seed: u64,
    grid: &BallGrid,
) -> Result<ProbeResult> {
    if grid.dimension != 4 {
        return Err(Error::Unsupported(format!(
            "the probe runs in dimension 4, got {}",
            grid.dimension
        )));
    }
    if basis == 0 {
        return Err(Error::Precondition("basis size must be at least 1".into()));
    }
    let start = Instant::now();
    let mut obj = Objective::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<f64> = (0..basis)
        .map(|_| rng.gen_range(-INITIAL_STEP..INITIAL_STEP))
        .collect();
    let mut best = obj.eval(&c)?;
    let mut steps = vec![INITIAL_STEP; basis];
    let mut history = Vec::with_capacity(iterations);
    let mut rejected = 0;
    for it in 0..iterations {
        let k = it % basis;
        let mut probe = |delta: f64| {
            let mut t = c.clone();
            t[k] += delta;
            obj.eval(&t)
        };
        let slope = match (probe(GRADIENT_STEP), probe(-GRADIENT_STEP)) {
            (Ok(p), Ok(m)) => p - m,
            (Ok(_), Err(_)) => 1.0,
            (Err(_), Ok(_)) => -1.0,
            (Err(_), Err(_)) => 0.0,
        };
        let dir = if slope > 0.0 {
            1.0
        } else if slope < 0.0 {
            -1.0
        } else if rng.gen_bool(0.5) {
            1.0
        } else {
            -1.0
        };
        let mut trial = c.clone();
        trial[k] = (trial[k] + dir * steps[k]).clamp(-MAX_COEFFICIENT, MAX_COEFFICIENT);
        match obj.eval(&trial) {
            Ok(v) if v > best => {
                best = v;
                c = trial;
                steps[k] = (steps[k] * 1.5).min(MAX_STEP);
            }
            Ok(_) => steps[k] *= 0.5,
            Err(_) => {
                rejected += 1;
                steps[k] *= 0.5;
            }
        }
        history.push(best);
    }
    Ok(ProbeResult {
        basis,
        iterations,
        seed,
        best,
        coefficients: normalize(&c).unwrap_or(c),
        history,
        evaluations: obj.evaluations,
        rejected,
        grid: GridParams::of(grid, 0),
        seconds: start.elapsed().as_secs_f64(),
    })
}

impl ProbeResult {
    /// Violation `max(0, best)` against 0: any certified positive value fails.
    pub fn report(&self) -> CheckReport {
        let mut r = CheckReport::new(
            format!(
                "probe:basis{}:iter{}:seed{}",
                self.basis, self.iterations, self.seed
            ),
            self.best.max(0.0),
            0.0,
            Tolerance::abs(1e-6),
        )
        .with_grid(self.grid.clone())
        .with_note(format!(
            "best min(R - 12) = {:.6e} after {} evaluations ({} rejected)",
            self.best, self.evaluations, self.rejected
        ));
        r.seconds = self.seconds;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray() -> BallGrid {
        BallGrid::build(4, 16, 4, 1e-3, true).unwrap()
    }

    #[test]
    fn normalization_enforces_the_floor() {
        let c = normalize(&[1e-4, 0.0]).unwrap();
        assert!((c[0] - 0.01).abs() < 1e-15);
        assert_eq!(normalize(&[0.5, -0.1]).unwrap(), vec![0.5, -0.1]);
        assert!(normalize(&[0.0, 0.0]).is_none());
    }

    #[test]
    fn smallest_deformation_lowers_the_curvature() {
        let g = ray();
        let mut obj = Objective::new(&g);
        let up = obj.eval(&[0.01]).unwrap();
        let down = obj.eval(&[-0.01]).unwrap();
        assert!(up < 0.0 && down < 0.0, "{up} {down}");
    }

    #[test]
    fn best_is_monotone_and_reproducible() {
        let g = ray();
        let short = rigidity_probe(3, 12, 5, &g).unwrap();
        let long = rigidity_probe(3, 24, 5, &g).unwrap();
        assert!(short.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(&long.history[..12], &short.history[..]);
        assert!(long.best >= short.best);
        assert!(short.best < 0.0);
        assert_eq!(rigidity_probe(3, 12, 5, &g).unwrap().history, short.history);
    }
}
