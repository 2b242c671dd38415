//! `F2`, its conformal invariance, and the chain
//! `96 F2 ≤ Y² ≤ Y(S⁴₊)² = 192π²` sampled through first Robin eigenvalues.

use super::{single, CheckReport, GridParams, Tolerance};
use crate::conformal::{f2_parts, rescale, yamabe_quotient, ConformalFactor};
use crate::curvature::{models, MetricSpec};
use crate::grid::BallGrid;
use crate::spectral::lambda1_extrapolated;
use crate::{Error, Result};
use std::f64::consts::PI;
use std::time::Instant;

/// `Y(S⁴₊)² = (8π√3)² = 192π² ≈ 1894.964`.
pub const HEMISPHERE_YAMABE_SQUARED: f64 = 192.0 * PI * PI;
/// `F2` of every metric conformal to the round hemisphere.
pub const F2_HEMISPHERE: f64 = 2.0 * PI * PI;

pub const SWEEP_SIZE: usize = 50;
pub const SWEEP_MAX_AMPLITUDE: f64 = 0.3;

fn require_conformal(metric: &MetricSpec) -> Result<()> {
    if !metric.is_conformally_flat() {
        return Err(Error::Unsupported(format!(
            "`{}` is not given as a conformal factor of the flat ball",
            metric.name
        )));
    }
    Ok(())
}

/// `F2` against `2π²`, the value shared by the whole conformal class of the
/// ball.
pub fn f2_check(
    metric: &MetricSpec,
    grid: &BallGrid,
    angular: usize,
    tol: Tolerance,
) -> Result<CheckReport> {
    require_conformal(metric)?;
    let id = format!("f2:{}", metric.name);
    let mut note = None;
    let report = single(&id, F2_HEMISPHERE, tol, || {
        let p = f2_parts(metric, grid)?;
        note = Some(format!(
            "∫R²/96 = {:.12e}, ∫|E|²/8 = {:.12e}, ½∫𝓑 = {:.12e}",
            p.scalar_term, p.trace_free_term, p.boundary_term
        ));
        Ok(p.total())
    })?;
    let report = report.with_grid(GridParams::of(grid, angular));
    Ok(match note {
        Some(n) => report.with_note(n),
        None => report,
    })
}

/// Relative spread `(max - min)/|mean|` of `F2` over rescalings of `base`:
/// `radial` random radial factors on `ray` and `field` random non-radial
/// ones on `full`.
pub fn f2_invariance_check(
    base: &MetricSpec,
    radial: usize,
    field: usize,
    seed: u64,
    ray: &BallGrid,
    full: &BallGrid,
) -> Result<CheckReport> {
    let start = Instant::now();
    let mut values = Vec::with_capacity(radial + field);
    for k in 0..radial + field {
        let is_radial = k < radial;
        let factor = ConformalFactor::random(4, seed.wrapping_add(k as u64), 0.3, is_radial);
        let m = rescale(base, &factor)?;
        values.push(f2_parts(&m, if is_radial { ray } else { full })?.total());
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    let spread = if values.is_empty() {
        f64::NAN
    } else {
        (max - min) / mean.abs()
    };
    let mut r = CheckReport::new(format!("f2_invariance:{}", base.name), spread, 0.0, Tolerance::abs(1e-4))
        .with_note(format!(
            "{radial} radial factors (single ray), {field} non-radial factors (full grid); F2 in [{min:.12e}, {max:.12e}]"
        ));
    r.seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// One point of the chain for a radial metric in dimension 4.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSample {
    pub model: String,
    pub f2: f64,
    pub lambda1: f64,
    pub volume: f64,
    /// `(λ₁ Vol^{1/2})²`, an upper bound for `Y²`.
    pub witness: f64,
    /// Smallest value of the first eigenfunction on both meshes.
    pub min_ground_state: f64,
}

impl ChainSample {
    /// `witness - 96 F2`, non-negative by the inequality.
    pub fn margin(&self) -> f64 {
        self.witness - 96.0 * self.f2
    }

    /// `λ₁² - 96 F2 / Vol`.
    pub fn gap(&self) -> f64 {
        self.margin() / self.volume
    }
}

pub fn chain_sample(metric: &MetricSpec, grid: &BallGrid, mesh: usize) -> Result<ChainSample> {
    let spectrum = lambda1_extrapolated(metric, mesh)?;
    let parts = f2_parts(metric, grid)?;
    let lambda1 = spectrum.lambda1;
    Ok(ChainSample {
        model: metric.name.clone(),
        f2: parts.total(),
        lambda1,
        volume: parts.volume,
        witness: lambda1 * lambda1 * parts.volume,
        min_ground_state: spectrum.fine.min_f.min(spectrum.coarse.min_f),
    })
}

/// The hemisphere and `count` seeded radial bumps with amplitudes spread
/// evenly up to [`SWEEP_MAX_AMPLITUDE`].
#[derive(Debug, Clone)]
pub struct Sweep {
    pub hemisphere: ChainSample,
    pub samples: Vec<ChainSample>,
    pub grid: GridParams,
    pub seconds: f64,
}

pub fn sweep_models(count: usize, seed: u64) -> Result<Vec<MetricSpec>> {
    (1..=count)
        .map(|k| {
            let amplitude = SWEEP_MAX_AMPLITUDE * k as f64 / count as f64;
            models::radial_bump(4, seed.wrapping_add(k as u64), amplitude)
        })
        .collect()
}

pub fn run_sweep(grid: &BallGrid, mesh: usize, count: usize, seed: u64) -> Result<Sweep> {
    let start = Instant::now();
    let hemisphere = chain_sample(&models::hemisphere(4), grid, mesh)?;
    let samples = sweep_models(count, seed)?
        .iter()
        .map(|m| chain_sample(m, grid, mesh))
        .collect::<Result<Vec<_>>>()?;
    let mut params = GridParams::of(grid, 0);
    params.mesh = Some(mesh);
    Ok(Sweep {
        hemisphere,
        samples,
        grid: params,
        seconds: start.elapsed().as_secs_f64(),
    })
}

impl Sweep {
    fn report(&self, id: &str, computed: f64, target: f64, tol: Tolerance) -> CheckReport {
        let mut r = CheckReport::new(id, computed, target, tol).with_grid(self.grid.clone());
        r.seconds = self.seconds;
        r
    }

    fn worst<F: Fn(&ChainSample) -> f64>(&self, f: F) -> (f64, &str) {
        self.samples.iter().map(|s| (f(s), s.model.as_str())).fold(
            (f64::NEG_INFINITY, ""),
            |a, b| if b.0 > a.0 { b } else { a },
        )
    }
}

/// Saturation on the hemisphere, the constant `192π²`, and
/// `96 F2 ≤ (λ₁Vol^{1/2})²` with `F2` constant over the sweep.
pub fn masspo_chain_check(sweep: &Sweep, yamabe_grid: &BallGrid) -> Result<Vec<CheckReport>> {
    let rel = Tolerance::rel(1e-5);
    let h = &sweep.hemisphere;
    let mut out = vec![
        sweep.report(
            "chain:hemisphere:96f2",
            96.0 * h.f2,
            HEMISPHERE_YAMABE_SQUARED,
            rel,
        ),
        sweep.report(
            "chain:hemisphere:witness",
            h.witness,
            HEMISPHERE_YAMABE_SQUARED,
            rel,
        ),
    ];
    let y = yamabe_quotient(&models::hemisphere(4), yamabe_grid)?;
    out.push(
        sweep
            .report("chain:constant", y * y, HEMISPHERE_YAMABE_SQUARED, rel)
            .with_note(format!(
                "Y(S⁴₊)² from the Yamabe quotient; 192π² = {HEMISPHERE_YAMABE_SQUARED:.9} (not 1895.304)"
            )),
    );
    let (violation, model) = sweep.worst(|s| 96.0 * s.f2 - s.witness);
    out.push(
        sweep
            .report(
                "chain:sweep:margin",
                violation.max(0.0),
                0.0,
                Tolerance::abs(1e-6),
            )
            .with_note(format!(
                "max of 96F2 - (λ₁Vol^½)² is {violation:.6e} at {model}"
            )),
    );
    let (above, model) = sweep.worst(|s| 96.0 * s.f2 / HEMISPHERE_YAMABE_SQUARED - 1.0);
    out.push(
        sweep
            .report(
                "chain:sweep:below_sphere",
                above.max(0.0),
                0.0,
                Tolerance::abs(1e-5),
            )
            .with_note(format!("max of 96F2/192π² - 1 is {above:.6e} at {model}")),
    );
    let (below, model) = sweep.worst(|s| 1.0 - s.witness / HEMISPHERE_YAMABE_SQUARED);
    out.push(
        sweep
            .report(
                "chain:sweep:witness_above_sphere",
                below.max(0.0),
                0.0,
                Tolerance::abs(1e-5),
            )
            .with_note(format!(
                "smallest witness is {:.9} at {model}; hemisphere {:.9}",
                HEMISPHERE_YAMABE_SQUARED * (1.0 - below),
                h.witness
            )),
    );
    let f2: Vec<f64> = std::iter::once(h.f2)
        .chain(sweep.samples.iter().map(|s| s.f2))
        .collect();
    let max = f2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = f2.iter().copied().fold(f64::INFINITY, f64::min);
    out.push(sweep.report(
        "chain:sweep:f2_spread",
        (max - min) / F2_HEMISPHERE,
        0.0,
        Tolerance::abs(1e-4),
    ));
    Ok(out)
}

/// `λ₁² - 96 F2/Vol ≥ 0` over the sweep, equality on the hemisphere, and a
/// positive ground state throughout.
pub fn inequality_sweep_check(sweep: &Sweep) -> Vec<CheckReport> {
    let (neg_gap, model) = sweep.worst(|s| -s.gap());
    let negatives = sweep
        .samples
        .iter()
        .chain(std::iter::once(&sweep.hemisphere))
        .filter(|s| !(s.min_ground_state > 0.0))
        .count();
    vec![
        sweep
            .report(
                "inequality:sweep:gap",
                neg_gap.max(0.0),
                0.0,
                Tolerance::abs(1e-6),
            )
            .with_note(format!(
                "smallest gap {:.6e} at {model} over {} metrics",
                -neg_gap,
                sweep.samples.len()
            )),
        sweep.report(
            "inequality:hemisphere:gap",
            sweep.hemisphere.gap(),
            0.0,
            Tolerance::abs(1e-5),
        ),
        sweep
            .report(
                "spectrum:sweep:ground_state",
                negatives as f64,
                0.0,
                Tolerance::abs(0.0),
            )
            .with_note("number of metrics whose first eigenfunction is not positive"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray() -> BallGrid {
        BallGrid::build(4, 48, 4, 1e-3, true).unwrap()
    }

    #[test]
    fn constant_is_eight_pi_root_three_squared() {
        assert!((HEMISPHERE_YAMABE_SQUARED - (8.0 * PI * 3f64.sqrt()).powi(2)).abs() < 1e-10);
        assert!((HEMISPHERE_YAMABE_SQUARED - 1894.964_045).abs() < 1e-6);
    }

    #[test]
    fn hemisphere_saturates() {
        let s = chain_sample(&models::hemisphere(4), &ray(), 512).unwrap();
        assert!((96.0 * s.f2 / HEMISPHERE_YAMABE_SQUARED - 1.0).abs() < 1e-6);
        assert!((s.witness / HEMISPHERE_YAMABE_SQUARED - 1.0).abs() < 1e-6);
        assert!(s.gap().abs() < 1e-4);
    }

    #[test]
    fn small_sweep_passes() {
        let sweep = run_sweep(&ray(), 256, 4, 0).unwrap();
        for r in masspo_chain_check(&sweep, &ray())
            .unwrap()
            .iter()
            .chain(&inequality_sweep_check(&sweep))
        {
            assert!(r.pass, "{r:?}");
        }
        assert!(sweep.samples.iter().all(|s| s.margin() > 0.0));
    }

    #[test]
    fn f2_rejects_general_matrices() {
        assert!(f2_check(&models::perturbed_flat(4), &ray(), 4, Tolerance::abs(1e-6)).is_err());
    }
}
