use super::{observed_order, CheckReport, ConvergenceRow, GridParams, Tolerance};
use crate::curvature::MetricSpec;
use crate::spectral::lambda1_extrapolated;
use crate::Result;
use std::time::Instant;

/// `λ₁` of the round hemisphere, with eigenfunction `f ≡ 1`.
pub const HEMISPHERE_LAMBDA1: f64 = 12.0;

/// Positivity of the ground state for any radial metric; for the round
/// hemisphere also `λ₁ = 12` and a constant eigenfunction.
pub fn spectrum_checks(metric: &MetricSpec, mesh: usize) -> Result<Vec<CheckReport>> {
    let start = Instant::now();
    let s = lambda1_extrapolated(metric, mesh)?;
    let seconds = start.elapsed().as_secs_f64();
    let params = GridParams {
        dimension: metric.dimension,
        radial: mesh,
        angular: 0,
        fd_step: 0.0,
        radial_only: true,
        mesh: Some(mesh),
    };
    let finish = |mut r: CheckReport| {
        r.seconds = seconds;
        r.with_grid(params.clone())
    };
    let min_f = s.fine.min_f.min(s.coarse.min_f);
    let mut out = vec![finish(
        CheckReport::new(
            format!("spectrum:ground_state:{}", metric.name),
            f64::from(u8::from(!(min_f > 0.0))),
            0.0,
            Tolerance::abs(0.0),
        )
        .with_note(format!("λ₁ = {:.12}, min f = {min_f:.6e}", s.lambda1)),
    )];
    if metric.name == "hemisphere" && metric.dimension == 4 {
        let target = HEMISPHERE_LAMBDA1;
        let rows: Vec<ConvergenceRow> = [(&s.coarse, mesh / 2), (&s.fine, mesh)]
            .iter()
            .map(|(r, m)| ConvergenceRow {
                resolution: 1.0 / *m as f64,
                value: r.lambda1,
                error: (r.lambda1 - target).abs(),
            })
            .collect();
        let mut lambda = CheckReport::new(
            "spectrum:lambda1:hemisphere",
            s.lambda1,
            target,
            Tolerance::abs(1e-8),
        )
        .with_note("Richardson extrapolation of the two meshes in the table");
        lambda.order_estimate = observed_order(&rows, target);
        lambda.convergence = rows;
        out.push(finish(lambda));
        out.push(finish(CheckReport::new(
            "spectrum:eigenfunction:hemisphere",
            s.f_deviation,
            0.0,
            Tolerance::abs(1e-7),
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::models;

    #[test]
    fn hemisphere_rows() {
        let r = spectrum_checks(&models::hemisphere(4), 2048).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|c| c.pass), "{r:?}");
        assert!((r[1].order_estimate.unwrap() - 2.0).abs() < 0.1);
        let flat = spectrum_checks(&models::flat(4), 256).unwrap();
        assert_eq!(flat.len(), 1);
        assert!(flat[0].pass);
    }
}
