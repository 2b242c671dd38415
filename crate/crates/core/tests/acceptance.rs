//! The ten acceptance criteria at default resolution (radial 64, angular 12,
//! fd_step 1e-3, mesh 2048). Prints one line per criterion and exits
//! non-zero if any fails.

use hemicheck::curvature::models;
use hemicheck::report::Report;
use hemicheck::verify::*;
use hemicheck::{model, BallGrid, Result};
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

const RADIAL: usize = 64;
const ANGULAR: usize = 12;
const FD_STEP: f64 = 1e-3;
const MESH: usize = 2048;
const LEVELS: usize = 3;

fn ray(n: usize) -> BallGrid {
    BallGrid::build(n, RADIAL, ANGULAR, FD_STEP, true).unwrap()
}

fn full(n: usize) -> BallGrid {
    BallGrid::build(n, RADIAL, ANGULAR, FD_STEP, false).unwrap()
}

struct Outcome {
    checks: Vec<CheckReport>,
    summary: String,
}

fn outcome(checks: Vec<CheckReport>, summary: impl Into<String>) -> Outcome {
    Outcome {
        checks,
        summary: summary.into(),
    }
}

fn c1_cgb4() -> Result<Outcome> {
    let g = ray(4);
    let mut checks = Vec::new();
    for name in [
        "hemisphere",
        "flat",
        "cap(0.6)",
        "radial_bump(1,0.2)",
        "radial_bump(2,0.2)",
        "radial_bump(3,0.2)",
    ] {
        let tol = if name == "flat" { 1e-8 } else { 1e-5 };
        checks.push(cgb4_check(
            &model(name, 4)?,
            &g,
            ANGULAR,
            LEVELS,
            Tolerance::abs(tol),
        )?);
    }
    let worst = checks
        .iter()
        .map(|c| (c.computed - 1.0).abs())
        .fold(0.0, f64::max);
    let min_order = checks
        .iter()
        .filter_map(|c| c.order_estimate)
        .fold(f64::INFINITY, f64::min);
    Ok(outcome(
        checks,
        format!("6 models, max |χ̂-1| = {worst:.2e}, min order {min_order:.2}"),
    ))
}

fn c2_pin() -> Result<Outcome> {
    let checks = boundary_pin_checks(&full(4), ANGULAR)?;
    let s = format!(
        "max |𝓑-2| = {:.2e}, |∫𝓑 - 4π²| = {:.2e}",
        checks[0].computed,
        (checks[1].computed - 4.0 * PI * PI).abs()
    );
    Ok(outcome(checks, s))
}

fn c3_f2() -> Result<Outcome> {
    let g = ray(4);
    let hemi = f2_check(&models::hemisphere(4), &g, ANGULAR, Tolerance::abs(1e-6))?;
    let flat = f2_check(&models::flat(4), &g, ANGULAR, Tolerance::abs(1e-8))?;
    let spread = f2_invariance_check(&models::hemisphere(4), 6, 4, 1, &g, &full(4))?;
    let s = format!(
        "hemisphere {:.2e}, flat {:.2e} off 2π²; spread {:.2e} over 10 factors",
        (hemi.computed - F2_HEMISPHERE).abs(),
        (flat.computed - F2_HEMISPHERE).abs(),
        spread.computed
    );
    Ok(outcome(vec![hemi, flat, spread], s))
}

fn c4_spectrum(sweep: &Sweep) -> Result<Outcome> {
    let mut checks = spectrum_checks(&models::hemisphere(4), MESH)?;
    checks.extend(
        inequality_sweep_check(sweep)
            .into_iter()
            .filter(|c| c.id.starts_with("spectrum:")),
    );
    let s = format!(
        "λ₁ - 12 = {:.2e}, eigenfunction deviation {:.2e}, {} sweep metrics",
        checks[1].computed - 12.0,
        checks[2].computed,
        sweep.samples.len() + 1
    );
    Ok(outcome(checks, s))
}

fn c5_inequality(sweep: &Sweep) -> Outcome {
    let checks: Vec<CheckReport> = inequality_sweep_check(sweep)
        .into_iter()
        .filter(|c| c.id.starts_with("inequality:"))
        .collect();
    let min_gap = sweep
        .samples
        .iter()
        .map(|s| s.gap())
        .fold(f64::INFINITY, f64::min);
    let s = format!(
        "min gap {min_gap:.3e} over {} metrics, hemisphere gap {:.2e}",
        sweep.samples.len(),
        checks[1].computed
    );
    outcome(checks, s)
}

fn c6_chain(sweep: &Sweep) -> Result<Outcome> {
    let checks = masspo_chain_check(sweep, &ray(4))?;
    let s = format!(
        "96F2 = {:.9}, (λ₁Vol^½)² = {:.9}, 192π² = {HEMISPHERE_YAMABE_SQUARED:.9}",
        checks[0].computed, checks[1].computed
    );
    Ok(outcome(checks, s))
}

fn c7_dim6() -> Result<Outcome> {
    let g = ray(6);
    let h = models::hemisphere(6);
    let a = cgb6_check(&h, &g, ANGULAR, LEVELS, Tolerance::abs(1e-6))?;
    let b = cgb6_gradient_form_check(&h, &g, ANGULAR, LEVELS, Tolerance::abs(1e-6))?;
    let agree = CheckReport::new(
        "cgb6:hemisphere:agreement",
        (a.computed - b.computed).abs(),
        0.0,
        Tolerance::abs(1e-6),
    );
    let scalar = constant_scalar_check(&h, &g, Tolerance::rel(1e-6))?;
    let escobar = escobar_check(&g, ANGULAR)?;
    let s = format!(
        "χ̂ = {:.12} / {:.12}, constant-scalar ratio {:.12}, Y = {:.9}",
        a.computed, b.computed, scalar.computed, escobar.computed
    );
    Ok(outcome(vec![a, b, agree, scalar, escobar], s))
}

fn c8_identities() -> Result<Outcome> {
    let checks = identity_checks(1, RADIAL, FD_STEP)?;
    let worst = checks.iter().map(|c| c.computed).fold(0.0, f64::max);
    let min_order = checks
        .iter()
        .filter_map(|c| c.order_estimate)
        .fold(f64::INFINITY, f64::min);
    Ok(outcome(
        checks,
        format!("max residual {worst:.2e}, min order {min_order:.2}"),
    ))
}

fn c9_probe() -> Result<Outcome> {
    let g = ray(4);
    let mut checks = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for seed in [1, 2, 3] {
        let p = rigidity_probe(6, 500, seed, &g)?;
        best = best.max(p.best);
        checks.push(p.report());
    }
    Ok(outcome(
        checks,
        format!("best min(R - 12) = {best:.4e} over seeds 1, 2, 3"),
    ))
}

/// Serialized report with the wall-clock fields cleared.
fn fingerprint(mut checks: Vec<CheckReport>) -> Vec<u8> {
    for c in &mut checks {
        c.seconds = 0.0;
    }
    let mut buf = Vec::new();
    Report::new("determinism", "", checks)
        .write_json(&mut buf)
        .unwrap();
    buf
}

fn c10_determinism() -> Result<Outcome> {
    let run = || -> Result<Vec<u8>> {
        let mut checks = c1_cgb4()?.checks;
        let sweep = run_sweep(&ray(4), MESH, 10, 0)?;
        checks.extend(masspo_chain_check(&sweep, &ray(4))?);
        checks.push(rigidity_probe(6, 60, 2, &ray(4))?.report());
        checks.extend(identity_checks(2, RADIAL, FD_STEP)?);
        Ok(fingerprint(checks))
    };
    let (a, b) = (run()?, run()?);
    let differing = if a == b { 0.0 } else { 1.0 };
    let check = CheckReport::new(
        "determinism:report_bytes",
        differing,
        0.0,
        Tolerance::abs(0.0),
    );
    Ok(outcome(
        vec![check],
        format!(
            "two runs, {} report bytes each, identical: {}",
            a.len(),
            a == b
        ),
    ))
}

fn main() -> ExitCode {
    let sweep = match run_sweep(&ray(4), MESH, SWEEP_SIZE, 0) {
        Ok(s) => s,
        Err(e) => {
            println!("sweep failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Outcome>>)> = vec![
        ("Chern-Gauss-Bonnet n=4", Box::new(c1_cgb4)),
        ("flat-ball boundary pin", Box::new(c2_pin)),
        ("F2 values and conformal invariance", Box::new(c3_f2)),
        ("Yamabe spectrum", Box::new(|| c4_spectrum(&sweep))),
        ("λ₁² ≥ 96 F2 / Vol", Box::new(|| Ok(c5_inequality(&sweep)))),
        ("96 F2 ≤ Y² ≤ 192π² chain", Box::new(|| c6_chain(&sweep))),
        ("dimension 6", Box::new(c7_dim6)),
        ("tensor identities", Box::new(c8_identities)),
        ("rigidity probe", Box::new(c9_probe)),
        ("determinism", Box::new(c10_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail, bad) = match run() {
            Ok(o) => {
                let bad: Vec<String> = o
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("{c:?}"))
                    .collect();
                (bad.is_empty(), o.summary, bad)
            }
            Err(e) => (false, format!("error: {e}"), Vec::new()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} ({:.1}s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for b in bad {
            println!("    failing check: {b}");
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
