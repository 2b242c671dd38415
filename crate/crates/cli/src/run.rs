use crate::{open_out, Format, Suite};
use hemicheck::curvature::models;
use hemicheck::report::Report;
use hemicheck::verify::{self, CheckReport, Tolerance};
use hemicheck::{model, BallGrid, Error, MetricSpec};
use serde::Serialize;
use serde_json::Value;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub verb: String,
    pub suite: Suite,
    pub model: String,
    pub dim: usize,
    pub radial: usize,
    pub angular: usize,
    pub fd_step: f64,
    pub mesh: usize,
    pub refine: usize,
    pub seed: u64,
    pub basis: usize,
    pub iterations: usize,
    pub format: Format,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("report file: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunError {
    /// 2 for anything caused by the configuration or the input, 1 for a
    /// numerical breakdown on a valid configuration.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Core(
                Error::NonFinite { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NoConvergence { .. },
            ) => 1,
            _ => 2,
        }
    }
}

type Checks = Result<Vec<CheckReport>, RunError>;

impl RunConfig {
    fn grid(&self, n: usize, radial_only: bool) -> Result<BallGrid, RunError> {
        Ok(BallGrid::build(
            n,
            self.radial,
            self.angular,
            self.fd_step,
            radial_only,
        )?)
    }

    /// Single ray for rotationally symmetric metrics, full grid otherwise.
    fn grid_for(&self, m: &MetricSpec) -> Result<BallGrid, RunError> {
        self.grid(m.dimension, m.rotationally_symmetric)
    }

    fn metric(&self) -> Result<MetricSpec, RunError> {
        Ok(model(&self.model, self.dim)?)
    }

    fn require_dim(&self, n: usize) -> Result<(), RunError> {
        if self.dim != n {
            return Err(RunError::Usage(format!(
                "suite {:?} needs a dimension-{n} model, got --dim {}",
                self.suite, self.dim
            )));
        }
        Ok(())
    }
}

fn cgb4(cfg: &RunConfig, m: &MetricSpec) -> Checks {
    let tol = if m.name == "flat" { 1e-8 } else { 1e-5 };
    let mut out = vec![verify::cgb4_check(
        m,
        &cfg.grid_for(m)?,
        cfg.angular,
        cfg.refine,
        Tolerance::abs(tol),
    )?];
    if m.name == "flat" {
        out.extend(verify::boundary_pin_checks(
            &cfg.grid(4, false)?,
            cfg.angular,
        )?);
    }
    Ok(out)
}

fn cgb6(cfg: &RunConfig, m: &MetricSpec) -> Checks {
    let g = cfg.grid_for(m)?;
    let tol = Tolerance::abs(1e-6);
    let mut out = vec![
        verify::cgb6_check(m, &g, cfg.angular, cfg.refine, tol)?,
        verify::cgb6_gradient_form_check(m, &g, cfg.angular, cfg.refine, tol)?,
        verify::tr_e3_identity_check(m, &g, cfg.angular, cfg.refine, Tolerance::abs(1e-4))?,
    ];
    if m.name == "hemisphere" {
        out.push(verify::constant_scalar_check(m, &g, Tolerance::rel(1e-6))?);
        out.push(verify::escobar_check(&g, cfg.angular)?);
    }
    Ok(out)
}

fn f2(cfg: &RunConfig, m: &MetricSpec) -> Checks {
    let tol = Tolerance::abs(if m.name == "flat" { 1e-8 } else { 1e-6 });
    let g = cfg.grid_for(m)?;
    let full = cfg.grid(4, false)?;
    Ok(vec![
        verify::f2_check(m, &g, cfg.angular, tol)?,
        verify::f2_invariance_check(m, 6, 4, cfg.seed, &g, &full)?,
    ])
}

fn chain(cfg: &RunConfig, m: &MetricSpec) -> Checks {
    let ray = cfg.grid(4, true)?;
    let sweep = verify::run_sweep(&ray, cfg.mesh, verify::SWEEP_SIZE, cfg.seed)?;
    let mut out = verify::masspo_chain_check(&sweep, &ray)?;
    out.extend(verify::inequality_sweep_check(&sweep));
    if m.name != "hemisphere" {
        let s = verify::chain_sample(m, &cfg.grid_for(m)?, cfg.mesh)?;
        out.push(
            CheckReport::new(
                format!("chain:model:{}:margin", m.name),
                (-s.margin()).max(0.0),
                0.0,
                Tolerance::abs(1e-6),
            )
            .with_note(format!(
                "96F2 = {:.12e}, (λ₁Vol^½)² = {:.12e}",
                96.0 * s.f2,
                s.witness
            )),
        );
    }
    Ok(out)
}

pub fn run_checks(cfg: &RunConfig) -> Checks {
    if cfg.dim != 4 && cfg.dim != 6 {
        return Err(RunError::Usage(format!(
            "--dim must be 4 or 6, got {}",
            cfg.dim
        )));
    }
    if cfg.radial < 4 || cfg.angular < 4 || cfg.mesh < 32 || cfg.mesh % 2 != 0 {
        return Err(RunError::Usage(
            "need --radial ≥ 4, --angular ≥ 4 and an even --mesh ≥ 32".into(),
        ));
    }
    match cfg.suite {
        Suite::Cgb4 => {
            cfg.require_dim(4)?;
            cgb4(cfg, &cfg.metric()?)
        }
        Suite::Cgb6 => {
            cfg.require_dim(6)?;
            cgb6(cfg, &cfg.metric()?)
        }
        Suite::F2 => {
            cfg.require_dim(4)?;
            f2(cfg, &cfg.metric()?)
        }
        Suite::Spectrum => {
            cfg.require_dim(4)?;
            Ok(verify::spectrum_checks(&cfg.metric()?, cfg.mesh)?)
        }
        Suite::Chain => {
            cfg.require_dim(4)?;
            chain(cfg, &cfg.metric()?)
        }
        Suite::Identities => Ok(verify::identity_checks(cfg.seed, cfg.radial, cfg.fd_step)?),
        Suite::Probe => {
            cfg.require_dim(4)?;
            let p =
                verify::rigidity_probe(cfg.basis, cfg.iterations, cfg.seed, &cfg.grid(4, true)?)?;
            Ok(vec![p.report()])
        }
        Suite::All => {
            cfg.require_dim(4)?;
            let m = cfg.metric()?;
            let mut out = cgb4(cfg, &m)?;
            out.extend(cgb6(cfg, &models::hemisphere(6))?);
            out.extend(f2(cfg, &m)?);
            out.extend(verify::spectrum_checks(&m, cfg.mesh)?);
            out.extend(chain(cfg, &m)?);
            out.extend(verify::identity_checks(cfg.seed, cfg.radial, cfg.fd_step)?);
            let p =
                verify::rigidity_probe(cfg.basis, cfg.iterations, cfg.seed, &cfg.grid(4, true)?)?;
            out.push(p.report());
            Ok(out)
        }
    }
}

fn number(row: &Value, key: &str) -> Result<f64, RunError> {
    match row.get(key) {
        Some(Value::Null) => Ok(f64::NAN),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| RunError::Usage(format!("`{key}` is not a number"))),
        None => Err(RunError::Usage(format!("check row without `{key}`"))),
    }
}

fn row_to_check(row: &Value) -> Result<CheckReport, RunError> {
    let id = row
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| RunError::Usage("check row without `id`".into()))?;
    let tol = Tolerance {
        abs: number(row, "abs_tol")?,
        rel: number(row, "rel_tol")?,
    };
    let mut c = CheckReport::new(id, number(row, "computed")?, number(row, "target")?, tol);
    c.pass = row
        .get("pass")
        .and_then(Value::as_bool)
        .ok_or_else(|| RunError::Usage(format!("`{id}` has no boolean `pass`")))?;
    c.order_estimate = row.get("order_estimate").and_then(Value::as_f64);
    c.seconds = number(row, "seconds").unwrap_or(f64::NAN);
    c.note = row.get("note").and_then(Value::as_str).map(str::to_string);
    Ok(c)
}

/// Re-asserts every row of a saved report against its own tolerance and
/// re-emits it. Succeeds iff every row passes and every stored pass flag
/// agrees with the tolerance rule.
pub fn recheck(input: &Path, format: Format, out: Option<&Path>) -> Result<bool, RunError> {
    let doc: Value = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(input)?))?;
    let rows = doc
        .get("checks")
        .and_then(Value::as_array)
        .ok_or_else(|| RunError::Usage("report has no `checks` array".into()))?;
    let checks = rows
        .iter()
        .map(row_to_check)
        .collect::<Result<Vec<_>, _>>()?;
    let mut ok = true;
    for c in &checks {
        let expected = c.computed.is_finite()
            && Tolerance {
                abs: c.abs_tol,
                rel: c.rel_tol,
            }
            .accepts(c.computed, c.target);
        if expected != c.pass {
            eprintln!(
                "INCONSISTENT {}: stored pass = {}, tolerance rule gives {expected}",
                c.id, c.pass
            );
            ok = false;
        }
        if !c.pass {
            eprintln!("FAIL {}", c.id);
            ok = false;
        }
    }
    let mut w = open_out(out)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let meta = doc.get("meta").cloned().unwrap_or(Value::Null);
            let started = meta
                .get("started_at")
                .and_then(Value::as_str)
                .unwrap_or("")
                .to_string();
            let config = meta.get("config").cloned().unwrap_or(Value::Null);
            Report::new(config, started, checks).write_csv(&mut w)?;
        }
    }
    w.flush()?;
    Ok(ok)
}
