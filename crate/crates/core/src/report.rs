//! Report files: a metadata object plus one row per check, as JSON or CSV.
//!
//! Floating-point numbers are written with 17 significant digits so that
//! they round-trip exactly; non-finite values become `null` (JSON) or an
//! empty cell (CSV).

use crate::verify::CheckReport;
use serde::ser::{Error as _, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;
use std::io::Write;

/// `v` with 17 significant digits, or `None` when not finite.
pub fn format_number(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

pub(crate) fn num<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    match format_number(*v) {
        Some(text) => RawValue::from_string(text)
            .map_err(S::Error::custom)?
            .serialize(s),
        None => s.serialize_none(),
    }
}

pub(crate) fn opt_num<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => num(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta<C: Serialize> {
    pub version: String,
    pub config: C,
    pub started_at: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<C: Serialize> {
    pub meta: Meta<C>,
    pub checks: Vec<CheckReport>,
}

impl<C: Serialize> Report<C> {
    /// Checks are ordered by id, not by completion.
    pub fn new(config: C, started_at: impl Into<String>, mut checks: Vec<CheckReport>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        Self {
            meta: Meta {
                version: env!("CARGO_PKG_VERSION").to_string(),
                config,
                started_at: started_at.into(),
            },
            checks,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failing_ids(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.id.as_str())
            .collect()
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for c in &self.checks {
            let cell = |v: f64| format_number(v).unwrap_or_default();
            w.write_record([
                c.id.clone(),
                cell(c.computed),
                cell(c.target),
                cell(c.abs_tol),
                cell(c.rel_tol),
                c.pass.to_string(),
                c.order_estimate.map(cell).unwrap_or_default(),
                cell(c.seconds),
                c.note.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "id",
    "computed",
    "target",
    "abs_tol",
    "rel_tol",
    "pass",
    "order_estimate",
    "seconds",
    "note",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Tolerance;

    fn sample() -> Report<&'static str> {
        let mut a = CheckReport::new("b", 1.0 / 3.0, 0.0, Tolerance::abs(1.0));
        a.order_estimate = Some(4.0);
        let b =
            CheckReport::new("a", f64::NAN, 1.0, Tolerance::rel(1e-6)).with_note("x, \"quoted\"");
        Report::new("cfg", "t0", vec![a, b])
    }

    #[test]
    fn json_round_trips_and_orders_by_id() {
        let mut buf = Vec::new();
        sample().write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let checks = v["checks"].as_array().unwrap();
        assert_eq!(checks[0]["id"], "a");
        assert!(checks[0]["computed"].is_null());
        assert_eq!(checks[1]["computed"].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(checks[1]["order_estimate"].as_f64().unwrap(), 4.0);
        assert!(checks[0]["order_estimate"].is_null());
        assert_eq!(v["meta"]["config"], "cfg");
        assert!(String::from_utf8(buf)
            .unwrap()
            .contains("3.3333333333333331e-1"));
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(
            r.headers().unwrap().iter().collect::<Vec<_>>(),
            CSV_HEADER.to_vec()
        );
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[0][0], "a");
        assert_eq!(&rows[0][1], "");
        assert_eq!(&rows[0][8], "x, \"quoted\"");
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_number(0.1).unwrap(), "1.0000000000000001e-1");
        assert!(format_number(f64::INFINITY).is_none());
    }
}
