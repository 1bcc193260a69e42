use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{Command, PointRecord, Report, SCHEMA_VERSION, SIGNIFICANT_DIGITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    fn json(self) -> bool {
        self != OutputFormat::Csv
    }

    fn csv(self) -> bool {
        self != OutputFormat::Json
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<OutputFormat> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::Config(format!("unknown format '{other}' (expected json, csv or both)"))),
        }
    }
}

/// Round to [`SIGNIFICANT_DIGITS`] significant digits. `-0.0` becomes `0.0`
/// so that equal values always print the same.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

// Metric columns per command, in header order. Each metric `m` gets the
// columns `m`, `m_se` and `m_oracle`.
const AUDIT_METRICS: &[&str] = &[
    "concealment_fidelity",
    "trace_distance",
    "marginal_deviation",
    "fidelity_audit",
    "honest_bottom_rate",
    "honest_correct_rate",
    "honest_wrong_rate",
    "honest_bottom_rate_mc",
    "honest_wrong_rate_mc",
];
const AUDIT_FLAGS: &[&str] = &["no_information"];

const ATTACK_METRICS: &[&str] = &[
    "flip_one_success",
    "flip_one_success_mc",
    "epr_conditional_success_0",
    "epr_conditional_success_0_mc",
    "epr_conditional_success_1",
    "epr_conditional_success_1_mc",
    "fidelity_prime",
    "partner_overlap",
    "honest_success",
    "mayers_success",
    "mayers_success_mc",
    "mayers_conditional_success",
    "mayers_conditional_success_mc",
    "bound",
    "effective_bound",
    "steering_identity_distance",
];
const ATTACK_FLAGS: &[&str] = &["bound_satisfied", "epr_skipped", "mayers_skipped"];

const ORACLE_METRICS: &[&str] = &[
    "honest_bottom_rate",
    "honest_correct_rate",
    "honest_wrong_rate",
    "honest_bottom_rate_mc",
    "honest_wrong_rate_mc",
    "flip_one_success",
    "flip_one_success_mc",
    "optimal_classical_success",
    "mayers_success",
];
const ORACLE_FLAGS: &[&str] = &[];

fn columns(command: Command) -> (&'static [&'static str], &'static [&'static str]) {
    match command {
        Command::Audit => (AUDIT_METRICS, AUDIT_FLAGS),
        Command::Attack => (ATTACK_METRICS, ATTACK_FLAGS),
        Command::Oracle => (ORACLE_METRICS, ORACLE_FLAGS),
    }
}

/// The CSV header for `command`. Changing it requires bumping
/// [`SCHEMA_VERSION`].
pub fn csv_header(command: Command) -> Vec<String> {
    let (metrics, flags) = columns(command);
    let mut h: Vec<String> =
        ["schema_version", "command", "fixture", "mode", "seed", "trials", "point", "n", "alpha", "wall_clock_ms"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    for m in metrics {
        h.push(m.to_string());
        h.push(format!("{m}_se"));
        h.push(format!("{m}_oracle"));
    }
    h.extend(flags.iter().map(|f| f.to_string()));
    h.push("passes".into());
    h
}

/// Shortest round-trip form of the rounded value, in exponent notation
/// outside `[1e-4, 1e12)`.
pub(crate) fn num(x: f64) -> String {
    let r = round_sig(x);
    let a = r.abs();
    if a == 0.0 || (1e-4..1e12).contains(&a) || !a.is_finite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn row(report: &Report, rec: &PointRecord) -> Vec<String> {
    let cfg = &report.config;
    let (metrics, flags) = columns(cfg.command);
    let mut r = vec![
        report.schema_version.to_string(),
        cfg.command.name().to_string(),
        cfg.fixture.name().to_string(),
        cfg.mode.name().to_string(),
        cfg.seed.to_string(),
        cfg.trials.to_string(),
        rec.index.to_string(),
        rec.n.to_string(),
        opt(rec.alpha),
        opt(rec.wall_clock_ms),
    ];
    for m in metrics {
        match rec.metrics.get(*m) {
            Some(e) => {
                r.push(num(e.value));
                r.push(opt(e.std_error));
                r.push(opt(e.oracle));
            }
            None => r.extend([String::new(), String::new(), String::new()]),
        }
    }
    for f in flags {
        r.push(rec.flags.get(*f).map(|b| b.to_string()).unwrap_or_default());
    }
    r.push(rec.passes().to_string());
    r
}

/// One header line and one row per sweep point. No field needs quoting.
pub fn render_csv(report: &Report) -> String {
    let header = csv_header(report.config.command);
    let mut out = header.join(",");
    out.push('\n');
    for rec in &report.records {
        out.push_str(&row(report, rec).join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Serialization(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|source| Error::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Write `report.json` and/or `report.csv` into `dir`, creating it if
/// needed. Returns the written paths.
pub fn emit_report(report: &Report, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    debug_assert_eq!(report.schema_version, SCHEMA_VERSION);
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    if format.json() {
        written.push(write(dir.join("report.json"), &render_json(report)?)?);
    }
    if format.csv() {
        written.push(write(dir.join("report.csv"), &render_csv(report))?);
    }
    Ok(written)
}
