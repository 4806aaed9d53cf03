//! Accuracy-sweep suites over the singular-integral transforms, with CSV
//! and JSON reports.
//!
//! Each suite evaluates one integrand class over a parameter grid, compares
//! the transform value against a reference (closed form where available,
//! brute-force sampling otherwise) and records the relative deviation
//! `ε = |I - I0| / |I0|` per cell. Sweeps always run to completion: a cell
//! that raises an engine error is recorded with an error marker.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use nsi_ibp::em::{
    electrostatic_integral_with_offset, rwg_convolution, Component, CurrentKind, InnerEval,
    ObservationPoint, OuterLayout, RwgPair, Triangle,
};
use nsi_ibp::families::{
    analytic_reference, eval_hybrid, eval_power_law, Family, FamilyCase, Method, SmoothFn,
};
use nsi_ibp::quadrature::{gauss_legendre_rule, Interval, QuadratureRule};

#[derive(Error, Debug)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("engine error: {0}")]
    Engine(#[from] nsi_ibp::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// The available sweep suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    PowerLaw,
    Hybrid,
    Electrostatic,
    Electromagnetic,
    Custom,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::PowerLaw => "power_law",
            Suite::Hybrid => "hybrid",
            Suite::Electrostatic => "electrostatic",
            Suite::Electromagnetic => "electromagnetic",
            Suite::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "power_law" => Ok(Suite::PowerLaw),
            "hybrid" => Ok(Suite::Hybrid),
            "electrostatic" => Ok(Suite::Electrostatic),
            "electromagnetic" => Ok(Suite::Electromagnetic),
            "custom" => Ok(Suite::Custom),
            other => Err(BenchError::Config(format!("unknown suite '{other}'"))),
        }
    }
}

/// One parameter axis: an explicit list, a linear range or a log-spaced
/// range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Lin { lin: LinRange },
    Log { log: LogRange },
}

#[derive(Debug, Clone, Deserialize)]
pub struct LinRange {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LogRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let out = match self {
            GridSpec::List(v) => v.clone(),
            GridSpec::Lin { lin } => {
                if lin.step <= 0.0 || lin.step.is_nan() || lin.stop < lin.start {
                    return Err(BenchError::Config(format!(
                        "bad linear range {}:{}:{}",
                        lin.start, lin.step, lin.stop
                    )));
                }
                let n = ((lin.stop - lin.start) / lin.step + 0.5).floor() as usize;
                (0..=n).map(|k| lin.start + k as f64 * lin.step).collect()
            }
            GridSpec::Log { log } => {
                if log.count == 0 || log.start <= 0.0 || log.stop <= log.start {
                    return Err(BenchError::Config(format!(
                        "log range needs 0 < start < stop and count > 0, got {log:?}"
                    )));
                }
                let lo = log.start.log10();
                let hi = log.stop.log10();
                (0..log.count)
                    .map(|k| {
                        let t = if log.count == 1 {
                            0.0
                        } else {
                            k as f64 / (log.count - 1) as f64
                        };
                        10f64.powf(lo + t * (hi - lo))
                    })
                    .collect()
            }
        };
        if out.is_empty() {
            return Err(BenchError::Config("empty parameter grid".into()));
        }
        Ok(out)
    }

    /// Parses the CLI forms `start:step:stop` and `v1,v2,...`.
    pub fn parse_cli(s: &str) -> Result<Self> {
        if s.contains(',') {
            let vals: std::result::Result<Vec<f64>, _> =
                s.split(',').map(|t| t.trim().parse::<f64>()).collect();
            return Ok(GridSpec::List(vals.map_err(|e| {
                BenchError::Config(format!("bad grid list '{s}': {e}"))
            })?));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [one] => Ok(GridSpec::List(vec![one.trim().parse::<f64>().map_err(
                |e| BenchError::Config(format!("bad grid value '{s}': {e}")),
            )?])),
            [start, step, stop] => {
                let p = |t: &str| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| BenchError::Config(format!("bad grid range '{s}': {e}")))
                };
                Ok(GridSpec::Lin {
                    lin: LinRange {
                        start: p(start)?,
                        step: p(step)?,
                        stop: p(stop)?,
                    },
                })
            }
            _ => Err(BenchError::Config(format!(
                "grid must be 'start:step:stop' or a comma list, got '{s}'"
            ))),
        }
    }
}

/// Report format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(BenchError::Config(format!("unknown format '{other}'"))),
        }
    }
}

fn default_points_per_panel() -> usize {
    11
}
fn default_panels() -> usize {
    91
}

/// Full sweep configuration. Every field has a suite-appropriate default;
/// a JSON config file and CLI flags override them.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub suite: Suite,
    #[serde(default = "default_points_per_panel")]
    pub points_per_panel: usize,
    #[serde(default = "default_panels")]
    pub panels: usize,
    #[serde(default)]
    pub gamma: Option<GridSpec>,
    /// Surrogate exponent mismatch values (γ̃ = γ + Δγ).
    #[serde(default)]
    pub dgamma: Option<GridSpec>,
    #[serde(default)]
    pub offset: Option<GridSpec>,
    /// Separations for the electrostatic suite.
    #[serde(default)]
    pub d: Option<GridSpec>,
    /// Offset factors (o = factor·d) for the electrostatic suite.
    #[serde(default)]
    pub offset_factor: Option<GridSpec>,
    /// Fixed surrogate exponent for the hybrid/electrostatic/custom suites.
    #[serde(default)]
    pub gamma_tilde: Option<f64>,
    /// Log power for the hybrid suite.
    #[serde(default)]
    pub beta: Option<i64>,
    /// Integration interval for family suites.
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
    /// Wavenumber for the electromagnetic suite.
    #[serde(default)]
    pub wavenumber: Option<f64>,
    /// Observation grid for the electromagnetic suite.
    #[serde(default)]
    pub obs_grid: Option<LinRange>,
    /// Outer panel count for the electromagnetic suite.
    #[serde(default)]
    pub outer_panels: Option<usize>,
    /// Sample count of the brute-force reference for the electromagnetic
    /// suite.
    #[serde(default)]
    pub oracle_points: Option<usize>,
}

impl SweepConfig {
    /// The built-in configuration of a suite (the grids behind the shipped
    /// accuracy reports).
    pub fn default_for(suite: Suite) -> Self {
        let base = SweepConfig {
            suite,
            points_per_panel: 11,
            panels: 91,
            gamma: None,
            dgamma: None,
            offset: None,
            d: None,
            offset_factor: None,
            gamma_tilde: None,
            beta: None,
            interval: None,
            wavenumber: None,
            obs_grid: None,
            outer_panels: None,
            oracle_points: None,
        };
        match suite {
            Suite::PowerLaw => SweepConfig {
                gamma: Some(GridSpec::List(vec![0.5])),
                // mismatch up to the exponent itself: γ̃ reaches the log
                // branch at the top of the sweep
                dgamma: Some(GridSpec::Log {
                    log: LogRange {
                        start: 1e-12,
                        stop: 0.5,
                        count: 13,
                    },
                }),
                offset: Some(GridSpec::Log {
                    log: LogRange {
                        start: 1e-25,
                        stop: 1e4,
                        count: 30,
                    },
                }),
                interval: Some((0.0, 1.0)),
                ..base
            },
            Suite::Hybrid => SweepConfig {
                gamma: Some(GridSpec::Lin {
                    lin: LinRange {
                        start: 0.0,
                        step: 1.0,
                        stop: 9.0,
                    },
                }),
                offset: Some(GridSpec::Log {
                    log: LogRange {
                        start: 1e-2,
                        stop: 1e2,
                        count: 9,
                    },
                }),
                gamma_tilde: Some(0.0),
                beta: Some(1),
                interval: Some((0.0, 0.01)),
                ..base
            },
            Suite::Electrostatic => SweepConfig {
                d: Some(GridSpec::Lin {
                    lin: LinRange {
                        start: 0.1,
                        step: 0.025,
                        stop: 0.2,
                    },
                }),
                offset_factor: Some(GridSpec::Lin {
                    lin: LinRange {
                        start: 0.0,
                        step: 5.0,
                        stop: 50.0,
                    },
                }),
                gamma_tilde: Some(1.0),
                ..base
            },
            Suite::Electromagnetic => SweepConfig {
                wavenumber: Some(1.0),
                obs_grid: Some(LinRange {
                    start: 0.05,
                    step: 0.1,
                    stop: 0.95,
                }),
                outer_panels: Some(16),
                oracle_points: Some(100_000),
                ..base
            },
            Suite::Custom => SweepConfig {
                gamma: Some(GridSpec::List(vec![0.5])),
                dgamma: Some(GridSpec::List(vec![0.0])),
                offset: Some(GridSpec::List(vec![0.0])),
                interval: Some((0.0, 1.0)),
                ..base
            },
        }
    }

    /// Loads a JSON config, filling unset fields from the suite defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: SweepConfig = serde_json::from_str(text)
            .map_err(|e| BenchError::Config(format!("bad config JSON: {e}")))?;
        let mut cfg = SweepConfig::default_for(parsed.suite);
        macro_rules! take {
            ($($field:ident),*) => {
                $(if parsed.$field.is_some() { cfg.$field = parsed.$field.clone(); })*
            };
        }
        take!(
            gamma,
            dgamma,
            offset,
            d,
            offset_factor,
            gamma_tilde,
            beta,
            interval,
            wavenumber,
            obs_grid,
            outer_panels,
            oracle_points
        );
        cfg.points_per_panel = parsed.points_per_panel;
        cfg.panels = parsed.panels;
        Ok(cfg)
    }

    pub fn rule(&self) -> Result<QuadratureRule> {
        gauss_legendre_rule(self.points_per_panel)
            .map_err(BenchError::Engine)?
            .with_panels(self.panels)
            .map_err(BenchError::Engine)
    }

    fn grid(&self, name: &str) -> Result<Vec<f64>> {
        let spec = match name {
            "gamma" => &self.gamma,
            "dgamma" => &self.dgamma,
            "offset" => &self.offset,
            "d" => &self.d,
            "offset_factor" => &self.offset_factor,
            _ => &None,
        };
        spec.as_ref()
            .ok_or_else(|| BenchError::Config(format!("suite needs a '{name}' grid")))?
            .values()
    }
}

/// One sweep cell: parameters, computed value, reference and relative
/// deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRecord {
    pub suite: String,
    pub params: Vec<(String, f64)>,
    pub i_real: f64,
    pub i_imag: f64,
    pub i0_real: f64,
    pub i0_imag: f64,
    pub epsilon: f64,
    pub status: String,
}

impl AccuracyRecord {
    fn ok(suite: Suite, params: Vec<(String, f64)>, i: (f64, f64), i0: (f64, f64)) -> Self {
        let diff = ((i.0 - i0.0).powi(2) + (i.1 - i0.1).powi(2)).sqrt();
        let norm = (i0.0 * i0.0 + i0.1 * i0.1).sqrt();
        AccuracyRecord {
            suite: suite.name().to_string(),
            params,
            i_real: i.0,
            i_imag: i.1,
            i0_real: i0.0,
            i0_imag: i0.1,
            epsilon: diff / norm,
            status: "ok".into(),
        }
    }

    fn error(suite: Suite, params: Vec<(String, f64)>, err: &nsi_ibp::Error) -> Self {
        AccuracyRecord {
            suite: suite.name().to_string(),
            params,
            i_real: f64::NAN,
            i_imag: f64::NAN,
            i0_real: f64::NAN,
            i0_imag: f64::NAN,
            epsilon: f64::NAN,
            status: format!("error: {err}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Runs a full sweep; one record per grid cell, row-major over the declared
/// grids, errors recorded in place.
pub fn run_suite(cfg: &SweepConfig) -> Result<Vec<AccuracyRecord>> {
    match cfg.suite {
        Suite::PowerLaw | Suite::Custom => run_power_law(cfg),
        Suite::Hybrid => run_hybrid(cfg),
        Suite::Electrostatic => run_electrostatic(cfg),
        Suite::Electromagnetic => run_electromagnetic(cfg),
    }
}

fn family_cell(
    suite: Suite,
    family: Family,
    interval: (f64, f64),
    method: Method,
    params: Vec<(String, f64)>,
    rule: &QuadratureRule,
) -> AccuracyRecord {
    let build = || -> nsi_ibp::Result<(f64, f64)> {
        let case = FamilyCase::new(
            family,
            Interval::new(interval.0, interval.1)?,
            SmoothFn::one(),
        )?;
        let value = match family {
            Family::PowerLaw { .. } => eval_power_law(&case, method, rule)?,
            Family::Hybrid { .. } => eval_hybrid(&case, method, rule)?,
            _ => unreachable!("family suites cover power-law and hybrid classes"),
        };
        let reference = analytic_reference(&case).ok_or(nsi_ibp::Error::UnsupportedWeight)?;
        Ok((value, reference))
    };
    match build() {
        Ok((value, reference)) => AccuracyRecord::ok(suite, params, (value, 0.0), (reference, 0.0)),
        Err(e) => AccuracyRecord::error(suite, params, &e),
    }
}

fn run_power_law(cfg: &SweepConfig) -> Result<Vec<AccuracyRecord>> {
    let gammas = cfg.grid("gamma")?;
    let dgammas = cfg.grid("dgamma")?;
    let offsets = cfg.grid("offset")?;
    let interval = cfg.interval.unwrap_or((0.0, 1.0));
    let rule = cfg.rule()?;
    let mut out = Vec::with_capacity(gammas.len() * dgammas.len() * offsets.len());
    for &gamma in &gammas {
        for &dgamma in &dgammas {
            for &offset in &offsets {
                let params = vec![
                    ("gamma".to_string(), gamma),
                    ("dgamma".to_string(), dgamma),
                    ("offset".to_string(), offset),
                ];
                out.push(family_cell(
                    cfg.suite,
                    Family::PowerLaw { gamma, offset },
                    interval,
                    Method::approximate(gamma + dgamma),
                    params,
                    &rule,
                ));
            }
        }
    }
    Ok(out)
}

fn run_hybrid(cfg: &SweepConfig) -> Result<Vec<AccuracyRecord>> {
    let gammas = cfg.grid("gamma")?;
    let offsets = cfg.grid("offset")?;
    let gamma_tilde = cfg.gamma_tilde.unwrap_or(0.0);
    let beta = cfg.beta.unwrap_or(1);
    let interval = cfg.interval.unwrap_or((0.0, 0.01));
    let rule = cfg.rule()?;
    let mut out = Vec::with_capacity(gammas.len() * offsets.len());
    for &gamma in &gammas {
        for &offset in &offsets {
            let params = vec![("gamma".to_string(), gamma), ("offset".to_string(), offset)];
            out.push(family_cell(
                cfg.suite,
                Family::Hybrid {
                    gamma,
                    beta,
                    offset,
                },
                interval,
                Method::Approximate {
                    gamma_tilde,
                    weight_center: 0.0,
                },
                params,
                &rule,
            ));
        }
    }
    Ok(out)
}

fn run_electrostatic(cfg: &SweepConfig) -> Result<Vec<AccuracyRecord>> {
    let ds = cfg.grid("d")?;
    let factors = cfg.grid("offset_factor")?;
    let gamma_tilde = cfg.gamma_tilde.unwrap_or(1.0);
    let mut out = Vec::with_capacity(ds.len() * factors.len());
    for &d in &ds {
        for &factor in &factors {
            let offset = factor * d;
            let params = vec![("d".to_string(), d), ("offset".to_string(), offset)];
            let result = electrostatic_integral_with_offset(d, 0.0, d, gamma_tilde, offset);
            // closed form: ln(sqrt(x²+d²)+x) |_0^d
            let reference = (((d * d + d * d).sqrt() + d) / d).ln();
            out.push(match result {
                Ok(v) => AccuracyRecord::ok(cfg.suite, params, (v, 0.0), (reference, 0.0)),
                Err(e) => AccuracyRecord::error(cfg.suite, params, &e),
            });
        }
    }
    Ok(out)
}

fn run_electromagnetic(cfg: &SweepConfig) -> Result<Vec<AccuracyRecord>> {
    let k = cfg.wavenumber.unwrap_or(1.0);
    let grid = cfg.obs_grid.clone().unwrap_or(LinRange {
        start: 0.05,
        step: 0.1,
        stop: 0.95,
    });
    let pts = GridSpec::Lin { lin: grid }.values()?;
    let outer = gauss_legendre_rule(cfg.points_per_panel)
        .map_err(BenchError::Engine)?
        .with_panels(cfg.outer_panels.unwrap_or(8))
        .map_err(BenchError::Engine)?;
    let n_oracle = cfg.oracle_points.unwrap_or(100_000);
    let pair = RwgPair::unit_square(k).map_err(BenchError::Engine)?;
    let kind = CurrentKind::Rwg {
        triangle: Triangle::Plus,
        component: Component::X,
    };

    let cells: Vec<(f64, f64)> = pts
        .iter()
        .flat_map(|&y| pts.iter().map(move |&x| (x, y)))
        .collect();
    // independent cells; the collected order is the declared grid order
    let records: Vec<AccuracyRecord> = cells
        .par_iter()
        .map(|&(x, y)| {
            let params = vec![("x_obs".to_string(), x), ("y_obs".to_string(), y)];
            let cell = || -> nsi_ibp::Result<((f64, f64), (f64, f64))> {
                let obs = ObservationPoint::new(x, y, 0.0)?;
                // both paths share the uniform outer stack, so the recorded
                // deviation isolates the inner (singular) integration
                let i = rwg_convolution(
                    &obs,
                    &pair,
                    kind,
                    &outer,
                    OuterLayout::Uniform,
                    InnerEval::Transform,
                )?;
                let i0 = rwg_convolution(
                    &obs,
                    &pair,
                    kind,
                    &outer,
                    OuterLayout::Uniform,
                    InnerEval::DirectOracle { n_points: n_oracle },
                )?;
                Ok(((i.re, i.im), (i0.re, i0.im)))
            };
            match cell() {
                Ok((i, i0)) => AccuracyRecord::ok(cfg.suite, params, i, i0),
                Err(e) => AccuracyRecord::error(cfg.suite, params, &e),
            }
        })
        .collect();
    Ok(records)
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Serializes records as CSV: header then one row per cell, numbers with 17
/// significant digits, LF line endings.
pub fn to_csv(records: &[AccuracyRecord]) -> Result<String> {
    let first = records
        .first()
        .ok_or_else(|| BenchError::Config("no records to report".into()))?;
    let mut out = String::new();
    out.push_str("suite");
    for (name, _) in &first.params {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",I_real,I_imag,I0_real,I0_imag,epsilon,status\n");
    for r in records {
        out.push_str(&r.suite);
        for (_, v) in &r.params {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{}",
            fmt_f64(r.i_real),
            fmt_f64(r.i_imag),
            fmt_f64(r.i0_real),
            fmt_f64(r.i0_imag),
            fmt_f64(r.epsilon),
            r.status
        );
    }
    Ok(out)
}

fn json_num(v: f64) -> String {
    if v.is_nan() {
        "null".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Serializes records as a JSON array mirroring the CSV schema.
pub fn to_json(records: &[AccuracyRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(BenchError::Config("no records to report".into()));
    }
    let mut out = String::from("[\n");
    for (i, r) in records.iter().enumerate() {
        out.push_str("  {");
        let _ = write!(out, "{:?}:{:?},\"params\":{{", "suite", r.suite);
        for (j, (name, v)) in r.params.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{name:?}:{}", json_num(*v));
        }
        let _ = write!(
            out,
            "}},\"I_real\":{},\"I_imag\":{},\"I0_real\":{},\"I0_imag\":{},\"epsilon\":{},\"status\":{:?}}}",
            json_num(r.i_real),
            json_num(r.i_imag),
            json_num(r.i0_real),
            json_num(r.i0_imag),
            json_num(r.epsilon),
            r.status
        );
        out.push_str(if i + 1 < records.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    Ok(out)
}

/// Parses a JSON report back into records (round-trip support).
pub fn from_json(text: &str) -> Result<Vec<AccuracyRecord>> {
    #[derive(Deserialize)]
    struct Row {
        suite: String,
        params: serde_json::Map<String, serde_json::Value>,
        #[serde(rename = "I_real")]
        i_real: Option<f64>,
        #[serde(rename = "I_imag")]
        i_imag: Option<f64>,
        #[serde(rename = "I0_real")]
        i0_real: Option<f64>,
        #[serde(rename = "I0_imag")]
        i0_imag: Option<f64>,
        epsilon: Option<f64>,
        status: String,
    }
    let rows: Vec<Row> = serde_json::from_str(text)
        .map_err(|e| BenchError::Config(format!("bad report JSON: {e}")))?;
    Ok(rows
        .into_iter()
        .map(|r| AccuracyRecord {
            suite: r.suite,
            params: r
                .params
                .into_iter()
                .map(|(k, v)| (k, v.as_f64().unwrap_or(f64::NAN)))
                .collect(),
            i_real: r.i_real.unwrap_or(f64::NAN),
            i_imag: r.i_imag.unwrap_or(f64::NAN),
            i0_real: r.i0_real.unwrap_or(f64::NAN),
            i0_imag: r.i0_imag.unwrap_or(f64::NAN),
            epsilon: r.epsilon.unwrap_or(f64::NAN),
            status: r.status,
        })
        .collect())
}

/// Writes the report to a file in the requested format.
pub fn emit_report(records: &[AccuracyRecord], format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => to_csv(records)?,
        ReportFormat::Json => to_json(records)?,
    };
    fs::write(path, text)?;
    Ok(())
}

/// Pass/fail outcome of one suite comparison.
#[derive(Debug, Clone)]
pub struct SuiteSummary {
    pub suite: String,
    pub cells: usize,
    pub errored: usize,
    pub max_epsilon: f64,
    pub fraction_under: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares a record set against per-suite tolerances: a suite passes when
/// every cell is ok and its worst ε stays under the tolerance.
pub fn compare_against_reference(
    records: &[AccuracyRecord],
    tolerances: &[(String, f64)],
) -> Result<Vec<SuiteSummary>> {
    let mut out = Vec::new();
    for (suite, tol) in tolerances {
        let rows: Vec<&AccuracyRecord> = records.iter().filter(|r| &r.suite == suite).collect();
        if rows.is_empty() {
            return Err(BenchError::Config(format!(
                "no records for suite '{suite}' (reference missing)"
            )));
        }
        let errored = rows.iter().filter(|r| !r.is_ok()).count();
        let max_epsilon = rows
            .iter()
            .map(|r| if r.is_ok() { r.epsilon } else { f64::INFINITY })
            .fold(0.0f64, f64::max);
        let under = rows
            .iter()
            .filter(|r| r.is_ok() && r.epsilon < *tol)
            .count();
        out.push(SuiteSummary {
            suite: suite.clone(),
            cells: rows.len(),
            errored,
            max_epsilon,
            fraction_under: under as f64 / rows.len() as f64,
            tolerance: *tol,
            pass: errored == 0 && max_epsilon < *tol,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_values() {
        let g = GridSpec::Lin {
            lin: LinRange {
                start: 0.0,
                step: 0.25,
                stop: 1.0,
            },
        };
        assert_eq!(g.values().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);

        let g = GridSpec::Log {
            log: LogRange {
                start: 1e-2,
                stop: 1e2,
                count: 5,
            },
        };
        let v = g.values().unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[0] - 1e-2).abs() < 1e-15);
        assert!((v[2] - 1.0).abs() < 1e-12);
        assert!((v[4] - 1e2).abs() < 1e-10);

        assert!(GridSpec::List(vec![]).values().is_err());
    }

    #[test]
    fn grid_cli_parsing() {
        match GridSpec::parse_cli("0.1:0.05:0.2").unwrap() {
            GridSpec::Lin { lin } => {
                assert_eq!((lin.start, lin.step, lin.stop), (0.1, 0.05, 0.2));
            }
            other => panic!("unexpected {other:?}"),
        }
        match GridSpec::parse_cli("1,2,3").unwrap() {
            GridSpec::List(v) => assert_eq!(v, vec![1.0, 2.0, 3.0]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(GridSpec::parse_cli("a:b").is_err());
    }

    #[test]
    fn config_json_overrides_defaults() {
        let cfg =
            SweepConfig::from_json(r#"{"suite": "power_law", "gamma": [0.25], "panels": 13}"#)
                .unwrap();
        assert_eq!(cfg.suite, Suite::PowerLaw);
        assert_eq!(cfg.panels, 13);
        assert_eq!(cfg.grid("gamma").unwrap(), vec![0.25]);
        // untouched grids fall back to suite defaults
        assert_eq!(cfg.grid("dgamma").unwrap().len(), 13);
    }

    #[test]
    fn record_count_matches_grid_product() {
        let mut cfg = SweepConfig::default_for(Suite::PowerLaw);
        cfg.gamma = Some(GridSpec::List(vec![0.5]));
        cfg.dgamma = Some(GridSpec::List(vec![1e-6, 1e-3]));
        cfg.offset = Some(GridSpec::List(vec![0.0, 1.0, 2.0]));
        let records = run_suite(&cfg).unwrap();
        assert_eq!(records.len(), 6);
        assert!(records.iter().all(|r| r.is_ok()));
    }

    #[test]
    fn sweep_continues_past_error_cells() {
        // γ = 1.2 is outside the power-law class: that cell errors, the
        // sweep still completes
        let mut cfg = SweepConfig::default_for(Suite::PowerLaw);
        cfg.gamma = Some(GridSpec::List(vec![0.5, 1.2]));
        cfg.dgamma = Some(GridSpec::List(vec![1e-6]));
        cfg.offset = Some(GridSpec::List(vec![0.0]));
        let records = run_suite(&cfg).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records[0].is_ok());
        assert!(!records[1].is_ok());
        assert!(records[1].status.starts_with("error:"));
    }

    #[test]
    fn csv_schema() {
        let mut cfg = SweepConfig::default_for(Suite::PowerLaw);
        cfg.gamma = Some(GridSpec::List(vec![0.5]));
        cfg.dgamma = Some(GridSpec::List(vec![1e-6]));
        cfg.offset = Some(GridSpec::List(vec![0.5]));
        let records = run_suite(&cfg).unwrap();
        let csv = to_csv(&records).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "suite,gamma,dgamma,offset,I_real,I_imag,I0_real,I0_imag,epsilon,status"
        );
        assert_eq!(lines.count(), 1);
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn json_roundtrip_preserves_records() {
        let mut cfg = SweepConfig::default_for(Suite::PowerLaw);
        cfg.gamma = Some(GridSpec::List(vec![0.5]));
        cfg.dgamma = Some(GridSpec::List(vec![1e-8, 1e-4]));
        cfg.offset = Some(GridSpec::List(vec![0.3]));
        let records = run_suite(&cfg).unwrap();
        let parsed = from_json(&to_json(&records).unwrap()).unwrap();
        assert_eq!(parsed, records);
    }

    #[test]
    fn epsilon_recoverable_from_emitted_columns() {
        let mut cfg = SweepConfig::default_for(Suite::PowerLaw);
        cfg.dgamma = Some(GridSpec::List(vec![1e-4]));
        cfg.offset = Some(GridSpec::List(vec![1e-3, 1.0]));
        let records = run_suite(&cfg).unwrap();
        let parsed = from_json(&to_json(&records).unwrap()).unwrap();
        for r in parsed {
            let diff = ((r.i_real - r.i0_real).powi(2) + (r.i_imag - r.i0_imag).powi(2)).sqrt();
            let eps = diff / (r.i0_real * r.i0_real + r.i0_imag * r.i0_imag).sqrt();
            let scale = eps.abs().max(1e-300);
            assert!((eps - r.epsilon).abs() / scale <= 1e-16 || eps == r.epsilon);
        }
    }

    #[test]
    fn determinism_byte_identical_reports() {
        let mut cfg = SweepConfig::default_for(Suite::Electrostatic);
        cfg.d = Some(GridSpec::List(vec![0.1, 0.2]));
        cfg.offset_factor = Some(GridSpec::List(vec![0.0, 5.0]));
        let a = to_csv(&run_suite(&cfg).unwrap()).unwrap();
        let b = to_csv(&run_suite(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compare_pass_and_fail() {
        let mut cfg = SweepConfig::default_for(Suite::Electrostatic);
        cfg.d = Some(GridSpec::List(vec![0.1]));
        cfg.offset_factor = Some(GridSpec::List(vec![0.0, 10.0]));
        let records = run_suite(&cfg).unwrap();
        let pass =
            compare_against_reference(&records, &[("electrostatic".to_string(), 1e-4)]).unwrap();
        assert!(pass[0].pass);
        let fail =
            compare_against_reference(&records, &[("electrostatic".to_string(), 1e-18)]).unwrap();
        assert!(!fail[0].pass);
        assert!(fail[0].max_epsilon > 1e-18);
        // missing suite → configuration error
        assert!(compare_against_reference(&records, &[("hybrid".to_string(), 1.0)]).is_err());
    }
}
