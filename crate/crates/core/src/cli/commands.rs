use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::Error;
use crate::fading::LinkStats;
use crate::mcsim::{simulate_outage, SimConfig};
use crate::outage::{asymptotic_outage, per_block_outage, AsymptoticMode, NetworkConfig, OutageMode};
use crate::power::{constants_for, grid_minimum, optimize_power, ObjectiveVariant, PowerSplit};
use crate::specfun::{bessel_j0, kummer_1f1, ln_gamma, regularized_gamma_pq, Accuracy};

use super::config::{ConfigError, Scenario, SweepSpec};

pub const ANALYTIC_HEADER: &str = "snr_db,op_total_probability,op_paper_literal,op_asymptotic";
pub const VALIDATE_HEADER: &str = "snr_db,op_analytic,op_mc,mc_stderr,z_score";
pub const OPTIMIZE_HEADER: &str = "variant,beta0,beta1,beta2,objective,grid_objective";

/// Outage events a point needs before it is checked against the analytic value.
pub const MIN_EVENTS: u64 = 100;
pub const Z_LIMIT: f64 = 3.0;
pub const GRID_STEPS: usize = 200;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(#[from] Error),
    #[error("validation failed at {} point(s): {}", .0.len(), .0.join("; "))]
    Validation(Vec<String>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn sweep_of(scenario: &Scenario, sweep: Option<SweepSpec>) -> Result<SweepSpec, CliError> {
    let s = sweep
        .or(scenario.sweep)
        .ok_or_else(|| CliError::Usage("no sweep given; add a sweep section or --snr-db".into()))?;
    s.validate().map_err(CliError::Usage)?;
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticRow {
    pub snr_db: f64,
    pub total_probability: f64,
    pub paper_literal: f64,
    pub asymptotic: Option<f64>,
}

fn asymptotic_applies(cfg: &NetworkConfig) -> bool {
    cfg.relays == 2 && cfg.is_ideal()
}

pub fn run_analytic_sweep(scenario: &Scenario, sweep: Option<SweepSpec>) -> Result<Vec<AnalyticRow>, CliError> {
    let sweep = sweep_of(scenario, sweep)?;
    let mut rows = sweep
        .points()
        .into_par_iter()
        .map(|snr_db| -> Result<AnalyticRow, Error> {
            let cfg = scenario.network.with_snr_db(snr_db);
            let asymptotic = if asymptotic_applies(&cfg) {
                Some(asymptotic_outage(&cfg, AsymptoticMode::LeadingTerm)?)
            } else {
                None
            };
            Ok(AnalyticRow {
                snr_db,
                total_probability: per_block_outage(&cfg, OutageMode::TotalProbability)?,
                paper_literal: per_block_outage(&cfg, OutageMode::PaperLiteral)?,
                asymptotic,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    rows.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    Ok(rows)
}

pub fn analytic_csv(rows: &[AnalyticRow]) -> String {
    let mut out = String::from(ANALYTIC_HEADER);
    out.push('\n');
    for r in rows {
        let asym = r.asymptotic.map(format_number).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_number(r.snr_db),
            format_number(r.total_probability),
            format_number(r.paper_literal),
            asym
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Pass,
    Fail,
    Insufficient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateRow {
    pub snr_db: f64,
    pub analytic: f64,
    pub mc: f64,
    pub stderr: f64,
    pub z_score: f64,
    pub events: u64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateReport {
    pub rows: Vec<ValidateRow>,
}

impl ValidateReport {
    pub fn failures(&self) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| r.status == PointStatus::Fail)
            .map(|r| {
                format!(
                    "snr_db={} analytic={} mc={} z={}",
                    format_number(r.snr_db),
                    format_number(r.analytic),
                    format_number(r.mc),
                    format_number(r.z_score)
                )
            })
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != PointStatus::Fail)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(VALIDATE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_number(r.snr_db),
                format_number(r.analytic),
                format_number(r.mc),
                format_number(r.stderr),
                format_number(r.z_score)
            );
        }
        out
    }

    /// One human-readable line per point.
    pub fn annotations(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                let tag = match r.status {
                    PointStatus::Pass => "ok".to_string(),
                    PointStatus::Fail => format!("FAIL |z| > {Z_LIMIT}"),
                    PointStatus::Insufficient => {
                        format!("insufficient events ({} < {MIN_EVENTS}), not checked", r.events)
                    }
                };
                format!("snr_db={}: {tag}", format_number(r.snr_db))
            })
            .collect()
    }
}

fn z_score(analytic: f64, mc: f64, stderr: f64, samples: u64) -> f64 {
    let diff = mc - analytic;
    // A sample proportion of 0 or 1 has zero plug-in stderr; fall back to the
    // binomial stderr under the analytic value.
    let se = if stderr > 0.0 {
        stderr
    } else {
        (analytic.clamp(0.0, 1.0) * (1.0 - analytic.clamp(0.0, 1.0)) / samples as f64).sqrt()
    };
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Compares the analytic outage of `analytic` with Monte Carlo estimates from
/// `simulated` over the same sweep. The two scenarios normally coincide.
pub fn run_validate(
    analytic: &Scenario,
    simulated: &Scenario,
    sweep: Option<SweepSpec>,
    sim: &SimConfig,
    mode: OutageMode,
) -> Result<ValidateReport, CliError> {
    let sweep = sweep_of(analytic, sweep)?;
    let points = sweep.points();
    let analytic_values = points
        .par_iter()
        .map(|&snr| per_block_outage(&analytic.network.with_snr_db(snr), mode))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rows = Vec::with_capacity(points.len());
    for (i, (&snr_db, &a)) in points.iter().zip(&analytic_values).enumerate() {
        // Distinct but reproducible seeds per point.
        let point_sim = SimConfig {
            seed: sim.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..*sim
        };
        let est = simulate_outage(&simulated.network.with_snr_db(snr_db), &point_sim)?;
        let z = z_score(a, est.p_hat, est.stderr, est.trials);
        let status = if est.events < MIN_EVENTS {
            PointStatus::Insufficient
        } else if z.abs() <= Z_LIMIT {
            PointStatus::Pass
        } else {
            PointStatus::Fail
        };
        rows.push(ValidateRow {
            snr_db,
            analytic: a,
            mc: est.p_hat,
            stderr: est.stderr,
            z_score: z,
            events: est.events,
            status,
        });
    }
    Ok(ValidateReport { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeRow {
    pub variant: ObjectiveVariant,
    pub split: PowerSplit,
    pub objective: f64,
    pub grid_objective: f64,
    pub grid_split: PowerSplit,
}

/// Static, perfectly estimated copy of a configuration.
pub fn perfect_csi(cfg: &NetworkConfig) -> NetworkConfig {
    let ideal = |l: &LinkStats| LinkStats::ideal(l.avg_gain);
    NetworkConfig {
        sd: ideal(&cfg.sd),
        sr: cfg.sr.iter().map(ideal).collect(),
        rd: cfg.rd.iter().map(ideal).collect(),
        ..cfg.clone()
    }
}

pub fn run_optimize(scenario: &Scenario, snr_db: Option<f64>) -> Result<Vec<OptimizeRow>, CliError> {
    let mut cfg = perfect_csi(&scenario.network);
    if cfg.relays != 2 {
        return Err(CliError::Usage(format!(
            "power allocation needs exactly two relays, the configuration has {}",
            cfg.relays
        )));
    }
    match snr_db {
        Some(db) => cfg = cfg.with_snr_db(db),
        None if !scenario.power_specified => {
            return Err(CliError::Usage(
                "optimize needs an operating point; set network.total_power or pass --snr-db".into(),
            ))
        }
        None => {}
    }
    let variants = [ObjectiveVariant::Literal, ObjectiveVariant::Symmetrized];
    variants
        .iter()
        .map(|&variant| {
            let consts = constants_for(&cfg, variant).map_err(config_or_numeric)?;
            let split = match optimize_power(&consts, 1e-10) {
                Ok(s) => s,
                Err(Error::Optimization { best, .. }) => best,
                Err(e) => return Err(e.into()),
            };
            let objective = consts.evaluate(&split)?;
            let (grid_objective, grid_split) = grid_minimum(&consts, GRID_STEPS)?;
            Ok(OptimizeRow {
                variant,
                split,
                objective,
                grid_objective,
                grid_split,
            })
        })
        .collect()
}

// Precondition failures on the configuration surface as config errors.
fn config_or_numeric(e: Error) -> CliError {
    match e {
        Error::Domain(m) => CliError::Usage(m),
        other => other.into(),
    }
}

fn variant_name(v: ObjectiveVariant) -> &'static str {
    match v {
        ObjectiveVariant::Literal => "literal",
        ObjectiveVariant::Symmetrized => "symmetrized",
    }
}

pub fn optimize_csv(rows: &[OptimizeRow]) -> String {
    let mut out = String::from(OPTIMIZE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            variant_name(r.variant),
            format_number(r.split.beta0),
            format_number(r.split.beta_r[0]),
            format_number(r.split.beta_r[1]),
            format_number(r.objective),
            format_number(r.grid_objective)
        );
    }
    out
}

pub fn optimize_text(rows: &[OptimizeRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "{:<12} beta0={:.6} beta1={:.6} beta2={:.6} objective={:e} grid_objective={:e}",
            variant_name(r.variant),
            r.split.beta0,
            r.split.beta_r[0],
            r.split.beta_r[1],
            r.objective,
            r.grid_objective
        );
    }
    out
}

/// Debug evaluation of the special functions: `j0 x`, `lngamma x`,
/// `gammainc s x` (prints P and Q) and `hyp1f1 a b z`.
pub fn specfun_eval(function: &str, args: &[f64]) -> Result<String, CliError> {
    let need = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(CliError::Usage(format!("{function} takes {n} argument(s), got {}", args.len())))
        }
    };
    let text = match function {
        "j0" => {
            need(1)?;
            format_number(bessel_j0(args[0])?)
        }
        "lngamma" => {
            need(1)?;
            format_number(ln_gamma(args[0])?)
        }
        "gammainc" => {
            need(2)?;
            let (p, q) = regularized_gamma_pq(args[0], args[1])?;
            format!("{},{}", format_number(p), format_number(q))
        }
        "hyp1f1" => {
            need(3)?;
            format_number(kummer_1f1(args[0], args[1], args[2], &Accuracy::default())?)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown function \"{other}\"; use j0, lngamma, gammainc or hyp1f1"
            )))
        }
    };
    Ok(text + "\n")
}

/// Path of `target` as seen from the directory holding `script`.
fn relative_to_script(script: &Path, target: &Path) -> String {
    let script_dir = script.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let (dir, tgt) = (abs(script_dir), abs(target));
    let dir_parts: Vec<_> = dir.components().collect();
    let tgt_parts: Vec<_> = tgt.components().collect();
    let common = dir_parts.iter().zip(&tgt_parts).take_while(|(a, b)| a == b).count();
    let mut rel = std::path::PathBuf::new();
    for _ in common..dir_parts.len() {
        rel.push("..");
    }
    for c in &tgt_parts[common..] {
        rel.push(c);
    }
    rel.to_string_lossy().replace('\\', "/")
}

/// Matplotlib script that draws the CSV at `csv` on a log-scale outage axis.
pub fn plot_script(script: &Path, csv: &Path, columns: &[&str]) -> String {
    let rel = relative_to_script(script, csv);
    let cols = columns
        .iter()
        .map(|c| format!("\"{c}\""))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        r#"import csv
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "{rel}")

with open(DATA, newline="") as f:
    rows = list(csv.DictReader(f))

snr = [float(r["snr_db"]) for r in rows]
fig, ax = plt.subplots()
for col in [{cols}]:
    pts = [(s, float(r[col])) for s, r in zip(snr, rows) if r[col] and float(r[col]) > 0]
    if pts:
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=col)
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("outage probability")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.savefig(os.path.splitext(DATA)[0] + ".png", dpi=150)
"#
    )
}
