//! Configuration files, sweeps, CSV output and plot scripts behind the
//! `relay-outage` binary.

pub mod commands;
pub mod config;

pub use commands::{
    analytic_csv, format_number, optimize_csv, optimize_text, perfect_csi, plot_script, run_analytic_sweep,
    run_optimize, run_validate, specfun_eval, AnalyticRow, CliError, OptimizeRow, PointStatus, ValidateReport,
    ValidateRow, ANALYTIC_HEADER, MIN_EVENTS, OPTIMIZE_HEADER, VALIDATE_HEADER,
};
pub use config::{parse_config, parse_speed, ConfigError, Scenario, SweepSpec};

/// Reads and validates a configuration file.
pub fn load_config(path: &std::path::Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(ConfigError {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })
    })?;
    Ok(parse_config(&text)?)
}
