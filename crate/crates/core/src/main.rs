use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use relay_outage::cli::{self, CliError, Scenario, SweepSpec};
use relay_outage::mcsim::SimConfig;
use relay_outage::outage::OutageMode;

#[derive(Parser)]
#[command(name = "relay-outage", version, about = "Outage analysis of decode-and-forward relay networks")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    TotalProbability,
    PaperLiteral,
}

impl From<ModeArg> for OutageMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::TotalProbability => OutageMode::TotalProbability,
            ModeArg::PaperLiteral => OutageMode::PaperLiteral,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate a single SNR point instead of the configured sweep.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic outage sweep.
    Analytic {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plot_script: Option<PathBuf>,
    },
    /// Analytic sweep checked against Monte Carlo.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plot_script: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "total-probability")]
        mode: ModeArg,
    },
    /// Power split minimizing the high-SNR outage objective.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Print the validated configuration in canonical form.
    PrintConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate j0 x | lngamma x | gammainc s x | hyp1f1 a b z.
    SpecfunEval {
        function: String,
        #[arg(allow_hyphen_values = true)]
        args: Vec<f64>,
    },
}

fn single_point(snr_db: Option<f64>) -> Option<SweepSpec> {
    snr_db.map(|x| SweepSpec {
        snr_db_start: x,
        snr_db_stop: x,
        snr_db_step: 1.0,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_plot(script: Option<&PathBuf>, out: Option<&PathBuf>, columns: &[&str]) -> Result<(), CliError> {
    let Some(script) = script else { return Ok(()) };
    let csv = out.ok_or_else(|| CliError::Usage("--plot-script needs --out for the CSV".into()))?;
    std::fs::write(script, cli::plot_script(script, csv, columns))?;
    Ok(())
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn sim_config(scenario: &Scenario, trials: Option<u64>, seed: Option<u64>) -> Result<SimConfig, CliError> {
    let base = scenario.sim.unwrap_or(SimConfig {
        trials: 0,
        seed: 0,
        mode: Default::default(),
    });
    let sim = SimConfig {
        trials: trials.unwrap_or(base.trials),
        seed: seed.unwrap_or(base.seed),
        ..base
    };
    if sim.trials == 0 {
        return Err(CliError::Usage("trial count missing; add a sim section or pass --trials".into()));
    }
    Ok(sim)
}

fn run(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Analytic { common, plot_script } => {
            let scenario = cli::load_config(&common.config)?;
            let rows = with_workers(common.workers, || {
                cli::run_analytic_sweep(&scenario, single_point(common.snr_db))
            })??;
            emit(common.out.as_deref(), &cli::analytic_csv(&rows))?;
            write_plot(
                plot_script.as_ref(),
                common.out.as_ref(),
                &["op_total_probability", "op_paper_literal", "op_asymptotic"],
            )
        }
        Command::Validate {
            common,
            plot_script,
            trials,
            seed,
            mode,
        } => {
            let scenario = cli::load_config(&common.config)?;
            let sim = sim_config(&scenario, trials, seed)?;
            let report = with_workers(common.workers, || {
                cli::run_validate(&scenario, &scenario, single_point(common.snr_db), &sim, mode.into())
            })??;
            emit(common.out.as_deref(), &report.csv())?;
            for line in report.annotations() {
                eprintln!("{line}");
            }
            write_plot(plot_script.as_ref(), common.out.as_ref(), &["op_analytic", "op_mc"])?;
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Validation(report.failures()))
            }
        }
        Command::Optimize { common } => {
            let scenario = cli::load_config(&common.config)?;
            let rows = with_workers(common.workers, || cli::run_optimize(&scenario, common.snr_db))??;
            print!("{}", cli::optimize_text(&rows));
            if let Some(out) = &common.out {
                std::fs::write(out, cli::optimize_csv(&rows))?;
            }
            Ok(())
        }
        Command::PrintConfig { config } => {
            let scenario = cli::load_config(&config)?;
            print!("{}", scenario.to_json());
            Ok(())
        }
        Command::SpecfunEval { function, args } => {
            print!("{}", cli::specfun_eval(&function, &args)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relay-outage: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
