use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use disentangle_cli::config::Engine;
use disentangle_cli::qfunc::{self, Grid};
use disentangle_cli::verify::{self, Injection, Suite, DEFAULT_DIM, DEFAULT_SEED};
use disentangle_cli::{run, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "disentangle", version, about = "Closed-form master equation propagators and their checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a state and write observables per time as CSV.
    Propagate {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `output` key.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's `engine` key.
        #[arg(long)]
        engine: Option<String>,
    },
    /// Run invariant and oracle suites; exit status 1 if any check fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_DIM)]
        dim: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also write the records as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject: Option<String>,
    },
    /// Husimi Q function of the evolved state on a grid.
    Qfunc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -4.0)]
        re_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 4.0)]
        re_max: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -4.0)]
        im_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 4.0)]
        im_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Defaults to the last configured time.
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        engine: Option<String>,
    },
}

fn load(path: &Path, engine: Option<&str>) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(e) = engine {
        cfg.engine = e.parse::<Engine>()?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Propagate { config, out, engine } => {
            let cfg = load(&config, engine.as_deref())?;
            let out = out
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| CliError::Config("no output path: pass --out or set `output`".into()))?;
            for path in run::cmd_propagate(&cfg, &out)? {
                log::info!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            suite,
            dim,
            seed,
            out,
            inject,
        } => {
            let suite: Suite = suite.parse()?;
            let injection = inject.as_deref().map(str::parse::<Injection>).transpose()?;
            let report = verify::run_suite(suite, dim, seed, injection)?;
            print!("{}", report.render());
            if let Some(out) = out {
                let text = serde_json::to_string_pretty(&report.to_json()).expect("report is plain JSON");
                fs::write(&out, text + "\n").map_err(|e| CliError::io(&out, e))?;
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Qfunc {
            config,
            out,
            re_min,
            re_max,
            im_min,
            im_max,
            points,
            time,
            engine,
        } => {
            let cfg = load(&config, engine.as_deref())?;
            let grid = Grid::new(re_min, re_max, im_min, im_max, points)?;
            let values = qfunc::q_grid(&cfg, &grid, time)?;
            fs::write(&out, qfunc::csv(&values)).map_err(|e| CliError::io(&out, e))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
