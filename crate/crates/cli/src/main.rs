use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use eitcool_cli::config::ScenarioKind;
use eitcool_cli::{load_config, run, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "eitcool", version, about = "EIT ground-state cooling scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV outputs plus manifest.json.
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweeps and ensembles (default: all cores).
        #[arg(long, env = "EITCOOL_THREADS")]
        threads: Option<usize>,
        /// Relative ODE tolerance; the absolute tolerance becomes rel_tol/100.
        #[arg(long)]
        rel_tol: Option<f64>,
    },
    /// Check a configuration file without running it.
    Validate { config: PathBuf },
    /// Print the scenario names.
    ListScenarios,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListScenarios => {
            for k in ScenarioKind::ALL {
                println!("{:<22}{}", k.name(), k.description());
            }
            Ok(())
        }
        Command::Validate { config } => validate(&config),
        Command::Run {
            config,
            output_dir,
            seed,
            threads,
            rel_tol,
        } => run_cmd(config, output_dir, seed, threads, rel_tol),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn validate(path: &std::path::Path) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    for w in &cfg.warnings {
        println!("warning: {w}");
    }
    println!("{}: ok ({})", path.display(), cfg.scenario);
    Ok(())
}

fn run_cmd(
    path: PathBuf,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
    rel_tol: Option<f64>,
) -> Result<(), CliError> {
    let mut cfg = load_config(&path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = rel_tol {
        cfg.solver.rel_tol = r;
        cfg.solver.abs_tol = r * 1e-2;
        eitcool::ode::OdeOptions::new(r, r * 1e-2)
            .validate()
            .map_err(|e| eitcool_cli::ConfigError {
                line: 0,
                field: "--rel-tol".into(),
                message: e.to_string(),
            })?;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.filter(|n| *n > 0) {
        pool = pool.num_threads(n);
    }
    // only fails if a global pool already exists
    let _ = pool.build_global();
    let output_dir = output_dir
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.scenario.name()));
    let opts = RunOptions {
        output_dir,
        config_file: Some(path.display().to_string()),
        threads: rayon::current_num_threads(),
    };
    for w in &cfg.warnings {
        log::warn!("{w}");
    }
    let (manifest, result) = run(&cfg, &opts);
    if let Some(m) = manifest {
        println!(
            "{} {} in {:.1} s, {} file(s) in {}",
            m.scenario,
            m.status,
            m.wall_time_s,
            m.outputs.len(),
            opts.output_dir.display()
        );
    }
    result
}
