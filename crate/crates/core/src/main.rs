//! Command-line front end: run Monte Carlo experiments, dump sweep
//! schedules and validate configuration files.

use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use irs_beam_training::codebook::CodebookGeometry;
use irs_beam_training::experiment::{
    emit_results, run_experiment, run_experiment_traced, ExperimentConfig, Method,
};
use irs_beam_training::sweep_plan::build_sweep_plan;
use irs_beam_training::Error;

#[derive(Parser)]
#[command(
    name = "irs-beam-sim",
    version,
    about = "IRS reflect-beam training simulator: single-beam, multi-beam and random-hashing codebook search over Monte Carlo channel realizations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file
    Run(RunArgs),
    /// Print the multi-beam sweep schedule, one `r,b,j_1,...,j_M` line
    /// per training symbol
    DumpPlan {
        /// Horizontal IRS elements
        #[arg(long)]
        nx: usize,
        /// Number of sub-arrays (power of two)
        #[arg(long)]
        m: usize,
    },
    /// Check a config file and report the first problem found
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config
    #[arg(long)]
    config: PathBuf,
    /// Override the config's RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of Monte Carlo trials
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory for results.csv / results.json (default from
    /// config, else ./results)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the methods to run (comma-separated: single,multi,rh)
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Override the sub-array counts (comma-separated)
    #[arg(long = "m", value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    /// Disable receiver noise during training
    #[arg(long)]
    noiseless: bool,
    /// Also write a per-trial outcome log to trace.txt
    #[arg(long)]
    trace: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::DumpPlan { nx, m } => {
            let geo = CodebookGeometry::new(nx, m)?;
            let plan = build_sweep_plan(&geo)?;
            print!("{}", plan.dump());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_json_file(&config)?;
            println!(
                "ok: {} methods, {} SNR points, {} trials, n_x = {}",
                cfg.methods.len(),
                cfg.snr_grid_db.len(),
                cfg.trials,
                cfg.scenario.n_x
            );
            Ok(())
        }
    }
}

fn run(args: RunArgs) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::from_json_file(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.scenario.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(methods) = args.methods {
        cfg.methods = methods;
    }
    if let Some(m_values) = args.m_values {
        cfg.m_values = m_values;
    }
    if args.noiseless {
        cfg.noiseless = true;
    }
    let out_dir = args
        .out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    cfg.validate()?;

    let output = if args.trace {
        std::fs::create_dir_all(&out_dir).map_err(|source| Error::Io {
            path: out_dir.clone(),
            source,
        })?;
        let trace_path = out_dir.join("trace.txt");
        let file = std::fs::File::create(&trace_path).map_err(|source| Error::Io {
            path: trace_path.clone(),
            source,
        })?;
        let mut writer = BufWriter::new(file);
        let output = run_experiment_traced(&cfg, &mut writer)?;
        eprintln!("trace written to {}", trace_path.display());
        output
    } else {
        run_experiment(&cfg)?
    };

    let paths = emit_results(&output.table, &cfg, &out_dir)?;
    println!("method      m  snr_db  symbols  success  stderr    rate      stderr");
    for r in &output.table.rows {
        println!(
            "{:<9} {:>3}  {:>6.1}  {:>7}  {:>7.4}  {:>7.4}  {:>8.4}  {:>7.4}",
            r.method.to_string(),
            r.m,
            r.snr_db,
            r.training_symbols,
            r.success_rate,
            r.success_stderr,
            r.avg_rate,
            r.rate_stderr
        );
    }
    println!("results written to {}", paths.csv.display());
    Ok(())
}
