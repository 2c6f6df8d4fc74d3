use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fracns_core::config::{SweepConfig, SweepKind, SweepParam};
use fracns_core::io::read_snapshot;
use fracns_core::runner::{
    check_snapshot, execute, predict, run_sweep, sweep_exit_code, write_sweep_csv, RunKind, RunReport, EXIT_CONFIG,
    EXIT_FAIL, EXIT_PASS,
};
use fracns_core::{Error, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "fracns", version, about = "Fractional-dissipation Navier-Stokes decay laboratory")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random initial data, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. `1` gives bitwise reproducible output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Galerkin simulation with fits and verdicts.
    Simulate,
    /// Exact linear (heat) evolution of the same initial data.
    Heat,
    /// Runs the config once per axis value and writes sweep.csv.
    Sweep {
        /// Overrides the config's sweep kind.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Overrides the config's sweep parameter.
        #[arg(long, value_enum)]
        param: Option<ParamArg>,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Option<Vec<f64>>,
    },
    /// Checks structural invariants of an FNS1 snapshot.
    Check {
        snapshot: PathBuf,
        /// Splitting constant for the reported shell energy.
        #[arg(long, default_value_t = 3.0)]
        gamma: f64,
    },
    /// Prints the predicted exponent and the statements covering (p, alpha).
    Predict {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        m: u32,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Heat,
    Simulate,
    Predict,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ParamArg {
    Alpha,
    P,
    M,
    Seed,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required for this command".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.initial_data = cfg.initial_data.with_seed(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_run(report: &RunReport) {
    let s = &report.summary;
    println!(
        "{:?} n={} L={} alpha={} samples={} -> {}",
        s.kind,
        s.n,
        s.box_length,
        s.alpha,
        s.samples,
        report.config.output_dir.display()
    );
    if let Some(f) = &report.failure {
        println!("blow-up at t={} (last finite t={})", f.t, f.last_finite_t);
    }
    for v in &report.verdicts {
        println!(
            "m={} predicted={:.4} fitted={:.4} deviation={:.2}% valid={} claim={} status={}",
            v.m,
            v.predicted,
            v.fitted,
            100.0 * v.deviation,
            v.window_valid,
            v.claim_label(),
            v.status.as_str()
        );
    }
    for e in &s.fit_errors {
        println!("fit error: {e}");
    }
    println!("gamma={} (free choice; only moves the diagnostic shell)", s.gamma);
}

fn run(cli: &Cli) -> Result<i32, Error> {
    match &cli.command {
        Command::Simulate | Command::Heat => {
            let kind = if matches!(cli.command, Command::Simulate) { RunKind::Simulate } else { RunKind::Heat };
            let cfg = load_config(cli)?;
            let report = execute(&cfg, kind)?;
            print_run(&report);
            Ok(report.exit_code())
        }
        Command::Sweep { kind, param, values } => {
            let cfg = load_config(cli)?;
            let base = cfg.sweep.clone();
            let sweep = SweepConfig {
                kind: match kind {
                    Some(KindArg::Heat) => SweepKind::Heat,
                    Some(KindArg::Simulate) => SweepKind::Simulate,
                    Some(KindArg::Predict) => SweepKind::Predict,
                    None => base.as_ref().map(|s| s.kind).unwrap_or(SweepKind::Predict),
                },
                param: match param {
                    Some(ParamArg::Alpha) => SweepParam::Alpha,
                    Some(ParamArg::P) => SweepParam::P,
                    Some(ParamArg::M) => SweepParam::M,
                    Some(ParamArg::Seed) => SweepParam::Seed,
                    None => base
                        .as_ref()
                        .map(|s| s.param)
                        .ok_or_else(|| Error::Config("sweep parameter missing (--param or config.sweep)".into()))?,
                },
                values: values
                    .clone()
                    .or_else(|| base.as_ref().map(|s| s.values.clone()))
                    .unwrap_or_default(),
            };
            let rows = run_sweep(&cfg, &sweep);
            let path = cfg.output_dir.join("sweep.csv");
            write_sweep_csv(&rows, &path)?;
            for r in &rows {
                println!("{}", serde_json::to_string(r).expect("row serializes"));
            }
            println!("{} rows -> {}", rows.len(), path.display());
            Ok(sweep_exit_code(&rows))
        }
        Command::Check { snapshot, gamma } => {
            let snap = read_snapshot(snapshot)?;
            let mut report = check_snapshot(&snap, *gamma)?;
            report.path = Some(snapshot.clone());
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(if report.passed { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Predict { p, alpha, m } => {
            let pr = predict(*p, *alpha, *m)?;
            println!("{}", serde_json::to_string_pretty(&pr).expect("prediction serializes"));
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot configure {k} threads: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
