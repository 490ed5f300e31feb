use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use holder_pressure::experiments::{criteria_for, run_suite, verify_all, ExperimentConfig, Geometry, SuiteOutcome};
use holder_pressure::fields::{synth_lacunary_divfree, LacunarySpec};
use holder_pressure::io::{read_field, write_field};
use holder_pressure::norms::zygmund_norm;
use holder_pressure::spectral_core::make_partition;
use holder_pressure::Error;

#[derive(Parser, Debug)]
#[command(name = "holder-pressure", version, about = "Pressure regularity experiments on the torus and the disk")]
struct Cli {
    /// JSON experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Restrict a suite to the criteria of one module.
    #[arg(long, global = true)]
    only: Option<String>,
    /// Override `grid_n`.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write lacunary velocity fields to `fields/`.
    Synth,
    /// Periodic pressure runs (criteria A1, A4).
    SolveTorus,
    /// Disk Neumann solver study (criterion A9).
    SolveDisk,
    /// Zygmund norm of a stored field, or the log-Lipschitz study (A5).
    Norms {
        #[arg(long)]
        field: Option<PathBuf>,
        /// Smoothness index of the Zygmund norm.
        #[arg(long, default_value_t = 0.5)]
        s: f64,
    },
    /// I_N / J_N splitting (criterion A3).
    Split,
    /// Sharp symbol and parametrix remainder (criterion A8).
    Symbols,
    /// Every acceptance criterion.
    VerifyAll,
}

fn load_config(cli: &Cli) -> holder_pressure::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = cli.grid_n {
        cfg.grid_n = n;
    }
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn suite(cfg: &ExperimentConfig, only: Option<&str>, ids: &[&'static str]) -> holder_pressure::Result<SuiteOutcome> {
    let ids: Vec<&str> = match only {
        Some(m) => {
            let allowed = criteria_for(m)?;
            ids.iter().copied().filter(|id| allowed.contains(id)).collect()
        }
        None => ids.to_vec(),
    };
    run_suite(cfg, &ids)
}

fn run(cli: &Cli) -> holder_pressure::Result<bool> {
    let cfg = load_config(cli)?;
    let only = cli.only.as_deref();
    let outcome = match &cli.command {
        Command::Synth => {
            if cfg.geometry == Geometry::Disk {
                return Err(Error::Config(
                    "geometry: synth stores periodic fields; disk fields are built inside solve-disk".into(),
                ));
            }
            for &gamma in &cfg.gamma_list {
                for &seed in &cfg.seeds {
                    let u = synth_lacunary_divfree(&LacunarySpec { gamma, j: cfg.j_max, seed, amplitude: 1.0 }, cfg.grid_n)?;
                    let path = cfg.output_dir.join("fields").join(format!("u_{gamma}_{seed}"));
                    write_field(&path, &u)?;
                    println!("{}", path.with_extension("bin").display());
                }
            }
            return Ok(true);
        }
        Command::Norms { field: Some(path), s } => {
            let f = read_field(path)?;
            let part = make_partition(f.n.trailing_zeros());
            println!("zygmund_norm(s = {s}) = {:.12e}", zygmund_norm(&f, *s, &part)?);
            return Ok(true);
        }
        Command::Norms { field: None, .. } => suite(&cfg, only, &["A5"])?,
        Command::SolveTorus => suite(&cfg, only, &["A1", "A4"])?,
        Command::SolveDisk => suite(&cfg, only, &["A9"])?,
        Command::Split => suite(&cfg, only, &["A3"])?,
        Command::Symbols => suite(&cfg, only, &["A8"])?,
        Command::VerifyAll => verify_all(&cfg, only)?,
    };
    for r in &outcome.records {
        println!("{}", r.summary_line());
    }
    for p in &outcome.reports {
        println!("wrote {}", p.display());
    }
    Ok(!outcome.has_errors())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some runs stopped with a numerical error; see the report files");
            ExitCode::from(1)
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
