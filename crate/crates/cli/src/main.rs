use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotcouette::harness::{execute, run_dir, Command, ExperimentConfig};
use rotcouette::LabError;

#[derive(Parser)]
#[command(name = "rotcouette", version, about = "Experiments on rotating plane Couette flow")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Linear zero-mode dispersion: sup-norm decay of the streamwise average.
    LinearDisp(Common),
    /// Enhanced dissipation and inviscid damping of the linearized (Q, W) system.
    LinearEd(Common),
    /// Decay of the oscillatory kernels K, M and the torus kernel.
    Kernels(Common),
    /// Random-sample audit of the multiplier inequalities.
    MultiplierAudit(Common),
    /// One nonlinear run with energy functionals and checkpoints.
    NonlinearRun(Common),
    /// Bisection on ε for every ν, then a power-law fit of the thresholds.
    ThresholdSweep(Common),
}

/// Flags override the config file; `--set key=value` reaches every other key.
#[derive(Args)]
struct Common {
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Comma-separated list.
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// `lo,hi`
    #[arg(long)]
    eps_range: Option<String>,
    /// `NxxNyxNz`, or `NyxNz` for the cross-stream plane.
    #[arg(long)]
    grid: Option<String>,
    /// A time, or `auto` for 10·ν^{-1/3}.
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    id: Option<String>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build(command: Command, c: &Common) -> rotcouette::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.command = command;
    let flags = [
        ("nu", &c.nu),
        ("beta", &c.beta),
        ("eps", &c.eps),
        ("eps_range", &c.eps_range),
        ("grid", &c.grid),
        ("horizon", &c.horizon),
        ("seed", &c.seed),
        ("out", &c.out),
        ("domain", &c.domain),
        ("id", &c.id),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v).map_err(|e| prefix(e, &format!("--{}", k.replace('_', "-"))))?;
        }
    }
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k, v).map_err(|e| prefix(e, "--set"))?;
    }
    Ok(cfg)
}

fn prefix(e: LabError, flag: &str) -> LabError {
    match e {
        LabError::Config(m) => LabError::Config(format!("{flag}: {m}")),
        e => e,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Cmd::LinearDisp(c) => (Command::LinearDisp, c),
        Cmd::LinearEd(c) => (Command::LinearEd, c),
        Cmd::Kernels(c) => (Command::Kernels, c),
        Cmd::MultiplierAudit(c) => (Command::MultiplierAudit, c),
        Cmd::NonlinearRun(c) => (Command::NonlinearRun, c),
        Cmd::ThresholdSweep(c) => (Command::ThresholdSweep, c),
    };
    // Configuration that cannot even be assembled still gets a manifest, under the defaults'
    // output directory, so that every invocation leaves one behind.
    let cfg = match build(command, common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            let mut cfg = ExperimentConfig::default();
            cfg.command = command;
            if let Some(out) = &common.out {
                cfg.out = PathBuf::from(out);
            }
            cfg.id = Some(format!("{}-invalid", command.name()));
            write_failure(&cfg, &e);
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cfg) {
        Ok(m) => {
            if let Some(err) = &m.error {
                eprintln!("error: {err}");
            }
            println!("{}", run_dir(&cfg).join("manifest.json").display());
            ExitCode::from(m.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn write_failure(cfg: &ExperimentConfig, e: &LabError) {
    let dir = run_dir(cfg);
    let manifest = rotcouette::harness::Manifest {
        id: cfg.id.clone().unwrap_or_default(),
        command: cfg.command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        status: rotcouette::harness::Status::ConfigError,
        exit_code: e.exit_code(),
        error: Some(e.to_string()),
        outputs: vec!["manifest.json".into()],
        notes: vec![],
        config: cfg.clone(),
    };
    if std::fs::create_dir_all(&dir).is_ok() && rotcouette::harness::write_manifest(&dir, &manifest).is_ok() {
        println!("{}", dir.join("manifest.json").display());
    }
}
