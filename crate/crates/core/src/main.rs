use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mimo_detect::detect::InverseProvider;
use mimo_detect::error::{Error, Result};
use mimo_detect::harness::{
    parse_config_file, parse_inverse, parse_linear_detector, parse_scheme, parse_snr_list,
    run_diagnostics, run_linear_sweep, run_radius_study, run_sd_sweep, write_diag_csv,
    write_metrics_csv, write_radius_csv, Detector, SimConfig,
};

/// Monte Carlo simulator for large/massive MIMO uplink detection.
#[derive(Parser)]
#[command(name = "mimo-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER sweep for the linear detectors (ZF / MMSE).
    Linear(RunArgs),
    /// BER and node-count sweep for the sphere decoders.
    Sd(RunArgs),
    /// Babai-radius-versus-iteration study.
    Radius(RunArgs),
    /// Numerical diagnostics: identity checks, bound surrogates, trace gap.
    Diag(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Flat `key = value` file mirroring these flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Receive antennas N.
    #[arg(long)]
    n: Option<usize>,
    /// Single-antenna users K.
    #[arg(long = "k-users")]
    k_users: Option<usize>,
    /// Constellation order M (4, 16 or 64).
    #[arg(long = "mod")]
    modulation: Option<usize>,
    /// Comma-separated SNR points in dB.
    #[arg(long)]
    snr: Option<String>,
    /// Monte Carlo trials per SNR point.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed; every trial derives its own stream from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Inverse provider: exact | newton:K | order3:K | order7:K.
    #[arg(long)]
    inverse: Option<String>,
    /// Sphere decoder scheme: proposed | se | fp.
    #[arg(long)]
    scheme: Option<String>,
    /// Linear detector: zf | mmse.
    #[arg(long)]
    detector: Option<String>,
    /// Worker threads (0 = runtime default). Output is identical either way.
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Effective string-valued settings: file values overridden by flags.
struct Resolved {
    values: HashMap<String, String>,
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<Resolved> {
        let mut values = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => HashMap::new(),
        };
        let mut put = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                values.insert(key.to_string(), v);
            }
        };
        put("n", self.n.map(|v| v.to_string()));
        put("k-users", self.k_users.map(|v| v.to_string()));
        put("mod", self.modulation.map(|v| v.to_string()));
        put("snr", self.snr.clone());
        put("trials", self.trials.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("inverse", self.inverse.clone());
        put("scheme", self.scheme.clone());
        put("detector", self.detector.clone());
        put("workers", self.workers.map(|v| v.to_string()));
        let out = self.out.clone().or_else(|| values.get("out").map(PathBuf::from));
        Ok(Resolved { values, out })
    }
}

impl Resolved {
    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse {key} = '{s}'"))),
        }
    }

    fn sim_config(&self, detector: Detector) -> Result<SimConfig> {
        let inverse = match self.get("inverse") {
            Some(s) => parse_inverse(s)?,
            None => parse_inverse("newton:7")?,
        };
        let snr_db_list = match self.get("snr") {
            Some(s) => parse_snr_list(s)?,
            None => vec![4.0, 8.0, 12.0],
        };
        Ok(SimConfig {
            n_rx: self.parse("n", 16)?,
            n_users: self.parse("k-users", 8)?,
            modulation: self.parse("mod", 4)?,
            snr_db_list,
            trials: self.parse("trials", 1000)?,
            master_seed: self.parse("seed", 1)?,
            detector,
            inverse,
            workers: self.parse("workers", 0)?,
        })
    }
}

fn open_sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match out {
        Some(path) => Ok(Box::new(std::fs::File::create(path)?)),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Linear(args) => {
            let resolved = args.resolve()?;
            let detector = match resolved.get("detector") {
                Some(s) => parse_linear_detector(s)?,
                None => Detector::Zf,
            };
            let cfg = resolved.sim_config(detector)?;
            let records = run_linear_sweep(&cfg)?;
            write_metrics_csv(&mut open_sink(&resolved.out)?, &records)
        }
        Command::Sd(args) => {
            let resolved = args.resolve()?;
            let detector = match resolved.get("scheme") {
                Some(s) => parse_scheme(s)?,
                None => Detector::SdProposed,
            };
            let cfg = resolved.sim_config(detector)?;
            let records = run_sd_sweep(&cfg)?;
            write_metrics_csv(&mut open_sink(&resolved.out)?, &records)
        }
        Command::Radius(args) => {
            let resolved = args.resolve()?;
            let cfg = resolved.sim_config(Detector::Zf)?;
            let k_list: Vec<usize> = match cfg.inverse {
                InverseProvider::Iterative { iterations, .. } => (1..=iterations).collect(),
                InverseProvider::Exact => Vec::new(),
            };
            let records = run_radius_study(&cfg, &k_list)?;
            write_radius_csv(&mut open_sink(&resolved.out)?, &records)
        }
        Command::Diag(args) => {
            let resolved = args.resolve()?;
            let cfg = resolved.sim_config(Detector::Zf)?;
            let rows = run_diagnostics(&cfg)?;
            write_diag_csv(&mut open_sink(&resolved.out)?, &rows)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
