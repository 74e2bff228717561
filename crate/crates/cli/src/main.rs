use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use privcount_cli::bench::{self, FssBenchOptions};
use privcount_cli::epsilon::{self, EpsilonMechanism};
use privcount_cli::{discretize, simulate, CliError, CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(name = "privcount", version, about = "Private crowdsourced counting simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated epochs from a config file; writes trials.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Dotted-path assignment such as `epoch.parties=4`; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Leakage over a parameter grid as CSV.
    Epsilon {
        #[arg(long, value_enum, value_delimiter = ',')]
        mechanism: Vec<EpsilonMechanism>,
        /// First parameter values (pi1 or pi_s).
        #[arg(long, value_delimiter = ',')]
        a: Vec<f64>,
        /// Second parameter values (pi2, pi_yes or pi_v).
        #[arg(long, value_delimiter = ',')]
        b: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// FSS generation and full-domain evaluation timings as CSV.
    BenchFss {
        #[arg(long, value_delimiter = ',', default_values_t = [10, 12, 14, 16])]
        n: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [3])]
        p: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Row widths to run next to the default layout.
        #[arg(long, value_delimiter = ',')]
        mu: Vec<u64>,
        /// Also run every power-of-two row width.
        #[arg(long)]
        mu_sweep: bool,
        #[arg(long, default_value_t = bench::MIN_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Unit-vector verification timings per blinding kind as CSV.
    BenchVerify {
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 5])]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1024, 4096, 16384])]
        n: Vec<usize>,
        #[arg(long, default_value_t = bench::MIN_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid cell ID for a coordinate.
    Discretize {
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
        #[arg(long, allow_hyphen_values = true)]
        origin_lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        origin_lon: f64,
        #[arg(long)]
        cell_miles: f64,
        #[arg(long, default_value_t = 16)]
        id_bits: u32,
    },
}

fn output(path: Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(&p).map_err(|e| CliError::Abort(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, seed, trials, out_dir, mut overrides } => {
            if let Some(s) = seed {
                overrides.push(format!("seed={s}"));
            }
            if let Some(t) = trials {
                overrides.push(format!("trials={t}"));
            }
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            let (rows, summary) = simulate::run(&cfg)?;
            simulate::write_outputs(&out_dir, &rows, &summary)?;
            for g in &summary.groups {
                eprintln!(
                    "{} {} total={} mean_abs_error={} halted={}/{}",
                    g.mechanism_index,
                    g.mechanism,
                    g.total,
                    g.mean_abs_error.map_or("n/a".into(), |e| format!("{e:.3}")),
                    g.halted_trials,
                    g.trials
                );
            }
        }
        Command::Epsilon { mechanism, a, b, out } => {
            let mechs = if mechanism.is_empty() { EpsilonMechanism::ALL.to_vec() } else { mechanism };
            let a = if a.is_empty() { epsilon::default_grid() } else { a };
            let b = if b.is_empty() { epsilon::default_grid() } else { b };
            epsilon::write_csv(&epsilon::sweep(&mechs, &a, &b), output(out)?)?;
        }
        Command::BenchFss { n, p, m, mu, mu_sweep, runs, seed, out } => {
            let opts = FssBenchOptions { ns: n, ps: p, m, mu_overrides: mu, mu_sweep, runs, seed };
            bench::write_csv(&bench::bench_fss(&opts)?, output(out)?)?;
        }
        Command::BenchVerify { p, n, runs, seed, out } => {
            let rows = bench::bench_verify(&p, &n, runs, seed)?;
            for chunk in rows.chunks(3) {
                let mut order: Vec<_> = chunk.iter().collect();
                order.sort_by(|x, y| x.median_time.total_cmp(&y.median_time));
                let names: Vec<_> = order.iter().map(|r| r.kind).collect();
                eprintln!("p={} n={}: {}", chunk[0].p, chunk[0].n, names.join(" < "));
            }
            bench::write_csv(&rows, output(out)?)?;
        }
        Command::Discretize { lat, lon, origin_lat, origin_lon, cell_miles, id_bits } => {
            let grid = discretize::grid(origin_lat, origin_lon, cell_miles, id_bits)?;
            println!("{}", discretize::cell_id(lat, lon, &grid)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("privcount: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
