//! `hybeam`: Monte Carlo sweeps, channel dataset generation, and a
//! factorization self-check for the beamforming toolkit.

use clap::{Parser, Subcommand};
use hybeam_cli::run::{child_seed, generate_channels, run_sweep};
use hybeam_cli::spec::{ChannelSource, SweepSpec};
use hybeam_cli::{output, Error};
use hybeam_core::channel::{save_dataset, DatasetHeader, DATASET_VERSION};
use hybeam_core::hybrid::{realization_error, realize_fully_digital, DEFAULT_RANK_TOL};
use hybeam_core::numerics::complex_gaussian;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "hybeam", version, about = "Hybrid beamforming Monte Carlo harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep from a JSON config and write the CSV table.
    Sweep {
        /// Sweep config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG chart path.
        #[arg(long)]
        chart: Option<PathBuf>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for trials (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Read channels from this dataset instead of generating them.
        #[arg(long)]
        channels: Option<PathBuf>,
    },
    /// Draw the channel realizations a sweep would use and save them.
    GenChannels {
        /// Sweep config (JSON); geometry, trials, and seed are taken from it.
        #[arg(long)]
        config: PathBuf,
        /// Output dataset path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Factor a random precoder into two RF chains per stream and report the
    /// reconstruction error.
    RealizeCheck {
        /// Transmit antennas.
        #[arg(long)]
        n: usize,
        /// Streams.
        #[arg(long)]
        ns: usize,
        /// RNG seed for the random target.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() {
    if let Err(e) = dispatch(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> hybeam_cli::Result<()> {
    match cli.command {
        Command::Sweep {
            config,
            out,
            chart,
            seed,
            jobs,
            channels,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let mut spec = SweepSpec::parse(&text)?;
            if let Some(seed) = seed {
                spec.master_seed = seed;
            }
            if let Some(path) = channels {
                spec.channel_source = ChannelSource::File(path);
            }
            let result = run_sweep(&spec, jobs)?;
            std::fs::write(&out, output::write_csv(&result))?;
            println!(
                "wrote {} ({} rows); config hash {:016x}, seed {}, version {}",
                out.display(),
                result.rows.len(),
                result.config_hash,
                result.master_seed,
                result.version
            );
            if let Some(path) = chart {
                std::fs::write(&path, output::render_chart(&result))?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::GenChannels { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let spec = SweepSpec::parse(&text)?;
            let realizations = generate_channels(&spec);
            let header = DatasetHeader {
                version: DATASET_VERSION,
                count: realizations.len(),
                users: spec.cfg.users,
                rx_antennas: spec.cfg.rx_antennas,
                tx_antennas: spec.cfg.tx_antennas,
                paths: spec.cfg.paths,
                spacing: spec.cfg.spacing,
                master_seed: spec.master_seed,
            };
            save_dataset(&out, &header, &realizations)?;
            println!(
                "wrote {} ({} realizations, first child seed {})",
                out.display(),
                realizations.len(),
                child_seed(spec.master_seed, 0)
            );
            Ok(())
        }
        Command::RealizeCheck { n, ns, seed } => {
            if ns == 0 || n < 2 * ns {
                return Err(Error::Config(format!(
                    "n/ns: need n ≥ 2·ns ≥ 2 to spend two RF chains per stream, got n={n}, ns={ns}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let target = complex_gaussian::<f64, _>(&mut rng, n, ns);
            let started = Instant::now();
            let precoder = realize_fully_digital(&target, DEFAULT_RANK_TOL)?;
            let elapsed = started.elapsed();
            let error = realization_error(&precoder, &target);
            println!(
                "n={n} ns={ns} chains={} rel_err={error:.3e} elapsed={elapsed:.2?}",
                precoder.rf_chains()
            );
            if error < 1e-10 {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "reconstruction error {error:.3e} exceeds 1e-10"
                )))
            }
        }
    }
}
