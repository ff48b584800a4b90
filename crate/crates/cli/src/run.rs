//! Seeded Monte Carlo execution: one channel per trial, reused across the
//! whole SNR grid and method list, aggregated into per-cell statistics.

use crate::spec::{ChannelSource, MethodId, Receiver, Scenario, SweepSpec};
use crate::{Error, Result};
use hybeam_core::channel::{draw_channel, load_dataset, ChannelRealization};
use hybeam_core::hybrid::{quantize_beamformer, PhaseSet};
use hybeam_core::mimo::{
    design_hybrid_mimo, design_p2p_precoder, exhaustive_rf_search, fd_p2p_baseline,
    quantize_p2p_design, DescentOptions,
};
use hybeam_core::miso::{
    design_hybrid_miso, fd_zf_baseline, rf_channel_phase_match, rf_strongest_path, zf_with_rf,
    MisoOptions,
};
use hybeam_core::numerics::ComplexMatrix;
use hybeam_core::Matrix64;
use rayon::prelude::*;
use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;

/// One aggregated (SNR point, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub method: MethodId,
    /// Mean rate over the trials that succeeded, bits/s/Hz.
    pub mean_rate: f64,
    /// Sample standard deviation over the same trials.
    pub std_rate: f64,
    /// Number of trials that contributed to the mean.
    pub trials: usize,
    /// Trials whose design failed for this cell.
    pub failures: usize,
}

/// Full sweep output plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Hash of the canonical config text.
    pub config_hash: u64,
    pub master_seed: u64,
    pub version: &'static str,
}

/// Per-trial seed: distinct for every trial index because the multiplier is
/// odd, so the map t → (t+1)·c is a bijection on 64-bit words.
pub fn child_seed(master: u64, trial: u64) -> u64 {
    master ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn config_hash(spec: &SweepSpec) -> u64 {
    let mut hasher = DefaultHasher::new();
    hasher.write(spec.canonical_json().as_bytes());
    hasher.finish()
}

fn snr_to_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Runs the sweep described by `spec`; `jobs` caps the worker threads.
/// Output is independent of the thread count: trials are merged in index
/// order and each trial owns its RNG.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let loaded = match &spec.channel_source {
        ChannelSource::Generate => None,
        ChannelSource::File(path) => {
            let (header, realizations) = load_dataset(path)?;
            let cfg = &spec.cfg;
            if header.tx_antennas != cfg.tx_antennas
                || header.rx_antennas != cfg.rx_antennas
                || header.users != cfg.users
                || header.paths != cfg.paths
                || header.spacing != cfg.spacing
            {
                return Err(Error::Config(format!(
                    "channel_source: dataset geometry ({}x{}, {} users, {} paths, spacing {}) \
                     does not match the config",
                    header.rx_antennas,
                    header.tx_antennas,
                    header.users,
                    header.paths,
                    header.spacing
                )));
            }
            if realizations.len() < spec.trials {
                return Err(Error::Config(format!(
                    "channel_source: dataset holds {} realizations, sweep needs {}",
                    realizations.len(),
                    spec.trials
                )));
            }
            Some(realizations)
        }
    };

    let geometry = spec.cfg.system_config(1.0);
    let evaluate = |t: usize| -> Vec<std::result::Result<f64, String>> {
        let realization = match &loaded {
            Some(set) => set[t].clone(),
            None => draw_channel(&geometry, child_seed(spec.master_seed, t as u64)),
        };
        evaluate_trial(spec, &realization)
    };
    let collect = || (0..spec.trials).into_par_iter().map(evaluate).collect();
    let per_trial: Vec<Vec<std::result::Result<f64, String>>> = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("jobs: {e}")))?
            .install(collect),
        None => collect(),
    };

    // Abort when enough distinct trials failed anywhere that the surviving
    // averages are no longer comparable across cells.
    let failed_trials = per_trial
        .iter()
        .filter(|cells| cells.iter().any(|c| c.is_err()))
        .count();
    if failed_trials * 100 > spec.trials {
        let sample = per_trial
            .iter()
            .flat_map(|cells| cells.iter())
            .find_map(|c| c.as_ref().err().cloned())
            .unwrap_or_default();
        return Err(Error::Aborted(format!(
            "{failed_trials} of {} trials failed (more than 1%); first error: {sample}",
            spec.trials
        )));
    }

    let methods = spec.methods.len();
    let mut rows = Vec::with_capacity(spec.snr_grid_db.len() * methods);
    for (si, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        for (mi, method) in spec.methods.iter().enumerate() {
            let cell = si * methods + mi;
            let mut values = Vec::with_capacity(spec.trials);
            for trial in &per_trial {
                if let Ok(rate) = &trial[cell] {
                    values.push(*rate);
                }
            }
            let n = values.len();
            let mean = if n > 0 {
                values.iter().sum::<f64>() / n as f64
            } else {
                f64::NAN
            };
            let std = if n > 1 {
                let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            rows.push(SweepRow {
                snr_db,
                method: method.clone(),
                mean_rate: mean,
                std_rate: std,
                trials: n,
                failures: spec.trials - n,
            });
        }
    }
    Ok(SweepResult {
        rows,
        config_hash: config_hash(spec),
        master_seed: spec.master_seed,
        version: env!("CARGO_PKG_VERSION"),
    })
}

/// Draws the realizations a file-based sweep of `spec` would consume.
pub fn generate_channels(spec: &SweepSpec) -> Vec<ChannelRealization<f64>> {
    let geometry = spec.cfg.system_config(1.0);
    (0..spec.trials)
        .map(|t| draw_channel(&geometry, child_seed(spec.master_seed, t as u64)))
        .collect()
}

// ── per-trial evaluation ─────────────────────────────────────────────────────

fn evaluate_trial(
    spec: &SweepSpec,
    realization: &ChannelRealization<f64>,
) -> Vec<std::result::Result<f64, String>> {
    let mut out = Vec::with_capacity(spec.snr_grid_db.len() * spec.methods.len());
    match spec.scenario {
        Scenario::P2pMimo => {
            let h = &realization.users[0].matrix;
            for &snr_db in &spec.snr_grid_db {
                let power = snr_to_power(snr_db);
                for method in &spec.methods {
                    out.push(eval_p2p(spec, h, method, power).map_err(|e| e.to_string()));
                }
            }
        }
        Scenario::MuMiso => {
            let users = spec.cfg.users;
            let n = spec.cfg.tx_antennas;
            let h = ComplexMatrix::from_fn(users, n, |k, i| realization.users[k].matrix[(0, i)]);
            // These RF stages depend only on the realization, not the power.
            let phase_rf = rf_channel_phase_match(&h);
            let strongest_rf = rf_strongest_path(realization, spec.cfg.spacing, n);
            for &snr_db in &spec.snr_grid_db {
                let power = snr_to_power(snr_db);
                for method in &spec.methods {
                    let rate = eval_miso(spec, &h, &phase_rf, &strongest_rf, method, power);
                    out.push(rate.map_err(|e| e.to_string()));
                }
            }
        }
    }
    out
}

fn eval_p2p(
    spec: &SweepSpec,
    h: &Matrix64,
    method: &MethodId,
    power: f64,
) -> hybeam_core::Result<f64> {
    let options = DescentOptions::default();
    let ns = spec.cfg.streams_total();
    let design = |cfg: &hybeam_core::hybrid::SystemConfig<f64>| match spec.receiver {
        Receiver::Hybrid => design_hybrid_mimo(cfg, h, &options),
        Receiver::Optimal => design_p2p_precoder(cfg, h, &options),
    };
    match method {
        MethodId::FdOptimal => Ok(fd_p2p_baseline(h, ns, power, 1.0)?.rate),
        MethodId::HybridProposed => Ok(design(&spec.cfg.system_config(power))?.weighted_sum_rate),
        MethodId::HybridFiniteRes(bits) => {
            let mut cfg = spec.cfg.system_config(power);
            cfg.phase_bits = *bits;
            Ok(design(&cfg)?.weighted_sum_rate)
        }
        MethodId::HybridProposedQuantized(bits) => {
            let cfg = spec.cfg.system_config(power);
            let free = design(&cfg)?;
            let set = PhaseSet::new(*bits)?;
            Ok(quantize_p2p_design(&cfg, h, &free, &set)?.weighted_sum_rate)
        }
        MethodId::ExactRealization2ns => {
            let mut cfg = spec.cfg.system_config(power);
            cfg.tx_rf_chains = 2 * ns;
            if spec.receiver == Receiver::Hybrid {
                cfg.rx_rf_chains = 2 * ns;
            }
            Ok(design(&cfg)?.weighted_sum_rate)
        }
        MethodId::ExhaustiveB1 => {
            let (_, rate) = exhaustive_rf_search(h, spec.cfg.tx_rf_chains, ns, power, 1.0)?;
            Ok(rate)
        }
        _ => unreachable!("validation rejects mu_miso methods in p2p sweeps"),
    }
}

fn eval_miso(
    spec: &SweepSpec,
    h: &Matrix64,
    phase_rf: &Matrix64,
    strongest_rf: &hybeam_core::Result<Matrix64>,
    method: &MethodId,
    power: f64,
) -> hybeam_core::Result<f64> {
    let cfg = spec.cfg.system_config(power);
    let options = MisoOptions::default();
    let zf = |rf: &Matrix64| -> hybeam_core::Result<f64> {
        Ok(zf_with_rf(h, rf, power, 1.0, &cfg.weights)?.weighted_sum_rate)
    };
    let snapped = |rf: &Matrix64, bits: u32| -> hybeam_core::Result<f64> {
        let set = PhaseSet::new(bits)?;
        zf(&quantize_beamformer(rf, &set))
    };
    match method {
        MethodId::FdZf => Ok(fd_zf_baseline(h, power, 1.0, &cfg.weights)?.weighted_sum_rate),
        MethodId::HybridProposed => Ok(design_hybrid_miso(&cfg, h, &options)?.weighted_sum_rate),
        MethodId::HybridFiniteRes(bits) => {
            let mut cfg = cfg;
            cfg.phase_bits = *bits;
            Ok(design_hybrid_miso(&cfg, h, &options)?.weighted_sum_rate)
        }
        MethodId::HybridProposedQuantized(bits) => {
            let free = design_hybrid_miso(&cfg, h, &options)?;
            snapped(&free.precoder.rf, *bits)
        }
        MethodId::PhaseMatchZf => zf(phase_rf),
        MethodId::PhaseMatchZfQuantized(bits) => snapped(phase_rf, *bits),
        MethodId::StrongestPathZf => match strongest_rf {
            Ok(rf) => zf(rf),
            Err(e) => Err(clone_error(e)),
        },
        MethodId::StrongestPathZfQuantized(bits) => match strongest_rf {
            Ok(rf) => snapped(rf, *bits),
            Err(e) => Err(clone_error(e)),
        },
        _ => unreachable!("validation rejects p2p methods in mu_miso sweeps"),
    }
}

fn clone_error(e: &hybeam_core::Error) -> hybeam_core::Error {
    hybeam_core::Error::Config(e.to_string())
}
