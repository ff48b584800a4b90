//! Experiment configuration: JSON schema, method registry, validation.

use crate::{Error, Result};
use hybeam_core::hybrid::SystemConfig;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

// ── method registry ──────────────────────────────────────────────────────────

/// A design method selectable in a sweep. The string form is the registry
/// identifier used in configs, CSV rows, and chart legends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MethodId {
    /// Unconstrained eigenbeamforming with water-filling (point-to-point).
    FdOptimal,
    /// Fully digital zero-forcing with weighted water-filling (downlink).
    FdZf,
    /// The alternating hybrid design at infinite phase resolution.
    HybridProposed,
    /// Infinite-resolution design, RF stages snapped to k bits afterwards,
    /// digital stages rebuilt.
    HybridProposedQuantized(u32),
    /// Hybrid design run with a k-bit alphabet inside the descent.
    HybridFiniteRes(u32),
    /// RF columns carry the conjugate phases of each user's channel row.
    PhaseMatchZf,
    /// Phase matching snapped to k bits, then zero-forcing.
    PhaseMatchZfQuantized(u32),
    /// RF columns steer at each user's strongest propagation path.
    StrongestPathZf,
    /// Strongest-path steering snapped to k bits, then zero-forcing.
    StrongestPathZfQuantized(u32),
    /// Exact factorization of the fully digital optimum with two RF chains
    /// per stream.
    ExactRealization2ns,
    /// Brute force over every one-bit RF matrix (tiny systems only).
    ExhaustiveB1,
}

impl MethodId {
    /// Phase-shifter bits this method runs with inside the design loop
    /// (None means infinite resolution).
    pub fn design_bits(&self) -> Option<u32> {
        match self {
            MethodId::HybridFiniteRes(b) => Some(*b),
            _ => None,
        }
    }

    /// Bits the finished RF stages are snapped to after an
    /// infinite-resolution design.
    pub fn snap_bits(&self) -> Option<u32> {
        match self {
            MethodId::HybridProposedQuantized(b)
            | MethodId::PhaseMatchZfQuantized(b)
            | MethodId::StrongestPathZfQuantized(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodId::FdOptimal => write!(f, "fd_optimal"),
            MethodId::FdZf => write!(f, "fd_zf"),
            MethodId::HybridProposed => write!(f, "hybrid_proposed"),
            MethodId::HybridProposedQuantized(b) => write!(f, "hybrid_proposed_quantized_b{b}"),
            MethodId::HybridFiniteRes(b) => write!(f, "hybrid_finite_res_b{b}"),
            MethodId::PhaseMatchZf => write!(f, "phase_match_zf"),
            MethodId::PhaseMatchZfQuantized(b) => write!(f, "phase_match_zf_quantized_b{b}"),
            MethodId::StrongestPathZf => write!(f, "strongest_path_zf"),
            MethodId::StrongestPathZfQuantized(b) => {
                write!(f, "strongest_path_zf_quantized_b{b}")
            }
            MethodId::ExactRealization2ns => write!(f, "exact_realization_2ns"),
            MethodId::ExhaustiveB1 => write!(f, "exhaustive_b1"),
        }
    }
}

fn parse_bit_suffix(text: &str, prefix: &str) -> Option<u32> {
    let rest = text.strip_prefix(prefix)?;
    let bits: u32 = rest.parse().ok()?;
    // Round-trip so non-canonical spellings like b01 are rejected.
    (rest == bits.to_string()).then_some(bits)
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parsed = match s {
            "fd_optimal" => Some(MethodId::FdOptimal),
            "fd_zf" => Some(MethodId::FdZf),
            "hybrid_proposed" => Some(MethodId::HybridProposed),
            "phase_match_zf" => Some(MethodId::PhaseMatchZf),
            "strongest_path_zf" => Some(MethodId::StrongestPathZf),
            "exact_realization_2ns" => Some(MethodId::ExactRealization2ns),
            "exhaustive_b1" => Some(MethodId::ExhaustiveB1),
            _ => parse_bit_suffix(s, "hybrid_proposed_quantized_b")
                .map(MethodId::HybridProposedQuantized)
                .or_else(|| {
                    parse_bit_suffix(s, "hybrid_finite_res_b").map(MethodId::HybridFiniteRes)
                })
                .or_else(|| {
                    parse_bit_suffix(s, "phase_match_zf_quantized_b")
                        .map(MethodId::PhaseMatchZfQuantized)
                })
                .or_else(|| {
                    parse_bit_suffix(s, "strongest_path_zf_quantized_b")
                        .map(MethodId::StrongestPathZfQuantized)
                }),
        };
        parsed.ok_or_else(|| Error::Config(format!("methods: unknown identifier `{s}`")))
    }
}

impl TryFrom<String> for MethodId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<MethodId> for String {
    fn from(value: MethodId) -> Self {
        value.to_string()
    }
}

// ── config schema ────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Single user with multiple antennas and streams.
    P2pMimo,
    /// Many single-antenna users, one stream each.
    MuMiso,
}

/// Receiver assumed when evaluating point-to-point designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Receiver {
    /// Hybrid combiner designed alongside the precoder.
    #[default]
    Hybrid,
    /// Ideal unconstrained receiver (precoder-only designs).
    Optimal,
}

/// Where the sweep gets its channel realizations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSource {
    /// Draw per trial from the master seed.
    #[default]
    Generate,
    /// Load from a dataset written by `gen-channels`.
    File(PathBuf),
}

/// System geometry and model parameters, without power or noise; the sweep
/// fixes the noise power at 1 and sets the transmit power from each SNR
/// grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioCfg {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub users: usize,
    pub streams_per_user: usize,
    pub tx_rf_chains: usize,
    pub rx_rf_chains: usize,
    /// Per-user priority weights; all ones when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Must stay 0: resolution is selected per method through the `_b<k>`
    /// identifiers.
    #[serde(default)]
    pub phase_bits: u32,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

fn default_paths() -> usize {
    15
}

fn default_spacing() -> f64 {
    0.5
}

fn default_trials() -> usize {
    100
}

impl ScenarioCfg {
    /// Expands into the library config at a given transmit power, noise 1.
    pub fn system_config(&self, power: f64) -> SystemConfig<f64> {
        SystemConfig {
            tx_antennas: self.tx_antennas,
            rx_antennas: self.rx_antennas,
            users: self.users,
            streams_per_user: self.streams_per_user,
            tx_rf_chains: self.tx_rf_chains,
            rx_rf_chains: self.rx_rf_chains,
            power,
            noise: 1.0,
            weights: self
                .weights
                .clone()
                .unwrap_or_else(|| vec![1.0; self.users]),
            phase_bits: 0,
            paths: self.paths,
            spacing: self.spacing,
        }
    }

    pub fn streams_total(&self) -> usize {
        self.users * self.streams_per_user
    }
}

/// A complete sweep description, parsed from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub cfg: ScenarioCfg,
    pub snr_grid_db: Vec<f64>,
    pub methods: Vec<MethodId>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub channel_source: ChannelSource,
    /// Point-to-point only: receiver model the evaluation assumes.
    #[serde(default)]
    pub receiver: Receiver,
}

impl SweepSpec {
    /// Parses and validates a JSON document.
    pub fn parse(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical JSON form; reparsing it reproduces this value exactly.
    pub fn canonical_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("spec serializes");
        text.push('\n');
        text
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = &self.cfg;
        if self.trials < 1 {
            return Err(Error::Config("trials: must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("snr_grid_db: must be nonempty".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_grid_db: entries must be finite".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods: must be nonempty".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::Config(format!("methods: duplicate identifier `{m}`")));
            }
        }
        if cfg.phase_bits != 0 {
            return Err(Error::Config(
                "phase_bits: must stay 0; select resolution per method via the _b<k> identifiers"
                    .into(),
            ));
        }
        // The library validates geometry; power is a placeholder here.
        cfg.system_config(1.0)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        for m in &self.methods {
            if let Some(bits) = m.design_bits().or_else(|| m.snap_bits()) {
                if !(1..=16).contains(&bits) {
                    return Err(Error::Config(format!(
                        "methods: `{m}` needs between 1 and 16 bits"
                    )));
                }
            }
        }
        match self.scenario {
            Scenario::P2pMimo => self.validate_p2p(),
            Scenario::MuMiso => self.validate_miso(),
        }
    }

    fn validate_p2p(&self) -> Result<()> {
        let cfg = &self.cfg;
        if cfg.users != 1 {
            return Err(Error::Config(
                "users: p2p_mimo runs a single user".into(),
            ));
        }
        let ns = cfg.streams_total();
        for m in &self.methods {
            match m {
                MethodId::FdZf
                | MethodId::PhaseMatchZf
                | MethodId::PhaseMatchZfQuantized(_)
                | MethodId::StrongestPathZf
                | MethodId::StrongestPathZfQuantized(_) => {
                    return Err(Error::Config(format!(
                        "methods: `{m}` applies to mu_miso sweeps only"
                    )));
                }
                MethodId::ExactRealization2ns => {
                    if 2 * ns > cfg.tx_antennas {
                        return Err(Error::Config(format!(
                            "methods: `{m}` needs 2·streams = {} transmit RF chains, \
                             more than the {} antennas",
                            2 * ns,
                            cfg.tx_antennas
                        )));
                    }
                    if self.receiver == Receiver::Hybrid && 2 * ns > cfg.rx_antennas {
                        return Err(Error::Config(format!(
                            "methods: `{m}` with a hybrid receiver needs 2·streams = {} \
                             receive RF chains, more than the {} antennas",
                            2 * ns,
                            cfg.rx_antennas
                        )));
                    }
                }
                MethodId::ExhaustiveB1 => {
                    if cfg.tx_antennas * cfg.tx_rf_chains > 16 {
                        return Err(Error::Config(format!(
                            "methods: `{m}` enumerates 2^(N·N_RF) matrices and is capped \
                             at N·N_RF ≤ 16, got {}",
                            cfg.tx_antennas * cfg.tx_rf_chains
                        )));
                    }
                    if self.receiver != Receiver::Optimal {
                        return Err(Error::Config(format!(
                            "methods: `{m}` scores candidates against the optimal receiver; \
                             set receiver = \"optimal\" so other methods are comparable"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn validate_miso(&self) -> Result<()> {
        let cfg = &self.cfg;
        if cfg.rx_antennas != 1 || cfg.streams_per_user != 1 {
            return Err(Error::Config(
                "rx_antennas/streams_per_user: mu_miso users have one antenna and one stream"
                    .into(),
            ));
        }
        if self.receiver == Receiver::Optimal {
            return Err(Error::Config(
                "receiver: `optimal` applies to p2p_mimo sweeps only".into(),
            ));
        }
        for m in &self.methods {
            match m {
                MethodId::FdOptimal | MethodId::ExactRealization2ns | MethodId::ExhaustiveB1 => {
                    return Err(Error::Config(format!(
                        "methods: `{m}` applies to p2p_mimo sweeps only"
                    )));
                }
                MethodId::HybridProposed
                | MethodId::HybridProposedQuantized(_)
                | MethodId::HybridFiniteRes(_)
                    if cfg.tx_rf_chains < cfg.users => {
                        return Err(Error::Config(format!(
                            "tx_rf_chains: `{m}` needs at least one RF chain per user, \
                             got {} for {} users",
                            cfg.tx_rf_chains, cfg.users
                        )));
                    }
                _ => {}
            }
        }
        Ok(())
    }
}
