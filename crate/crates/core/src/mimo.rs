//! Point-to-point hybrid design: RF-stage coordinate descent on a log-det
//! objective, waterfilled digital precoding, and MMSE digital combining.

use crate::hybrid::{
    log2_det_identity_plus, quantize_beamformer, rate_general, rate_p2p, realize_fully_digital,
    DesignReport,
    HybridCombiner, HybridPrecoder, PhaseSet, SystemConfig, DEFAULT_RANK_TOL,
};
use crate::numerics::{inv_sqrt_psd, solve, svd, waterfill, ComplexMatrix};
use crate::{Error, Result, Scalar};
use num_complex::Complex;

// ── objective decomposition ──────────────────────────────────────────────────

/// Exact split of the RF objective `log2|I + s·VᴴFV|` around entry (row, col):
/// `objective = logdet_cj + log2(1 + ζ + 2Re{conj(v_ij)·η})` whenever the
/// probed entry has unit modulus.
#[derive(Debug, Clone)]
pub struct ObjectiveDecomposition<T> {
    /// `log2|C_j|` where `C_j = I + s·V̄ᴴFV̄` and `V̄` drops column `col`.
    pub logdet_cj: T,
    /// Quadratic-form matrix `G_j = s·F − s²·(FV̄)·C_j⁻¹·(FV̄)ᴴ`.
    pub g: ComplexMatrix<T>,
    /// Linear coefficient of the probed entry in `v_jᴴG_jv_j`.
    pub eta: Complex<T>,
    /// Entry-independent part of `v_jᴴG_jv_j` for unit-modulus entries.
    pub zeta: T,
}

/// Builds `C_j`, `G_j`, and the per-entry (η, ζ) pair for one RF column.
fn column_quadratic<T: Scalar>(
    f: &ComplexMatrix<T>,
    v: &ComplexMatrix<T>,
    scale: T,
    col: usize,
) -> Result<(T, ComplexMatrix<T>)> {
    let stripped = v.drop_column(col);
    if stripped.cols() == 0 {
        // Single-chain case: nothing held fixed, so C_j = I and G_j = s·F.
        return Ok((T::zero(), f.scale_real(scale)));
    }
    let fv = f.matmul(&stripped);
    let mut c = stripped.adjoint().matmul(&fv).scale_real(scale);
    c.add_scaled_identity(T::one());
    let logdet_cj = crate::numerics::log2_det(&c, "held-fixed column Gram")?;
    // G_j = s·F − s²·(FV̄)·C_j⁻¹·(FV̄)ᴴ.
    let x = solve(&c, &fv.adjoint(), "held-fixed column Gram")?;
    let correction = fv.matmul(&x).scale_real(scale * scale);
    Ok((logdet_cj, f.scale_real(scale).sub(&correction)))
}

/// Evaluates the objective split at entry (`row`, `col`) of the RF matrix `v`.
pub fn decompose_objective<T: Scalar>(
    f: &ComplexMatrix<T>,
    v: &ComplexMatrix<T>,
    scale: T,
    row: usize,
    col: usize,
) -> Result<ObjectiveDecomposition<T>> {
    if f.rows() != f.cols() || f.rows() != v.rows() {
        return Err(Error::Dimension(format!(
            "objective matrix is {}x{}, RF stage has {} rows",
            f.rows(),
            f.cols(),
            v.rows()
        )));
    }
    if row >= v.rows() || col >= v.cols() {
        return Err(Error::Dimension(format!(
            "probe entry ({row}, {col}) outside {}x{} RF stage",
            v.rows(),
            v.cols()
        )));
    }
    let (logdet_cj, g) = column_quadratic(f, v, scale, col)?;
    let vj = v.col(col);
    // r = (G·v_j)_row, q = v_jᴴ·G·v_j, both with the current column values.
    let mut r = Complex::new(T::zero(), T::zero());
    for (k, value) in vj.iter().enumerate() {
        r += g[(row, k)] * value;
    }
    let mut q = T::zero();
    for i in 0..v.rows() {
        let mut gv = Complex::new(T::zero(), T::zero());
        for (k, value) in vj.iter().enumerate() {
            gv += g[(i, k)] * value;
        }
        q += (vj[i].conj() * gv).re;
    }
    let g_rr = g[(row, row)].re;
    let entry = vj[row];
    let eta = r - entry.scale(g_rr);
    let zeta = q - T::lit(2.0) * (entry.conj() * r).re + T::lit(2.0) * g_rr;
    Ok(ObjectiveDecomposition {
        logdet_cj,
        g,
        eta,
        zeta,
    })
}

// ── RF coordinate descent ────────────────────────────────────────────────────

/// Sweep limits for the RF coordinate descent.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentOptions<T> {
    /// Hard cap on full sweeps over all RF entries.
    pub max_sweeps: usize,
    /// Stop when the sweep-end objective changes by less than this fraction.
    pub rel_tol: T,
}

impl<T: Scalar> Default for DescentOptions<T> {
    fn default() -> Self {
        Self {
            max_sweeps: 100,
            rel_tol: T::lit(1e-6),
        }
    }
}

/// Result of one coordinate-descent run.
#[derive(Debug, Clone)]
pub struct DescentOutcome<T> {
    /// Unit-modulus RF matrix after the final sweep.
    pub rf: ComplexMatrix<T>,
    /// Objective after every single-entry update, preceded by the start value.
    pub trace: Vec<T>,
    /// Full sweeps executed.
    pub sweeps: usize,
}

/// Maximizes `log2|I + s·VᴴFV|` over unit-modulus `V` one entry at a time.
///
/// Starts from the all-ones matrix and visits entries column by column. Each
/// update is the closed-form argmax of the objective in that entry alone, so
/// the recorded trace never decreases. With `alphabet` set, updates are
/// restricted to the finite phase set (the all-ones start is a member, which
/// keeps the monotonicity argument intact). Sweeps stop when the directly
/// recomputed objective stalls or `max_sweeps` is reached.
pub fn rf_coordinate_descent<T: Scalar>(
    f: &ComplexMatrix<T>,
    scale: T,
    chains: usize,
    alphabet: Option<&PhaseSet<T>>,
    options: &DescentOptions<T>,
) -> Result<DescentOutcome<T>> {
    if f.rows() != f.cols() {
        return Err(Error::Dimension(format!(
            "objective matrix must be square, got {}x{}",
            f.rows(),
            f.cols()
        )));
    }
    if chains == 0 {
        return Err(Error::Config("RF chain count must be ≥ 1".into()));
    }
    f.ensure_finite("coordinate-descent objective matrix")?;
    if !(scale > T::zero() && scale.is_finite()) {
        return Err(Error::Config("descent scale must be finite and > 0".into()));
    }
    let n = f.rows();
    let mut v = ComplexMatrix::ones(n, chains);
    let objective = |v: &ComplexMatrix<T>| -> Result<T> {
        let m = v.adjoint().matmul(&f.matmul(v)).scale_real(scale);
        log2_det_identity_plus(&m)
    };
    let mut trace = Vec::with_capacity(1 + options.max_sweeps * n * chains);
    let mut previous = objective(&v)?;
    trace.push(previous);
    let mut sweeps = 0;
    let two = T::lit(2.0);

    for _ in 0..options.max_sweeps {
        sweeps += 1;
        for j in 0..chains {
            let (logdet_cj, g) = column_quadratic(f, &v, scale, j)?;
            // q = v_jᴴ·G·v_j, maintained incrementally through the column.
            let mut q = T::zero();
            for i in 0..n {
                let mut gv = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    gv += g[(i, k)] * v[(k, j)];
                }
                q += (v[(i, j)].conj() * gv).re;
            }
            for i in 0..n {
                // Fresh row dot against the current column values.
                let mut r = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    r += g[(i, k)] * v[(k, j)];
                }
                let g_ii = g[(i, i)].re;
                let current = v[(i, j)];
                let eta = r - current.scale(g_ii);
                let update = if eta.re == T::zero() && eta.im == T::zero() {
                    // Objective is flat in this entry.
                    match alphabet {
                        Some(_) => current,
                        None => Complex::new(T::one(), T::zero()),
                    }
                } else {
                    match alphabet {
                        Some(set) => set.quantize(eta),
                        None => eta.scale(T::one() / eta.norm()),
                    }
                };
                let delta = update - current;
                q += two * (delta.conj() * r).re + g_ii * delta.norm_sqr();
                v[(i, j)] = update;
                trace.push(logdet_cj + (T::one() + q).log2());
            }
        }
        let value = objective(&v)?;
        let stalled = (value - previous).abs() <= options.rel_tol * value.abs().max(T::one());
        previous = value;
        if stalled {
            break;
        }
    }
    Ok(DescentOutcome {
        rf: v,
        trace,
        sweeps,
    })
}

// ── digital stages ───────────────────────────────────────────────────────────

/// Waterfilled digital precoder behind a fixed RF stage.
///
/// Whitens the RF Gram (`V_D = Q^{-1/2}·U_e·Γ`), pours the power budget over
/// the effective channel's top modes, and scales each mode so the hybrid
/// product meets the transmit-power budget exactly.
pub fn digital_precoder_waterfill<T: Scalar>(
    h: &ComplexMatrix<T>,
    v_rf: &ComplexMatrix<T>,
    streams: usize,
    power: T,
    noise: T,
) -> Result<ComplexMatrix<T>> {
    if h.cols() != v_rf.rows() {
        return Err(Error::Dimension(format!(
            "channel has {} transmit antennas, RF stage has {}",
            h.cols(),
            v_rf.rows()
        )));
    }
    if streams > v_rf.cols() {
        return Err(Error::Dimension(format!(
            "{streams} streams through {} RF chains",
            v_rf.cols()
        )));
    }
    let q = v_rf.adjoint().matmul(v_rf);
    let whitener = inv_sqrt_psd(&q, T::lit(1e-12))?;
    let h_eff = h.matmul(&v_rf.matmul(&whitener));
    let modes = svd(&h_eff);
    if modes.s.len() < streams {
        return Err(Error::Dimension(format!(
            "effective channel supports {} modes, {streams} streams requested",
            modes.s.len()
        )));
    }
    let s_max = modes.s[0];
    if s_max == T::zero() {
        return Err(Error::Numerical(
            "effective channel is numerically zero".into(),
        ));
    }
    // Mode cost is inverse squared gain; flooring keeps dead modes finite
    // (the waterfill then prices them out naturally).
    let floor = s_max * s_max * T::lit(1e-30);
    let costs: Vec<T> = modes.s[..streams]
        .iter()
        .map(|&s| T::one() / (s * s).max(floor))
        .collect();
    let unit_weights = vec![T::one(); streams];
    let filled = waterfill(&costs, &unit_weights, noise, power);
    let directions = whitener.matmul(&modes.v.columns(0, streams));
    let mut baseband = directions;
    for k in 0..streams {
        let gain = if filled.powers[k] > T::zero() {
            filled.powers[k].sqrt() / modes.s[k]
        } else {
            T::zero()
        };
        for i in 0..baseband.rows() {
            baseband[(i, k)] = baseband[(i, k)].scale(gain);
        }
    }
    Ok(baseband)
}

/// MMSE digital combiner behind a fixed receive RF stage.
pub fn mmse_digital_combiner<T: Scalar>(
    h: &ComplexMatrix<T>,
    v_total: &ComplexMatrix<T>,
    w_rf: &ComplexMatrix<T>,
    noise: T,
) -> Result<ComplexMatrix<T>> {
    if w_rf.rows() != h.rows() {
        return Err(Error::Dimension(format!(
            "receive RF stage has {} antennas, channel has {}",
            w_rf.rows(),
            h.rows()
        )));
    }
    let e = w_rf.adjoint().matmul(&h.matmul(v_total));
    let mut j = e
        .matmul(&e.adjoint())
        .add(&w_rf.adjoint().matmul(w_rf).scale_real(noise));
    // With more chains than effective streams the descent may park two RF
    // columns on the same phase profile, which zeroes an eigenvalue of this
    // Gram. The system stays consistent (the null space is also null for
    // W_RF), so a relative ridge picks one of the equivalent solutions.
    let ridge = j.trace().re / T::lit(j.rows() as f64) * T::lit(1e-12);
    j.add_scaled_identity(ridge);
    solve(&j, &e, "combiner MMSE matrix")
}

// ── fully digital reference ──────────────────────────────────────────────────

/// Capacity-achieving fully digital transmit design for one link.
#[derive(Debug, Clone)]
pub struct FdBaseline<T> {
    /// Transmit matrix, antennas × streams, meeting the power budget.
    pub precoder: ComplexMatrix<T>,
    /// Rate with an ideal receiver, in bits/s/Hz.
    pub rate: T,
}

/// Waterfills the channel's top `streams` eigenmodes at full digital freedom.
pub fn fd_p2p_baseline<T: Scalar>(
    h: &ComplexMatrix<T>,
    streams: usize,
    power: T,
    noise: T,
) -> Result<FdBaseline<T>> {
    let modes = svd(h);
    if modes.s.len() < streams {
        return Err(Error::Dimension(format!(
            "channel supports {} modes, {streams} streams requested",
            modes.s.len()
        )));
    }
    let s_max = modes.s[0];
    if s_max == T::zero() {
        return Err(Error::Numerical("channel is numerically zero".into()));
    }
    let floor = s_max * s_max * T::lit(1e-30);
    let costs: Vec<T> = modes.s[..streams]
        .iter()
        .map(|&s| T::one() / (s * s).max(floor))
        .collect();
    let unit_weights = vec![T::one(); streams];
    let filled = waterfill(&costs, &unit_weights, noise, power);
    let mut precoder = modes.v.columns(0, streams);
    let mut rate = T::zero();
    for k in 0..streams {
        let received = filled.powers[k];
        rate += (T::one() + received / noise).log2();
        let gain = if received > T::zero() {
            received.sqrt() / modes.s[k]
        } else {
            T::zero()
        };
        for i in 0..precoder.rows() {
            precoder[(i, k)] = precoder[(i, k)].scale(gain);
        }
    }
    Ok(FdBaseline { precoder, rate })
}

// ── full designs ─────────────────────────────────────────────────────────────

fn check_p2p_inputs<T: Scalar>(cfg: &SystemConfig<T>, h: &ComplexMatrix<T>) -> Result<()> {
    cfg.validate()?;
    if cfg.users != 1 {
        return Err(Error::Config(format!(
            "point-to-point design requires one user, got {}",
            cfg.users
        )));
    }
    if h.rows() != cfg.rx_antennas || h.cols() != cfg.tx_antennas {
        return Err(Error::Dimension(format!(
            "channel is {}x{}, config says {}x{}",
            h.rows(),
            h.cols(),
            cfg.rx_antennas,
            cfg.tx_antennas
        )));
    }
    Ok(())
}

pub(crate) fn phase_alphabet<T: Scalar>(bits: u32) -> Result<Option<PhaseSet<T>>> {
    if bits == 0 {
        Ok(None)
    } else {
        PhaseSet::new(bits).map(Some)
    }
}

/// Pads an exactly realized pair out to the configured chain count with inert
/// chains: all-ones RF columns driven by zero baseband rows.
fn pad_chains<T: Scalar>(pair: HybridPrecoder<T>, chains: usize) -> Result<HybridPrecoder<T>> {
    let used = pair.rf.cols();
    if used == chains {
        return Ok(pair);
    }
    debug_assert!(used < chains);
    let n = pair.rf.rows();
    let streams = pair.baseband.cols();
    let mut rf = ComplexMatrix::ones(n, chains);
    for j in 0..used {
        rf.set_col(j, pair.rf.col(j));
    }
    let mut baseband = ComplexMatrix::zeros(chains, streams);
    for j in 0..streams {
        for i in 0..used {
            baseband[(i, j)] = pair.baseband[(i, j)];
        }
    }
    HybridPrecoder::new(rf, baseband)
}

/// Transmit-side design: exact realization when the chain budget allows two
/// chains per stream at infinite resolution, coordinate descent otherwise.
fn design_tx_side<T: Scalar>(
    cfg: &SystemConfig<T>,
    h: &ComplexMatrix<T>,
    options: &DescentOptions<T>,
    traces: &mut Vec<Vec<T>>,
) -> Result<HybridPrecoder<T>> {
    let ns = cfg.streams_total();
    if cfg.phase_bits == 0 && cfg.tx_rf_chains >= 2 * ns {
        let reference = fd_p2p_baseline(h, ns, cfg.power, cfg.noise)?;
        let pair = realize_fully_digital(&reference.precoder, T::lit(DEFAULT_RANK_TOL))?;
        return pad_chains(pair, cfg.tx_rf_chains);
    }
    let alphabet = phase_alphabet::<T>(cfg.phase_bits)?;
    let f = h.adjoint().matmul(h);
    let chain_count = T::lit((cfg.tx_antennas * cfg.tx_rf_chains) as f64);
    let scale = cfg.power / (chain_count * cfg.noise);
    let descent = rf_coordinate_descent(&f, scale, cfg.tx_rf_chains, alphabet.as_ref(), options)?;
    traces.push(descent.trace);
    let baseband = digital_precoder_waterfill(h, &descent.rf, ns, cfg.power, cfg.noise)?;
    HybridPrecoder::new(descent.rf, baseband)
}

/// Receive-side design for a fixed transmit matrix.
fn design_rx_side<T: Scalar>(
    cfg: &SystemConfig<T>,
    h: &ComplexMatrix<T>,
    v_total: &ComplexMatrix<T>,
    options: &DescentOptions<T>,
    traces: &mut Vec<Vec<T>>,
) -> Result<HybridCombiner<T>> {
    let ns = cfg.streams_total();
    if cfg.phase_bits == 0 && cfg.rx_rf_chains >= 2 * ns {
        // Any basis of the channel's top receive subspace is rate-optimal
        // under the projection receiver, and it is always full rank.
        let modes = svd(h);
        let target = modes.u.columns(0, ns);
        let pair = realize_fully_digital(&target, T::lit(DEFAULT_RANK_TOL))?;
        let padded = pad_chains(pair, cfg.rx_rf_chains)?;
        return HybridCombiner::new(padded.rf, padded.baseband);
    }
    let alphabet = phase_alphabet::<T>(cfg.phase_bits)?;
    let hv = h.matmul(v_total);
    let f = hv.matmul(&hv.adjoint());
    let antennas = T::lit(cfg.rx_antennas as f64);
    let scale = T::one() / (antennas * cfg.noise);
    let descent = rf_coordinate_descent(&f, scale, cfg.rx_rf_chains, alphabet.as_ref(), options)?;
    traces.push(descent.trace);
    let baseband = mmse_digital_combiner(h, v_total, &descent.rf, cfg.noise)?;
    HybridCombiner::new(descent.rf, baseband)
}

/// Designs both sides of a point-to-point link.
pub fn design_hybrid_mimo<T: Scalar>(
    cfg: &SystemConfig<T>,
    h: &ComplexMatrix<T>,
    options: &DescentOptions<T>,
) -> Result<DesignReport<T>> {
    check_p2p_inputs(cfg, h)?;
    let mut traces = Vec::new();
    let precoder = design_tx_side(cfg, h, options, &mut traces)?;
    let v_total = precoder.total();
    let combiner = design_rx_side(cfg, h, &v_total, options, &mut traces)?;
    // The covariance-form evaluator tolerates zero-power streams, whose
    // combiner columns vanish and would make the plain projector Gram
    // singular.
    let rate = rate_general(
        core::slice::from_ref(h),
        &precoder,
        Some(core::slice::from_ref(&combiner)),
        cfg.noise,
        &cfg.weights,
    )?
    .per_user[0];
    let weighted = cfg.weights[0] * rate;
    Ok(DesignReport {
        precoder,
        combiners: vec![combiner],
        per_user_rates: vec![rate],
        weighted_sum_rate: weighted,
        objective_traces: traces,
        iterations: 1,
    })
}

/// Transmit-side-only design, evaluated with an ideal (fully digital) receiver.
pub fn design_p2p_precoder<T: Scalar>(
    cfg: &SystemConfig<T>,
    h: &ComplexMatrix<T>,
    options: &DescentOptions<T>,
) -> Result<DesignReport<T>> {
    check_p2p_inputs(cfg, h)?;
    let mut traces = Vec::new();
    let precoder = design_tx_side(cfg, h, options, &mut traces)?;
    let v_total = precoder.total();
    let identity = ComplexMatrix::identity(cfg.rx_antennas);
    let rate = rate_p2p(h, &v_total, &identity, cfg.noise)?;
    let weighted = cfg.weights[0] * rate;
    Ok(DesignReport {
        precoder,
        combiners: Vec::new(),
        per_user_rates: vec![rate],
        weighted_sum_rate: weighted,
        objective_traces: traces,
        iterations: 1,
    })
}

/// Re-quantizes a finished design's RF stages and rebuilds the digital stages.
///
/// This is the quantize-after-design protocol: the infinite-resolution RF
/// solution is snapped to the alphabet, then the digital precoder (and the
/// combiner, when present) is recomputed against the snapped RF stages.
pub fn quantize_p2p_design<T: Scalar>(
    cfg: &SystemConfig<T>,
    h: &ComplexMatrix<T>,
    report: &DesignReport<T>,
    set: &PhaseSet<T>,
) -> Result<DesignReport<T>> {
    check_p2p_inputs(cfg, h)?;
    let ns = cfg.streams_total();
    let rf_q = quantize_beamformer(&report.precoder.rf, set);
    let baseband = digital_precoder_waterfill(h, &rf_q, ns, cfg.power, cfg.noise)?;
    let precoder = HybridPrecoder::new(rf_q, baseband)?;
    let v_total = precoder.total();
    let (combiners, rate) = match report.combiners.first() {
        Some(combiner) => {
            let w_rf_q = quantize_beamformer(&combiner.rf, set);
            let w_bb = mmse_digital_combiner(h, &v_total, &w_rf_q, cfg.noise)?;
            let quantized = HybridCombiner::new(w_rf_q, w_bb)?;
            // Covariance form again: zero-power streams leave zero combiner
            // columns behind.
            let rate = rate_general(
                core::slice::from_ref(h),
                &precoder,
                Some(core::slice::from_ref(&quantized)),
                cfg.noise,
                &cfg.weights,
            )?
            .per_user[0];
            (vec![quantized], rate)
        }
        None => {
            let identity = ComplexMatrix::identity(cfg.rx_antennas);
            let rate = rate_p2p(h, &v_total, &identity, cfg.noise)?;
            (Vec::new(), rate)
        }
    };
    let weighted = cfg.weights[0] * rate;
    Ok(DesignReport {
        precoder,
        combiners,
        per_user_rates: vec![rate],
        weighted_sum_rate: weighted,
        objective_traces: Vec::new(),
        iterations: 1,
    })
}

// ── exhaustive reference for one-bit shifters ────────────────────────────────

/// Brute-force one-bit transmit RF search, evaluated with an ideal receiver.
///
/// Enumerates every ±1 RF matrix, builds the waterfilled digital stage for
/// each, and keeps the best rate. Refuses problems with more than 16 RF
/// entries; cost doubles per entry.
pub fn exhaustive_rf_search<T: Scalar>(
    h: &ComplexMatrix<T>,
    chains: usize,
    streams: usize,
    power: T,
    noise: T,
) -> Result<(HybridPrecoder<T>, T)> {
    let n = h.cols();
    let entries = n * chains;
    if entries > 16 {
        return Err(Error::Unsupported(format!(
            "exhaustive search over {entries} RF entries (limit 16)"
        )));
    }
    let identity = ComplexMatrix::identity(h.rows());
    let mut best: Option<(HybridPrecoder<T>, T)> = None;
    let mut last_error = None;
    for mask in 0u32..(1u32 << entries) {
        let rf = ComplexMatrix::from_fn(n, chains, |i, j| {
            let bit = (mask >> (j * n + i)) & 1;
            if bit == 0 {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(-T::one(), T::zero())
            }
        });
        let candidate = digital_precoder_waterfill(h, &rf, streams, power, noise)
            .and_then(|bb| HybridPrecoder::new(rf, bb))
            .and_then(|pair| {
                let rate = rate_p2p(h, &pair.total(), &identity, noise)?;
                Ok((pair, rate))
            });
        match candidate {
            Ok((pair, rate)) => {
                let better = match &best {
                    Some((_, incumbent)) => rate > *incumbent,
                    None => true,
                };
                if better {
                    best = Some((pair, rate));
                }
            }
            Err(e) => last_error = Some(e),
        }
    }
    best.ok_or_else(|| {
        last_error.unwrap_or_else(|| Error::Numerical("no feasible RF candidate".into()))
    })
}
