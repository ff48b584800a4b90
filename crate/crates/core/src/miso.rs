//! Multi-user single-antenna downlink design: RF-stage descent on a
//! power-margin proxy, zero-forcing digital stage, and waterfilled per-user
//! powers, iterated until the weighted sum rate settles.

use crate::channel::ChannelRealization;
use crate::hybrid::{
    check_unit_modulus, quantize_beamformer, DesignReport, HybridPrecoder, PhaseSet, SystemConfig,
};
use crate::mimo::{phase_alphabet, DescentOptions, DescentOutcome};
use crate::numerics::{lu, waterfill, ComplexMatrix};
use crate::{Error, Result, Scalar};
use num_complex::Complex;

// ── proxy objective ──────────────────────────────────────────────────────────

/// Power-margin proxy `f̂ = N·tr[(H̃·V·Vᴴ·H̃ᴴ)⁻¹]` minimized by the RF descent.
///
/// Smaller values mean the zero-forcing stage behind `V` spends less transmit
/// power to hit the per-user targets encoded in the row scaling of `H̃`.
pub fn fhat<T: Scalar>(h_tilde: &ComplexMatrix<T>, v: &ComplexMatrix<T>) -> Result<T> {
    if h_tilde.cols() != v.rows() {
        return Err(Error::Dimension(format!(
            "channel has {} transmit antennas, RF stage has {}",
            h_tilde.cols(),
            v.rows()
        )));
    }
    let y = h_tilde.matmul(v);
    let a = y.matmul(&y.adjoint());
    let factors = lu(&a, "effective channel Gram")?;
    let inverse = factors.solve(&ComplexMatrix::identity(a.rows()));
    let mut trace = T::zero();
    for i in 0..a.rows() {
        trace += inverse[(i, i)].re;
    }
    Ok(T::lit(h_tilde.cols() as f64) * trace)
}

/// Exact split of the proxy around one RF entry:
/// `f̂ = N·(trace_a_inv − B/D)` with `B = ζ_B + 2Re{conj(v_ij)·η_B}` and
/// `D = 1 + ζ_D + 2Re{conj(v_ij)·η_D}` whenever the entry has unit modulus.
#[derive(Debug, Clone)]
pub struct FhatDecomposition<T> {
    /// `tr(A_j⁻¹)` where `A_j` drops the probed column from the Gram.
    pub trace_a_inv: T,
    /// Linear coefficient of the probed entry in the numerator form.
    pub eta_b: Complex<T>,
    /// Entry-independent part of the numerator for unit-modulus entries.
    pub zeta_b: T,
    /// Linear coefficient of the probed entry in the denominator form.
    pub eta_d: Complex<T>,
    /// Entry-independent part of the denominator offset.
    pub zeta_d: T,
}

/// Per-column working set for the descent: everything that stays fixed while
/// the entries of one RF column are updated.
struct ColumnState<T> {
    trace_a_inv: T,
    /// `X = A_j⁻¹·H̃`, users × antennas.
    x: ComplexMatrix<T>,
    /// Squared norms of the columns of `X`.
    xnorms: Vec<T>,
    /// Diagonal of `H̃ᴴ·X` (real up to roundoff).
    cross: Vec<Complex<T>>,
}

fn column_state<T: Scalar>(
    h_tilde: &ComplexMatrix<T>,
    v: &ComplexMatrix<T>,
    col: usize,
) -> Result<ColumnState<T>> {
    let stripped = v.drop_column(col);
    let ybar = h_tilde.matmul(&stripped);
    let a_j = ybar.matmul(&ybar.adjoint());
    let factors = lu(&a_j, "held-fixed effective channel Gram")?;
    let inverse = factors.solve(&ComplexMatrix::identity(a_j.rows()));
    let mut trace_a_inv = T::zero();
    for i in 0..a_j.rows() {
        trace_a_inv += inverse[(i, i)].re;
    }
    let x = factors.solve(h_tilde);
    let n = h_tilde.cols();
    let mut xnorms = Vec::with_capacity(n);
    let mut cross = Vec::with_capacity(n);
    for i in 0..n {
        let xi = x.col(i);
        let hi = h_tilde.col(i);
        let mut norm = T::zero();
        let mut dot = Complex::new(T::zero(), T::zero());
        for r in 0..xi.len() {
            norm += xi[r].norm_sqr();
            dot += hi[r].conj() * xi[r];
        }
        xnorms.push(norm);
        cross.push(dot);
    }
    Ok(ColumnState {
        trace_a_inv,
        x,
        xnorms,
        cross,
    })
}

/// Evaluates the proxy split at entry (`row`, `col`) of the RF matrix `v`.
pub fn fhat_decompose<T: Scalar>(
    h_tilde: &ComplexMatrix<T>,
    v: &ComplexMatrix<T>,
    row: usize,
    col: usize,
) -> Result<FhatDecomposition<T>> {
    if h_tilde.cols() != v.rows() {
        return Err(Error::Dimension(format!(
            "channel has {} transmit antennas, RF stage has {}",
            h_tilde.cols(),
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
    let state = column_state(h_tilde, v, col)?;
    let vj = v.col(col);
    let users = h_tilde.rows();
    // w = X·v_j and y = H̃·v_j at the current column values.
    let mut w = vec![Complex::new(T::zero(), T::zero()); users];
    let mut y = vec![Complex::new(T::zero(), T::zero()); users];
    for (i, value) in vj.iter().enumerate() {
        let xi = state.x.col(i);
        let hi = h_tilde.col(i);
        for r in 0..users {
            w[r] += xi[r] * value;
            y[r] += hi[r] * value;
        }
    }
    let entry = vj[row];
    let xi = state.x.col(row);
    let hi = h_tilde.col(row);
    let mut xw = Complex::new(T::zero(), T::zero());
    let mut hw = Complex::new(T::zero(), T::zero());
    let mut wn = T::zero();
    let mut yw = Complex::new(T::zero(), T::zero());
    for r in 0..users {
        xw += xi[r].conj() * w[r];
        hw += hi[r].conj() * w[r];
        wn += w[r].norm_sqr();
        yw += y[r].conj() * w[r];
    }
    let two = T::lit(2.0);
    let eta_b = xw - entry.scale(state.xnorms[row]);
    let eta_d = hw - state.cross[row] * entry;
    let zeta_b = wn - two * (entry.conj() * eta_b).re;
    let zeta_d = yw.re - two * (entry.conj() * eta_d).re;
    Ok(FhatDecomposition {
        trace_a_inv: state.trace_a_inv,
        eta_b,
        zeta_b,
        eta_d,
        zeta_d,
    })
}

// ── stationary phases of the single-entry ratio ──────────────────────────────

/// The two stationary phases of `B(θ)/D(θ)` for an entry `e^{−jθ}`, together
/// with the intermediate quantities that define them.
#[derive(Debug, Clone)]
pub struct ThetaCandidates<T> {
    pub theta1: T,
    pub theta2: T,
    /// `c = (1 + ζ_D)·η_B − ζ_B·η_D`; stationarity reads `sin(θ+φ) = z/|c|`.
    pub c: Complex<T>,
    /// `z = Im{2·conj(η_B)·η_D}`.
    pub z: T,
    /// Phase of `c`, placed by the sign of its real part.
    pub phi: T,
}

/// Solves the stationarity condition of the single-entry ratio in closed form.
///
/// Returns a singularity error when `c` vanishes (the ratio is flat in the
/// entry; callers keep the current value), and a numerical error when the
/// sine argument exceeds 1 by more than roundoff allows, which indicates
/// inconsistent inputs.
pub fn theta_candidates<T: Scalar>(
    eta_b: Complex<T>,
    zeta_b: T,
    eta_d: Complex<T>,
    zeta_d: T,
) -> Result<ThetaCandidates<T>> {
    let c = eta_b.scale(T::one() + zeta_d) - eta_d.scale(zeta_b);
    let z = T::lit(2.0) * (eta_b.conj() * eta_d).im;
    let magnitude = c.norm();
    if magnitude == T::zero() {
        return Err(Error::Singular("flat single-entry ratio"));
    }
    let mut ratio = z / magnitude;
    if ratio.abs() > T::one() {
        if ratio.abs() - T::one() <= T::lit(1e-9) {
            ratio = ratio.signum();
        } else {
            return Err(Error::Numerical(format!(
                "stationarity sine argument {:?} out of range",
                ratio
            )));
        }
    }
    let half_turn = T::PI();
    let base = (c.im / magnitude).asin();
    let phi = if c.re >= T::zero() {
        base
    } else {
        half_turn - base
    };
    let shifted = ratio.asin();
    Ok(ThetaCandidates {
        theta1: -phi + shifted,
        theta2: half_turn - phi - shifted,
        c,
        z,
        phi,
    })
}

// ── RF descent ───────────────────────────────────────────────────────────────

/// Minimizes the proxy `f̂` over unit-modulus `V` one entry at a time.
///
/// Starts from `init`, visits entries column by column, and sets each entry
/// to the best of the closed-form stationary phases (or the best alphabet
/// member in finite-resolution mode), never below the current value, so the
/// recorded trace never increases. Needs at least one more RF chain than
/// there are users, otherwise the held-fixed Gram is singular.
pub fn rf_descent_miso<T: Scalar>(
    h_tilde: &ComplexMatrix<T>,
    init: &ComplexMatrix<T>,
    alphabet: Option<&PhaseSet<T>>,
    options: &DescentOptions<T>,
) -> Result<DescentOutcome<T>> {
    let users = h_tilde.rows();
    let n = h_tilde.cols();
    if init.rows() != n {
        return Err(Error::Dimension(format!(
            "RF stage has {} rows, channel has {} transmit antennas",
            init.rows(),
            n
        )));
    }
    if init.cols() < users + 1 {
        return Err(Error::Config(format!(
            "descent needs at least {} RF chains for {users} users, got {}",
            users + 1,
            init.cols()
        )));
    }
    h_tilde.ensure_finite("descent channel")?;
    check_unit_modulus(init)?;
    let chains = init.cols();
    let mut v = init.clone();
    let scale_n = T::lit(n as f64);
    let two = T::lit(2.0);

    let mut previous = fhat(h_tilde, &v)?;
    let mut trace = Vec::with_capacity(1 + options.max_sweeps * n * chains);
    trace.push(previous);
    let mut sweeps = 0;

    for _ in 0..options.max_sweeps {
        sweeps += 1;
        for j in 0..chains {
            // Coarse alphabets can leave two held-out columns identical, which
            // makes this column's update system singular even though the full
            // objective is still well defined; skip the column and let the
            // others move first.
            let state = match column_state(h_tilde, &v, j) {
                Ok(state) => state,
                Err(Error::Singular(_)) => continue,
                Err(e) => return Err(e),
            };
            // w = X·v_j and y = H̃·v_j, kept current through the column.
            let mut w = vec![Complex::new(T::zero(), T::zero()); users];
            let mut y = vec![Complex::new(T::zero(), T::zero()); users];
            for i in 0..n {
                let value = v[(i, j)];
                let xi = state.x.col(i);
                let hi = h_tilde.col(i);
                for r in 0..users {
                    w[r] += xi[r] * value;
                    y[r] += hi[r] * value;
                }
            }
            for i in 0..n {
                let xi = state.x.col(i);
                let hi = h_tilde.col(i);
                let current = v[(i, j)];
                let mut xw = Complex::new(T::zero(), T::zero());
                let mut hw = Complex::new(T::zero(), T::zero());
                let mut wn = T::zero();
                let mut yw_re = T::zero();
                for r in 0..users {
                    xw += xi[r].conj() * w[r];
                    hw += hi[r].conj() * w[r];
                    wn += w[r].norm_sqr();
                    yw_re += (y[r].conj() * w[r]).re;
                }
                let eta_b = xw - current.scale(state.xnorms[i]);
                let eta_d = hw - state.cross[i] * current;
                let zeta_b = wn - two * (current.conj() * eta_b).re;
                let zeta_d = yw_re - two * (current.conj() * eta_d).re;
                // Ratio removed from the proxy by this entry choice; larger
                // is better.
                let gain = |u: Complex<T>| -> T {
                    let b = zeta_b + two * (u.conj() * eta_b).re;
                    let d = T::one() + zeta_d + two * (u.conj() * eta_d).re;
                    b / d
                };
                let mut best = current;
                let mut best_gain = gain(current);
                match alphabet {
                    Some(set) => {
                        for member in set.members() {
                            let g = gain(*member);
                            if g > best_gain {
                                best_gain = g;
                                best = *member;
                            }
                        }
                    }
                    None => match theta_candidates(eta_b, zeta_b, eta_d, zeta_d) {
                        Ok(candidates) => {
                            for theta in [candidates.theta1, candidates.theta2] {
                                let u = Complex::from_polar(T::one(), -theta);
                                let g = gain(u);
                                if g > best_gain {
                                    best_gain = g;
                                    best = u;
                                }
                            }
                        }
                        Err(Error::Singular(_)) => {}
                        Err(e) => return Err(e),
                    },
                }
                let delta = best - current;
                if delta.re != T::zero() || delta.im != T::zero() {
                    for r in 0..users {
                        w[r] += xi[r] * delta;
                        y[r] += hi[r] * delta;
                    }
                    v[(i, j)] = best;
                }
                let mut wn_new = T::zero();
                let mut yw_new = T::zero();
                for r in 0..users {
                    wn_new += w[r].norm_sqr();
                    yw_new += (y[r].conj() * w[r]).re;
                }
                trace.push(scale_n * (state.trace_a_inv - wn_new / (T::one() + yw_new)));
            }
        }
        let value = fhat(h_tilde, &v)?;
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

// ── zero-forcing digital stage ───────────────────────────────────────────────

/// Zero-forcing direction matrix `Ṽ = H_effᴴ·(H_eff·H_effᴴ)⁻¹`.
pub fn zf_digital<T: Scalar>(h_eff: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let gram = h_eff.matmul(&h_eff.adjoint());
    let factors = lu(&gram, "effective channel Gram")?;
    Ok(factors.solve(h_eff).adjoint())
}

/// Waterfilled per-user received powers for a fixed set of transmit
/// directions; the cost of user k is the transmit power its direction spends
/// per unit of received power.
pub fn power_alloc_zf<T: Scalar>(
    composite: &ComplexMatrix<T>,
    power: T,
    noise: T,
    weights: &[T],
) -> crate::numerics::WaterfillResult<T> {
    let users = composite.cols();
    assert_eq!(weights.len(), users, "one weight per user");
    let costs: Vec<T> = (0..users)
        .map(|k| composite.col(k).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    waterfill(&costs, weights, noise, power)
}

/// Zero-forcing design behind a fixed RF stage: directions, powers, rates.
#[derive(Debug, Clone)]
pub struct ZfOutcome<T> {
    /// Digital stage `Ṽ·diag(√p)`, RF chains × users.
    pub baseband: ComplexMatrix<T>,
    /// Received power per user.
    pub received_powers: Vec<T>,
    pub per_user_rates: Vec<T>,
    pub weighted_sum_rate: T,
}

/// Builds the full zero-forcing digital stage behind `v_rf` and prices the
/// power budget across users.
pub fn zf_with_rf<T: Scalar>(
    h: &ComplexMatrix<T>,
    v_rf: &ComplexMatrix<T>,
    power: T,
    noise: T,
    weights: &[T],
) -> Result<ZfOutcome<T>> {
    if h.cols() != v_rf.rows() {
        return Err(Error::Dimension(format!(
            "channel has {} transmit antennas, RF stage has {}",
            h.cols(),
            v_rf.rows()
        )));
    }
    if weights.len() != h.rows() {
        return Err(Error::Dimension(format!(
            "{} weights for {} users",
            weights.len(),
            h.rows()
        )));
    }
    let h_eff = h.matmul(v_rf);
    let directions = zf_digital(&h_eff)?;
    let composite = v_rf.matmul(&directions);
    let filled = power_alloc_zf(&composite, power, noise, weights);
    let users = h.rows();
    let mut baseband = directions;
    let mut per_user_rates = Vec::with_capacity(users);
    let mut weighted_sum_rate = T::zero();
    for k in 0..users {
        let p = filled.powers[k];
        let gain = p.sqrt();
        for i in 0..baseband.rows() {
            baseband[(i, k)] = baseband[(i, k)].scale(gain);
        }
        let rate = (T::one() + p / noise).log2();
        per_user_rates.push(rate);
        weighted_sum_rate += weights[k] * rate;
    }
    Ok(ZfOutcome {
        baseband,
        received_powers: filled.powers,
        per_user_rates,
        weighted_sum_rate,
    })
}

/// Fully digital zero-forcing baseline (RF stage = identity).
pub fn fd_zf_baseline<T: Scalar>(
    h: &ComplexMatrix<T>,
    power: T,
    noise: T,
    weights: &[T],
) -> Result<ZfOutcome<T>> {
    let identity = ComplexMatrix::identity(h.cols());
    zf_with_rf(h, &identity, power, noise, weights)
}

// ── RF heuristics ────────────────────────────────────────────────────────────

/// Per-user conjugate phase matching: column k carries the phases of user k's
/// channel row, so the RF stage adds that user's antenna gains coherently.
pub fn rf_channel_phase_match<T: Scalar>(h: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(h.cols(), h.rows(), |i, k| {
        let entry = h[(k, i)];
        let magnitude = entry.norm();
        if magnitude == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            entry.conj().scale(T::one() / magnitude)
        }
    })
}

/// Steers column k at the departure angle of user k's strongest path.
pub fn rf_strongest_path<T: Scalar>(
    realization: &ChannelRealization<T>,
    spacing: T,
    antennas: usize,
) -> Result<ComplexMatrix<T>> {
    let users = realization.users.len();
    if users == 0 {
        return Err(Error::Config("realization has no users".into()));
    }
    let mut rf = ComplexMatrix::zeros(antennas, users);
    for (k, user) in realization.users.iter().enumerate() {
        if user.paths.is_empty() {
            return Err(Error::Config(format!("user {k} has no paths")));
        }
        let idx = user.paths.strongest();
        let aod = user.paths.aod[idx];
        let step = T::TAU() * spacing * aod.sin();
        for n in 0..antennas {
            rf[(n, k)] = Complex::from_polar(T::one(), step * T::lit(n as f64));
        }
    }
    Ok(rf)
}

// ── full design ──────────────────────────────────────────────────────────────

/// Iteration limits for the alternating multi-user design.
#[derive(Debug, Clone, PartialEq)]
pub struct MisoOptions<T> {
    /// Sweep limits for each RF descent run.
    pub inner: DescentOptions<T>,
    /// Hard cap on outer (descent, power-allocation) rounds.
    pub max_outer: usize,
    /// Stop when the weighted sum rate changes by less than this fraction.
    pub outer_rel_tol: T,
}

impl<T: Scalar> Default for MisoOptions<T> {
    fn default() -> Self {
        Self {
            inner: DescentOptions {
                max_sweeps: 50,
                rel_tol: T::lit(1e-6),
            },
            max_outer: 30,
            outer_rel_tol: T::lit(1e-5),
        }
    }
}

fn check_miso_inputs<T: Scalar>(cfg: &SystemConfig<T>, h: &ComplexMatrix<T>) -> Result<()> {
    cfg.validate()?;
    if cfg.rx_antennas != 1 || cfg.streams_per_user != 1 {
        return Err(Error::Config(
            "multi-user design requires single-antenna users with one stream each".into(),
        ));
    }
    if h.rows() != cfg.users || h.cols() != cfg.tx_antennas {
        return Err(Error::Dimension(format!(
            "channel is {}x{}, config says {}x{}",
            h.rows(),
            h.cols(),
            cfg.users,
            cfg.tx_antennas
        )));
    }
    Ok(())
}

fn miso_report<T: Scalar>(
    rf: ComplexMatrix<T>,
    zf: ZfOutcome<T>,
    traces: Vec<Vec<T>>,
    iterations: usize,
) -> Result<DesignReport<T>> {
    let precoder = HybridPrecoder::new(rf, zf.baseband)?;
    Ok(DesignReport {
        precoder,
        combiners: Vec::new(),
        per_user_rates: zf.per_user_rates,
        weighted_sum_rate: zf.weighted_sum_rate,
        objective_traces: traces,
        iterations,
    })
}

/// Designs the multi-user downlink precoder.
///
/// With more RF chains than users, alternates between an RF descent on the
/// proxy objective (warm-started from the previous round, against a channel
/// row-weighted by the current power allocation) and a zero-forcing digital
/// stage with waterfilled powers, until the weighted sum rate settles. With
/// exactly as many chains as users the descent Gram is singular, so the RF
/// stage falls back to per-user phase matching.
pub fn design_hybrid_miso<T: Scalar>(
    cfg: &SystemConfig<T>,
    h: &ComplexMatrix<T>,
    options: &MisoOptions<T>,
) -> Result<DesignReport<T>> {
    check_miso_inputs(cfg, h)?;
    let alphabet = phase_alphabet::<T>(cfg.phase_bits)?;
    let users = cfg.users;
    let n = cfg.tx_antennas;

    if cfg.tx_rf_chains < users + 1 {
        let mut rf = rf_channel_phase_match(h);
        if let Some(set) = &alphabet {
            rf = quantize_beamformer(&rf, set);
        }
        let zf = zf_with_rf(h, &rf, cfg.power, cfg.noise, &cfg.weights)?;
        return miso_report(rf, zf, Vec::new(), 1);
    }

    // The all-ones start collapses the effective channel to rank one whenever
    // more than one user is present, leaving the descent Gram singular, so
    // start from orthogonal phase ramps instead (column j ramps at slope j;
    // column 0 is still all-ones).
    let mut v = ComplexMatrix::from_fn(n, cfg.tx_rf_chains, |i, j| {
        Complex::from_polar(
            T::one(),
            T::TAU() * T::lit((i * j) as f64) / T::lit(n as f64),
        )
    });
    if let Some(set) = &alphabet {
        v = quantize_beamformer(&v, set);
    }
    let mut powers = vec![T::one(); users];
    let mut traces = Vec::new();
    let mut previous_rate: Option<T> = None;
    let mut iterations = 0;
    let mut last: Option<(ComplexMatrix<T>, ZfOutcome<T>)> = None;
    // Dead users would put an infinite weight on their channel row; floor the
    // power used for row scaling well below any active allocation.
    let power_floor = if cfg.power > T::zero() {
        T::lit(1e-8) * cfg.power / T::lit(users as f64)
    } else {
        T::one()
    };

    for _ in 0..options.max_outer {
        iterations += 1;
        let h_tilde = ComplexMatrix::from_fn(users, n, |r, c| {
            let p = powers[r].max(power_floor);
            h[(r, c)].scale(T::one() / p.sqrt())
        });
        let outcome = rf_descent_miso(&h_tilde, &v, alphabet.as_ref(), &options.inner)?;
        v = outcome.rf;
        traces.push(outcome.trace);
        let zf = zf_with_rf(h, &v, cfg.power, cfg.noise, &cfg.weights)?;
        let rate = zf.weighted_sum_rate;
        powers.copy_from_slice(&zf.received_powers);
        last = Some((v.clone(), zf));
        let settled = match previous_rate {
            Some(prev) => (rate - prev).abs() <= options.outer_rel_tol * rate.abs().max(T::one()),
            None => false,
        };
        previous_rate = Some(rate);
        if settled {
            break;
        }
    }
    let (rf, zf) = last.expect("at least one outer round runs");
    miso_report(rf, zf, traces, iterations)
}
