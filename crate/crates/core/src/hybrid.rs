//! Beamformer data model, spectral-efficiency evaluators, the exact
//! two-chains-per-stream realization, and finite phase-shifter alphabets.

use crate::numerics::{log2_det, lu, solve, svd, ComplexMatrix};
use crate::{Error, Result, Scalar};
use num_complex::Complex;

/// Default numerical-rank tolerance for [`realize_fully_digital`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Scenario dimensions and physical parameters shared by all designs.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<T> {
    /// Transmit (base station) antennas N.
    pub tx_antennas: usize,
    /// Receive antennas per user M (1 in the multi-user MISO scenario).
    pub rx_antennas: usize,
    /// Number of users K.
    pub users: usize,
    /// Data streams per user d.
    pub streams_per_user: usize,
    /// Transmit-side RF chains.
    pub tx_rf_chains: usize,
    /// Receive-side RF chains per user.
    pub rx_rf_chains: usize,
    /// Total transmit power budget (linear).
    pub power: T,
    /// Noise power σ² (linear).
    pub noise: T,
    /// Per-user priority weights β_k, all positive.
    pub weights: Vec<T>,
    /// Phase-shifter resolution in bits; 0 means infinite resolution.
    pub phase_bits: u32,
    /// Scattering paths per user channel.
    pub paths: usize,
    /// Antenna spacing over wavelength.
    pub spacing: T,
}

impl<T: Scalar> SystemConfig<T> {
    /// Total stream count `Ns = K·d`.
    pub fn streams_total(&self) -> usize {
        self.users * self.streams_per_user
    }

    /// Checks every documented constraint, with a field-level message.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.tx_antennas == 0 || self.rx_antennas == 0 {
            return fail("antenna counts must be ≥ 1".into());
        }
        if self.users == 0 || self.streams_per_user == 0 {
            return fail("users and streams_per_user must be ≥ 1".into());
        }
        let ns = self.streams_total();
        if ns > self.tx_rf_chains {
            return fail(format!(
                "total streams {ns} exceed tx_rf_chains {}",
                self.tx_rf_chains
            ));
        }
        if self.tx_rf_chains > self.tx_antennas {
            return fail(format!(
                "tx_rf_chains {} exceed tx_antennas {}",
                self.tx_rf_chains, self.tx_antennas
            ));
        }
        if self.streams_per_user > self.rx_rf_chains {
            return fail(format!(
                "streams_per_user {} exceeds rx_rf_chains {}",
                self.streams_per_user, self.rx_rf_chains
            ));
        }
        if self.rx_rf_chains > self.rx_antennas {
            return fail(format!(
                "rx_rf_chains {} exceed rx_antennas {}",
                self.rx_rf_chains, self.rx_antennas
            ));
        }
        if !(self.power >= T::zero() && self.power.is_finite()) {
            return fail("power must be finite and ≥ 0".into());
        }
        if !(self.noise > T::zero() && self.noise.is_finite()) {
            return fail("noise must be finite and > 0".into());
        }
        if self.weights.len() != self.users {
            return fail(format!(
                "weights length {} does not match users {}",
                self.weights.len(),
                self.users
            ));
        }
        if !self
            .weights
            .iter()
            .all(|b| *b > T::zero() && b.is_finite())
        {
            return fail("weights must be finite and > 0".into());
        }
        if self.paths == 0 {
            return fail("paths must be ≥ 1".into());
        }
        if !(self.spacing > T::zero() && self.spacing.is_finite()) {
            return fail("spacing must be finite and > 0".into());
        }
        Ok(())
    }
}

// ── finite phase alphabet ────────────────────────────────────────────────────

/// Finite phase-shifter alphabet `{e^{j·2π·m/2^b}}` for b-bit shifters.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSet<T> {
    bits: u32,
    members: Vec<Complex<T>>,
}

impl<T: Scalar> PhaseSet<T> {
    /// Builds the 2^b-member alphabet; `bits` must lie in 1..=16.
    ///
    /// Members at quarter-turn multiples are snapped to exact ±1/±i, and the
    /// rest use signed phase residues, so the set is closed under conjugation.
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(Error::Config(format!(
                "phase bits must be in 1..=16, got {bits}"
            )));
        }
        let count = 1usize << bits;
        let members = (0..count)
            .map(|m| {
                if 4 * m % count == 0 {
                    // Exact axis values keep 1- and 2-bit alphabets exact.
                    match 4 * m / count {
                        0 => Complex::new(T::one(), T::zero()),
                        1 => Complex::new(T::zero(), T::one()),
                        2 => Complex::new(-T::one(), T::zero()),
                        _ => Complex::new(T::zero(), -T::one()),
                    }
                } else {
                    // Signed residue keeps conjugate pairs bit-exact.
                    let signed = if 2 * m > count {
                        m as f64 - count as f64
                    } else {
                        m as f64
                    };
                    let angle = T::TAU() * T::lit(signed) / T::lit(count as f64);
                    Complex::new(angle.cos(), angle.sin())
                }
            })
            .collect();
        Ok(Self { bits, members })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Alphabet members in exponent order `m = 0, 1, …, 2^b − 1`.
    pub fn members(&self) -> &[Complex<T>] {
        &self.members
    }

    /// Index of the member nearest in angle to `z`; `z = 0` maps to member 0.
    ///
    /// Nearest in angle equals the member maximizing `Re{conj(member)·z}`;
    /// exact ties resolve to the smaller exponent.
    pub fn quantize_index(&self, z: Complex<T>) -> usize {
        let mut best = 0;
        let mut best_score = T::neg_infinity();
        for (m, member) in self.members.iter().enumerate() {
            // Re{conj(w)·z} = w.re·z.re + w.im·z.im.
            let score = member.re * z.re + member.im * z.im;
            if score > best_score {
                best_score = score;
                best = m;
            }
        }
        best
    }

    /// Value of the member nearest in angle to `z`.
    pub fn quantize(&self, z: Complex<T>) -> Complex<T> {
        self.members[self.quantize_index(z)]
    }
}

/// Quantizes every entry of an RF beamformer to the phase alphabet.
pub fn quantize_beamformer<T: Scalar>(
    m: &ComplexMatrix<T>,
    set: &PhaseSet<T>,
) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| set.quantize(m[(i, j)]))
}

// ── beamformer pairs ─────────────────────────────────────────────────────────

/// Transmit-side hybrid pair: unit-modulus RF stage and digital baseband stage.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPrecoder<T> {
    /// Analog stage, antennas × RF chains; every entry has unit modulus.
    pub rf: ComplexMatrix<T>,
    /// Digital stage, RF chains × streams.
    pub baseband: ComplexMatrix<T>,
}

/// Receive-side hybrid pair for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridCombiner<T> {
    /// Analog stage, antennas × RF chains; every entry has unit modulus.
    pub rf: ComplexMatrix<T>,
    /// Digital stage, RF chains × streams.
    pub baseband: ComplexMatrix<T>,
}

pub(crate) fn check_unit_modulus<T: Scalar>(rf: &ComplexMatrix<T>) -> Result<()> {
    let one = T::one();
    let tol = T::lit(1e-9);
    for j in 0..rf.cols() {
        for z in rf.col(j) {
            if (z.norm() - one).abs() > tol {
                return Err(Error::Config(
                    "RF stage entries must have unit modulus".into(),
                ));
            }
        }
    }
    Ok(())
}

impl<T: Scalar> HybridPrecoder<T> {
    /// Validates dimensions and the unit-modulus RF constraint.
    pub fn new(rf: ComplexMatrix<T>, baseband: ComplexMatrix<T>) -> Result<Self> {
        if rf.cols() != baseband.rows() {
            return Err(Error::Dimension(format!(
                "RF stage has {} chains but baseband has {} rows",
                rf.cols(),
                baseband.rows()
            )));
        }
        check_unit_modulus(&rf)?;
        Ok(Self { rf, baseband })
    }

    /// Effective transmit matrix `V_RF · V_D`.
    pub fn total(&self) -> ComplexMatrix<T> {
        self.rf.matmul(&self.baseband)
    }

    /// Total transmit power `‖V_RF·V_D‖_F²`.
    pub fn transmit_power(&self) -> T {
        let t = self.total();
        let f = t.frobenius();
        f * f
    }

    pub fn rf_chains(&self) -> usize {
        self.rf.cols()
    }

    pub fn streams(&self) -> usize {
        self.baseband.cols()
    }
}

impl<T: Scalar> HybridCombiner<T> {
    /// Validates dimensions and the unit-modulus RF constraint.
    pub fn new(rf: ComplexMatrix<T>, baseband: ComplexMatrix<T>) -> Result<Self> {
        if rf.cols() != baseband.rows() {
            return Err(Error::Dimension(format!(
                "RF stage has {} chains but baseband has {} rows",
                rf.cols(),
                baseband.rows()
            )));
        }
        check_unit_modulus(&rf)?;
        Ok(Self { rf, baseband })
    }

    /// Effective receive matrix `W_RF · W_D`.
    pub fn total(&self) -> ComplexMatrix<T> {
        self.rf.matmul(&self.baseband)
    }
}

/// Outcome of a hybrid design: beamformers, rates, and convergence traces.
#[derive(Debug, Clone)]
pub struct DesignReport<T> {
    pub precoder: HybridPrecoder<T>,
    /// Per-user combiners; empty when the receive side has a single antenna.
    pub combiners: Vec<HybridCombiner<T>>,
    /// Achieved rate per user in bits/s/Hz.
    pub per_user_rates: Vec<T>,
    /// Weighted sum rate in bits/s/Hz.
    pub weighted_sum_rate: T,
    /// One per-update objective trace per coordinate-descent run performed,
    /// in execution order. Point-to-point traces rise (log-det objective);
    /// multi-user MISO traces fall (the power-margin proxy being minimized).
    pub objective_traces: Vec<Vec<T>>,
    /// Outer iterations executed (1 for single-pass designs).
    pub iterations: usize,
}

/// Per-user rates together with their weighted sum.
#[derive(Debug, Clone)]
pub struct RateBreakdown<T> {
    pub per_user: Vec<T>,
    pub weighted_sum: T,
}

// ── spectral-efficiency evaluators ───────────────────────────────────────────

/// Log-det rate `log2 |I + C⁻¹·S·Sᴴ|` computed as `log2|C + SSᴴ| − log2|C|`.
fn rate_term<T: Scalar>(c: &ComplexMatrix<T>, s: &ComplexMatrix<T>) -> Result<T> {
    let full = c.add(&s.matmul(&s.adjoint()));
    Ok(log2_det(&full, "interference-plus-signal covariance")?
        - log2_det(c, "interference covariance")?)
}

/// General multi-stream rate: per-user `R_k = log2|I + C_k⁻¹·(WᴴH V_k)(…)ᴴ|`
/// with `C_k` the interference-plus-noise covariance seen through `W`.
///
/// `combiners = None` evaluates with the identity combiner (ideal full-digital
/// receive). A ridge of `σ²·1e-12` guards `C_k` against roundoff singularity.
pub fn rate_general<T: Scalar>(
    channels: &[ComplexMatrix<T>],
    precoder: &HybridPrecoder<T>,
    combiners: Option<&[HybridCombiner<T>]>,
    noise: T,
    weights: &[T],
) -> Result<RateBreakdown<T>> {
    let k = channels.len();
    if k == 0 {
        return Err(Error::Dimension("no user channels supplied".into()));
    }
    if weights.len() != k {
        return Err(Error::Dimension(format!(
            "{} weights for {} users",
            weights.len(),
            k
        )));
    }
    if let Some(w) = combiners {
        if w.len() != k {
            return Err(Error::Dimension(format!(
                "{} combiners for {} users",
                w.len(),
                k
            )));
        }
    }
    let total = precoder.total();
    let ns = total.cols();
    if !ns.is_multiple_of(k) {
        return Err(Error::Dimension(format!(
            "{ns} precoder streams not divisible by {k} users"
        )));
    }
    let d = ns / k;
    let ridge = noise * T::lit(1e-12);

    let mut per_user = Vec::with_capacity(k);
    let mut weighted_sum = T::zero();
    for u in 0..k {
        let h = &channels[u];
        if h.cols() != total.rows() {
            return Err(Error::Dimension(format!(
                "channel {u} has {} transmit antennas, precoder has {}",
                h.cols(),
                total.rows()
            )));
        }
        // Effective streams through this user's receive filter.
        let (effective, gram) = match combiners {
            Some(ws) => {
                let wt = ws[u].total();
                if wt.rows() != h.rows() {
                    return Err(Error::Dimension(format!(
                        "combiner {u} has {} antennas, channel has {}",
                        wt.rows(),
                        h.rows()
                    )));
                }
                (wt.adjoint().matmul(&h.matmul(&total)), wt.adjoint().matmul(&wt))
            }
            None => (h.matmul(&total), ComplexMatrix::identity(h.rows())),
        };
        let signal = effective.columns(u * d, d);
        let mut c = gram.scale_real(noise);
        for v in 0..k {
            if v == u {
                continue;
            }
            let interferer = effective.columns(v * d, d);
            c = c.add(&interferer.matmul(&interferer.adjoint()));
        }
        c.add_scaled_identity(ridge);
        let rate = rate_term(&c, &signal)?;
        per_user.push(rate);
        weighted_sum += weights[u] * rate;
    }
    Ok(RateBreakdown {
        per_user,
        weighted_sum,
    })
}

/// Single-link rate `log2 |I + (1/σ²)·W(WᴴW)⁻¹Wᴴ·H·V·Vᴴ·Hᴴ|` for explicit
/// transmit and receive matrices (pass the identity for an ideal receiver).
pub fn rate_p2p<T: Scalar>(
    h: &ComplexMatrix<T>,
    v_total: &ComplexMatrix<T>,
    w_total: &ComplexMatrix<T>,
    noise: T,
) -> Result<T> {
    if h.cols() != v_total.rows() {
        return Err(Error::Dimension(format!(
            "channel has {} transmit antennas, precoder has {}",
            h.cols(),
            v_total.rows()
        )));
    }
    if h.rows() != w_total.rows() {
        return Err(Error::Dimension(format!(
            "channel has {} receive antennas, combiner has {}",
            h.rows(),
            w_total.rows()
        )));
    }
    // |I_M + P·X/σ²| with projector P reduces to the stream-sized determinant
    // |I + Eᴴ(WᴴW)⁻¹E/σ²| where E = Wᴴ·H·V.
    let e = w_total.adjoint().matmul(&h.matmul(v_total));
    let gram = w_total.adjoint().matmul(w_total);
    let solved = solve(&gram, &e, "receive Gram matrix")?;
    let mut small = e.adjoint().matmul(&solved).scale_real(T::one() / noise);
    small.add_scaled_identity(T::one());
    log2_det(&small, "rate determinant")
}

/// Per-user single-antenna rates from the interference ratios of `H·V_t`.
pub fn rate_miso<T: Scalar>(
    h: &ComplexMatrix<T>,
    v_total: &ComplexMatrix<T>,
    noise: T,
    weights: &[T],
) -> Result<RateBreakdown<T>> {
    let k = h.rows();
    if v_total.cols() != k {
        return Err(Error::Dimension(format!(
            "{} precoder columns for {k} users",
            v_total.cols()
        )));
    }
    if weights.len() != k {
        return Err(Error::Dimension(format!(
            "{} weights for {k} users",
            weights.len()
        )));
    }
    if h.cols() != v_total.rows() {
        return Err(Error::Dimension(format!(
            "channel has {} transmit antennas, precoder has {}",
            h.cols(),
            v_total.rows()
        )));
    }
    let g = h.matmul(v_total);
    let mut per_user = Vec::with_capacity(k);
    let mut weighted_sum = T::zero();
    for u in 0..k {
        let mut interference = T::zero();
        for v in 0..k {
            if v != u {
                interference += g[(u, v)].norm_sqr();
            }
        }
        let sinr = g[(u, u)].norm_sqr() / (noise + interference);
        let rate = (T::one() + sinr).log2();
        per_user.push(rate);
        weighted_sum += weights[u] * rate;
    }
    Ok(RateBreakdown {
        per_user,
        weighted_sum,
    })
}

// ── exact realization with two RF chains per stream ──────────────────────────

/// Splits one fully digital column into two constant-modulus phasor columns:
/// `ν·e^{jφ} = ν_max·e^{j(φ−Δ)} + ν_max·e^{j(φ+Δ)}` with `Δ = acos(ν/(2ν_max))`.
fn realize_columns<T: Scalar>(v_fd: &ComplexMatrix<T>) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let n = v_fd.rows();
    let s = v_fd.cols();
    let mut rf = ComplexMatrix::zeros(n, 2 * s);
    let mut bb = ComplexMatrix::zeros(2 * s, s);
    for k in 0..s {
        let col = v_fd.col(k);
        let nu_max = col
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max);
        debug_assert!(nu_max > T::zero(), "zero column reached the split step");
        let two_nu = nu_max + nu_max;
        for i in 0..n {
            let nu = col[i].norm();
            let phi = col[i].arg();
            let delta = (nu / two_nu).acos();
            rf[(i, 2 * k)] = Complex::from_polar(T::one(), phi - delta);
            rf[(i, 2 * k + 1)] = Complex::from_polar(T::one(), phi + delta);
        }
        bb[(2 * k, k)] = Complex::new(nu_max, T::zero());
        bb[(2 * k + 1, k)] = Complex::new(nu_max, T::zero());
    }
    (rf, bb)
}

/// Realizes a fully digital precoder exactly with two RF chains per retained
/// rank direction.
///
/// Full-rank input splits each column directly into two phasor columns. Input
/// of numerical rank `r < Ns` (singular values ≤ `rank_tol·s_max`) is first
/// factored through its rank-r SVD so only `2r` chains are needed; the product
/// `V_RF·V_D` then reproduces the input to the rank truncation's accuracy.
pub fn realize_fully_digital<T: Scalar>(
    v_fd: &ComplexMatrix<T>,
    rank_tol: T,
) -> Result<HybridPrecoder<T>> {
    v_fd.ensure_finite("fully digital precoder")?;
    let decomposition = svd(v_fd);
    let s_max = decomposition.s[0];
    if s_max == T::zero() {
        return Err(Error::Config(
            "cannot realize an all-zero precoder".into(),
        ));
    }
    let rank = decomposition
        .s
        .iter()
        .filter(|&&s| s > rank_tol * s_max)
        .count();
    if rank == v_fd.cols() {
        // Full rank: split the given columns directly (no SVD error incurred).
        let (rf, bb) = realize_columns(v_fd);
        HybridPrecoder::new(rf, bb)
    } else {
        // Rank-deficient: realize the r left directions, then map to streams.
        let u_r = decomposition.u.columns(0, rank);
        let (rf, bb_left) = realize_columns(&u_r);
        // B = Σ_r·V_rᴴ restores the original columns from the directions.
        let mut b = decomposition.v.columns(0, rank).adjoint();
        for i in 0..rank {
            let scale = decomposition.s[i];
            for j in 0..b.cols() {
                b[(i, j)] = b[(i, j)].scale(scale);
            }
        }
        HybridPrecoder::new(rf, bb_left.matmul(&b))
    }
}

/// Relative Frobenius error between a factor pair's product and its target.
pub fn realization_error<T: Scalar>(
    precoder: &HybridPrecoder<T>,
    v_fd: &ComplexMatrix<T>,
) -> T {
    let diff = precoder.total().sub(v_fd);
    diff.frobenius() / v_fd.frobenius()
}

/// `log2 |I + X|` for a square matrix, via LU.
pub fn log2_det_identity_plus<T: Scalar>(x: &ComplexMatrix<T>) -> Result<T> {
    let mut m = x.clone();
    m.add_scaled_identity(T::one());
    Ok(lu(&m, "identity-plus determinant")?.log2_abs_det())
}
