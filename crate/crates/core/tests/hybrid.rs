//! Phase alphabets, beamformer validation, exact realization, and the
//! spectral-efficiency evaluators cross-checked against direct formulas.

use hybeam_core::hybrid::{
    quantize_beamformer, rate_general, rate_miso, rate_p2p, realize_fully_digital,
    HybridCombiner, HybridPrecoder, PhaseSet, SystemConfig, DEFAULT_RANK_TOL,
};
use hybeam_core::numerics::{complex_gaussian, inverse, log2_det, ComplexMatrix};
use hybeam_core::{Error, Matrix64, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix64 {
    complex_gaussian(rng, rows, cols)
}

fn base_config() -> SystemConfig<f64> {
    SystemConfig {
        tx_antennas: 16,
        rx_antennas: 4,
        users: 1,
        streams_per_user: 2,
        tx_rf_chains: 4,
        rx_rf_chains: 2,
        power: 10.0,
        noise: 1.0,
        weights: vec![1.0],
        phase_bits: 0,
        paths: 15,
        spacing: 0.5,
    }
}

// ── configuration validation ─────────────────────────────────────────────────

#[test]
fn valid_config_passes_and_violations_are_reported() {
    let cfg = base_config();
    cfg.validate().expect("base config is valid");

    let mut c = base_config();
    c.tx_rf_chains = 1; // fewer chains than streams
    assert!(matches!(c.validate(), Err(Error::Config(_))));

    let mut c = base_config();
    c.tx_rf_chains = 17; // more chains than antennas
    assert!(matches!(c.validate(), Err(Error::Config(_))));

    let mut c = base_config();
    c.rx_rf_chains = 1; // fewer receive chains than streams per user
    assert!(matches!(c.validate(), Err(Error::Config(_))));

    let mut c = base_config();
    c.noise = 0.0;
    assert!(matches!(c.validate(), Err(Error::Config(_))));

    let mut c = base_config();
    c.weights = vec![1.0, 1.0];
    assert!(matches!(c.validate(), Err(Error::Config(_))));

    let mut c = base_config();
    c.weights = vec![-1.0];
    assert!(matches!(c.validate(), Err(Error::Config(_))));

    let mut c = base_config();
    c.paths = 0;
    assert!(matches!(c.validate(), Err(Error::Config(_))));

    let mut c = base_config();
    c.spacing = 0.0;
    assert!(matches!(c.validate(), Err(Error::Config(_))));
}

// ── phase alphabet ───────────────────────────────────────────────────────────

#[test]
fn low_bit_alphabets_hit_the_axes_exactly() {
    let one_bit = PhaseSet::<f64>::new(1).expect("valid");
    assert_eq!(one_bit.members(), &[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
    let two_bit = PhaseSet::<f64>::new(2).expect("valid");
    assert_eq!(
        two_bit.members(),
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0)
        ]
    );
}

#[test]
fn alphabet_is_closed_under_conjugation_bit_exactly() {
    for bits in 1..=6 {
        let set = PhaseSet::<f64>::new(bits).expect("valid");
        for member in set.members() {
            let conj = member.conj();
            assert!(
                set.members().contains(&conj),
                "b = {bits}: conj({member}) missing from the alphabet"
            );
        }
    }
}

#[test]
fn quantizer_ties_resolve_to_the_smaller_exponent() {
    // e^{jπ/4} sits exactly between members 1 and i of the 2-bit alphabet.
    let set = PhaseSet::<f64>::new(2).expect("valid");
    let z = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    assert_eq!(set.quantize_index(z), 0);
    assert_eq!(set.quantize(z), C64::new(1.0, 0.0));
}

#[test]
fn quantizer_maps_zero_to_the_first_member() {
    let set = PhaseSet::<f64>::new(3).expect("valid");
    assert_eq!(set.quantize(C64::new(0.0, 0.0)), C64::new(1.0, 0.0));
}

#[test]
fn quantizer_picks_the_nearest_member_in_angle() {
    let set = PhaseSet::<f64>::new(4).expect("valid");
    for k in 0..360 {
        let angle = (k as f64) * std::f64::consts::TAU / 360.0 + 0.001;
        let z = C64::from_polar(2.5, angle);
        let picked = set.quantize(z);
        let best = set
            .members()
            .iter()
            .map(|m| (m.conj() * z).re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            ((picked.conj() * z).re - best).abs() < 1e-12,
            "angle {angle}: picked a non-maximal member"
        );
    }
}

#[test]
fn alphabet_rejects_unusable_bit_widths() {
    assert!(matches!(PhaseSet::<f64>::new(0), Err(Error::Config(_))));
    assert!(matches!(PhaseSet::<f64>::new(17), Err(Error::Config(_))));
}

#[test]
fn quantize_beamformer_snaps_every_entry() {
    let set = PhaseSet::<f64>::new(2).expect("valid");
    let m = random_matrix(&mut rng(1), 5, 3);
    let q = quantize_beamformer(&m, &set);
    for j in 0..3 {
        for i in 0..5 {
            assert_eq!(q[(i, j)], set.quantize(m[(i, j)]));
            assert!((q[(i, j)].norm() - 1.0).abs() < 1e-15);
        }
    }
}

// ── beamformer pairs ─────────────────────────────────────────────────────────

#[test]
fn precoder_rejects_non_unit_rf_entries() {
    let mut rf = ComplexMatrix::ones(4, 2);
    rf[(1, 0)] = C64::new(0.5, 0.0);
    let bb = ComplexMatrix::identity(2);
    assert!(matches!(
        HybridPrecoder::new(rf, bb),
        Err(Error::Config(_))
    ));
}

#[test]
fn precoder_rejects_mismatched_stages() {
    let rf: Matrix64 = ComplexMatrix::ones(4, 2);
    let bb = ComplexMatrix::identity(3);
    assert!(matches!(
        HybridPrecoder::new(rf, bb),
        Err(Error::Dimension(_))
    ));
}

#[test]
fn transmit_power_is_the_squared_frobenius_norm_of_the_product() {
    let rf = ComplexMatrix::ones(3, 2);
    let mut bb = ComplexMatrix::zeros(2, 1);
    bb[(0, 0)] = C64::new(0.5, 0.0);
    bb[(1, 0)] = C64::new(0.0, -0.5);
    let p = HybridPrecoder::new(rf, bb).expect("valid");
    // Each antenna sees 0.5 − 0.5i, power 0.5, three antennas → 1.5.
    assert!((p.transmit_power() - 1.5).abs() < 1e-12);
}

// ── exact realization ────────────────────────────────────────────────────────

#[test]
fn realization_reproduces_full_rank_targets_exactly() {
    let mut r = rng(2);
    for _ in 0..20 {
        let target = random_matrix(&mut r, 32, 3);
        let pair = realize_fully_digital(&target, DEFAULT_RANK_TOL).expect("realizable");
        assert_eq!(pair.rf.cols(), 6);
        for j in 0..pair.rf.cols() {
            for z in pair.rf.col(j) {
                assert!((z.norm() - 1.0).abs() < 1e-12, "RF entry off the circle");
            }
        }
        let err = pair.total().max_abs_diff(&target) / target.max_abs();
        assert!(err < 1e-12, "realization error {err:.3e}");
    }
}

#[test]
fn realization_handles_zero_entries_in_a_column() {
    let mut target = random_matrix(&mut rng(3), 6, 2);
    target[(2, 0)] = C64::new(0.0, 0.0);
    target[(5, 1)] = C64::new(0.0, 0.0);
    let pair = realize_fully_digital(&target, DEFAULT_RANK_TOL).expect("realizable");
    let err = pair.total().max_abs_diff(&target) / target.max_abs();
    assert!(err < 1e-12, "realization error {err:.3e}");
}

#[test]
fn rank_deficient_targets_use_two_chains_per_rank_direction() {
    let mut r = rng(4);
    // Rank-1 matrix presented as 3 columns.
    let u = random_matrix(&mut r, 16, 1);
    let w = random_matrix(&mut r, 3, 1);
    let target = u.matmul(&w.adjoint());
    let pair = realize_fully_digital(&target, DEFAULT_RANK_TOL).expect("realizable");
    assert_eq!(pair.rf.cols(), 2, "rank-1 target needs two chains");
    let err = pair.total().max_abs_diff(&target) / target.max_abs();
    assert!(err < 1e-10, "realization error {err:.3e}");

    // Rank-2 matrix presented as 4 columns.
    let a = random_matrix(&mut r, 16, 2);
    let b = random_matrix(&mut r, 4, 2);
    let target = a.matmul(&b.adjoint());
    let pair = realize_fully_digital(&target, DEFAULT_RANK_TOL).expect("realizable");
    assert_eq!(pair.rf.cols(), 4, "rank-2 target needs four chains");
    let err = pair.total().max_abs_diff(&target) / target.max_abs();
    assert!(err < 1e-10, "realization error {err:.3e}");
}

#[test]
fn realization_rejects_the_zero_matrix() {
    let target = ComplexMatrix::zeros(8, 2);
    assert!(realize_fully_digital(&target, DEFAULT_RANK_TOL).is_err());
}

// ── rate evaluators ──────────────────────────────────────────────────────────

/// Direct antenna-sized evaluation of the projection-receiver rate.
fn rate_p2p_oracle(h: &Matrix64, v: &Matrix64, w: &Matrix64, noise: f64) -> f64 {
    let gram_inv = inverse(&w.adjoint().matmul(w), "oracle Gram").expect("invertible");
    let projector = w.matmul(&gram_inv.matmul(&w.adjoint()));
    let hv = h.matmul(v);
    let mut m = projector
        .matmul(&hv.matmul(&hv.adjoint()))
        .scale_real(1.0 / noise);
    m.add_scaled_identity(1.0);
    log2_det(&m, "oracle determinant").expect("positive determinant")
}

#[test]
fn p2p_rate_matches_the_antenna_sized_oracle() {
    let mut r = rng(5);
    for _ in 0..50 {
        let h = random_matrix(&mut r, 4, 8);
        let v = random_matrix(&mut r, 8, 2);
        let w = random_matrix(&mut r, 4, 2);
        let fast = rate_p2p(&h, &v, &w, 0.7).expect("regular inputs");
        let slow = rate_p2p_oracle(&h, &v, &w, 0.7);
        assert!(
            (fast - slow).abs() < 1e-8 * slow.abs().max(1.0),
            "stream-sized {fast} vs antenna-sized {slow}"
        );
    }
}

#[test]
fn p2p_rate_with_identity_receiver_is_the_log_det_capacity_form() {
    let mut r = rng(6);
    let h = random_matrix(&mut r, 3, 6);
    let v = random_matrix(&mut r, 6, 3);
    let eye = ComplexMatrix::identity(3);
    let rate = rate_p2p(&h, &v, &eye, 2.0).expect("regular inputs");
    let hv = h.matmul(&v);
    let mut m = hv.matmul(&hv.adjoint()).scale_real(0.5);
    m.add_scaled_identity(1.0);
    let oracle = log2_det(&m, "capacity form").expect("positive determinant");
    assert!((rate - oracle).abs() < 1e-10 * oracle.max(1.0));
}

#[test]
fn p2p_rate_rejects_a_rank_deficient_receive_filter() {
    let mut r = rng(7);
    let h = random_matrix(&mut r, 4, 6);
    let v = random_matrix(&mut r, 6, 2);
    let mut w = random_matrix(&mut r, 4, 2);
    let first: Vec<C64> = w.col(0).to_vec();
    w.set_col(1, &first);
    assert!(matches!(
        rate_p2p(&h, &v, &w, 1.0),
        Err(Error::Singular(_))
    ));
}

#[test]
fn general_rate_reduces_to_p2p_for_one_user() {
    let mut r = rng(8);
    for _ in 0..20 {
        let h = random_matrix(&mut r, 4, 8);
        let v_rf =
            quantize_beamformer(&random_matrix(&mut r, 8, 3), &PhaseSet::new(6).expect("valid"));
        let v_bb = random_matrix(&mut r, 3, 2);
        let precoder = HybridPrecoder::new(v_rf, v_bb).expect("valid");
        let w_rf =
            quantize_beamformer(&random_matrix(&mut r, 4, 2), &PhaseSet::new(6).expect("valid"));
        let w_bb = random_matrix(&mut r, 2, 2);
        let combiner = HybridCombiner::new(w_rf, w_bb).expect("valid");
        let noise = 0.9;
        let direct = rate_p2p(&h, &precoder.total(), &combiner.total(), noise).expect("rate");
        let general = rate_general(
            std::slice::from_ref(&h),
            &precoder,
            Some(std::slice::from_ref(&combiner)),
            noise,
            &[1.0],
        )
        .expect("rate");
        assert!(
            (general.per_user[0] - direct).abs() < 1e-8 * direct.abs().max(1.0),
            "general {general:?} vs direct {direct}",
        );
    }
}

#[test]
fn general_rate_agrees_with_the_sinr_form_for_single_antenna_users() {
    let mut r = rng(9);
    for _ in 0..20 {
        let k = 3;
        let h = random_matrix(&mut r, k, 8);
        let v_rf = quantize_beamformer(
            &random_matrix(&mut r, 8, k),
            &PhaseSet::new(6).expect("valid"),
        );
        let v_bb = random_matrix(&mut r, k, k);
        let precoder = HybridPrecoder::new(v_rf, v_bb).expect("valid");
        let weights = [1.0, 2.0, 0.5];
        let noise = 1.3;
        let channels: Vec<Matrix64> = (0..k)
            .map(|u| ComplexMatrix::from_fn(1, 8, |_, j| h[(u, j)]))
            .collect();
        let general = rate_general(&channels, &precoder, None, noise, &weights).expect("rate");
        let sinr = rate_miso(&h, &precoder.total(), noise, &weights).expect("rate");
        for u in 0..k {
            assert!(
                (general.per_user[u] - sinr.per_user[u]).abs()
                    < 1e-8 * sinr.per_user[u].abs().max(1.0),
                "user {u}: covariance form {} vs ratio form {}",
                general.per_user[u],
                sinr.per_user[u]
            );
        }
        assert!(
            (general.weighted_sum - sinr.weighted_sum).abs()
                < 1e-8 * sinr.weighted_sum.abs().max(1.0)
        );
    }
}

#[test]
fn weighted_sum_applies_the_user_weights() {
    let mut r = rng(10);
    let h = random_matrix(&mut r, 2, 6);
    let v = random_matrix(&mut r, 6, 2);
    let weights = [2.0, 0.25];
    let rates = rate_miso(&h, &v, 1.0, &weights).expect("rate");
    let expected = 2.0 * rates.per_user[0] + 0.25 * rates.per_user[1];
    assert!((rates.weighted_sum - expected).abs() < 1e-12);
}
