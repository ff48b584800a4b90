//! Harness behavior: seeding, determinism, CSV layout, charts, file replay.

use hybeam_cli::output::{render_chart, write_csv};
use hybeam_cli::run::{child_seed, generate_channels, run_sweep};
use hybeam_cli::spec::SweepSpec;
use hybeam_core::channel::{draw_channel, save_dataset, DatasetHeader, DATASET_VERSION};
use std::collections::HashSet;
use std::path::PathBuf;

fn small_p2p(seed: u64) -> SweepSpec {
    SweepSpec::parse(&format!(
        r#"{{
            "scenario": "p2p_mimo",
            "cfg": {{
                "tx_antennas": 8,
                "rx_antennas": 4,
                "users": 1,
                "streams_per_user": 2,
                "tx_rf_chains": 3,
                "rx_rf_chains": 3,
                "paths": 6
            }},
            "snr_grid_db": [-5, 0, 5],
            "methods": ["fd_optimal", "hybrid_proposed", "hybrid_proposed_quantized_b2"],
            "trials": 6,
            "master_seed": {seed}
        }}"#
    ))
    .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("hybeam_{}_{name}", std::process::id()))
}

// ── seeding ──────────────────────────────────────────────────────────────────

#[test]
fn child_seeds_never_collide() {
    let mut seen = HashSet::new();
    for t in 0..10_000u64 {
        assert!(seen.insert(child_seed(99, t)), "collision at trial {t}");
    }
    assert_ne!(child_seed(1, 0), child_seed(2, 0));
}

// ── determinism ──────────────────────────────────────────────────────────────

#[test]
fn same_seed_means_byte_identical_tables() {
    let spec = small_p2p(41);
    let a = write_csv(&run_sweep(&spec, None).unwrap());
    let b = write_csv(&run_sweep(&spec, None).unwrap());
    assert_eq!(a, b);
}

#[test]
fn thread_count_does_not_change_the_numbers() {
    let spec = small_p2p(42);
    let serial = write_csv(&run_sweep(&spec, Some(1)).unwrap());
    let parallel = write_csv(&run_sweep(&spec, Some(3)).unwrap());
    assert_eq!(serial, parallel);
}

#[test]
fn different_seeds_move_the_numbers() {
    let a = write_csv(&run_sweep(&small_p2p(1), None).unwrap());
    let b = write_csv(&run_sweep(&small_p2p(2), None).unwrap());
    assert_ne!(a, b);
}

// ── table layout ─────────────────────────────────────────────────────────────

#[test]
fn csv_rows_follow_the_grid_and_method_order() {
    let spec = small_p2p(43);
    let result = run_sweep(&spec, None).unwrap();
    let text = write_csv(&result);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("snr_db,method,mean_rate,std_rate,trials,failures")
    );
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), spec.snr_grid_db.len() * spec.methods.len());
    for (i, line) in body.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6, "bad row `{line}`");
        let snr = spec.snr_grid_db[i / spec.methods.len()];
        let method = &spec.methods[i % spec.methods.len()];
        assert_eq!(fields[0], format!("{snr}"));
        assert_eq!(fields[1], method.to_string());
        // Stats are printed in scientific notation with six significant digits.
        assert!(fields[2].parse::<f64>().unwrap().is_finite());
        assert!(fields[2].contains('e'));
        assert_eq!(fields[4], "6");
        assert_eq!(fields[5], "0");
    }
}

#[test]
fn single_trial_rate_matches_a_hand_computation() {
    let spec = SweepSpec::parse(
        r#"{
            "scenario": "p2p_mimo",
            "cfg": {
                "tx_antennas": 1,
                "rx_antennas": 1,
                "users": 1,
                "streams_per_user": 1,
                "tx_rf_chains": 1,
                "rx_rf_chains": 1,
                "paths": 4
            },
            "snr_grid_db": [3],
            "methods": ["fd_optimal"],
            "trials": 1,
            "master_seed": 17
        }"#,
    )
    .unwrap();
    let result = run_sweep(&spec, None).unwrap();
    // One antenna each side: the optimum is log2(1 + P·|h|²/σ²).
    let power = 10f64.powf(0.3);
    let cfg = spec.cfg.system_config(power);
    let h = draw_channel(&cfg, child_seed(17, 0)).users[0].matrix[(0, 0)];
    let expected = (1.0 + power * h.norm_sqr()).log2();
    let row = &result.rows[0];
    assert_eq!(row.trials, 1);
    assert_eq!(row.std_rate, 0.0);
    assert!((row.mean_rate - expected).abs() < 1e-12 * expected);
}

// ── channel replay ───────────────────────────────────────────────────────────

#[test]
fn saved_realizations_reproduce_the_generated_sweep() {
    let spec = small_p2p(44);
    let path = scratch("replay.chd");
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
    save_dataset(&path, &header, &realizations).unwrap();

    let mut replay = spec.clone();
    replay.channel_source = hybeam_cli::spec::ChannelSource::File(path.clone());
    let from_file = run_sweep(&replay, None).unwrap();
    let generated = run_sweep(&spec, None).unwrap();
    assert_eq!(from_file.rows, generated.rows);
    std::fs::remove_file(&path).ok();
}

#[test]
fn replay_refuses_mismatched_or_short_datasets() {
    let spec = small_p2p(45);
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

    // Fewer stored realizations than requested trials.
    let short = scratch("short.chd");
    let mut short_header = header.clone();
    short_header.count = 3;
    save_dataset(&short, &short_header, &realizations[..3]).unwrap();
    let mut replay = spec.clone();
    replay.channel_source = hybeam_cli::spec::ChannelSource::File(short.clone());
    assert!(run_sweep(&replay, None).is_err());
    std::fs::remove_file(&short).ok();

    // Geometry drawn for a different array.
    let mut other = small_p2p(45);
    other.cfg.tx_antennas = 16;
    other.cfg.tx_rf_chains = 3;
    let foreign = scratch("foreign.chd");
    let theirs = generate_channels(&other);
    let mut their_header = header.clone();
    their_header.tx_antennas = 16;
    their_header.count = theirs.len();
    save_dataset(&foreign, &their_header, &theirs).unwrap();
    let mut replay = spec.clone();
    replay.channel_source = hybeam_cli::spec::ChannelSource::File(foreign.clone());
    assert!(run_sweep(&replay, None).is_err());
    std::fs::remove_file(&foreign).ok();
}

// ── charts ───────────────────────────────────────────────────────────────────

#[test]
fn charts_carry_one_curve_per_method_and_labeled_axes() {
    let spec = small_p2p(46);
    let result = run_sweep(&spec, None).unwrap();
    let svg = render_chart(&result);
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<polyline").count(), spec.methods.len());
    assert!(svg.contains("SNR (dB)"));
    assert!(svg.contains("spectral efficiency (bits/s/Hz)"));
    for m in &spec.methods {
        assert!(svg.contains(&m.to_string()), "legend misses {m}");
    }
}
