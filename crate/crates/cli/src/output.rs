//! Result serialization: the CSV table and a single-panel SVG line chart.

use crate::run::{SweepResult, SweepRow};
use crate::spec::MethodId;
use std::fmt::Write;

/// Renders the result as CSV, one row per (SNR point, method), six
/// significant digits on the statistics.
pub fn write_csv(result: &SweepResult) -> String {
    let mut out = String::from("snr_db,method,mean_rate,std_rate,trials,failures\n");
    for row in &result.rows {
        writeln!(
            out,
            "{},{},{:.5e},{:.5e},{},{}",
            row.snr_db, row.method, row.mean_rate, row.std_rate, row.trials, row.failures
        )
        .expect("string formatting cannot fail");
    }
    out
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f",
];

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 650.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 455.0;

/// Renders one polyline per method: mean rate against SNR.
pub fn render_chart(result: &SweepResult) -> String {
    let mut methods: Vec<&MethodId> = Vec::new();
    for row in &result.rows {
        if !methods.contains(&&row.method) {
            methods.push(&row.method);
        }
    }
    let mut snr_min = f64::INFINITY;
    let mut snr_max = f64::NEG_INFINITY;
    let mut rate_max = 0f64;
    for row in &result.rows {
        snr_min = snr_min.min(row.snr_db);
        snr_max = snr_max.max(row.snr_db);
        if row.mean_rate.is_finite() {
            rate_max = rate_max.max(row.mean_rate);
        }
    }
    if snr_min == snr_max {
        snr_min -= 1.0;
        snr_max += 1.0;
    }
    if rate_max <= 0.0 {
        rate_max = 1.0;
    }
    rate_max *= 1.05;
    let x = |snr: f64| LEFT + (snr - snr_min) / (snr_max - snr_min) * (RIGHT - LEFT);
    let y = |rate: f64| BOTTOM - rate / rate_max * (BOTTOM - TOP);

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    )
    .unwrap();
    writeln!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    )
    .unwrap();

    // Axes.
    writeln!(
        svg,
        "  <line x1=\"{LEFT}\" y1=\"{BOTTOM}\" x2=\"{RIGHT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>"
    )
    .unwrap();
    writeln!(
        svg,
        "  <line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>"
    )
    .unwrap();

    // X ticks at every distinct SNR grid value.
    let mut snrs: Vec<f64> = Vec::new();
    for row in &result.rows {
        if !snrs.contains(&row.snr_db) {
            snrs.push(row.snr_db);
        }
    }
    for &snr in &snrs {
        let px = x(snr);
        writeln!(
            svg,
            "  <line x1=\"{px:.2}\" y1=\"{BOTTOM}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>",
            BOTTOM + 5.0
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{px:.2}\" y=\"{}\" text-anchor=\"middle\">{snr}</text>",
            BOTTOM + 20.0
        )
        .unwrap();
    }

    // Y ticks, six even divisions.
    for i in 0..=6 {
        let rate = rate_max * i as f64 / 6.0;
        let py = y(rate);
        writeln!(
            svg,
            "  <line x1=\"{}\" y1=\"{py:.2}\" x2=\"{LEFT}\" y2=\"{py:.2}\" stroke=\"black\"/>",
            LEFT - 5.0
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{rate:.1}</text>",
            LEFT - 9.0,
            py + 4.0
        )
        .unwrap();
    }

    // Axis labels.
    writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">SNR (dB)</text>",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 42.0
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.2})\">spectral efficiency (bits/s/Hz)</text>",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    )
    .unwrap();

    // One polyline and one legend entry per method.
    for (mi, method) in methods.iter().enumerate() {
        let color = PALETTE[mi % PALETTE.len()];
        let points: Vec<String> = result
            .rows
            .iter()
            .filter(|row| &&row.method == method && row.mean_rate.is_finite())
            .map(|row| format!("{:.2},{:.2}", x(row.snr_db), y(row.mean_rate)))
            .collect();
        writeln!(
            svg,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>",
            points.join(" ")
        )
        .unwrap();
        let ly = TOP + 14.0 + 20.0 * mi as f64;
        writeln!(
            svg,
            "  <line x1=\"{}\" y1=\"{ly:.2}\" x2=\"{}\" y2=\"{ly:.2}\" \
             stroke=\"{color}\" stroke-width=\"1.8\"/>",
            RIGHT + 14.0,
            RIGHT + 38.0
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{}\" y=\"{:.2}\">{method}</text>",
            RIGHT + 44.0,
            ly + 4.0
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// Convenience for tests: pull one row out of a result.
pub fn find_row<'a>(result: &'a SweepResult, snr_db: f64, method: &MethodId) -> Option<&'a SweepRow> {
    result
        .rows
        .iter()
        .find(|row| row.snr_db == snr_db && &row.method == method)
}
