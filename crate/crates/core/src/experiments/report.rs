//! CSV, JSON and SVG renderings of sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::stats::RatioStats;
use super::TrialRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 14] = [
    "n",
    "replication",
    "seed",
    "ensemble",
    "dist",
    "method",
    "norm",
    "residual",
    "iterations",
    "ratio_sqrt_nlogn",
    "ratio_n",
    "fejer_lower",
    "upper_Y_certified",
    "elapsed_ms",
];

/// Suffix appended to `method` on rows whose iterative solve did not converge.
pub const UNCONVERGED_SUFFIX: &str = ":unconverged";

/// One CSV row. Absent optional values are empty fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub ensemble: String,
    pub dist: String,
    pub method: String,
    pub norm: f64,
    pub residual: f64,
    pub iterations: usize,
    pub ratio_sqrt_nlogn: Option<f64>,
    pub ratio_n: f64,
    pub fejer_lower: Option<f64>,
    #[serde(rename = "upper_Y_certified")]
    pub upper_y_certified: Option<f64>,
    pub elapsed_ms: f64,
}

impl CsvRow {
    pub fn converged(&self) -> bool {
        !self.method.ends_with(UNCONVERGED_SUFFIX)
    }
}

impl From<&TrialRecord> for CsvRow {
    fn from(r: &TrialRecord) -> Self {
        let suffix = if r.converged { "" } else { UNCONVERGED_SUFFIX };
        CsvRow {
            n: r.n,
            replication: r.replication,
            seed: r.seed,
            ensemble: r.ensemble.name().to_string(),
            dist: r.dist.clone(),
            method: format!("{}{suffix}", r.norm.method.name()),
            norm: r.norm.value,
            residual: r.norm.residual,
            iterations: r.norm.iterations,
            ratio_sqrt_nlogn: r.ratio_sqrt_nlogn,
            ratio_n: r.ratio_n,
            fejer_lower: r.fejer_lower,
            upper_y_certified: r.upper_y.as_ref().map(|u| u.certified_upper),
            elapsed_ms: r.elapsed_ms,
        }
    }
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records"));
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Config(format!(
            "unexpected CSV header `{}`; expected `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            CSV_HEADER.join(",")
        )));
    }
    let rows = reader.deserialize().collect::<std::result::Result<Vec<CsvRow>, _>>()?;
    Ok(rows)
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Static SVG of `‖T_n‖/√(n ln n)` against `n`: log-x scatter of the trials,
/// one `mean-marker` per dimension joined by the `mean-line`, and the
/// q05–q95 `quantile-band`.
pub fn render_svg(points: &[(usize, f64)]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no ratio values to plot"));
    }
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(n, v) in points {
        by_n.entry(n).or_default().push(v);
    }
    let cells: Vec<(usize, RatioStats)> = by_n
        .iter()
        .filter_map(|(&n, v)| RatioStats::from_values(v).map(|s| (n, s)))
        .collect();

    let log_n: Vec<f64> = cells.iter().map(|(n, _)| (*n as f64).log10()).collect();
    let (mut x_lo, mut x_hi) = (log_n[0], log_n[log_n.len() - 1]);
    if x_hi - x_lo < 1e-9 {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    let pad = 0.05 * (x_hi - x_lo);
    let (x_lo, x_hi) = (x_lo - pad, x_hi + pad);
    let y_max_data = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let y_min_data = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_lo = y_min_data.min(0.0);
    let mut y_hi = y_max_data * 1.1;
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    let px = |n: usize| LEFT + ((n as f64).log10() - x_lo) / (x_hi - x_lo) * (WIDTH - LEFT - RIGHT);
    let py = |v: f64| HEIGHT - BOTTOM - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">‖T_n‖ / √(n ln n)</text>"#,
        WIDTH / 2.0
    );
    // Axes.
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(s, r#"<line class="axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line class="axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="black"/>"#);
    for (n, _) in &cells {
        let x = px(*n);
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{n}</text>"#,
            y0 + 16.0
        );
    }
    for i in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.2}</text>"#,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">n (log scale)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );

    let band: Vec<String> = cells
        .iter()
        .map(|(n, st)| format!("{:.2},{:.2}", px(*n), py(st.q95)))
        .chain(cells.iter().rev().map(|(n, st)| format!("{:.2},{:.2}", px(*n), py(st.q05))))
        .collect();
    let _ = writeln!(
        s,
        r#"<polygon class="quantile-band" points="{}" fill="steelblue" fill-opacity="0.2" stroke="none"/>"#,
        band.join(" ")
    );
    for &(n, v) in points {
        let _ = writeln!(
            s,
            r#"<circle class="trial" cx="{:.2}" cy="{:.2}" r="2" fill="gray" fill-opacity="0.5"/>"#,
            px(n),
            py(v)
        );
    }
    let line: Vec<String> = cells.iter().map(|(n, st)| format!("{:.2},{:.2}", px(*n), py(st.mean))).collect();
    let _ = writeln!(
        s,
        r#"<polyline class="mean-line" points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        line.join(" ")
    );
    for (n, st) in &cells {
        let _ = writeln!(
            s,
            r#"<rect class="mean-marker" x="{:.2}" y="{:.2}" width="8" height="8" fill="steelblue"/>"#,
            px(*n) - 4.0,
            py(st.mean) - 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// `(n, ratio)` pairs of converged records with a defined ratio.
pub fn ratio_points(records: &[TrialRecord]) -> Vec<(usize, f64)> {
    records
        .iter()
        .filter(|r| r.converged)
        .filter_map(|r| r.ratio_sqrt_nlogn.map(|v| (r.n, v)))
        .collect()
}
