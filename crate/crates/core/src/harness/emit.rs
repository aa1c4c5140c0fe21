//! CSV and SVG output of iteration logs.

use super::monte_carlo::TrialSummary;
use crate::log::IterationLog;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

pub const CSV_HEADER: [&str; 4] = ["trial", "iter", "objective_nats", "time_ms"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub trial: usize,
    pub iter: usize,
    pub objective_nats: f64,
    pub time_ms: f64,
}

/// One row per logged iteration of every trial, in summary order.
pub fn csv_rows(summaries: &[TrialSummary], logs: &[IterationLog]) -> Vec<CsvRow> {
    summaries
        .iter()
        .zip(logs)
        .flat_map(|(s, log)| {
            log.records.iter().map(move |r| CsvRow { trial: s.trial, iter: r.iter, objective_nats: r.objective, time_ms: r.time_ms })
        })
        .collect()
}

pub fn csv_bytes(rows: &[CsvRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn write_csv(path: impl AsRef<Path>, summaries: &[TrialSummary], logs: &[IterationLog]) -> Result<()> {
    let path = path.as_ref();
    let bytes = csv_bytes(&csv_rows(summaries, logs))?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidArgument(format!("{}: unexpected header", path.display())));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line chart of objective against outer iteration, one polyline per trial.
pub fn svg_chart(summaries: &[TrialSummary], logs: &[IterationLog]) -> String {
    let series: Vec<(usize, Vec<f64>)> = summaries.iter().zip(logs).map(|(s, l)| (s.trial, l.objectives())).collect();
    let max_iter = series.iter().map(|(_, v)| v.len().saturating_sub(1)).max().unwrap_or(0).max(1) as f64;
    let finite = series.iter().flat_map(|(_, v)| v.iter().copied()).filter(|x| x.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let px = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / max_iter;
    let py = |y: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (y - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {t} V{b} H{r}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">iteration</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">objective (nats/s/Hz)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.4}</text>"#, MARGIN - 4.0, MARGIN + 4.0, hi);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.4}</text>"#, MARGIN - 4.0, HEIGHT - MARGIN, lo);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{}</text>"#, WIDTH - MARGIN, HEIGHT - MARGIN + 14.0, max_iter);
    for (idx, (trial, ys)) in series.iter().enumerate() {
        let pts: Vec<String> = ys
            .iter()
            .enumerate()
            .filter(|(_, y)| y.is_finite())
            .map(|(i, &y)| format!("{:.2},{:.2}", px(i), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-trial="{trial}" points="{}" stroke="{}" fill="none" stroke-width="1.2"/>"#,
            pts.join(" "),
            PALETTE[idx % PALETTE.len()]
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: impl AsRef<Path>, summaries: &[TrialSummary], logs: &[IterationLog]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, svg_chart(summaries, logs)).map_err(|e| Error::io(path, e))
}

/// Write the CSV and, when requested, the SVG chart.
pub fn emit_results(
    summaries: &[TrialSummary],
    logs: &[IterationLog],
    csv_path: impl AsRef<Path>,
    svg_path: Option<&Path>,
) -> Result<()> {
    write_csv(csv_path, summaries, logs)?;
    if let Some(p) = svg_path {
        write_svg(p, summaries, logs)?;
    }
    Ok(())
}
