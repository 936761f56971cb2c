//! Metric reports: `metrics.json`, per-model ROC CSVs, and an SVG figure.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::roc::RocCurve;
use super::Result;

/// Metrics for one model (or the pooled challenge set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub id: String,
    pub auc: f64,
    /// Keyed by the FPR level formatted to two decimals, e.g. `"0.10"`.
    pub tpr_at_fpr: BTreeMap<String, f64>,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl MetricReport {
    pub fn fpr_key(level: f64) -> String {
        format!("{level:.2}")
    }
}

/// Writes `metrics.json`, one `roc_<id>.csv` per curve, and, when any
/// curves are given, a self-contained `roc.svg`. Returns the created paths.
/// Output is byte-stable across reruns.
pub fn emit_report(
    reports: &[MetricReport],
    curves: &[(String, RocCurve)],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let metrics_path = out_dir.join("metrics.json");
    let mut f = BufWriter::new(File::create(&metrics_path)?);
    serde_json::to_writer_pretty(&mut f, reports)?;
    f.write_all(b"\n")?;
    f.flush()?;
    written.push(metrics_path);

    for (id, curve) in curves {
        let path = out_dir.join(format!("roc_{id}.csv"));
        let mut f = BufWriter::new(File::create(&path)?);
        f.write_all(b"threshold,fpr,tpr\n")?;
        for i in 0..curve.len() {
            writeln!(
                f,
                "{},{:.6},{:.6}",
                format_threshold(curve.thresholds[i]),
                curve.fpr[i],
                curve.tpr[i]
            )?;
        }
        f.flush()?;
        written.push(path);
    }

    if !curves.is_empty() {
        let path = out_dir.join("roc.svg");
        std::fs::write(&path, render_roc_svg(curves))?;
        written.push(path);
    }
    Ok(written)
}

fn format_threshold(t: f64) -> String {
    if t == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{t:.6}")
    }
}

const SVG_PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Minimal self-contained ROC figure on the unit square with the chance
/// diagonal.
fn render_roc_svg(curves: &[(String, RocCurve)]) -> String {
    let (w, h, margin) = (480.0, 480.0, 48.0);
    let plot = w - 2.0 * margin;
    let x = |fpr: f64| margin + fpr * plot;
    let y = |tpr: f64| h - margin - tpr * plot;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{plot:.1}\" height=\"{plot:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        margin, margin
    ));
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#aaaaaa\" stroke-dasharray=\"4 4\"/>\n",
        x(0.0), y(0.0), x(1.0), y(1.0)
    ));
    for (label, pos) in [("0", 0.0), ("0.5", 0.5), ("1", 1.0)] {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{label}</text>\n",
            x(pos),
            h - margin + 16.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{label}</text>\n",
            margin - 6.0,
            y(pos) + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">false positive rate</text>\n",
        w / 2.0,
        h - 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">true positive rate</text>\n",
        h / 2.0,
        h / 2.0
    ));
    for (i, (id, curve)) in curves.iter().enumerate() {
        let color = SVG_PALETTE[i % SVG_PALETTE.len()];
        let points: Vec<String> = curve
            .fpr
            .iter()
            .zip(&curve.tpr)
            .map(|(&f, &t)| format!("{:.2},{:.2}", x(f), y(t)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\">{id}</text>\n",
            margin + 8.0,
            margin + 16.0 + 14.0 * i as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::compute_roc;
    use tempfile::tempdir;

    #[test]
    fn empty_report_list_writes_empty_array_and_no_figures() {
        let dir = tempdir().unwrap();
        let written = emit_report(&[], &[], dir.path()).unwrap();
        assert_eq!(written.len(), 1);
        let text = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
        assert_eq!(text.trim(), "[]");
        assert!(!dir.path().join("roc.svg").exists());
    }

    #[test]
    fn one_report_yields_one_figure_on_the_unit_square() {
        let dir = tempdir().unwrap();
        let scores = [0.9, 0.2];
        let labels = [true, false];
        let curve = compute_roc(&scores, &labels).unwrap();
        let report = MetricReport {
            id: "m000".into(),
            auc: 1.0,
            tpr_at_fpr: [(MetricReport::fpr_key(0.10), 1.0)].into_iter().collect(),
            n_pos: 1,
            n_neg: 1,
        };
        emit_report(&[report], &[("m000".into(), curve)], dir.path()).unwrap();
        let svg = std::fs::read_to_string(dir.path().join("roc.svg")).unwrap();
        assert!(svg.contains("<svg"));
        assert!(svg.contains("polyline"));
        let csv = std::fs::read_to_string(dir.path().join("roc_m000.csv")).unwrap();
        assert!(csv.starts_with("threshold,fpr,tpr\ninf,0.000000,0.000000\n"));
        let metrics = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
        assert!(metrics.contains("\"0.10\": 1.0"));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempdir().unwrap();
        let scores = [0.9, 0.4, 0.6, 0.2];
        let labels = [true, false, true, false];
        let curve = compute_roc(&scores, &labels).unwrap();
        let report = MetricReport {
            id: "pooled".into(),
            auc: crate::evaluation::auc(&scores, &labels).unwrap(),
            tpr_at_fpr: [(MetricReport::fpr_key(0.10), 0.5)].into_iter().collect(),
            n_pos: 2,
            n_neg: 2,
        };
        emit_report(
            std::slice::from_ref(&report),
            &[("pooled".into(), curve.clone())],
            dir.path(),
        )
        .unwrap();
        let first: Vec<Vec<u8>> = ["metrics.json", "roc_pooled.csv", "roc.svg"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap())
            .collect();
        emit_report(&[report], &[("pooled".into(), curve)], dir.path()).unwrap();
        let second: Vec<Vec<u8>> = ["metrics.json", "roc_pooled.csv", "roc.svg"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap())
            .collect();
        assert_eq!(first, second);
    }
}
