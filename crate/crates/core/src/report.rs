//! JSON reports and SVG plots.
//!
//! Both outputs are canonical: they depend only on the report contents, keys
//! appear in a fixed order, and every float is written with 17 significant
//! digits so it parses back to the identical `f64`.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::aggregate::AggregatedDataset;
use crate::cumulative::{BaselineCurve, CumulativeCurve};
use crate::data::Mode;
use crate::error::{Error, Result};
use crate::summary::SummaryReport;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Provenance {
    pub inputs: Vec<String>,
    pub mode: String,
    pub seed: u64,
    pub tool_version: String,
    pub n_groups: usize,
    pub n_records: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Statistics {
    pub max_abs: f64,
    pub range: f64,
    pub p_max_abs_asymptotic: f64,
    pub p_max_abs_mc: f64,
    pub p_range_mc: f64,
    pub mc_trials: u64,
    pub seed: u64,
}

impl From<SummaryReport> for Statistics {
    fn from(s: SummaryReport) -> Self {
        Self {
            max_abs: s.max_abs,
            range: s.range,
            p_max_abs_asymptotic: s.p_max_abs_asymptotic,
            p_max_abs_mc: s.p_max_abs_mc,
            p_range_mc: s.p_range_mc,
            mc_trials: s.mc_trials,
            seed: s.seed,
        }
    }
}

/// Everything needed to reproduce a plot or compare runs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct AnalysisReport {
    pub mode: String,
    pub n_groups: usize,
    pub n_records: usize,
    pub abscissae: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub cumulative_normalized: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_n: f64,
    pub statistics: Statistics,
    pub provenance: Provenance,
}

impl AnalysisReport {
    pub fn new(
        mode: Mode,
        agg: &AggregatedDataset,
        curve: &CumulativeCurve,
        summary: SummaryReport,
        inputs: Vec<String>,
    ) -> Self {
        let provenance = Provenance {
            inputs,
            mode: mode.to_string(),
            seed: summary.seed,
            tool_version: TOOL_VERSION.to_string(),
            n_groups: agg.len(),
            n_records: agg.record_count(),
        };
        Self {
            mode: mode.to_string(),
            n_groups: agg.len(),
            n_records: agg.record_count(),
            abscissae: curve.abscissae().to_vec(),
            cumulative: curve.ordinates().to_vec(),
            cumulative_normalized: curve.normalized(),
            sigma: curve.sigma().to_vec(),
            sigma_n: curve.sigma_n(),
            statistics: summary.into(),
            provenance,
        }
    }
}

fn number(x: f64) -> String {
    if x == 0.0 {
        // Keeps the sign of negative zero.
        if x.is_sign_negative() { "-0.0" } else { "0.0" }.to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| number(x)).collect();
    format!("[{}]", items.join(", "))
}

/// Canonical UTF-8 JSON for a report.
pub fn emit_json(report: &AnalysisReport) -> Vec<u8> {
    let s = &report.statistics;
    let p = &report.provenance;
    let inputs: Vec<String> = p.inputs.iter().map(|i| string(i)).collect();
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"mode\": {},", string(&report.mode));
    let _ = writeln!(out, "  \"n_groups\": {},", report.n_groups);
    let _ = writeln!(out, "  \"n_records\": {},", report.n_records);
    let _ = writeln!(out, "  \"abscissae\": {},", array(&report.abscissae));
    let _ = writeln!(out, "  \"cumulative\": {},", array(&report.cumulative));
    let _ = writeln!(
        out,
        "  \"cumulative_normalized\": {},",
        array(&report.cumulative_normalized)
    );
    let _ = writeln!(out, "  \"sigma\": {},", array(&report.sigma));
    let _ = writeln!(out, "  \"sigma_n\": {},", number(report.sigma_n));
    out.push_str("  \"statistics\": {\n");
    let _ = writeln!(out, "    \"max_abs\": {},", number(s.max_abs));
    let _ = writeln!(out, "    \"range\": {},", number(s.range));
    let _ = writeln!(
        out,
        "    \"p_max_abs_asymptotic\": {},",
        number(s.p_max_abs_asymptotic)
    );
    let _ = writeln!(out, "    \"p_max_abs_mc\": {},", number(s.p_max_abs_mc));
    let _ = writeln!(out, "    \"p_range_mc\": {},", number(s.p_range_mc));
    let _ = writeln!(out, "    \"mc_trials\": {},", s.mc_trials);
    let _ = writeln!(out, "    \"seed\": {}", s.seed);
    out.push_str("  },\n");
    out.push_str("  \"provenance\": {\n");
    let _ = writeln!(out, "    \"inputs\": [{}],", inputs.join(", "));
    let _ = writeln!(out, "    \"mode\": {},", string(&p.mode));
    let _ = writeln!(out, "    \"seed\": {},", p.seed);
    let _ = writeln!(out, "    \"tool_version\": {},", string(&p.tool_version));
    let _ = writeln!(out, "    \"n_groups\": {},", p.n_groups);
    let _ = writeln!(out, "    \"n_records\": {}", p.n_records);
    out.push_str("  }\n}\n");
    out.into_bytes()
}

pub fn parse_json(bytes: &[u8]) -> Result<AnalysisReport> {
    Ok(serde_json::from_slice(bytes)?)
}

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 48.0;

/// Affine map from `(A, C/σ_n)` to pixel coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Viewport {
    pub width: f64,
    pub height: f64,
    /// Vertical half-extent in units of `σ_n`.
    pub y_extent: f64,
}

impl Viewport {
    pub fn x(&self, a: f64) -> f64 {
        MARGIN_LEFT + a * (self.width - MARGIN_LEFT - MARGIN_RIGHT)
    }

    pub fn y(&self, z: f64) -> f64 {
        let h = self.height - MARGIN_TOP - MARGIN_BOTTOM;
        MARGIN_TOP + (self.y_extent - z) / (2.0 * self.y_extent) * h
    }
}

fn px(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// Viewport the plot of `report` (and an optional overlay) is drawn in.
pub fn viewport(report: &AnalysisReport, overlay: &[f64], width: u32, height: u32) -> Viewport {
    let peak = report
        .cumulative_normalized
        .iter()
        .chain(overlay)
        .fold(0.0f64, |m, z| m.max(z.abs()));
    let y_extent = if peak > 0.0 { peak * 1.1 } else { 1.0 };
    Viewport {
        width: f64::from(width),
        height: f64::from(height),
        y_extent,
    }
}

/// Standalone SVG of `(A_ℓ, C_ℓ/σ_n)` as a polyline over a zero line.
pub fn emit_svg(report: &AnalysisReport, width: u32, height: u32) -> Result<Vec<u8>> {
    render_svg(report, None, width, height)
}

/// [`emit_svg`] with the per-record baseline curve overlaid as a dashed line.
pub fn emit_svg_with_baseline(
    report: &AnalysisReport,
    baseline: &BaselineCurve,
    width: u32,
    height: u32,
) -> Result<Vec<u8>> {
    render_svg(report, Some(baseline), width, height)
}

fn polyline(view: &Viewport, xs: &[f64], zs: &[f64]) -> String {
    let points: Vec<String> = xs
        .iter()
        .zip(zs)
        .map(|(&a, &z)| format!("{},{}", px(view.x(a)), px(view.y(z))))
        .collect();
    points.join(" ")
}

fn render_svg(
    report: &AnalysisReport,
    baseline: Option<&BaselineCurve>,
    width: u32,
    height: u32,
) -> Result<Vec<u8>> {
    if width < 100 || height < 100 {
        return Err(Error::InvalidArgument(format!(
            "plot size {width}x{height} is below the 100x100 minimum"
        )));
    }
    let overlay: Vec<f64> = baseline
        .map(|b| b.ordinates().iter().map(|c| c / report.sigma_n).collect())
        .unwrap_or_default();
    let view = viewport(report, &overlay, width, height);
    let (x0, x1) = (view.x(0.0), view.x(1.0));
    let (top, bottom) = (view.y(view.y_extent), view.y(-view.y_extent));
    let zero = view.y(0.0);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        px(x0),
        px(top),
        px(x1 - x0),
        px(bottom - top)
    );
    let _ = writeln!(
        out,
        r#"<line class="zero" x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-width="1"/>"#,
        px(x0),
        px(zero),
        px(x1),
        px(zero)
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let x = px(view.x(tick));
        let _ = writeln!(
            out,
            r#"<line class="tick" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black" stroke-width="1"/>"#,
            px(bottom),
            px(bottom + 5.0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{tick}</text>"#,
            px(bottom + 18.0)
        );
    }
    for z in [-view.y_extent, 0.0, view.y_extent] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{:.2}</text>"#,
            px(x0 - 6.0),
            px(view.y(z) + 4.0),
            z
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">cumulative weight fraction</text>"#,
        px((x0 + x1) / 2.0),
        px(f64::from(height) - 8.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="13" text-anchor="middle">cumulative difference / sigma_n ({}, max_abs {:.4}, range {:.4})</text>"#,
        px((x0 + x1) / 2.0),
        report.mode,
        report.statistics.max_abs,
        report.statistics.range
    );
    if let Some(b) = baseline {
        let _ = writeln!(
            out,
            r#"<polyline class="baseline" fill="none" stroke="orange" stroke-width="1" stroke-dasharray="4 3" points="{}"/>"#,
            polyline(&view, b.abscissae(), &overlay)
        );
    }
    let _ = writeln!(
        out,
        r#"<polyline class="curve" fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        polyline(&view, &report.abscissae, &report.cumulative_normalized)
    );
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}
