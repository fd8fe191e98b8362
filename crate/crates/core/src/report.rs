//! Machine-readable outputs: JSON with fixed float precision, CSV rows,
//! JSONL dialogue files, aligned text tables and standalone SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::analysis::{CorrelationRow, GroupSummary};
use crate::error::{Error, Result};
use crate::metrics::{Dialogue, Estimate, MetricReport};
use crate::num::Real;

/// Decimal places kept for every float written to JSON or CSV. Rounding here
/// keeps outputs identical across platforms whose libm differ in the last ulp.
pub const DECIMALS: i32 = 9;

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let r = (x * scale).round() / scale;
    if r == 0.0 {
        0.0 // no "-0.0"
    } else {
        r
    }
}

fn round_value(v: &mut Value, decimals: i32) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_to(n.as_f64().expect("f64"), decimals);
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_value(i, decimals)),
        Value::Object(map) => map.values_mut().for_each(|i| round_value(i, decimals)),
        _ => {}
    }
}

/// Pretty JSON with floats rounded to [`DECIMALS`] places and a final newline.
pub fn to_json<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    round_value(&mut v, DECIMALS);
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_json<S: Serialize + ?Sized>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    write_text(path, &to_json(value)?)
}

/// One dialogue per line, in the format [`crate::ingest::read_dialogues`] reads.
pub fn dialogues_jsonl(dialogues: &[Dialogue]) -> String {
    let mut out = String::new();
    for d in dialogues {
        out.push_str(&serde_json::to_string(d).expect("dialogue serializes"));
        out.push('\n');
    }
    out
}

pub fn write_dialogues(path: impl AsRef<Path>, dialogues: &[Dialogue]) -> Result<()> {
    write_text(path, &dialogues_jsonl(dialogues))
}

/// Fixed-precision rendering; empty for missing values.
pub fn fmt_opt<T: Real>(x: Option<T>) -> String {
    match x.and_then(|v| v.to_f64()) {
        Some(v) if v.is_finite() => format!("{:.6}", round_to(v, 6)),
        _ => String::new(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

const METRICS: [&str; 6] = ["b_f", "b_m", "x_f", "x_m", "i_f", "i_m"];

fn estimates<T>(r: &MetricReport<T>) -> [&Estimate<T>; 6] {
    [&r.b_f, &r.b_m, &r.x_f, &r.x_m, &r.i_f, &r.i_m]
}

/// One row per unit: value, interval and counts of every metric.
pub fn metric_reports_csv<T: Real>(reports: &[MetricReport<T>]) -> String {
    let mut header = vec!["unit".to_string(), "n_dialogues".to_string()];
    for m in METRICS {
        for suffix in ["", "_lo", "_hi", "_hits", "_total"] {
            header.push(format!("{m}{suffix}"));
        }
    }
    header.push("asymmetry".into());
    let mut out = header.join(",");
    out.push('\n');
    for r in reports {
        let mut row = vec![csv_field(&r.unit), r.n_dialogues.to_string()];
        for e in estimates(r) {
            row.push(fmt_opt(e.value));
            row.push(fmt_opt(e.ci_low));
            row.push(fmt_opt(e.ci_high));
            row.push(e.hits.to_string());
            row.push(e.total.to_string());
        }
        row.push(fmt_opt(r.asymmetry));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn correlations_csv<T: Real>(rows: &[CorrelationRow<T>]) -> String {
    let mut out = String::from("metric,against,control,n,r,p,spearman,spearman_p,error\n");
    for r in rows {
        let fields = [
            csv_field(&r.metric),
            csv_field(&r.against),
            csv_field(r.control.as_deref().unwrap_or("")),
            r.n.to_string(),
            fmt_opt(r.pearson.map(|s| s.effect)),
            fmt_opt(r.pearson.map(|s| s.p_value)),
            fmt_opt(r.spearman.map(|s| s.effect)),
            fmt_opt(r.spearman.map(|s| s.p_value)),
            csv_field(r.error.as_deref().unwrap_or("")),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Left-aligned first column, right-aligned others.
pub fn format_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate().take(cols) {
            width[i] = width[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = width[i])
                } else {
                    format!("{c:>w$}", w = width[i])
                }
            })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, &mut header.iter().copied());
    let rule: Vec<String> = width.iter().map(|&w| "-".repeat(w)).collect();
    line(&mut out, &mut rule.iter().map(String::as_str));
    for row in rows {
        line(&mut out, &mut row.iter().map(String::as_str));
    }
    out
}

/// Human table of metric reports.
pub fn metric_table<T: Real>(reports: &[MetricReport<T>]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.unit.clone(), r.n_dialogues.to_string()];
            row.extend(estimates(r).iter().map(|e| {
                let s = fmt_opt(e.value);
                if s.is_empty() { "-".into() } else { s }
            }));
            let a = fmt_opt(r.asymmetry);
            row.push(if a.is_empty() { "-".into() } else { a });
            row
        })
        .collect();
    format_table(&["unit", "D", "B_F", "B_M", "X_F", "X_M", "I_F", "I_M", "I_M-I_F"], &rows)
}

// ---------------------------------------------------------------------------
// SVG

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn around(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let m = (hi - lo) * 0.05;
                (lo - m, hi + m)
            }
        };
        let (x0, x1) = span(&mut xs.clone());
        let (y0, y1) = span(&mut ys.clone());
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(title: &str, x_label: &str, y_label: &str, f: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, escape(title));
    let (l, r, t, b) = (PAD, W - PAD, PAD, H - PAD);
    let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for i in 0..=4 {
        let fx = f.x0 + (f.x1 - f.x0) * f64::from(i) / 4.0;
        let fy = f.y0 + (f.y1 - f.y0) * f64::from(i) / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, f.px(fx), b + 14.0, tick(fx));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, l - 4.0, f.py(fy) + 4.0, tick(fy));
    }
    s
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{:.3}", round_to(v, 3))
    }
}

/// Least-squares line `y = a + b x`; `None` with fewer than two distinct x.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (points.len() >= 2 && sxx > 0.0).then(|| {
        let b = sxy / sxx;
        (my - b * mx, b)
    })
}

/// Labelled scatter plot with an optional dashed least-squares trend line.
pub fn scatter_svg(title: &str, x_label: &str, y_label: &str, points: &[(String, f64, f64)], trend: bool) -> String {
    let f = Frame::around(points.iter().map(|p| p.1), points.iter().map(|p| p.2));
    let mut s = svg_open(title, x_label, y_label, &f);
    for (label, x, y) in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{}"><title>{}</title></circle>"#,
            f.px(*x),
            f.py(*y),
            PALETTE[0],
            escape(label)
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="8">{}</text>"#, f.px(*x) + 4.0, f.py(*y) - 3.0, escape(label));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.1, p.2)).collect();
    if let Some((a, b)) = linear_fit(&xy).filter(|_| trend) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-dasharray="6 4"/>"#,
            f.px(f.x0),
            f.py(a + b * f.x0),
            f.px(f.x1),
            f.py(a + b * f.x1),
            PALETTE[1]
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Group centroids in `(B_F, B_M)` with one-standard-deviation ellipses.
pub fn centroid_svg<T: Real>(title: &str, groups: &[GroupSummary<T>]) -> String {
    let f64s = |g: &GroupSummary<T>| {
        (
            g.centroid.0.to_f64().unwrap_or(f64::NAN),
            g.centroid.1.to_f64().unwrap_or(f64::NAN),
            g.sd.0.to_f64().unwrap_or(0.0),
            g.sd.1.to_f64().unwrap_or(0.0),
        )
    };
    let gs: Vec<(f64, f64, f64, f64)> = groups.iter().map(f64s).filter(|g| g.0.is_finite() && g.1.is_finite()).collect();
    let f = Frame::around(
        gs.iter().flat_map(|g| [g.0 - g.2, g.0 + g.2]),
        gs.iter().flat_map(|g| [g.1 - g.3, g.1 + g.3]),
    );
    let mut s = svg_open(title, "B_F", "B_M", &f);
    let mut k = 0;
    for g in groups {
        let (cx, cy, sx, sy) = f64s(g);
        if !(cx.is_finite() && cy.is_finite()) {
            continue;
        }
        let color = PALETTE[k % PALETTE.len()];
        let rx = (f.px(cx + sx) - f.px(cx)).abs();
        let ry = (f.py(cy + sy) - f.py(cy)).abs();
        let _ = writeln!(
            s,
            r#"<ellipse cx="{:.1}" cy="{:.1}" rx="{rx:.1}" ry="{ry:.1}" fill="{color}" fill-opacity="0.15" stroke="{color}"/>"#,
            f.px(cx),
            f.py(cy)
        );
        let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{color}"/>"#, f.px(cx), f.py(cy));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            W - PAD + 4.0 - 110.0,
            PAD + 14.0 * (k as f64 + 1.0),
            escape(&g.label)
        );
        k += 1;
    }
    s.push_str("</svg>\n");
    s
}
