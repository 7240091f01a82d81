//! CSV, JSON and SVG writers.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use weyl_core::analysis::ExponentFit;

/// Rows of plain fields; no field may contain a comma or newline.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip decimal; Rust float formatting ignores locale.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Reference line `λ^slope` through a given point.
pub struct Reference {
    pub label: String,
    pub slope: f64,
}

/// Log-log plot of the window maxima, the fitted line and reference slopes.
pub fn envelope_svg(title: &str, fit: &ExponentFit, references: &[Reference]) -> String {
    let (w, h, pad) = (640.0, 440.0, 60.0);
    let xs: Vec<f64> = fit.windows.iter().map(|v| v.lambda_at_max.log10()).collect();
    let ys: Vec<f64> = fit.windows.iter().map(|v| v.max_abs_error.log10()).collect();
    let line = |x: f64, slope: f64, intercept: f64| {
        (slope * x * std::f64::consts::LN_10 + intercept) / std::f64::consts::LN_10
    };
    let (x0, x1) = bounds(&xs);
    let mut all_y = ys.clone();
    all_y.push(line(x0, fit.slope, fit.intercept));
    all_y.push(line(x1, fit.slope, fit.intercept));
    // references pass through the first fitted point
    let anchor = (x0, line(x0, fit.slope, fit.intercept));
    for r in references {
        all_y.push(anchor.1 + r.slope * (x1 - x0));
    }
    let (y0, y1) = bounds(&all_y);
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    for (label, v, x, y, anchor_attr) in
        [("log10 lambda", x0, pad, h - pad + 18.0, "start"), ("", x1, w - pad, h - pad + 18.0, "end")]
    {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor_attr}" font-family="sans-serif" font-size="11">{v:.2} {label}</text>"#
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{y1:.2}</text>"#,
        pad - 4.0,
        pad + 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{y0:.2}</text>"#,
        pad - 4.0,
        h - pad
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle" font-family="sans-serif" font-size="11">log10 max |error|</text>"#,
        h / 2.0,
        h / 2.0
    );
    let colours = ["#c0392b", "#27ae60", "#8e44ad", "#d35400"];
    for (i, r) in references.iter().enumerate() {
        let c = colours[i % colours.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{c}" stroke-dasharray="6 4"/>"#,
            px(anchor.0),
            py(anchor.1),
            px(x1),
            py(anchor.1 + r.slope * (x1 - x0))
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{c}">{} (slope {:.3})</text>"#,
            pad + 8.0,
            pad + 16.0 * (i as f64 + 2.0),
            escape(&r.label),
            r.slope
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#2c3e50" stroke-width="2"/>"##,
        px(x0),
        py(line(x0, fit.slope, fit.intercept)),
        px(x1),
        py(line(x1, fit.slope, fit.intercept))
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="#2c3e50">fit (slope {:.4})</text>"##,
        pad + 8.0,
        pad + 16.0,
        fit.slope
    );
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#2980b9"/>"##, px(*x), py(*y));
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_floats_have_seventeen_digits() {
        let s = to_json(&serde_json::json!({"x": 0.1, "n": 3})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_render() {
        let mut c = Csv::new(&["a", "b"]);
        c.push(vec![num(1.5), num(2.0)]);
        assert_eq!(c.render(), "a,b\n1.5,2\n");
    }
}
