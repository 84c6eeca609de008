//! Deterministic CSV/JSON/SVG emission. Every CSV numeric carries 17
//! significant digits so values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

/// 17 significant digits, round-trippable through `str::parse::<f64>()`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    buf: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        CsvWriter {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "row width must match header");
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            let _ = write!(self.buf, "{}", fmt_num(*v));
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_file(dir, name, &text)
}

/// Minimal static SVG: polylines in a fixed viewport with axis lines and
/// min/max annotations.
pub fn render_polylines(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> String {
    const W: f64 = 800.0;
    const H: f64 = 600.0;
    const M: f64 = 60.0;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (_, pts) in series {
        for &(x, y) in pts {
            xs.push(x);
            ys.push(y);
        }
    }
    let (x_min, x_max) = bounds(&xs);
    let (y_min, y_max) = bounds(&ys);
    let sx = |x: f64| M + (x - x_min) / (x_max - x_min).max(1e-300) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y_min) / (y_max - y_min).max(1e-300) * (H - 2.0 * M);

    let palette = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    ];
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"25\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"16\">{}</text>",
        W / 2.0,
        title
    );
    // axes
    let _ = writeln!(
        svg,
        "  <line x1=\"{M}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{:.1}\" stroke=\"black\"/>",
        H - M
    );
    // zero lines when inside range
    if y_min < 0.0 && y_max > 0.0 {
        let _ = writeln!(
            svg,
            "  <line x1=\"{M}\" y1=\"{:.2}\" x2=\"{:.1}\" y2=\"{:.2}\" stroke=\"#cccccc\" stroke-dasharray=\"4 4\"/>",
            sy(0.0),
            W - M,
            sy(0.0)
        );
    }
    if x_min < 0.0 && x_max > 0.0 {
        let _ = writeln!(
            svg,
            "  <line x1=\"{:.2}\" y1=\"{M}\" x2=\"{:.2}\" y2=\"{:.1}\" stroke=\"#cccccc\" stroke-dasharray=\"4 4\"/>",
            sx(0.0),
            sx(0.0),
            H - M
        );
    }
    // axis annotations
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">{}</text>",
        W / 2.0,
        H - 15.0,
        x_label
    );
    let _ = writeln!(
        svg,
        "  <text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        H / 2.0,
        H / 2.0,
        y_label
    );
    for (txt, x, y, anchor) in [
        (format!("{x_min:.6}"), M, H - M + 18.0, "middle"),
        (format!("{x_max:.6}"), W - M, H - M + 18.0, "middle"),
        (format!("{y_min:.6}"), M - 8.0, H - M, "end"),
        (format!("{y_max:.6}"), M - 8.0, M + 4.0, "end"),
    ] {
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" font-family=\"monospace\" font-size=\"11\">{txt}</text>"
        );
    }
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = palette[i % palette.len()];
        let mut d = String::new();
        for &(x, y) in pts {
            if !d.is_empty() {
                d.push(' ');
            }
            let _ = write!(d, "{:.3},{:.3}", sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            "  <polyline points=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{}</text>",
            W - M - 150.0,
            M + 18.0 * (i as f64 + 1.0),
            name
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            1.0,
            -1.5,
            std::f64::consts::PI,
            1e-300,
            2.2e300,
            -7.062413e-108,
        ] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn csv_shape() {
        let mut w = CsvWriter::new(&["a", "b"]);
        w.row(&[1.0, 2.0]);
        let text = w.finish();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("a,b"));
        assert_eq!(lines.next().unwrap().split(',').count(), 2);
    }

    #[test]
    fn svg_is_deterministic() {
        let series = vec![(
            "alpha".to_string(),
            vec![(0.0, 1.0), (1.0, 2.0), (2.0, 0.5)],
        )];
        let a = render_polylines("t", "x", "y", &series);
        let b = render_polylines("t", "x", "y", &series);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
    }
}
