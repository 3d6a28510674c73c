use std::fmt::Write as _;
use std::path::Path;

use super::sweep::SweepRow;
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 64.0;

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-300 {
        Some((lo - 0.5, hi + 0.5))
    } else {
        Some((lo, hi))
    }
}

fn polyline(points: &[(f64, f64)], x: (f64, f64), y: (f64, f64), style: &str) -> String {
    let sx = |v: f64| MARGIN + (v - x.0) / (x.1 - x.0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y.0) / (y.1 - y.0) * (HEIGHT - 2.0 * MARGIN);
    let coords: Vec<String> = points
        .iter()
        .map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b)))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"black\" {style} points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Quick-look plot: the left series is `s_max` (or `s_diff` when `s_max`
/// is absent) drawn solid, `a_pm` on the right axis drawn dashed.
pub fn render_svg(rows: &[SweepRow], x_label: &str) -> String {
    let (left_name, left): (&str, Vec<(f64, f64)>) = {
        let s_max: Vec<_> = rows
            .iter()
            .filter_map(|r| r.s_max.map(|v| (r.sweep_value_ghz, v)))
            .collect();
        if s_max.is_empty() {
            (
                "S_diff",
                rows.iter()
                    .filter_map(|r| r.s_diff.map(|v| (r.sweep_value_ghz, v)))
                    .collect(),
            )
        } else {
            ("S_max", s_max)
        }
    };
    let right: Vec<_> = rows
        .iter()
        .filter_map(|r| r.a_pm.map(|v| (r.sweep_value_ghz, v)))
        .collect();
    let x = extent(rows.iter().map(|r| r.sweep_value_ghz)).unwrap_or((0.0, 1.0));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label} [GHz]: {:.3} .. {:.3}</text>",
        WIDTH / 2.0,
        HEIGHT - MARGIN / 3.0,
        x.0,
        x.1
    );
    if let Some(y) = extent(left.iter().map(|p| p.1)) {
        svg.push_str(&polyline(&left, x, y, "stroke-width=\"2\""));
        let _ = writeln!(
            svg,
            "<text x=\"8\" y=\"{}\">{left_name} {:.4}..{:.4}</text>",
            MARGIN - 16.0,
            y.0,
            y.1
        );
    }
    if let Some(y) = extent(right.iter().map(|p| p.1)) {
        svg.push_str(&polyline(
            &right,
            x,
            y,
            "stroke-width=\"1.5\" stroke-dasharray=\"6 4\"",
        ));
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">A+- {:.4}..{:.4} (dashed)</text>",
            WIDTH - 8.0,
            MARGIN - 16.0,
            y.0,
            y.1
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(rows: &[SweepRow], x_label: &str, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(rows, x_label)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
