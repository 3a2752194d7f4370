//! Artifact emission: CSV tables, JSON reports and SVG overlay plots.
//! Floats go through the shortest-roundtrip formatter and the plot uses
//! fixed-precision coordinates, so reruns are byte-identical.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path)?;
    f.write_all(text.as_bytes())?;
    Ok(path)
}

pub fn write_csv<I>(dir: &Path, name: &str, header: &str, rows: I) -> Result<PathBuf, CliError>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row.as_ref());
        text.push('\n');
    }
    write_text(dir, name, &text)
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// One polyline of the overlay plot.
pub struct Curve {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 680.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 34.0;
const BOTTOM: f64 = 58.0;

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-2..1e4).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Overlay plot of decreasing profiles: x is measure, y is value. With
/// `log_x` the x coordinates must be positive.
pub fn svg_overlay(title: &str, x_label: &str, y_label: &str, log_x: bool, curves: &[Curve]) -> String {
    let fx = |x: f64| if log_x { x.ln() } else { x };
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for c in curves {
        for &(x, y) in &c.points {
            x_lo = x_lo.min(fx(x));
            x_hi = x_hi.max(fx(x));
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if !(x_hi > x_lo) {
        x_hi = x_lo + 1.0;
    }
    if !(y_hi > y_lo) {
        y_hi = y_lo + 1.0;
    }
    let pad = 0.04 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
    let px = |x: f64| LEFT + (fx(x) - x_lo) / (x_hi - x_lo) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>",
        0.5 * WIDTH
    );

    // Frame and ticks.
    let _ = writeln!(
        s,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    let ticks = 5usize;
    for i in 0..=ticks {
        let t = i as f64 / ticks as f64;
        let xv = x_lo + t * (x_hi - x_lo);
        let xpix = LEFT + t * (WIDTH - LEFT - RIGHT);
        let shown = if log_x { xv.exp() } else { xv };
        let _ = writeln!(
            s,
            "<line x1=\"{xpix:.1}\" y1=\"{:.1}\" x2=\"{xpix:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{xpix:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            HEIGHT - BOTTOM + 20.0,
            tick_label(shown)
        );
        let yv = y_lo + t * (y_hi - y_lo);
        let ypix = HEIGHT - BOTTOM - t * (HEIGHT - TOP - BOTTOM);
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{ypix:.1}\" x2=\"{LEFT}\" y2=\"{ypix:.1}\" stroke=\"black\"/>",
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            LEFT - 9.0,
            ypix + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_label}</text>",
        0.5 * (LEFT + WIDTH - RIGHT),
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{y_label}</text>",
        0.5 * (TOP + HEIGHT - BOTTOM),
        0.5 * (TOP + HEIGHT - BOTTOM)
    );

    for c in curves {
        let mut pts = String::new();
        for &(x, y) in &c.points {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            pts.trim_end(),
            c.color
        );
    }

    // Legend, top-right inside the frame.
    for (i, c) in curves.iter().enumerate() {
        let y = TOP + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            WIDTH - RIGHT - 150.0,
            WIDTH - RIGHT - 120.0,
            c.color
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            WIDTH - RIGHT - 112.0,
            y + 4.0,
            c.label
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_has_one_polyline_per_curve() {
        let curves = vec![
            Curve {
                label: "u".into(),
                color: "#1f6fb4",
                points: vec![(0.1, 1.0), (1.0, 0.0)],
            },
            Curve {
                label: "v".into(),
                color: "#d03a2f",
                points: vec![(0.1, 2.0), (1.0, 0.5)],
            },
        ];
        let svg = svg_overlay("profiles", "s", "value", true, &curves);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">u</text>") && svg.contains(">v</text>"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn tick_labels_use_scientific_notation_outside_moderate_range() {
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(1.5), "1.500");
        assert_eq!(tick_label(2.0e-5), "2.00e-5");
        assert_eq!(tick_label(-3.0e7), "-3.00e7");
    }

    #[test]
    fn csv_files_end_with_a_newline() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(dir.path(), "t.csv", "a,b", ["1,2", "3,4"]).unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "a,b\n1,2\n3,4\n");
    }
}
