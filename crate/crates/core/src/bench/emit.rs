//! CSV and SVG output. Every float goes through [`fmt_f64`] so repeated
//! runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use super::profile::{ProfileKind, ProfileTable};
use crate::error::{Error, Result};

/// 17 significant digits; `inf`, `-inf` and `nan` spelled out.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Inverse of [`fmt_f64`].
pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Svg,
}

pub(crate) fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    }
}

/// Serializes rows with a header into a CSV string.
pub fn csv_string<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.as_ref()).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(csv_err)?;
    String::from_utf8(bytes).map_err(csv_err)
}

/// Header `variant,tau,x,proportion`, one row per curve point.
pub fn profile_csv(tables: &[ProfileTable]) -> Result<String> {
    let mut rows = Vec::new();
    for t in tables {
        for c in &t.curves {
            for &(x, p) in &c.points {
                rows.push(vec![c.variant.clone(), fmt_f64(t.tau), fmt_f64(x), fmt_f64(p)]);
            }
        }
    }
    csv_string(&["variant", "tau", "x", "proportion"], &rows)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn tau_label(tau: f64) -> String {
    format!("{tau:e}")
}

/// Step plot with axes, labels and a legend.
pub fn profile_svg(table: &ProfileTable) -> String {
    let (x_lo, x_label) = match table.kind {
        ProfileKind::Data => (0.0, "evaluations / (n + 1)"),
        ProfileKind::Performance => (1.0, "performance ratio"),
    };
    let x_data_max = table
        .curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .fold(x_lo, f64::max);
    let x_hi = if x_data_max > x_lo { x_lo + (x_data_max - x_lo) * 1.05 } else { x_lo + 1.0 };
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| TOP + (1.0 - y) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let title = format!("{} profile, tau = {}", table.kind.as_str(), tau_label(table.tau));
    let _ = writeln!(s, "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{title}</text>", W / 2.0);
    let _ = writeln!(
        s,
        "<rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\" fill=\"none\" stroke=\"black\"/>"
    );
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y:.1}</text>",
            LEFT - 6.0,
            sy(y) + 4.0
        );
        let xv = x_lo + (x_hi - x_lo) * i as f64 / 5.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{xv:.3}</text>",
            sx(xv),
            TOP + ph + 16.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>",
        LEFT + pw / 2.0,
        H - 18.0
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">proportion of problems solved</text>",
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    for (i, c) in table.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, &(x, y)) in c.points.iter().enumerate() {
            if j == 0 {
                let _ = write!(d, "M {:.2} {:.2}", sx(x), sy(y));
            } else {
                let _ = write!(d, " H {:.2} V {:.2}", sx(x), sy(y));
            }
        }
        if !c.points.is_empty() {
            let _ = write!(d, " H {:.2}", sx(x_hi));
        }
        let _ = writeln!(s, "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>");
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(
            s,
            "<line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            ly - 4.0,
            lx + 20.0,
            ly - 4.0
        );
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{ly:.2}\">{}</text>", lx + 26.0, c.variant);
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes one table in the requested format.
pub fn emit(table: &ProfileTable, format: EmitFormat, path: &Path) -> Result<()> {
    let text = match format {
        EmitFormat::Csv => profile_csv(std::slice::from_ref(table))?,
        EmitFormat::Svg => profile_svg(table),
    };
    write_file(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::profile::Curve;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, -1.1, 1e-300, 123456.789, f64::INFINITY] {
            assert_eq!(parse_f64(&fmt_f64(v)), Some(v));
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert!(parse_f64(&fmt_f64(f64::NAN)).unwrap().is_nan());
    }

    #[test]
    fn empty_table_has_header_only() {
        assert_eq!(profile_csv(&[]).unwrap(), "variant,tau,x,proportion\n");
        let t = ProfileTable {
            kind: ProfileKind::Data,
            tau: 1e-3,
            curves: vec![],
        };
        assert_eq!(profile_csv(&[t]).unwrap(), "variant,tau,x,proportion\n");
    }

    #[test]
    fn single_point_curve_is_one_horizontal_segment() {
        let t = ProfileTable {
            kind: ProfileKind::Data,
            tau: 1e-3,
            curves: vec![Curve {
                variant: "full".into(),
                points: vec![(0.0, 0.0)],
            }],
        };
        let svg = profile_svg(&t);
        let path: Vec<&str> = svg.lines().filter(|l| l.starts_with("<path")).collect();
        assert_eq!(path.len(), 1);
        assert!(path[0].contains("d=\"M 70.00 360.00 H 620.00\""), "{}", path[0]);
        assert!(!path[0].contains(" V "));
        assert!(svg.contains("evaluations / (n + 1)"));
        assert!(svg.contains(">full</text>"));
        assert_eq!(svg, profile_svg(&t));
    }
}
