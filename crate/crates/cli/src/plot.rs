//! Hand-written SVG line charts of a mission trace.

use std::fmt::Write;

use ingress_core::nav::MissionRecord;

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 55.0;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    points: Vec<(f64, f64)>,
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn panel(svg: &mut String, top: f64, title: &str, y_label: &str, series: &[Series]) {
    let (x0, x1) = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (left, right) = (MARGIN, PANEL_W - 20.0);
    let (upper, lower) = (top + 30.0, top + PANEL_H - 40.0);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
    let sy = |y: f64| lower - (y - y0) / (y1 - y0) * (lower - upper);

    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{title}</text>"#,
        PANEL_W / 2.0,
        top + 18.0
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{left:.1}" y="{upper:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        right - left,
        lower - upper
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{xv:.2}</text>"#,
            sx(xv),
            lower + 14.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{yv:.1}</text>"#,
            left - 4.0,
            sy(yv) + 3.0
        );
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            svg,
            r##"<line x1="{left:.1}" y1="{0:.1}" x2="{right:.1}" y2="{0:.1}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
            sy(0.0)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">y position (increases to the right)</text>"#,
        (left + right) / 2.0,
        lower + 30.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{0:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {0:.1})">{y_label}</text>"#,
        (upper + lower) / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        if pts.len() == 1 {
            let (x, y) = s.points[0];
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                sx(x),
                sy(y),
                s.color
            );
        } else if !pts.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                pts.join(" "),
                s.color
            );
        }
        let ly = upper + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            right - 110.0,
            right - 90.0,
            s.color,
            right - 85.0,
            ly + 4.0,
            s.label
        );
    }
}

/// Relative angle and opening widths against the lateral position, as one
/// SVG document with two panels. Rows without a measurement are skipped.
pub fn mission_svg(records: &[MissionRecord]) -> String {
    let pick = |f: &dyn Fn(&MissionRecord) -> Option<f64>| -> Vec<(f64, f64)> {
        records.iter().filter_map(|r| f(r).map(|v| (r.position.y, v))).collect()
    };
    let angle = [
        Series {
            label: "estimated",
            color: "#1f77b4",
            points: pick(&|r| r.est_psi.map(f64::to_degrees)),
        },
        Series {
            label: "ground truth",
            color: "#999999",
            points: pick(&|r| Some(r.true_psi.to_degrees())),
        },
    ];
    let widths = [
        Series {
            label: "total",
            color: "#2ca02c",
            points: pick(&|r| r.opening.map(|o| o.total)),
        },
        Series {
            label: "left edge",
            color: "#d62728",
            points: pick(&|r| r.opening.map(|o| o.left)),
        },
        Series {
            label: "right edge",
            color: "#9467bd",
            points: pick(&|r| r.opening.map(|o| o.right)),
        },
    ];
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{}" viewBox="0 0 {PANEL_W} {}" font-family="sans-serif">"#,
        2.0 * PANEL_H,
        2.0 * PANEL_H
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    panel(&mut svg, 0.0, "Relative yaw during the mission", "relative yaw (deg)", &angle);
    panel(&mut svg, PANEL_H, "Opening width", "pixels", &widths);
    svg.push_str("</svg>\n");
    svg
}
