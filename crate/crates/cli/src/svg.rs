//! Minimal static plots. Coordinates are printed with fixed precision and
//! nothing time-dependent is embedded, so identical data give identical bytes.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Scatter,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(points: &[(f64, f64)]) -> Self {
        let range = |f: fn(&(f64, f64)) -> f64| {
            let (lo, hi) = points
                .iter()
                .map(f)
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if lo > hi {
                (-1.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 1.0, hi + 1.0)
            } else {
                (lo, hi)
            }
        };
        Self {
            x: range(|p| p.0),
            y: range(|p| p.1),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }
}

const COLOURS: [&str; 5] = ["steelblue", "darkorange", "seagreen", "crimson", "purple"];

/// Series plotted in one labelled frame. Empty data still give a valid
/// document with axes.
pub fn render(title: &str, x_label: &str, y_label: &str, series: &[Vec<(f64, f64)>], style: Style) -> String {
    let all: Vec<(f64, f64)> = series.iter().flatten().copied().collect();
    let f = Frame::fit(&all);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.1} {y1:.1} L{x0:.1} {y0:.1} L{x1:.1} {y0:.1}" stroke="black" fill="none"/>"#
    );
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, t: &str| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="12" text-anchor="{anchor}">{}</text>"#,
            escape(t)
        );
    };
    text(&mut s, W / 2.0, 20.0, "middle", title);
    text(&mut s, W / 2.0, H - 12.0, "middle", x_label);
    text(&mut s, 14.0, H / 2.0, "start", y_label);
    text(&mut s, x0, y0 + 16.0, "middle", &format!("{:.3}", f.x.0));
    text(&mut s, x1, y0 + 16.0, "middle", &format!("{:.3}", f.x.1));
    text(&mut s, x0 - 6.0, y0, "end", &format!("{:.3}", f.y.0));
    text(&mut s, x0 - 6.0, y1 + 4.0, "end", &format!("{:.3}", f.y.1));
    for (k, points) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let finite = points.iter().filter(|p| p.0.is_finite() && p.1.is_finite());
        match style {
            Style::Line if points.len() > 1 => {
                let coords: Vec<String> = finite.map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" stroke="{colour}" stroke-width="1" fill="none"/>"#,
                    coords.join(" ")
                );
            }
            _ => {
                for &(x, y) in finite {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="1.2" fill="{colour}"/>"#,
                        f.px(x),
                        f.py(y)
                    );
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
