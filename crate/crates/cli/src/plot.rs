use std::fmt::Write as _;

use inscribe_core::{JordanCurve, PointConfig, SolveReport};
use num_complex::Complex64;

const CURVE_SAMPLES: usize = 512;
const MARGIN: f64 = 24.0;
const PALETTE: [&str; 6] = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    Curve,
    Points,
    Images,
    Annotations,
}

/// Canvas size and the layers to draw, bottom to top.
#[derive(Clone, Debug)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub layers: Vec<Layer>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            width: 640,
            height: 640,
            layers: vec![Layer::Curve, Layer::Points, Layer::Images, Layer::Annotations],
        }
    }
}

struct Frame {
    lo: Complex64,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(points: &[Complex64], width: f64, height: f64) -> Frame {
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let span_x = (hi.re - lo.re).max(1e-12);
        let span_y = (hi.im - lo.im).max(1e-12);
        let scale = ((width - 2.0 * MARGIN) / span_x).min((height - 2.0 * MARGIN) / span_y);
        // center the drawing in the spare direction
        let pad = Complex64::new(
            (width - 2.0 * MARGIN - span_x * scale) / 2.0,
            (height - 2.0 * MARGIN - span_y * scale) / 2.0,
        );
        Frame {
            lo: lo - pad / scale,
            scale,
            height,
        }
    }

    fn map(&self, z: Complex64) -> (f64, f64) {
        let x = MARGIN + (z.re - self.lo.re) * self.scale;
        let y = self.height - MARGIN - (z.im - self.lo.im) * self.scale;
        (x, y)
    }
}

impl PlotSpec {
    /// Curve, `Q`, and the images `p(Q)` of every reported inscription.
    pub fn render(&self, curve: &JordanCurve, config: &PointConfig, report: &SolveReport) -> String {
        let samples = curve.sample(CURVE_SAMPLES);
        let q = config.points();
        let images: Vec<Vec<Complex64>> = report
            .inscriptions
            .iter()
            .map(|i| q.iter().map(|z| i.poly.eval(*z)).collect())
            .collect();
        let mut all: Vec<Complex64> = samples.clone();
        if self.layers.contains(&Layer::Points) {
            all.extend(&q);
        }
        if self.layers.contains(&Layer::Images) {
            all.extend(images.iter().flatten());
        }
        let frame = Frame::fit(&all, self.width as f64, self.height as f64);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for layer in &self.layers {
            match layer {
                Layer::Curve => {
                    let mut d = String::new();
                    for (i, z) in samples.iter().enumerate() {
                        let (x, y) = frame.map(*z);
                        let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
                    }
                    d.push('Z');
                    let _ = writeln!(
                        svg,
                        r#"<path id="curve" d="{d}" fill="none" stroke="black" stroke-width="1.5"/>"#
                    );
                }
                Layer::Points => {
                    let _ = writeln!(svg, r#"<g id="points">"#);
                    for (i, z) in q.iter().enumerate() {
                        let (x, y) = frame.map(*z);
                        let fill = if i < config.n() { "#1f77b4" } else { "white" };
                        let _ = writeln!(
                            svg,
                            r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{fill}" stroke="#1f77b4" stroke-width="1.5"/>"##
                        );
                    }
                    let _ = writeln!(svg, "</g>");
                }
                Layer::Images => {
                    let _ = writeln!(svg, r#"<g id="images">"#);
                    for (k, pts) in images.iter().enumerate() {
                        let color = PALETTE[k % PALETTE.len()];
                        for z in pts {
                            let (x, y) = frame.map(*z);
                            let _ = writeln!(
                                svg,
                                r#"<path d="M{:.2},{:.2} l6,6 M{:.2},{:.2} l-6,6" stroke="{color}" stroke-width="1.5"/>"#,
                                x - 3.0,
                                y - 3.0,
                                x + 3.0,
                                y - 3.0
                            );
                        }
                    }
                    let _ = writeln!(svg, "</g>");
                }
                Layer::Annotations => {
                    let _ = writeln!(svg, r#"<g id="annotations" font-family="monospace" font-size="11">"#);
                    let _ = writeln!(
                        svg,
                        r#"<text x="8" y="14">{} inscription(s), {} starts</text>"#,
                        report.inscriptions.len(),
                        report.n_starts
                    );
                    for (k, ins) in report.inscriptions.iter().enumerate().take(12) {
                        let color = PALETTE[k % PALETTE.len()];
                        let _ = writeln!(
                            svg,
                            r#"<text x="8" y="{}" fill="{color}">p{}: residual {:.1e}{}</text>"#,
                            28 + 13 * k,
                            k + 1,
                            ins.residual,
                            if ins.degenerate { " (degenerate)" } else { "" }
                        );
                    }
                    let _ = writeln!(svg, "</g>");
                }
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}
