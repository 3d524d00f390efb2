//! Minimal static SVG line charts: axes, ticks, legend, polylines and
//! point markers. Pure rendering of already-computed series; no effect on
//! numerical outputs.

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesStyle {
    Line,
    Dots,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: SeriesStyle,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            style: SeriesStyle::Line,
        }
    }

    pub fn dots(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            style: SeriesStyle::Dots,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Pin the y axis to start at zero.
    pub y_from_zero: bool,
    /// Horizontal guide line, e.g. the critical threshold of 1.
    pub guide_y: Option<f64>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let range = hi - lo;
    if range <= 0.0 || !range.is_finite() {
        return vec![lo];
    }
    let raw = range / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|&s| range / s <= 6.0)
        .unwrap_or(magnitude);
    let mut out = Vec::new();
    let mut v = (lo / step).ceil() * step;
    while v <= hi + 1e-9 * range {
        out.push(v);
        v += step;
    }
    out
}

/// Renders the chart as a standalone SVG document.
pub fn line_chart(spec: &ChartSpec, series: &[Series]) -> String {
    let finite = |x: &&(f64, f64)| x.0.is_finite() && x.1.is_finite();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for p in s.points.iter().filter(finite) {
            x_lo = x_lo.min(p.0);
            x_hi = x_hi.max(p.0);
            y_lo = y_lo.min(p.1);
            y_hi = y_hi.max(p.1);
        }
    }
    if !x_lo.is_finite() {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if spec.y_from_zero {
        y_lo = y_lo.min(0.0);
    }
    if let Some(g) = spec.guide_y {
        y_lo = y_lo.min(g);
        y_hi = y_hi.max(g);
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }
    let pad = 0.04 * (y_hi - y_lo);
    let (y_lo, y_hi) = (
        if spec.y_from_zero && y_lo == 0.0 {
            0.0
        } else {
            y_lo - pad
        },
        y_hi + pad,
    );

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = move |y: f64| MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"26\" font-size=\"17\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(&spec.title)
    ));

    // axes
    let (x0, y0) = (MARGIN_L, MARGIN_T + plot_h);
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"black\"/>\n",
        MARGIN_L + plot_w
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{MARGIN_T}\" x2=\"{x0}\" y2=\"{y0}\" stroke=\"black\"/>\n"
    ));
    for t in ticks(x_lo, x_hi) {
        let x = sx(t);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            y0 + 20.0,
            tick_label(t)
        ));
    }
    for t in ticks(y_lo, y_hi) {
        let y = sy(t);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{x0}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            x0 - 9.0,
            y + 4.0,
            tick_label(t)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 14.0,
        xml_escape(&spec.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        xml_escape(&spec.y_label)
    ));

    if let Some(g) = spec.guide_y {
        let y = sy(g);
        svg.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#888888\" \
             stroke-dasharray=\"6 4\"/>\n",
            MARGIN_L + plot_w
        ));
    }

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().filter(finite).copied().collect();
        match s.style {
            SeriesStyle::Line => {
                if pts.len() >= 2 {
                    let path: Vec<String> = pts
                        .iter()
                        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    svg.push_str(&format!(
                        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" \
                         points=\"{}\"/>\n",
                        path.join(" ")
                    ));
                } else {
                    for &(x, y) in &pts {
                        svg.push_str(&format!(
                            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{color}\"/>\n",
                            sx(x),
                            sy(y)
                        ));
                    }
                }
            }
            SeriesStyle::Dots => {
                for &(x, y) in &pts {
                    svg.push_str(&format!(
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"{color}\" \
                         stroke=\"black\"/>\n",
                        sx(x),
                        sy(y)
                    ));
                }
            }
        }
        let ly = MARGIN_T + 16.0 * i as f64 + 4.0;
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"4\" fill=\"{color}\"/>\n",
            MARGIN_L + plot_w - 150.0,
            ly
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            MARGIN_L + plot_w - 130.0,
            ly + 6.0,
            xml_escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Expands a piecewise-constant schedule into staircase polyline points.
pub fn staircase(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(times.len() * 2);
    for i in 0..times.len() {
        if i > 0 && values[i] != values[i - 1] {
            out.push((times[i], values[i - 1]));
        }
        out.push((times[i], values[i]));
    }
    out
}
