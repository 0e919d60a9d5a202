//! Hand-written SVG convergence plots.

use std::fmt::Write as _;
use std::path::Path;

use super::{write_atomic, ExperimentError, RunLog};
use crate::accel::IterationRecord;

const WIDTH: f64 = 780.0;
const PANEL_HEIGHT: f64 = 340.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One line of a plot.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub label: String,
    pub records: Vec<IterationRecord>,
}

impl From<&RunLog> for PlotSeries {
    fn from(log: &RunLog) -> Self {
        Self {
            label: log.config.label(),
            records: log.records.clone(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Tick spacing from {1, 2, 5} x 10^j giving at most ten intervals.
fn tick_step(span: f64) -> f64 {
    let mut step = 1.0;
    loop {
        for mult in [1.0, 2.0, 5.0] {
            if span / (step * mult) <= 10.0 {
                return step * mult;
            }
        }
        step *= 10.0;
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmax: f64,
    ylo: f64,
    yhi: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + self.w * x / self.xmax
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h * (self.yhi - y) / (self.yhi - self.ylo)
    }

    fn axes(&self, svg: &mut String, xlabel: &str, ylabel: &str) {
        let (x0, y0, w, h) = (self.x0, self.y0, self.w, self.h);
        let _ = writeln!(
            svg,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#333"/>"##
        );
        let step = tick_step(self.xmax);
        let mut k = 0.0;
        while k <= self.xmax + 1e-9 {
            let x = self.px(k);
            let yb = y0 + h;
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{yb:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{k}</text>"##,
                yb + 5.0,
                yb + 18.0
            );
            k += step;
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{xlabel}</text>"#,
            x0 + w / 2.0,
            y0 + h + 38.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{ylabel}</text>"#,
            x0 - 55.0,
            y0 + h / 2.0,
            x0 - 55.0,
            y0 + h / 2.0
        );
    }

    fn ytick(&self, svg: &mut String, y: f64, label: &str) {
        let py = self.py(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ccc"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{label}</text>"##,
            self.x0,
            self.x0 + self.w,
            self.x0 - 6.0,
            py + 4.0
        );
    }
}

fn polyline(svg: &mut String, points: &[(f64, f64)], color: &str, dashed: bool) {
    if points.is_empty() {
        return;
    }
    let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash = if dashed { r#" stroke-dasharray="5,3""# } else { "" };
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
        pts.join(" ")
    );
}

fn legend(svg: &mut String, x: f64, y: f64, color: &str, dashed: bool, label: &str) {
    let dash = if dashed { r#" stroke-dasharray="5,3""# } else { "" };
    let _ = writeln!(
        svg,
        r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
        x + 24.0,
        x + 30.0,
        y + 4.0,
        escape(label)
    );
}

/// Semilog plot of `‖g(u_k)‖_{V'}` against `k`, one polyline per series.
/// With `theta_panel`, a second panel overlays each series' predicted gain
/// `θ` (dashed) on the observed ratio `‖g(u_{k+1})‖ / ‖g(u_k)‖` (solid).
pub fn render_svg(series: &[PlotSeries], theta_panel: bool) -> Result<String, ExperimentError> {
    if series.is_empty() {
        return Err(ExperimentError::EmptyPlot);
    }
    let positive = |r: &IterationRecord| r.g_vprime.is_finite() && r.g_vprime > 0.0;
    let logs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.records.iter().filter(|r| positive(r)).map(|r| r.g_vprime.log10()))
        .collect();
    if logs.is_empty() {
        return Err(ExperimentError::EmptyPlot);
    }
    let ylo = logs.iter().fold(f64::INFINITY, |a, &b| a.min(b)).floor();
    let mut yhi = logs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)).ceil();
    if yhi <= ylo {
        yhi = ylo + 1.0;
    }
    let kmax = series.iter().flat_map(|s| s.records.iter().map(|r| r.k)).max().unwrap_or(0).max(1) as f64;

    let panels = if theta_panel { 2.0 } else { 1.0 };
    let height = TOP + panels * (PANEL_HEIGHT + BOTTOM) + 10.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let frame = Frame {
        x0: LEFT,
        y0: TOP,
        w: WIDTH - LEFT - RIGHT,
        h: PANEL_HEIGHT - 20.0,
        xmax: kmax,
        ylo,
        yhi,
    };
    for d in ylo as i32..=yhi as i32 {
        frame.ytick(&mut svg, d as f64, &format!("1e{d}"));
    }
    frame.axes(&mut svg, "iteration k", "‖g(u_k)‖ in V′");
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = s
            .records
            .iter()
            .filter(|r| positive(r))
            .map(|r| (frame.px(r.k as f64), frame.py(r.g_vprime.log10())))
            .collect();
        polyline(&mut svg, &pts, color, false);
        legend(&mut svg, WIDTH - RIGHT + 15.0, TOP + 10.0 + 18.0 * i as f64, color, false, &s.label);
    }

    if theta_panel {
        let y0 = TOP + PANEL_HEIGHT + BOTTOM;
        let mut pairs: Vec<Vec<(f64, f64, f64)>> = Vec::new();
        let mut top: f64 = 1.0;
        for s in series {
            let mut v = Vec::new();
            for w in s.records.windows(2) {
                let ratio = w[1].g_vprime / w[0].g_vprime;
                if ratio.is_finite() && w[0].theta.is_finite() {
                    top = top.max(ratio).max(w[0].theta);
                    v.push(((w[0].k + 1) as f64, w[0].theta, ratio));
                }
            }
            pairs.push(v);
        }
        let top = (top * 2.0).ceil().min(4.0) / 2.0;
        let frame2 = Frame {
            x0: LEFT,
            y0,
            w: WIDTH - LEFT - RIGHT,
            h: PANEL_HEIGHT - 20.0,
            xmax: kmax,
            ylo: 0.0,
            yhi: top,
        };
        let mut t = 0.0;
        while t <= top + 1e-9 {
            frame2.ytick(&mut svg, t, &format!("{t:.1}"));
            t += 0.5;
        }
        frame2.axes(&mut svg, "iteration k", "θ (dashed), observed ratio (solid)");
        for (i, v) in pairs.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let clip = |y: f64| frame2.py(y.min(top));
            let theta: Vec<(f64, f64)> = v.iter().map(|&(k, th, _)| (frame2.px(k), clip(th))).collect();
            let ratio: Vec<(f64, f64)> = v.iter().map(|&(k, _, r)| (frame2.px(k), clip(r))).collect();
            polyline(&mut svg, &ratio, color, false);
            polyline(&mut svg, &theta, color, true);
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render and write atomically to `path`.
pub fn emit_plot(series: &[PlotSeries], path: &Path, theta_panel: bool) -> Result<(), ExperimentError> {
    let svg = render_svg(series, theta_panel)?;
    write_atomic(path, svg.as_bytes())?;
    Ok(())
}
