//! CSV tables and a minimal SVG line chart.

use std::fmt::Write as _;
use std::path::Path;

use crate::bounds::BoundReport;
use crate::error::Result;
use crate::sim::{BoundCheck, EnsembleResult};

pub const REGRET_HEADER: &str = "t,mean_cum_regret,sem,lai_robbins_lb";
pub const BOUNDS_HEADER: &str = "arm,delta_i,delta_m_i,case,eta_i,nhat_i,bound_total";
pub const VERIFY_HEADER: &str = "arm,empirical_n_i,bound,satisfied";

pub fn regret_csv(ensemble: &EnsembleResult, lower_bound: &[f64]) -> String {
    let mut s = String::with_capacity(32 * ensemble.mean_cumulative_regret.len());
    s.push_str(REGRET_HEADER);
    s.push('\n');
    for (k, (m, e)) in ensemble.mean_cumulative_regret.iter().zip(&ensemble.sem).enumerate() {
        writeln!(s, "{},{m},{e},{}", k + 1, lower_bound[k]).unwrap();
    }
    s
}

pub fn bounds_csv(report: &BoundReport) -> String {
    let mut s = String::from(BOUNDS_HEADER);
    s.push('\n');
    for b in &report.arms {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            b.arm,
            b.gap,
            b.prior_error,
            b.case,
            b.eta,
            b.nhat,
            b.total()
        )
        .unwrap();
    }
    s
}

pub fn verify_csv(rows: &[BoundCheck]) -> String {
    let mut s = String::from(VERIFY_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(s, "{},{},{},{}", r.arm, r.empirical, r.bound, r.satisfied).unwrap();
    }
    s
}

/// One named polyline.
pub struct Series<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#7f7f7f"];
const MAX_POINTS: usize = 1000;

/// Line chart of series indexed by step `t = 1, 2, …`.
pub fn line_chart(title: &str, series: &[Series<'_>]) -> String {
    let steps = series.iter().map(|s| s.values.len()).max().unwrap_or(0).max(1);
    let y_max = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let (w, h) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let px = |t: usize| MARGIN + w * t as f64 / steps as f64;
    let py = |v: f64| HEIGHT - MARGIN - h * (v.max(0.0) / y_max);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    // axes
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    writeln!(
        s,
        r#"<path d="M{x0},{MARGIN} L{x0},{y0} L{},{y0}" fill="none" stroke="black"/>"#,
        WIDTH - MARGIN
    )
    .unwrap();
    for k in 0..=4 {
        let frac = k as f64 / 4.0;
        let (tx, ty) = (x0 + w * frac, y0 - h * frac);
        writeln!(s, r#"<text x="{tx:.1}" y="{}" text-anchor="middle">{}</text>"#, y0 + 18.0, tick(steps as f64 * frac)).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, ty + 4.0, tick(y_max * frac)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, WIDTH / 2.0, HEIGHT - 16.0).unwrap();

    for (k, ser) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let stride = ser.values.len().div_ceil(MAX_POINTS).max(1);
        let mut points = String::new();
        for (i, v) in ser.values.iter().enumerate() {
            if (i % stride == 0 || i + 1 == ser.values.len()) && v.is_finite() {
                write!(points, "{:.1},{:.1} ", px(i + 1), py(*v)).unwrap();
            }
        }
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            points.trim_end()
        )
        .unwrap();
        let ly = MARGIN + 16.0 * k as f64;
        writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x0 + 12.0,
            x0 + 32.0,
            x0 + 38.0,
            ly + 4.0,
            escape(ser.name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v >= 1e4 {
        format!("{:.0}k", v / 1e3)
    } else if v >= 10.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_polyline_per_series() {
        let a = [1.0, 2.0, 3.0];
        let b = [0.5; 3];
        let svg = line_chart("x < y", &[Series { name: "a", values: &a }, Series { name: "b", values: &b }]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("x &lt; y"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn long_series_are_thinned() {
        let v: Vec<f64> = (0..10_000).map(f64::from).collect();
        let svg = line_chart("t", &[Series { name: "v", values: &v }]);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert!(line.matches(',').count() <= MAX_POINTS + 1);
    }

    #[test]
    fn empty_chart_is_well_formed() {
        assert!(line_chart("empty", &[]).contains("</svg>"));
    }
}
