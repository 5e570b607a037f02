//! Standalone SVG step plots of performance profiles.

use std::fmt::Write;

use super::ProfileCurve;

#[derive(Debug, Clone)]
pub struct SvgOptions {
    pub width: u32,
    pub height: u32,
    /// Plot tau on a log2 axis.
    pub log_tau: bool,
    pub title: String,
    /// Right end of the tau axis; defaults to the largest breakpoint.
    pub tau_max: Option<f64>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { width: 640, height: 420, log_tau: false, title: String::new(), tau_max: None }
    }
}

const COLORS: [&str; 7] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One polyline per curve, stepping right then up at every breakpoint.
pub fn profile_svg(curves: &[ProfileCurve], opts: &SvgOptions) -> String {
    let (w, h) = (opts.width as f64, opts.height as f64);
    let (left, right, top, bottom) = (56.0, 130.0, 36.0, 44.0);
    let (pw, ph) = ((w - left - right).max(10.0), (h - top - bottom).max(10.0));

    let largest = curves.iter().flat_map(|c| c.points.iter().map(|p| p.0)).fold(1.0_f64, f64::max);
    let tau_max = opts.tau_max.unwrap_or(largest).max(1.0);
    let tau_max = if tau_max <= 1.0 { 2.0 } else { tau_max * 1.05 };
    let axis = |t: f64| if opts.log_tau { t.log2() } else { t };
    let (a0, a1) = (axis(1.0), axis(tau_max));
    let sx = |t: f64| left + (axis(t.clamp(1.0, tau_max)) - a0) / (a1 - a0) * pw;
    let sy = |p: f64| top + (1.0 - p) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    if !opts.title.is_empty() {
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(&opts.title));
    }
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444" stroke-width="1"/>"##
    );

    for i in 0..=5 {
        let p = i as f64 / 5.0;
        let y = sy(p);
        let _ = writeln!(s, r##"<line x1="{}" y1="{y}" x2="{left}" y2="{y}" stroke="#444"/>"##, left - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{p:.1}</text>"#, left - 7.0, y + 4.0);
    }
    for t in ticks(tau_max, opts.log_tau) {
        let x = sx(t);
        let y = top + ph;
        let _ = writeln!(s, r##"<line x1="{x}" y1="{y}" x2="{x}" y2="{}" stroke="#444"/>"##, y + 4.0);
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#, y + 17.0, fmt_tick(t));
    }
    let axis_label = if opts.log_tau { "tau (log scale)" } else { "tau" };
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{axis_label}</text>"#, left + pw / 2.0, h - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">P(tau)</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts = vec![(1.0, c.value_at(1.0))];
        for &(t, p) in c.points.iter().filter(|(t, _)| *t > 1.0 && *t <= tau_max) {
            let prev = pts.last().expect("non-empty").1;
            pts.push((t, prev));
            pts.push((t, p));
        }
        let end = pts.last().expect("non-empty").1;
        pts.push((tau_max, end));
        let coords: Vec<String> = pts.iter().map(|&(t, p)| format!("{:.2},{:.2}", sx(t), sy(p))).collect();
        let _ = writeln!(
            s,
            r#"<polyline data-algorithm="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            escape(&c.algorithm),
            coords.join(" ")
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 14.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 22.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&c.algorithm));
    }
    s.push_str("</svg>\n");
    s
}

fn ticks(tau_max: f64, log: bool) -> Vec<f64> {
    if log {
        let mut t = 1.0;
        let mut out = Vec::new();
        while t <= tau_max {
            out.push(t);
            t *= 2.0;
        }
        out
    } else {
        let span = tau_max - 1.0;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        (0..).map(|i| 1.0 + i as f64 * step).take_while(|t| *t <= tau_max + 1e-9).collect()
    }
}

fn fmt_tick(t: f64) -> String {
    if t.fract() == 0.0 {
        format!("{t:.0}")
    } else {
        format!("{t:.2}")
    }
}
