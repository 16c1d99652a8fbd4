//! Heatmap emitter for gain matrices.

use std::fmt::Write;

use lossless_core::analysis::{GainMatrix, Metric};

/// Eight-step sequential colormap, dark (low) to light (high).
pub const COLORMAP: [&str; 8] = ["#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725"];

const PLOT: f64 = 520.0;
const MARGIN: f64 = 40.0;
const LEGEND: f64 = 110.0;

fn bin(v: f64, lo: f64, hi: f64) -> usize {
    if !(hi > lo) {
        return 0;
    }
    (((v - lo) / (hi - lo) * 8.0).floor() as isize).clamp(0, 7) as usize
}

/// Natural-log scale for H2 gains, linear for H-infinity, with white
/// rectangles around the diagonal cluster blocks.
pub fn heatmap(g: &GainMatrix, title: &str) -> String {
    let n = g.n();
    let shown = match g.metric {
        Metric::H2 if !g.log_transformed => g.ln().values,
        _ => g.values.clone(),
    };
    let scale = if g.metric == Metric::H2 { "ln" } else { "linear" };
    let lo = shown.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = shown.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cell = PLOT / n.max(1) as f64;
    let width = MARGIN * 2.0 + PLOT + LEGEND;
    let height = MARGIN * 2.0 + PLOT;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#).unwrap();
    writeln!(s, "<!-- metric={:?} scale={scale} min={lo:.17e} max={hi:.17e} n={n} -->", g.metric).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{MARGIN}" y="{:.1}" font-family="sans-serif" font-size="14">{}</text>"#, MARGIN * 0.6, escape(title)).unwrap();
    writeln!(s, r#"<g shape-rendering="crispEdges">"#).unwrap();
    for i in 0..n {
        for k in 0..n {
            let color = COLORMAP[bin(shown[(i, k)], lo, hi)];
            writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{color}"/>"#,
                MARGIN + k as f64 * cell,
                MARGIN + i as f64 * cell,
                cell,
                cell
            )
            .unwrap();
        }
    }
    writeln!(s, "</g>").unwrap();
    let b = &g.cluster_boundaries;
    for w in b.windows(2) {
        let (start, len) = (w[0] as f64, (w[1] - w[0]) as f64);
        writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="white" stroke-width="2"/>"#,
            MARGIN + start * cell,
            MARGIN + start * cell,
            len * cell,
            len * cell
        )
        .unwrap();
    }
    let lx = MARGIN * 2.0 + PLOT;
    let step = PLOT / 8.0;
    for (j, color) in COLORMAP.iter().enumerate().rev() {
        let y = MARGIN + (7 - j) as f64 * step;
        let edge = lo + (hi - lo) * j as f64 / 8.0;
        writeln!(s, r#"<rect x="{lx:.3}" y="{y:.3}" width="20" height="{step:.3}" fill="{color}"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="11">{edge:.3}</text>"#,
            lx + 26.0,
            y + step
        )
        .unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
