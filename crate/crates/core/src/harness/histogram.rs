use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Equal-width bin counts over `[lo, hi]`, in linear or log10 coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
    pub log_scale: bool,
    /// Values left out: non-finite ones, and non-positive ones on a log axis.
    pub dropped: usize,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Bin edges in data units.
    pub fn edges(&self) -> Vec<f64> {
        let b = self.counts.len();
        (0..=b)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / b as f64;
                if self.log_scale {
                    10f64.powf(t)
                } else {
                    t
                }
            })
            .collect()
    }
}

pub fn histogram_counts(values: &[f64], bins: usize, log_scale: bool) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    if values.is_empty() {
        return Err(Error::InvalidParameter("histogram of an empty list".into()));
    }
    let coords: Vec<f64> = values
        .iter()
        .filter(|v| v.is_finite() && (!log_scale || **v > 0.0))
        .map(|&v| if log_scale { v.log10() } else { v })
        .collect();
    let dropped = values.len() - coords.len();
    if coords.is_empty() {
        return Err(Error::InvalidParameter(if log_scale {
            "no positive finite values to plot on a log axis".into()
        } else {
            "no finite values to plot".into()
        }));
    }
    let mut lo = coords.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        lo -= 0.5;
        hi += 0.5;
    }
    let mut counts = vec![0usize; bins];
    let width = (hi - lo) / bins as f64;
    for c in &coords {
        let b = (((c - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram {
        lo,
        hi,
        counts,
        log_scale,
        dropped,
    })
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Bar height in plot units; on a log axis counts are drawn as `log10(1 + c)`.
fn bar_scale(h: &Histogram, count: usize) -> f64 {
    let max = h.max_count();
    if max == 0 {
        return 0.0;
    }
    if h.log_scale {
        (1.0 + count as f64).log10() / (1.0 + max as f64).log10()
    } else {
        count as f64 / max as f64
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Self-contained SVG; the output depends only on the histogram and title.
pub fn render_svg(h: &Histogram, title: &str) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let base_y = MARGIN_TOP + plot_h;
    let bar_w = plot_w / h.counts.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
    for (i, &c) in h.counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let bh = plot_h * bar_scale(h, c);
        let _ = writeln!(
            s,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\"><title>{c}</title></rect>",
            MARGIN_LEFT + i as f64 * bar_w,
            base_y - bh,
            bar_w,
            bh
        );
    }
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN_LEFT:.0}\" y1=\"{base_y:.0}\" x2=\"{:.0}\" y2=\"{base_y:.0}\" stroke=\"black\"/>",
        MARGIN_LEFT + plot_w
    );
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN_LEFT:.0}\" y1=\"{MARGIN_TOP:.0}\" x2=\"{MARGIN_LEFT:.0}\" y2=\"{base_y:.0}\" stroke=\"black\"/>"
    );
    let edges = h.edges();
    let ticks = 5.min(h.counts.len());
    for t in 0..=ticks {
        let frac = t as f64 / ticks as f64;
        let x = MARGIN_LEFT + frac * plot_w;
        let value = edges[(frac * h.counts.len() as f64).round() as usize];
        let _ = writeln!(
            s,
            "<text x=\"{x:.2}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            base_y + 16.0,
            format_tick(value)
        );
    }
    let x_label = if h.log_scale { "value (log scale)" } else { "value" };
    let y_label = if h.log_scale { "count (log scale)" } else { "count" };
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">{y_label} (max {})</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        h.max_count()
    );
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Writes a histogram of `values` as an SVG file.
pub fn emit_histogram(values: &[f64], bins: usize, log_scale: bool, path: &Path) -> Result<()> {
    let h = histogram_counts(values, bins, log_scale)?;
    let title = format!("{} values, {} bins", h.total(), bins);
    std::fs::write(path, render_svg(&h, &title)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bar_heights(svg: &str) -> Vec<f64> {
        svg.lines()
            .filter(|l| l.contains("fill=\"steelblue\""))
            .map(|l| {
                let start = l.find("height=\"").unwrap() + 8;
                let end = start + l[start..].find('"').unwrap();
                l[start..end].parse().unwrap()
            })
            .collect()
    }

    #[test]
    fn single_value_gives_one_full_bar() {
        let h = histogram_counts(&[1.5], 7, false).unwrap();
        assert_eq!(h.total(), 1);
        let heights = bar_heights(&render_svg(&h, "one"));
        assert_eq!(heights.len(), 1);
        assert!((heights[0] - (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)).abs() < 1e-3);
    }

    #[test]
    fn uniform_values_give_level_bars() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let values: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>()).collect();
        let heights = bar_heights(&render_svg(&histogram_counts(&values, 10, false).unwrap(), "u"));
        assert_eq!(heights.len(), 10);
        let mean = heights.iter().sum::<f64>() / heights.len() as f64;
        assert!(heights.iter().all(|h| (h / mean - 1.0).abs() < 0.01), "{heights:?}");
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(histogram_counts(&[], 10, false).is_err());
        assert!(histogram_counts(&[1.0], 0, false).is_err());
        assert!(histogram_counts(&[-1.0, 0.0], 4, true).is_err());
    }

    #[test]
    fn log_axis_drops_nonpositive_values() {
        let h = histogram_counts(&[-1.0, 0.1, 1.0, 10.0, 100.0], 3, true).unwrap();
        assert_eq!(h.dropped, 1);
        assert_eq!(h.counts, vec![1, 1, 2]);
        let e = h.edges();
        assert!((e[0] - 0.1).abs() < 1e-12 && (e[3] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn rendering_is_deterministic() {
        let values = [0.3, 2.0, 2.1, 1.9, -0.5];
        let a = render_svg(&histogram_counts(&values, 5, false).unwrap(), "t");
        let b = render_svg(&histogram_counts(&values, 5, false).unwrap(), "t");
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
    }
}
