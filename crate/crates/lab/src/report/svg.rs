//! Grouped bar charts as standalone SVG. Output depends only on the input
//! values, so identical summaries give identical files.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 56.0;
const TICKS: usize = 5;
const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];

#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub categories: Vec<String>,
    pub series: Vec<String>,
    /// `values[category][series]`; `None` draws an NA marker.
    pub values: Vec<Vec<Option<f64>>>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Tick step from {1, 2, 5} × 10^k covering `span` in about `TICKS` steps.
fn tick_step(span: f64) -> f64 {
    let raw = span / TICKS as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

impl BarChart {
    fn range(&self) -> (f64, f64, f64) {
        let finite = self.values.iter().flatten().flatten().copied().filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let (lo, hi) = if lo == hi { (-1.0, 1.0) } else { (lo, hi) };
        let step = tick_step(hi - lo);
        ((lo / step).floor() * step, (hi / step).ceil() * step, step)
    }

    pub fn render(&self) -> String {
        let (lo, hi, step) = self.range();
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let y = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;
        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
        writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, escape(&self.title)).unwrap();
        writeln!(s, r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#, num(TOP + plot_h / 2.0), escape(&self.y_label))
            .unwrap();

        let steps = ((hi - lo) / step).round() as usize;
        for i in 0..=steps {
            let v = lo + i as f64 * step;
            let yy = num(y(v));
            writeln!(s, r##"<line x1="{LEFT}" y1="{yy}" x2="{}" y2="{yy}" stroke="#dddddd"/>"##, LEFT + plot_w).unwrap();
            writeln!(s, r#"<text x="{}" y="{yy}" text-anchor="end" dominant-baseline="middle">{}</text>"#, LEFT - 6.0, num(v)).unwrap();
        }

        let groups = self.categories.len().max(1) as f64;
        let group_w = plot_w / groups;
        let bar_w = group_w * 0.8 / self.series.len().max(1) as f64;
        let zero = y(0.0);
        for (g, (cat, row)) in self.categories.iter().zip(&self.values).enumerate() {
            let gx = LEFT + g as f64 * group_w;
            for (k, v) in row.iter().enumerate() {
                let x = gx + group_w * 0.1 + k as f64 * bar_w;
                match v {
                    Some(v) if v.is_finite() => {
                        let top = y(*v).min(zero);
                        let h = (y(*v) - zero).abs();
                        writeln!(
                            s,
                            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"><title>{}: {}</title></rect>"#,
                            num(x),
                            num(top),
                            num(bar_w),
                            num(h),
                            PALETTE[k % PALETTE.len()],
                            escape(&self.series[k]),
                            num(*v)
                        )
                        .unwrap();
                    }
                    _ => {
                        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="10">NA</text>"#, num(x + bar_w / 2.0), num(zero - 4.0)).unwrap();
                    }
                }
            }
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, num(gx + group_w / 2.0), num(TOP + plot_h + 20.0), escape(cat)).unwrap();
        }
        writeln!(s, r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, num(zero), LEFT + plot_w, num(zero)).unwrap();
        writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#, TOP + plot_h).unwrap();

        for (k, name) in self.series.iter().enumerate() {
            let ly = TOP + 8.0 + k as f64 * 20.0;
            let lx = WIDTH - RIGHT + 16.0;
            writeln!(s, r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{}"/>"#, num(ly - 6.0), PALETTE[k % PALETTE.len()]).unwrap();
            writeln!(s, r#"<text x="{}" y="{}" dominant-baseline="middle">{}</text>"#, lx + 18.0, num(ly), escape(name)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(values: Vec<Vec<Option<f64>>>) -> BarChart {
        BarChart {
            title: "Factory <delta>".into(),
            y_label: "reward".into(),
            categories: vec!["baseline".into(), "collaborative".into()],
            series: vec!["Truth".into(), "Lying".into()],
            values,
        }
    }

    #[test]
    fn all_zero_gives_flat_bars() {
        let svg = chart(vec![vec![Some(0.0), Some(0.0)], vec![Some(0.0), Some(0.0)]]).render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches(r#"height="0.00""#).count(), 4);
        assert!(svg.contains("Factory &lt;delta&gt;"));
    }

    #[test]
    fn output_is_stable_and_signs_show() {
        let c = chart(vec![vec![Some(-12.0), Some(14.88)], vec![None, Some(3.5)]]);
        let a = c.render();
        assert_eq!(a, c.render());
        assert!(a.contains("Lying: 14.88"));
        assert!(a.contains(">NA</text>"));
    }

    #[test]
    fn ticks() {
        assert_eq!(tick_step(10.0), 2.0);
        assert_eq!(tick_step(26.88), 10.0);
        assert_eq!(tick_step(0.3), 0.1);
    }
}
