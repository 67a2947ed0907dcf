//! Minimal SVG line and bar charts. Every plot carries its data as JSON in a
//! leading comment so figures can be regenerated or checked without parsing
//! the drawing.

use std::fmt::Write;

use serde::Serialize;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn indexed(name: impl Into<String>, y: &[f64]) -> Self {
        Self {
            name: name.into(),
            x: (0..y.len()).map(|i| i as f64).collect(),
            y: y.to_vec(),
        }
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit<'a>(
        xs: impl Iterator<Item = &'a f64> + Clone,
        ys: impl Iterator<Item = &'a f64> + Clone,
    ) -> Self {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn bounds<'a>(v: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn header<T: Serialize>(title: &str, data: &T) -> String {
    // "--" may not appear inside an XML comment.
    let json = serde_json::to_string(data)
        .expect("plot data serializes")
        .replace("--", "- -");
    let mut s = String::new();
    writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>").unwrap();
    writeln!(s, "<!-- data: {json} -->").unwrap();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    writeln!(
        s,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    s
}

fn axes(s: &mut String, f: &Frame) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(
        s,
        "<path d=\"M{l} {t} L{l} {b} L{r} {b}\" stroke=\"black\" fill=\"none\"/>"
    )
    .unwrap();
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, v: f64| {
        writeln!(
            s,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            short(v)
        )
        .unwrap();
    };
    label(s, l, b + 14.0, "middle", f.x0);
    label(s, r, b + 14.0, "middle", f.x1);
    label(s, l - 4.0, b, "end", f.y0);
    label(s, l - 4.0, t + 4.0, "end", f.y1);
}

fn short(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn line_chart(title: &str, series: &[Series]) -> String {
    let f = Frame::fit(
        series.iter().flat_map(|s| s.x.iter()),
        series.iter().flat_map(|s| s.y.iter()),
    );
    let mut s = header(title, &series);
    axes(&mut s, &f);
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (j, (&x, &y)) in ser.x.iter().zip(&ser.y).enumerate() {
            let cmd = if j == 0 { 'M' } else { 'L' };
            write!(d, "{cmd}{:.2} {:.2} ", f.px(x), f.py(y)).unwrap();
        }
        writeln!(
            s,
            "<path d=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\" fill=\"none\"/>",
            d.trim_end()
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{}</text>",
            WIDTH - MARGIN - 120.0,
            MARGIN + 14.0 * i as f64,
            escape(&ser.name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Serialize)]
struct Bars<'a> {
    labels: &'a [String],
    mean: &'a [f64],
    std: &'a [f64],
}

/// Bars with one-standard-deviation whiskers, drawn from zero.
pub fn bar_chart(title: &str, labels: &[String], mean: &[f64], std: &[f64]) -> String {
    let tops: Vec<f64> = mean
        .iter()
        .zip(std)
        .map(|(m, s)| m + s)
        .chain([0.0])
        .collect();
    let f = Frame::fit([0.0, mean.len() as f64].iter(), tops.iter());
    let mut s = header(title, &Bars { labels, mean, std });
    axes(&mut s, &f);
    let slot = (WIDTH - 2.0 * MARGIN) / mean.len().max(1) as f64;
    for (i, (&m, &sd)) in mean.iter().zip(std).enumerate() {
        let x = MARGIN + slot * i as f64 + slot * 0.15;
        let w = slot * 0.7;
        let (top, base) = (f.py(m), f.py(0.0));
        writeln!(
            s,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{w:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
            top.min(base),
            (base - top).abs(),
            COLORS[0]
        )
        .unwrap();
        let cx = x + w / 2.0;
        writeln!(
            s,
            "<path d=\"M{cx:.2} {:.2} L{cx:.2} {:.2}\" stroke=\"black\"/>",
            f.py(m - sd),
            f.py(m + sd)
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"{cx:.2}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            HEIGHT - MARGIN + 26.0,
            escape(&labels[i])
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_embeds_data() {
        let svg = line_chart("t", &[Series::indexed("a--b", &[0.0, 1.0, 0.5])]);
        assert!(svg.contains("<!-- data: [{\"name\":\"a- -b\""));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path").count(), 2);
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let svg = line_chart("flat", &[Series::indexed("z", &[0.0; 4])]);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn bar_chart_has_one_bar_per_value() {
        let labels: Vec<String> = (1..=3).map(|k| format!("λ{k}")).collect();
        let svg = bar_chart("gates", &labels, &[0.6, 0.5, 0.4], &[0.01, 0.02, 0.0]);
        assert_eq!(svg.matches("<rect").count(), 4);
    }
}
