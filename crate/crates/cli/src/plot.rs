//! Minimal static SVG charts.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        Self {
            x: span(&mut xs.clone()),
            y: span(&mut ys.clone()),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(out: &mut String, title: &str, attrs: &[(&str, String)]) {
    let extra: String = attrs
        .iter()
        .map(|(k, v)| format!(" data-{k}=\"{}\"", escape(v)))
        .collect();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\"{extra}>"
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    if !attrs.is_empty() {
        out.push_str("<metadata>");
        for (k, v) in attrs {
            let _ = write!(out, "{k}={};", escape(v));
        }
        out.push_str("</metadata>\n");
    }
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        "<path d=\"M{x0} {y1} L{x0} {y0} L{x1} {y0}\" fill=\"none\" stroke=\"black\"/>"
    );
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(
            out,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{text}</text>"
        );
    };
    label(out, x0, y0 + 16.0, "middle", format!("{:.3}", frame.x.0));
    label(out, x1, y0 + 16.0, "middle", format!("{:.3}", frame.x.1));
    label(out, x0 - 4.0, y0, "end", format!("{:.3e}", frame.y.0));
    label(out, x0 - 4.0, y1 + 4.0, "end", format!("{:.3e}", frame.y.1));
    label(out, WIDTH / 2.0, HEIGHT - 12.0, "middle", escape(x_label));
    let _ = writeln!(
        out,
        "<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

/// Polyline through `points`, with an optional highlighted marker.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
    marker: Option<(f64, f64)>,
    attrs: &[(&str, String)],
) -> String {
    let frame = Frame::new(points.iter().map(|p| p.0), points.iter().map(|p| p.1));
    let mut out = String::new();
    open(&mut out, title, attrs);
    axes(&mut out, &frame, x_label, y_label);
    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>",
        path.join(" ")
    );
    if let Some((x, y)) = marker {
        let _ = writeln!(
            out,
            "<circle class=\"elbow\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"crimson\"/>",
            frame.px(x),
            frame.py(y)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One bar per `(label, value)`.
pub fn bar_chart(title: &str, x_label: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let frame = Frame::new(
        [0.0, bars.len() as f64].into_iter(),
        bars.iter().map(|b| b.1).chain(std::iter::once(0.0)),
    );
    let mut out = String::new();
    open(&mut out, title, &[]);
    axes(&mut out, &frame, x_label, y_label);
    let slot = (WIDTH - 2.0 * MARGIN) / bars.len().max(1) as f64;
    for (i, (label, value)) in bars.iter().enumerate() {
        let x = MARGIN + slot * (i as f64 + 0.15);
        let top = frame.py(*value);
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"steelblue\"/>",
            slot * 0.7,
            frame.py(0.0) - top
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            x + slot * 0.35,
            HEIGHT - MARGIN + 28.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_carries_metadata_and_marker() {
        let svg = line_chart(
            "w",
            "rank",
            "|w|",
            &[(1.0, 3.0), (2.0, 1.0), (3.0, 0.5)],
            Some((2.0, 1.0)),
            &[("elbow-x", "2".into())],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("data-elbow-x=\"2\""));
        assert!(svg.contains("<metadata>elbow-x=2;</metadata>"));
        assert_eq!(svg.matches("class=\"elbow\"").count(), 1);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn degenerate_inputs_still_render() {
        let flat = line_chart("t", "x", "y", &[(1.0, 2.0), (2.0, 2.0)], None, &[]);
        assert!(!flat.contains("NaN"));
        let bars = bar_chart("b", "q", "n", &[("0.1".into(), 3.0), ("<1>".into(), 5.0)]);
        assert_eq!(bars.matches("<rect x=").count(), 2);
        assert!(bars.contains("&lt;1&gt;"));
        assert!(!bar_chart("b", "q", "n", &[]).contains("NaN"));
    }
}
