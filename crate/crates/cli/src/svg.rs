//! Minimal hand-rolled SVG line charts for the sweep reports.
//!
//! Pure text generation from the plotted data: no timestamps, no
//! randomness, so a rerun over identical data is byte-identical. The y
//! axis is fixed to [0, 1] (both plotted quantities are rates) and gaps
//! (undefined bins) break the polyline rather than plotting a fake zero.

/// One plotted line. `points[i]` pairs with `x_labels[i]`; `None` marks
/// an undefined bin.
pub struct Series {
    pub label: String,
    pub points: Vec<Option<f64>>,
}

const WIDTH: f64 = 1080.0;
const HEIGHT: f64 = 540.0;
const PLOT_LEFT: f64 = 64.0;
const PLOT_RIGHT: f64 = 800.0;
const PLOT_TOP: f64 = 48.0;
const PLOT_BOTTOM: f64 = 488.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const DASHES: [&str; 3] = ["", "7 3", "2 3"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn x_pos(i: usize, n: usize) -> f64 {
    if n <= 1 {
        return (PLOT_LEFT + PLOT_RIGHT) / 2.0;
    }
    PLOT_LEFT + (PLOT_RIGHT - PLOT_LEFT) * i as f64 / (n - 1) as f64
}

fn y_pos(rate: f64) -> f64 {
    let clamped = rate.clamp(0.0, 1.0);
    PLOT_BOTTOM - (PLOT_BOTTOM - PLOT_TOP) * clamped
}

/// Renders one chart: categorical x axis (one slot per label), rate y
/// axis fixed to [0, 1], legend on the right.
pub fn line_chart(title: &str, y_label: &str, x_labels: &[String], series: &[Series]) -> String {
    let n = x_labels.len();
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        esc(title)
    ));

    // Horizontal gridlines and y tick labels at 0, 0.25, ..., 1.
    for k in 0..=4 {
        let rate = k as f64 * 0.25;
        let y = y_pos(rate);
        out.push_str(&format!(
            "<line x1=\"{PLOT_LEFT}\" y1=\"{y}\" x2=\"{PLOT_RIGHT}\" y2=\"{y}\" \
             stroke=\"#dddddd\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{rate}</text>\n",
            PLOT_LEFT - 8.0,
            y + 4.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">{}</text>\n",
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        esc(y_label)
    ));

    // X tick labels.
    for (i, label) in x_labels.iter().enumerate() {
        let x = x_pos(i, n);
        out.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            PLOT_BOTTOM + 18.0,
            esc(label)
        ));
    }
    out.push_str(&format!(
        "<line x1=\"{PLOT_LEFT}\" y1=\"{PLOT_BOTTOM}\" x2=\"{PLOT_RIGHT}\" y2=\"{PLOT_BOTTOM}\" \
         stroke=\"black\"/>\n<line x1=\"{PLOT_LEFT}\" y1=\"{PLOT_TOP}\" x2=\"{PLOT_LEFT}\" \
         y2=\"{PLOT_BOTTOM}\" stroke=\"black\"/>\n"
    ));

    // Series: split each line at undefined bins.
    for (s_idx, s) in series.iter().enumerate() {
        let color = PALETTE[s_idx % PALETTE.len()];
        let dash = DASHES[(s_idx / PALETTE.len()) % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, out: &mut String| {
            if segment.len() >= 2 {
                out.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                     stroke-width=\"1.5\"{dash_attr}/>\n",
                    segment.join(" ")
                ));
            }
            segment.clear();
        };
        for (i, p) in s.points.iter().enumerate() {
            match p {
                Some(rate) => {
                    let (x, y) = (x_pos(i, n), y_pos(*rate));
                    segment.push(format!("{x},{y}"));
                    out.push_str(&format!(
                        "<circle cx=\"{x}\" cy=\"{y}\" r=\"2.5\" fill=\"{color}\"/>\n"
                    ));
                }
                None => flush(&mut segment, &mut out),
            }
        }
        flush(&mut segment, &mut out);

        // Legend entry.
        let ly = PLOT_TOP + 16.0 * s_idx as f64;
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
             stroke-width=\"2\"{dash_attr}/>\n",
            PLOT_RIGHT + 24.0,
            PLOT_RIGHT + 52.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            PLOT_RIGHT + 58.0,
            ly + 4.0,
            esc(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_chart() -> String {
        line_chart(
            "demo",
            "rate",
            &["0-8".into(), "8-16".into(), "16-24".into()],
            &[
                Series {
                    label: "a<&>".into(),
                    points: vec![Some(0.25), Some(0.5), Some(1.0)],
                },
                Series {
                    label: "b".into(),
                    points: vec![Some(0.1), None, Some(0.3)],
                },
            ],
        )
    }

    #[test]
    fn chart_is_deterministic_and_escaped() {
        let a = demo_chart();
        let b = demo_chart();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.contains("a&lt;&amp;&gt;"));
        assert!(!a.contains("a<&>"));
    }

    #[test]
    fn gaps_split_polylines() {
        let svg = demo_chart();
        // Series a: one 3-point polyline. Series b: the gap leaves two
        // isolated points, so no second polyline is emitted.
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 5);
    }

    #[test]
    fn rates_map_to_fixed_axis() {
        assert_eq!(y_pos(0.0), PLOT_BOTTOM);
        assert_eq!(y_pos(1.0), PLOT_TOP);
        assert_eq!(y_pos(2.0), PLOT_TOP); // clamped
        assert_eq!(x_pos(0, 2), PLOT_LEFT);
        assert_eq!(x_pos(1, 2), PLOT_RIGHT);
    }
}
