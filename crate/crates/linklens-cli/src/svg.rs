//! Minimal self-contained SVG line charts (no plotting dependencies).

/// One polyline with a label and stroke color.
pub struct SeriesLine<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn fmt(value: f64) -> String {
    // Fixed decimals keep output byte-stable across runs.
    format!("{value:.3}")
}

/// Render labelled polylines over shared axes. Returns a complete SVG
/// document; empty input yields a chart frame with a "no data" note.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, lines: &[SeriesLine]) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    let (x0, x1, y0, y1) = (
        MARGIN_LEFT,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM,
        MARGIN_TOP,
    );
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    ));

    let points: Vec<(f64, f64)> = lines.iter().flat_map(|l| l.points.iter().copied()).collect();
    if points.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">no data</text>\n",
            (x0 + x1) / 2.0,
            (y0 + y1) / 2.0
        ));
        svg.push_str("</svg>\n");
        return svg;
    }

    let min_x = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max_x = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let min_y = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).min(0.0);
    let max_y = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let span_x = if (max_x - min_x).abs() < f64::EPSILON { 1.0 } else { max_x - min_x };
    let span_y = if (max_y - min_y).abs() < f64::EPSILON { 1.0 } else { max_y - min_y };
    let sx = |x: f64| x0 + (x - min_x) / span_x * (x1 - x0);
    let sy = |y: f64| y0 - (y - min_y) / span_y * (y0 - y1);

    // Axis extent labels.
    svg.push_str(&format!(
        "<text x=\"{x0}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{x1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
        y0 + 16.0,
        fmt(min_x),
        y0 + 16.0,
        fmt(max_x),
        x0 - 6.0,
        y0 + 4.0,
        fmt(min_y),
        x0 - 6.0,
        sy(max_y) + 4.0,
        fmt(max_y),
    ));

    for (idx, line) in lines.iter().enumerate() {
        if line.points.is_empty() {
            continue;
        }
        let path: Vec<String> = line
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt(sx(x)), fmt(sy(y))))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            line.color,
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n",
            x1 - 150.0,
            y1 + 14.0 * idx as f64,
            line.color,
            escape(line.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
