//! Minimal static SVG line chart: axes, tick labels at the extremes,
//! a single polyline. No interactivity.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;

pub fn line_chart(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let (x_min, x_max) = bounds(points.iter().map(|&(x, _)| x));
    let (y_min, y_max) = bounds(points.iter().map(|&(_, y)| y));
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let y_span = if y_max > y_min { y_max - y_min } else { 1.0 };
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN + (x - x_min) / x_span * (WIDTH - 2.0 * MARGIN),
            HEIGHT - MARGIN - (y - y_min) / y_span * (HEIGHT - 2.0 * MARGIN),
        )
    };

    let mut path = String::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        let (px, py) = to_px(x, y);
        let _ = write!(path, "{}{:.2},{:.2}", if i == 0 { "" } else { " " }, px, py);
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        b = HEIGHT - MARGIN
    );
    // tick labels at the extremes
    let _ = writeln!(
        svg,
        "<text x=\"{m}\" y=\"{y}\" text-anchor=\"middle\">{v:.4}</text>",
        m = MARGIN,
        y = HEIGHT - MARGIN + 20.0,
        v = x_min
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">{v:.4}</text>",
        x = WIDTH - MARGIN,
        y = HEIGHT - MARGIN + 20.0,
        v = x_max
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\">{v:.4}</text>",
        x = MARGIN - 6.0,
        y = HEIGHT - MARGIN,
        v = y_min
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\">{v:.4}</text>",
        x = MARGIN - 6.0,
        y = MARGIN + 4.0,
        v = y_max
    );
    // axis labels
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">{x_label}</text>",
        x = WIDTH / 2.0,
        y = HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{y}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {y})\">{y_label}</text>",
        y = HEIGHT / 2.0
    );
    let _ = writeln!(
        svg,
        "<polyline points=\"{path}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>"
    );
    let _ = writeln!(svg, "</svg>");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        (0.0, 1.0)
    } else {
        (min, max)
    }
}
