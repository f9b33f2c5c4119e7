//! SVG rendering of multi-timelines: one horizontal lane per variable, one
//! labelled rectangle per token, x-axis linear in time. Output depends only
//! on the input plan, so equal plans render byte-identical documents.

use std::fmt::Write as _;

use timeplan::model::MultiTimeline;

const LABEL_W: f64 = 110.0;
const CHART_W: f64 = 720.0;
const LANE_H: f64 = 44.0;
const LANE_GAP: f64 = 14.0;
const TOP: f64 = 18.0;
const AXIS_H: f64 = 30.0;

/// Muted fills, assigned to values in order of first appearance.
const PALETTE: [&str; 8] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
];

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders a plan to a standalone SVG document.
pub fn render_svg(plan: &MultiTimeline) -> String {
    let lanes: Vec<_> = plan.timelines().collect();
    let span = lanes
        .iter()
        .map(|t| {
            t.token_times()
                .last()
                .map(|(_, end)| end.to_f64())
                .unwrap_or(0.0)
        })
        .fold(0.0, f64::max);
    let scale = CHART_W / if span > 0.0 { span } else { 1.0 };

    let height = TOP + lanes.len() as f64 * (LANE_H + LANE_GAP) + AXIS_H;
    let width = LABEL_W + CHART_W + 20.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>"
    );

    let mut palette_order: Vec<&str> = Vec::new();
    for (lane, timeline) in lanes.iter().enumerate() {
        let y = TOP + lane as f64 * (LANE_H + LANE_GAP);
        let mid = y + LANE_H / 2.0;
        let _ = writeln!(
            svg,
            "  <text x=\"8\" y=\"{mid:.2}\" dominant-baseline=\"middle\" font-size=\"13\">{}</text>",
            escape(timeline.variable())
        );
        for (token, (start, end)) in timeline.tokens().iter().zip(timeline.token_times()) {
            let x = LABEL_W + start.to_f64() * scale;
            let w = (end.to_f64() - start.to_f64()) * scale;
            let fill = match palette_order.iter().position(|v| *v == token.value) {
                Some(i) => PALETTE[i % PALETTE.len()],
                None => {
                    palette_order.push(&token.value);
                    PALETTE[(palette_order.len() - 1) % PALETTE.len()]
                }
            };
            let _ = writeln!(
                svg,
                "  <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{LANE_H:.0}\" \
                 fill=\"{fill}\" stroke=\"#333\" stroke-width=\"1\"/>"
            );
            let _ = writeln!(
                svg,
                "  <text x=\"{:.2}\" y=\"{mid:.2}\" text-anchor=\"middle\" \
                 dominant-baseline=\"middle\" font-size=\"11\">{}</text>",
                x + w / 2.0,
                escape(&token.value)
            );
        }
    }

    let axis_y = TOP + lanes.len() as f64 * (LANE_H + LANE_GAP) + 4.0;
    let _ = writeln!(
        svg,
        "  <line x1=\"{LABEL_W:.0}\" y1=\"{axis_y:.2}\" x2=\"{:.2}\" y2=\"{axis_y:.2}\" \
         stroke=\"#333\" stroke-width=\"1\"/>",
        LABEL_W + CHART_W
    );
    // Integer ticks; thin out to at most ~12 labels on long spans.
    let last_tick = span.floor() as u64;
    let step = (last_tick / 12).max(1);
    let mut tick = 0;
    while tick as f64 <= span {
        let x = LABEL_W + tick as f64 * scale;
        let _ = writeln!(
            svg,
            "  <line x1=\"{x:.2}\" y1=\"{axis_y:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#333\" stroke-width=\"1\"/>",
            axis_y + 5.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{tick}</text>",
            axis_y + 18.0
        );
        tick += step;
    }
    svg.push_str("</svg>\n");
    svg
}
