//! Static SVG scatter of mean utilitarian vs. representation ratios.
//!
//! One marker per (dataset, rule): the shape identifies the rule and the fill
//! identifies the dataset. Output depends only on the input, so reruns are
//! byte-identical.

use std::f64::consts::PI;
use std::fmt::Write as _;

use pb_core::model::to_f64;

use crate::experiment::Summary;
use crate::rules::Rule;
use crate::BenchError;

const WIDTH: f64 = 600.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 40.0;
const SIDE: f64 = 360.0;
const MARKER: f64 = 7.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Plot coordinates of a ratio pair; both axes span `[0, 1]`.
pub fn position(util: f64, rep: f64) -> (f64, f64) {
    (LEFT + util.clamp(0.0, 1.0) * SIDE, TOP + (1.0 - rep.clamp(0.0, 1.0)) * SIDE)
}

fn polygon(cx: f64, cy: f64, sides: usize, rotation: f64) -> String {
    (0..sides)
        .map(|k| {
            let a = rotation + 2.0 * PI * k as f64 / sides as f64;
            format!("{:.2},{:.2}", cx + MARKER * a.cos(), cy + MARKER * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn marker(rule: Rule, cx: f64, cy: f64, fill: &str) -> String {
    let style = format!("fill=\"{fill}\" stroke=\"#000\" stroke-width=\"1\"");
    let class = rule.name();
    match rule {
        Rule::Av => format!("<circle class=\"{class}\" cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{MARKER:.2}\" {style}/>"),
        Rule::Cc => format!(
            "<rect class=\"{class}\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" {style}/>",
            cx - MARKER * 0.85,
            cy - MARKER * 0.85,
            MARKER * 1.7,
            MARKER * 1.7
        ),
        _ => {
            let (sides, rotation) = match rule {
                Rule::Pav => (3, -PI / 2.0),
                Rule::SeqPav => (3, PI / 2.0),
                Rule::RuleX => (4, 0.0),
                Rule::RuleXEps => (5, -PI / 2.0),
                _ => (6, 0.0),
            };
            format!("<polygon class=\"{class}\" points=\"{}\" {style}/>", polygon(cx, cy, sides, rotation))
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the scatter plot.
pub fn emit_scatter(summaries: &[Summary]) -> Result<String, BenchError> {
    if summaries.is_empty() {
        return Err(BenchError::Spec("nothing to plot".into()));
    }
    let mut datasets: Vec<&str> = Vec::new();
    for s in summaries {
        if !datasets.contains(&s.dataset.as_str()) {
            datasets.push(&s.dataset);
        }
    }
    let fill = |name: &str| PALETTE[datasets.iter().position(|d| *d == name).unwrap_or(0) % PALETTE.len()];

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    )
    .unwrap();
    writeln!(w, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#fff\"/>").unwrap();
    writeln!(w, "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">Utilitarian vs. representation ratio</text>", LEFT + SIDE / 2.0).unwrap();
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let (x, y) = position(t, t);
        writeln!(w, "<line x1=\"{x:.2}\" y1=\"{TOP:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#ddd\"/>", TOP + SIDE).unwrap();
        writeln!(w, "<line x1=\"{LEFT:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>", LEFT + SIDE).unwrap();
        writeln!(w, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{t:.1}</text>", TOP + SIDE + 16.0).unwrap();
        writeln!(w, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{t:.1}</text>", LEFT - 6.0, y + 4.0).unwrap();
    }
    writeln!(w, "<rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{SIDE:.2}\" height=\"{SIDE:.2}\" fill=\"none\" stroke=\"#000\"/>").unwrap();
    writeln!(w, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">Utilitarian ratio</text>", LEFT + SIDE / 2.0, TOP + SIDE + 36.0).unwrap();
    writeln!(
        w,
        "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">Representation ratio</text>",
        TOP + SIDE / 2.0,
        TOP + SIDE / 2.0
    )
    .unwrap();

    writeln!(w, "<g id=\"markers\">").unwrap();
    for s in summaries {
        let (cx, cy) = position(to_f64(&s.util_mean), to_f64(&s.rep_mean));
        writeln!(w, "{}", marker(s.rule, cx, cy, fill(&s.dataset))).unwrap();
    }
    writeln!(w, "</g>").unwrap();

    // Legend: rules by shape, then datasets by fill.
    let lx = LEFT + SIDE + 30.0;
    let mut ly = TOP + 10.0;
    let mut rules: Vec<Rule> = summaries.iter().map(|s| s.rule).collect();
    rules.sort();
    rules.dedup();
    writeln!(w, "<g id=\"legend\">").unwrap();
    for rule in rules {
        writeln!(w, "{}", marker(rule, lx, ly, "#fff")).unwrap();
        writeln!(w, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", lx + 14.0, ly + 4.0, rule.name()).unwrap();
        ly += 22.0;
    }
    ly += 10.0;
    for name in &datasets {
        writeln!(w, "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"12\" height=\"12\" fill=\"{}\"/>", lx - 6.0, ly - 6.0, fill(name)).unwrap();
        writeln!(w, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", lx + 14.0, ly + 4.0, escape(name)).unwrap();
        ly += 22.0;
    }
    writeln!(w, "</g>").unwrap();
    writeln!(w, "</svg>").unwrap();
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_map_to_the_square() {
        assert_eq!(position(0.0, 0.0), (LEFT, TOP + SIDE));
        assert_eq!(position(1.0, 1.0), (LEFT + SIDE, TOP));
        assert_eq!(position(2.0, -1.0), (LEFT + SIDE, TOP + SIDE));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(emit_scatter(&[]).is_err());
    }
}
