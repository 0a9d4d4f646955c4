//! SVG and CSV renderings of explorations.

use std::fmt::Write;

use stopped_grains::geometry::Point;
use stopped_grains::pog::clip_segment;
use stopped_grains::{MarkedConfiguration, StoppedExploration, Window};

/// Realized ray pieces `(id, branch, start, end)`; unstopped rays are clipped
/// to the window.
pub fn realized_segments(expl: &StoppedExploration, config: &MarkedConfiguration) -> Vec<(usize, usize, Point, Point)> {
    let bx = config.window.aabb();
    let reach = bx.diagonal() + bx.width() + bx.height() + 1.0;
    let mut out = Vec::new();
    for (id, p) in config.points.iter().enumerate() {
        for (b, m) in p.branches.iter().enumerate() {
            if expl.records[id].lifetime.is_finite() {
                out.push((id, b, p.germ, expl.ray_end(config, id, b, f64::INFINITY)));
            } else {
                let clip = reach / m.speed.max(f64::MIN_POSITIVE);
                let far = expl.ray_end(config, id, b, clip);
                if let Some((a, e)) = clip_segment(p.germ, far, &bx) {
                    out.push((id, b, a, e));
                }
            }
        }
    }
    out
}

/// `id,branch,x0,y0,x1,y1` rows.
pub fn segments_csv(expl: &StoppedExploration, config: &MarkedConfiguration) -> String {
    let mut s = String::from("id,branch,x0,y0,x1,y1\n");
    for (id, b, a, e) in realized_segments(expl, config) {
        let _ = writeln!(s, "{id},{b},{},{},{},{}", a.x, a.y, e.x, e.y);
    }
    s
}

fn svg_open(window: &Window) -> String {
    // y grows downward in SVG; flip so the picture matches the plane
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n<g transform=\"matrix(1 0 0 -1 0 {})\" fill=\"none\" stroke-linecap=\"round\">\n",
        window.xmin,
        window.ymin,
        window.width(),
        window.height(),
        window.ymin + window.ymax
    )
}

fn stroke(window: &Window) -> f64 {
    1e-3 * window.width().max(window.height()).max(f64::MIN_POSITIVE)
}

/// One line per realized ray piece and a dot at each impact.
pub fn exploration_svg(expl: &StoppedExploration, config: &MarkedConfiguration) -> String {
    let w = &config.window;
    let sw = stroke(w);
    let mut s = svg_open(w);
    for (id, b, a, e) in realized_segments(expl, config) {
        let _ = writeln!(
            s,
            "<line data-id=\"{id}\" data-branch=\"{b}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"{sw}\"/>",
            a.x, a.y, e.x, e.y
        );
    }
    for r in &expl.records {
        if let Some(st) = r.stop() {
            let _ = writeln!(
                s,
                "<circle class=\"impact\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"red\"/>",
                st.impact.x,
                st.impact.y,
                3.0 * sw
            );
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// One polyline per branch path, cut at each grain's lifetime by the caller.
pub fn paths_svg(window: &Window, paths: &[Vec<Vec<Point>>], expl: &StoppedExploration) -> String {
    let sw = stroke(window);
    let mut s = svg_open(window);
    for (id, branches) in paths.iter().enumerate() {
        for (b, path) in branches.iter().enumerate() {
            if path.len() < 2 {
                continue;
            }
            let pts: Vec<String> = path.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
            let _ = writeln!(
                s,
                "<polyline data-id=\"{id}\" data-branch=\"{b}\" points=\"{}\" stroke=\"black\" stroke-width=\"{sw}\"/>",
                pts.join(" ")
            );
        }
    }
    for r in &expl.records {
        if let Some(st) = r.stop() {
            let _ = writeln!(s, "<circle class=\"impact\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"red\"/>", st.impact.x, st.impact.y, 3.0 * sw);
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}
