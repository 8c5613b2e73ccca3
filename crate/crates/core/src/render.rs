//! Deterministic SVG frames of a world state with optional overlays.

use std::fmt::Write;

use crate::geometry::Roi;
use crate::planner::BenchmarkSet;
use crate::sim::{ActionPlan, Arm, WorldState};
use crate::Point;

/// SVG units per meter.
const SCALE: f64 = 1000.0;

/// What to draw on top of the world.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overlay<'a> {
    pub goal_curve: Option<&'a [Point]>,
    pub keypoints: Option<&'a [Point]>,
    pub goal_keypoints: Option<&'a [Point]>,
    pub benchmarks: Option<&'a BenchmarkSet>,
    pub plan: Option<&'a ActionPlan>,
    pub title: Option<&'a str>,
}

struct Canvas {
    roi: Roi,
}

impl Canvas {
    fn x(&self, p: &Point) -> f64 {
        (p.x - self.roi.x_min) * SCALE
    }

    fn y(&self, p: &Point) -> f64 {
        (self.roi.y_max - p.y) * SCALE
    }

    fn points(&self, pts: impl IntoIterator<Item = Point>) -> String {
        let mut out = String::new();
        for (i, p) in pts.into_iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.2},{:.2}", self.x(&p), self.y(&p));
        }
        out
    }
}

/// Render `world` over `roi`. The rope is a single polyline of class
/// `rope`, each contact a circle of class `contact`.
pub fn render_svg(world: &WorldState, roi: Roi, overlay: &Overlay) -> String {
    let cv = Canvas { roi };
    let (w, h) = (roi.width() * SCALE, roi.height() * SCALE);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    s.push_str(concat!(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">",
        "<path d=\"M0,0 L10,5 L0,10 z\" fill=\"#c0392b\"/></marker></defs>\n"
    ));
    let _ = writeln!(s, r##"<rect width="{w:.2}" height="{h:.2}" fill="#ffffff"/>"##);
    if let Some(t) = overlay.title {
        let _ = writeln!(
            s,
            r##"<text x="10" y="24" font-size="18" font-family="monospace">{}</text>"##,
            escape(t)
        );
    }
    for ws in &world.workspaces {
        for r in [ws.r_inner, ws.r_outer] {
            let _ = writeln!(
                s,
                r##"<circle class="workspace" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#95a5a6" stroke-dasharray="6 6"/>"##,
                cv.x(&ws.center),
                cv.y(&ws.center),
                r * SCALE
            );
        }
    }
    let rope_width = 2.0 * world.rope.half_thickness * SCALE;
    if let Some(g) = overlay.goal_curve {
        let _ = writeln!(
            s,
            r##"<polyline class="goal" points="{}" fill="none" stroke="#d5e8d4" stroke-width="{rope_width:.2}" stroke-linecap="round" stroke-linejoin="round"/>"##,
            cv.points(g.iter().copied())
        );
    }
    for c in &world.contacts {
        let _ = writeln!(
            s,
            r##"<circle class="contact" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#7f8c8d"/>"##,
            cv.x(&c.center),
            cv.y(&c.center),
            c.radius * SCALE
        );
    }
    let _ = writeln!(
        s,
        r##"<polyline class="rope" points="{}" fill="none" stroke="#2c3e50" stroke-width="{rope_width:.2}" stroke-linecap="round" stroke-linejoin="round"/>"##,
        cv.points(world.rope.nodes.iter().copied())
    );
    if let Some(b) = overlay.benchmarks {
        for cb in &b.contacts {
            for (p, e) in cb.points.iter().zip(&cb.extended) {
                let _ = writeln!(
                    s,
                    r##"<rect class="benchmark" x="{:.2}" y="{:.2}" width="8" height="8" fill="#27ae60"/>"##,
                    cv.x(p) - 4.0,
                    cv.y(p) - 4.0
                );
                let _ = writeln!(
                    s,
                    r##"<rect class="extended" x="{:.2}" y="{:.2}" width="8" height="8" fill="none" stroke="#27ae60"/>"##,
                    cv.x(e) - 4.0,
                    cv.y(e) - 4.0
                );
            }
        }
    }
    for (pts, class, color) in [
        (overlay.goal_keypoints, "goal-keypoint", "#16a085"),
        (overlay.keypoints, "keypoint", "#e67e22"),
    ] {
        for p in pts.into_iter().flatten() {
            let _ = writeln!(
                s,
                r##"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"##,
                cv.x(p),
                cv.y(p)
            );
        }
    }
    if let Some(plan) = overlay.plan {
        for arm in Arm::BOTH {
            let ap = plan.arm(arm);
            let Some(node) = ap.grasp_node() else { continue };
            let start = world.rope.nodes[node];
            let path = ap.path();
            let _ = writeln!(
                s,
                r##"<circle class="grasp" cx="{:.2}" cy="{:.2}" r="6" fill="none" stroke="#c0392b" stroke-width="2"/>"##,
                cv.x(&start),
                cv.y(&start)
            );
            if path.is_empty() {
                continue;
            }
            let _ = writeln!(
                s,
                r##"<polyline class="plan {}" points="{}" fill="none" stroke="#c0392b" stroke-width="2" marker-end="url(#arrow)"/>"##,
                arm.name(),
                cv.points(std::iter::once(start).chain(path.iter().map(|p| p.position)))
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
