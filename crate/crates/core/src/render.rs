//! Vector rendering of circuits and simulation frames.
//!
//! Planning resolves all geometry into a [`RenderPlan`]; [`emit_svg`] turns
//! a plan into canonical SVG text. Coordinates stay integral throughout so
//! identical plans always give identical bytes.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{check_circuit, port_is_top_bottom, Circuit, ComponentKind, Point, Rgb, Violation, Wire};
use crate::paths::{validate, FaultSet, PathSpec, ValidationReport};
use crate::sim::PathState;

/// Half-diagonal of the fault cross.
pub const CROSS_ARM: i64 = 40;
/// Stroke width of path highlights.
pub const HIGHLIGHT_THICKNESS: i64 = 3;
/// Vertical offset of a wire label above its first anchor.
pub const WIRE_LABEL_RISE: i64 = 2;
/// Empty space kept around the content.
pub const CANVAS_MARGIN: i64 = 50;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid circuit: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidCircuit(Vec<Violation>),
    #[error("validation failed")]
    ValidationFailed(ValidationReport),
    #[error("i/o error: {0}")]
    Sink(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderOptions {
    /// Reproduce the original drawing code, which picks the second bend
    /// offset from the first endpoint's port index.
    pub bug_compat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub origin: Point,
    pub width: i64,
    pub height: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Glyph {
    pub component: usize,
    pub kind: ComponentKind,
    pub origin: Point,
    pub width: i64,
    pub height: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Wire,
    Highlight,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub color: Rgb,
    pub thickness: i64,
    pub wire: usize,
    pub layer: Layer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cross {
    pub centre: Point,
    pub arm: i64,
}

impl Cross {
    /// The two diagonal strokes: top-left to bottom-right, then bottom-left
    /// to top-right.
    pub fn segments(&self) -> [(Point, Point); 2] {
        let Point { x, y } = self.centre;
        let a = self.arm;
        [
            (Point::new(x - a, y - a), Point::new(x + a, y + a)),
            (Point::new(x - a, y + a), Point::new(x + a, y - a)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub text: String,
    pub anchor: Point,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderPlan {
    pub canvas: Canvas,
    pub glyphs: Vec<Glyph>,
    pub polylines: Vec<Polyline>,
    pub crosses: Vec<Cross>,
    pub labels: Vec<Label>,
}

impl RenderPlan {
    pub fn empty() -> Self {
        let mut plan = RenderPlan {
            canvas: Canvas { origin: Point::new(0, 0), width: 0, height: 0 },
            glyphs: Vec::new(),
            polylines: Vec::new(),
            crosses: Vec::new(),
            labels: Vec::new(),
        };
        plan.fit_canvas(&[]);
        plan
    }

    fn content_points(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        for g in &self.glyphs {
            pts.push(g.origin);
            pts.push(Point::new(g.origin.x + g.width, g.origin.y + g.height));
        }
        pts.extend(self.polylines.iter().flat_map(|p| p.points.iter().copied()));
        pts.extend(self.crosses.iter().flat_map(|c| c.segments()).flat_map(|(a, b)| [a, b]));
        pts.extend(self.labels.iter().map(|l| l.anchor));
        pts
    }

    /// Sizes the canvas to the content plus `extra` points and the margin.
    fn fit_canvas(&mut self, extra: &[Point]) {
        let mut pts = self.content_points();
        pts.extend_from_slice(extra);
        let (min, max) = if pts.is_empty() {
            (Point::new(0, 0), Point::new(0, 0))
        } else {
            pts.iter().fold(
                (Point::new(i64::MAX, i64::MAX), Point::new(i64::MIN, i64::MIN)),
                |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
            )
        };
        self.canvas = Canvas {
            origin: Point::new(min.x - CANVAS_MARGIN, min.y - CANVAS_MARGIN),
            width: max.x - min.x + 2 * CANVAS_MARGIN,
            height: max.y - min.y + 2 * CANVAS_MARGIN,
        };
    }
}

/// Horizontal detour of a bent wire at one endpoint: twice the component
/// width for a top or bottom port, one and a half times (truncated)
/// otherwise.
pub fn bend_offset(width: i64, top_bottom: bool) -> i64 {
    if top_bottom {
        2 * width
    } else {
        (3 * width) / 2
    }
}

/// Offsets `(first, second)` for a bent wire.
pub fn bent_offsets(circuit: &Circuit, wire: &Wire, opts: RenderOptions) -> (i64, i64) {
    let a = &circuit.components()[wire.a.comp];
    let b = &circuit.components()[wire.b.comp];
    let a_tb = port_is_top_bottom(a.kind, wire.a.port).unwrap_or(false);
    let b_port = if opts.bug_compat { wire.a.port } else { wire.b.port };
    let b_tb = port_is_top_bottom(b.kind, b_port).unwrap_or(false);
    (bend_offset(a.width, a_tb), bend_offset(b.width, b_tb))
}

/// Route of a wire: two anchors when straight, otherwise four points that
/// step sideways from each anchor, to the right when the first anchor is
/// not right of the second and to the left otherwise.
pub fn wire_points(circuit: &Circuit, wire: &Wire, opts: RenderOptions) -> Vec<Point> {
    let p1 = circuit.port_anchor(wire.a.comp, wire.a.port).expect("checked circuit");
    let p3 = circuit.port_anchor(wire.b.comp, wire.b.port).expect("checked circuit");
    if !wire.bent {
        return vec![p1, p3];
    }
    let (wtm1, wtm2) = bent_offsets(circuit, wire, opts);
    let sign = if p1.x <= p3.x { 1 } else { -1 };
    vec![
        p1,
        Point::new(p1.x + sign * wtm1, p1.y),
        Point::new(p3.x + sign * wtm2, p3.y),
        p3,
    ]
}

fn base_plan(circuit: &Circuit, opts: RenderOptions) -> Result<RenderPlan, RenderError> {
    let violations = check_circuit(circuit);
    if !violations.is_empty() {
        return Err(RenderError::InvalidCircuit(violations));
    }
    let mut plan = RenderPlan::empty();
    for c in circuit.components() {
        plan.glyphs.push(Glyph { component: c.id, kind: c.kind, origin: c.origin(), width: c.width, height: c.height });
        plan.labels.push(Label { text: c.id.to_string(), anchor: c.centre });
    }
    for w in circuit.wires() {
        let points = wire_points(circuit, w, opts);
        if !w.bent {
            plan.labels.push(Label {
                text: w.id.to_string(),
                anchor: Point::new(points[0].x, points[0].y - WIRE_LABEL_RISE),
            });
        }
        plan.polylines.push(Polyline { points, color: w.color, thickness: w.thickness, wire: w.id, layer: Layer::Wire });
    }
    Ok(plan)
}

/// Static drawing of a circuit: a glyph and id label per component, a
/// polyline per wire, and an id label above each straight wire.
pub fn plan_circuit(circuit: &Circuit) -> Result<RenderPlan, RenderError> {
    plan_circuit_with(circuit, RenderOptions::default())
}

pub fn plan_circuit_with(circuit: &Circuit, opts: RenderOptions) -> Result<RenderPlan, RenderError> {
    let mut plan = base_plan(circuit, opts)?;
    plan.fit_canvas(&[]);
    Ok(plan)
}

/// One animation frame: the static drawing with the path over-drawn green or
/// red, and on red frames a cross over every declared fault. The canvas
/// always has room for the crosses so green and red frames share it.
pub fn plan_simulation_frame(
    circuit: &Circuit,
    path: &PathSpec,
    faults: &FaultSet,
    state: PathState,
    opts: RenderOptions,
) -> Result<RenderPlan, RenderError> {
    let mut plan = base_plan(circuit, opts)?;
    let report = validate(circuit, path, faults);
    if !report.valid {
        return Err(RenderError::ValidationFailed(report));
    }
    let color = match state {
        PathState::Green => Rgb::GREEN,
        PathState::Red => Rgb::RED,
    };
    for &w in &path.wires {
        let wire = &circuit.wires()[w];
        plan.polylines.push(Polyline {
            points: wire_points(circuit, wire, opts),
            color,
            thickness: HIGHLIGHT_THICKNESS,
            wire: w,
            layer: Layer::Highlight,
        });
    }
    let crosses: Vec<Cross> = faults
        .components
        .iter()
        .map(|&c| Cross { centre: circuit.components()[c].centre, arm: CROSS_ARM })
        .collect();
    let reserve: Vec<Point> = crosses.iter().flat_map(|c| c.segments()).flat_map(|(a, b)| [a, b]).collect();
    if state == PathState::Red {
        plan.crosses = crosses;
    }
    plan.fit_canvas(&reserve);
    Ok(plan)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn glyph_element(g: &Glyph) -> String {
    let (x, y, w, h) = (g.origin.x, g.origin.y, g.width, g.height);
    match g.kind {
        ComponentKind::SourceTerminal => format!(
            "<polygon class=\"component {}\" data-id=\"{}\" points=\"{},{} {},{} {},{}\" fill=\"#ffffff\" stroke=\"#000000\"/>",
            g.kind, g.component, x, y, x + w, y + h / 2, x, y + h
        ),
        ComponentKind::DestTerminal => format!(
            "<polygon class=\"component {}\" data-id=\"{}\" points=\"{},{} {},{} {},{}\" fill=\"#ffffff\" stroke=\"#000000\"/>",
            g.kind, g.component, x + w, y, x, y + h / 2, x + w, y + h
        ),
        _ => format!(
            "<rect class=\"component {}\" data-id=\"{}\" x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"#ffffff\" stroke=\"#000000\"/>",
            g.kind, g.component
        ),
    }
}

/// Canonical SVG text of a plan.
pub fn svg_string(plan: &RenderPlan) -> String {
    let Canvas { origin, width, height } = plan.canvas;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"{} {} {width} {height}\">",
        origin.x, origin.y
    );
    let _ = writeln!(
        s,
        "<rect class=\"canvas\" x=\"{}\" y=\"{}\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>",
        origin.x, origin.y
    );
    for g in &plan.glyphs {
        s.push_str(&glyph_element(g));
        s.push('\n');
    }
    for p in &plan.polylines {
        let pts = p.points.iter().map(|p| format!("{},{}", p.x, p.y)).collect::<Vec<_>>().join(" ");
        let class = match p.layer {
            Layer::Wire => "wire",
            Layer::Highlight => "highlight",
        };
        let _ = writeln!(
            s,
            "<polyline class=\"{class}\" data-wire=\"{}\" points=\"{pts}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
            p.wire,
            p.color.to_hex(),
            p.thickness
        );
    }
    for c in &plan.crosses {
        for (a, b) in c.segments() {
            let _ = writeln!(
                s,
                "<line class=\"cross\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1\"/>",
                a.x,
                a.y,
                b.x,
                b.y,
                Rgb::RED.to_hex()
            );
        }
    }
    for l in &plan.labels {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">{}</text>",
            l.anchor.x,
            l.anchor.y,
            escape(&l.text)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg<W: Write>(plan: &RenderPlan, mut sink: W) -> Result<(), RenderError> {
    sink.write_all(svg_string(plan).as_bytes())?;
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{tiny3, Endpoint, WireStyle};

    fn bent_pair(a_port: usize, b_port: usize, a_x: i64, b_x: i64) -> Circuit {
        let mut b = Circuit::builder("bent");
        let s = b.component_sized(ComponentKind::Switch2x2, Point::new(a_x, 100), 40, 60);
        let t = b.component_sized(ComponentKind::Switch2x2, Point::new(b_x, 300), 40, 60);
        b.wire_styled(Endpoint::new(s, a_port), Endpoint::new(t, b_port), WireStyle::bent());
        b.build()
    }

    #[test]
    fn tiny3_counts() {
        let plan = plan_circuit(&tiny3()).unwrap();
        assert_eq!(plan.glyphs.len(), 3);
        assert_eq!(plan.polylines.len(), 2);
        assert!(plan.polylines.iter().all(|p| p.points.len() == 2));
        assert_eq!(plan.labels.len(), 5);
        assert_eq!(plan.labels[3], Label { text: "0".into(), anchor: Point::new(112, 98) });
        assert_eq!(plan.labels[4], Label { text: "1".into(), anchor: Point::new(320, 83) });
        assert!(plan.crosses.is_empty());
    }

    #[test]
    fn side_ports_bend_by_one_and_a_half_widths() {
        let c = bent_pair(0, 1, 100, 400);
        assert_eq!(bent_offsets(&c, &c.wires()[0], RenderOptions::default()), (60, 60));
        let pts = wire_points(&c, &c.wires()[0], RenderOptions::default());
        // p1 = (80, 85), p3 = (380, 315)
        assert_eq!(pts, vec![Point::new(80, 85), Point::new(140, 85), Point::new(440, 315), Point::new(380, 315)]);
    }

    #[test]
    fn top_port_bends_by_two_widths() {
        let c = bent_pair(4, 1, 100, 400);
        assert_eq!(bent_offsets(&c, &c.wires()[0], RenderOptions::default()), (80, 60));
        let c = bent_pair(0, 5, 100, 400);
        assert_eq!(bent_offsets(&c, &c.wires()[0], RenderOptions::default()), (60, 80));
    }

    #[test]
    fn bend_goes_left_when_first_anchor_is_right() {
        let c = bent_pair(2, 1, 400, 100);
        let pts = wire_points(&c, &c.wires()[0], RenderOptions::default());
        // p1 = (420, 85), p3 = (80, 315)
        assert_eq!(pts[1], Point::new(360, 85));
        assert_eq!(pts[2], Point::new(20, 315));
    }

    #[test]
    fn bug_compat_uses_first_port_for_both_ends() {
        let c = bent_pair(0, 5, 100, 400);
        assert_eq!(bent_offsets(&c, &c.wires()[0], RenderOptions { bug_compat: true }), (60, 60));
        let c = bent_pair(4, 1, 100, 400);
        assert_eq!(bent_offsets(&c, &c.wires()[0], RenderOptions { bug_compat: true }), (80, 80));
    }

    #[test]
    fn bent_wires_have_no_label() {
        let c = bent_pair(0, 1, 100, 400);
        let plan = plan_circuit(&c).unwrap();
        assert_eq!(plan.labels.len(), 2);
        assert_eq!(plan.polylines[0].points.len(), 4);
    }

    #[test]
    fn green_frame_highlights_path() {
        let c = tiny3();
        let plan = plan_simulation_frame(&c, &PathSpec::parse("01").unwrap(), &FaultSet::default(), PathState::Green, RenderOptions::default()).unwrap();
        let hl: Vec<&Polyline> = plan.polylines.iter().filter(|p| p.layer == Layer::Highlight).collect();
        assert_eq!(hl.len(), 2);
        assert!(hl.iter().all(|p| p.thickness == 3 && p.color == Rgb::GREEN));
        assert!(plan.crosses.is_empty());
    }

    #[test]
    fn red_frame_crosses_faults() {
        let c = tiny3();
        let plan = plan_simulation_frame(
            &c,
            &PathSpec::parse("01").unwrap(),
            &FaultSet::parse("1").unwrap(),
            PathState::Red,
            RenderOptions::default(),
        )
        .unwrap();
        assert_eq!(plan.crosses.len(), 1);
        assert_eq!(
            plan.crosses[0].segments(),
            [
                (Point::new(260, 60), Point::new(340, 140)),
                (Point::new(260, 140), Point::new(340, 60)),
            ]
        );
        assert!(plan.polylines.iter().filter(|p| p.layer == Layer::Highlight).all(|p| p.color == Rgb::RED));

        let none = plan_simulation_frame(&c, &PathSpec::parse("01").unwrap(), &FaultSet::default(), PathState::Red, RenderOptions::default()).unwrap();
        assert!(none.crosses.is_empty());
        assert_eq!(none.polylines.iter().filter(|p| p.color == Rgb::RED).count(), 2);
    }

    #[test]
    fn invalid_frame_inputs() {
        let c = tiny3();
        let err = plan_simulation_frame(&c, &PathSpec::parse("05").unwrap(), &FaultSet::default(), PathState::Green, RenderOptions::default());
        assert!(matches!(err, Err(RenderError::ValidationFailed(_))));
    }

    #[test]
    fn empty_plan_svg() {
        let svg = svg_string(&plan_circuit(&Circuit::default()).unwrap());
        assert_eq!(
            svg,
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"100\" height=\"100\" viewBox=\"-50 -50 100 100\">\n\
             <rect class=\"canvas\" x=\"-50\" y=\"-50\" width=\"100\" height=\"100\" fill=\"#ffffff\"/>\n\
             </svg>\n"
        );
    }

    #[test]
    fn svg_is_stable() {
        let plan = plan_circuit(&tiny3()).unwrap();
        let a = svg_string(&plan);
        let mut b = Vec::new();
        emit_svg(&plan, &mut b).unwrap();
        assert_eq!(a.as_bytes(), b.as_slice());
        assert_eq!(a.matches("<polyline").count(), 2);
    }
}
