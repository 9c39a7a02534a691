//! Circuit data model: component kinds with fixed port layouts, components,
//! wires between component ports, and structural checking.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Smallest permitted component width or height, in pixels.
pub const MIN_DIMENSION: i64 = 8;

/// Integer pixel coordinate, x to the right and y down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub fn is_top_bottom(self) -> bool {
        matches!(self, Side::Top | Side::Bottom)
    }
}

/// A port position: the side it sits on and an exact fractional offset
/// `num / den` along that side (top-to-bottom or left-to-right).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortSlot {
    pub side: Side,
    pub num: i64,
    pub den: i64,
}

const fn slot(side: Side, num: i64, den: i64) -> PortSlot {
    PortSlot { side, num, den }
}

const SOURCE_PORTS: &[PortSlot] = &[slot(Side::Right, 1, 2)];
const DEST_PORTS: &[PortSlot] = &[slot(Side::Left, 1, 2)];
const SWITCH_1X2_PORTS: &[PortSlot] = &[
    slot(Side::Left, 1, 2),
    slot(Side::Right, 1, 4),
    slot(Side::Right, 3, 4),
    slot(Side::Top, 1, 2),
    slot(Side::Bottom, 1, 2),
];
const SWITCH_2X1_PORTS: &[PortSlot] = &[
    slot(Side::Left, 1, 4),
    slot(Side::Left, 3, 4),
    slot(Side::Right, 1, 2),
    slot(Side::Top, 1, 2),
    slot(Side::Bottom, 1, 2),
];
const SWITCH_2X2_PORTS: &[PortSlot] = &[
    slot(Side::Left, 1, 4),
    slot(Side::Left, 3, 4),
    slot(Side::Right, 1, 4),
    slot(Side::Right, 3, 4),
    slot(Side::Top, 1, 2),
    slot(Side::Bottom, 1, 2),
];
const SWITCH_3X3_PORTS: &[PortSlot] = &[
    slot(Side::Left, 1, 6),
    slot(Side::Left, 3, 6),
    slot(Side::Left, 5, 6),
    slot(Side::Right, 1, 6),
    slot(Side::Right, 3, 6),
    slot(Side::Right, 5, 6),
    slot(Side::Top, 1, 2),
    slot(Side::Bottom, 1, 2),
];

/// Library component kinds.
///
/// Switches list their `M` left (input) ports first, then their `N` right
/// (output) ports, then one top and one bottom chaining port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    SourceTerminal,
    DestTerminal,
    #[serde(rename = "switch_1x2")]
    Switch1x2,
    #[serde(rename = "switch_2x1")]
    Switch2x1,
    #[serde(rename = "switch_2x2")]
    Switch2x2,
    #[serde(rename = "switch_3x3")]
    Switch3x3,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 6] = [
        ComponentKind::SourceTerminal,
        ComponentKind::DestTerminal,
        ComponentKind::Switch1x2,
        ComponentKind::Switch2x1,
        ComponentKind::Switch2x2,
        ComponentKind::Switch3x3,
    ];

    pub fn port_layout(self) -> &'static [PortSlot] {
        match self {
            ComponentKind::SourceTerminal => SOURCE_PORTS,
            ComponentKind::DestTerminal => DEST_PORTS,
            ComponentKind::Switch1x2 => SWITCH_1X2_PORTS,
            ComponentKind::Switch2x1 => SWITCH_2X1_PORTS,
            ComponentKind::Switch2x2 => SWITCH_2X2_PORTS,
            ComponentKind::Switch3x3 => SWITCH_3X3_PORTS,
        }
    }

    pub fn port_count(self) -> usize {
        self.port_layout().len()
    }

    pub fn port(self, port: usize) -> Option<PortSlot> {
        self.port_layout().get(port).copied()
    }

    /// Default (width, height) used by the generators.
    pub fn default_size(self) -> (i64, i64) {
        match self {
            ComponentKind::SourceTerminal | ComponentKind::DestTerminal => (24, 24),
            ComponentKind::Switch1x2 | ComponentKind::Switch2x1 | ComponentKind::Switch2x2 => {
                (40, 60)
            }
            ComponentKind::Switch3x3 => (40, 90),
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, ComponentKind::SourceTerminal | ComponentKind::DestTerminal)
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::SourceTerminal => "source_terminal",
            ComponentKind::DestTerminal => "dest_terminal",
            ComponentKind::Switch1x2 => "switch_1x2",
            ComponentKind::Switch2x1 => "switch_2x1",
            ComponentKind::Switch2x2 => "switch_2x2",
            ComponentKind::Switch3x3 => "switch_3x3",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// True iff `port` sits on the top or bottom side of `kind`.
pub fn port_is_top_bottom(kind: ComponentKind, port: usize) -> Result<bool, ModelError> {
    kind.port(port)
        .map(|slot| slot.side.is_top_bottom())
        .ok_or(ModelError::UnknownPort { kind, port })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    pub kind: ComponentKind,
    pub centre: Point,
    pub width: i64,
    pub height: i64,
}

impl Component {
    /// Top-left corner of the bounding box.
    pub fn origin(&self) -> Point {
        Point::new(
            self.centre.x - self.width.div_euclid(2),
            self.centre.y - self.height.div_euclid(2),
        )
    }

    /// Anchor of `port` on the bounding-box perimeter.
    pub fn port_point(&self, port: usize) -> Option<Point> {
        let slot = self.kind.port(port)?;
        let o = self.origin();
        let along = |len: i64| rounded_fraction(len, slot.num, slot.den);
        Some(match slot.side {
            Side::Left => Point::new(o.x, o.y + along(self.height)),
            Side::Right => Point::new(o.x + self.width, o.y + along(self.height)),
            Side::Top => Point::new(o.x + along(self.width), o.y),
            Side::Bottom => Point::new(o.x + along(self.width), o.y + self.height),
        })
    }
}

// len * num / den rounded half up; all operands non-negative here.
fn rounded_fraction(len: i64, num: i64, den: i64) -> i64 {
    (2 * len * num + den).div_euclid(2 * den)
}

/// Colour stored as an RGB triple, serialized as `#rrggbb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);
    pub const RED: Rgb = Rgb(255, 0, 0);
    pub const GREEN: Rgb = Rgb(0, 255, 0);

    pub fn to_hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    pub fn parse_hex(s: &str) -> Option<Rgb> {
        let hex = s.strip_prefix('#')?;
        if hex.len() != 6 || !hex.is_ascii() {
            return None;
        }
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
        Some(Rgb(byte(0)?, byte(2)?, byte(4)?))
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Rgb::parse_hex(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid colour {s:?}, expected #rrggbb")))
    }
}

/// A (component, port) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endpoint {
    pub comp: usize,
    pub port: usize,
}

impl Endpoint {
    pub const fn new(comp: usize, port: usize) -> Self {
        Endpoint { comp, port }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub id: usize,
    pub a: Endpoint,
    pub b: Endpoint,
    pub color: Rgb,
    pub thickness: i64,
    pub bent: bool,
}

impl Wire {
    pub fn touches(&self, comp: usize) -> bool {
        self.a.comp == comp || self.b.comp == comp
    }

    /// The component at the other end, if `comp` is one of the endpoints.
    pub fn other_end(&self, comp: usize) -> Option<usize> {
        if self.a.comp == comp {
            Some(self.b.comp)
        } else if self.b.comp == comp {
            Some(self.a.comp)
        } else {
            None
        }
    }
}

/// Appearance of a new wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireStyle {
    pub color: Rgb,
    pub thickness: i64,
    pub bent: bool,
}

impl Default for WireStyle {
    fn default() -> Self {
        WireStyle { color: Rgb::BLACK, thickness: 1, bent: false }
    }
}

impl WireStyle {
    pub fn bent() -> Self {
        WireStyle { bent: true, ..Self::default() }
    }
}

/// A drawable, simulatable circuit. Component and wire ids are their
/// positions in drawing order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Circuit {
    name: String,
    components: Vec<Component>,
    wires: Vec<Wire>,
}

impl Circuit {
    pub fn builder(name: impl Into<String>) -> CircuitBuilder {
        CircuitBuilder { circuit: Circuit { name: name.into(), ..Circuit::default() } }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn no_cmp(&self) -> usize {
        self.components.len()
    }

    pub fn no_line(&self) -> usize {
        self.wires.len()
    }

    pub fn component(&self, id: usize) -> Result<&Component, ModelError> {
        self.components.get(id).ok_or(ModelError::UnknownComponent(id))
    }

    pub fn wire(&self, id: usize) -> Option<&Wire> {
        self.wires.get(id)
    }

    /// Ids of every component of `kind`, ascending.
    pub fn ids_of_kind(&self, kind: ComponentKind) -> Vec<usize> {
        self.components.iter().filter(|c| c.kind == kind).map(|c| c.id).collect()
    }

    /// Absolute pixel anchor of `port` on component `comp`.
    pub fn port_anchor(&self, comp: usize, port: usize) -> Result<Point, ModelError> {
        let c = self.component(comp)?;
        c.port_point(port).ok_or(ModelError::UnknownPort { kind: c.kind, port })
    }

    /// Copy of this circuit under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Circuit {
        Circuit { name: name.into(), ..self.clone() }
    }
}

/// Incremental construction of a [`Circuit`]. No checks happen here; run
/// [`check_circuit`] on the result.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    circuit: Circuit,
}

impl CircuitBuilder {
    pub fn component(&mut self, kind: ComponentKind, centre: Point) -> usize {
        let (w, h) = kind.default_size();
        self.component_sized(kind, centre, w, h)
    }

    pub fn component_sized(&mut self, kind: ComponentKind, centre: Point, width: i64, height: i64) -> usize {
        let id = self.circuit.components.len();
        self.circuit.components.push(Component { id, kind, centre, width, height });
        id
    }

    pub fn wire(&mut self, a: Endpoint, b: Endpoint) -> usize {
        self.wire_styled(a, b, WireStyle::default())
    }

    pub fn wire_styled(&mut self, a: Endpoint, b: Endpoint, style: WireStyle) -> usize {
        let id = self.circuit.wires.len();
        self.circuit.wires.push(Wire {
            id,
            a,
            b,
            color: style.color,
            thickness: style.thickness,
            bent: style.bent,
        });
        id
    }

    pub fn no_cmp(&self) -> usize {
        self.circuit.components.len()
    }

    pub fn build(self) -> Circuit {
        self.circuit
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown component {0}")]
    UnknownComponent(usize),
    #[error("port {port} does not exist on {kind}")]
    UnknownPort { kind: ComponentKind, port: usize },
}

/// A structural problem found by [`check_circuit`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    DanglingEndpoint { wire: usize, component: usize },
    InvalidPort { wire: usize, component: usize, port: usize },
    IdenticalEndpoints { wire: usize },
    DuplicateEndpointPair { wire: usize, duplicate_of: usize },
    BadThickness { wire: usize, thickness: i64 },
    BadDimension { component: usize, width: i64, height: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEndpoint { wire, component } => {
                write!(f, "wire {wire}: endpoint refers to missing component {component}")
            }
            Violation::InvalidPort { wire, component, port } => {
                write!(f, "wire {wire}: component {component} has no port {port}")
            }
            Violation::IdenticalEndpoints { wire } => write!(f, "wire {wire}: both ends on the same port"),
            Violation::DuplicateEndpointPair { wire, duplicate_of } => {
                write!(f, "wire {wire}: duplicates the endpoints of wire {duplicate_of}")
            }
            Violation::BadThickness { wire, thickness } => {
                write!(f, "wire {wire}: thickness {thickness} is below 1")
            }
            Violation::BadDimension { component, width, height } => write!(
                f,
                "component {component}: size {width}x{height} is below the {MIN_DIMENSION}px minimum"
            ),
        }
    }
}

/// Every structural violation in `circuit`: wire problems in wire-id order,
/// then component problems in component-id order. Empty means valid.
pub fn check_circuit(circuit: &Circuit) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: HashMap<(Endpoint, Endpoint), usize> = HashMap::new();
    for w in circuit.wires() {
        let mut endpoints_ok = true;
        for end in [w.a, w.b] {
            match circuit.components().get(end.comp) {
                None => {
                    endpoints_ok = false;
                    out.push(Violation::DanglingEndpoint { wire: w.id, component: end.comp });
                }
                Some(c) if end.port >= c.kind.port_count() => {
                    endpoints_ok = false;
                    out.push(Violation::InvalidPort { wire: w.id, component: end.comp, port: end.port });
                }
                Some(_) => {}
            }
        }
        if w.a == w.b {
            out.push(Violation::IdenticalEndpoints { wire: w.id });
        } else if endpoints_ok {
            let key = if w.a <= w.b { (w.a, w.b) } else { (w.b, w.a) };
            if let Some(&first) = seen.get(&key) {
                out.push(Violation::DuplicateEndpointPair { wire: w.id, duplicate_of: first });
            } else {
                seen.insert(key, w.id);
            }
        }
        if w.thickness < 1 {
            out.push(Violation::BadThickness { wire: w.id, thickness: w.thickness });
        }
    }
    for c in circuit.components() {
        if c.width < MIN_DIMENSION || c.height < MIN_DIMENSION {
            out.push(Violation::BadDimension { component: c.id, width: c.width, height: c.height });
        }
    }
    out
}

/// The three-component fixture used across the test suites: a source, one
/// 2x2 switch and a destination joined by two straight wires.
pub fn tiny3() -> Circuit {
    let mut b = Circuit::builder("tiny3");
    let src = b.component(ComponentKind::SourceTerminal, Point::new(100, 100));
    let sw = b.component_sized(ComponentKind::Switch2x2, Point::new(300, 100), 40, 60);
    let dst = b.component(ComponentKind::DestTerminal, Point::new(500, 100));
    b.wire(Endpoint::new(src, 0), Endpoint::new(sw, 0));
    b.wire(Endpoint::new(sw, 2), Endpoint::new(dst, 0));
    b.build()
}
