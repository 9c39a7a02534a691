//! Text persistence for circuits (`.mincir`) and scenarios (`.minsc`).
//!
//! Both formats are pretty-printed JSON with a fixed key order and a
//! trailing newline, so equal documents serialize to identical bytes. The
//! service uses the same schema for its request and response bodies.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{check_circuit, Circuit, ComponentKind, Endpoint, Point, Rgb, Violation, WireStyle};
use crate::sim::DropParity;

pub const FORMAT_VERSION: u32 = 1;

/// Component and wire capacity of the original drawing tool, enforced only
/// by [`LoadOptions::strict`].
pub const LEGACY_CAPACITY: usize = 100;

pub const CIRCUIT_EXTENSION: &str = "mincir";
pub const SCENARIO_EXTENSION: &str = "minsc";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Sink(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u64),
    #[error("invalid circuit: {}", join_violations(.0))]
    InvalidCircuit(Vec<Violation>),
    #[error("circuit exceeds the legacy capacity of {LEGACY_CAPACITY} ({components} components, {wires} wires)")]
    CapacityExceeded { components: usize, wires: usize },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitDocument {
    pub format_version: u32,
    pub circuit: Circuit,
}

impl CircuitDocument {
    pub fn new(circuit: Circuit) -> Self {
        CircuitDocument { format_version: FORMAT_VERSION, circuit }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Reject documents with more than [`LEGACY_CAPACITY`] components or wires.
    pub strict: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitRepr {
    format_version: u64,
    name: String,
    components: Vec<ComponentRepr>,
    wires: Vec<WireRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentRepr {
    id: usize,
    kind: ComponentKind,
    centre: [i64; 2],
    width: i64,
    height: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRepr {
    id: usize,
    a: [usize; 2],
    b: [usize; 2],
    color: Rgb,
    thickness: i64,
    bent: bool,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<serde_json::Value>,
}

fn check_version(text: &str) -> Result<(), FormatError> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    match probe.format_version {
        None => Err(FormatError::Parse("missing format_version".into())),
        Some(v) => match v.as_u64() {
            Some(n) if n == u64::from(FORMAT_VERSION) => Ok(()),
            Some(n) => Err(FormatError::UnsupportedVersion(n)),
            None => Err(FormatError::Parse(format!("format_version must be an integer, got {v}"))),
        },
    }
}

fn to_repr(circuit: &Circuit) -> CircuitRepr {
    CircuitRepr {
        format_version: u64::from(FORMAT_VERSION),
        name: circuit.name().to_string(),
        components: circuit
            .components()
            .iter()
            .map(|c| ComponentRepr {
                id: c.id,
                kind: c.kind,
                centre: [c.centre.x, c.centre.y],
                width: c.width,
                height: c.height,
            })
            .collect(),
        wires: circuit
            .wires()
            .iter()
            .map(|w| WireRepr {
                id: w.id,
                a: [w.a.comp, w.a.port],
                b: [w.b.comp, w.b.port],
                color: w.color,
                thickness: w.thickness,
                bent: w.bent,
            })
            .collect(),
    }
}

fn from_repr(repr: CircuitRepr) -> Result<Circuit, FormatError> {
    let mut b = Circuit::builder(repr.name);
    for (i, c) in repr.components.into_iter().enumerate() {
        if c.id != i {
            return Err(FormatError::Parse(format!("component record {i} has id {}", c.id)));
        }
        b.component_sized(c.kind, Point::new(c.centre[0], c.centre[1]), c.width, c.height);
    }
    for (i, w) in repr.wires.into_iter().enumerate() {
        if w.id != i {
            return Err(FormatError::Parse(format!("wire record {i} has id {}", w.id)));
        }
        b.wire_styled(
            Endpoint::new(w.a[0], w.a[1]),
            Endpoint::new(w.b[0], w.b[1]),
            WireStyle { color: w.color, thickness: w.thickness, bent: w.bent },
        );
    }
    Ok(b.build())
}

/// Canonical text of a circuit document.
pub fn circuit_to_string(doc: &CircuitDocument) -> Result<String, FormatError> {
    let violations = check_circuit(&doc.circuit);
    if !violations.is_empty() {
        return Err(FormatError::InvalidCircuit(violations));
    }
    let mut text = serde_json::to_string_pretty(&to_repr(&doc.circuit)).map_err(|e| FormatError::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn save_circuit<W: Write>(doc: &CircuitDocument, mut sink: W) -> Result<(), FormatError> {
    let text = circuit_to_string(doc)?;
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn circuit_from_str(text: &str, opts: LoadOptions) -> Result<CircuitDocument, FormatError> {
    check_version(text)?;
    let repr: CircuitRepr = serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    if opts.strict && (repr.components.len() > LEGACY_CAPACITY || repr.wires.len() > LEGACY_CAPACITY) {
        return Err(FormatError::CapacityExceeded { components: repr.components.len(), wires: repr.wires.len() });
    }
    let circuit = from_repr(repr)?;
    let violations = check_circuit(&circuit);
    if !violations.is_empty() {
        return Err(FormatError::InvalidCircuit(violations));
    }
    Ok(CircuitDocument::new(circuit))
}

pub fn load_circuit<R: Read>(mut source: R) -> Result<CircuitDocument, FormatError> {
    load_circuit_with(&mut source, LoadOptions::default())
}

pub fn load_circuit_with<R: Read>(mut source: R, opts: LoadOptions) -> Result<CircuitDocument, FormatError> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => FormatError::Parse("document is not valid UTF-8".into()),
            _ => FormatError::Sink(e),
        })?;
    circuit_from_str(&text, opts)
}

/// A saved simulation setup: raw path and fault strings plus run settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub path_input: String,
    pub faults_input: String,
    pub duration_ticks: u64,
    #[serde(default)]
    pub drop_parity: DropParity,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioRepr {
    format_version: u64,
    #[serde(flatten)]
    scenario: ScenarioDocument,
}

pub fn scenario_to_string(doc: &ScenarioDocument) -> Result<String, FormatError> {
    if doc.duration_ticks == 0 {
        return Err(FormatError::Parse("duration_ticks must be at least 1".into()));
    }
    let repr = ScenarioRepr { format_version: u64::from(FORMAT_VERSION), scenario: doc.clone() };
    let mut text = serde_json::to_string_pretty(&repr).map_err(|e| FormatError::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn save_scenario<W: Write>(doc: &ScenarioDocument, mut sink: W) -> Result<(), FormatError> {
    sink.write_all(scenario_to_string(doc)?.as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn scenario_from_str(text: &str) -> Result<ScenarioDocument, FormatError> {
    check_version(text)?;
    // flatten does not honour deny_unknown_fields on the inner struct, so
    // check the key set by hand.
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    if let Some(obj) = value.as_object() {
        const KEYS: [&str; 5] = ["format_version", "path_input", "faults_input", "duration_ticks", "drop_parity"];
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(FormatError::Parse(format!("unknown field `{k}`")));
        }
    }
    let repr: ScenarioRepr = serde_json::from_value(value).map_err(|e| FormatError::Parse(e.to_string()))?;
    if repr.scenario.duration_ticks == 0 {
        return Err(FormatError::Parse("duration_ticks must be at least 1".into()));
    }
    Ok(repr.scenario)
}

pub fn load_scenario<R: Read>(mut source: R) -> Result<ScenarioDocument, FormatError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    scenario_from_str(&text)
}
