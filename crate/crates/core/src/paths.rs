//! Path and fault input: parsing, validation against a circuit, contiguity
//! and node-disjointness checks.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Circuit;

pub const INVALID_PATH_MESSAGE: &str = "Invalid Path. Please check the input.";
pub const INVALID_COMPONENT_MESSAGE: &str = "Invalid Component number. Please check the input.";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{INVALID_PATH_MESSAGE}")]
    InvalidPath { wires: Vec<usize> },
    #[error("path {index} is not a contiguous chain of wires")]
    NonContiguous { index: usize },
    #[error("paths do not share the same source and destination")]
    MismatchedEndpoints,
    #[error("unknown component {0}")]
    UnknownComponent(usize),
    #[error("source and destination are the same component")]
    SameEndpoint,
    #[error("no path from {src} to {dst}")]
    NoPath { src: usize, dst: usize },
    #[error("circuit is structurally invalid: {0}")]
    InvalidCircuit(String),
}

/// Parses a list of indices.
///
/// Input containing a comma is read as comma-separated decimal integers;
/// one trailing comma is allowed so that a single index above 9 can be
/// written (`"12,"`). Anything else is read one character per index, so only 0-9 can be
/// expressed. Surrounding whitespace is ignored; empty input gives an empty
/// list.
pub fn parse_indices(input: &str) -> Result<Vec<usize>, PathError> {
    let input = input.trim();
    if input.is_empty() {
        return Ok(Vec::new());
    }
    if input.contains(',') {
        let body = input.strip_suffix(',').unwrap_or(input);
        body
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(PathError::Parse(format!("malformed index {tok:?} in {input:?}")));
                }
                tok.parse::<usize>().map_err(|e| PathError::Parse(format!("index {tok:?}: {e}")))
            })
            .collect()
    } else {
        input
            .chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| PathError::Parse(format!("non-digit {ch:?} in {input:?}")))
            })
            .collect()
    }
}

/// Formats indices in the shortest form [`parse_indices`] reads back.
pub fn format_indices(indices: &[usize]) -> String {
    if indices.iter().all(|&i| i <= 9) {
        indices.iter().map(|i| i.to_string()).collect()
    } else if indices.len() == 1 {
        format!("{},", indices[0])
    } else {
        indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// A user-entered route: the raw text and the wire ids it names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSpec {
    pub raw: String,
    pub wires: Vec<usize>,
}

impl PathSpec {
    pub fn parse(raw: &str) -> Result<Self, PathError> {
        let wires = parse_indices(raw)?;
        if wires.is_empty() {
            return Err(PathError::Parse("path is empty".into()));
        }
        Ok(PathSpec { raw: raw.to_string(), wires })
    }

    pub fn from_wires(wires: Vec<usize>) -> Self {
        PathSpec { raw: format_indices(&wires), wires }
    }
}

/// Components declared faulty. Duplicates in the input collapse.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FaultSet {
    pub raw: String,
    pub components: BTreeSet<usize>,
}

impl FaultSet {
    pub fn parse(raw: &str) -> Result<Self, PathError> {
        Ok(FaultSet { raw: raw.to_string(), components: parse_indices(raw)?.into_iter().collect() })
    }

    pub fn from_components(components: impl IntoIterator<Item = usize>) -> Self {
        let components: BTreeSet<usize> = components.into_iter().collect();
        let list: Vec<usize> = components.iter().copied().collect();
        FaultSet { raw: format_indices(&list), components }
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    InvalidPath,
    InvalidComponent,
    NonContiguous,
    OffPathFault,
}

/// One finding of [`validate`]. `ids` holds the offending wire ids
/// (`invalid_path`, `non_contiguous`) or component ids (the others).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub severity: Severity,
    pub message: String,
    pub ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn has(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return writeln!(f, "valid");
        }
        for i in &self.issues {
            let sev = match i.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{sev}: {}", i.message)?;
        }
        Ok(())
    }
}

/// Range and consistency checks of a path and fault set.
///
/// Errors: a wire id outside `0..no_line` or a fault id outside `0..no_cmp`.
/// Warnings: consecutive wires sharing no component, and faults that touch
/// no path wire. Warnings only consider in-range ids.
pub fn validate(circuit: &Circuit, path: &PathSpec, faults: &FaultSet) -> ValidationReport {
    let mut issues = Vec::new();
    let bad_wires: Vec<usize> = path.wires.iter().copied().filter(|&w| w >= circuit.no_line()).collect();
    if !bad_wires.is_empty() {
        issues.push(Issue {
            kind: IssueKind::InvalidPath,
            severity: Severity::Error,
            message: INVALID_PATH_MESSAGE.to_string(),
            ids: bad_wires,
        });
    }
    let bad_comps: Vec<usize> = faults.components.iter().copied().filter(|&c| c >= circuit.no_cmp()).collect();
    if !bad_comps.is_empty() {
        issues.push(Issue {
            kind: IssueKind::InvalidComponent,
            severity: Severity::Error,
            message: INVALID_COMPONENT_MESSAGE.to_string(),
            ids: bad_comps,
        });
    }

    let wires: Vec<_> = path.wires.iter().filter_map(|&w| circuit.wire(w)).collect();
    let breaks: Vec<usize> = wires
        .windows(2)
        .filter(|pair| !pair[1].touches(pair[0].a.comp) && !pair[1].touches(pair[0].b.comp))
        .map(|pair| pair[1].id)
        .collect();
    if !breaks.is_empty() {
        issues.push(Issue {
            kind: IssueKind::NonContiguous,
            severity: Severity::Warning,
            message: format!("path is not contiguous before wire(s) {}", join(&breaks)),
            ids: breaks,
        });
    }
    let touched: HashSet<usize> = wires.iter().flat_map(|w| [w.a.comp, w.b.comp]).collect();
    let off_path: Vec<usize> = faults
        .components
        .iter()
        .copied()
        .filter(|&c| c < circuit.no_cmp() && !touched.contains(&c))
        .collect();
    if !off_path.is_empty() {
        issues.push(Issue {
            kind: IssueKind::OffPathFault,
            severity: Severity::Warning,
            message: format!("faulty component(s) {} are not on the path and cannot drop packets", join(&off_path)),
            ids: off_path,
        });
    }
    let valid = !issues.iter().any(|i| i.severity == Severity::Error);
    ValidationReport { valid, issues }
}

fn join(ids: &[usize]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

/// Components touched by the path's wires, in first-touch order.
pub fn path_components(circuit: &Circuit, path: &PathSpec) -> Result<Vec<usize>, PathError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for &w in &path.wires {
        let wire = circuit.wire(w).ok_or_else(|| invalid_path(circuit, path))?;
        for c in [wire.a.comp, wire.b.comp] {
            if seen.insert(c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

fn invalid_path(circuit: &Circuit, path: &PathSpec) -> PathError {
    PathError::InvalidPath { wires: path.wires.iter().copied().filter(|&w| w >= circuit.no_line()).collect() }
}

/// The component sequence visited by a contiguous path, oriented so that
/// the first wire is entered from the end it does not share with the second.
/// `None` if some pair of consecutive wires shares no component.
pub fn walk(circuit: &Circuit, path: &PathSpec) -> Result<Option<Vec<usize>>, PathError> {
    let wires = path
        .wires
        .iter()
        .map(|&w| circuit.wire(w))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| invalid_path(circuit, path))?;
    let first = wires[0];
    let start = match wires.get(1) {
        Some(next) if !next.touches(first.a.comp) => first.a.comp,
        Some(next) if !next.touches(first.b.comp) => first.b.comp,
        // both ends shared (parallel wires or a self loop): keep stored order
        _ => first.a.comp,
    };
    let mut seq = vec![start];
    let mut at = start;
    for w in wires {
        match w.other_end(at) {
            Some(next) => {
                seq.push(next);
                at = next;
            }
            None => return Ok(None),
        }
    }
    Ok(Some(seq))
}

/// Result of [`are_disjoint`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disjointness {
    pub disjoint: bool,
    /// First component found on two paths, scanning the earlier path of the
    /// earliest overlapping pair in order.
    pub shared_component: Option<usize>,
    /// Set when two paths share a wire but no intermediate component.
    pub shared_wire: Option<usize>,
}

/// True iff no two paths share a component other than the common source and
/// destination (nor a wire).
pub fn are_disjoint(circuit: &Circuit, paths: &[PathSpec]) -> Result<Disjointness, PathError> {
    let mut walks = Vec::with_capacity(paths.len());
    for (index, p) in paths.iter().enumerate() {
        if p.wires.is_empty() {
            return Err(PathError::Parse("path is empty".into()));
        }
        match walk(circuit, p)? {
            Some(seq) => walks.push(seq),
            None => return Err(PathError::NonContiguous { index }),
        }
    }
    let Some(first) = walks.first() else {
        return Ok(Disjointness { disjoint: true, shared_component: None, shared_wire: None });
    };
    let (src, dst) = (first[0], *first.last().unwrap());
    for w in walks.iter_mut() {
        // a path given from the destination end is the same route
        if w[0] == dst && *w.last().unwrap() == src {
            w.reverse();
        }
        if w[0] != src || *w.last().unwrap() != dst {
            return Err(PathError::MismatchedEndpoints);
        }
    }
    let interiors: Vec<HashSet<usize>> = walks
        .iter()
        .map(|w| w[1..w.len() - 1].iter().copied().filter(|&c| c != src && c != dst).collect())
        .collect();
    for i in 0..walks.len() {
        for j in i + 1..walks.len() {
            let interior_i = &walks[i][1..walks[i].len() - 1];
            if let Some(&c) = interior_i.iter().find(|c| interiors[j].contains(c)) {
                return Ok(Disjointness { disjoint: false, shared_component: Some(c), shared_wire: None });
            }
            let wires_j: HashSet<usize> = paths[j].wires.iter().copied().collect();
            if let Some(&w) = paths[i].wires.iter().find(|w| wires_j.contains(w)) {
                return Ok(Disjointness { disjoint: false, shared_component: None, shared_wire: Some(w) });
            }
        }
    }
    Ok(Disjointness { disjoint: true, shared_component: None, shared_wire: None })
}
