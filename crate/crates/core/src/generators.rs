//! Standard multistage network constructions.
//!
//! All generators place components on a fixed stage grid so that their
//! output, and therefore the saved document, is fully deterministic.

use std::collections::HashSet;

use thiserror::Error;

use crate::model::{check_circuit, Circuit, ComponentKind, Endpoint, Point};

/// Horizontal distance between stage columns.
pub const COLUMN_PITCH: i64 = 160;
/// Vertical distance between terminal rows.
pub const ROW_PITCH: i64 = 100;
/// Centre of the first source terminal.
pub const GRID_ORIGIN: Point = Point::new(100, 100);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("network size {0} must be a power of two, at least 4")]
    InvalidSize(usize),
    #[error("invalid base circuit: {0}")]
    InvalidCircuit(String),
}

/// Left rotation of a `bits`-wide index: the perfect shuffle.
pub fn perfect_shuffle(position: usize, bits: u32) -> usize {
    let mask = (1usize << bits) - 1;
    ((position << 1) | (position >> (bits - 1))) & mask
}

fn log2_size(n: usize) -> Result<u32, GenError> {
    if n < 4 || !n.is_power_of_two() {
        return Err(GenError::InvalidSize(n));
    }
    Ok(n.trailing_zeros())
}

/// `stages` columns of `n/2` 2x2 switches, with a perfect shuffle in front of
/// every column and straight wiring from the last column to the destinations.
fn shuffle_exchange(n: usize, stages: u32, name: String) -> Circuit {
    let bits = n.trailing_zeros();
    let half = n / 2;
    let mut b = Circuit::builder(name);
    let row = |i: usize| GRID_ORIGIN.y + i as i64 * ROW_PITCH;
    let column = |c: u32| GRID_ORIGIN.x + i64::from(c) * COLUMN_PITCH;

    let sources: Vec<usize> = (0..n)
        .map(|i| b.component(ComponentKind::SourceTerminal, Point::new(column(0), row(i))))
        .collect();
    let switches: Vec<Vec<usize>> = (0..stages)
        .map(|s| {
            (0..half)
                .map(|j| {
                    let centre = Point::new(column(s + 1), row(2 * j) + ROW_PITCH / 2);
                    b.component(ComponentKind::Switch2x2, centre)
                })
                .collect()
        })
        .collect();
    let dests: Vec<usize> = (0..n)
        .map(|i| b.component(ComponentKind::DestTerminal, Point::new(column(stages + 1), row(i))))
        .collect();

    let input = |stage: usize, position: usize| Endpoint::new(switches[stage][position / 2], position % 2);
    let output = |stage: usize, position: usize| Endpoint::new(switches[stage][position / 2], 2 + position % 2);

    for (i, &src) in sources.iter().enumerate() {
        b.wire(Endpoint::new(src, 0), input(0, perfect_shuffle(i, bits)));
    }
    for s in 1..stages as usize {
        for p in 0..n {
            b.wire(output(s - 1, p), input(s, perfect_shuffle(p, bits)));
        }
    }
    for (p, &dst) in dests.iter().enumerate() {
        b.wire(output(stages as usize - 1, p), Endpoint::new(dst, 0));
    }
    b.build()
}

/// Omega network on `n_terminals` terminals: `log2 n` stages of `n/2`
/// switches. Ids are sources, then switches stage by stage, then
/// destinations.
pub fn generate_omega(n_terminals: usize) -> Result<Circuit, GenError> {
    let bits = log2_size(n_terminals)?;
    Ok(shuffle_exchange(n_terminals, bits, format!("omega-{n_terminals}")))
}

/// Omega network with one extra leading shuffle stage, giving every
/// terminal pair two routes.
pub fn generate_extra_stage(n_terminals: usize) -> Result<Circuit, GenError> {
    let bits = log2_size(n_terminals)?;
    Ok(shuffle_exchange(n_terminals, bits + 1, format!("extra-stage-{n_terminals}")))
}

/// `copies` parallel planes of `base` sharing one set of source and
/// destination terminals.
///
/// Every wire that touched a base terminal is re-attached, in each plane, to
/// the shared terminal of the same index, so each plane contributes its own
/// routes and planes meet only at the terminals.
pub fn generate_replicated(base: &Circuit, copies: usize) -> Result<Circuit, GenError> {
    if copies < 2 {
        return Err(GenError::InvalidCircuit(format!("need at least 2 copies, got {copies}")));
    }
    let violations = check_circuit(base);
    if let Some(v) = violations.first() {
        return Err(GenError::InvalidCircuit(v.to_string()));
    }
    let sources = base.ids_of_kind(ComponentKind::SourceTerminal);
    let dests = base.ids_of_kind(ComponentKind::DestTerminal);
    if sources.is_empty() || dests.is_empty() {
        return Err(GenError::InvalidCircuit("base has no source or destination terminals".into()));
    }
    let inner: Vec<usize> = base.components().iter().filter(|c| !c.kind.is_terminal()).map(|c| c.id).collect();

    let (top, bottom) = base
        .components()
        .iter()
        .map(|c| (c.origin().y, c.origin().y + c.height))
        .fold((i64::MAX, i64::MIN), |(t, b), (ct, cb)| (t.min(ct), b.max(cb)));
    let plane_pitch = (bottom - top) + ROW_PITCH;
    let terminal_shift = plane_pitch * (copies as i64 - 1) / 2;

    let mut b = Circuit::builder(format!("{}-x{copies}", base.name()));
    // base id -> new id, per plane (terminals map identically in all planes)
    let mut mapping = vec![vec![usize::MAX; base.no_cmp()]; copies];
    let place_terminals = |b: &mut crate::model::CircuitBuilder, ids: &[usize], mapping: &mut Vec<Vec<usize>>| {
        for &id in ids {
            let c = &base.components()[id];
            let new = b.component_sized(
                c.kind,
                Point::new(c.centre.x, c.centre.y + terminal_shift),
                c.width,
                c.height,
            );
            for plane in mapping.iter_mut() {
                plane[id] = new;
            }
        }
    };
    place_terminals(&mut b, &sources, &mut mapping);
    for (plane, ids) in mapping.iter_mut().enumerate() {
        let dy = plane as i64 * plane_pitch;
        for &id in &inner {
            let c = &base.components()[id];
            ids[id] = b.component_sized(c.kind, Point::new(c.centre.x, c.centre.y + dy), c.width, c.height);
        }
    }
    place_terminals(&mut b, &dests, &mut mapping);

    let mut seen = HashSet::new();
    for ids in &mapping {
        for w in base.wires() {
            let a = Endpoint::new(ids[w.a.comp], w.a.port);
            let z = Endpoint::new(ids[w.b.comp], w.b.port);
            // a direct terminal-to-terminal wire maps to the same pair in every plane
            if seen.insert((a, z)) {
                b.wire_styled(a, z, crate::model::WireStyle { color: w.color, thickness: w.thickness, bent: w.bent });
            }
        }
    }
    Ok(b.build())
}
