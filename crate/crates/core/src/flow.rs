//! Maximum sets of node-disjoint paths.
//!
//! Each component other than the two endpoints is split into an entry and
//! an exit vertex joined by a unit arc, each directed wire becomes a unit arc
//! from the exit of its upstream component to the entry of its downstream
//! one, and a unit-capacity max flow is computed by breadth-first augmenting
//! paths. Flow value equals the number of node-disjoint paths.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::model::{check_circuit, Circuit};
use crate::paths::PathError;

/// Wires oriented along stage order: from the component further left to the
/// one further right. Wires between components in the same column are
/// usable in both directions. Yields `(from, to, wire id)` in wire-id order.
pub fn directed_arcs(circuit: &Circuit) -> Vec<(usize, usize, usize)> {
    let mut arcs = Vec::with_capacity(circuit.no_line());
    for w in circuit.wires() {
        let (a, b) = (w.a.comp, w.b.comp);
        if a == b {
            continue;
        }
        let (xa, xb) = (circuit.components()[a].centre.x, circuit.components()[b].centre.x);
        if xa <= xb {
            arcs.push((a, b, w.id));
        }
        if xb <= xa {
            arcs.push((b, a, w.id));
        }
    }
    arcs
}

/// Node-disjoint paths between two components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSetResult {
    pub source: usize,
    pub dest: usize,
    /// Component sequences, each starting at `source` and ending at `dest`.
    pub paths: Vec<Vec<usize>>,
    /// Wire ids of each path, parallel to `paths`.
    pub wires: Vec<Vec<usize>>,
    pub disjointness: usize,
}

struct Arc {
    to: usize,
    cap: u32,
    wire: Option<usize>,
}

struct Network {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(vertices: usize) -> Self {
        Network { arcs: Vec::new(), adj: vec![Vec::new(); vertices] }
    }

    fn add(&mut self, from: usize, to: usize, wire: Option<usize>) {
        self.adj[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap: 1, wire });
        self.adj[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0, wire: None });
    }

    /// One shortest augmenting path, exploring arcs in insertion order.
    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut via = vec![usize::MAX; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for &e in &self.adj[v] {
                let to = self.arcs[e].to;
                if self.arcs[e].cap > 0 && !seen[to] {
                    seen[to] = true;
                    via[to] = e;
                    queue.push_back(to);
                }
            }
        }
        if !seen[t] {
            return false;
        }
        let mut v = t;
        while v != s {
            let e = via[v];
            self.arcs[e].cap -= 1;
            self.arcs[e ^ 1].cap += 1;
            v = self.arcs[e ^ 1].to;
        }
        true
    }
}

const fn entry(v: usize) -> usize {
    2 * v
}

const fn exit(v: usize) -> usize {
    2 * v + 1
}

/// Up to `k_limit` node-disjoint paths from `source` to `dest`, following
/// wires in stage order (see [`directed_arcs`]). The result is deterministic:
/// augmentation and path extraction both prefer lower wire ids.
pub fn max_disjoint_paths(
    circuit: &Circuit,
    source: usize,
    dest: usize,
    k_limit: usize,
) -> Result<PathSetResult, PathError> {
    for c in [source, dest] {
        if c >= circuit.no_cmp() {
            return Err(PathError::UnknownComponent(c));
        }
    }
    if source == dest {
        return Err(PathError::SameEndpoint);
    }
    if let Some(v) = check_circuit(circuit).first() {
        return Err(PathError::InvalidCircuit(v.to_string()));
    }

    let mut net = Network::new(2 * circuit.no_cmp());
    for v in 0..circuit.no_cmp() {
        if v != source && v != dest {
            net.add(entry(v), exit(v), None);
        }
    }
    for (from, to, wire) in directed_arcs(circuit) {
        net.add(exit(from), entry(to), Some(wire));
    }

    let (s, t) = (exit(source), entry(dest));
    let mut flow = 0;
    while flow < k_limit && net.augment(s, t) {
        flow += 1;
    }
    if flow == 0 {
        return Err(PathError::NoPath { src: source, dst: dest });
    }

    // Decompose: forward arcs carrying flow have a reverse twin with cap 1.
    let carried = |net: &Network, e: usize| e.is_multiple_of(2) && net.arcs[e ^ 1].cap > 0;
    let mut paths = Vec::with_capacity(flow);
    let mut wires = Vec::with_capacity(flow);
    for _ in 0..flow {
        let mut comps = vec![source];
        let mut used = Vec::new();
        let mut v = s;
        while v != t {
            let e = *net.adj[v]
                .iter()
                .filter(|&&e| carried(&net, e))
                .min_by_key(|&&e| (net.arcs[e].wire, e))
                .expect("flow conservation");
            net.arcs[e ^ 1].cap -= 1;
            v = net.arcs[e].to;
            if let Some(w) = net.arcs[e].wire {
                used.push(w);
                comps.push(v / 2);
            }
        }
        paths.push(comps);
        wires.push(used);
    }
    Ok(PathSetResult { source, dest, paths, wires, disjointness: flow })
}
