//! Test-only oracles. Nothing here calls the flow solver or the simulator;
//! they are checked against these brute-force references.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use minforge_core::model::{Circuit, ComponentKind, Endpoint, Point, Rgb, WireStyle};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

/// Directed adjacency: wire runs left-to-right by centre x, both ways when
/// the two centres share a column.
fn out_edges(circuit: &Circuit) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new(); circuit.no_cmp()];
    for w in circuit.wires() {
        if w.a.comp == w.b.comp {
            continue;
        }
        let xa = circuit.components()[w.a.comp].centre.x;
        let xb = circuit.components()[w.b.comp].centre.x;
        if xa <= xb {
            out[w.a.comp].push((w.b.comp, w.id));
        }
        if xb <= xa {
            out[w.b.comp].push((w.a.comp, w.id));
        }
    }
    out
}

/// A simple path as (components, wires).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPath {
    pub comps: Vec<usize>,
    pub wires: Vec<usize>,
}

/// Every simple directed path from `s` to `d` by depth-first enumeration.
pub fn enumerate_paths(circuit: &Circuit, s: usize, d: usize) -> Vec<RawPath> {
    fn go(
        adj: &[Vec<(usize, usize)>],
        at: usize,
        d: usize,
        comps: &mut Vec<usize>,
        wires: &mut Vec<usize>,
        on: &mut Vec<bool>,
        out: &mut Vec<RawPath>,
    ) {
        if at == d {
            out.push(RawPath { comps: comps.clone(), wires: wires.clone() });
            return;
        }
        for &(next, w) in &adj[at] {
            if on[next] {
                continue;
            }
            on[next] = true;
            comps.push(next);
            wires.push(w);
            go(adj, next, d, comps, wires, on, out);
            comps.pop();
            wires.pop();
            on[next] = false;
        }
    }
    let adj = out_edges(circuit);
    let mut on = vec![false; circuit.no_cmp()];
    on[s] = true;
    let mut out = Vec::new();
    go(&adj, s, d, &mut vec![s], &mut Vec::new(), &mut on, &mut out);
    out
}

fn compatible(a: &RawPath, b: &RawPath) -> bool {
    let inner_a: HashSet<usize> = a.comps[1..a.comps.len() - 1].iter().copied().collect();
    let wires_a: HashSet<usize> = a.wires.iter().copied().collect();
    b.comps[1..b.comps.len() - 1].iter().all(|c| !inner_a.contains(c)) && b.wires.iter().all(|w| !wires_a.contains(w))
}

/// Largest number of pairwise node-disjoint (and wire-disjoint) paths,
/// by exhaustive search over subsets of all simple paths.
pub fn brute_max_disjoint(circuit: &Circuit, s: usize, d: usize) -> usize {
    let paths = enumerate_paths(circuit, s, d);
    let n = paths.len();
    let compat: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| compatible(&paths[i], &paths[j])).collect()).collect();
    fn search(compat: &[Vec<bool>], from: usize, chosen: &mut Vec<usize>, best: &mut usize) {
        *best = (*best).max(chosen.len());
        for i in from..compat.len() {
            if chosen.iter().all(|&c| compat[c][i]) {
                chosen.push(i);
                search(compat, i + 1, chosen, best);
                chosen.pop();
            }
        }
    }
    let mut best = 0;
    search(&compat, 0, &mut Vec::new(), &mut best);
    best
}

/// A random circuit with at most `max_components` components laid out in
/// columns: one source in column 0, one destination in the last column and
/// switches in between. Wires join random ports between columns, and with
/// `same_column` occasionally within one (making the graph cyclic).
/// Returns (circuit, source id, dest id).
pub fn random_layered_circuit(rng: &mut StdRng, max_components: usize, same_column: bool) -> (Circuit, usize, usize) {
    let n = rng.gen_range(3..=max_components);
    let columns = rng.gen_range(2..=4);
    let mut b = Circuit::builder("random");
    let src = b.component(ComponentKind::SourceTerminal, Point::new(0, 0));
    let mut comps = vec![(src, 0i64)];
    let kinds = [
        ComponentKind::Switch2x2,
        ComponentKind::Switch2x2,
        ComponentKind::Switch3x3,
        ComponentKind::Switch1x2,
        ComponentKind::Switch2x1,
    ];
    for i in 0..n - 2 {
        let col = rng.gen_range(1..=columns) as i64;
        let kind = *kinds.choose(rng).unwrap();
        let id = b.component(kind, Point::new(col * 160, i as i64 * 100));
        comps.push((id, col));
    }
    let last = columns as i64 + 1;
    let dst = b.component(ComponentKind::DestTerminal, Point::new(last * 160, 0));
    comps.push((dst, last));
    let circuit_so_far = b.clone().build();

    let target_wires = rng.gen_range(n..=2 * n + 2);
    let mut used: HashSet<(Endpoint, Endpoint)> = HashSet::new();
    let mut attempts = 0;
    let mut count = 0;
    while count < target_wires && attempts < 50 * target_wires {
        attempts += 1;
        let &(a, ca) = comps.choose(rng).unwrap();
        let &(z, cz) = comps.choose(rng).unwrap();
        if a == z || (ca == cz && !(same_column && rng.gen_bool(0.15))) {
            continue;
        }
        let pa = rng.gen_range(0..circuit_so_far.components()[a].kind.port_count());
        let pz = rng.gen_range(0..circuit_so_far.components()[z].kind.port_count());
        let (ea, ez) = (Endpoint::new(a, pa), Endpoint::new(z, pz));
        let key = if ea <= ez { (ea, ez) } else { (ez, ea) };
        if !used.insert(key) {
            continue;
        }
        b.wire(ea, ez);
        count += 1;
    }
    (b.build(), src, dst)
}

/// A random structurally valid circuit exercising every field of the
/// document format.
pub fn random_document_circuit(rng: &mut StdRng) -> Circuit {
    let n = rng.gen_range(0..=14);
    let mut b = Circuit::builder(format!("doc-{}", rng.gen::<u32>()));
    for _ in 0..n {
        let kind = *ComponentKind::ALL.choose(rng).unwrap();
        b.component_sized(
            kind,
            Point::new(rng.gen_range(-500..2000), rng.gen_range(-500..2000)),
            rng.gen_range(8..200),
            rng.gen_range(8..200),
        );
    }
    let circuit = b.clone().build();
    if n > 0 {
        let mut used = HashSet::new();
        for _ in 0..rng.gen_range(0..3 * n) {
            let a = rng.gen_range(0..n);
            let z = rng.gen_range(0..n);
            let ea = Endpoint::new(a, rng.gen_range(0..circuit.components()[a].kind.port_count()));
            let ez = Endpoint::new(z, rng.gen_range(0..circuit.components()[z].kind.port_count()));
            let key = if ea <= ez { (ea, ez) } else { (ez, ea) };
            if ea == ez || !used.insert(key) {
                continue;
            }
            let style = WireStyle {
                color: Rgb(rng.gen(), rng.gen(), rng.gen()),
                thickness: rng.gen_range(1..6),
                bent: rng.gen_bool(0.3),
            };
            b.wire_styled(ea, ez, style);
        }
    }
    b.build()
}

/// Independent statement of the alternation rule: with a fault on the
/// route, the packet at `tick` is lost iff the tick has the dropping parity.
pub fn expected_drop(tick: u64, drop_first: bool, route: &[usize], faults: &BTreeSet<usize>) -> Option<usize> {
    let first = route.iter().copied().find(|c| faults.contains(c))?;
    let even = tick.is_multiple_of(2);
    (even == drop_first).then_some(first)
}
