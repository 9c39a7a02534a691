//! Tick-based packet simulation over a single path.
//!
//! One packet enters the path per tick. When the fault set contains a
//! component on the path, every other packet is dropped at the first such
//! component in path order; which half of the alternation is dropped is set
//! by [`DropParity`]. Parity is taken from the global tick index, so a fault
//! injected mid-run drops exactly the packets a run with that fault present
//! from the start would have dropped at the same ticks.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Circuit;
use crate::paths::{path_components, validate, FaultSet, PathSpec, ValidationReport};

/// 15 seconds at 10 ticks per second.
pub const DEFAULT_DURATION_TICKS: u64 = 150;

pub const DROP_LOG_EXTENSION: &str = "droplog";
pub const DROP_LOG_HEADER: &str = "tick\tpacket_id\tcomponent\tpath";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropParity {
    /// Even ticks drop, odd ticks deliver.
    #[default]
    DropFirst,
    /// Even ticks deliver, odd ticks drop.
    DeliverFirst,
}

impl DropParity {
    pub fn drops_at(self, tick: u64) -> bool {
        match self {
            DropParity::DropFirst => tick.is_multiple_of(2),
            DropParity::DeliverFirst => tick % 2 == 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            DropParity::DropFirst => DropParity::DeliverFirst,
            DropParity::DeliverFirst => DropParity::DropFirst,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub duration_ticks: u64,
    pub drop_parity: DropParity,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { duration_ticks: DEFAULT_DURATION_TICKS, drop_parity: DropParity::DropFirst }
    }
}

impl SimConfig {
    pub fn ticks(duration_ticks: u64) -> Self {
        SimConfig { duration_ticks, ..SimConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Delivered,
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathState {
    Green,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimEvent {
    pub tick: u64,
    pub packet_id: u64,
    pub outcome: Outcome,
    pub drop_component: Option<usize>,
}

impl SimEvent {
    pub fn state(&self) -> PathState {
        match self.outcome {
            Outcome::Delivered => PathState::Green,
            Outcome::Dropped => PathState::Red,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimConfig,
    pub path: String,
    pub events: Vec<SimEvent>,
    pub delivered: u64,
    pub dropped: u64,
    pub path_state_per_tick: Vec<PathState>,
    /// Set when a session was closed before `duration_ticks` elapsed.
    pub partial: bool,
}

impl SimulationReport {
    fn from_events(config: SimConfig, path: &str, events: Vec<SimEvent>) -> Self {
        let dropped = events.iter().filter(|e| e.outcome == Outcome::Dropped).count() as u64;
        let delivered = events.len() as u64 - dropped;
        SimulationReport {
            config,
            path: path.to_string(),
            path_state_per_tick: events.iter().map(SimEvent::state).collect(),
            partial: (events.len() as u64) < config.duration_ticks,
            events,
            delivered,
            dropped,
        }
    }

    /// Canonical JSON form, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("validation failed: {}", .0.errors().map(|i| i.message.as_str()).collect::<Vec<_>>().join(" "))]
    ValidationFailed(ValidationReport),
    #[error("duration must be at least one tick")]
    ZeroDuration,
    #[error("session is closed")]
    SessionClosed,
    #[error("unknown component {0}")]
    UnknownComponent(usize),
    #[error("cannot step {requested} tick(s): only {remaining} remain")]
    PastEnd { requested: u64, remaining: u64 },
}

/// The outcome of the packet sent at `tick`.
fn tick_event(tick: u64, route: &[usize], faults: &BTreeSet<usize>, parity: DropParity) -> SimEvent {
    let blocker = route.iter().copied().find(|c| faults.contains(c));
    match blocker {
        Some(c) if parity.drops_at(tick) => {
            SimEvent { tick, packet_id: tick, outcome: Outcome::Dropped, drop_component: Some(c) }
        }
        _ => SimEvent { tick, packet_id: tick, outcome: Outcome::Delivered, drop_component: None },
    }
}

fn prepare(circuit: &Circuit, path: &PathSpec, faults: &FaultSet, config: &SimConfig) -> Result<Vec<usize>, SimError> {
    if config.duration_ticks == 0 {
        return Err(SimError::ZeroDuration);
    }
    let report = validate(circuit, path, faults);
    if !report.valid {
        return Err(SimError::ValidationFailed(report));
    }
    Ok(path_components(circuit, path).expect("validated path"))
}

/// Runs a whole simulation with a fixed fault set.
pub fn run(circuit: &Circuit, path: &PathSpec, faults: &FaultSet, config: SimConfig) -> Result<SimulationReport, SimError> {
    let route = prepare(circuit, path, faults, &config)?;
    let events = (0..config.duration_ticks)
        .map(|t| tick_event(t, &route, &faults.components, config.drop_parity))
        .collect();
    Ok(SimulationReport::from_events(config, &path.raw, events))
}

/// An incremental simulation whose fault set can change between steps.
#[derive(Debug, Clone)]
pub struct SimSession {
    circuit: Circuit,
    path: PathSpec,
    route: Vec<usize>,
    faults: BTreeSet<usize>,
    config: SimConfig,
    events: Vec<SimEvent>,
    closed: bool,
}

pub fn open_session(circuit: &Circuit, path: &PathSpec, faults: &FaultSet, config: SimConfig) -> Result<SimSession, SimError> {
    let route = prepare(circuit, path, faults, &config)?;
    Ok(SimSession {
        circuit: circuit.clone(),
        path: path.clone(),
        route,
        faults: faults.components.clone(),
        config,
        events: Vec::new(),
        closed: false,
    })
}

impl SimSession {
    pub fn cursor(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn remaining(&self) -> u64 {
        self.config.duration_ticks - self.cursor()
    }

    pub fn is_finished(&self) -> bool {
        self.remaining() == 0
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn config(&self) -> SimConfig {
        self.config
    }

    pub fn path(&self) -> &PathSpec {
        &self.path
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn faults(&self) -> &BTreeSet<usize> {
        &self.faults
    }

    pub fn events(&self) -> &[SimEvent] {
        &self.events
    }

    fn ensure_open(&self) -> Result<(), SimError> {
        if self.closed {
            Err(SimError::SessionClosed)
        } else {
            Ok(())
        }
    }

    /// Advances `n` ticks under the current fault set and returns the new
    /// events. Stepping zero ticks is allowed and returns nothing.
    pub fn step(&mut self, n: u64) -> Result<&[SimEvent], SimError> {
        self.ensure_open()?;
        if n > self.remaining() {
            return Err(SimError::PastEnd { requested: n, remaining: self.remaining() });
        }
        let from = self.events.len();
        for t in self.cursor()..self.cursor() + n {
            self.events.push(tick_event(t, &self.route, &self.faults, self.config.drop_parity));
        }
        Ok(&self.events[from..])
    }

    /// Adds a faulty component, effective from the next tick.
    pub fn inject_fault(&mut self, comp: usize) -> Result<(), SimError> {
        self.ensure_open()?;
        if comp >= self.circuit.no_cmp() {
            return Err(SimError::UnknownComponent(comp));
        }
        self.faults.insert(comp);
        Ok(())
    }

    /// Clears a faulty component, effective from the next tick.
    pub fn remove_fault(&mut self, comp: usize) -> Result<(), SimError> {
        self.ensure_open()?;
        if comp >= self.circuit.no_cmp() {
            return Err(SimError::UnknownComponent(comp));
        }
        self.faults.remove(&comp);
        Ok(())
    }

    /// Ends the session and returns its report, marked partial when fewer
    /// than `duration_ticks` ticks ran.
    pub fn close(&mut self) -> Result<SimulationReport, SimError> {
        self.ensure_open()?;
        self.closed = true;
        Ok(SimulationReport::from_events(self.config, &self.path.raw, self.events.clone()))
    }
}

/// Writes one tab-separated record per dropped packet, in tick order, after
/// a header line.
pub fn export_drop_log<W: Write>(report: &SimulationReport, mut sink: W) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(DROP_LOG_HEADER);
    out.push('\n');
    for e in report.events.iter().filter(|e| e.outcome == Outcome::Dropped) {
        let comp = e.drop_component.expect("dropped events name a component");
        out.push_str(&format!("{}\t{}\t{}\t{}\n", e.tick, e.packet_id, comp, report.path));
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()
}
