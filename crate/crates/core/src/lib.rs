//! Multistage interconnection network workbench.
//!
//! Build switch/wire circuits ([`model`]), load and save them ([`io`]),
//! generate standard networks ([`generators`]), check user routes and search
//! for node-disjoint paths ([`paths`], [`flow`]), simulate packet drops at
//! faulty components ([`sim`]) and draw the result as SVG ([`render`]).

pub mod flow;
pub mod generators;
pub mod io;
pub mod model;
pub mod paths;
pub mod render;
pub mod sim;

pub use flow::{max_disjoint_paths, PathSetResult};
pub use generators::{generate_extra_stage, generate_omega, generate_replicated, GenError};
pub use io::{CircuitDocument, FormatError, LoadOptions, ScenarioDocument};
pub use model::{check_circuit, tiny3, Circuit, Component, ComponentKind, Endpoint, Point, Rgb, Violation, Wire};
pub use paths::{are_disjoint, parse_indices, path_components, validate, FaultSet, PathError, PathSpec, ValidationReport};
pub use render::{emit_svg, plan_circuit, plan_simulation_frame, RenderOptions, RenderPlan};
pub use sim::{open_session, run, DropParity, PathState, SimConfig, SimError, SimEvent, SimSession, SimulationReport};
