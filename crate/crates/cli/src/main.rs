//! `min`: generate, check, simulate and draw multistage networks.
//!
//! Exit codes: 0 ok, 1 I/O or parse error, 2 structurally invalid circuit,
//! 3 invalid path or fault input, 4 no path between the given terminals.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use minforge_core::io::{circuit_to_string, load_circuit_with, load_scenario, LoadOptions};
use minforge_core::render::{plan_circuit_with, plan_simulation_frame, svg_string, RenderError};
use minforge_core::sim::{export_drop_log, DEFAULT_DURATION_TICKS};
use minforge_core::{
    generate_extra_stage, generate_omega, generate_replicated, max_disjoint_paths, run, validate, Circuit,
    CircuitDocument, DropParity, FaultSet, FormatError, PathError, PathSpec, PathState, RenderOptions, SimConfig,
    SimError, ValidationReport,
};

#[derive(Parser)]
#[command(name = "min", version, about = "Multistage interconnection network workbench")]
struct Cli {
    /// Reject circuits beyond the legacy 100 component / 100 wire capacity.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Omega,
    Replicated,
    ExtraStage,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Parity {
    DropFirst,
    DeliverFirst,
}

impl From<Parity> for DropParity {
    fn from(p: Parity) -> Self {
        match p {
            Parity::DropFirst => DropParity::DropFirst,
            Parity::DeliverFirst => DropParity::DeliverFirst,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum State {
    Green,
    Red,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated network as a circuit document.
    Gen {
        family: Family,
        #[arg(long)]
        size: usize,
        /// Planes of a replicated network.
        #[arg(long, default_value_t = 2)]
        copies: usize,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Check a circuit for structural problems.
    Check { file: PathBuf },
    /// Check a path and fault set against a circuit.
    Validate {
        file: PathBuf,
        #[arg(long)]
        path: String,
        #[arg(long, default_value = "")]
        faults: String,
    },
    /// Find node-disjoint paths between two components.
    Paths {
        file: PathBuf,
        #[arg(long)]
        src: usize,
        #[arg(long)]
        dst: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a fault simulation over a path.
    Simulate {
        file: PathBuf,
        #[arg(long, required_unless_present = "scenario")]
        path: Option<String>,
        #[arg(long)]
        faults: Option<String>,
        #[arg(long)]
        ticks: Option<u64>,
        #[arg(long, value_enum)]
        parity: Option<Parity>,
        /// Scenario file supplying path, faults, ticks and parity; flags override it.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write one TSV record per dropped packet.
        #[arg(long)]
        droplog: Option<PathBuf>,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Draw a circuit, optionally with a highlighted path, as SVG.
    Render {
        file: PathBuf,
        #[arg(long)]
        path: Option<String>,
        #[arg(long, default_value = "", requires = "path")]
        faults: String,
        #[arg(long, value_enum, default_value = "green", requires = "path")]
        state: State,
        /// Pick both bend offsets from the first endpoint, as the original drawing code did.
        #[arg(long)]
        bug_compat: bool,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Start the HTTP service on the loopback interface.
    Serve {
        /// Defaults to MINFORGE_PORT, then 7420.
        #[arg(long)]
        port: Option<u16>,
        /// Initial circuit; empty if omitted.
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
}

/// The error messages of an invalid report, one per line, without prefixes.
fn error_lines(report: &ValidationReport) -> String {
    report.errors().map(|i| i.message.as_str()).collect::<Vec<_>>().join("\n")
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure { code: 1, message: format!("{}: {e}", path.display()) }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::InvalidCircuit(v) => {
                let lines: Vec<String> = v.iter().map(ToString::to_string).collect();
                Failure { code: 2, message: format!("invalid circuit\n{}", lines.join("\n")) }
            }
            FormatError::CapacityExceeded { .. } => Failure { code: 2, message: e.to_string() },
            _ => Failure { code: 1, message: e.to_string() },
        }
    }
}

impl From<PathError> for Failure {
    fn from(e: PathError) -> Self {
        let code = match e {
            PathError::Parse(_) => 1,
            PathError::InvalidCircuit(_) => 2,
            PathError::NoPath { .. } => 4,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let message = match &e {
            SimError::ValidationFailed(report) => error_lines(report),
            other => other.to_string(),
        };
        Failure { code: 3, message }
    }
}

impl From<RenderError> for Failure {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::ValidationFailed(report) => Failure { code: 3, message: error_lines(&report) },
            RenderError::InvalidCircuit(_) => Failure { code: 2, message: e.to_string() },
            RenderError::Sink(_) => Failure { code: 1, message: e.to_string() },
        }
    }
}

fn load(path: &Path, strict: bool) -> Result<Circuit, Failure> {
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    let doc = load_circuit_with(file, LoadOptions { strict }).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })?;
    Ok(doc.circuit)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let strict = cli.strict;
    match cli.command {
        Command::Gen { family, size, copies, output } => {
            let circuit = match family {
                Family::Omega => generate_omega(size),
                Family::ExtraStage => generate_extra_stage(size),
                Family::Replicated => generate_omega(size).and_then(|base| generate_replicated(&base, copies)),
            }
            .map_err(|e| Failure { code: 1, message: e.to_string() })?;
            write_file(&output, &circuit_to_string(&CircuitDocument::new(circuit))?)?;
        }
        Command::Check { file } => {
            let c = load(&file, strict)?;
            println!("ok: {} components, {} wires", c.no_cmp(), c.no_line());
        }
        Command::Validate { file, path, faults } => {
            let c = load(&file, strict)?;
            let report = validate(&c, &PathSpec::parse(&path)?, &FaultSet::parse(&faults)?);
            if !report.valid {
                return Err(Failure { code: 3, message: error_lines(&report) });
            }
            print!("{report}");
        }
        Command::Paths { file, src, dst, k, format } => {
            let c = load(&file, strict)?;
            let result = max_disjoint_paths(&c, src, dst, k)?;
            match format {
                Format::Machine => println!("{}", serde_json::to_string_pretty(&result).expect("result serializes")),
                Format::Text => {
                    println!("k={}", result.disjointness);
                    for (comps, wires) in result.paths.iter().zip(&result.wires) {
                        let comps: Vec<String> = comps.iter().map(ToString::to_string).collect();
                        let wires: Vec<String> = wires.iter().map(ToString::to_string).collect();
                        println!("components {}  wires {}", comps.join("-"), wires.join(","));
                    }
                }
            }
        }
        Command::Simulate { file, path, faults, ticks, parity, scenario, droplog, report } => {
            let c = load(&file, strict)?;
            let base = match &scenario {
                Some(s) => {
                    let f = File::open(s).map_err(|e| Failure::io(s, e))?;
                    Some(load_scenario(f)?)
                }
                None => None,
            };
            let path = path.or_else(|| base.as_ref().map(|b| b.path_input.clone())).unwrap_or_default();
            let faults = faults.or_else(|| base.as_ref().map(|b| b.faults_input.clone())).unwrap_or_default();
            let config = SimConfig {
                duration_ticks: ticks.or(base.as_ref().map(|b| b.duration_ticks)).unwrap_or(DEFAULT_DURATION_TICKS),
                drop_parity: parity.map(Into::into).or(base.as_ref().map(|b| b.drop_parity)).unwrap_or_default(),
            };
            let result = run(&c, &PathSpec::parse(&path)?, &FaultSet::parse(&faults)?, config)?;
            if let Some(p) = &droplog {
                let file = File::create(p).map_err(|e| Failure::io(p, e))?;
                let mut sink = BufWriter::new(file);
                export_drop_log(&result, &mut sink).and_then(|_| sink.flush()).map_err(|e| Failure::io(p, e))?;
            }
            if let Some(p) = &report {
                write_file(p, &result.to_json())?;
            }
            println!("delivered={} dropped={}", result.delivered, result.dropped);
        }
        Command::Render { file, path, faults, state, bug_compat, output } => {
            let c = load(&file, strict)?;
            let opts = RenderOptions { bug_compat };
            let plan = match path {
                None => plan_circuit_with(&c, opts)?,
                Some(p) => {
                    let state = match state {
                        State::Green => PathState::Green,
                        State::Red => PathState::Red,
                    };
                    plan_simulation_frame(&c, &PathSpec::parse(&p)?, &FaultSet::parse(&faults)?, state, opts)?
                }
            };
            write_file(&output, &svg_string(&plan))?;
        }
        Command::Serve { port, circuit } => {
            let circuit = match circuit {
                Some(p) => load(&p, strict)?,
                None => Circuit::default(),
            };
            let addr = minforge_service::loopback(port.unwrap_or_else(minforge_service::port_from_env));
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure { code: 1, message: e.to_string() })?;
            runtime
                .block_on(async {
                    let listener = tokio::net::TcpListener::bind(addr).await?;
                    eprintln!("listening on http://{addr}");
                    minforge_service::serve(listener, minforge_service::AppState::new(circuit)).await
                })
                .map_err(|e| Failure { code: 1, message: format!("{addr}: {e}") })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors count as parse errors; exit 2 is reserved
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
