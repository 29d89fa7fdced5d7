use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use ionroute::arch::{preset, ArchError, ArchitectureSpec, PositionGraph, TimingModel};
use ionroute::bench::{self, BenchOptions};
use ionroute::circuit::{
    emit_qasm, generate, parse_qasm, partition_blocks, Circuit, GeneratorKind, GeneratorParams,
};
use ionroute::scheduler::{RouteError, SearchConfig};
use ionroute::timeline::{validate, ScheduleStats, Trace, STATS_SCHEMA};
use ionroute::{compile, CompileError, CompileOptions};
use log::info;
use serde::Serialize;
use sha2::{Digest, Sha256};

const REPORT_SCHEMA: &str = "ionroute.report/v1";

#[derive(Parser)]
#[command(
    name = "ionroute",
    version,
    about = "Shuttling-aware compiler for trapped-ion QCCD devices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Algo {
    /// Heuristic search with permutation-aware block execution.
    Shaper,
    /// The same search with identity permutations.
    Shaw,
}

#[derive(clap::Args, Clone, Debug)]
struct ArchArgs {
    /// Preset name (H, G2x3, MINI) or path to an architecture JSON file.
    #[arg(long)]
    arch: String,
    /// Trap capacity for presets.
    #[arg(long, default_value_t = 3)]
    capacity: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a QASM circuit into a timed shuttling schedule.
    Compile {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Shaper)]
        algo: Algo,
        /// Maximum block width; defaults to min(3, largest executable trap).
        #[arg(long)]
        k: Option<usize>,
        /// Weight of the extended-set term.
        #[arg(long)]
        we: Option<f64>,
        #[arg(long)]
        lookahead: Option<usize>,
        /// Layout passes (alternating forward/reverse).
        #[arg(long)]
        passes: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON timing model overriding the defaults.
        #[arg(long)]
        timing: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a trace against the device rules.
    Validate {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Generate a benchmark circuit as QASM.
    Gen {
        #[arg(value_parser = parse_kind)]
        kind: GeneratorKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a preset architecture as JSON.
    Arch {
        name: String,
        #[arg(long, default_value_t = 3)]
        capacity: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare both algorithms over the standard benchmark grid.
    Bench {
        /// Layout seeds per algorithm; the best shuttle makespan is kept.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        circuit_seed: u64,
        /// Directory for bench.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> Result<GeneratorKind, String> {
    s.parse()
        .map_err(|e: ionroute::circuit::GenerateError| e.to_string())
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    const VIOLATIONS: u8 = 1;
    const USAGE: u8 = 2;
    const PARSE: u8 = 3;
    const ARCH: u8 = 4;
    const CAPACITY: u8 = 5;
    const ROUTE: u8 = 6;

    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: Failure::USAGE,
            error,
        }
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        let code = match &e {
            CompileError::Arch(_) | CompileError::BlockWidth { .. } => Failure::ARCH,
            CompileError::Circuit(_) => Failure::PARSE,
            CompileError::CapacityExceeded { .. }
            | CompileError::Route(RouteError::CapacityExceeded { .. }) => Failure::CAPACITY,
            CompileError::Route(_) | CompileError::Schedule(_) | CompileError::Partition(_) => {
                Failure::ROUTE
            }
            CompileError::Config(_) => Failure::USAGE,
        };
        Failure::new(code, e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::from)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::from)
}

fn load_arch(args: &ArchArgs) -> Result<(String, ArchitectureSpec), Failure> {
    let path = Path::new(&args.arch);
    let spec = if path.is_file() {
        ArchitectureSpec::from_json(&read(path)?).map_err(|e| Failure::new(Failure::ARCH, e))?
    } else {
        preset(&args.arch, args.capacity).map_err(|e| Failure::new(Failure::ARCH, e))?
    };
    let name = spec.name.clone().unwrap_or_else(|| args.arch.clone());
    Ok((name, spec))
}

fn load_circuit(path: &Path) -> Result<(Circuit, String), Failure> {
    let text = read(path)?;
    let circuit = parse_qasm(&text).map_err(|e| Failure::new(Failure::PARSE, e))?;
    Ok((circuit, text))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct ConfigEcho {
    algo: Algo,
    k: Option<usize>,
    capacity: usize,
    search: SearchConfig<f64>,
    timing: TimingModel<f64>,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Outcome {
    Ok,
    Failed(String),
}

#[derive(Serialize)]
struct CompileReport {
    schema: &'static str,
    input_digest: String,
    architecture: String,
    config: ConfigEcho,
    stats: Option<ScheduleStats<f64>>,
    wall_clock_ms: f64,
    seed: u64,
    outcome: Outcome,
}

#[derive(Serialize)]
struct StatsFile<'a> {
    schema: &'static str,
    #[serde(flatten)]
    stats: &'a ScheduleStats<f64>,
    blocks: usize,
    shuttles: usize,
    escapes: usize,
    violations: usize,
}

#[allow(clippy::too_many_arguments)]
fn cmd_compile(
    arch: &ArchArgs,
    circuit_path: &Path,
    algo: Algo,
    k: Option<usize>,
    we: Option<f64>,
    lookahead: Option<usize>,
    passes: Option<usize>,
    seed: u64,
    timing_path: Option<&Path>,
    out: &Path,
) -> Result<(), Failure> {
    let started = Instant::now();
    let (circuit, text) = load_circuit(circuit_path)?;
    let (name, spec) = load_arch(arch)?;
    let timing = match timing_path {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| Failure::new(Failure::USAGE, anyhow::anyhow!("timing file: {e}")))?,
        None => TimingModel::default(),
    };
    let mut search = match algo {
        Algo::Shaper => SearchConfig::shaper(),
        Algo::Shaw => SearchConfig::shaw(),
    };
    search.seed = seed;
    if let Some(w) = we {
        search.extended_weight = w;
    }
    if let Some(l) = lookahead {
        search.lookahead = l;
    }
    if let Some(p) = passes {
        search.layout_passes = p;
    }
    let opts = CompileOptions {
        k,
        config: search.clone(),
        timing: timing.clone(),
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let result = compile(&circuit, &spec, &opts);
    let mut report = CompileReport {
        schema: REPORT_SCHEMA,
        input_digest: hex(&Sha256::digest(text.as_bytes())),
        architecture: name.clone(),
        config: ConfigEcho {
            algo,
            k,
            capacity: arch.capacity,
            search,
            timing,
        },
        stats: None,
        wall_clock_ms: 0.0,
        seed,
        outcome: Outcome::Ok,
    };
    let outcome = match result {
        Ok(c) => {
            let mut trace = c.trace();
            trace.architecture = Some(name);
            write(&out.join("trace.json"), &trace.to_json())?;
            let stats = StatsFile {
                schema: STATS_SCHEMA,
                stats: &c.stats,
                blocks: c.dag.len(),
                shuttles: c.routing.shuttle_count(),
                escapes: c.routing.escapes,
                violations: c.violations.len(),
            };
            write(
                &out.join("stats.json"),
                &serde_json::to_string_pretty(&stats).expect("stats serialize"),
            )?;
            report.stats = Some(c.stats.clone());
            if c.violations.is_empty() {
                println!(
                    "makespan {} us, {} shuttles, sp {:.3}",
                    c.stats.makespan,
                    c.routing.shuttle_count(),
                    c.stats.sp
                );
                Ok(())
            } else {
                for v in &c.violations {
                    eprintln!("{v}");
                }
                report.outcome = Outcome::Failed(format!("{} violations", c.violations.len()));
                Err(Failure::new(
                    Failure::VIOLATIONS,
                    anyhow::anyhow!("schedule has {} violations", c.violations.len()),
                ))
            }
        }
        Err(e) => {
            report.outcome = Outcome::Failed(e.to_string());
            Err(Failure::from(e))
        }
    };
    report.wall_clock_ms = started.elapsed().as_secs_f64() * 1e3;
    write(
        &out.join("report.json"),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    info!("wrote artifacts to {}", out.display());
    outcome
}

fn cmd_validate(trace_path: &Path, arch: &ArchArgs, circuit_path: &Path) -> Result<(), Failure> {
    let trace =
        Trace::from_json(&read(trace_path)?).map_err(|e| Failure::new(Failure::PARSE, e))?;
    let (circuit, _) = load_circuit(circuit_path)?;
    let (_, spec) = load_arch(arch)?;
    let graph = PositionGraph::build(&spec).map_err(|e| Failure::new(Failure::ARCH, e))?;
    if trace.qubits != circuit.num_qubits {
        return Err(Failure::new(
            Failure::PARSE,
            anyhow::anyhow!(
                "trace has {} qubits, circuit has {}",
                trace.qubits,
                circuit.num_qubits
            ),
        ));
    }
    let (phi0, schedule) = trace
        .to_schedule(&graph)
        .map_err(|e| Failure::new(Failure::PARSE, e))?;
    let dag =
        partition_blocks(&circuit, trace.k.max(1)).map_err(|e| Failure::new(Failure::PARSE, e))?;
    let violations = validate(&schedule, &phi0, &graph, &dag, &trace.timing);
    if violations.is_empty() {
        println!(
            "ok: {} events, makespan {} us",
            schedule.events.len(),
            schedule.makespan
        );
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(Failure::new(
        Failure::VIOLATIONS,
        anyhow::anyhow!("{} violations", violations.len()),
    ))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bench(seeds: u64, circuit_seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let opts = BenchOptions {
        seeds,
        circuit_seed,
        ..BenchOptions::default()
    };
    let mut rows = Vec::new();
    for r in bench::run(&bench::default_cells(), &opts) {
        rows.push(r?);
    }
    print!("{}", bench::format_table(&rows));
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let json = serde_json::json!({ "schema": "ionroute.bench/v1", "notice": bench::NOTICE, "rows": rows });
        write(
            &dir.join("bench.json"),
            &serde_json::to_string_pretty(&json).expect("bench serializes"),
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile {
            arch,
            circuit,
            algo,
            k,
            we,
            lookahead,
            passes,
            seed,
            timing,
            out,
        } => cmd_compile(
            &arch,
            &circuit,
            algo,
            k,
            we,
            lookahead,
            passes,
            seed,
            timing.as_deref(),
            &out,
        ),
        Command::Validate {
            trace,
            arch,
            circuit,
        } => cmd_validate(&trace, &arch, &circuit),
        Command::Gen { kind, n, seed, out } => {
            let c = generate(kind, n, seed, &GeneratorParams::default())
                .map_err(|e| Failure::new(Failure::USAGE, e))?;
            emit(&emit_qasm(&c), out.as_deref())
        }
        Command::Arch {
            name,
            capacity,
            out,
        } => {
            let spec =
                preset(&name, capacity).map_err(|e: ArchError| Failure::new(Failure::ARCH, e))?;
            emit(&(spec.to_json() + "\n"), out.as_deref())
        }
        Command::Bench {
            seeds,
            circuit_seed,
            out,
        } => cmd_bench(seeds, circuit_seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("IONROUTE_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
