//! Exact max-plus kernel calculus from the command line.
//!
//! Every subcommand emits one JSON report (stdout or `--output`) and exits
//! with 0 when all checks pass, 1 when a check fails (the report then
//! carries a witness), and 2 on usage or format errors.  Reports are
//! byte-identical across runs for the same inputs and seed; `--timings`
//! trades that away for an `elapsed_ms` field.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use tropkern::instances::{build_instance, parse_instance_name, BuiltInstance};
use tropkern::io::{self, JsonScalar};
use tropkern::nuclearity::{
    check_theorem_1, check_theorem_2, check_theorem_3, check_theorem_3a,
    check_theorem_4_semimetric, check_theorem_4_span, check_theorem_5, functional_kernel,
    nuclear_decompose_identity, probe_kernel_bound, Functional, TheoremReport,
};
use tropkern::operator::{max_kernel, KernelMatrix, KernelWitness, LinearOperator};
use tropkern::sampling::{ProbeConfig, DEFAULT_SEED};
use tropkern::semimetric::{validate_semimetric, Semimetric};
use tropkern::semimodule::{Closure, SemimoduleSpec, TropVector};
use tropkern::{Error, Result};

#[derive(Parser)]
#[command(name = "tropkern", version, about = "Max-plus kernels, semimetrics, and nuclear decompositions on finite ground sets")]
struct Cli {
    /// Seed for randomized checks; overrides the TROPKERN_SEED variable.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Trials for randomized drivers (default 200).
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Absolute tolerance for float-valued user inputs; 0 keeps every
    /// comparison exact. Only `validate-semimetric` consumes it.
    #[arg(long, global = true, default_value_t = 0.0)]
    tolerance: f64,

    /// Record wall-clock time in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timings: bool,

    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check d = d ⊙ d on a matrix file or edge list.
    ValidateSemimetric {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Star closure: least reflexive semimetric above the input.
    Closure {
        #[arg(long)]
        matrix: PathBuf,
        /// Also write the closed matrix as a matrix file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project a vector onto lip(X, d).
    LipProject {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Decide span or wedge membership of a vector.
    Membership {
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Extract and verify the maximal kernel of an operator on a module.
    MaxKernel {
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        operator: PathBuf,
        /// Constrain kernel rows to this module.
        #[arg(long)]
        codomain: Option<PathBuf>,
    },
    /// Nuclear decomposition of the identity on a module.
    Decompose {
        #[arg(long)]
        module: PathBuf,
    },
    /// Drive one theorem check against an instance file or named instance.
    CheckTheorem {
        /// One of 1, 2, 3, 3a, 4, 5.
        #[arg(long)]
        id: String,
        /// Path to an instance file, or a catalogue name such as
        /// full-KX(4), random-semimetric(5), example7-window(10).
        #[arg(long)]
        instance: String,
    },
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        which: DemoCommand,
    },
    /// Instance catalogue plumbing.
    Instance {
        #[command(subcommand)]
        action: InstanceCommand,
    },
}

#[derive(Subcommand)]
enum DemoCommand {
    /// The coordinate functional on a sliding window: b-linear, yet with
    /// no integral kernel; probe bounds sink without limit.
    Example7 {
        #[arg(long, default_value_t = 10)]
        window: i64,
    },
    /// Hull addition on the concave grid and the failure of pointwise
    /// linearity at the middle point.
    Concave,
}

#[derive(Subcommand)]
enum InstanceCommand {
    /// Materialise a named instance as a JSON file.
    Build {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve_seed(cli: &Cli) -> Result<u64> {
    if let Some(seed) = cli.seed {
        return Ok(seed);
    }
    match std::env::var("TROPKERN_SEED") {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("TROPKERN_SEED `{raw}` is not an unsigned integer"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn vector_json(v: &TropVector) -> Value {
    Value::Array(
        v.entries()
            .iter()
            .map(|e| serde_json::to_value(JsonScalar::from_scalar(e)).expect("scalar to JSON"))
            .collect(),
    )
}

fn witness_json(w: &KernelWitness) -> Value {
    json!({
        "input": w.label,
        "expected": vector_json(&w.expected),
        "reconstructed": vector_json(&w.actual),
    })
}

fn matrix_json(m: &KernelMatrix) -> Value {
    serde_json::to_value(io::matrix_to_file(m)).expect("matrix to JSON")
}

/// Payload plus the verdict that decides the exit code.
struct Outcome {
    payload: Map<String, Value>,
    pass: bool,
}

fn outcome(value: Value, pass: bool) -> Outcome {
    match value {
        Value::Object(payload) => Outcome { payload, pass },
        _ => unreachable!("payloads are objects"),
    }
}

fn load_module_spec(path: &Path) -> Result<(SemimoduleSpec, Vec<Functional>)> {
    match io::load_instance_file(path)? {
        BuiltInstance::Module(m) => Ok((m, Vec::new())),
        BuiltInstance::Window {
            module, functional, ..
        } => Ok((module, vec![functional])),
        _ => Err(Error::InvalidParameter(format!(
            "{}: expected a module file",
            path.display()
        ))),
    }
}

fn run_validate_semimetric(path: &Path, tolerance: f64) -> Result<Outcome> {
    let m = io::load_matrix(path)?;
    let witness = if tolerance > 0.0 {
        toleranced_witness(&m, tolerance)?
    } else {
        validate_semimetric(&m)?
    };
    let witness_value = witness.map(|(x, y)| {
        json!({
            "x": m.rows_ground().labels()[x],
            "y": m.cols_ground().labels()[y],
        })
    });
    let valid = witness_value.is_none();
    Ok(outcome(
        json!({ "valid": valid, "witness": witness_value }),
        valid,
    ))
}

/// `d = d ⊙ d` up to an absolute slack on finite entries; `𝟘` and `⊤`
/// still have to match exactly.
fn toleranced_witness(m: &KernelMatrix, tol: f64) -> Result<Option<(usize, usize)>> {
    let square = m.compose(m)?;
    let n = m.rows_ground().len();
    for x in 0..n {
        for y in 0..m.cols_ground().len() {
            let a = m.entry(x, y);
            let b = square.entry(x, y);
            let close = if a.value().is_finite() && b.value().is_finite() {
                (a.value() - b.value()).abs() <= tol
            } else {
                a == b
            };
            if !close {
                return Ok(Some((x, y)));
            }
        }
    }
    Ok(None)
}

fn run_closure(path: &Path, out: Option<&Path>) -> Result<Outcome> {
    let m = io::load_matrix(path)?;
    let d = tropkern::star_closure(&m)?;
    if let Some(out) = out {
        io::write_json(out, &io::matrix_to_file(d.matrix()))?;
    }
    Ok(outcome(
        json!({
            "closure": matrix_json(d.matrix()),
            "reflexive": d.is_reflexive(),
            "symmetric": d.is_symmetric(),
        }),
        true,
    ))
}

fn run_lip_project(matrix: &Path, vector: &Path) -> Result<Outcome> {
    let m = io::load_matrix(matrix)?;
    let d = match Semimetric::try_new(m.clone()) {
        Ok(d) => d,
        Err(Error::NotSemimetric { x, y }) => {
            return Ok(outcome(
                json!({
                    "valid": false,
                    "witness": { "x": x, "y": y },
                }),
                false,
            ));
        }
        Err(e) => return Err(e),
    };
    let file: io::VectorFile = io::read_json(vector)?;
    let f = io::vector_from_file(&file, d.ground(), d.kind())?;
    let projected = d.lip_project(&f)?;
    Ok(outcome(
        json!({
            "projection": vector_json(&projected),
            "already_lip": projected == f,
        }),
        true,
    ))
}

fn run_membership(module: &Path, vector: &Path) -> Result<Outcome> {
    let (spec, _) = load_module_spec(module)?;
    let file: io::VectorFile = io::read_json(vector)?;
    let f = io::vector_from_file(&file, spec.ground(), spec.kind())?;
    let payload = match spec.closure() {
        Closure::BClosedSpan => {
            let m = spec.membership(&f)?;
            json!({
                "member": m.member,
                "coefficients": m.coefficients.iter()
                    .map(|c| serde_json::to_value(JsonScalar::from_scalar(c)).unwrap())
                    .collect::<Vec<_>>(),
                "projection": vector_json(&m.projection),
            })
        }
        Closure::WedgeClosed => {
            json!({ "member": spec.wedge_membership(&f)? })
        }
    };
    let pass = payload["member"].as_bool().unwrap_or(false);
    Ok(outcome(payload, pass))
}

fn run_max_kernel(
    module: &Path,
    operator: &Path,
    codomain: Option<&Path>,
    cfg: &ProbeConfig,
) -> Result<Outcome> {
    let (spec, _) = load_module_spec(module)?;
    let op = LinearOperator::Integral(io::load_matrix(operator)?);
    let cod = match codomain {
        Some(path) => Some(load_module_spec(path)?.0),
        None => None,
    };
    let mk = max_kernel(&op, &spec, cod.as_ref(), cfg)?;
    Ok(outcome(
        json!({
            "kernel": matrix_json(&mk.kernel),
            "verified": mk.verified,
            "witness": mk.witness.as_ref().map(witness_json),
        }),
        mk.verified,
    ))
}

fn run_decompose(module: &Path, cfg: &ProbeConfig) -> Result<Outcome> {
    let (spec, _) = load_module_spec(module)?;
    let id = nuclear_decompose_identity(&spec, cfg)?;
    let terms = id.decomposition.as_ref().map(|d| {
        d.terms()
            .iter()
            .map(|t| {
                let functional = match &t.functional {
                    Functional::Kernel(k) => json!({ "kernel": vector_json(k) }),
                    Functional::Declared { values, .. } => json!({
                        "declared": values.iter()
                            .map(|c| serde_json::to_value(JsonScalar::from_scalar(c)).unwrap())
                            .collect::<Vec<_>>(),
                    }),
                };
                json!({ "functional": functional, "target": vector_json(&t.target) })
            })
            .collect::<Vec<_>>()
    });
    Ok(outcome(
        json!({
            "verified": id.kernel.verified,
            "kernel": matrix_json(&id.kernel.kernel),
            "witness": id.kernel.witness.as_ref().map(witness_json),
            "term_count": id.decomposition.as_ref().map(|d| d.term_count()),
            "terms": terms,
        }),
        id.kernel.verified,
    ))
}

/// File path when one exists, catalogue name otherwise.
fn resolve_instance(raw: &str, seed: u64) -> Result<(String, BuiltInstance)> {
    let path = Path::new(raw);
    if path.exists() {
        Ok((raw.to_string(), io::load_instance_file(path)?))
    } else {
        let name = parse_instance_name(raw)?;
        Ok((name.to_string(), build_instance(&name, seed)?))
    }
}

fn matrix_as_semimetric(m: &KernelMatrix) -> Result<std::result::Result<Semimetric, (String, String)>> {
    match Semimetric::try_new(m.clone()) {
        Ok(d) => Ok(Ok(d)),
        Err(Error::NotSemimetric { x, y }) => Ok(Err((x, y))),
        Err(e) => Err(e),
    }
}

fn run_check_theorem(id: &str, raw_instance: &str, cfg: &ProbeConfig) -> Result<Outcome> {
    let (label, built) = resolve_instance(raw_instance, cfg.seed)?;

    // instances that arrive as raw matrices must first validate; a failure
    // here is a failed check, not a usage error
    let not_semimetric = |x: String, y: String| {
        let payload = json!({
            "theorem": id,
            "instance": label.clone(),
            "verdict": "fails",
            "witnesses": [{ "check": "instance-is-semimetric", "x": x, "y": y }],
            "checks": [{ "name": "instance-is-semimetric", "passed": false }],
            "notes": ["the instance matrix does not satisfy d = d ⊙ d"],
        });
        outcome(payload, false)
    };

    enum Shape {
        Module(SemimoduleSpec, Vec<Functional>),
        Metric(Semimetric),
    }

    let shape = match &built {
        BuiltInstance::Module(m) => Shape::Module(m.clone(), Vec::new()),
        BuiltInstance::Window {
            module, functional, ..
        } => Shape::Module(module.clone(), vec![functional.clone()]),
        BuiltInstance::Metric(d) => Shape::Metric(d.clone()),
        BuiltInstance::Matrix(m) => match matrix_as_semimetric(m)? {
            Ok(d) => Shape::Metric(d),
            Err((x, y)) => return Ok(not_semimetric(x, y)),
        },
        BuiltInstance::Concave(_) => {
            return Err(Error::InvalidParameter(
                "theorem checks need a module or semimetric instance; the concave grid is driven by `demo concave`".into(),
            ))
        }
    };

    let report: TheoremReport = match (id, &shape) {
        ("1", Shape::Module(v, _)) => check_theorem_1(v, cfg)?,
        ("1", Shape::Metric(d)) => check_theorem_1(&d.lip_wedge_spec()?, cfg)?,
        ("2", Shape::Module(v, fs)) => check_theorem_2(v, fs, cfg)?,
        ("2", Shape::Metric(d)) => check_theorem_2(&d.lip0_span()?, &[], cfg)?,
        ("3", Shape::Module(v, fs)) => check_theorem_3(v, fs, cfg)?,
        ("3", Shape::Metric(d)) => check_theorem_3(&d.lip0_span()?, &[], cfg)?,
        ("3a", Shape::Module(v, _)) => check_theorem_3a(v, cfg)?,
        ("3a", Shape::Metric(d)) => check_theorem_3a(&d.lip0_span()?, cfg)?,
        ("4", Shape::Module(v, _)) => check_theorem_4_span(v, cfg)?,
        ("4", Shape::Metric(d)) => check_theorem_4_semimetric(d, cfg)?,
        ("5", Shape::Module(v, _)) => check_theorem_5(v, cfg)?,
        ("5", Shape::Metric(d)) => check_theorem_5(&d.lip0_span()?, cfg)?,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown theorem id `{id}` (expected 1, 2, 3, 3a, 4, or 5)"
            )))
        }
    };

    let witnesses: Vec<Value> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| json!({ "check": c.name }))
        .collect();
    let payload = json!({
        "theorem": report.theorem,
        "instance": label,
        "verdict": if report.holds { "holds" } else { "fails" },
        "hypothesis_ok": report.precondition_ok,
        "witnesses": witnesses,
        "checks": serde_json::to_value(&report.checks).expect("checks to JSON"),
        "notes": report.notes,
        "trials": cfg.trials,
    });
    Ok(outcome(payload, report.holds))
}

fn run_demo_example7(window: i64, cfg: &ProbeConfig) -> Result<Outcome> {
    let name = parse_instance_name(&format!("example7-window({window})"))?;
    let built = build_instance(&name, cfg.seed)?;
    let BuiltInstance::Window {
        module,
        functional,
        schedule,
    } = &built
    else {
        unreachable!("window instances have window shape");
    };
    let fk = functional_kernel(functional, module, cfg)?;
    let bounds = probe_kernel_bound(functional, module, "0", schedule)?;
    let decreasing = bounds.windows(2).all(|w| {
        let (a, b) = (w[0].value(), w[1].value());
        b < a
    });
    let bounds_json: Vec<Value> = bounds
        .iter()
        .map(|b| serde_json::to_value(JsonScalar::from_scalar(b)).unwrap())
        .collect();
    let pass = !fk.verified && decreasing;
    Ok(outcome(
        json!({
            "instance": name.to_string(),
            "phi_integral": fk.verified,
            "candidate_kernel": vector_json(&fk.kernel),
            "witness": fk.witness.as_ref().map(witness_json),
            "kernel_upper_bounds": bounds_json,
            "bounds_strictly_decreasing": decreasing,
        }),
        pass,
    ))
}

fn run_demo_concave() -> Result<Outcome> {
    let built = build_instance(&tropkern::InstanceName::ConcaveGrid, 0)?;
    let BuiltInstance::Concave(grid) = &built else {
        unreachable!("concave-grid builds a grid");
    };
    let (f, g) = grid.witness_pair()?;
    let hull = grid.hull_sum(&f, &g)?;
    let pointwise = f.sup(&g)?;
    let mid = grid.middle_index();
    let separated = hull.get(mid).value() > pointwise.get(mid).value();
    Ok(outcome(
        json!({
            "instance": "concave-grid",
            "witness_f": vector_json(&f),
            "witness_g": vector_json(&g),
            "hull_sum": vector_json(&hull),
            "pointwise_sup": vector_json(&pointwise),
            "middle_point": grid.ground().labels()[mid],
            "delta_mid_linear": !separated,
        }),
        separated,
    ))
}

fn run_instance_build(name: &str, out: &Path, seed: u64) -> Result<Outcome> {
    let parsed = parse_instance_name(name)?;
    let built = build_instance(&parsed, seed)?;
    let value = io::instance_to_value(&built)?;
    io::write_json(out, &value)?;
    Ok(outcome(
        json!({
            "name": parsed.to_string(),
            "written": out.display().to_string(),
        }),
        true,
    ))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let seed = resolve_seed(cli)?;
    let mut cfg = ProbeConfig::with_seed(seed);
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    match &cli.command {
        Command::ValidateSemimetric { matrix } => run_validate_semimetric(matrix, cli.tolerance),
        Command::Closure { matrix, out } => run_closure(matrix, out.as_deref()),
        Command::LipProject { matrix, vector } => run_lip_project(matrix, vector),
        Command::Membership { module, vector } => run_membership(module, vector),
        Command::MaxKernel {
            module,
            operator,
            codomain,
        } => run_max_kernel(module, operator, codomain.as_deref(), &cfg),
        Command::Decompose { module } => run_decompose(module, &cfg),
        Command::CheckTheorem { id, instance } => run_check_theorem(id, instance, &cfg),
        Command::Demo { which } => match which {
            DemoCommand::Example7 { window } => run_demo_example7(*window, &cfg),
            DemoCommand::Concave => run_demo_concave(),
        },
        Command::Instance { action } => match action {
            InstanceCommand::Build { name, out } => run_instance_build(name, out, seed),
        },
    }
}

fn command_name(cli: &Cli) -> &'static str {
    match &cli.command {
        Command::ValidateSemimetric { .. } => "validate-semimetric",
        Command::Closure { .. } => "closure",
        Command::LipProject { .. } => "lip-project",
        Command::Membership { .. } => "membership",
        Command::MaxKernel { .. } => "max-kernel",
        Command::Decompose { .. } => "decompose",
        Command::CheckTheorem { .. } => "check-theorem",
        Command::Demo { .. } => "demo",
        Command::Instance { .. } => "instance",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let seed = match resolve_seed(&cli) {
        Ok(seed) => seed,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(Outcome { mut payload, pass }) => {
            payload.insert("command".into(), json!(command_name(&cli)));
            payload.entry("seed".to_string()).or_insert(json!(seed));
            let elapsed = if cli.timings {
                json!(started.elapsed().as_millis() as u64)
            } else {
                Value::Null
            };
            payload.insert("elapsed_ms".into(), elapsed);
            let mut text =
                serde_json::to_string_pretty(&Value::Object(payload)).expect("report to JSON");
            text.push('\n');
            let write_result = match &cli.output {
                Some(path) => std::fs::write(path, &text)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = write_result {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
