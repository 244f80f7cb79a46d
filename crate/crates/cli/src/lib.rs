//! Batch front end: reads a problem or experiment configuration, runs it and
//! writes `result.json` plus CSV tables into the output directory.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lorot::diagnostics::audit;
use lorot::dual::{default_root, dkp_verify, potentials_csv, DualPotential};
use lorot::experiments::{run_cylinder_example, run_line_counterexample, ExperimentReport, DEFAULT_ETAS};
use lorot::measures::DiscreteMeasure;
use lorot::solver::{solve, SolveOptions, TransportProblem};
use lorot::spacetime::SpacetimeModel;
use lorot::transport::{interpolate, monge_csv, monge_map, MongeOutcome};
use lorot::Tolerances;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const LINE_REFINEMENTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Dual,
    Audit,
    Interpolate,
    Monge,
    CounterexampleLine,
    CounterexampleCylinder,
    Validate,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "lorot", version, about = "Discrete optimal transport for Lorentzian costs")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Problem file, or the problem itself as inline JSON.
    #[arg(long)]
    pub input: Option<String>,
    /// Output directory for result.json and CSV tables.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Verification tolerance for dual feasibility and tightness.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Grid size for counterexample-line.
    #[arg(long)]
    pub n: Option<usize>,
    /// Profile parameter for counterexample-cylinder.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Interpolation parameter, or slice time for counterexample-cylinder.
    #[arg(long)]
    pub t: Option<f64>,
    /// Theta grid size for counterexample-cylinder.
    #[arg(long)]
    pub grid: Option<usize>,
}

/// The fully resolved configuration echoed into every `result.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<String>,
    pub out: PathBuf,
    pub seed: u64,
    pub tol: Option<f64>,
    pub tolerances: Tolerances,
    pub n: usize,
    pub eps: f64,
    pub t: f64,
    pub grid: usize,
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Self {
        let default_t = if cli.command == Command::CounterexampleCylinder { 1.0 } else { 0.5 };
        Self {
            command: cli.command,
            input: cli.input.clone(),
            out: cli.out.clone(),
            seed: cli.seed,
            tol: cli.tol,
            tolerances: Tolerances::default(),
            n: cli.n.unwrap_or(51),
            eps: cli.eps.unwrap_or(0.25),
            t: cli.t.unwrap_or(default_t),
            grid: cli.grid.unwrap_or(10_000),
        }
    }

    /// `--tol` wins over tolerances given in the input file.
    fn apply_tol(&mut self) {
        if let Some(tol) = self.tol {
            self.tolerances.dkp = tol;
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, or failed validation.
    Input(String),
    Io(String),
    Core(lorot::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "invalid input: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<lorot::Error> for CliError {
    fn from(e: lorot::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 2 for infeasible problems, 3 for invalid input, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        use lorot::Error as E;
        match self {
            CliError::Core(E::Infeasible) => 2,
            CliError::Input(_) => 3,
            CliError::Core(
                E::DimensionMismatch { .. }
                | E::InvalidMeasure(_)
                | E::InvalidParameter(_)
                | E::BadGrid(_)
                | E::BadIntervals(_)
                | E::ValidationFailed { .. },
            ) => 3,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Deserialize)]
struct InputDoc {
    model: SpacetimeModel,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    #[serde(default)]
    options: SolveOptions,
    #[serde(default)]
    tolerances: Option<Tolerances>,
}

fn read_input(input: Option<&str>) -> CliResult<String> {
    let src = input.ok_or_else(|| CliError::Input("--input is required for this command".into()))?;
    if src.trim_start().starts_with('{') {
        Ok(src.to_string())
    } else {
        fs::read_to_string(src).map_err(|e| CliError::Input(format!("{src}: {e}")))
    }
}

fn load_problem(cfg: &mut RunConfig) -> CliResult<TransportProblem> {
    let text = read_input(cfg.input.as_deref())?;
    let doc: InputDoc = serde_json::from_str(&text).map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(t) = doc.tolerances {
        cfg.tolerances = t;
    }
    cfg.apply_tol();
    let problem = TransportProblem { model: doc.model, mu: doc.mu, nu: doc.nu, options: doc.options };
    problem.validate()?;
    Ok(problem)
}

/// Structural and measure-level checks without solving. Returns the list of
/// violation tags; empty means the input is valid.
pub fn validate_input(text: &str) -> Vec<String> {
    let raw: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(_) => return vec!["parse".into()],
    };
    let mut violations = Vec::new();
    let model = match raw.get("model").map(|m| serde_json::from_value::<SpacetimeModel>(m.clone())) {
        Some(Ok(m)) if m.validate().is_ok() => Some(m),
        _ => {
            violations.push("model".to_string());
            None
        }
    };
    for side in ["mu", "nu"] {
        let atoms = raw.get(side).and_then(|m| m.get("atoms")).and_then(Value::as_array);
        let Some(atoms) = atoms else {
            violations.push(format!("{side}: schema"));
            continue;
        };
        if atoms.is_empty() {
            violations.push("empty measure".into());
            continue;
        }
        let mut mass = 0.0;
        let mut ok = true;
        for a in atoms {
            let w = a.get("w").and_then(Value::as_f64);
            let t = a.get("t").and_then(Value::as_f64);
            let x: Option<Vec<f64>> = a.get("x").and_then(Value::as_array).map(|xs| xs.iter().filter_map(Value::as_f64).collect());
            match (w, t, x) {
                (Some(w), Some(_), Some(x)) => {
                    if !(w > 0.0) {
                        ok = false;
                        violations.push("weight".into());
                    }
                    if let Some(m) = &model {
                        if x.len() != m.spatial_dim() {
                            ok = false;
                            violations.push("dimension".into());
                        }
                    }
                    mass += w;
                }
                _ => {
                    ok = false;
                    violations.push(format!("{side}: schema"));
                }
            }
        }
        if ok && (mass - 1.0).abs() > lorot::config::MASS {
            violations.push("mass".into());
        }
    }
    violations.dedup();
    violations
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::write(dir.join(name), contents).map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))
}

fn experiment_json(report: &ExperimentReport) -> Value {
    let checks: Vec<Value> = report
        .scalars
        .iter()
        .map(|s| json!({"name": s.name, "value": s.value, "tolerance": s.tolerance, "passed": s.passed}))
        .collect();
    let tables: Vec<String> = report.tables.iter().map(|t| format!("{}.csv", t.name)).collect();
    json!({"experiment": report.experiment, "scalars": checks, "tables": tables})
}

fn run_command(cfg: &mut RunConfig) -> CliResult<(Value, Vec<(String, String)>, Vec<String>)> {
    cfg.apply_tol();
    let mut tables: Vec<(String, String)> = Vec::new();
    let mut failures = Vec::new();
    let summary = match cfg.command {
        Command::Validate => {
            let text = read_input(cfg.input.as_deref())?;
            let violations = validate_input(&text);
            if !violations.is_empty() {
                failures = violations.clone();
            }
            let status = if violations.is_empty() { "ok" } else { "invalid" };
            json!({"status": status, "violations": violations})
        }
        Command::Solve => {
            let p = load_problem(cfg)?;
            let s = solve(&p)?;
            tables.push(("coupling.csv".into(), s.coupling.to_csv()));
            json!({
                "cost": s.primal(),
                "dual_objective": s.dual_objective(),
                "dual_gap": s.dual_gap(),
                "n_arcs": s.n_arcs(),
            })
        }
        Command::Dual => {
            let p = load_problem(cfg)?;
            let tol = cfg.tolerances;
            let s = solve(&p)?;
            let root = default_root(&s.coupling);
            let pot = DualPotential::from_chain(&p.model, &s.coupling, root, tol.cycle)?;
            let report = dkp_verify(&p.model, &s.coupling, &pot, tol.dkp);
            if !report.passed() {
                failures.push("dkp".into());
            }
            tables.push(("psi.csv".into(), potentials_csv(&p.mu, &pot.psi)));
            tables.push(("phi.csv".into(), potentials_csv(&p.nu, &pot.phi)));
            tables.push(("coupling.csv".into(), s.coupling.to_csv()));
            json!({
                "cost": s.primal(),
                "root": [root.0, root.1],
                "spread": pot.spread(),
                "dkp": report,
            })
        }
        Command::Audit => {
            let p = load_problem(cfg)?;
            let tol = cfg.tolerances;
            let s = solve(&p)?;
            let r = audit(&p, &s, &tol, cfg.seed);
            if r.dual_gap > tol.duality * (1.0 + s.primal().abs()) {
                failures.push("dual_gap".into());
            }
            if r.monotonicity_violations > 0 {
                failures.push("monotonicity".into());
            }
            tables.push(("coupling.csv".into(), s.coupling.to_csv()));
            json!({"cost": s.primal(), "diagnostics": r})
        }
        Command::Interpolate => {
            let p = load_problem(cfg)?;
            let s = solve(&p)?;
            let m = interpolate(&p.model, &s.coupling, cfg.t)?;
            tables.push(("interpolation.json".into(), m.to_json()));
            json!({"t": cfg.t, "atoms": m.len(), "total_mass": m.total_mass()})
        }
        Command::Monge => {
            let p = load_problem(cfg)?;
            match monge_map(&p, &cfg.tolerances)? {
                MongeOutcome::Map(m) => {
                    tables.push(("monge.csv".into(), monge_csv(&m)));
                    json!({"outcome": "map", "cost": m.cost, "optimum": m.optimum, "rays": m.rays})
                }
                MongeOutcome::AtomSplit { mu_atom } => json!({"outcome": "atom_split", "mu_atom": mu_atom}),
            }
        }
        Command::CounterexampleLine => {
            let e = run_line_counterexample(cfg.n, LINE_REFINEMENTS)?;
            let report = e.report();
            failures.extend(report.failures().into_iter().map(String::from));
            tables.extend(report.tables.iter().map(|t| (format!("{}.csv", t.name), t.csv.clone())));
            let base = &e.levels[0];
            json!({
                "n": base.n,
                "spread": base.spread,
                "expected_spread": base.expected_spread,
                "lightlike_fraction": base.lightlike_fraction,
                "total_cost": base.total_cost,
                "levels": e.levels,
                "ratios": e.ratios,
                "slope": e.slope,
                "report": experiment_json(&report),
            })
        }
        Command::CounterexampleCylinder => {
            let e = run_cylinder_example(cfg.eps, cfg.grid, cfg.t, &DEFAULT_ETAS)?;
            let report = e.report();
            failures.extend(report.failures().into_iter().map(String::from));
            tables.extend(report.tables.iter().map(|t| (format!("{}.csv", t.name), t.csv.clone())));
            json!({
                "eps": e.eps,
                "t": e.t,
                "theta_grid": e.theta_grid,
                "near_null": e.near_null,
                "near_null_attained": e.near_null_attained,
                "attained_fraction": e.attained_fraction,
                "delta": e.delta,
                "delta_minus": e.delta_minus,
                "root_failures": e.root_failures,
                "report": experiment_json(&report),
            })
        }
    };
    Ok((summary, tables, failures))
}

#[derive(Debug)]
pub struct RunOutput {
    pub document: Value,
    /// Names of checks or validation tags that failed; nonempty means exit 3.
    pub failures: Vec<String>,
}

/// Runs one command and writes `<out>/result.json` plus its tables.
pub fn run(cfg: &RunConfig) -> CliResult<RunOutput> {
    let mut cfg = cfg.clone();
    let (summary, tables, failures) = run_command(&mut cfg)?;
    let doc = json!({
        "version": VERSION,
        "config": cfg,
        "result": summary,
    });
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out.display())))?;
    let text = serde_json::to_string_pretty(&doc).expect("summary serializes") + "\n";
    write(&cfg.out, "result.json", &text)?;
    for (name, contents) in &tables {
        write(&cfg.out, name, contents)?;
    }
    Ok(RunOutput { document: doc, failures })
}
