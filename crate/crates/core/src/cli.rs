//! Command-line front end. Every subcommand prints a JSON report to stdout
//! (or the main CSV table with `--format csv`) and, with `--out DIR`, writes
//! `report.json` plus `trajectory.csv` or `observation.csv` into `DIR`.
//!
//! Exit codes: 0 ok/feasible, 2 infeasible or infinite minimax error,
//! 1 error (including failed rows of `examples`).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::config::{
    Experiment, ExperimentConfig, GridConfig, NoiseConfig, Observation, ObservationConfig, SimulationConfig, BUILTINS,
};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::observer::operators::NegTranspose;
use crate::observer::{
    check_feasibility, fredholm_check, functional_value, observability_diagnostic, simulate_observation,
    solve_estimator, solve_reconstruction, Estimate,
};
use crate::ode::{propagate_fundamental, Grid, VectorTrajectory};
use crate::time_matrix::{PiecewiseLinear, TimeMatrix};

#[derive(Debug, Parser)]
#[command(
    name = "minimax-bvp",
    version,
    about = "Minimax state observation for periodic linear systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the functional has finite guaranteed error.
    Check(CommonArgs),
    /// Build the minimax estimator and its error.
    Estimate(CommonArgs),
    /// Reconstruct the state from the configured observation.
    Reconstruct(CommonArgs),
    /// Generate an observation from the simulation block.
    Simulate(CommonArgs),
    /// Run builtin scenarios against their reference values.
    Examples {
        /// One of singular-l1, singular-l2, oscillator; all when omitted.
        name: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Experiment JSON file.
    #[arg(long, value_name = "PATH", conflicts_with = "builtin")]
    pub config: Option<PathBuf>,
    /// Builtin experiment instead of a file.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
    #[arg(long, value_name = "N")]
    pub grid_steps: Option<usize>,
    #[arg(long, value_name = "X")]
    pub rank_tol: Option<f64>,
    #[arg(long, value_name = "X")]
    pub feas_tol: Option<f64>,
    /// Seed for random noise in simulation blocks.
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Result of one command before rendering.
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    /// File name and contents of the CSV table, if any.
    pub table: Option<(&'static str, String)>,
    /// Human-readable text printed instead of JSON (the examples table).
    pub text: Option<String>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    match execute(&cli.command, stderr).and_then(|o| emit(&cli.command, o, stdout)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn common(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::Check(c) | Command::Estimate(c) | Command::Reconstruct(c) | Command::Simulate(c) => c,
        Command::Examples { common, .. } => common,
    }
}

fn emit(cmd: &Command, outcome: Outcome, stdout: &mut dyn Write) -> Result<i32> {
    let args = common(cmd);
    let io = |e: std::io::Error| Error::Invalid(format!("write failed: {e}"));
    let report = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("report.json"), format!("{report}\n")).map_err(io)?;
        if let Some((name, csv)) = &outcome.table {
            std::fs::write(dir.join(name), csv).map_err(io)?;
        }
    }
    let written = match (&outcome.text, &outcome.table, args.format) {
        (_, Some((_, csv)), Format::Csv) => write!(stdout, "{csv}"),
        (Some(text), _, _) => write!(stdout, "{text}"),
        _ => writeln!(stdout, "{report}"),
    };
    match written {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(io(e)),
        _ => Ok(outcome.code),
    }
}

pub fn execute(cmd: &Command, stderr: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Examples { name, common } => cmd_examples(name.as_deref(), common),
        _ => {
            let args = common(cmd);
            let cfg = load_config(args)?;
            let base = args.config.as_ref().and_then(|p| p.parent().map(PathBuf::from));
            let exp = cfg.build(base.as_deref())?;
            for w in &exp.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let mut outcome = match cmd {
                Command::Check(_) => cmd_check(&exp),
                Command::Estimate(_) => cmd_estimate(&exp),
                Command::Reconstruct(_) => cmd_reconstruct(&exp),
                Command::Simulate(_) => cmd_simulate(&exp),
                Command::Examples { .. } => unreachable!(),
            }?;
            if let Value::Object(map) = &mut outcome.report {
                map.insert("grid_steps".into(), json!(exp.grid.steps()));
            }
            Ok(outcome)
        }
    }
}

/// Reads `--config` or `--builtin` and applies the command-line overrides.
pub fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.builtin) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::builtin(name)?,
        (None, None) => return Err(Error::Invalid("one of --config or --builtin is required".into())),
    };
    if let Some(steps) = args.grid_steps {
        cfg.grid = Some(GridConfig { steps });
    }
    if args.rank_tol.is_some() {
        cfg.tolerances.rank_tol = args.rank_tol;
    }
    if args.feas_tol.is_some() {
        cfg.tolerances.feas_tol = args.feas_tol;
    }
    if let Some(seed) = args.seed {
        let reseed = |sim: &mut SimulationConfig| {
            if let NoiseConfig::Random { seed: s, .. } = &mut sim.noise {
                *s = seed;
            }
        };
        if let Some(sim) = &mut cfg.simulation {
            reseed(sim);
        }
        if let Some(ObservationConfig::Simulation(sim)) = &mut cfg.observation {
            reseed(sim);
        }
    }
    Ok(cfg)
}

/// JSON number, or the strings `"inf"`, `"-inf"`, `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn mat(m: &Mat) -> Value {
    json!(m.to_rows())
}

/// CSV with a `t` column followed by the listed trajectories.
pub fn trajectory_csv(grid: Grid, columns: &[(&str, &VectorTrajectory)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for (prefix, traj) in columns {
        header.extend((1..=traj.dim()).map(|j| format!("{prefix}{j}")));
    }
    let csv_err = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..grid.len() {
        let mut row = vec![format!("{:.16e}", grid.t(i))];
        for (_, traj) in columns {
            row.extend(traj.values[i].iter().map(|x| format!("{x:.16e}")));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn require_functional(exp: &Experiment) -> Result<&crate::observer::Functional> {
    exp.functional
        .as_ref()
        .ok_or_else(|| Error::Invalid("config has no `functional` block".into()))
}

fn cmd_check(exp: &Experiment) -> Result<Outcome> {
    let l = require_functional(exp)?;
    let r = check_feasibility(&exp.system, l, exp.grid, &exp.options)?;
    let oracle = fredholm_check(&exp.system, l, exp.grid, &exp.options)?;
    let report = json!({
        "command": "check",
        "feasible": r.feasible,
        "defect": num(r.defect),
        "threshold": num(r.threshold),
        "p": mat(&r.p),
        "w": mat(&r.w),
        "h_end": r.h_end,
        "ph_end": r.ph_end,
        "w_nullity": r.w_nullspace.cols(),
        "oracle": {
            "feasible": oracle.feasible,
            "adjoint_kernel_dim": oracle.kernel_dim,
            "inner_products": oracle.inner_products,
        },
    });
    Ok(Outcome {
        code: if r.feasible { 0 } else { 2 },
        report,
        table: None,
        text: None,
    })
}

fn cmd_estimate(exp: &Experiment) -> Result<Outcome> {
    let l = require_functional(exp)?;
    match solve_estimator(&exp.system, l, exp.grid, &exp.options)? {
        Estimate::Infinite { compatibility_residual } => Ok(Outcome {
            code: 2,
            report: json!({
                "command": "estimate",
                "sigma_hat": "inf",
                "compatibility_residual": num(compatibility_residual),
            }),
            table: None,
            text: None,
        }),
        Estimate::Finite(e) => {
            let csv = trajectory_csv(exp.grid, &[("u", &e.u_hat), ("p", &e.p_hat), ("z", &e.z_hat)])?;
            Ok(Outcome {
                code: 0,
                report: json!({
                    "command": "estimate",
                    "sigma_hat": num(e.sigma_hat),
                    "compatibility_residual": num(e.compatibility_residual),
                    "coupled_kernel_dim": e.kernel_basis.len(),
                    "u_hat_l2": num(e.u_hat.l2_norm()),
                    "notes": e.notes,
                }),
                table: Some(("trajectory.csv", csv)),
                text: None,
            })
        }
    }
}

fn cmd_reconstruct(exp: &Experiment) -> Result<Outcome> {
    let (y, simulated_x): (Arc<dyn TimeMatrix>, Option<VectorTrajectory>) = match &exp.observation {
        None => return Err(Error::Invalid("config has no `observation` block".into())),
        Some(Observation::Signal(y)) => (y.clone(), None),
        Some(Observation::Simulated(sim)) => {
            // simulate on the refined grid so RK4 midpoints hit samples
            let fine = exp.grid.refined();
            let s = simulate_observation(
                &exp.system,
                &*sim.f,
                sim.kernel_component.as_deref(),
                &sim.noise,
                fine,
                &exp.options,
            )?;
            let y = PiecewiseLinear::new(fine.nodes().collect(), s.y.values)?;
            (Arc::new(y), Some(s.x.coarsen()?))
        }
    };
    let est = solve_reconstruction(&exp.system, &*y, exp.grid, &exp.options)?;
    let truth = match (&exp.truth, simulated_x) {
        (Some(x), _) => Some(VectorTrajectory::sample(&**x, exp.grid)?),
        (None, x) => x,
    };
    let mut report = json!({
        "command": "reconstruct",
        "compatibility_residual": num(est.compatibility_residual),
        "coupled_kernel_dim": est.kernel_basis.len(),
        "x_hat_l2": num(est.x_hat.l2_norm()),
    });
    if let Some(x) = truth {
        let err = x.add_scaled(-1.0, &est.x_hat).l2_norm();
        report["error_norm"] = num(err);
        report["truth_l2"] = num(x.l2_norm());
    }
    if let Some(l) = &exp.functional {
        report["functional_value"] = num(functional_value(l, &est.x_hat)?);
    }
    let csv = trajectory_csv(exp.grid, &[("x", &est.x_hat), ("p", &est.p_hat)])?;
    Ok(Outcome {
        code: 0,
        report,
        table: Some(("trajectory.csv", csv)),
        text: None,
    })
}

fn cmd_simulate(exp: &Experiment) -> Result<Outcome> {
    let sim = match (&exp.simulation, &exp.observation) {
        (Some(sim), _) => sim,
        (None, Some(Observation::Simulated(sim))) => sim,
        _ => return Err(Error::Invalid("config has no `simulation` block".into())),
    };
    let s = simulate_observation(
        &exp.system,
        &*sim.f,
        sim.kernel_component.as_deref(),
        &sim.noise,
        exp.grid,
        &exp.options,
    )?;
    let r = &s.report;
    let report = json!({
        "command": "simulate",
        "f_norm": num(r.f_norm),
        "f_admissible": r.f_admissible,
        "noise_trace_integral": num(r.noise_trace_integral),
        "noise_admissible": r.noise_admissible,
        "kernel_residual": r.kernel_residual.map(num),
        "compatibility_residual": num(r.compatibility_residual),
    });
    let csv = trajectory_csv(exp.grid, &[("y", &s.y)])?;
    Ok(Outcome {
        code: 0,
        report,
        table: Some(("observation.csv", csv)),
        text: None,
    })
}

/// One line of the `examples` table.
#[derive(Debug, Clone)]
pub struct Row {
    pub scenario: &'static str,
    pub quantity: String,
    pub computed: String,
    pub expected: String,
    pub pass: bool,
}

fn row(scenario: &'static str, quantity: impl Into<String>, computed: String, expected: String, pass: bool) -> Row {
    Row {
        scenario,
        quantity: quantity.into(),
        computed,
        expected,
        pass,
    }
}

fn close_row(scenario: &'static str, quantity: &str, computed: &Mat, expected: &Mat, tol: f64) -> Row {
    let err = (computed - expected).max_abs();
    row(
        scenario,
        quantity,
        format!("{:?}", computed.to_rows()),
        format!("{:?} ± {tol:e}", expected.to_rows()),
        err <= tol,
    )
}

fn cmd_examples(name: Option<&str>, args: &CommonArgs) -> Result<Outcome> {
    let names: Vec<&str> = match name {
        Some(n) if BUILTINS.contains(&n) => vec![n],
        Some(n) => {
            return Err(Error::Invalid(format!(
                "unknown example `{n}` (expected one of {})",
                BUILTINS.join(", ")
            )))
        }
        None => BUILTINS.to_vec(),
    };
    let mut rows = Vec::new();
    for n in names {
        let cfg = load_config(&CommonArgs {
            builtin: Some(n.to_string()),
            config: None,
            ..args.clone()
        })?;
        let exp = cfg.build(None)?;
        rows.extend(match n {
            "singular-l1" => worked_rows("singular-l1", &exp, false)?,
            "singular-l2" => worked_rows("singular-l2", &exp, true)?,
            _ => oscillator_rows(&exp)?,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    let mut text = String::new();
    let w = rows.iter().map(|r| r.quantity.len()).max().unwrap_or(0);
    for r in &rows {
        text.push_str(&format!(
            "{:<4}  {:<8}  {:<w$}  computed {}  expected {}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.scenario,
            r.quantity,
            r.computed,
            r.expected,
        ));
    }
    let report = json!({
        "command": "examples",
        "all_pass": all_pass,
        "rows": rows.iter().map(|r| json!({
            "scenario": r.scenario,
            "quantity": r.quantity,
            "computed": r.computed,
            "expected": r.expected,
            "pass": r.pass,
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        code: if all_pass { 0 } else { 1 },
        report,
        table: None,
        text: Some(text),
    })
}

/// `A ≡ [[1,0],[1,0]]`, `H ≡ diag(1,0)` on `[0, 2π]` with `ℓ₁ = (sin t, 1)`
/// (infeasible) or `ℓ₂ = (sin t, cos t)` (feasible, `σ̂ = π`).
pub fn worked_rows(scenario: &'static str, exp: &Experiment, feasible_case: bool) -> Result<Vec<Row>> {
    let sys = &exp.system;
    let l = require_functional(exp)?;
    let grid = exp.grid;
    let mut rows = Vec::new();
    let two_pi = 2.0 * std::f64::consts::PI;
    if !feasible_case {
        for t in [1.0, two_pi] {
            let g = Grid::new(t, grid.steps())?;
            let f = propagate_fundamental(sys.a(), g)?;
            let e = t.exp();
            let expected = Mat::from_rows(&[&[e, 0.0], &[e - 1.0, 1.0]]);
            rows.push(close_row(scenario, &format!("F({t:.4})"), f.last(), &expected, 1e-7));
            let gm = propagate_fundamental(&NegTranspose(sys.a()), g)?;
            let ei = (-t).exp();
            let expected = Mat::from_rows(&[&[ei, ei - 1.0], &[0.0, 1.0]]);
            rows.push(close_row(scenario, &format!("G({t:.4})"), gm.last(), &expected, 1e-7));
        }
    }
    let r = check_feasibility(sys, l, grid, &exp.options)?;
    rows.push(close_row(
        scenario,
        "P",
        &r.p,
        &Mat::from_rows(&[&[0.0, 0.0], &[0.0, 1.0]]),
        1e-8,
    ));
    rows.push(close_row(scenario, "W", &r.w, &Mat::zeros(2, 2), 1e-8));
    let h_expected = if feasible_case {
        vec![0.0, 0.0]
    } else {
        vec![0.5 - (-two_pi).exp() / 2.0 - two_pi, two_pi]
    };
    rows.push(close_row(
        scenario,
        "h(2π)",
        &Mat::column_vector(&r.h_end),
        &Mat::column_vector(&h_expected),
        1e-6,
    ));
    rows.push(row(
        scenario,
        "verdict",
        feasible_word(r.feasible).into(),
        feasible_word(feasible_case).into(),
        r.feasible == feasible_case,
    ));
    let oracle = fredholm_check(sys, l, grid, &exp.options)?;
    rows.push(row(
        scenario,
        "Fredholm verdict",
        feasible_word(oracle.feasible).into(),
        feasible_word(feasible_case).into(),
        oracle.feasible == feasible_case,
    ));
    let sigma = solve_estimator(sys, l, grid, &exp.options)?.sigma_hat();
    if feasible_case {
        let pi = std::f64::consts::PI;
        rows.push(row(
            scenario,
            "sigma_hat",
            format!("{sigma:.10}"),
            format!("{pi:.10} ± 1e-6"),
            (sigma - pi).abs() <= 1e-6,
        ));
    } else {
        rows.push(row(
            scenario,
            "sigma_hat",
            format!("{sigma}"),
            "inf".into(),
            sigma.is_infinite(),
        ));
    }
    Ok(rows)
}

fn feasible_word(f: bool) -> &'static str {
    if f {
        "feasible"
    } else {
        "infeasible"
    }
}

/// Harmonic oscillator: kernel diagnostics and reconstruction error against
/// the reference trajectory.
pub fn oscillator_rows(exp: &Experiment) -> Result<Vec<Row>> {
    const S: &str = "oscillator";
    let sys = &exp.system;
    let mut rows = Vec::new();
    let d = observability_diagnostic(sys, exp.grid, &exp.options)?;
    rows.push(row(
        S,
        "kernel dim",
        d.kernel_dim.to_string(),
        "2".into(),
        d.kernel_dim == 2,
    ));
    let blind = d.observed_norms.iter().copied().fold(f64::INFINITY, f64::min);
    rows.push(row(
        S,
        "min ‖Hψ‖₂",
        format!("{blind:.3e}"),
        "≤ 1e-6".into(),
        blind <= 1e-6,
    ));
    let energy = d.principal_energies.first().copied().unwrap_or(0.0);
    let expected = 2.0 * std::f64::consts::PI * (1.0 / 400.0 + 0.25);
    rows.push(row(
        S,
        "max ‖Hψ‖₂²",
        format!("{energy:.8}"),
        format!("{expected:.8} ± 1e-4"),
        (energy - expected).abs() <= 1e-4,
    ));
    let y = match &exp.observation {
        Some(Observation::Signal(y)) => y.clone(),
        _ => return Err(Error::Invalid("oscillator needs an expression observation".into())),
    };
    let truth = exp
        .truth
        .as_ref()
        .ok_or_else(|| Error::Invalid("oscillator needs a truth block".into()))?;
    let est = solve_reconstruction(sys, &*y, exp.grid, &exp.options)?;
    let x = VectorTrajectory::sample(&**truth, exp.grid)?;
    let err = x.add_scaled(-1.0, &est.x_hat).l2_norm();
    rows.push(row(
        S,
        "‖x − x̂‖₂",
        format!("{err:.5}"),
        "1.85877 (accept [1.83, 1.90])".into(),
        (1.83..=1.90).contains(&err),
    ));
    Ok(rows)
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
