//! delayhopf: regime classification, critical-delay location, normal-form
//! evaluation and direct simulation for scalar equations with two delays
//! at a fixed difference.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 mathematical refusal
//! (boundary regime, no crossing, tau beyond the tangency threshold),
//! 3 internal-consistency failure.

mod config;
mod output;

use std::fs::File;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use delayhopf::{
    critical_delays_with, hopf_normal_form_with, omega_window, regime_classify, theorem_conditions,
    ddesim, Error as HopfError, LinearizedModel, ModelSource, Tolerances,
};
use serde_json::json;

use config::{
    load_file, parse_grid, parse_history, resolve_model, tolerances_from_env, FileConfig,
    ModelInputs, ResolvedModel,
};
use output::{clause_json, crossing_json, fmt12, normal_form_json, num, regime_json, value_to_csv, SCHEMA};

pub struct CliError {
    message: String,
    code: i32,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: 1 }
    }
}

impl From<HopfError> for CliError {
    fn from(e: HopfError) -> Self {
        let code = match &e {
            // user-facing input problems
            HopfError::InvalidInput(_) | HopfError::NonFinite(_) | HopfError::StepExceedsDelay { .. } => 1,
            // internal-consistency failures
            HopfError::InternalInconsistency(_)
            | HopfError::NonUniqueCrossing(_)
            | HopfError::DegenerateDerivative
            | HopfError::InconsistentCrossing(_)
            | HopfError::ContourRootCollision(_) => 3,
            // mathematical refusals
            _ => 2,
        };
        Self { message: e.to_string(), code }
    }
}

#[derive(Parser)]
#[command(
    name = "delayhopf",
    version,
    about = "Stability and Hopf-bifurcation analysis for two-delay scalar equations with fixed delay difference"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the regime and report the crossing window and tau* bound.
    Analyze(CommonOpts),
    /// Locate the critical delays and evaluate the Hopf normal form.
    Hopf(CommonOpts),
    /// Integrate the model and write trajectory CSV plus diagnostics JSON.
    Simulate(SimulateOpts),
    /// Sweep r (simulation verdicts) or tau (Hopf data) over a grid.
    Sweep(SweepOpts),
}

#[derive(Args)]
struct CommonOpts {
    /// TOML config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model kind: nicholson | mackey-glass | custom.
    #[arg(long)]
    model: Option<String>,
    /// Mortality/loss rate (nicholson, mackey-glass).
    #[arg(long)]
    delta: Option<f64>,
    /// Maximum production rate P (nicholson, mackey-glass).
    #[arg(long = "cap-p")]
    cap_p: Option<f64>,
    /// Harvesting rate H (nicholson, mackey-glass).
    #[arg(long)]
    harvest: Option<f64>,
    /// Hill exponent n (mackey-glass).
    #[arg(long = "hill-n")]
    hill_n: Option<f64>,
    /// Fixed delay difference tau = r - sigma.
    #[arg(long)]
    tau: Option<f64>,
    /// Undelayed coefficient (custom model).
    #[arg(long)]
    a: Option<f64>,
    /// r-delayed coefficient (custom model).
    #[arg(long)]
    b: Option<f64>,
    /// sigma-delayed coefficient (custom model).
    #[arg(long)]
    c: Option<f64>,
    /// Equilibrium value (custom model, default 0).
    #[arg(long)]
    equilibrium: Option<f64>,
    /// Output format: json | csv.
    #[arg(long)]
    format: Option<String>,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateOpts {
    #[command(flatten)]
    common: CommonOpts,
    /// Delay r; sigma is r - tau.
    #[arg(long)]
    r: Option<f64>,
    /// Integration horizon.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Fixed step; defaults to min(r, sigma, 0.1)/4.
    #[arg(long)]
    step: Option<f64>,
    /// History preset: phi1 | phi2 | eq | eq:<offset> | const:<value>.
    #[arg(long)]
    history: Option<String>,
    /// Also write a dense-sample CSV on this uniform grid step.
    #[arg(long = "dense-step")]
    dense_step: Option<f64>,
}

#[derive(Args)]
struct SweepOpts {
    #[command(flatten)]
    common: CommonOpts,
    /// Grid spec, e.g. r=0.45:0.65:0.05 or tau=0,0.2,0.3782.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    history: Option<String>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let tol = tolerances_from_env()?;
    match cli.cmd {
        Cmd::Analyze(opts) => cmd_analyze(opts, &tol),
        Cmd::Hopf(opts) => cmd_hopf(opts, &tol),
        Cmd::Simulate(opts) => cmd_simulate(opts),
        Cmd::Sweep(opts) => cmd_sweep(opts, &tol),
    }
}

fn load_config(opts: &CommonOpts) -> Result<(FileConfig, ResolvedModel), CliError> {
    let file = match &opts.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let inputs = ModelInputs {
        model: opts.model.clone(),
        tau: opts.tau,
        delta: opts.delta,
        cap_p: opts.cap_p,
        harvest: opts.harvest,
        hill_n: opts.hill_n,
        a: opts.a,
        b: opts.b,
        c: opts.c,
        equilibrium: opts.equilibrium,
    };
    let resolved = resolve_model(&file, &inputs)?;
    Ok((file, resolved))
}

fn emit(opts: &CommonOpts, file: &FileConfig, doc: &serde_json::Value) -> Result<(), CliError> {
    let format = opts
        .format
        .clone()
        .or_else(|| file.output.as_ref().and_then(|o| o.format.clone()))
        .unwrap_or_else(|| "json".to_string());
    let text = match format.as_str() {
        "json" => format!("{}\n", serde_json::to_string_pretty(doc).expect("serializable")),
        "csv" => value_to_csv(doc),
        other => return Err(CliError::usage(format!("unknown format `{other}`"))),
    };
    let out = opts.out.clone().or_else(|| {
        file.output.as_ref().and_then(|o| o.out.as_ref()).map(PathBuf::from)
    });
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
    }
}

fn model_json(resolved: &ResolvedModel) -> serde_json::Value {
    let p = &resolved.lin.params;
    json!({
        "name": resolved.model_name,
        "params": { "a": num(p.a), "b": num(p.b), "c": num(p.c), "tau": num(p.tau) },
        "equilibrium": num(resolved.lin.equilibrium),
        "zero_equilibrium_only": resolved.zero_equilibrium_only,
    })
}

fn cmd_analyze(opts: CommonOpts, _tol: &Tolerances) -> Result<i32, CliError> {
    let (file, resolved) = load_config(&opts)?;
    let params = resolved.lin.params;
    let regime = regime_classify(&params)?;
    let clause = theorem_conditions(&resolved.lin).ok();
    let window = omega_window(&params).ok();
    let tau_star_bound = window.map(|w| w.lo / params.bc().abs());

    let doc = json!({
        "schema": SCHEMA,
        "command": "analyze",
        "model": model_json(&resolved),
        "regime": regime_json(&regime),
        "clause": clause.as_ref().map(clause_json),
        "omega_window": window.map(|w| json!({ "lo": num(w.lo), "hi": num(w.hi) })),
        "tau_star_lower_bound": tau_star_bound.map(num),
    });
    emit(&opts, &file, &doc)?;
    Ok(match regime.kind {
        delayhopf::RegimeKind::Boundary | delayhopf::RegimeKind::DegenerateZeroRoot => 2,
        _ => 0,
    })
}

fn cmd_hopf(opts: CommonOpts, tol: &Tolerances) -> Result<i32, CliError> {
    let (file, resolved) = load_config(&opts)?;
    if resolved.zero_equilibrium_only {
        return Err(CliError::from(HopfError::NoPositiveEquilibrium));
    }
    let lin = &resolved.lin;
    let crossing = critical_delays_with(&lin.params, tol)?;
    let nf = hopf_normal_form_with(&lin.params, &lin.coeffs, crossing.r0, crossing.omega_star, tol)?;
    let regime = regime_classify(&lin.params)?;
    let doc = json!({
        "schema": SCHEMA,
        "command": "hopf",
        "model": model_json(&resolved),
        "regime": regime_json(&regime),
        "crossing": crossing_json(&crossing),
        "normal_form": normal_form_json(&nf),
    });
    emit(&opts, &file, &doc)?;
    Ok(0)
}

fn cmd_simulate(opts: SimulateOpts) -> Result<i32, CliError> {
    let (file, resolved) = load_config(&opts.common)?;
    let lin = &resolved.lin;
    let sim = file.simulate.as_ref();
    let r = opts
        .r
        .or(sim.and_then(|s| s.r))
        .ok_or_else(|| CliError::usage("missing delay --r"))?;
    let sigma = r - lin.params.tau;
    if sigma < 0.0 {
        return Err(CliError::usage(format!("sigma = r - tau = {sigma} is negative")));
    }
    let t_end = opts.t_end.or(sim.and_then(|s| s.t_end)).unwrap_or(60.0);
    let step = opts
        .step
        .or(sim.and_then(|s| s.step))
        .unwrap_or_else(|| ddesim::default_step(r, sigma));
    let history_spec = opts
        .history
        .clone()
        .or_else(|| sim.and_then(|s| s.history.clone()))
        .unwrap_or_else(|| "phi1".to_string());
    let history = parse_history(&history_spec, lin.equilibrium)?;
    let dense_step = opts.dense_step.or(sim.and_then(|s| s.dense_step));

    let out = opts
        .common
        .out
        .clone()
        .or_else(|| file.output.as_ref().and_then(|o| o.out.as_ref()).map(PathBuf::from))
        .ok_or_else(|| CliError::usage("simulate needs --out as the output base path"))?;

    let traj = ddesim::integrate(&*lin.rhs_arc(), r, sigma, &history, t_end, step)?;
    let diag = ddesim::diagnose(&traj, lin.equilibrium, 0.5);

    let csv_path = out.with_extension("csv");
    let mut f = File::create(&csv_path)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", csv_path.display())))?;
    traj.write_csv(&mut f).map_err(|e| CliError::usage(e.to_string()))?;

    if let Some(ds) = dense_step {
        if ds.is_nan() || ds <= 0.0 {
            return Err(CliError::usage("dense step must be positive".to_string()));
        }
        let dense_path = out.with_extension("dense.csv");
        let mut f = File::create(&dense_path)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dense_path.display())))?;
        traj.write_dense_csv(ds, &mut f).map_err(|e| CliError::usage(e.to_string()))?;
    }

    let diag_doc = json!({
        "schema": SCHEMA,
        "command": "simulate",
        "model": model_json(&resolved),
        "r": num(r),
        "sigma": num(sigma),
        "t_end": num(t_end),
        "step": num(step),
        "history": history_spec,
        "diagnostics": {
            "verdict": diag.verdict.to_string(),
            "amplitude": num(diag.amplitude),
            "period_estimate": diag.period_estimate.map(num),
            "equilibrium_residual": num(diag.equilibrium_residual),
            "negativity_detected": diag.negativity_detected,
        },
    });
    let diag_path = out.with_extension("diag.json");
    std::fs::write(
        &diag_path,
        format!("{}\n", serde_json::to_string_pretty(&diag_doc).expect("serializable")),
    )
    .map_err(|e| CliError::usage(format!("cannot write {}: {e}", diag_path.display())))?;
    println!("wrote {} and {}", csv_path.display(), diag_path.display());
    Ok(0)
}

fn relinearize(lin: &LinearizedModel, tau: f64) -> Result<LinearizedModel, CliError> {
    match lin.source {
        ModelSource::Nicholson(m) => {
            if lin.equilibrium == 0.0 {
                Ok(delayhopf::nicholson_linearize_zero(&m, tau)?)
            } else {
                Ok(delayhopf::nicholson_linearize(&m, tau)?)
            }
        }
        ModelSource::MackeyGlass(m) => Ok(delayhopf::mackey_linearize(&m, tau)?),
        ModelSource::Custom => {
            let p = lin.params;
            let params = delayhopf::SystemParams::new(p.a, p.b, p.c, tau)?;
            Ok(LinearizedModel::custom(params, lin.coeffs, lin.equilibrium)?)
        }
    }
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn cmd_sweep(opts: SweepOpts, tol: &Tolerances) -> Result<i32, CliError> {
    let (file, resolved) = load_config(&opts.common)?;
    let grid_spec = opts
        .grid
        .clone()
        .or_else(|| file.sweep.as_ref().and_then(|s| s.grid.clone()))
        .ok_or_else(|| CliError::usage("missing --grid"))?;
    let (var, values) = parse_grid(&grid_spec)?;
    let t_end = opts
        .t_end
        .or_else(|| file.sweep.as_ref().and_then(|s| s.t_end))
        .unwrap_or(100.0);
    let history_spec = opts
        .history
        .clone()
        .or_else(|| file.sweep.as_ref().and_then(|s| s.history.clone()))
        .unwrap_or_else(|| "phi1".to_string());

    let format = opts
        .common
        .format
        .clone()
        .or_else(|| file.output.as_ref().and_then(|o| o.format.clone()))
        .unwrap_or_else(|| "csv".to_string());

    let text = if var == "r" {
        let history = parse_history(&history_spec, resolved.lin.equilibrium)?;
        let rows = ddesim::bifurcation_scan(&resolved.lin, &values, &history, t_end)?;
        render_r_rows(&rows, &format)?
    } else {
        let rows = tau_sweep(&resolved.lin, &values, tol);
        render_tau_rows(&values, &rows, &format)?
    };

    match opts.common.out.clone().or_else(|| {
        file.output.as_ref().and_then(|o| o.out.as_ref()).map(PathBuf::from)
    }) {
        None => print!("{text}"),
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?,
    }
    Ok(0)
}

struct TauRow {
    crossing: Option<(delayhopf::CrossingData, delayhopf::NormalFormResult)>,
    error: Option<String>,
}

fn tau_sweep(lin: &LinearizedModel, taus: &[f64], tol: &Tolerances) -> Vec<TauRow> {
    use rayon::prelude::*;
    taus.par_iter()
        .map(|&tau| {
            let work = || -> Result<_, HopfError> {
                let lin_tau = relinearize(lin, tau).map_err(|e| HopfError::InvalidInput(e.message))?;
                let d = critical_delays_with(&lin_tau.params, tol)?;
                let nf = hopf_normal_form_with(
                    &lin_tau.params,
                    &lin_tau.coeffs,
                    d.r0,
                    d.omega_star,
                    tol,
                )?;
                Ok((d, nf))
            };
            match work() {
                Ok(pair) => TauRow { crossing: Some(pair), error: None },
                Err(e) => TauRow { crossing: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}

fn render_r_rows(rows: &[ddesim::ScanRow], format: &str) -> Result<String, CliError> {
    match format {
        "csv" => {
            let mut out = String::from(
                "index,r,sigma,verdict,amplitude,period,equilibrium_residual,negativity,error\n",
            );
            for (i, row) in rows.iter().enumerate() {
                let (verdict, amp, period, resid, neg) = match &row.diagnostics {
                    Some(d) => (
                        d.verdict.to_string(),
                        fmt12(d.amplitude),
                        d.period_estimate.map(fmt12).unwrap_or_default(),
                        fmt12(d.equilibrium_residual),
                        d.negativity_detected.to_string(),
                    ),
                    None => Default::default(),
                };
                let err = row.error.as_deref().map(csv_quote).unwrap_or_default();
                out.push_str(&format!(
                    "{i},{},{},{verdict},{amp},{period},{resid},{neg},{err}\n",
                    fmt12(row.r),
                    fmt12(row.sigma),
                ));
            }
            Ok(out)
        }
        "json" => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    json!({
                        "index": i,
                        "r": num(row.r),
                        "sigma": num(row.sigma),
                        "diagnostics": row.diagnostics.as_ref().map(|d| json!({
                            "verdict": d.verdict.to_string(),
                            "amplitude": num(d.amplitude),
                            "period_estimate": d.period_estimate.map(num),
                            "equilibrium_residual": num(d.equilibrium_residual),
                            "negativity_detected": d.negativity_detected,
                        })),
                        "error": row.error,
                    })
                })
                .collect();
            Ok(format!(
                "{}\n",
                serde_json::to_string_pretty(&json!({ "schema": SCHEMA, "command": "sweep", "rows": items }))
                    .expect("serializable")
            ))
        }
        other => Err(CliError::usage(format!("unknown format `{other}`"))),
    }
}

fn render_tau_rows(taus: &[f64], rows: &[TauRow], format: &str) -> Result<String, CliError> {
    match format {
        "csv" => {
            let mut out = String::from(
                "index,tau,omega_star,r0,sigma0,mu_prime,k1,k2,direction,orbit_stability,period,error\n",
            );
            for (i, (tau, row)) in taus.iter().zip(rows).enumerate() {
                match &row.crossing {
                    Some((d, nf)) => out.push_str(&format!(
                        "{i},{},{},{},{},{},{},{},{},{},{},\n",
                        fmt12(*tau),
                        fmt12(d.omega_star),
                        fmt12(d.r0),
                        fmt12(d.sigma0),
                        fmt12(d.mu_prime),
                        fmt12(nf.k1),
                        fmt12(nf.k2),
                        nf.direction,
                        nf.orbit_stability,
                        fmt12(nf.period),
                    )),
                    None => out.push_str(&format!(
                        "{i},{},,,,,,,,,,{}\n",
                        fmt12(*tau),
                        row.error.as_deref().map(csv_quote).unwrap_or_default(),
                    )),
                }
            }
            Ok(out)
        }
        "json" => {
            let items: Vec<serde_json::Value> = taus
                .iter()
                .zip(rows)
                .enumerate()
                .map(|(i, (tau, row))| match &row.crossing {
                    Some((d, nf)) => json!({
                        "index": i,
                        "tau": num(*tau),
                        "crossing": crossing_json(d),
                        "normal_form": normal_form_json(nf),
                        "error": serde_json::Value::Null,
                    }),
                    None => json!({
                        "index": i,
                        "tau": num(*tau),
                        "crossing": serde_json::Value::Null,
                        "normal_form": serde_json::Value::Null,
                        "error": row.error,
                    }),
                })
                .collect();
            Ok(format!(
                "{}\n",
                serde_json::to_string_pretty(&json!({ "schema": SCHEMA, "command": "sweep", "rows": items }))
                    .expect("serializable")
            ))
        }
        other => Err(CliError::usage(format!("unknown format `{other}`"))),
    }
}
