//! Config-file parsing (TOML) and merging with command-line overrides.
//! Unknown keys are rejected so batch runs fail loudly on typos.

use std::path::Path;
use std::sync::Arc;

use delayhopf::{
    mackey_linearize, nicholson_equilibrium, nicholson_linearize, nicholson_linearize_zero,
    HistorySpec, LinearizedModel, MackeyGlassModel, NicholsonModel, SystemParams, TaylorCoeffs,
    Tolerances,
};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub tau: Option<f64>,
    pub nicholson: Option<NicholsonBlock>,
    #[serde(rename = "mackey-glass")]
    pub mackey_glass: Option<MackeyBlock>,
    pub custom: Option<CustomBlock>,
    pub simulate: Option<SimulateBlock>,
    pub sweep: Option<SweepBlock>,
    pub output: Option<OutputBlock>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NicholsonBlock {
    pub delta: Option<f64>,
    pub cap_p: Option<f64>,
    pub harvest: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MackeyBlock {
    pub delta: Option<f64>,
    pub cap_p: Option<f64>,
    pub harvest: Option<f64>,
    pub hill_n: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomBlock {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub equilibrium: Option<f64>,
    pub coeffs: Option<CoeffsBlock>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsBlock {
    #[serde(default)] pub a11: f64,
    #[serde(default)] pub a22: f64,
    #[serde(default)] pub a33: f64,
    #[serde(default)] pub a12: f64,
    #[serde(default)] pub a13: f64,
    #[serde(default)] pub a23: f64,
    #[serde(default)] pub b111: f64,
    #[serde(default)] pub b222: f64,
    #[serde(default)] pub b333: f64,
    #[serde(default)] pub b112: f64,
    #[serde(default)] pub b113: f64,
    #[serde(default)] pub b122: f64,
    #[serde(default)] pub b133: f64,
    #[serde(default)] pub b123: f64,
    #[serde(default)] pub b223: f64,
    #[serde(default)] pub b233: f64,
}

impl From<CoeffsBlock> for TaylorCoeffs {
    fn from(c: CoeffsBlock) -> Self {
        TaylorCoeffs {
            a11: c.a11, a22: c.a22, a33: c.a33, a12: c.a12, a13: c.a13, a23: c.a23,
            b111: c.b111, b222: c.b222, b333: c.b333, b112: c.b112, b113: c.b113,
            b122: c.b122, b133: c.b133, b123: c.b123, b223: c.b223, b233: c.b233,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub r: Option<f64>,
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub history: Option<String>,
    pub dense_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub grid: Option<String>,
    pub t_end: Option<f64>,
    pub history: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub format: Option<String>,
    pub out: Option<String>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
}

/// Fully validated model: the linearization plus a description for reports.
pub struct ResolvedModel {
    pub lin: LinearizedModel,
    pub model_name: &'static str,
    /// Nicholson with no positive equilibrium falls back to the zero one.
    pub zero_equilibrium_only: bool,
}

pub struct ModelInputs {
    pub model: Option<String>,
    pub tau: Option<f64>,
    pub delta: Option<f64>,
    pub cap_p: Option<f64>,
    pub harvest: Option<f64>,
    pub hill_n: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub equilibrium: Option<f64>,
}

fn require(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::usage(format!("missing required parameter `{name}`")))
}

pub fn resolve_model(file: &FileConfig, flags: &ModelInputs) -> Result<ResolvedModel, CliError> {
    let model = flags
        .model
        .clone()
        .or_else(|| file.model.clone())
        .ok_or_else(|| CliError::usage("no model given (use --model or the config file)"))?;
    let tau = flags.tau.or(file.tau);
    let tau = require(tau, "tau")?;

    match model.as_str() {
        "nicholson" => {
            let blk = file.nicholson.as_ref();
            let delta = require(flags.delta.or(blk.and_then(|b| b.delta)), "delta")?;
            let cap_p = require(flags.cap_p.or(blk.and_then(|b| b.cap_p)), "cap-p")?;
            let harvest = require(flags.harvest.or(blk.and_then(|b| b.harvest)), "harvest")?;
            let m = NicholsonModel::new(delta, cap_p, harvest).map_err(CliError::from)?;
            match nicholson_equilibrium(&m) {
                Ok(_) => Ok(ResolvedModel {
                    lin: nicholson_linearize(&m, tau).map_err(CliError::from)?,
                    model_name: "nicholson",
                    zero_equilibrium_only: false,
                }),
                Err(delayhopf::Error::NoPositiveEquilibrium) => Ok(ResolvedModel {
                    lin: nicholson_linearize_zero(&m, tau).map_err(CliError::from)?,
                    model_name: "nicholson",
                    zero_equilibrium_only: true,
                }),
                Err(e) => Err(e.into()),
            }
        }
        "mackey-glass" => {
            let blk = file.mackey_glass.as_ref();
            let delta = require(flags.delta.or(blk.and_then(|b| b.delta)), "delta")?;
            let cap_p = require(flags.cap_p.or(blk.and_then(|b| b.cap_p)), "cap-p")?;
            let harvest = require(flags.harvest.or(blk.and_then(|b| b.harvest)), "harvest")?;
            let hill_n = require(flags.hill_n.or(blk.and_then(|b| b.hill_n)), "hill-n")?;
            let m = MackeyGlassModel::new(delta, cap_p, harvest, hill_n).map_err(CliError::from)?;
            Ok(ResolvedModel {
                lin: mackey_linearize(&m, tau).map_err(CliError::from)?,
                model_name: "mackey-glass",
                zero_equilibrium_only: false,
            })
        }
        "custom" => {
            let blk = file.custom.as_ref();
            let a = require(flags.a.or(blk.and_then(|b| b.a)), "a")?;
            let b = require(flags.b.or(blk.and_then(|b| b.b)), "b")?;
            let c = require(flags.c.or(blk.and_then(|b| b.c)), "c")?;
            let eq = flags.equilibrium.or(blk.and_then(|b| b.equilibrium)).unwrap_or(0.0);
            let coeffs: TaylorCoeffs =
                blk.and_then(|b| b.coeffs).map(TaylorCoeffs::from).unwrap_or_default();
            let params = SystemParams::new(a, b, c, tau).map_err(CliError::from)?;
            Ok(ResolvedModel {
                lin: LinearizedModel::custom(params, coeffs, eq).map_err(CliError::from)?,
                model_name: "custom",
                zero_equilibrium_only: false,
            })
        }
        other => Err(CliError::usage(format!(
            "unknown model `{other}` (expected nicholson, mackey-glass or custom)"
        ))),
    }
}

/// Named history presets plus `const:<v>` and `eq:<offset>` forms.
pub fn parse_history(spec: &str, equilibrium: f64) -> Result<HistorySpec, CliError> {
    match spec {
        "phi1" => Ok(HistorySpec::Formula(Arc::new(|t: f64| t.sin() + 2.0))),
        "phi2" => Ok(HistorySpec::Formula(Arc::new(|t: f64| 1.3 * (t.cos() + 1.0)))),
        "eq" => Ok(HistorySpec::Constant(equilibrium)),
        other => {
            if let Some(v) = other.strip_prefix("const:") {
                let v: f64 = v
                    .parse()
                    .map_err(|_| CliError::usage(format!("bad constant history `{other}`")))?;
                Ok(HistorySpec::Constant(v))
            } else if let Some(d) = other.strip_prefix("eq:") {
                let d: f64 = d
                    .parse()
                    .map_err(|_| CliError::usage(format!("bad equilibrium-offset history `{other}`")))?;
                Ok(HistorySpec::Constant(equilibrium + d))
            } else {
                Err(CliError::usage(format!(
                    "unknown history `{other}` (expected phi1, phi2, eq, eq:<offset> or const:<value>)"
                )))
            }
        }
    }
}

/// Grid spec: `var=start:stop:step` or `var=v1,v2,...` with var `r` or `tau`.
pub fn parse_grid(spec: &str) -> Result<(String, Vec<f64>), CliError> {
    let (var, rest) = spec
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("grid `{spec}` must look like r=0.4:0.7:0.05")))?;
    let var = var.trim();
    if var != "r" && var != "tau" {
        return Err(CliError::usage(format!("grid variable must be r or tau, got `{var}`")));
    }
    let parse = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::usage(format!("bad grid number `{s}` in `{spec}`")))
    };
    let values: Vec<f64> = if rest.contains(':') {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!("range grid `{spec}` needs start:stop:step")));
        }
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step.is_nan() || step <= 0.0 {
            return Err(CliError::usage("grid step must be positive".to_string()));
        }
        let n = ((stop - start) / step + 1e-9).floor() as i64;
        (0..=n.max(-1)).map(|i| start + step * i as f64).collect()
    } else {
        rest.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse)
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(CliError::usage(format!("grid `{spec}` is empty")));
    }
    Ok((var.to_string(), values))
}

/// `DELAYHOPF_TOL` overrides the residual scale of the tolerance bundle.
pub fn tolerances_from_env() -> Result<Tolerances, CliError> {
    match std::env::var("DELAYHOPF_TOL") {
        Err(_) => Ok(Tolerances::default()),
        Ok(v) => {
            let x: f64 = v
                .parse()
                .map_err(|_| CliError::usage(format!("DELAYHOPF_TOL=`{v}` is not a number")))?;
            if x.is_nan() || x <= 0.0 || x.is_infinite() {
                return Err(CliError::usage("DELAYHOPF_TOL must be a positive number".to_string()));
            }
            Ok(Tolerances::with_residual(x))
        }
    }
}
