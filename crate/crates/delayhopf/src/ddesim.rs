//! Fixed-step RK4 integration of the two-delay scalar equation by the
//! method of steps, with cubic-Hermite dense output for delayed lookups,
//! oscillation diagnostics, and a bifurcation scan over the delay `r`.
//!
//! Propagated derivative discontinuities (`i r + j sigma`, order <= 3) are
//! inserted as mandatory step endpoints, so each RK4 step integrates a
//! smooth piece.

use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{LinearizedModel, RhsFn};

/// Initial data on `[-max(r, sigma), 0]`.
#[derive(Clone)]
pub enum HistorySpec {
    Constant(f64),
    /// Piecewise-cubic interpolation through the samples; clamped outside.
    Sampled { times: Vec<f64>, values: Vec<f64> },
    Formula(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for HistorySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HistorySpec::Constant(v) => write!(f, "Constant({v})"),
            HistorySpec::Sampled { times, .. } => write!(f, "Sampled({} points)", times.len()),
            HistorySpec::Formula(_) => write!(f, "Formula(..)"),
        }
    }
}

impl HistorySpec {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            HistorySpec::Constant(v) => *v,
            HistorySpec::Formula(f) => f(t),
            HistorySpec::Sampled { times, values } => {
                if t <= times[0] {
                    return values[0];
                }
                if t >= *times.last().unwrap() {
                    return *values.last().unwrap();
                }
                let i = times.partition_point(|&s| s <= t) - 1;
                let i = i.min(times.len() - 2);
                let (t0, t1) = (times[i], times[i + 1]);
                let (y0, y1) = (values[i], values[i + 1]);
                // finite-difference slopes, one-sided at the ends
                let m0 = if i == 0 {
                    (y1 - y0) / (t1 - t0)
                } else {
                    (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1])
                };
                let m1 = if i + 2 == times.len() {
                    (y1 - y0) / (t1 - t0)
                } else {
                    (values[i + 2] - values[i]) / (times[i + 2] - times[i])
                };
                hermite(t, t0, t1, y0, y1, m0, m1)
            }
        }
    }

    fn validate(&self, span_start: f64) -> Result<()> {
        if let HistorySpec::Sampled { times, values } = self {
            if times.len() < 2 || times.len() != values.len() {
                return Err(Error::InvalidInput(
                    "sampled history needs at least two matching (time, value) pairs".into(),
                ));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidInput("sampled history times must be increasing".into()));
            }
        }
        // sample the whole span for finiteness
        for i in 0..=64 {
            let t = span_start + (0.0 - span_start) * i as f64 / 64.0;
            if !self.eval(t).is_finite() {
                return Err(Error::NonFinite("history"));
            }
        }
        Ok(())
    }
}

fn hermite(t: f64, t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let omt = 1.0 - s;
    (1.0 + 2.0 * s) * omt * omt * y0
        + s * omt * omt * h * d0
        + s2 * (3.0 - 2.0 * s) * y1
        + s2 * (s - 1.0) * h * d1
}

/// Dense numerical solution: node values plus per-interval cubic Hermite
/// data, evaluable anywhere in `[-max(r, sigma), t_end]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    nodes: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
    history: HistorySpec,
    hist_start: f64,
}

impl Trajectory {
    /// Wraps externally produced samples (times strictly increasing,
    /// derivatives at the nodes) for use with the diagnostics.
    pub fn from_samples(nodes: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() || nodes.len() != derivs.len() {
            return Err(Error::InvalidInput("from_samples: need matching vectors of length >= 2".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("from_samples: times must be strictly increasing".into()));
        }
        if values.iter().chain(derivs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("from_samples"));
        }
        let v0 = values[0];
        let t0 = nodes[0];
        Ok(Self { nodes, values, derivs, history: HistorySpec::Constant(v0), hist_start: t0 })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub fn start_time(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Dense evaluation; history on `[-max(r, sigma), 0]`, cubic Hermite on
    /// the computed segments, clamped at the ends.
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.nodes[0] {
            return self.history.eval(t.max(self.hist_start));
        }
        if t >= self.end_time() {
            return *self.values.last().unwrap();
        }
        let i = self.nodes.partition_point(|&s| s <= t) - 1;
        hermite(
            t,
            self.nodes[i],
            self.nodes[i + 1],
            self.values[i],
            self.values[i + 1],
            self.derivs[i],
            self.derivs[i + 1],
        )
    }

    /// Node-resolution CSV `(t, x)` with 12 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "t,x")?;
        for (t, x) in self.nodes.iter().zip(&self.values) {
            writeln!(w, "{t:.11e},{x:.11e}")?;
        }
        Ok(())
    }

    /// Uniform-grid CSV sampled from the dense output.
    pub fn write_dense_csv<W: Write>(&self, step: f64, w: &mut W) -> io::Result<()> {
        writeln!(w, "t,x")?;
        let t_end = self.end_time();
        let n = ((t_end - self.nodes[0]) / step).ceil().max(1.0) as usize;
        for i in 0..=n {
            let t = (self.nodes[0] + i as f64 * step).min(t_end);
            writeln!(w, "{:.11e},{:.11e}", t, self.eval(t))?;
        }
        Ok(())
    }
}

fn delay_step_limit(r: f64, sigma: f64) -> f64 {
    let mut limit: f64 = 0.1;
    if r > 0.0 {
        limit = limit.min(r);
    }
    if sigma > 0.0 {
        limit = limit.min(sigma);
    }
    limit / 4.0
}

/// Largest admissible fixed step for the given delays.
pub fn default_step(r: f64, sigma: f64) -> f64 {
    delay_step_limit(r, sigma)
}

fn breakpoints(r: f64, sigma: f64, t_end: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    for i in 0..=3u32 {
        for j in 0..=3u32 {
            if i + j >= 1 && i + j <= 3 {
                let t = i as f64 * r + j as f64 * sigma;
                if t > 0.0 && t < t_end {
                    pts.push(t);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t_end.max(1.0));
    pts.push(t_end);
    pts
}

/// Integrates `x'(t) = rhs(x(t), x(t-r), x(t-sigma))` from the history by
/// classical RK4 with dense-output delayed lookups.
///
/// Requires `0 < h <= min(r, sigma, 0.1)/4` over the positive delays, so
/// the delayed stage arguments always land in completed territory or the
/// history.
pub fn integrate(
    rhs: &RhsFn,
    r: f64,
    sigma: f64,
    history: &HistorySpec,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    if !(r >= 0.0 && sigma >= 0.0 && r.is_finite() && sigma.is_finite()) {
        return Err(Error::InvalidInput("delays must be nonnegative and finite".into()));
    }
    if t_end.is_nan() || t_end <= 0.0 || t_end.is_infinite() {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    let limit = delay_step_limit(r, sigma);
    if h.is_nan() || h <= 0.0 || h > limit * (1.0 + 1e-12) {
        return Err(Error::StepExceedsDelay { h, limit });
    }
    let max_delay = r.max(sigma);
    history.validate(-max_delay)?;

    let cap = (t_end / h).ceil() as usize + 64;
    let mut nodes: Vec<f64> = Vec::with_capacity(cap);
    let mut values: Vec<f64> = Vec::with_capacity(cap);
    let mut derivs: Vec<f64> = Vec::with_capacity(cap);

    let lookup = |nodes: &[f64], values: &[f64], derivs: &[f64], t: f64| -> f64 {
        if t <= 0.0 {
            return history.eval(t.max(-max_delay));
        }
        let i = nodes.partition_point(|&s| s <= t) - 1;
        if i + 1 >= nodes.len() {
            return *values.last().unwrap();
        }
        hermite(t, nodes[i], nodes[i + 1], values[i], values[i + 1], derivs[i], derivs[i + 1])
    };

    macro_rules! stage {
        ($t:expr, $y:expr) => {{
            let xr = if r == 0.0 { $y } else { lookup(&nodes, &values, &derivs, $t - r) };
            let xs = if sigma == 0.0 { $y } else { lookup(&nodes, &values, &derivs, $t - sigma) };
            rhs($y, xr, xs)
        }};
    }

    nodes.push(0.0);
    values.push(history.eval(0.0));
    let d0 = stage!(0.0, values[0]);
    derivs.push(d0);

    let mut t_prev = 0.0;
    for bp in breakpoints(r, sigma, t_end) {
        let seg = bp - t_prev;
        if seg <= 0.0 {
            continue;
        }
        let n = (seg / h - 1e-9).ceil().max(1.0) as usize;
        let hh = seg / n as f64;
        for k in 0..n {
            let t = t_prev + k as f64 * hh;
            let y = *values.last().unwrap();
            let k1 = *derivs.last().unwrap();
            let k2 = stage!(t + 0.5 * hh, y + 0.5 * hh * k1);
            let k3 = stage!(t + 0.5 * hh, y + 0.5 * hh * k2);
            let k4 = stage!(t + hh, y + hh * k3);
            let y_next = y + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let t_next = if k + 1 == n { bp } else { t_prev + (k + 1) as f64 * hh };
            if !y_next.is_finite() {
                return Err(Error::BlowUp(t_next));
            }
            nodes.push(t_next);
            values.push(y_next);
            let d = stage!(t_next, y_next);
            derivs.push(d);
        }
        t_prev = bp;
    }

    Ok(Trajectory { nodes, values, derivs, history: history.clone(), hist_start: -max_delay })
}

// ---------------------------------------------------------------------------
// Diagnostics.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConvergedToEquilibrium,
    SustainedOscillation,
    Undetermined,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::ConvergedToEquilibrium => "converged-to-equilibrium",
            Verdict::SustainedOscillation => "sustained-oscillation",
            Verdict::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone)]
pub struct OscillationDiagnostics {
    pub verdict: Verdict,
    /// Half of the swing `(max - min)/2` over the retained window.
    pub amplitude: f64,
    /// Mean refined peak gap, when enough consistent peaks exist.
    pub period_estimate: Option<f64>,
    /// `sup |x - eq|` over the last quarter of the span.
    pub equilibrium_residual: f64,
    pub negativity_detected: bool,
}

#[derive(Debug, Clone)]
pub struct DiagnoseOptions {
    /// Fraction of the span discarded as transient.
    pub transient_fraction: f64,
    /// Maximum relative spread of the peak gaps for a sustained verdict.
    pub peak_spread: f64,
    /// Convergence when the last-quarter residual is below
    /// `convergence_factor * max(1, |eq|)`.
    pub convergence_factor: f64,
    pub min_peak_gaps: usize,
    /// Dense samples over the retained window (at least 4 per node).
    pub samples: usize,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            transient_fraction: 0.5,
            peak_spread: 0.05,
            convergence_factor: 1e-3,
            min_peak_gaps: 4,
            samples: 8192,
        }
    }
}

struct Extremum {
    t: f64,
    x: f64,
}

/// Strict local extrema of the dense output on a uniform grid, refined by
/// the quadratic through the three neighbouring samples.
fn refined_extrema(ts: &[f64], xs: &[f64], maxima: bool) -> Vec<Extremum> {
    let sgn = if maxima { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    for i in 1..xs.len() - 1 {
        let (a, b, c) = (sgn * xs[i - 1], sgn * xs[i], sgn * xs[i + 1]);
        if b > a && b > c {
            let den = a - 2.0 * b + c;
            let (dt, dv) = if den.abs() > 1e-300 {
                let off = 0.5 * (a - c) / den;
                (off * (ts[i + 1] - ts[i]), -0.125 * (a - c) * (a - c) / den)
            } else {
                (0.0, 0.0)
            };
            out.push(Extremum { t: ts[i] + dt, x: sgn * (b + dv) });
        }
    }
    out
}

pub fn diagnose(traj: &Trajectory, equilibrium: f64, transient_fraction: f64) -> OscillationDiagnostics {
    diagnose_with(traj, equilibrium, &DiagnoseOptions { transient_fraction, ..Default::default() })
}

pub fn diagnose_with(
    traj: &Trajectory,
    equilibrium: f64,
    opts: &DiagnoseOptions,
) -> OscillationDiagnostics {
    let t0 = traj.start_time().max(0.0);
    let t_end = traj.end_time();
    let span = t_end - t0;
    let n = opts.samples.max(4 * traj.nodes().len()).max(16);

    let sample = |from: f64, to: f64, n: usize| -> (Vec<f64>, Vec<f64>) {
        let ts: Vec<f64> = (0..=n).map(|i| from + (to - from) * i as f64 / n as f64).collect();
        let xs: Vec<f64> = ts.iter().map(|&t| traj.eval(t)).collect();
        (ts, xs)
    };

    // negativity over the whole nonnegative-time span
    let (_, xs_all) = sample(t0, t_end, n);
    let negativity_detected = xs_all.iter().any(|&x| x < 0.0);

    // residual over the last quarter
    let (_, xs_last) = sample(t0 + 0.75 * span, t_end, n / 4 + 1);
    let equilibrium_residual = xs_last
        .iter()
        .map(|&x| (x - equilibrium).abs())
        .fold(0.0f64, f64::max);

    // retained window
    let w0 = t0 + span * opts.transient_fraction.clamp(0.0, 0.95);
    let (ts, xs) = sample(w0, t_end, n);

    let peaks = refined_extrema(&ts, &xs, true);
    let troughs = refined_extrema(&ts, &xs, false);
    let hi = peaks
        .iter()
        .map(|e| e.x)
        .chain([xs[0], *xs.last().unwrap()])
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = troughs
        .iter()
        .map(|e| e.x)
        .chain([xs[0], *xs.last().unwrap()])
        .fold(f64::INFINITY, f64::min);
    let amplitude = 0.5 * (hi - lo);

    let too_short = span <= 0.0 || traj.nodes().len() < 8;
    if too_short {
        return OscillationDiagnostics {
            verdict: Verdict::Undetermined,
            amplitude: amplitude.max(0.0),
            period_estimate: None,
            equilibrium_residual,
            negativity_detected,
        };
    }

    if equilibrium_residual < opts.convergence_factor * equilibrium.abs().max(1.0) {
        return OscillationDiagnostics {
            verdict: Verdict::ConvergedToEquilibrium,
            amplitude,
            period_estimate: None,
            equilibrium_residual,
            negativity_detected,
        };
    }

    let gaps: Vec<f64> = peaks.windows(2).map(|w| w[1].t - w[0].t).collect();
    let mut period_estimate = None;
    let mut sustained = false;
    if gaps.len() >= opts.min_peak_gaps {
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / gaps.len() as f64;
        if mean > 0.0 && var.sqrt() / mean <= opts.peak_spread {
            period_estimate = Some(mean);
            // guard against a slowly decaying spiral: the swing over the
            // second half must hold up against the first half
            let mid = xs.len() / 2;
            let swing = |s: &[f64]| {
                s.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
                    - s.iter().fold(f64::INFINITY, |m, &x| m.min(x))
            };
            sustained = swing(&xs[mid..]) >= 0.5 * swing(&xs[..mid]);
        }
    }

    OscillationDiagnostics {
        verdict: if sustained { Verdict::SustainedOscillation } else { Verdict::Undetermined },
        amplitude,
        period_estimate,
        equilibrium_residual,
        negativity_detected,
    }
}

// ---------------------------------------------------------------------------
// Bifurcation scan.
// ---------------------------------------------------------------------------

/// One row of the r-sweep along `sigma = r - tau`.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub r: f64,
    pub sigma: f64,
    pub diagnostics: Option<OscillationDiagnostics>,
    pub error: Option<String>,
}

/// Runs integrate + diagnose for each `r`, with `sigma = r - tau`. Rows run
/// in parallel but are returned in grid order; per-row failures are
/// recorded and the scan continues.
pub fn bifurcation_scan(
    lin: &LinearizedModel,
    r_values: &[f64],
    history: &HistorySpec,
    t_end: f64,
) -> Result<Vec<ScanRow>> {
    let tau = lin.params.tau;
    if let Some(&bad) = r_values.iter().find(|&&r| r < tau.max(0.0)) {
        return Err(Error::InvalidInput(format!(
            "grid point r = {bad} below max(0, tau) = {}",
            tau.max(0.0)
        )));
    }
    let rhs = lin.rhs_arc();
    let eq = lin.equilibrium;
    Ok(r_values
        .par_iter()
        .map(|&r| {
            let sigma = r - tau;
            let h = delay_step_limit(r, sigma);
            match integrate(&*rhs, r, sigma, history, t_end, h) {
                Ok(traj) => ScanRow {
                    r,
                    sigma,
                    diagnostics: Some(diagnose(&traj, eq, 0.5)),
                    error: None,
                },
                Err(e) => ScanRow { r, sigma, diagnostics: None, error: Some(e.to_string()) },
            }
        })
        .collect())
}
