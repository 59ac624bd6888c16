//! Population models with a delayed harvesting term: equilibria,
//! linearization triples, Taylor coefficients of the nonlinearity, full
//! right-hand-side evaluators for simulation, and checkers for the
//! model-level stability/bifurcation criteria.

use std::sync::Arc;

use crate::chareq::{regime_classify, RegimeKind, SystemParams};
use crate::error::{Error, Result};
use crate::normalform::TaylorCoeffs;

/// `x'(t) = -delta x(t) + P x(t-r) e^{-x(t-r)} - H x(t-sigma)`.
#[derive(Debug, Clone, Copy)]
pub struct NicholsonModel {
    /// Mortality rate delta > 0.
    pub delta: f64,
    /// Maximum per-capita egg production P > 0.
    pub cap_p: f64,
    /// Harvesting rate H > 0.
    pub harvest: f64,
}

impl NicholsonModel {
    pub fn new(delta: f64, cap_p: f64, harvest: f64) -> Result<Self> {
        if !(delta > 0.0 && cap_p > 0.0 && harvest > 0.0)
            || !(delta.is_finite() && cap_p.is_finite() && harvest.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "Nicholson parameters must be positive and finite: delta={delta}, P={cap_p}, H={harvest}"
            )));
        }
        Ok(Self { delta, cap_p, harvest })
    }
}

/// `x'(t) = -delta x(t) + P / (1 + x^n(t-r)) - H x(t-sigma)`.
#[derive(Debug, Clone, Copy)]
pub struct MackeyGlassModel {
    pub delta: f64,
    pub cap_p: f64,
    pub harvest: f64,
    /// Hill exponent n > 0.
    pub hill_n: f64,
}

impl MackeyGlassModel {
    pub fn new(delta: f64, cap_p: f64, harvest: f64, hill_n: f64) -> Result<Self> {
        if !(delta > 0.0 && cap_p > 0.0 && harvest > 0.0 && hill_n > 0.0)
            || !(delta.is_finite() && cap_p.is_finite() && harvest.is_finite() && hill_n.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "Mackey-Glass parameters must be positive and finite: delta={delta}, P={cap_p}, H={harvest}, n={hill_n}"
            )));
        }
        Ok(Self { delta, cap_p, harvest, hill_n })
    }
}

/// Which model a linearization came from; drives the model-level criteria.
#[derive(Debug, Clone, Copy)]
pub enum ModelSource {
    Nicholson(NicholsonModel),
    MackeyGlass(MackeyGlassModel),
    Custom,
}

pub type RhsFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// A model shifted to an equilibrium: linearization triple, Taylor
/// coefficients, and the full nonlinear right-hand side in the original
/// coordinates (`rhs(eq, eq, eq) = 0`).
#[derive(Clone)]
pub struct LinearizedModel {
    pub params: SystemParams,
    pub coeffs: TaylorCoeffs,
    pub equilibrium: f64,
    pub source: ModelSource,
    rhs: Arc<RhsFn>,
}

impl std::fmt::Debug for LinearizedModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearizedModel")
            .field("params", &self.params)
            .field("coeffs", &self.coeffs)
            .field("equilibrium", &self.equilibrium)
            .field("source", &self.source)
            .finish_non_exhaustive()
    }
}

impl LinearizedModel {
    /// Full nonlinear right-hand side `(x, x_r, x_sigma) -> x'`.
    pub fn rhs(&self, x: f64, x_r: f64, x_sigma: f64) -> f64 {
        (self.rhs)(x, x_r, x_sigma)
    }

    /// Right-hand side shifted to the equilibrium, `u = x - x*`.
    pub fn shifted_rhs(&self, u: f64, u_r: f64, u_sigma: f64) -> f64 {
        let e = self.equilibrium;
        (self.rhs)(e + u, e + u_r, e + u_sigma)
    }

    pub fn rhs_arc(&self) -> Arc<RhsFn> {
        Arc::clone(&self.rhs)
    }

    /// User-supplied linearization with the cubic Taylor polynomial as the
    /// simulation right-hand side.
    pub fn custom(params: SystemParams, coeffs: TaylorCoeffs, equilibrium: f64) -> Result<Self> {
        if !coeffs.is_finite() || !equilibrium.is_finite() {
            return Err(Error::NonFinite("custom model"));
        }
        let (a, b, c) = (params.a, params.b, params.c);
        let k = coeffs;
        let eq = equilibrium;
        let rhs = move |x: f64, xr: f64, xs: f64| {
            let (u, v, w) = (x - eq, xr - eq, xs - eq);
            -a * u - b * v - c * w
                + 0.5
                    * (k.a11 * u * u
                        + k.a22 * v * v
                        + k.a33 * w * w
                        + 2.0 * (k.a12 * u * v + k.a13 * u * w + k.a23 * v * w))
                + (k.b111 * u * u * u
                    + k.b222 * v * v * v
                    + k.b333 * w * w * w
                    + 3.0 * (k.b112 * u * u * v + k.b113 * u * u * w)
                    + 3.0 * (k.b122 * u * v * v + k.b133 * u * w * w)
                    + 6.0 * k.b123 * u * v * w
                    + 3.0 * (k.b223 * v * v * w + k.b233 * v * w * w))
                    / 6.0
        };
        Ok(Self { params, coeffs, equilibrium, source: ModelSource::Custom, rhs: Arc::new(rhs) })
    }

    /// User-supplied linearization with an explicit right-hand side.
    pub fn custom_with_rhs(
        params: SystemParams,
        coeffs: TaylorCoeffs,
        equilibrium: f64,
        rhs: Arc<RhsFn>,
    ) -> Result<Self> {
        if !coeffs.is_finite() || !equilibrium.is_finite() {
            return Err(Error::NonFinite("custom model"));
        }
        Ok(Self { params, coeffs, equilibrium, source: ModelSource::Custom, rhs })
    }
}

/// Positive equilibrium `x* = ln(P / (delta + H))`, which exists exactly
/// when `P > delta + H`.
pub fn nicholson_equilibrium(m: &NicholsonModel) -> Result<f64> {
    if m.cap_p <= m.delta + m.harvest {
        return Err(Error::NoPositiveEquilibrium);
    }
    Ok((m.cap_p / (m.delta + m.harvest)).ln())
}

fn nicholson_rhs(m: &NicholsonModel) -> Arc<RhsFn> {
    let (d, p, h) = (m.delta, m.cap_p, m.harvest);
    Arc::new(move |x: f64, xr: f64, xs: f64| -d * x + p * xr * (-xr).exp() - h * xs)
}

/// Linearization about the positive equilibrium:
/// `(a, b, c) = (delta, (x*-1)(delta+H), H)` with the only nonzero Taylor
/// coefficients `a22 = (x*-2)(delta+H)` and `b222 = (3-x*)(delta+H)`.
pub fn nicholson_linearize(m: &NicholsonModel, tau: f64) -> Result<LinearizedModel> {
    let xstar = nicholson_equilibrium(m)?;
    let dh = m.delta + m.harvest;
    let params = SystemParams::new(m.delta, (xstar - 1.0) * dh, m.harvest, tau)?;
    let coeffs = TaylorCoeffs {
        a22: (xstar - 2.0) * dh,
        b222: (3.0 - xstar) * dh,
        ..TaylorCoeffs::zero()
    };
    Ok(LinearizedModel {
        params,
        coeffs,
        equilibrium: xstar,
        source: ModelSource::Nicholson(*m),
        rhs: nicholson_rhs(m),
    })
}

/// Linearization about the zero equilibrium, `(a, b, c) = (delta, -P, H)`.
pub fn nicholson_linearize_zero(m: &NicholsonModel, tau: f64) -> Result<LinearizedModel> {
    let params = SystemParams::new(m.delta, -m.cap_p, m.harvest, tau)?;
    let coeffs = TaylorCoeffs {
        a22: -2.0 * m.cap_p,
        b222: 3.0 * m.cap_p,
        ..TaylorCoeffs::zero()
    };
    Ok(LinearizedModel {
        params,
        coeffs,
        equilibrium: 0.0,
        source: ModelSource::Nicholson(*m),
        rhs: nicholson_rhs(m),
    })
}

/// Unique positive root of `x^{n+1} + x = P/(delta+H)`, bracketed on
/// `[0, max(1, P/(delta+H))]` and bisected to 1e-13 relative.
pub fn mackey_equilibrium(m: &MackeyGlassModel) -> f64 {
    let target = m.cap_p / (m.delta + m.harvest);
    let f = |x: f64| x.powf(m.hill_n + 1.0) + x - target;
    let mut lo = 0.0f64;
    let mut hi = target.max(1.0);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * lo.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Linearization of the Mackey-Glass model about its positive equilibrium.
pub fn mackey_linearize(m: &MackeyGlassModel, tau: f64) -> Result<LinearizedModel> {
    let xs = mackey_equilibrium(m);
    let n = m.hill_n;
    if n < 3.0 && xs < 1e-8 {
        return Err(Error::NearSingularExpansion(xs));
    }
    let denom = xs.powf(n) + 1.0;
    let b = m.cap_p * n * xs.powf(n - 1.0) / (denom * denom);
    let a22 = m.cap_p * n * xs.powf(n - 2.0) * (1.0 - n + (n + 1.0) * xs.powf(n))
        / denom.powi(3);
    let b222 = m.cap_p
        * n
        * xs.powf(n - 3.0)
        * ((2.0 - n) * (n - 1.0) + 4.0 * (n * n - 1.0) * xs.powf(n)
            - (n + 1.0) * (n + 2.0) * xs.powf(2.0 * n))
        / denom.powi(4);
    let params = SystemParams::new(m.delta, b, m.harvest, tau)?;
    let coeffs = TaylorCoeffs { a22, b222, ..TaylorCoeffs::zero() };
    let (d, p, h, hn) = (m.delta, m.cap_p, m.harvest, m.hill_n);
    let rhs = Arc::new(move |x: f64, xr: f64, xsig: f64| {
        -d * x + p / (1.0 + xr.powf(hn)) - h * xsig
    });
    Ok(LinearizedModel {
        params,
        coeffs,
        equilibrium: xs,
        source: ModelSource::MackeyGlass(*m),
        rhs,
    })
}

// ---------------------------------------------------------------------------
// Model-level criteria.
// ---------------------------------------------------------------------------

/// Which model-level inequality fired, the regime(s) it predicts, and
/// whether the generic classifier of the same triple agrees.
#[derive(Debug, Clone)]
pub struct TheoremReport {
    /// Content-descriptive label of the inequality that fired.
    pub clause: String,
    /// Regimes the clause predicts (singleton except for coarse clauses).
    pub expected: Vec<RegimeKind>,
    pub actual: RegimeKind,
    pub consistent: bool,
    /// Whether the clause asserts a Hopf bifurcation for admissible tau.
    pub hopf_expected: bool,
}

enum Clause {
    Fired { label: String, expected: Vec<RegimeKind>, hopf: bool },
    BoundaryEquality { label: String },
}

fn nicholson_positive_clause(delta: f64, h: f64, xstar: f64) -> Clause {
    let q1 = 2.0 * delta / (delta + h);
    let q2 = 2.0 * h / (delta + h);
    use RegimeKind::*;
    if h <= delta {
        // q2 <= 1 <= q1
        if xstar < q2 {
            Clause::Fired {
                label: format!("0<H<=delta and x*<2H/(delta+H)={q2:.6}: stable on the line for |tau|<tau*"),
                expected: vec![ConditionalStableNeg],
                hopf: false,
            }
        } else if xstar < 1.0 {
            Clause::Fired {
                label: "0<H<delta and 2H/(delta+H)<=x*<1: stable for all delay pairs".to_string(),
                expected: vec![AbsolutelyStableNeg],
                hopf: false,
            }
        } else if xstar == 1.0 {
            Clause::BoundaryEquality { label: "x* = 1: the r-delayed term drops out".to_string() }
        } else if xstar < q1 {
            Clause::Fired {
                label: format!("0<H<delta and 1<x*<2delta/(delta+H)={q1:.6}: stable for all delay pairs"),
                expected: vec![AbsolutelyStablePos],
                hopf: false,
            }
        } else if xstar == q1 {
            Clause::BoundaryEquality {
                label: format!("x* = 2delta/(delta+H) = {q1:.6} exactly"),
            }
        } else if xstar <= 2.0 {
            Clause::Fired {
                label: "0<H<=delta and 2delta/(delta+H)<x*<=2: supercritical Hopf at r0 for |tau|<tau*".to_string(),
                expected: vec![HopfCandidateI],
                hopf: true,
            }
        } else {
            Clause::Fired {
                label: "x*>2: supercritical Hopf at r0 for |tau|<tau*".to_string(),
                expected: vec![HopfCandidateII],
                hopf: true,
            }
        }
    } else {
        // delta < h: q1 < 1 < q2
        if xstar < q1 {
            Clause::Fired {
                label: format!("0<delta<H and x*<2delta/(delta+H)={q1:.6}: stable on the line for |tau|<tau*"),
                expected: vec![ConditionalStableNeg],
                hopf: false,
            }
        } else if xstar == q1 {
            Clause::BoundaryEquality {
                label: format!("x* = 2delta/(delta+H) = {q1:.6} exactly"),
            }
        } else if xstar < 1.0 {
            Clause::Fired {
                label: "0<delta<H and 2delta/(delta+H)<x*<1: supercritical Hopf at r0 for |tau|<tau*".to_string(),
                expected: vec![HopfCandidateIII],
                hopf: true,
            }
        } else if xstar == 1.0 {
            Clause::BoundaryEquality { label: "x* = 1: the r-delayed term drops out".to_string() }
        } else if xstar < q2 {
            Clause::Fired {
                label: format!("0<delta<H and 1<x*<2H/(delta+H)={q2:.6}: supercritical Hopf at r0 for |tau|<tau*"),
                expected: vec![HopfCandidateII],
                hopf: true,
            }
        } else if xstar <= 2.0 {
            Clause::Fired {
                label: "0<delta<H and 2H/(delta+H)<=x*<=2: supercritical Hopf at r0 for |tau|<tau*".to_string(),
                expected: vec![HopfCandidateI],
                hopf: true,
            }
        } else {
            Clause::Fired {
                label: "x*>2: supercritical Hopf at r0 for |tau|<tau*".to_string(),
                expected: vec![HopfCandidateII],
                hopf: true,
            }
        }
    }
}

fn nicholson_zero_clause(delta: f64, h: f64, p: f64) -> Clause {
    use RegimeKind::*;
    if h < delta && p <= delta - h {
        Clause::Fired {
            label: "0<H<delta and P<=delta-H: zero equilibrium stable for all delay pairs".to_string(),
            expected: vec![AbsolutelyStableNeg],
            hopf: false,
        }
    } else if p < delta + h {
        if delta < h && p == h - delta {
            Clause::BoundaryEquality { label: "P = H-delta exactly".to_string() }
        } else if delta < h && p < h - delta {
            // harvest-dominated zero equilibrium, outside the stability clauses
            Clause::Fired {
                label: "0<delta<H and P<H-delta: outside the zero-equilibrium stability clauses".to_string(),
                expected: vec![HopfCandidateIII],
                hopf: true,
            }
        } else {
            Clause::Fired {
                label: "|delta-H|<P<delta+H: zero equilibrium stable on the line for |tau|<tau*".to_string(),
                expected: vec![ConditionalStableNeg],
                hopf: false,
            }
        }
    } else if p == delta + h {
        Clause::Fired {
            label: "P = delta+H exactly: zero is a characteristic root".to_string(),
            expected: vec![DegenerateZeroRoot],
            hopf: false,
        }
    } else {
        Clause::Fired {
            label: "P>delta+H: zero equilibrium unstable (positive equilibrium exists)".to_string(),
            expected: vec![UnstableAllDelays],
            hopf: false,
        }
    }
}

/// Maps the model-level inequalities to the expected regime and checks
/// them against the generic classifier on the same triple.
pub fn theorem_conditions(lin: &LinearizedModel) -> Result<TheoremReport> {
    let actual = regime_classify(&lin.params)?.kind;
    let clause = match lin.source {
        ModelSource::Nicholson(m) => {
            if lin.equilibrium == 0.0 {
                nicholson_zero_clause(m.delta, m.harvest, m.cap_p)
            } else {
                nicholson_positive_clause(m.delta, m.harvest, lin.equilibrium)
            }
        }
        ModelSource::MackeyGlass(m) => {
            let b = lin.params.b;
            let load = b + m.harvest;
            if load < m.delta {
                Clause::Fired {
                    label: format!(
                        "P n x*^(n-1)/(x*^n+1)^2 + H = {load:.6} < delta: stable for all delay pairs"
                    ),
                    expected: vec![RegimeKind::AbsolutelyStablePos],
                    hopf: false,
                }
            } else if load == m.delta {
                Clause::BoundaryEquality { label: "b + H = delta exactly".to_string() }
            } else {
                Clause::Fired {
                    label: format!(
                        "P n x*^(n-1)/(x*^n+1)^2 + H = {load:.6} > delta: supercritical Hopf at r0 for |tau|<tau*"
                    ),
                    expected: vec![RegimeKind::HopfCandidateI, RegimeKind::HopfCandidateII],
                    hopf: true,
                }
            }
        }
        ModelSource::Custom => Clause::Fired {
            label: "custom model: generic classification applies".to_string(),
            expected: vec![actual],
            hopf: actual.is_hopf_candidate(),
        },
    };
    Ok(match clause {
        Clause::Fired { label, expected, hopf } => TheoremReport {
            consistent: expected.contains(&actual),
            clause: label,
            expected,
            actual,
            hopf_expected: hopf,
        },
        Clause::BoundaryEquality { label } => TheoremReport {
            consistent: actual == RegimeKind::Boundary,
            clause: label,
            expected: vec![RegimeKind::Boundary],
            actual,
            hopf_expected: false,
        },
    })
}
