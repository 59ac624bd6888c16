//! Analysis of the transcendental characteristic equation
//! `h(lambda) = lambda + a + b e^{-lambda r} + c e^{-lambda sigma}`
//! for the linearization `y'(t) = -a y(t) - b y(t-r) - c y(t-sigma)`
//! with the delay difference `tau = r - sigma` held fixed.
//!
//! The module classifies the parameter regime, locates the first positive
//! crossing frequency `w*` of the reduced equation `g(w) = cos(w tau)`,
//! solves for the tangency threshold `tau*`, and counts right-half-plane
//! roots by the argument principle as an independent oracle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// Linearization coefficients together with the fixed delay difference.
///
/// `a` multiplies the undelayed term, `b` the `r`-delayed term, `c` the
/// `sigma`-delayed term; `tau = r - sigma` may be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub tau: f64,
}

impl SystemParams {
    pub fn new(a: f64, b: f64, c: f64, tau: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite() && tau.is_finite()) {
            return Err(Error::NonFinite("SystemParams"));
        }
        Ok(Self { a, b, c, tau })
    }

    pub fn bc(&self) -> f64 {
        self.b * self.c
    }

    pub(crate) fn require_two_delays(&self) -> Result<()> {
        if self.bc() == 0.0 {
            Err(Error::UnsupportedSingleDelay)
        } else {
            Ok(())
        }
    }

    /// Mirror image swapping the roles of the two delayed terms
    /// (`b <-> c`, `tau -> -tau`).
    pub fn mirrored(&self) -> Self {
        Self { a: self.a, b: self.c, c: self.b, tau: -self.tau }
    }
}

/// Outcome of the parameter-regime decision table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    /// a + b + c < 0: unstable for every delay pair.
    UnstableAllDelays,
    /// a + b + c = 0: zero is a characteristic root for all delays.
    DegenerateZeroRoot,
    /// bc > 0 and |a| > |b+c|: stable for every delay pair.
    AbsolutelyStablePos,
    /// bc < 0 and |a| >= |b-c|: stable for every delay pair.
    AbsolutelyStableNeg,
    /// bc < 0 and |b+c| < |a| < |b-c|: stable on the line for |tau| < tau*.
    ConditionalStableNeg,
    /// bc > 0 and |b-c| <= |a| < |b+c|.
    HopfCandidateI,
    /// bc > 0 and |a| < |b-c|.
    HopfCandidateII,
    /// bc < 0 and |a| < |b+c|.
    HopfCandidateIII,
    /// Measure-zero equality |a| = |b+c|; rejected by the Hopf pipeline.
    Boundary,
}

impl RegimeKind {
    pub fn is_hopf_candidate(&self) -> bool {
        matches!(
            self,
            RegimeKind::HopfCandidateI | RegimeKind::HopfCandidateII | RegimeKind::HopfCandidateIII
        )
    }

    pub fn is_absolutely_stable(&self) -> bool {
        matches!(self, RegimeKind::AbsolutelyStablePos | RegimeKind::AbsolutelyStableNeg)
    }
}

impl std::fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegimeKind::UnstableAllDelays => "unstable-all-delays",
            RegimeKind::DegenerateZeroRoot => "degenerate-zero-root",
            RegimeKind::AbsolutelyStablePos => "absolutely-stable-pos",
            RegimeKind::AbsolutelyStableNeg => "absolutely-stable-neg",
            RegimeKind::ConditionalStableNeg => "conditional-stable-neg",
            RegimeKind::HopfCandidateI => "hopf-candidate-i",
            RegimeKind::HopfCandidateII => "hopf-candidate-ii",
            RegimeKind::HopfCandidateIII => "hopf-candidate-iii",
            RegimeKind::Boundary => "boundary",
        };
        f.write_str(s)
    }
}

/// Regime classification plus the sign conditions used by the Hopf pipeline.
#[derive(Debug, Clone)]
pub struct RegimeClass {
    pub kind: RegimeKind,
    /// a > c - b
    pub c1: bool,
    /// a > b - c
    pub c2: bool,
    pub note: String,
}

/// Closed interval guaranteed to contain every crossing frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaWindow {
    pub lo: f64,
    pub hi: f64,
}

impl OmegaWindow {
    pub fn contains(&self, w: f64) -> bool {
        w >= self.lo - 1e-12 && w <= self.hi + 1e-12
    }
}

/// Evaluates `h(lambda) = lambda + a + b e^{-lambda r} + c e^{-lambda sigma}`.
pub fn eval_h(lambda: Complex64, p: &SystemParams, r: f64, sigma: f64) -> Result<Complex64> {
    if !(lambda.re.is_finite() && lambda.im.is_finite() && r.is_finite() && sigma.is_finite()) {
        return Err(Error::NonFinite("eval_h"));
    }
    if r < 0.0 || sigma < 0.0 {
        return Err(Error::InvalidInput(format!("delays must be nonnegative, got r={r}, sigma={sigma}")));
    }
    Ok(lambda + p.a + p.b * (-lambda * r).exp() + p.c * (-lambda * sigma).exp())
}

/// Derivative `h'(lambda) = 1 - b r e^{-lambda r} - c sigma e^{-lambda sigma}`.
pub fn eval_h_prime(lambda: Complex64, p: &SystemParams, r: f64, sigma: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) - p.b * r * (-lambda * r).exp() - p.c * sigma * (-lambda * sigma).exp()
}

/// The reduced crossing curve `g(w) = w^2/(2bc) + (a^2 - b^2 - c^2)/(2bc)`;
/// `w > 0` is a crossing frequency exactly when `g(w) = cos(w tau)`.
pub fn g_curve(omega: f64, p: &SystemParams) -> Result<f64> {
    p.require_two_delays()?;
    if !omega.is_finite() {
        return Err(Error::NonFinite("g_curve"));
    }
    let bc2 = 2.0 * p.bc();
    Ok(omega * omega / bc2 + (p.a * p.a - p.b * p.b - p.c * p.c) / bc2)
}

/// Window `[lo, hi]` containing all crossing frequencies, from
/// `w^2 = b^2 + c^2 + 2bc cos(w tau) - a^2` and `cos in [-1, 1]`.
pub fn omega_window(p: &SystemParams) -> Result<OmegaWindow> {
    let (ab, bb, cb) = (p.a.abs(), p.b.abs(), p.c.abs());
    let hi2 = (bb + cb) * (bb + cb) - ab * ab;
    if hi2 <= 0.0 {
        return Err(Error::NoWindow);
    }
    let lo2 = (bb - cb) * (bb - cb) - ab * ab;
    Ok(OmegaWindow { lo: lo2.max(0.0).sqrt(), hi: hi2.sqrt() })
}

/// Classifies the parameter triple. The cases are mutually exclusive and
/// exhaust `{bc != 0}`; exact equalities on `|a| = |b+c|` land on
/// [`RegimeKind::Boundary`].
pub fn regime_classify(p: &SystemParams) -> Result<RegimeClass> {
    p.require_two_delays()?;
    let (a, b, c) = (p.a, p.b, p.c);
    let sum = a + b + c;
    let c1 = a > c - b;
    let c2 = a > b - c;
    let aa = a.abs();
    let sum_abs = (b + c).abs();
    let diff_abs = (b - c).abs();

    let (kind, note) = if sum < 0.0 {
        (RegimeKind::UnstableAllDelays, "a+b+c < 0: unstable for all delay pairs".to_string())
    } else if sum == 0.0 {
        (RegimeKind::DegenerateZeroRoot, "a+b+c = 0: zero root for all delay pairs".to_string())
    } else if p.bc() > 0.0 {
        if aa > sum_abs {
            (RegimeKind::AbsolutelyStablePos, "bc>0, |a|>|b+c|: no imaginary crossing, stable for all delay pairs".to_string())
        } else if aa == sum_abs {
            (RegimeKind::Boundary, "bc>0, |a| = |b+c| exactly".to_string())
        } else if aa >= diff_abs {
            (RegimeKind::HopfCandidateI, "bc>0, |b-c| <= |a| < |b+c|: first crossing simple for every tau".to_string())
        } else {
            (RegimeKind::HopfCandidateII, "bc>0, |a| < |b-c|: crossing exists for every tau, simple below tau*".to_string())
        }
    } else if aa >= diff_abs {
        (RegimeKind::AbsolutelyStableNeg, "bc<0, |a|>=|b-c|: no imaginary crossing, stable for all delay pairs".to_string())
    } else if aa == sum_abs {
        (RegimeKind::Boundary, "bc<0, |a| = |b+c| exactly".to_string())
    } else if aa > sum_abs {
        (RegimeKind::ConditionalStableNeg, "bc<0, |b+c|<|a|<|b-c|: no crossing for |tau| < tau*".to_string())
    } else {
        (RegimeKind::HopfCandidateIII, "bc<0, |a| < |b+c|: crossing exists, simple below tau*".to_string())
    };

    let note = format!("{note}; (C.1) a>c-b: {c1}; (C.2) a>b-c: {c2}");
    Ok(RegimeClass { kind, c1, c2, note })
}

// ---------------------------------------------------------------------------
// Crossing-frequency scan.
// ---------------------------------------------------------------------------

/// Residual of the crossing equation at a given tau: `g(w) - cos(w tau)`.
pub(crate) fn p_resid(p: &SystemParams, omega: f64, tau: f64) -> f64 {
    let bc2 = 2.0 * p.bc();
    omega * omega / bc2 + (p.a * p.a - p.b * p.b - p.c * p.c) / bc2 - (omega * tau).cos()
}

/// d/dw of [`p_resid`].
fn p_resid_dw(p: &SystemParams, omega: f64, tau: f64) -> f64 {
    omega / p.bc() + tau * (omega * tau).sin()
}

fn scan_step(tol: &Tolerances, tau: f64, hi: f64) -> f64 {
    tol.scan_step.min(PI / (64.0 * tau.abs().max(1.0) * hi))
}

fn bisect_root(p: &SystemParams, tau: f64, mut lo: f64, mut hi: f64, tol: &Tolerances) -> f64 {
    let mut flo = p_resid(p, lo, tau);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol.bisect {
            break;
        }
        let fmid = p_resid(p, mid, tau);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ternary search for the minimum of |p| on [lo, hi].
fn refine_abs_min(p: &SystemParams, tau: f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    for _ in 0..200 {
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if p_resid(p, m1, tau).abs() < p_resid(p, m2, tau).abs() {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let w = 0.5 * (lo + hi);
    (w, p_resid(p, w, tau).abs())
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum CrossEvent {
    /// Simple root found by a sign change, refined by bisection.
    SignChange(f64),
    /// |p| dips below the tangency tolerance without changing sign.
    Touch(f64),
}

/// Scans the crossing window at the configured step and returns every
/// sign-change root plus near-zero tangency touches, in increasing order.
pub(crate) fn scan_cross_events(p: &SystemParams, tau: f64, tol: &Tolerances) -> Result<Vec<CrossEvent>> {
    let win = omega_window(p)?;
    let step = scan_step(tol, tau, win.hi);
    // tiny overshoot: a root can sit exactly on the window's right
    // endpoint (tau = 0 puts it at sqrt((b+c)^2 - a^2) precisely)
    let hi_s = win.hi * (1.0 + 1e-9);
    let n = ((hi_s - win.lo) / step).ceil().max(1.0) as usize;
    let mut events = Vec::new();

    let omega_at = |i: usize| win.lo + (hi_s - win.lo) * (i as f64) / (n as f64);
    let mut prev_w = omega_at(0);
    let mut prev_f = p_resid(p, prev_w, tau);
    // grid values needed for local-minimum detection of |p|
    let mut prev_prev_f = f64::INFINITY;
    // coarse trigger well above refined-tangency size, well below O(1) residuals
    let touch_trigger = 1e-4;

    for i in 1..=n {
        let w = omega_at(i);
        let f = p_resid(p, w, tau);
        if prev_f == 0.0 {
            if prev_w > 0.0 {
                events.push(CrossEvent::SignChange(prev_w));
            }
        } else if (prev_f < 0.0) != (f < 0.0) {
            let root = bisect_root(p, tau, prev_w, w, tol);
            if root > 0.0 {
                events.push(CrossEvent::SignChange(root));
            }
        } else if prev_f.abs() < touch_trigger
            && prev_f.abs() <= prev_prev_f.abs()
            && prev_f.abs() <= f.abs()
        {
            // sign-preserving local minimum of |p|: refine and test for a touch
            let lo = (prev_w - step).max(win.lo);
            let (wmin, fmin) = refine_abs_min(p, tau, lo, w);
            if fmin <= tol.tangency && wmin > 0.0 {
                events.push(CrossEvent::Touch(wmin));
            }
        }
        prev_prev_f = prev_f;
        prev_f = f;
        prev_w = w;
    }
    if prev_f == 0.0 && prev_w > 0.0 {
        events.push(CrossEvent::SignChange(prev_w));
    }
    Ok(events)
}

/// All sign-change crossing frequencies in the window, ascending.
pub fn crossing_frequencies(p: &SystemParams) -> Result<Vec<f64>> {
    crossing_frequencies_with(p, &Tolerances::default())
}

pub fn crossing_frequencies_with(p: &SystemParams, tol: &Tolerances) -> Result<Vec<f64>> {
    p.require_two_delays()?;
    Ok(scan_cross_events(p, p.tau, tol)?
        .into_iter()
        .filter_map(|e| match e {
            CrossEvent::SignChange(w) => Some(w),
            CrossEvent::Touch(_) => None,
        })
        .collect())
}

/// Smallest `w* > 0` with `g(w*) = cos(w* tau)`, refined by bisection.
///
/// The first root is required to be a sign change of the residual; a
/// tangency encountered first is reported as an error.
pub fn first_crossing_freq(p: &SystemParams) -> Result<f64> {
    first_crossing_freq_with(p, &Tolerances::default())
}

pub fn first_crossing_freq_with(p: &SystemParams, tol: &Tolerances) -> Result<f64> {
    p.require_two_delays()?;
    let events = scan_cross_events(p, p.tau, tol)?;
    match events.first() {
        None => Err(Error::NoCrossing),
        Some(CrossEvent::Touch(_)) => Err(Error::TangencyAtFirstRoot),
        Some(CrossEvent::SignChange(w)) => Ok(*w),
    }
}

// ---------------------------------------------------------------------------
// Tangency threshold tau*.
// ---------------------------------------------------------------------------

/// Result of the tangency-threshold search.
#[derive(Debug, Clone, Copy)]
pub struct TauStar {
    /// The smallest tau > 0 at which the first crossing root is double,
    /// or the search ceiling when no tangency was found below it.
    pub value: f64,
    /// Certified closed-form lower bound `window.lo / |bc|` (0 when the
    /// window starts at 0).
    pub lower_bound: f64,
    pub tangency_found: bool,
    /// Crossing frequency of the tangency when one was found.
    pub omega_at_tangency: Option<f64>,
}

fn tau_search_ceiling(win: &OmegaWindow, lower_bound: f64, tol: &Tolerances) -> f64 {
    if tol.tau_ceiling > 0.0 {
        tol.tau_ceiling
    } else {
        (8.0 * PI / win.hi).max(4.0 * lower_bound)
    }
}

/// Damped Newton iteration on (p, dp/dw) = (0, 0) in the (w, tau) plane.
fn tangency_newton(
    p: &SystemParams,
    mut w: f64,
    mut t: f64,
    w_max: f64,
    t_max: f64,
) -> Option<(f64, f64)> {
    let bc = p.bc();
    for _ in 0..60 {
        let f1 = p_resid(p, w, t);
        let f2 = p_resid_dw(p, w, t);
        let norm = f1.abs().max(f2.abs());
        if norm < 1e-13 {
            return Some((w, t));
        }
        let (s, c) = (w * t).sin_cos();
        let j11 = f2; // dp/dw
        let j12 = w * s;
        let j21 = 1.0 / bc + t * t * c;
        let j22 = s + w * t * c;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return None;
        }
        let dw = -(f1 * j22 - f2 * j12) / det;
        let dt = -(j11 * f2 - j21 * f1) / det;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (wn, tn) = (w + lam * dw, t + lam * dt);
            if wn > 0.0 && tn > 0.0 && wn <= w_max && tn <= t_max {
                let g1 = p_resid(p, wn, tn);
                let g2 = p_resid_dw(p, wn, tn);
                if g1.abs().max(g2.abs()) < norm {
                    w = wn;
                    t = tn;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    let norm = p_resid(p, w, t).abs().max(p_resid_dw(p, w, t).abs());
    (norm < 1e-10).then_some((w, t))
}

/// Checks whether the tangency candidate `(w_t, tau_t)` sits at the FIRST
/// root of `p( . ; tau_t)`: no sign-change root may occur strictly below it.
fn tangency_is_first_root(p: &SystemParams, w_t: f64, tau_t: f64, tol: &Tolerances) -> Result<bool> {
    let win = omega_window(p)?;
    let step = scan_step(tol, tau_t, win.hi);
    let margin = (2.0 * step).max(1e-6 * w_t.max(1.0));
    if let Some(ev) = scan_cross_events(p, tau_t, tol)?.first() {
        let w = match ev {
            CrossEvent::SignChange(w) | CrossEvent::Touch(w) => *w,
        };
        if w < w_t - margin {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest `tau > 0` at which the first crossing root becomes a double
/// root (`g(w) = cos(w tau)` and `w/bc = -tau sin(w tau)` simultaneously).
///
/// Always reports the certified closed-form lower bound `window.lo/|bc|`.
/// When no first-root tangency exists below the search ceiling the ceiling
/// is returned with `tangency_found = false`.
pub fn tau_star(p: &SystemParams) -> Result<TauStar> {
    tau_star_with(p, &Tolerances::default())
}

pub fn tau_star_with(p: &SystemParams, tol: &Tolerances) -> Result<TauStar> {
    p.require_two_delays()?;
    let regime = regime_classify(p)?;
    if !(regime.kind.is_hopf_candidate() || regime.kind == RegimeKind::ConditionalStableNeg) {
        return Err(Error::InvalidInput(format!(
            "tau* is defined for Hopf-candidate or conditional-stable regimes, got {}",
            regime.kind
        )));
    }
    let win = omega_window(p)?;
    let lower_bound = win.lo / p.bc().abs();
    let ceiling = tau_search_ceiling(&win, lower_bound, tol);

    let n_w = 96;
    let n_t = 96;
    let w_lo = win.lo.max(win.hi * 1e-3);
    let t_lo = lower_bound.max(ceiling / (n_t as f64) * 0.5);
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for i in 0..n_w {
        let w0 = w_lo + (win.hi - w_lo) * (i as f64 + 0.5) / (n_w as f64);
        for j in 0..n_t {
            let t0 = t_lo + (ceiling - t_lo) * (j as f64 + 0.5) / (n_t as f64);
            if let Some((w, t)) = tangency_newton(p, w0, t0, win.hi * 1.001, ceiling * 1.001) {
                if t > 0.0 && t <= ceiling && win.contains(w) {
                    candidates.push((t, w));
                }
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    candidates.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-7 * y.0.max(1.0) && (x.1 - y.1).abs() < 1e-7 * y.1.max(1.0));

    for (t, w) in candidates {
        if tangency_is_first_root(p, w, t, tol)? {
            return Ok(TauStar {
                value: t,
                lower_bound,
                tangency_found: true,
                omega_at_tangency: Some(w),
            });
        }
    }
    Ok(TauStar { value: ceiling, lower_bound, tangency_found: false, omega_at_tangency: None })
}

/// Admissibility certificate for a given tau under the tangency threshold.
#[derive(Debug, Clone)]
pub enum TauAdmissibility {
    /// First root is simple for every tau in this regime (bc > 0 with
    /// g(0) >= -1: any sign-preserving touch would need w tau > pi, but a
    /// sign change always occurs before that).
    CertifiedByRegime,
    /// |tau| is strictly below the closed-form lower bound on tau*.
    CertifiedByBound { lower_bound: f64 },
    /// |tau| is strictly below the computed tangency threshold.
    CertifiedByTangency(TauStar),
    /// No tangency found below the search ceiling.
    CertifiedByCeiling(TauStar),
    /// |tau| is at or above the computed tangency threshold.
    Rejected(TauStar),
}

impl TauAdmissibility {
    pub fn is_admissible(&self) -> bool {
        !matches!(self, TauAdmissibility::Rejected(_))
    }

    /// Threshold value to report, and whether it is the exact tangency.
    pub fn threshold(&self) -> (f64, bool) {
        match self {
            TauAdmissibility::CertifiedByRegime => (f64::INFINITY, false),
            TauAdmissibility::CertifiedByBound { lower_bound } => (*lower_bound, false),
            TauAdmissibility::CertifiedByTangency(ts) | TauAdmissibility::Rejected(ts) => {
                (ts.value, true)
            }
            TauAdmissibility::CertifiedByCeiling(ts) => (ts.value, false),
        }
    }
}

/// Decides whether |tau| lies below the tangency threshold, using the
/// cheap certificates before falling back to the full 2-D solve.
pub(crate) fn tau_admissible(p: &SystemParams, tol: &Tolerances) -> Result<TauAdmissibility> {
    let regime = regime_classify(p)?;
    if regime.kind == RegimeKind::HopfCandidateI {
        return Ok(TauAdmissibility::CertifiedByRegime);
    }
    let win = omega_window(p)?;
    let lower_bound = win.lo / p.bc().abs();
    if p.tau.abs() < lower_bound {
        return Ok(TauAdmissibility::CertifiedByBound { lower_bound });
    }
    let ts = tau_star_with(p, tol)?;
    if !ts.tangency_found {
        Ok(TauAdmissibility::CertifiedByCeiling(ts))
    } else if p.tau.abs() < ts.value {
        Ok(TauAdmissibility::CertifiedByTangency(ts))
    } else {
        Ok(TauAdmissibility::Rejected(ts))
    }
}

/// Flags |tau| landing exactly on a simplicity-band endpoint `k pi / lo`
/// of the half-open validity intervals (only meaningful when lo > 0).
pub(crate) fn on_band_endpoint(p: &SystemParams) -> bool {
    let Ok(win) = omega_window(p) else { return false };
    if win.lo <= 0.0 {
        return false;
    }
    let q = p.tau.abs() * win.lo / PI;
    (q - q.round()).abs() < 1e-12 && q.round() > 0.0
}

// ---------------------------------------------------------------------------
// Right-half-plane root counting by the argument principle.
// ---------------------------------------------------------------------------

/// Both lines of the purely-imaginary system at `(r, sigma, w)`:
/// `(a + b cos(wr) + c cos(ws), w - b sin(wr) - c sin(ws))`.
pub fn imaginary_system_residuals(p: &SystemParams, r: f64, sigma: f64, omega: f64) -> (f64, f64) {
    (
        p.a + p.b * (omega * r).cos() + p.c * (omega * sigma).cos(),
        omega - p.b * (omega * r).sin() - p.c * (omega * sigma).sin(),
    )
}

struct ContourWalk {
    p: SystemParams,
    r: f64,
    sigma: f64,
    total: f64,
    min_h: f64,
}

fn wrap_angle(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d < -PI {
        d += 2.0 * PI;
    }
    d
}

impl ContourWalk {
    fn hval(&self, z: Complex64) -> Complex64 {
        z + self.p.a + self.p.b * (-z * self.r).exp() + self.p.c * (-z * self.sigma).exp()
    }

    fn segment(
        &mut self,
        z0: Complex64,
        v0: Complex64,
        z1: Complex64,
        v1: Complex64,
        depth: u32,
    ) -> std::result::Result<(), ()> {
        self.min_h = self.min_h.min(v0.norm());
        let d = wrap_angle(v1.arg() - v0.arg());
        if d.abs() <= PI / 2.0 {
            self.total += d;
            return Ok(());
        }
        if depth == 0 {
            return Err(());
        }
        let zm = 0.5 * (z0 + z1);
        let vm = self.hval(zm);
        self.segment(z0, v0, zm, vm, depth - 1)?;
        self.segment(zm, vm, z1, v1, depth - 1)
    }
}

fn winding_once(
    p: &SystemParams,
    r: f64,
    sigma: f64,
    bound: f64,
    n_init: usize,
) -> std::result::Result<(f64, f64), f64> {
    let corners = [
        Complex64::new(0.0, -bound),
        Complex64::new(bound, -bound),
        Complex64::new(bound, bound),
        Complex64::new(0.0, bound),
        Complex64::new(0.0, -bound),
    ];
    let mut acc = ContourWalk { p: *p, r, sigma, total: 0.0, min_h: f64::INFINITY };
    for k in 0..4 {
        let (z_start, z_end) = (corners[k], corners[k + 1]);
        let mut z0 = z_start;
        let mut v0 = acc.hval(z0);
        for i in 1..=n_init {
            let t = i as f64 / n_init as f64;
            let z1 = z_start + (z_end - z_start) * t;
            let v1 = acc.hval(z1);
            if acc.segment(z0, v0, z1, v1, 48).is_err() {
                return Err(acc.min_h);
            }
            z0 = z1;
            v0 = v1;
        }
        acc.min_h = acc.min_h.min(v0.norm());
    }
    Ok((acc.total / (2.0 * PI), acc.min_h))
}

/// Number of characteristic roots with positive real part, computed as the
/// winding number of `h` around the rectangle `[0, bound] x [-bound, bound]`.
///
/// `bound` must exceed `|a| + |b| + |c|`, which dominates the modulus of
/// every right-half-plane root. The contour is resampled at increasing
/// density until the winding number stabilizes on an integer.
pub fn count_rhp_roots(p: &SystemParams, r: f64, sigma: f64, bound: f64) -> Result<u32> {
    count_rhp_roots_with(p, r, sigma, bound, &Tolerances::default())
}

pub fn count_rhp_roots_with(
    p: &SystemParams,
    r: f64,
    sigma: f64,
    bound: f64,
    tol: &Tolerances,
) -> Result<u32> {
    if r < 0.0 || sigma < 0.0 || !r.is_finite() || !sigma.is_finite() {
        return Err(Error::InvalidInput("delays must be nonnegative and finite".into()));
    }
    let dominate = p.a.abs() + p.b.abs() + p.c.abs();
    if bound.is_nan() || bound <= dominate {
        return Err(Error::InvalidInput(format!(
            "bound {bound} must exceed |a|+|b|+|c| = {dominate}"
        )));
    }

    let mut last: Option<i64> = None;
    let mut min_h_seen = f64::INFINITY;
    for n_init in [64usize, 128, 256, 512, 1024] {
        match winding_once(p, r, sigma, bound, n_init) {
            Err(min_h) => {
                // refinement exhausted: the contour is effectively on a root
                return Err(Error::ContourRootCollision(min_h));
            }
            Ok((w, min_h)) => {
                min_h_seen = min_h_seen.min(min_h);
                if min_h < tol.contour_min {
                    return Err(Error::ContourRootCollision(min_h));
                }
                let rounded = w.round();
                if (w - rounded).abs() <= 0.05 {
                    let n = rounded as i64;
                    if n < 0 {
                        return Err(Error::InternalInconsistency(format!(
                            "negative winding number {n} for an entire function"
                        )));
                    }
                    if last == Some(n) {
                        return Ok(n as u32);
                    }
                    last = Some(n);
                } else {
                    last = None;
                }
            }
        }
    }
    Err(Error::ContourRootCollision(min_h_seen))
}
