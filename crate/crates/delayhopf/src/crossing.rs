//! Construction of the critical delay pair `(r0, sigma0)` on the line
//! `sigma = r - tau`, the crossing sequence `r_k`, and the transversality
//! derivative `mu'(r0)` of the tracked characteristic root.

use std::f64::consts::PI;

use crate::chareq::{
    self, imaginary_system_residuals, regime_classify, RegimeKind, SystemParams, TauAdmissibility,
};
use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// The first imaginary crossing on the line `sigma = r - tau`.
#[derive(Debug, Clone)]
pub struct CrossingData {
    /// Crossing frequency `w* > 0`.
    pub omega_star: f64,
    /// First admissible sigma angle, in `[0, 2 pi / w*)`.
    pub sigma_bar: f64,
    /// Critical bifurcation delay.
    pub r0: f64,
    /// Paired delay, `r0 - tau`.
    pub sigma0: f64,
    /// First index with both delays nonnegative.
    pub k_tau: u32,
    /// Transversal speed of the tracked root's real part at `r0`.
    pub mu_prime: f64,
    /// Tangency threshold: either the exact tangency or a certified bound.
    pub tau_star: f64,
    /// Whether `tau_star` is the exact tangency value.
    pub tau_star_is_exact: bool,
    /// Whether the pre-bifurcation stability statement is certified.
    pub stability_certified: bool,
    /// Sequence indices rejected by the point-uniqueness check.
    pub skipped_indices: Vec<u32>,
    pub notes: Vec<String>,
}

fn check_certified_root(p: &SystemParams, omega_star: f64, tol: &Tolerances) -> Result<()> {
    if !(omega_star.is_finite() && omega_star > 0.0) {
        return Err(Error::InvalidInput(format!("omega* must be positive, got {omega_star}")));
    }
    let resid = chareq::p_resid(p, omega_star, p.tau);
    if resid.abs() > tol.residual {
        return Err(Error::InconsistentCrossing(format!(
            "crossing-equation residual {resid:.3e} at omega = {omega_star}"
        )));
    }
    Ok(())
}

/// Unit-vector right-hand side for the sigma angle at a crossing frequency.
fn sigma_unit_vector(p: &SystemParams, w: f64) -> (f64, f64) {
    let den = w * w + p.a * p.a;
    let (s, c) = (w * p.tau).sin_cos();
    let u1 = (p.b * w * s - p.a * (p.c + p.b * c)) / den;
    let u2 = (p.a * p.b * s + w * (p.c + p.b * c)) / den;
    (u1, u2)
}

/// Mirror-image unit vector for the r angle (roles of the delayed terms
/// swapped, tau negated).
fn r_unit_vector(p: &SystemParams, w: f64) -> (f64, f64) {
    sigma_unit_vector(&p.mirrored(), w)
}

fn angle_in_period(u1: f64, u2: f64) -> f64 {
    let ang = u2.atan2(u1);
    if ang < 0.0 {
        ang + 2.0 * PI
    } else {
        ang
    }
}

/// Smallest `sigma_bar in [0, 2 pi / w*)` satisfying
/// `cos(w* sigma) = (b w* sin(w* tau) - a (c + b cos(w* tau))) / (w*^2 + a^2)` and
/// `sin(w* sigma) = (a b sin(w* tau) + w* (c + b cos(w* tau))) / (w*^2 + a^2)`.
pub fn sigma_bar(p: &SystemParams, omega_star: f64) -> Result<f64> {
    sigma_bar_with(p, omega_star, &Tolerances::default())
}

pub fn sigma_bar_with(p: &SystemParams, omega_star: f64, tol: &Tolerances) -> Result<f64> {
    check_certified_root(p, omega_star, tol)?;
    let (u1, u2) = sigma_unit_vector(p, omega_star);
    let norm_err = (u1 * u1 + u2 * u2 - 1.0).abs();
    if norm_err > tol.unit_norm {
        return Err(Error::InconsistentCrossing(format!(
            "unit-vector norm deviates by {norm_err:.3e}: omega = {omega_star} is not a true root"
        )));
    }
    Ok(angle_in_period(u1, u2) / omega_star)
}

/// The k-th delay `r_k = tau + sigma_bar + 2 k pi / w*` at which `i w*`
/// is a characteristic root on the line.
///
/// The single-arccos display for this sequence only covers half the
/// circle; the angle here comes from the full (cos, sin) unit-vector
/// pair, which agrees with the display wherever its branch is valid and
/// satisfies both lines of the purely-imaginary system everywhere. The
/// arccos argument is still validated (it must land in [-1, 1] at a true
/// crossing; small overshoots are clamped).
pub fn r_sequence(p: &SystemParams, omega_star: f64, k: u32) -> Result<f64> {
    r_sequence_with(p, omega_star, k, &Tolerances::default())
}

pub fn r_sequence_with(p: &SystemParams, omega_star: f64, k: u32, tol: &Tolerances) -> Result<f64> {
    let w = omega_star;
    let den = w * w + p.a * p.a;
    let (s, c) = (w * p.tau).sin_cos();
    let cos_arg = -(p.c * w * s + p.a * (p.b + p.c * c)) / den;
    if cos_arg.abs() > 1.0 + tol.arccos_clamp {
        return Err(Error::InconsistentCrossing(format!(
            "arccos argument {cos_arg} outside [-1, 1]"
        )));
    }
    let (u1, u2) = r_unit_vector(p, w);
    let norm_err = (u1 * u1 + u2 * u2 - 1.0).abs();
    if norm_err > tol.unit_norm {
        return Err(Error::InconsistentCrossing(format!(
            "r-side unit-vector norm deviates by {norm_err:.3e}"
        )));
    }
    let sb = sigma_bar_with(p, omega_star, tol)?;
    Ok(p.tau + sb + 2.0 * PI * k as f64 / w)
}

/// Transversality derivative of the tracked root's real part at `r0`:
/// `mu'(r0) = w*(w* + bc tau sin(w* tau)) / |h'(i w*)|^2` with the
/// denominator written out componentwise.
pub fn transversality(p: &SystemParams, r0: f64, omega_star: f64) -> Result<f64> {
    let w = omega_star;
    let num = w * (w + p.bc() * p.tau * (w * p.tau).sin());
    let (sr, cr) = (w * r0).sin_cos();
    let d_re = 1.0 + p.a * (r0 - p.tau) - p.b * p.tau * cr;
    let d_im = w * (r0 - p.tau) + p.b * p.tau * sr;
    let den = d_re * d_re + d_im * d_im;
    if den < 1e-14 {
        return Err(Error::DegenerateDerivative);
    }
    Ok(num / den)
}

/// First admissible index: smallest k with `sigma_bar + 2 k pi / w*`
/// clearing both `sigma_k >= 0` and `r_k = tau + sigma_k >= 0`.
fn first_admissible_k(sigma_bar: f64, omega_star: f64, tau: f64) -> u32 {
    let needed = (-tau).max(0.0);
    if sigma_bar >= needed {
        return 0;
    }
    let per = 2.0 * PI / omega_star;
    let mut k = ((needed - sigma_bar) / per).floor().max(0.0) as u32;
    while sigma_bar + per * (k as f64) < needed {
        k += 1;
    }
    k
}

/// Computes the first critical delay pair, verifies point-wise uniqueness
/// and simplicity of the crossing, and fills in the transversal speed.
pub fn critical_delays(p: &SystemParams) -> Result<CrossingData> {
    critical_delays_with(p, &Tolerances::default())
}

pub fn critical_delays_with(p: &SystemParams, tol: &Tolerances) -> Result<CrossingData> {
    let regime = regime_classify(p)?;
    match regime.kind {
        RegimeKind::UnstableAllDelays => return Err(Error::UnstableRegime),
        RegimeKind::DegenerateZeroRoot => return Err(Error::DegenerateZeroRoot),
        RegimeKind::Boundary => return Err(Error::BoundaryRegime("|a| = |b+c|")),
        RegimeKind::AbsolutelyStablePos | RegimeKind::AbsolutelyStableNeg => {
            return Err(Error::NoCrossing)
        }
        _ => {}
    }

    let mut notes = Vec::new();
    let mut stability_certified = true;

    let admissibility = chareq::tau_admissible(p, tol)?;
    let conditional = regime.kind == RegimeKind::ConditionalStableNeg;
    match &admissibility {
        TauAdmissibility::Rejected(ts) if conditional => {
            // below the tangency threshold the curves never meet
            if chareq::first_crossing_freq_with(p, tol).is_err() {
                return Err(Error::NoCrossing);
            }
            notes.push(format!(
                "conditional-stable regime with |tau| >= tau* = {:.6}: crossing exists but \
                 uniqueness and pre-bifurcation stability are not certified",
                ts.value
            ));
            stability_certified = false;
        }
        TauAdmissibility::Rejected(ts) => {
            return Err(Error::TauTooLarge { tau: p.tau, tau_star: ts.value });
        }
        _ if conditional => {
            // |tau| below the threshold: stable on the line, no crossing
            return Err(Error::NoCrossing);
        }
        TauAdmissibility::CertifiedByCeiling(ts) => {
            notes.push(format!(
                "no tangency detected below the search ceiling {:.4}; threshold reported as the ceiling",
                ts.value
            ));
        }
        _ => {}
    }
    if chareq::on_band_endpoint(p) {
        notes.push("|tau| lies exactly on a simplicity-band endpoint k*pi/omega_lo".to_string());
    }
    let (tau_star, tau_star_is_exact) = admissibility.threshold();

    let omega_star = chareq::first_crossing_freq_with(p, tol)?;
    let sb = sigma_bar_with(p, omega_star, tol)?;
    let k_start = first_admissible_k(sb, omega_star, p.tau);

    // frequencies other than omega* that could share a delay pair
    let others: Vec<f64> = chareq::crossing_frequencies_with(p, tol)?
        .into_iter()
        .filter(|w| (w - omega_star).abs() > 1e-8 * omega_star.max(1.0))
        .collect();

    let period = 2.0 * PI / omega_star;
    let mut skipped = Vec::new();
    let mut chosen: Option<(u32, f64, f64)> = None;
    for k in k_start..k_start + 16 {
        let sigma_k = sb + period * k as f64;
        let r_k = p.tau + sigma_k;
        let conflict = others.iter().copied().find(|&w| {
            let (e1, e2) = imaginary_system_residuals(p, r_k, sigma_k, w);
            e1.abs() <= tol.residual && e2.abs() <= tol.residual
        });
        match conflict {
            None => {
                chosen = Some((k, r_k, sigma_k));
                break;
            }
            Some(w) => {
                skipped.push(k);
                notes.push(format!(
                    "index k = {k} skipped: frequency {w:.6} is also a root at (r_k, sigma_k)"
                ));
                if skipped.len() >= 8 {
                    return Err(Error::NonUniqueCrossing(w));
                }
            }
        }
    }
    let Some((k_tau, r0, sigma0)) = chosen else {
        return Err(Error::NonUniqueCrossing(*others.first().unwrap_or(&omega_star)));
    };

    if !others.is_empty() {
        // another frequency may cross at a smaller delay on the same line
        for &w in &others {
            if let Ok(sb_other) = sigma_bar_with(p, w, tol) {
                let k_other = first_admissible_k(sb_other, w, p.tau);
                let r_other = p.tau + sb_other + 2.0 * PI / w * k_other as f64;
                if r_other < r0 - 1e-12 {
                    stability_certified = false;
                    notes.push(format!(
                        "frequency {w:.6} crosses earlier at r = {r_other:.6}; stability below r0 not certified"
                    ));
                }
            }
        }
    }

    // simplicity of the first root: residual changes sign across it
    let d = 1e-6 * omega_star;
    if chareq::p_resid(p, omega_star - d, p.tau) * chareq::p_resid(p, omega_star + d, p.tau) >= 0.0 {
        return Err(Error::InternalInconsistency(format!(
            "no sign change of the crossing residual across omega* = {omega_star}"
        )));
    }

    // both lines of the purely-imaginary system must hold at the pair
    let (e1, e2) = imaginary_system_residuals(p, r0, sigma0, omega_star);
    if e1.abs() > tol.residual || e2.abs() > tol.residual {
        return Err(Error::InternalInconsistency(format!(
            "imaginary-system residuals ({e1:.3e}, {e2:.3e}) at the critical pair"
        )));
    }

    let mu_prime = transversality(p, r0, omega_star)?;
    if mu_prime <= 0.0 {
        // guaranteed positive under the certified hypotheses; outside them
        // (conditional regime past the tangency) the first pair can cross
        // backwards, which is reported rather than rejected
        if !conditional {
            return Err(Error::InternalInconsistency(format!(
                "nonpositive transversal speed mu'(r0) = {mu_prime}"
            )));
        }
        stability_certified = false;
        notes.push(format!(
            "first crossing moves right-to-left (mu'(r0) = {mu_prime:.3e}); a later frequency drives the instability"
        ));
    }

    if !regime.c1 && !regime.c2 {
        stability_certified = false;
        notes.push("neither a > c-b nor a > b-c holds: pre-bifurcation stability not certified".into());
    }
    if r0 == 0.0 || sigma0 == 0.0 {
        stability_certified = false;
        notes.push("critical pair touches a zero delay; the equation is single-delay there".into());
    }

    Ok(CrossingData {
        omega_star,
        sigma_bar: sb,
        r0,
        sigma0,
        k_tau,
        mu_prime,
        tau_star,
        tau_star_is_exact,
        stability_certified,
        skipped_indices: skipped,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const NICH_OMEGA: f64 = 4.153_322_502_275_56;
    const NICH_R0: f64 = 0.5389028749691774;
    const NICH_SIGMA0: f64 = 0.1607028749691774;
    const NICH_MU: f64 = 2.518_380_982_718_62;

    fn nich() -> SystemParams {
        SystemParams::new(2.0, 4.5, 1.0, 0.3782).unwrap()
    }

    #[test]
    // the reference cosine 0.7854 happens to sit next to pi/4; it is the
    // quotient (b w* sin(w* tau) - a(c + b cos(w* tau)))/(w*^2 + a^2)
    #[allow(clippy::approx_constant)]
    fn sigma_bar_of_the_example() {
        let p = nich();
        let sb = sigma_bar(&p, NICH_OMEGA).unwrap();
        assert_relative_eq!(sb, NICH_SIGMA0, epsilon = 1e-9);
        let (u1, u2) = super::sigma_unit_vector(&p, NICH_OMEGA);
        assert!((u1 - 0.7854).abs() < 1e-4);
        assert!((u2 - 0.6190).abs() < 1e-4);
        assert!((u1 * u1 + u2 * u2 - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn sigma_bar_closed_form_tau_zero() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let w = 3.0f64.sqrt();
        let sb = sigma_bar(&p, w).unwrap();
        assert_relative_eq!(sb, (-0.5f64).acos() / w, epsilon = 1e-10);
    }

    #[test]
    fn sigma_bar_rejects_a_non_root() {
        let p = nich();
        assert!(matches!(sigma_bar(&p, 3.0), Err(Error::InconsistentCrossing(_))));
    }

    #[test]
    fn r_sequence_of_the_example() {
        let p = nich();
        let r0 = r_sequence(&p, NICH_OMEGA, 0).unwrap();
        assert_relative_eq!(r0, NICH_R0, epsilon = 1e-9);
        let r1 = r_sequence(&p, NICH_OMEGA, 1).unwrap();
        assert_relative_eq!(r1, NICH_R0 + 2.0 * PI / NICH_OMEGA, epsilon = 1e-9);
        assert!((r1 - 2.0518).abs() < 1e-3);
        // each member satisfies both lines of the imaginary system
        for k in 0..4 {
            let rk = r_sequence(&p, NICH_OMEGA, k).unwrap();
            let (e1, e2) = imaginary_system_residuals(&p, rk, rk - p.tau, NICH_OMEGA);
            assert!(e1.abs() < 1e-9 && e2.abs() < 1e-9, "k = {k}: ({e1:.2e}, {e2:.2e})");
        }
    }

    #[test]
    fn r_sequence_closed_form_tau_zero() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let r0 = r_sequence(&p, 3.0f64.sqrt(), 0).unwrap();
        assert_relative_eq!(r0, (2.0 * PI / 3.0) / 3.0f64.sqrt(), epsilon = 1e-10);
    }

    /// The displayed arccos form only covers half the circle; the folded
    /// angle must still satisfy the sin line on parameters where the
    /// naive branch is wrong.
    #[test]
    fn r_sequence_takes_the_correct_branch() {
        // triple found by randomized search: naive arccos misses by ~0.45
        let p = SystemParams::new(4.9274, 3.0731, 4.3028, 0.6912).unwrap();
        let w = chareq::first_crossing_freq(&p).unwrap();
        let r0 = r_sequence(&p, w, 0).unwrap();
        let (e1, e2) = imaginary_system_residuals(&p, r0, r0 - p.tau, w);
        assert!(e1.abs() < 1e-9 && e2.abs() < 1e-9, "({e1:.2e}, {e2:.2e})");
        // and it is consistent with the sigma-side construction
        let sb = sigma_bar(&p, w).unwrap();
        let r_direct = p.tau + sb;
        let per = 2.0 * PI / w;
        let diff = ((r0 - r_direct) / per).round() * per;
        assert_relative_eq!(r0 - diff, r_direct, epsilon = 1e-9);
    }

    #[test]
    fn transversality_of_the_example() {
        let p = nich();
        let mu = transversality(&p, NICH_R0, NICH_OMEGA).unwrap();
        assert!((mu - 2.518).abs() < 1e-3);
        assert_relative_eq!(mu, NICH_MU, epsilon = 1e-10);
    }

    #[test]
    fn transversality_tau_zero_reduction() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let (w, r0) = (3.0f64.sqrt(), 1.2091995761561452);
        let mu = transversality(&p, r0, w).unwrap();
        let expected = w * w / ((1.0 + p.a * r0).powi(2) + (w * r0).powi(2));
        assert_relative_eq!(mu, expected, epsilon = 1e-14);
    }

    #[test]
    fn transversality_positive_when_factors_are() {
        // bc > 0 and tau sin(w tau) >= 0 make every factor positive
        let p = SystemParams::new(1.5, 1.0, 1.0, 0.4).unwrap();
        let data = critical_delays(&p).unwrap();
        assert!(data.mu_prime > 0.0);
    }

    #[test]
    fn critical_delays_of_the_example() {
        let d = critical_delays(&nich()).unwrap();
        assert!((d.omega_star - 4.1533).abs() < 1e-3);
        assert!((d.r0 - 0.5389).abs() < 1e-3);
        assert_relative_eq!(d.omega_star, NICH_OMEGA, epsilon = 1e-9);
        assert_relative_eq!(d.r0, NICH_R0, epsilon = 1e-9);
        assert_relative_eq!(d.sigma0, NICH_SIGMA0, epsilon = 1e-9);
        assert_eq!(d.k_tau, 0);
        assert!((d.r0 - d.sigma0 - 0.3782).abs() < 1e-12);
        assert!(d.mu_prime > 0.0);
        assert!(d.stability_certified);
        assert!(d.skipped_indices.is_empty());
        assert!(d.sigma_bar >= 0.0 && d.sigma_bar < 2.0 * PI / d.omega_star);
        // certified via the closed-form bound, no tangency solve needed
        assert!(!d.tau_star_is_exact);
        assert_relative_eq!(d.tau_star, 8.25f64.sqrt() / 4.5, epsilon = 1e-12);
    }

    #[test]
    fn critical_delays_tau_zero() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let d = critical_delays(&p).unwrap();
        assert_relative_eq!(d.omega_star, 3.0f64.sqrt(), epsilon = 1e-10);
        assert_relative_eq!(d.r0, 1.2091995761561452, epsilon = 1e-10);
        assert_relative_eq!(d.sigma0, d.r0, epsilon = 1e-12);
    }

    #[test]
    fn critical_delays_above_the_bound_consults_the_tangency() {
        // 0.7 exceeds the closed-form bound 0.638 but stays below tau* = 1.194
        let p = SystemParams::new(2.0, 4.5, 1.0, 0.7).unwrap();
        let d = critical_delays(&p).unwrap();
        assert!(d.tau_star_is_exact);
        assert!((d.tau_star - 1.1940119).abs() < 1e-4);
        assert!((d.omega_star - 3.32637).abs() < 1e-3);
        let (e1, e2) = imaginary_system_residuals(&p, d.r0, d.sigma0, d.omega_star);
        assert!(e1.abs() < 1e-9 && e2.abs() < 1e-9);
    }

    #[test]
    fn band_endpoint_is_flagged() {
        // |tau| exactly on k*pi/omega_lo, still below tau* = 1.194
        let lo = 8.25f64.sqrt();
        let p = SystemParams::new(2.0, 4.5, 1.0, PI / lo).unwrap();
        let d = critical_delays(&p).unwrap();
        assert!(
            d.notes.iter().any(|n| n.contains("band endpoint")),
            "notes: {:?}",
            d.notes
        );
    }

    #[test]
    fn critical_delays_rejects_tau_beyond_tangency() {
        let p = SystemParams::new(2.0, 4.5, 1.0, 1.5).unwrap();
        assert!(matches!(critical_delays(&p), Err(Error::TauTooLarge { .. })));
    }

    #[test]
    fn critical_delays_mirror_of_the_example() {
        // swapping the delayed terms and negating tau mirrors the crossing
        let p = SystemParams::new(2.0, 1.0, 4.5, -0.3782).unwrap();
        let d = critical_delays(&p).unwrap();
        assert_relative_eq!(d.omega_star, NICH_OMEGA, epsilon = 1e-9);
        assert_relative_eq!(d.r0, NICH_SIGMA0, epsilon = 1e-9);
        assert_relative_eq!(d.sigma0, NICH_R0, epsilon = 1e-9);
        assert_relative_eq!(d.mu_prime, NICH_MU, epsilon = 1e-9);
    }

    #[test]
    fn critical_delays_large_negative_tau_raises_k() {
        let p = SystemParams::new(2.0, 1.0, 4.5, -1.0).unwrap();
        let d = critical_delays(&p).unwrap();
        assert!(d.k_tau >= 1, "sigma_bar alone cannot clear sigma >= 1");
        assert!(d.r0 >= 0.0 && d.sigma0 >= 0.0);
        assert!((d.r0 - d.sigma0 + 1.0).abs() < 1e-12);
        let (e1, e2) = imaginary_system_residuals(&p, d.r0, d.sigma0, d.omega_star);
        assert!(e1.abs() < 1e-9 && e2.abs() < 1e-9);
    }

    #[test]
    fn critical_delays_refuses_stable_regimes() {
        let p = SystemParams::new(3.0, 1.0, 1.0, 0.2).unwrap();
        assert!(matches!(critical_delays(&p), Err(Error::NoCrossing)));
        let p = SystemParams::new(1.0, -3.0, 1.0, 0.2).unwrap();
        assert!(matches!(critical_delays(&p), Err(Error::UnstableRegime)));
        let p = SystemParams::new(2.0, 1.5, 0.5, 0.2).unwrap();
        assert!(matches!(critical_delays(&p), Err(Error::BoundaryRegime(_))));
        // conditional-stable below the threshold
        let p = SystemParams::new(1.0, -2.0, 2.0, 0.1).unwrap();
        assert!(matches!(critical_delays(&p), Err(Error::NoCrossing)));
    }

    #[test]
    fn critical_delays_conditional_above_threshold_is_flagged() {
        let p = SystemParams::new(1.0, -2.0, 2.0, 2.0).unwrap();
        let d = critical_delays(&p).unwrap();
        assert!(!d.stability_certified);
        let (e1, e2) = imaginary_system_residuals(&p, d.r0, d.sigma0, d.omega_star);
        assert!(e1.abs() < 1e-9 && e2.abs() < 1e-9);
    }

    #[test]
    fn multiple_window_frequencies_still_certify_point_uniqueness() {
        // below tau* = 1.194 yet three sign changes in the window
        let p = SystemParams::new(2.0, 4.5, 1.0, 1.15).unwrap();
        assert!(chareq::crossing_frequencies(&p).unwrap().len() >= 3);
        let d = critical_delays(&p).unwrap();
        let (e1, e2) = imaginary_system_residuals(&p, d.r0, d.sigma0, d.omega_star);
        assert!(e1.abs() < 1e-9 && e2.abs() < 1e-9);
        assert!(d.mu_prime > 0.0);
    }
}
