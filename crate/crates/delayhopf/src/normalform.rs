//! Center-manifold normal-form coefficients at the Hopf point: psi1(0),
//! E1..E4, the reduced polar coefficients K1 and K2, and the resulting
//! direction/stability classification of the bifurcating orbit.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::chareq::SystemParams;
use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// Second- and third-order Taylor coefficients of the nonlinearity at the
/// equilibrium. Index convention: 1 is the current state, 2 the `r`-delayed
/// argument, 3 the `sigma`-delayed argument. Values are the literal partial
/// derivatives of the shifted right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaylorCoeffs {
    pub a11: f64,
    pub a22: f64,
    pub a33: f64,
    pub a12: f64,
    pub a13: f64,
    pub a23: f64,
    pub b111: f64,
    pub b222: f64,
    pub b333: f64,
    pub b112: f64,
    pub b113: f64,
    pub b122: f64,
    pub b133: f64,
    pub b123: f64,
    pub b223: f64,
    pub b233: f64,
}

impl TaylorCoeffs {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        [
            self.a11, self.a22, self.a33, self.a12, self.a13, self.a23, self.b111, self.b222,
            self.b333, self.b112, self.b113, self.b122, self.b133, self.b123, self.b223, self.b233,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    /// Exchanges the two delayed arguments (index 2 <-> 3).
    pub(crate) fn swapped(&self) -> Self {
        Self {
            a11: self.a11,
            a22: self.a33,
            a33: self.a22,
            a12: self.a13,
            a13: self.a12,
            a23: self.a23,
            b111: self.b111,
            b222: self.b333,
            b333: self.b222,
            b112: self.b113,
            b113: self.b112,
            b122: self.b133,
            b133: self.b122,
            b123: self.b123,
            b223: self.b233,
            b233: self.b223,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Supercritical,
    Subcritical,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Supercritical => "supercritical",
            Direction::Subcritical => "subcritical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitStability {
    StableOnCenterManifold,
    UnstableOnCenterManifold,
    Degenerate,
}

impl std::fmt::Display for OrbitStability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OrbitStability::StableOnCenterManifold => "stable-on-center-manifold",
            OrbitStability::UnstableOnCenterManifold => "unstable-on-center-manifold",
            OrbitStability::Degenerate => "degenerate",
        })
    }
}

/// Normal-form evaluation at a certified crossing.
#[derive(Debug, Clone)]
pub struct NormalFormResult {
    pub psi1: Complex64,
    pub e1: Complex64,
    /// Real by construction; stored with zero imaginary part.
    pub e2: Complex64,
    pub e3: Complex64,
    pub e4: Complex64,
    /// Coefficient of the linear polar term; equals mu'(r0).
    pub k1: f64,
    /// Coefficient of the cubic polar term; its sign decides orbit stability.
    pub k2: f64,
    pub direction: Direction,
    pub orbit_stability: OrbitStability,
    /// Leading-order period of the bifurcating orbit, `2 pi / w*`.
    pub period: f64,
}

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn eix(theta: f64) -> Complex64 {
    Complex64::new(0.0, theta).exp()
}

/// `psi1(0) = (1 - b tau e^{-i w* r0} + (r0 - tau)(i w* + a))^{-1}`.
pub fn psi1_zero(p: &SystemParams, r0: f64, omega_star: f64) -> Result<Complex64> {
    let den = cx(1.0, 0.0) - p.b * p.tau * eix(-omega_star * r0)
        + (r0 - p.tau) * cx(p.a, omega_star);
    if den.norm() < 1e-12 {
        return Err(Error::ResonanceDegeneracy("psi1 denominator vanishes"));
    }
    Ok(den.inv())
}

/// Evaluates the four cubic-normal-form building blocks at the crossing.
///
/// `E2` is a real expression and is returned with zero imaginary part. The
/// `E4` denominator `(a + 2 i w*) e^{2 i w* r0} + b + c e^{2 i w* tau}`
/// must stay away from zero (non-resonance at `2 i w*`).
pub fn compute_e(
    coeffs: &TaylorCoeffs,
    p: &SystemParams,
    r0: f64,
    omega_star: f64,
) -> Result<(Complex64, Complex64, Complex64, Complex64)> {
    if p.a + p.b + p.c == 0.0 {
        return Err(Error::DegenerateZeroRoot);
    }
    if !coeffs.is_finite() {
        return Err(Error::NonFinite("TaylorCoeffs"));
    }
    let w = omega_star;
    let tau = p.tau;
    let psi1 = psi1_zero(p, r0, w)?;
    let c = coeffs;

    let e1 = 3.0
        * psi1
        * (c.b111
            + c.b222 * eix(-w * r0)
            + c.b333 * eix(w * (tau - r0))
            + c.b112 * (eix(w * r0) + 2.0 * eix(-w * r0))
            + c.b113 * (eix(-w * (tau - r0)) + 2.0 * eix(-w * (r0 - tau)))
            + c.b122 * (cx(2.0, 0.0) + eix(-2.0 * w * r0))
            + c.b133 * (cx(2.0, 0.0) + eix(-2.0 * w * (r0 - tau)))
            + c.b123 * (2.0 * eix(-w * tau) + 2.0 * eix(w * tau) + 2.0 * eix(w * (tau - 2.0 * r0)))
            + c.b223 * (eix(-w * (r0 + tau)) + 2.0 * eix(w * (tau - r0)))
            + c.b233 * (2.0 * eix(-w * r0) + 2.0 * eix(w * (2.0 * tau - r0))));

    let e2_re = (c.a11
        + c.a22
        + c.a33
        + 2.0 * c.a12 * (w * r0).cos()
        + 2.0 * c.a13 * (w * (r0 - tau)).cos()
        + 2.0 * c.a23 * (w * tau).cos())
        / (p.a + p.b + p.c);
    let e2 = cx(e2_re, 0.0);

    let e3 = psi1
        * (cx(c.a11 + c.a12 + c.a13, 0.0)
            + (c.a12 + c.a22 + c.a23) * eix(-w * r0)
            + (c.a13 + c.a23 + c.a33) * eix(w * (tau - r0)));

    let e4_den = cx(p.a, 2.0 * w) * eix(2.0 * w * r0) + p.b + p.c * eix(2.0 * w * tau);
    if e4_den.norm() <= 1e-12 {
        return Err(Error::ResonanceDegeneracy("resonance at 2 i w*: E4 denominator vanishes"));
    }
    let e4 = psi1
        * (c.a11
            + c.a22 * eix(-2.0 * w * r0)
            + c.a33 * eix(2.0 * w * (tau - r0))
            + 2.0 * c.a12 * eix(-w * r0)
            + 2.0 * c.a13 * eix(w * (tau - r0))
            + 2.0 * c.a23 * eix(w * (tau - 2.0 * r0)))
        * (c.a11 * eix(2.0 * w * r0)
            + c.a22 * eix(w * r0)
            + c.a33 * eix(w * (r0 + tau))
            + c.a12 * (cx(1.0, 0.0) + eix(3.0 * w * r0))
            + c.a13 * (eix(w * (3.0 * r0 - tau)) + eix(2.0 * w * tau))
            + c.a23 * (eix(w * (r0 - tau)) + eix(w * (r0 + 2.0 * tau))))
        / e4_den;

    Ok((e1, e2, e3, e4))
}

/// Reduced polar coefficients: `K1 = Re(psi1(0) w*(w* - i a))` and
/// `K2 = Re(E1)/6 + E2 Re(E3) + Re(E4)/2`.
pub fn k_coefficients(
    e: &(Complex64, Complex64, Complex64, Complex64),
    psi1: Complex64,
    p: &SystemParams,
    omega_star: f64,
) -> (f64, f64) {
    let k1 = (psi1 * omega_star * cx(omega_star, -p.a)).re;
    let k2 = e.0.re / 6.0 + e.1.re * e.2.re + e.3.re / 2.0;
    (k1, k2)
}

/// Direction and orbit-stability classification from the polar coefficients.
pub fn classify_hopf(k1: f64, k2: f64, omega_star: f64) -> Result<(Direction, OrbitStability, f64)> {
    classify_hopf_with(k1, k2, omega_star, &Tolerances::default())
}

pub fn classify_hopf_with(
    k1: f64,
    k2: f64,
    omega_star: f64,
    tol: &Tolerances,
) -> Result<(Direction, OrbitStability, f64)> {
    if k1.is_nan() || k1 <= 0.0 {
        return Err(Error::InternalInconsistency(format!(
            "K1 = {k1} must be positive at a certified crossing (K1 = mu'(r0))"
        )));
    }
    let stability = if k2.abs() <= tol.degenerate_k2 {
        OrbitStability::Degenerate
    } else if k2 < 0.0 {
        OrbitStability::StableOnCenterManifold
    } else {
        OrbitStability::UnstableOnCenterManifold
    };
    Ok((Direction::Supercritical, stability, 2.0 * PI / omega_star))
}

/// Full normal-form evaluation at a certified crossing `(r0, w*)`.
///
/// The displayed formulas assume the `r`-delayed argument carries the
/// larger delay; for `tau < 0` the system is mirrored (delayed terms and
/// coefficient indices swapped, `tau` negated, critical pair reversed)
/// before evaluation. K1 and K2 are invariant under the mirror since the
/// unfolding moves both delays together along the line.
pub fn hopf_normal_form(
    p: &SystemParams,
    coeffs: &TaylorCoeffs,
    r0: f64,
    omega_star: f64,
) -> Result<NormalFormResult> {
    hopf_normal_form_with(p, coeffs, r0, omega_star, &Tolerances::default())
}

pub fn hopf_normal_form_with(
    p: &SystemParams,
    coeffs: &TaylorCoeffs,
    r0: f64,
    omega_star: f64,
    tol: &Tolerances,
) -> Result<NormalFormResult> {
    let (p_eval, coeffs_eval, r0_eval) = if p.tau < 0.0 {
        (p.mirrored(), coeffs.swapped(), r0 - p.tau)
    } else {
        (*p, *coeffs, r0)
    };
    let psi1 = psi1_zero(&p_eval, r0_eval, omega_star)?;
    let e = compute_e(&coeffs_eval, &p_eval, r0_eval, omega_star)?;
    let (k1, k2) = k_coefficients(&e, psi1, &p_eval, omega_star);
    let (direction, orbit_stability, period) = classify_hopf_with(k1, k2, omega_star, tol)?;
    Ok(NormalFormResult {
        psi1,
        e1: e.0,
        e2: e.1,
        e3: e.2,
        e4: e.3,
        k1,
        k2,
        direction,
        orbit_stability,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossing;
    use approx::assert_relative_eq;

    const NICH_OMEGA: f64 = 4.153_322_502_275_56;
    const NICH_R0: f64 = 0.5389028749691774;
    const NICH_MU: f64 = 2.518_380_982_718_62;
    const NICH_K2: f64 = -0.3573965814465318;

    fn nich() -> SystemParams {
        SystemParams::new(2.0, 4.5, 1.0, 0.3782).unwrap()
    }

    fn nich_coeffs() -> TaylorCoeffs {
        TaylorCoeffs { a22: 1.5, b222: 1.5, ..TaylorCoeffs::zero() }
    }

    #[test]
    fn psi1_of_the_example() {
        let v = psi1_zero(&nich(), NICH_R0, NICH_OMEGA).unwrap();
        assert!((v.re - 0.2459).abs() < 1e-4 && (v.im + 0.2075).abs() < 1e-4);
        assert_relative_eq!(v.re, 0.24593345437850966, epsilon = 1e-9);
        assert_relative_eq!(v.im, -0.20754380369792843, epsilon = 1e-9);
    }

    #[test]
    fn psi1_tau_zero_reduction() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let (w, r0) = (3.0f64.sqrt(), 1.2091995761561452);
        let v = psi1_zero(&p, r0, w).unwrap();
        let expected = Complex64::new(1.0 + p.a * r0, w * r0).inv();
        assert_relative_eq!(v.re, expected.re, epsilon = 1e-14);
        assert_relative_eq!(v.im, expected.im, epsilon = 1e-14);
    }

    #[test]
    fn psi1_matches_transversality() {
        // Re(psi1 w*(w* - ia)) = mu'(r0) is an exact identity at a crossing
        let p = nich();
        let k1 = (psi1_zero(&p, NICH_R0, NICH_OMEGA).unwrap()
            * NICH_OMEGA
            * Complex64::new(NICH_OMEGA, -p.a))
        .re;
        let mu = crossing::transversality(&p, NICH_R0, NICH_OMEGA).unwrap();
        assert_relative_eq!(k1, mu, max_relative = 1e-8);
        assert!((k1 - 2.518).abs() < 1e-3);
    }

    #[test]
    fn psi1_resonance_detected() {
        // closed-form degeneracy: a = 0, w = 1, r0 = 1, tau = 1 + tan(1),
        // b tau = 1/cos(1) zeroes the denominator exactly
        let tau = 1.0 + 1.0f64.tan();
        let b = (1.0 / 1.0f64.cos()) / tau;
        let p = SystemParams::new(0.0, b, 0.7, tau).unwrap();
        assert!(matches!(
            psi1_zero(&p, 1.0, 1.0),
            Err(Error::ResonanceDegeneracy(_))
        ));
    }

    #[test]
    fn e_terms_of_the_example() {
        let p = nich();
        let (e1, e2, e3, e4) = compute_e(&nich_coeffs(), &p, NICH_R0, NICH_OMEGA).unwrap();
        let psi1 = psi1_zero(&p, NICH_R0, NICH_OMEGA).unwrap();
        // only a22 and b222 survive: E1 and E3 collapse to single terms
        let phase = Complex64::new(0.0, -NICH_OMEGA * NICH_R0).exp();
        let e1_direct = 3.0 * psi1 * 1.5 * phase;
        let e3_direct = psi1 * 1.5 * phase;
        assert!((e1 - e1_direct).norm() < 1e-12);
        assert!((e3 - e3_direct).norm() < 1e-12);
        assert_relative_eq!(e2.re, 0.2, epsilon = 1e-14);
        assert_eq!(e2.im, 0.0);
        // frozen values of the full evaluation
        assert_relative_eq!(e1.re, -1.4185532195, epsilon = 1e-8);
        assert_relative_eq!(e1.im, -0.2911186628, epsilon = 1e-8);
        assert_relative_eq!(e4.re, -0.0528016605, epsilon = 1e-8);
        assert_relative_eq!(e4.im, -0.0315734423, epsilon = 1e-8);
    }

    #[test]
    fn zero_coefficients_zero_normal_form() {
        let p = nich();
        let (e1, e2, e3, e4) = compute_e(&TaylorCoeffs::zero(), &p, NICH_R0, NICH_OMEGA).unwrap();
        assert_eq!((e1.norm(), e2.norm(), e3.norm(), e4.norm()), (0.0, 0.0, 0.0, 0.0));
        let psi1 = psi1_zero(&p, NICH_R0, NICH_OMEGA).unwrap();
        let (k1, k2) = k_coefficients(&(e1, e2, e3, e4), psi1, &p, NICH_OMEGA);
        assert_eq!(k2, 0.0);
        let (_, stab, _) = classify_hopf(k1, k2, NICH_OMEGA).unwrap();
        assert_eq!(stab, OrbitStability::Degenerate);
    }

    /// Independent re-evaluation of the E displays in real (cos, sin)
    /// arithmetic, randomized coefficients.
    fn e_oracle(
        c: &TaylorCoeffs,
        p: &SystemParams,
        r0: f64,
        w: f64,
    ) -> (Complex64, f64, Complex64, Complex64) {
        let term = |coef: f64, theta: f64| Complex64::new(coef * theta.cos(), coef * theta.sin());
        let psi_den_re = 1.0 - p.b * p.tau * (w * r0).cos() + (r0 - p.tau) * p.a;
        let psi_den_im = p.b * p.tau * (w * r0).sin() + (r0 - p.tau) * w;
        let psi = Complex64::new(psi_den_re, psi_den_im).inv();
        let t = p.tau;
        let s1 = term(c.b111, 0.0)
            + term(c.b222, -w * r0)
            + term(c.b333, w * (t - r0))
            + term(c.b112, w * r0)
            + term(2.0 * c.b112, -w * r0)
            + term(c.b113, w * (r0 - t))
            + term(2.0 * c.b113, -w * (r0 - t))
            + term(2.0 * c.b122, 0.0)
            + term(c.b122, -2.0 * w * r0)
            + term(2.0 * c.b133, 0.0)
            + term(c.b133, -2.0 * w * (r0 - t))
            + term(2.0 * c.b123, -w * t)
            + term(2.0 * c.b123, w * t)
            + term(2.0 * c.b123, w * (t - 2.0 * r0))
            + term(c.b223, -w * (r0 + t))
            + term(2.0 * c.b223, w * (t - r0))
            + term(2.0 * c.b233, -w * r0)
            + term(2.0 * c.b233, w * (2.0 * t - r0));
        let e1 = 3.0 * psi * s1;
        let e2 = (c.a11
            + c.a22
            + c.a33
            + 2.0 * c.a12 * (w * r0).cos()
            + 2.0 * c.a13 * (w * (r0 - t)).cos()
            + 2.0 * c.a23 * (w * t).cos())
            / (p.a + p.b + p.c);
        let e3 = psi
            * (term(c.a11 + c.a12 + c.a13, 0.0)
                + term(c.a12 + c.a22 + c.a23, -w * r0)
                + term(c.a13 + c.a23 + c.a33, w * (t - r0)));
        let f1 = term(c.a11, 0.0)
            + term(c.a22, -2.0 * w * r0)
            + term(c.a33, 2.0 * w * (t - r0))
            + term(2.0 * c.a12, -w * r0)
            + term(2.0 * c.a13, w * (t - r0))
            + term(2.0 * c.a23, w * (t - 2.0 * r0));
        let f2 = term(c.a11, 2.0 * w * r0)
            + term(c.a22, w * r0)
            + term(c.a33, w * (r0 + t))
            + term(c.a12, 0.0)
            + term(c.a12, 3.0 * w * r0)
            + term(c.a13, w * (3.0 * r0 - t))
            + term(c.a13, 2.0 * w * t)
            + term(c.a23, w * (r0 - t))
            + term(c.a23, w * (r0 + 2.0 * t));
        let den = term(p.a, 2.0 * w * r0) + Complex64::new(0.0, 2.0 * w) * term(1.0, 2.0 * w * r0)
            + Complex64::new(p.b, 0.0)
            + term(p.c, 2.0 * w * t);
        let e4 = psi * f1 * f2 / den;
        (e1, e2, e3, e4)
    }

    #[test]
    fn e_terms_match_independent_evaluation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = nich();
        for _ in 0..50 {
            let mut draw = || rng.gen_range(-2.0..2.0);
            let c = TaylorCoeffs {
                a11: draw(), a22: draw(), a33: draw(), a12: draw(), a13: draw(), a23: draw(),
                b111: draw(), b222: draw(), b333: draw(), b112: draw(), b113: draw(),
                b122: draw(), b133: draw(), b123: draw(), b223: draw(), b233: draw(),
            };
            let (e1, e2, e3, e4) = compute_e(&c, &p, NICH_R0, NICH_OMEGA).unwrap();
            let (o1, o2, o3, o4) = e_oracle(&c, &p, NICH_R0, NICH_OMEGA);
            assert!((e1 - o1).norm() <= 1e-12 * (1.0 + o1.norm()));
            assert!((e2.re - o2).abs() <= 1e-12 * (1.0 + o2.abs()));
            assert_eq!(e2.im, 0.0);
            assert!((e3 - o3).norm() <= 1e-12 * (1.0 + o3.norm()));
            assert!((e4 - o4).norm() <= 1e-12 * (1.0 + o4.norm()));
        }
    }

    #[test]
    fn sign_flip_negates_the_linear_terms() {
        let p = nich();
        let c = TaylorCoeffs {
            a11: 0.3, a22: -1.1, a33: 0.7, a12: 0.2, a13: -0.4, a23: 0.9,
            b111: 1.2, b222: -0.8, b333: 0.1, b112: 0.5, b113: -0.2,
            b122: 0.6, b133: -0.9, b123: 0.4, b223: -0.3, b233: 0.8,
        };
        let neg = TaylorCoeffs {
            a11: -c.a11, a22: -c.a22, a33: -c.a33, a12: -c.a12, a13: -c.a13, a23: -c.a23,
            b111: -c.b111, b222: -c.b222, b333: -c.b333, b112: -c.b112, b113: -c.b113,
            b122: -c.b122, b133: -c.b133, b123: -c.b123, b223: -c.b223, b233: -c.b233,
        };
        let (e1, e2, e3, e4) = compute_e(&c, &p, NICH_R0, NICH_OMEGA).unwrap();
        let (f1, f2, f3, f4) = compute_e(&neg, &p, NICH_R0, NICH_OMEGA).unwrap();
        assert!((e1 + f1).norm() < 1e-12 * (1.0 + e1.norm()));
        assert!((e2 + f2).norm() < 1e-14 * (1.0 + e2.norm()));
        assert!((e3 + f3).norm() < 1e-12 * (1.0 + e3.norm()));
        // E4 is quadratic in the second-order coefficients
        assert!((e4 - f4).norm() < 1e-12 * (1.0 + e4.norm()));
    }

    #[test]
    fn scaling_separates_cubic_and_quadratic_parts() {
        let p = nich();
        let c = nich_coeffs();
        let s = 2.0;
        let scaled = TaylorCoeffs { a22: s * c.a22, b222: s * c.b222, ..TaylorCoeffs::zero() };
        let (e1, e2, e3, e4) = compute_e(&c, &p, NICH_R0, NICH_OMEGA).unwrap();
        let (f1, f2, f3, f4) = compute_e(&scaled, &p, NICH_R0, NICH_OMEGA).unwrap();
        assert_relative_eq!(f1.re, s * e1.re, max_relative = 1e-12);
        assert_relative_eq!(f2.re * f3.re, s * s * e2.re * e3.re, max_relative = 1e-12);
        assert_relative_eq!(f4.re, s * s * e4.re, max_relative = 1e-12);
    }

    #[test]
    fn k_coefficients_of_the_example() {
        let p = nich();
        let psi1 = psi1_zero(&p, NICH_R0, NICH_OMEGA).unwrap();
        let e = compute_e(&nich_coeffs(), &p, NICH_R0, NICH_OMEGA).unwrap();
        let (k1, k2) = k_coefficients(&e, psi1, &p, NICH_OMEGA);
        assert!((k2 + 0.3573).abs() <= 2e-3);
        assert_relative_eq!(k1, NICH_MU, max_relative = 1e-10);
        assert_relative_eq!(k2, NICH_K2, epsilon = 1e-9);
    }

    #[test]
    fn classification_rules() {
        let (dir, stab, period) = classify_hopf(2.518, -0.3573, NICH_OMEGA).unwrap();
        assert_eq!(dir, Direction::Supercritical);
        assert_eq!(stab, OrbitStability::StableOnCenterManifold);
        assert!((period - 1.5128).abs() < 1e-4);

        let (_, stab, _) = classify_hopf(1.0, 0.5, 1.0).unwrap();
        assert_eq!(stab, OrbitStability::UnstableOnCenterManifold);

        let (_, stab, period) = classify_hopf(1.0, 0.0, 2.0).unwrap();
        assert_eq!(stab, OrbitStability::Degenerate);
        assert_relative_eq!(period, PI, epsilon = 1e-15);

        assert!(classify_hopf(-1.0, 0.1, 1.0).is_err());
        assert!(classify_hopf(0.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn negative_tau_mirror_reproduces_the_example() {
        // the mirrored system carries the nonlinearity on the sigma slot
        let p = SystemParams::new(2.0, 1.0, 4.5, -0.3782).unwrap();
        let coeffs = TaylorCoeffs { a33: 1.5, b333: 1.5, ..TaylorCoeffs::zero() };
        let d = crossing::critical_delays(&p).unwrap();
        let nf = hopf_normal_form(&p, &coeffs, d.r0, d.omega_star).unwrap();
        assert_relative_eq!(nf.k1, NICH_MU, max_relative = 1e-8);
        assert_relative_eq!(nf.k2, NICH_K2, max_relative = 1e-6);
        assert_eq!(nf.orbit_stability, OrbitStability::StableOnCenterManifold);
        // K1 equals the transversal speed computed on the unmirrored line
        let mu = crossing::transversality(&p, d.r0, d.omega_star).unwrap();
        assert_relative_eq!(nf.k1, mu, max_relative = 1e-8);
    }
}
