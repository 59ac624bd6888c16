//! Shared oracles and parameter samplers for the integration suites.
//! Everything here is independent of the closed forms it is used to check.

use delayhopf::chareq::{eval_h, eval_h_prime};
use delayhopf::SystemParams;
use num_complex::Complex64;
use rand::Rng;

/// Finite-difference transversality oracle: tracks the root pair
/// `lambda(r)` by Newton iteration on `h(lambda; r, r - tau)` across
/// `[r0 - eps, r0 + eps]` in 40 steps and central-differences the real
/// part. Independent of the closed-form quotient it validates.
pub fn continuation_mu_prime(p: &SystemParams, r0: f64, omega_star: f64) -> f64 {
    let eps = 1e-3f64.min(0.45 * (r0 - p.tau).max(0.0)).min(0.45 * r0);
    assert!(eps > 0.0, "cannot track across r0 = {r0} with sigma0 = {}", r0 - p.tau);
    let track = |r_to: f64| -> Complex64 {
        let mut lam = Complex64::new(0.0, omega_star);
        for i in 1..=20 {
            let r = r0 + (r_to - r0) * i as f64 / 20.0;
            let s = r - p.tau;
            for _ in 0..60 {
                let hv = eval_h(lam, p, r, s).expect("finite");
                let step = hv / eval_h_prime(lam, p, r, s);
                lam -= step;
                if step.norm() < 1e-15 {
                    break;
                }
            }
        }
        lam
    };
    let lam_plus = track(r0 + eps);
    let lam_minus = track(r0 - eps);
    (lam_plus.re - lam_minus.re) / (2.0 * eps)
}

/// Random triple in one of the three Hopf-candidate regimes, with tau
/// kept inside the cheap admissibility certificates.
pub fn sample_hopf_candidate<R: Rng>(rng: &mut R, regime: u8) -> Option<SystemParams> {
    match regime {
        0 => {
            // bc > 0, |b-c| <= |a| < b+c
            let b: f64 = rng.gen_range(0.3..4.0);
            let c: f64 = rng.gen_range(0.3..4.0);
            let lo = b - c;
            let lo = lo.abs();
            let hi = 0.97 * (b + c);
            if hi <= lo {
                return None;
            }
            let mag = rng.gen_range(lo..hi);
            let a = if rng.gen_bool(0.8) { mag } else { -mag };
            let win_hi = ((b + c) * (b + c) - a * a).sqrt();
            let tau = rng.gen_range(-1.0..1.0) * std::f64::consts::PI / win_hi;
            SystemParams::new(a, b, c, tau).ok()
        }
        1 => {
            // bc > 0, |a| < |b-c|
            let b: f64 = rng.gen_range(0.3..4.0);
            let c: f64 = rng.gen_range(0.3..4.0);
            let diff = b - c;
            let diff = diff.abs();
            if diff < 0.2 {
                return None;
            }
            let mag = rng.gen_range(0.0..0.95 * diff);
            let a = if rng.gen_bool(0.8) { mag } else { -mag };
            let bound = (diff * diff - a * a).sqrt() / (b * c);
            let tau = rng.gen_range(-0.9..0.9) * bound;
            SystemParams::new(a, b, c, tau).ok()
        }
        _ => {
            // bc < 0, |a| < |b+c|
            let b: f64 = rng.gen_range(0.5..4.0);
            let c = -rng.gen_range(0.1..0.8 * b);
            let sum = b + c;
            let mag = rng.gen_range(0.0..0.95 * sum);
            let a = if rng.gen_bool(0.8) { mag } else { -mag };
            let bound = (sum * sum - a * a).sqrt() / (b * c).abs();
            let tau = rng.gen_range(-0.9..0.9) * bound;
            SystemParams::new(a, b, c, tau).ok()
        }
    }
}

/// Random triple that is absolutely stable (positive or negative bc).
#[allow(dead_code)] // each integration target compiles its own copy
pub fn sample_absolutely_stable<R: Rng>(rng: &mut R, positive_bc: bool) -> SystemParams {
    if positive_bc {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b: f64 = sign * rng.gen_range(0.2..2.5);
        let c: f64 = sign * rng.gen_range(0.2..2.5);
        let a = (b + c).abs() * rng.gen_range(1.05..2.5);
        SystemParams::new(a, b, c, rng.gen_range(-1.0..1.0)).unwrap()
    } else {
        let b: f64 = rng.gen_range(0.2..2.5);
        let c: f64 = -rng.gen_range(0.2..2.5);
        let a = (b - c).abs() * rng.gen_range(1.0..2.5);
        SystemParams::new(a, b, c, rng.gen_range(-1.0..1.0)).unwrap()
    }
}
