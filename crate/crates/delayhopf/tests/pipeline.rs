//! Cross-module consistency: crossing data feeding the normal form, the
//! sequence formulas against the imaginary-pair system, and simulation
//! behaviour around the predicted onset.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use delayhopf::{
    bifurcation_scan, critical_delays, crossing_frequencies, diagnose, hopf_normal_form,
    integrate, nicholson_linearize, r_sequence, sigma_bar, transversality, HistorySpec,
    NicholsonModel, SystemParams, TaylorCoeffs, Verdict,
};
use rand::SeedableRng;

fn nicholson_example() -> delayhopf::LinearizedModel {
    let m = NicholsonModel::new(2.0, 3.0 * 2.5f64.exp(), 1.0).unwrap();
    nicholson_linearize(&m, 0.3782).unwrap()
}

#[test]
fn sequence_members_satisfy_the_imaginary_system() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    'outer: for regime in [0u8, 1, 2] {
        let mut per_regime = 0;
        while per_regime < 12 {
            let Some(p) = common::sample_hopf_candidate(&mut rng, regime) else { continue };
            let Ok(data) = critical_delays(&p) else { continue };
            let per = 2.0 * PI / data.omega_star;
            assert!(data.sigma_bar >= 0.0 && data.sigma_bar < per);
            for k in data.k_tau..data.k_tau + 4 {
                let rk = r_sequence(&p, data.omega_star, k).unwrap();
                assert!(rk >= -1e-12);
                assert!(rk - p.tau >= -1e-12, "sigma_k must be admissible for k >= k_tau");
                let (e1, e2) = delayhopf::chareq::imaginary_system_residuals(
                    &p,
                    rk,
                    rk - p.tau,
                    data.omega_star,
                );
                assert!(
                    e1.abs() <= 1e-9 && e2.abs() <= 1e-9,
                    "k = {k}: residuals ({e1:.2e}, {e2:.2e}) for {p:?}"
                );
            }
            per_regime += 1;
            checked += 1;
            if checked > 60 {
                break 'outer;
            }
        }
    }
    assert!(checked >= 36);
}

#[test]
fn sigma_route_and_r_route_agree_on_the_critical_pair() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    while checked < 40 {
        let Some(p) = common::sample_hopf_candidate(&mut rng, (checked % 3) as u8) else {
            continue;
        };
        let Ok(data) = critical_delays(&p) else { continue };
        let sb = sigma_bar(&p, data.omega_star).unwrap();
        let r_from_sigma = p.tau + sb + 2.0 * PI / data.omega_star * data.k_tau as f64;
        let per = 2.0 * PI / data.omega_star;
        let r_from_r_side = r_sequence(&p, data.omega_star, 0).unwrap();
        let folds = ((r_from_sigma - r_from_r_side) / per).round();
        assert!(
            (r_from_sigma - r_from_r_side - folds * per).abs() < 1e-9,
            "routes disagree beyond a period multiple for {p:?}"
        );
        assert!((data.r0 - r_from_sigma).abs() < 1e-12);
        checked += 1;
    }
}

#[test]
fn transversality_oracle_on_random_certified_points() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5150);
    let mut checked = 0;
    while checked < 20 {
        let Some(p) = common::sample_hopf_candidate(&mut rng, (checked % 3) as u8) else {
            continue;
        };
        let Ok(data) = critical_delays(&p) else { continue };
        // the tracking oracle needs room on both sides of r0
        if data.sigma0 < 5e-3 || data.r0 < 5e-3 {
            continue;
        }
        let oracle = common::continuation_mu_prime(&p, data.r0, data.omega_star);
        let closed = transversality(&p, data.r0, data.omega_star).unwrap();
        assert!(
            (closed - oracle).abs() <= 2e-4 * closed.abs().max(1e-6),
            "mu' mismatch: closed {closed:.8}, oracle {oracle:.8} for {p:?}"
        );
        checked += 1;
    }
}

#[test]
fn mirrored_example_runs_end_to_end() {
    // the Nicholson nonlinearity moved onto the sigma-delayed slot
    let p = SystemParams::new(2.0, 1.0, 4.5, -0.3782).unwrap();
    let coeffs = TaylorCoeffs { a33: 1.5, b333: 1.5, ..TaylorCoeffs::zero() };
    let d = critical_delays(&p).unwrap();
    let nf = hopf_normal_form(&p, &coeffs, d.r0, d.omega_star).unwrap();
    assert!((nf.k2 + 0.3573965814465318).abs() < 1e-6);
    assert!((nf.k1 - d.mu_prime).abs() <= 1e-8 * d.mu_prime);
}

#[test]
fn multi_frequency_window_still_yields_a_consistent_point() {
    let p = SystemParams::new(2.0, 4.5, 1.0, 1.15).unwrap();
    let freqs = crossing_frequencies(&p).unwrap();
    assert!(freqs.len() >= 3, "expected a multi-root window, got {freqs:?}");
    let d = critical_delays(&p).unwrap();
    let nf = hopf_normal_form(
        &p,
        &TaylorCoeffs { a22: 1.5, b222: 1.5, ..TaylorCoeffs::zero() },
        d.r0,
        d.omega_star,
    )
    .unwrap();
    assert!((nf.k1 - d.mu_prime).abs() <= 1e-8 * d.mu_prime);
}

#[test]
fn oscillation_onset_brackets_the_critical_delay() {
    let lin = nicholson_example();
    let d = critical_delays(&lin.params).unwrap();
    let phi1: HistorySpec = HistorySpec::Formula(Arc::new(|t: f64| t.sin() + 2.0));
    let grid: Vec<f64> = (0..9).map(|i| 0.47 + 0.02 * i as f64).collect();
    let rows = bifurcation_scan(&lin, &grid, &phi1, 100.0).unwrap();
    let onset = rows
        .iter()
        .find(|row| {
            row.diagnostics
                .as_ref()
                .is_some_and(|di| di.verdict == Verdict::SustainedOscillation)
        })
        .map(|row| row.r)
        .expect("sustained oscillation expected within the grid");
    assert!(
        (onset - d.r0).abs() <= 0.05 + 0.02,
        "onset {onset} vs r0 {:.4} (allowing one grid step)",
        d.r0
    );
    // no sustained verdict well below the critical delay
    for row in &rows {
        if row.r < d.r0 - 0.05 {
            let v = row.diagnostics.as_ref().unwrap().verdict;
            assert_ne!(v, Verdict::SustainedOscillation, "r = {}", row.r);
        }
    }
}

#[test]
fn amplitude_grows_like_the_square_root_of_the_offset() {
    let lin = nicholson_example();
    let d = critical_delays(&lin.params).unwrap();
    let phi1: HistorySpec = HistorySpec::Formula(Arc::new(|t: f64| t.sin() + 2.0));
    let amp_at = |alpha: f64, t_end: f64| {
        let r = d.r0 + alpha;
        let h = delayhopf::ddesim::default_step(r, r - lin.params.tau);
        let traj = integrate(&*lin.rhs_arc(), r, r - lin.params.tau, &phi1, t_end, h).unwrap();
        let di = diagnose(&traj, lin.equilibrium, 0.7);
        assert_eq!(di.verdict, Verdict::SustainedOscillation, "alpha = {alpha}");
        di.amplitude
    };
    let ratio = amp_at(0.08, 150.0) / amp_at(0.02, 260.0);
    assert!(
        (ratio - 2.0).abs() <= 0.6,
        "amplitude ratio across a 4x offset change: {ratio} (sqrt law predicts 2.0)"
    );
}
