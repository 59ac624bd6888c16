//! Stability and Hopf-bifurcation toolkit for scalar differential
//! equations with two discrete delays whose difference `tau = r - sigma`
//! is held fixed:
//!
//! ```text
//! x'(t) = f(x(t), x(t - r), x(t - sigma)),    sigma = r - tau.
//! ```
//!
//! Given the linearization triple `(a, b, c)` at an equilibrium, the crate
//!
//! * classifies the equilibrium's regime (absolute stability, conditional
//!   stability, Hopf candidate) from the characteristic equation
//!   `lambda + a + b e^{-lambda r} + c e^{-lambda sigma} = 0` ([`chareq`]),
//! * locates the critical delay `r0` where a conjugate root pair crosses
//!   the imaginary axis, together with the crossing frequency `w*` and the
//!   transversal speed `mu'(r0)` ([`crossing`]),
//! * evaluates the center-manifold normal form to decide the direction of
//!   the bifurcation and the stability of the emerging periodic orbit
//!   ([`normalform`]),
//! * ships ready-made Nicholson's-blowflies and Mackey-Glass harvesting
//!   models plus a custom-model builder ([`models`]), and
//! * verifies predictions by direct simulation with a method-of-steps
//!   RK4 integrator and oscillation diagnostics ([`ddesim`]).
//!
//! All operations are pure functions over immutable inputs and are safe to
//! call concurrently.

pub mod chareq;
pub mod crossing;
pub mod ddesim;
mod error;
pub mod models;
pub mod normalform;
mod tol;

pub use num_complex::Complex64;

pub use chareq::{
    count_rhp_roots, count_rhp_roots_with, crossing_frequencies, eval_h, first_crossing_freq,
    first_crossing_freq_with, g_curve, omega_window, regime_classify, tau_star, tau_star_with,
    OmegaWindow, RegimeClass, RegimeKind, SystemParams, TauStar,
};
pub use crossing::{
    critical_delays, critical_delays_with, r_sequence, sigma_bar, transversality, CrossingData,
};
pub use ddesim::{
    bifurcation_scan, diagnose, integrate, DiagnoseOptions, HistorySpec, OscillationDiagnostics,
    ScanRow, Trajectory, Verdict,
};
pub use error::{Error, Result};
pub use models::{
    mackey_equilibrium, mackey_linearize, nicholson_equilibrium, nicholson_linearize,
    nicholson_linearize_zero, theorem_conditions, LinearizedModel, MackeyGlassModel, ModelSource,
    NicholsonModel, TheoremReport,
};
pub use normalform::{
    classify_hopf, compute_e, hopf_normal_form, hopf_normal_form_with, k_coefficients, psi1_zero,
    Direction, NormalFormResult, OrbitStability, TaylorCoeffs,
};
pub use tol::Tolerances;
