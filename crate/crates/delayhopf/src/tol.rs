/// Numerical tolerances used across the analysis operations.
///
/// The defaults are the tested contract; every field can be overridden for
/// a particular call through the `*_with` function variants.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Residual bound for the purely-imaginary system and |h(iw)| checks.
    pub residual: f64,
    /// Cap on the scan step used to bracket crossing frequencies.
    pub scan_step: f64,
    /// Absolute bisection tolerance for root refinement.
    pub bisect: f64,
    /// Allowed deviation of the unit-vector right-hand side from norm 1.
    pub unit_norm: f64,
    /// Slack before an out-of-range arccos argument is rejected.
    pub arccos_clamp: f64,
    /// |p| threshold below which a sign-preserving local minimum counts
    /// as a tangency.
    pub tangency: f64,
    /// Band around K2 = 0 classified as degenerate.
    pub degenerate_k2: f64,
    /// Minimum |h| allowed on a root-counting contour.
    pub contour_min: f64,
    /// Ceiling for the tangency-threshold search; 0 selects an automatic
    /// value from the crossing window.
    pub tau_ceiling: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            scan_step: 1e-3,
            bisect: 1e-13,
            unit_norm: 1e-8,
            arccos_clamp: 1e-8,
            tangency: 1e-9,
            degenerate_k2: 1e-9,
            contour_min: 1e-9,
            tau_ceiling: 0.0,
        }
    }
}

impl Tolerances {
    /// Tolerance bundle with the residual scale replaced by `residual`.
    pub fn with_residual(residual: f64) -> Self {
        Self { residual, ..Self::default() }
    }
}
