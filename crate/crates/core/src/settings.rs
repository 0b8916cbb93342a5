//! Global numeric settings shared by every certifier.

/// Tolerances and truncation defaults. A single record so that every report
/// can echo exactly what was used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericSettings {
    /// Absolute tolerance for quadrature and eigen computations.
    pub quad_tol: f64,
    /// Absolute tolerance on transform values in Bochner tests.
    pub transform_tol: f64,
    /// Boundary guard, relative to `max |f|`, for real-line windows.
    pub boundary_rel: f64,
    /// Tail tolerance relative to the total mass `sum_n b_n(e)`.
    pub tail_rel: f64,
    /// Default Schoenberg truncation degree.
    pub truncation: usize,
    /// Points per randomized Gram probe.
    pub probe_points: usize,
    /// Trials per randomized Gram probe.
    pub probe_trials: usize,
    /// Run the swapped-order (partial transform first) cross-check in
    /// sphere x abelian certification.
    pub cross_check: bool,
}

impl Default for NumericSettings {
    fn default() -> Self {
        Self {
            quad_tol: 1e-12,
            transform_tol: 1e-9,
            boundary_rel: 1e-6,
            tail_rel: 1e-8,
            truncation: 64,
            probe_points: 10,
            probe_trials: 200,
            cross_check: false,
        }
    }
}

impl NumericSettings {
    /// Quadrature order used for a given truncation degree.
    pub fn default_quad_order(max_degree: usize) -> usize {
        2 * (max_degree + 1)
    }
}
