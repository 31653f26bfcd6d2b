use serde::Serialize;

/// Per-iteration diagnostics emitted by experiment runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub tau: f64,
    pub sigma: f64,
    pub omega: f64,
    /// `||x^i - x̂||²`.
    pub err_x_sq: f64,
    /// `||u^i - û||²`.
    pub err_u_sq: f64,
    /// `||u^i - û||²_{Z_{i+1}M_{i+1}}`.
    pub metric_err_sq: f64,
    /// Rule-dependent theoretical bound on the error (see the experiments
    /// module); `NaN` when unavailable.
    pub bound: f64,
}
