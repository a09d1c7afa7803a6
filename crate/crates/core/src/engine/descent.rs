use serde::Serialize;

use crate::data::{CentroidSet, DataMatrix};
use crate::error::{Result, SkmError};
use crate::objectives::evaluate_objective;
use crate::smoothmin::SmootherSpec;

use super::skm_step;

const RELATIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentReport {
    /// Whether monotone descent is guaranteed (concave smoother) and thus
    /// checked, rather than only reported.
    pub asserted: bool,
    /// `(τ, J(τ+1) − J(τ))` for every step that increased the objective
    /// beyond the relative tolerance.
    pub increases: Vec<(usize, f64)>,
    pub passed: bool,
}

/// Checks an objective trace for monotone descent. Concave smoothers
/// (hard minimum, LogSumExp, p-Norm) must never increase by more than a
/// 1e-9 relative tolerance; Boltzmann increases are only reported.
pub fn descent_check(trace: &[f64], spec: SmootherSpec) -> Result<DescentReport> {
    if trace.len() < 2 {
        return Err(SkmError::invalid("descent check needs a trace of at least 2 values"));
    }
    let increases: Vec<(usize, f64)> = trace
        .windows(2)
        .enumerate()
        .filter_map(|(t, w)| {
            let delta = w[1] - w[0];
            (delta > RELATIVE_TOL * w[0].abs().max(f64::MIN_POSITIVE)).then_some((t, delta))
        })
        .collect();
    let asserted = spec.is_concave();
    Ok(DescentReport {
        asserted,
        passed: !asserted || increases.is_empty(),
        increases,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentBound {
    pub before: f64,
    pub after: f64,
    /// `J(τ) − J(τ+1)`.
    pub decrease: f64,
    /// `½ Σ_k γ_k ‖∂J/∂c_k‖²`, the guaranteed decrease for concave `h`.
    pub bound: f64,
}

/// Takes one step from `c` and compares the achieved decrease with the
/// majorization bound. Frozen clusters contribute nothing to the bound.
pub fn descent_bound(x: &DataMatrix, c: &CentroidSet, spec: SmootherSpec) -> Result<(DescentBound, CentroidSet)> {
    let step = skm_step(x, c, spec)?;
    let after = evaluate_objective(x, &step.centroids, spec)?.value;
    let bound = step
        .gradient
        .iter()
        .zip(&step.learning_rates.values)
        .map(|(g, &gamma)| 0.5 * gamma * g.iter().map(|v| v * v).sum::<f64>())
        .sum();
    Ok((
        DescentBound {
            before: step.objective,
            after,
            decrease: step.objective - after,
            bound,
        },
        step.centroids,
    ))
}
