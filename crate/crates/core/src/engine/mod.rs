//! The unified smooth K-means iteration
//!
//! ```text
//! c_k ← c_k − γ_k ∂J/∂c_k,    γ_k = 1 / Σ_n ∂h/∂d_kn
//! ```
//!
//! which reduces to Lloyd's algorithm, FKM, MEFC or EKM depending on the
//! smoother, plus seeding, restarts and convergence control.

mod alpha;
mod descent;
mod init;
mod twostep;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{check_dims, nearest_labels, CentroidSet, DataMatrix};
use crate::error::{Result, SkmError};
use crate::objectives::{evaluate_objective, gradient_from_weights, weights_and_objective};
use crate::smoothmin::{SmootherKind, SmootherSpec};

pub use alpha::{alpha_scan, auto_alpha, find_jump, AlphaScanRow};
pub use descent::{descent_bound, descent_check, DescentBound, DescentReport};
pub use init::{kmeanspp_init, restart_seed};
pub use twostep::{
    ekm_membership, ekm_step, ekm_weights, fkm_memberships, fkm_step, lloyd_step, mefc_memberships,
    mefc_step,
};

/// A cluster whose total influence is at most this value keeps its centroid
/// for the iteration.
pub const GUARD_EPS: f64 = 1e-8;

pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkmConfig {
    pub spec: SmootherSpec,
    pub max_iter: usize,
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub track_trace: bool,
}

impl SkmConfig {
    pub fn new(spec: SmootherSpec) -> Self {
        Self {
            spec,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            restarts: 1,
            seed: 0,
            track_trace: false,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.track_trace = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(SkmError::invalid("max_iter must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(SkmError::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.restarts == 0 {
            return Err(SkmError::invalid("restarts must be at least 1"));
        }
        SmootherSpec::new(self.spec.kind, self.spec.param)?;
        Ok(())
    }
}

/// Per-point, per-cluster influence `∂h/∂d_kn`, K×N row-major by cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    k: usize,
    n: usize,
    values: Vec<f64>,
}

impl WeightMatrix {
    pub fn n_clusters(&self) -> usize {
        self.k
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, n: usize) -> f64 {
        self.values[k * self.n + n]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.k).map(|j| self.get(j, i)).sum())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.k).map(|j| self.row(j).iter().sum()).collect()
    }
}

/// `γ_k = 1 / Σ_n w_kn` for each cluster; 0 marks a cluster that was frozen
/// (or, for the hard minimum, re-seeded) this iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningRates {
    pub values: Vec<f64>,
}

/// Output of one [`skm_step`].
#[derive(Debug, Clone)]
pub struct SkmStep {
    pub weights: WeightMatrix,
    pub centroids: CentroidSet,
    pub learning_rates: LearningRates,
    /// `∂J/∂c` at the input centroids, K rows of P.
    pub gradient: Vec<Vec<f64>>,
    /// Objective at the input centroids.
    pub objective: f64,
    /// Clusters left in place (or re-seeded, for the hard minimum).
    pub guarded: Vec<usize>,
}

/// One gradient step of the smoothed objective with per-cluster learning
/// rate `1/Σ_n w_kn`, which is algebraically the weighted-centroid update.
///
/// A cluster whose weight sum is at most [`GUARD_EPS`] keeps its centroid.
/// Under the hard minimum an empty cluster instead moves onto the point with
/// the largest current nearest-centroid distance.
pub fn skm_step(x: &DataMatrix, c: &CentroidSet, spec: SmootherSpec) -> Result<SkmStep> {
    check_dims(x, c)?;
    let (k, p, n) = (c.n_clusters(), c.n_cols(), x.n_rows());
    let (w, objective) = weights_and_objective(x, c, spec);
    let g = gradient_from_weights(x, c, &w);

    let mut next = c.clone();
    let mut rates = vec![0.0; k];
    let mut guarded = Vec::new();
    for j in 0..k {
        let s: f64 = w[j * n..(j + 1) * n].iter().sum();
        if s <= GUARD_EPS {
            guarded.push(j);
            continue;
        }
        let gamma = 1.0 / s;
        rates[j] = gamma;
        for (cv, gv) in next.row_mut(j).iter_mut().zip(&g[j * p..(j + 1) * p]) {
            *cv -= gamma * gv;
        }
    }

    if spec.kind == SmootherKind::HardMin && !guarded.is_empty() {
        reseed_empty(x, c, &mut next, &guarded)?;
    }

    Ok(SkmStep {
        weights: WeightMatrix { k, n, values: w },
        centroids: next,
        learning_rates: LearningRates { values: rates },
        gradient: g.chunks_exact(p).map(<[f64]>::to_vec).collect(),
        objective,
        guarded,
    })
}

fn reseed_empty(x: &DataMatrix, c: &CentroidSet, next: &mut CentroidSet, empty: &[usize]) -> Result<()> {
    let mut buf = vec![0.0; c.n_clusters()];
    let mut far: Vec<(f64, usize)> = x
        .rows()
        .enumerate()
        .map(|(i, xn)| {
            crate::data::distances_to(xn, c, &mut buf);
            (buf.iter().cloned().fold(f64::INFINITY, f64::min), i)
        })
        .collect();
    // farthest first, lower index on ties
    far.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (&j, &(_, i)) in empty.iter().zip(&far) {
        next.row_mut(j).copy_from_slice(x.row(i));
    }
    Ok(())
}

/// Relative centroid movement `‖C' − C‖_F / ‖C'‖_F`.
pub fn relative_shift(prev: &CentroidSet, next: &CentroidSet) -> f64 {
    let num: f64 = prev
        .as_slice()
        .iter()
        .zip(next.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den: f64 = next.as_slice().iter().map(|v| v * v).sum();
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        (num / den).sqrt()
    }
}

/// Output of one clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub centroids: CentroidSet,
    pub labels: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub objective_trace: Option<Vec<f64>>,
}

/// Iterates [`skm_step`] from `c0` until the relative centroid shift is at
/// most `config.tol` or `config.max_iter` steps have run. `restarts` and
/// `seed` are ignored.
pub fn run_from(x: &DataMatrix, c0: CentroidSet, config: &SkmConfig) -> Result<RunResult> {
    config.validate()?;
    check_dims(x, &c0)?;
    let spec = config.spec;
    let mut c = c0;
    let mut trace = config
        .track_trace
        .then(|| evaluate_objective(x, &c, spec).map(|o| vec![o.value]))
        .transpose()?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        let step = skm_step(x, &c, spec)?;
        iterations += 1;
        if !step.centroids.is_finite() {
            return Err(SkmError::Numerical(format!(
                "non-finite centroid after iteration {iterations}"
            )));
        }
        let shift = relative_shift(&c, &step.centroids);
        c = step.centroids;
        if let Some(t) = trace.as_mut() {
            t.push(evaluate_objective(x, &c, spec)?.value);
        }
        if shift <= config.tol {
            converged = true;
            break;
        }
    }
    let objective = evaluate_objective(x, &c, spec)?.value;
    if !objective.is_finite() {
        return Err(SkmError::Numerical("non-finite objective".into()));
    }
    Ok(RunResult {
        labels: nearest_labels(x, &c)?,
        centroids: c,
        objective,
        iterations,
        converged,
        restart_index: 0,
        objective_trace: trace,
    })
}

/// Clusters `x` into `k` groups: every restart seeds with K-means++ from
/// [`restart_seed`]`(seed, r)` and iterates to convergence; the restart with
/// the lowest final objective wins (lowest index on ties). Restarts run in
/// parallel and the result does not depend on scheduling.
pub fn run(x: &DataMatrix, k: usize, config: &SkmConfig) -> Result<RunResult> {
    config.validate()?;
    if k == 0 || k > x.n_rows() {
        return Err(SkmError::invalid(format!(
            "number of clusters must be in 1..={}, got {k}",
            x.n_rows()
        )));
    }
    let results: Vec<RunResult> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let c0 = kmeanspp_init(x, k, restart_seed(config.seed, r))?;
            let mut res = run_from(x, c0, config)?;
            res.restart_index = r;
            Ok(res)
        })
        .collect::<Result<_>>()?;
    results
        .into_iter()
        .min_by(|a, b| {
            a.objective
                .total_cmp(&b.objective)
                .then(a.restart_index.cmp(&b.restart_index))
        })
        .ok_or(SkmError::Empty("no restarts"))
}
