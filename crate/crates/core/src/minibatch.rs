//! One-point-at-a-time centroid updates for HKM and EKM.
//!
//! Each cluster keeps a count `m_k` (starting at 1) that sets its learning
//! rate `1/m_k`. HKM moves only the nearest centroid; EKM moves every
//! centroid by its signed EKM weight, so a point can push a centroid away.
//! Under EKM only the nearest centroid's count is incremented.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::{argmin, distances_to, CentroidSet, DataMatrix};
use crate::error::{Result, SkmError};
use crate::objectives::evaluate_objective;
use crate::smoothmin::{evaluate_into, SmootherSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum StreamMode {
    Hkm,
    Ekm { alpha: f64 },
}

impl StreamMode {
    fn spec(self) -> SmootherSpec {
        match self {
            StreamMode::Hkm => SmootherSpec::hard(),
            StreamMode::Ekm { alpha } => SmootherSpec {
                kind: crate::SmootherKind::Boltzmann,
                param: alpha,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamState {
    pub centroids: CentroidSet,
    pub counts: Vec<u64>,
    pub mode: StreamMode,
    pub points_seen: u64,
    dist: Vec<f64>,
    weights: Vec<f64>,
}

impl StreamState {
    pub fn new(c0: CentroidSet, mode: StreamMode) -> Result<Self> {
        if let StreamMode::Ekm { alpha } = mode {
            SmootherSpec::boltzmann(alpha)?;
        }
        let k = c0.n_clusters();
        Ok(Self {
            centroids: c0,
            counts: vec![1; k],
            mode,
            points_seen: 0,
            dist: vec![0.0; k],
            weights: vec![0.0; k],
        })
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.mode {
            StreamMode::Hkm => None,
            StreamMode::Ekm { alpha } => Some(alpha),
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.centroids.n_cols() {
            return Err(SkmError::DimensionMismatch {
                expected: self.centroids.n_cols(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Nearest centroid `k*` gets `m_k* += 1` and moves `1/m_k*` of the way
    /// to `x`.
    pub fn update_hkm(&mut self, x: &[f64]) -> Result<()> {
        self.check(x)?;
        distances_to(x, &self.centroids, &mut self.dist);
        let k = argmin(&self.dist);
        self.counts[k] += 1;
        let rate = 1.0 / self.counts[k] as f64;
        for (c, xv) in self.centroids.row_mut(k).iter_mut().zip(x) {
            *c += rate * (xv - *c);
        }
        self.points_seen += 1;
        Ok(())
    }

    /// Every centroid moves by `w_k/m_k · (x − c_k)` with `w` the EKM
    /// weights at `x`; the nearest centroid's count is incremented first.
    pub fn update_ekm(&mut self, x: &[f64]) -> Result<()> {
        self.check(x)?;
        let StreamMode::Ekm { alpha } = self.mode else {
            return Err(SkmError::invalid("EKM update on a stream in HKM mode"));
        };
        distances_to(x, &self.centroids, &mut self.dist);
        let spec = SmootherSpec {
            kind: crate::SmootherKind::Boltzmann,
            param: alpha,
        };
        evaluate_into(spec, &self.dist, &mut self.weights);
        let nearest = argmin(&self.dist);
        self.counts[nearest] += 1;
        for (k, &w) in self.weights.iter().enumerate() {
            let rate = w / self.counts[k] as f64;
            for (c, xv) in self.centroids.row_mut(k).iter_mut().zip(x) {
                *c += rate * (xv - *c);
            }
        }
        if !self.centroids.is_finite() {
            return Err(SkmError::Numerical("streaming update produced a non-finite centroid".into()));
        }
        self.points_seen += 1;
        Ok(())
    }

    /// Applies the update of the stream's mode.
    pub fn update(&mut self, x: &[f64]) -> Result<()> {
        match self.mode {
            StreamMode::Hkm => self.update_hkm(x),
            StreamMode::Ekm { .. } => self.update_ekm(x),
        }
    }
}

pub fn stream_init(c0: CentroidSet, mode: StreamMode) -> Result<StreamState> {
    StreamState::new(c0, mode)
}

/// Objective of the stream's mode at the end of an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub objective: f64,
    pub points_seen: u64,
}

/// Presents `x` for `epochs` passes, reshuffled each epoch from `seed` (or
/// in file order when `shuffle` is false).
pub fn stream_run(
    x: &DataMatrix,
    c0: CentroidSet,
    mode: StreamMode,
    epochs: usize,
    seed: u64,
    shuffle: bool,
) -> Result<(StreamState, Vec<EpochRecord>)> {
    if epochs == 0 {
        return Err(SkmError::invalid("epochs must be at least 1"));
    }
    if x.n_cols() != c0.n_cols() {
        return Err(SkmError::DimensionMismatch {
            expected: c0.n_cols(),
            got: x.n_cols(),
        });
    }
    let mut state = StreamState::new(c0, mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    let mut records = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        if shuffle {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            state.update(x.row(i))?;
        }
        records.push(EpochRecord {
            epoch,
            objective: evaluate_objective(x, &state.centroids, mode.spec())?.value,
            points_seen: state.points_seen,
        });
    }
    Ok((state, records))
}
