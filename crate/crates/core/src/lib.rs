//! Smooth K-Means.
//!
//! Hard K-means (HKM), fuzzy K-means (FKM), maximum-entropy fuzzy clustering
//! (MEFC) and equilibrium K-means (EKM) are all gradient descent on the
//! within-cluster sum of squares with the inner `min` replaced by a smooth
//! minimum. This crate implements that single engine, the four smoothers,
//! streaming updates, external validity metrics and seeded synthetic data.
//!
//! Distances throughout are *half* squared Euclidean distances,
//! `d = ½‖x − c‖²`, so that `∂d/∂c = −(x − c)`.

pub mod cli;
pub mod data;
pub mod datagen;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod minibatch;
pub mod objectives;
pub mod smoothmin;

pub use data::{CentroidSet, DataMatrix, DistanceMatrix};
pub use engine::{RunResult, SkmConfig};
pub use error::{Result, SkmError};
pub use smoothmin::{SmootherKind, SmootherSpec};

/// Hard cluster assignment per observation, values in `[0, K)`.
pub type LabelVector = Vec<usize>;
