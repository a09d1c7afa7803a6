use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Result, SkmError};
use crate::metrics::nmi;
use crate::smoothmin::SmootherSpec;

use super::{run, SkmConfig};

/// `α = 2 / d̄₀` where `d̄₀ = (1/N) Σ_n ½‖x_n‖²` is the mean half squared
/// norm of the (normalized) data.
pub fn auto_alpha(x: &DataMatrix) -> Result<f64> {
    let d0 = x
        .rows()
        .map(|r| 0.5 * r.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / x.n_rows() as f64;
    if d0 <= 0.0 {
        return Err(SkmError::invalid("automatic alpha is undefined for all-zero data"));
    }
    Ok(2.0 / d0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaScanRow {
    pub alpha: f64,
    pub min_centroid_distance: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub nmi: Option<f64>,
}

/// Runs EKM once per α (all with `base.seed` and `base.restarts`) and
/// reports the smallest centroid–centroid distance. A sudden jump in that
/// distance as α decreases marks the onset of centroid repulsion.
pub fn alpha_scan(
    x: &DataMatrix,
    k: usize,
    alphas: &[f64],
    base: &SkmConfig,
    reference: Option<&[usize]>,
) -> Result<Vec<AlphaScanRow>> {
    if alphas.is_empty() {
        return Err(SkmError::Empty("alpha scan needs at least one alpha"));
    }
    if let Some(r) = reference {
        if r.len() != x.n_rows() {
            return Err(SkmError::DimensionMismatch {
                expected: x.n_rows(),
                got: r.len(),
            });
        }
    }
    alphas
        .iter()
        .map(|&alpha| {
            let cfg = SkmConfig {
                spec: SmootherSpec::boltzmann(alpha)?,
                ..*base
            };
            let res = run(x, k, &cfg)?;
            let score = reference.map(|r| nmi(r, &res.labels)).transpose()?;
            Ok(AlphaScanRow {
                alpha,
                min_centroid_distance: res.centroids.min_pairwise_distance(),
                objective: res.objective,
                iterations: res.iterations,
                converged: res.converged,
                nmi: score,
            })
        })
        .collect()
}

/// First position `i` (in scan order) where the minimum centroid distance
/// grows by more than `ratio` from row `i-1` to row `i`.
pub fn find_jump(rows: &[AlphaScanRow], ratio: f64) -> Option<usize> {
    (1..rows.len()).find(|&i| {
        let (a, b) = (rows[i - 1].min_centroid_distance, rows[i].min_centroid_distance);
        a > 0.0 && b / a > ratio
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::zscore_normalize;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn hand_value() {
        let x = DataMatrix::from_column(&[1.0, -1.0]).unwrap();
        assert_eq!(auto_alpha(&x).unwrap(), 4.0);
        assert!(auto_alpha(&DataMatrix::from_column(&[0.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn scales_inverse_square() {
        let x = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.2, -1.0]]).unwrap();
        let a = auto_alpha(&x).unwrap();
        let b = auto_alpha(&x.scaled(3.0).unwrap()).unwrap();
        assert!((b - a / 9.0).abs() < 1e-12);
    }

    #[test]
    fn standardized_data_gives_four_over_p() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for p in [1usize, 2, 5] {
            let v: Vec<f64> = (0..2000 * p).map(|_| StandardNormal.sample(&mut rng)).collect();
            let (z, _) = zscore_normalize(&DataMatrix::new(2000, p, v).unwrap()).unwrap();
            let a = auto_alpha(&z).unwrap();
            let expect = 4.0 / p as f64;
            assert!((a - expect).abs() / expect < 0.1, "p={p}: {a}");
        }
    }

    #[test]
    fn single_blob_has_no_jump() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let v: Vec<f64> = (0..600).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = DataMatrix::new(300, 2, v).unwrap();
        let alphas = [10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1];
        let base = SkmConfig::new(SmootherSpec::hard()).with_restarts(3).with_seed(2);
        let rows = alpha_scan(&x, 2, &alphas, &base, None).unwrap();
        assert_eq!(find_jump(&rows, 1.5), None, "{rows:?}");
        // small alpha flattens the weights and the centroids collapse to the mean
        assert!(rows.last().unwrap().min_centroid_distance < 1e-3, "{rows:?}");
    }

    #[test]
    fn empty_alphas_rejected() {
        let x = DataMatrix::from_column(&[1.0, 2.0]).unwrap();
        assert!(alpha_scan(&x, 1, &[], &SkmConfig::new(SmootherSpec::hard()), None).is_err());
    }
}
