use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{half_sq_dist, CentroidSet, DataMatrix};
use crate::error::{Result, SkmError};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for restart `r`, a pure function of `(seed, r)`.
pub fn restart_seed(seed: u64, restart: usize) -> u64 {
    splitmix64(seed ^ splitmix64(restart as u64))
}

/// K-means++ seeding: the first centroid is a uniformly drawn row, each
/// further one is drawn with probability proportional to its squared
/// distance to the nearest centroid chosen so far. Rows are never reused.
pub fn kmeanspp_init(x: &DataMatrix, k: usize, seed: u64) -> Result<CentroidSet> {
    let n = x.n_rows();
    if k == 0 {
        return Err(SkmError::invalid("number of clusters must be at least 1"));
    }
    if k > n {
        return Err(SkmError::invalid(format!(
            "number of clusters {k} exceeds number of observations {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = rng.gen_range(0..n);
    chosen.push(first);
    taken[first] = true;

    let mut nearest: Vec<f64> = x.rows().map(|r| half_sq_dist(r, x.row(first))).collect();
    while chosen.len() < k {
        let weights: Vec<f64> = nearest
            .iter()
            .zip(&taken)
            .map(|(&d, &t)| if t { 0.0 } else { d })
            .collect();
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(SkmError::Numerical("squared distance overflow during K-means++ seeding".into()));
        }
        let next = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(&mut rng),
            // every remaining row duplicates a chosen one
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
                free[rng.gen_range(0..free.len())]
            }
        };
        chosen.push(next);
        taken[next] = true;
        let c = x.row(next);
        for (d, r) in nearest.iter_mut().zip(x.rows()) {
            *d = d.min(half_sq_dist(r, c));
        }
    }
    CentroidSet::from_data_rows(x, &chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflowing_distances_are_numerical_errors() {
        let x = DataMatrix::from_column(&[1e300, -1e300, 2e300]).unwrap();
        assert!(matches!(kmeanspp_init(&x, 2, 0), Err(SkmError::Numerical(_))));
    }

    #[test]
    fn k_equals_n_picks_every_row() {
        let x = DataMatrix::from_column(&[0.0, 1.0, 5.0, 9.0, 2.5]).unwrap();
        for seed in 0..20 {
            let c = kmeanspp_init(&x, 5, seed).unwrap();
            let mut got: Vec<f64> = c.as_slice().to_vec();
            got.sort_by(f64::total_cmp);
            assert_eq!(got, vec![0.0, 1.0, 2.5, 5.0, 9.0]);
        }
    }

    #[test]
    fn k_one_is_a_row_and_deterministic() {
        let x = DataMatrix::from_column(&[3.0, 4.0, 5.0]).unwrap();
        let a = kmeanspp_init(&x, 1, 77).unwrap();
        let b = kmeanspp_init(&x, 1, 77).unwrap();
        assert_eq!(a, b);
        assert!([3.0, 4.0, 5.0].contains(&a.as_slice()[0]));
        let mut seen = [false; 3];
        for seed in 0..200 {
            let v = kmeanspp_init(&x, 1, seed).unwrap().as_slice()[0];
            seen[(v - 3.0) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn separated_pairs_get_one_centroid_each() {
        let x = DataMatrix::from_column(&[0.0, 0.1, 100.0, 100.1]).unwrap();
        let hits = (0..1000)
            .filter(|&seed| {
                let c = kmeanspp_init(&x, 2, seed).unwrap();
                let (a, b) = (c.as_slice()[0], c.as_slice()[1]);
                (a < 50.0) != (b < 50.0)
            })
            .count();
        assert!(hits as f64 / 1000.0 > 0.95, "{hits}");
    }

    #[test]
    fn duplicates_still_give_distinct_rows() {
        let x = DataMatrix::from_column(&[1.0, 1.0, 1.0]).unwrap();
        let c = kmeanspp_init(&x, 3, 4).unwrap();
        assert_eq!(c.n_clusters(), 3);
    }

    #[test]
    fn rejects_too_many_clusters() {
        let x = DataMatrix::from_column(&[1.0, 2.0]).unwrap();
        assert!(kmeanspp_init(&x, 3, 0).is_err());
        assert!(kmeanspp_init(&x, 0, 0).is_err());
    }

    #[test]
    fn restart_seeds_differ() {
        let s: Vec<u64> = (0..10).map(|r| restart_seed(1, r)).collect();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
    }
}
