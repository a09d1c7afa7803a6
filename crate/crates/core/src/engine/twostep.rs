//! The textbook two-step forms (memberships, then weighted centroids) of
//! Lloyd's algorithm, FKM, MEFC and EKM. They are written independently of
//! the smoothers so they can serve as a cross-check of the gradient-form
//! engine.

use crate::data::{check_dims, distances_to, CentroidSet, DataMatrix};
use crate::error::{Result, SkmError};

use super::GUARD_EPS;

/// FKM membership `u_k = 1 / Σ_i (‖x−c_k‖/‖x−c_i‖)^(2/(m−1))` from half
/// squared distances. A zero distance takes the full membership.
pub fn fkm_memberships(d: &[f64], m: f64) -> Result<Vec<f64>> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(SkmError::invalid(format!("fuzzifier m must exceed 1, got {m}")));
    }
    if d.is_empty() {
        return Err(SkmError::Empty("membership of an empty distance vector"));
    }
    if let Some(z) = d.iter().position(|&v| v == 0.0) {
        let mut u = vec![0.0; d.len()];
        u[z] = 1.0;
        return Ok(u);
    }
    // squared-norm ratio: (‖a‖/‖b‖)^(2/(m−1)) = (d_a/d_b)^(1/(m−1))
    let e = 1.0 / (m - 1.0);
    Ok(d.iter()
        .map(|&dk| 1.0 / d.iter().map(|&di| (dk / di).powf(e)).sum::<f64>())
        .collect())
}

fn softmax_neg(d: &[f64], beta: f64) -> Vec<f64> {
    let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = d.iter().map(|&v| (-beta * (v - lo)).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SkmError::invalid(format!("{name} must be positive, got {v}")))
    }
}

/// MEFC membership: softmax of `−λ d`.
pub fn mefc_memberships(d: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_positive("lambda", lambda)?;
    if d.is_empty() {
        return Err(SkmError::Empty("membership of an empty distance vector"));
    }
    Ok(softmax_neg(d, lambda))
}

/// EKM update weights `w_k = u_k [1 − α (d_k − Σ_i u_i d_i)]` with `u` the
/// softmax of `−α d`. They sum to one but may be negative.
pub fn ekm_weights(d: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_positive("alpha", alpha)?;
    if d.is_empty() {
        return Err(SkmError::Empty("weights of an empty distance vector"));
    }
    let u = softmax_neg(d, alpha);
    let energy: f64 = u.iter().zip(d).map(|(u, d)| u * d).sum();
    Ok(u.iter().zip(d).map(|(u, dk)| u * (1.0 - alpha * (dk - energy))).collect())
}

/// EKM membership: softmax of `−α d`, always in `[0, 1]`.
pub fn ekm_membership(d: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_positive("alpha", alpha)?;
    if d.is_empty() {
        return Err(SkmError::Empty("membership of an empty distance vector"));
    }
    Ok(softmax_neg(d, alpha))
}

/// `c_k = Σ_n w_kn x_n / Σ_n w_kn`, leaving `c_k` unchanged when the weight
/// sum is at most [`GUARD_EPS`].
fn weighted_centroids<F>(x: &DataMatrix, c: &CentroidSet, mut weights: F) -> Result<CentroidSet>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    check_dims(x, c)?;
    let (k, p) = (c.n_clusters(), c.n_cols());
    let mut num = vec![0.0; k * p];
    let mut den = vec![0.0; k];
    let mut d = vec![0.0; k];
    for xn in x.rows() {
        distances_to(xn, c, &mut d);
        let w = weights(&d)?;
        for (j, &wk) in w.iter().enumerate() {
            den[j] += wk;
            for (a, xv) in num[j * p..(j + 1) * p].iter_mut().zip(xn) {
                *a += wk * xv;
            }
        }
    }
    let mut out = c.clone();
    for j in 0..k {
        if den[j] > GUARD_EPS {
            for (o, a) in out.row_mut(j).iter_mut().zip(&num[j * p..(j + 1) * p]) {
                *o = a / den[j];
            }
        }
    }
    Ok(out)
}

/// One FKM iteration: memberships `u`, then centroids weighted by `u^m`.
pub fn fkm_step(x: &DataMatrix, c: &CentroidSet, m: f64) -> Result<CentroidSet> {
    weighted_centroids(x, c, |d| Ok(fkm_memberships(d, m)?.into_iter().map(|u| u.powf(m)).collect()))
}

/// One MEFC iteration.
pub fn mefc_step(x: &DataMatrix, c: &CentroidSet, lambda: f64) -> Result<CentroidSet> {
    weighted_centroids(x, c, |d| mefc_memberships(d, lambda))
}

/// One EKM iteration (weights, then weighted centroids).
pub fn ekm_step(x: &DataMatrix, c: &CentroidSet, alpha: f64) -> Result<CentroidSet> {
    weighted_centroids(x, c, |d| ekm_weights(d, alpha))
}

/// One Lloyd iteration: nearest-centroid assignment (lowest index on ties),
/// then cluster means. Empty clusters keep their centroid.
pub fn lloyd_step(x: &DataMatrix, c: &CentroidSet) -> Result<CentroidSet> {
    weighted_centroids(x, c, |d| {
        let arg = crate::data::argmin(d);
        let mut w = vec![0.0; d.len()];
        w[arg] = 1.0;
        Ok(w)
    })
}
