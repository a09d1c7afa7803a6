//! Smoothed within-cluster sum of squares, its centroid gradient, and a 1-D
//! objective landscape scanner.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{check_dims, distances_to, CentroidSet, DataMatrix};
use crate::error::{Result, SkmError};
use crate::smoothmin::{evaluate_into, value_unchecked, SmootherSpec};

/// `J = Σ_n h(d_1n, …, d_Kn)`, optionally with the per-point terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveValue {
    pub value: f64,
    pub per_point: Option<Vec<f64>>,
}

fn objective_impl(x: &DataMatrix, c: &CentroidSet, spec: SmootherSpec, keep: bool) -> Result<ObjectiveValue> {
    check_dims(x, c)?;
    let mut d = vec![0.0; c.n_clusters()];
    let mut per_point = keep.then(|| Vec::with_capacity(x.n_rows()));
    let mut total = 0.0;
    for xn in x.rows() {
        distances_to(xn, c, &mut d);
        let h = value_unchecked(spec, &d);
        total += h;
        if let Some(pp) = per_point.as_mut() {
            pp.push(h);
        }
    }
    Ok(ObjectiveValue {
        value: total,
        per_point,
    })
}

/// Smoothed WCSS. With [`SmootherSpec::hard`] this is exactly the WCSS of
/// half squared distances.
pub fn evaluate_objective(x: &DataMatrix, c: &CentroidSet, spec: SmootherSpec) -> Result<ObjectiveValue> {
    objective_impl(x, c, spec, false)
}

/// Like [`evaluate_objective`] but keeps `h` for every observation.
pub fn evaluate_objective_per_point(x: &DataMatrix, c: &CentroidSet, spec: SmootherSpec) -> Result<ObjectiveValue> {
    objective_impl(x, c, spec, true)
}

/// Influence weights `w[k*N + n] = ∂h/∂d_kn` together with the objective value.
pub(crate) fn weights_and_objective(x: &DataMatrix, c: &CentroidSet, spec: SmootherSpec) -> (Vec<f64>, f64) {
    let (k, n) = (c.n_clusters(), x.n_rows());
    let mut w = vec![0.0; k * n];
    let mut d = vec![0.0; k];
    let mut col = vec![0.0; k];
    let mut total = 0.0;
    for (i, xn) in x.rows().enumerate() {
        distances_to(xn, c, &mut d);
        total += evaluate_into(spec, &d, &mut col);
        for (j, &v) in col.iter().enumerate() {
            w[j * n + i] = v;
        }
    }
    (w, total)
}

/// `∂J/∂c_k = −Σ_n w_kn (x_n − c_k)` given the K×N weights.
pub(crate) fn gradient_from_weights(x: &DataMatrix, c: &CentroidSet, w: &[f64]) -> Vec<f64> {
    let (k, p, n) = (c.n_clusters(), c.n_cols(), x.n_rows());
    let mut g = vec![0.0; k * p];
    for j in 0..k {
        let ck = c.row(j);
        let gk = &mut g[j * p..(j + 1) * p];
        for (i, xn) in x.rows().enumerate() {
            let wk = w[j * n + i];
            if wk == 0.0 {
                continue;
            }
            for ((g, xv), cv) in gk.iter_mut().zip(xn).zip(ck) {
                *g -= wk * (xv - cv);
            }
        }
    }
    g
}

/// Gradient of [`evaluate_objective`] with respect to every centroid
/// coordinate, returned as K rows of length P.
pub fn objective_gradient(x: &DataMatrix, c: &CentroidSet, spec: SmootherSpec) -> Result<Vec<Vec<f64>>> {
    check_dims(x, c)?;
    let (w, _) = weights_and_objective(x, c, spec);
    let g = gradient_from_weights(x, c, &w);
    Ok(g.chunks_exact(c.n_cols()).map(<[f64]>::to_vec).collect())
}

/// Objective curves as one centroid moves along a 1-D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeCurve {
    pub grid: Vec<f64>,
    pub specs: Vec<SmootherSpec>,
    /// `objectives[g][s]`: value at grid point `g` under spec `s`.
    pub objectives: Vec<Vec<f64>>,
}

impl LandscapeCurve {
    /// Grid value minimizing each spec's curve (first one on ties).
    pub fn argmins(&self) -> Vec<f64> {
        (0..self.specs.len())
            .map(|s| {
                let mut best = 0;
                for g in 1..self.grid.len() {
                    if self.objectives[g][s] < self.objectives[best][s] {
                        best = g;
                    }
                }
                self.grid[best]
            })
            .collect()
    }

    /// Header `grid,<spec>,…` then one row per grid value.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["grid".to_string()];
        header.extend(self.specs.iter().map(ToString::to_string));
        w.write_record(&header)?;
        for (g, row) in self.grid.iter().zip(&self.objectives) {
            let mut rec = vec![format!("{g}")];
            rec.extend(row.iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `start, start+step, …` up to `end` inclusive, computed as `start + i·step`
/// so that rounding does not accumulate.
pub fn linear_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !end.is_finite() || end < start {
        return Err(SkmError::invalid(format!(
            "grid needs start <= end and step > 0, got {start}:{end}:{step}"
        )));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Scans `J` with centroid `scan_index` placed at every grid value while the
/// remaining centroids stay at `fixed` (given in cluster order, skipping the
/// scanned slot). Only 1-D data is accepted.
pub fn landscape_scan_1d(
    x: &DataMatrix,
    fixed: &[f64],
    scan_index: usize,
    grid: &[f64],
    specs: &[SmootherSpec],
) -> Result<LandscapeCurve> {
    if x.n_cols() != 1 {
        return Err(SkmError::DimensionMismatch {
            expected: 1,
            got: x.n_cols(),
        });
    }
    if grid.is_empty() {
        return Err(SkmError::Empty("landscape grid"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SkmError::invalid("landscape grid must be strictly increasing"));
    }
    if scan_index > fixed.len() {
        return Err(SkmError::invalid(format!(
            "scan index {scan_index} out of range for {} clusters",
            fixed.len() + 1
        )));
    }
    if let Some(v) = fixed.iter().find(|v| !v.is_finite()) {
        return Err(SkmError::invalid(format!("fixed centroid {v} is not finite")));
    }
    let k = fixed.len() + 1;
    let objectives = grid
        .par_iter()
        .map(|&g| {
            let mut cs = fixed.to_vec();
            cs.insert(scan_index, g);
            let mut d = vec![0.0; k];
            specs
                .iter()
                .map(|&spec| {
                    x.as_slice()
                        .iter()
                        .map(|&xn| {
                            for (dk, ck) in d.iter_mut().zip(&cs) {
                                *dk = 0.5 * (xn - ck) * (xn - ck);
                            }
                            value_unchecked(spec, &d)
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(LandscapeCurve {
        grid: grid.to_vec(),
        specs: specs.to_vec(),
        objectives,
    })
}
