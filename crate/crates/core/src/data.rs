//! Dense containers, half squared distances, z-score normalization and
//! class-size statistics.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SkmError};

/// N observations × P features, row-major, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

/// K centroids in P-dimensional space, row-major, all entries finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CentroidSet {
    k: usize,
    cols: usize,
    values: Vec<f64>,
}

/// K×N matrix of `½‖x_n − c_k‖²`, stored row-major by cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    k: usize,
    n: usize,
    values: Vec<f64>,
}

fn check_finite(rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(SkmError::NonFinite {
            row: i / cols.max(1),
            col: i % cols.max(1),
        });
    }
    debug_assert_eq!(values.len(), rows * cols);
    Ok(())
}

fn flatten_rows(rows: &[Vec<f64>]) -> Result<(usize, usize, Vec<f64>)> {
    let cols = rows.first().map(Vec::len).unwrap_or(0);
    let mut values = Vec::with_capacity(rows.len() * cols);
    for r in rows {
        if r.len() != cols {
            return Err(SkmError::DimensionMismatch {
                expected: cols,
                got: r.len(),
            });
        }
        values.extend_from_slice(r);
    }
    Ok((rows.len(), cols, values))
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 {
            return Err(SkmError::Empty("data matrix has no rows"));
        }
        if cols == 0 {
            return Err(SkmError::Empty("data matrix has no columns"));
        }
        if values.len() != rows * cols {
            return Err(SkmError::DimensionMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        check_finite(rows, cols, &values)?;
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (r, c, v) = flatten_rows(rows)?;
        Self::new(r, c, v)
    }

    /// One-feature matrix from a slice of scalars.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

impl CentroidSet {
    pub fn new(k: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(SkmError::Empty("centroid set is empty"));
        }
        if cols == 0 {
            return Err(SkmError::Empty("centroids have no coordinates"));
        }
        if values.len() != k * cols {
            return Err(SkmError::DimensionMismatch {
                expected: k * cols,
                got: values.len(),
            });
        }
        check_finite(k, cols, &values)?;
        Ok(Self { k, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (k, c, v) = flatten_rows(rows)?;
        Self::new(k, c, v)
    }

    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    /// Centroids copied from the given rows of `x`.
    pub fn from_data_rows(x: &DataMatrix, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * x.n_cols());
        for &i in indices {
            values.extend_from_slice(x.row(i));
        }
        Self::new(indices.len(), x.n_cols(), values)
    }

    pub fn n_clusters(&self) -> usize {
        self.k
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.cols..(k + 1) * self.cols]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.cols..(k + 1) * self.cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Smallest Euclidean distance between any two centroids; `+inf` when K = 1.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..self.k {
            for b in a + 1..self.k {
                let d = 2.0 * half_sq_dist(self.row(a), self.row(b));
                best = best.min(d.sqrt());
            }
        }
        best
    }

    /// Coordinate-wise maximum absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &CentroidSet) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<f64>>> for CentroidSet {
    type Error = SkmError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<CentroidSet> for Vec<Vec<f64>> {
    fn from(c: CentroidSet) -> Self {
        c.to_rows()
    }
}

impl DistanceMatrix {
    pub fn n_clusters(&self) -> usize {
        self.k
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, n: usize) -> f64 {
        self.values[k * self.n + n]
    }

    /// The K distances of observation `n` to every centroid.
    pub fn column(&self, n: usize) -> Vec<f64> {
        (0..self.k).map(|k| self.get(k, n)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks_exact(self.n).map(<[f64]>::to_vec).collect()
    }
}

#[inline]
pub(crate) fn half_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum::<f64>()
}

/// Fills `out[k] = ½‖x − c_k‖²` for every centroid.
#[inline]
pub(crate) fn distances_to(x: &[f64], c: &CentroidSet, out: &mut [f64]) {
    for (slot, ck) in out.iter_mut().zip(c.rows()) {
        *slot = half_sq_dist(x, ck);
    }
}

pub(crate) fn check_dims(x: &DataMatrix, c: &CentroidSet) -> Result<()> {
    if x.n_cols() != c.n_cols() {
        return Err(SkmError::DimensionMismatch {
            expected: x.n_cols(),
            got: c.n_cols(),
        });
    }
    Ok(())
}

/// `½‖x_n − c_k‖²` for every centroid/observation pair.
pub fn squared_distances(x: &DataMatrix, c: &CentroidSet) -> Result<DistanceMatrix> {
    check_dims(x, c)?;
    let (k, n) = (c.n_clusters(), x.n_rows());
    let mut values = Vec::with_capacity(k * n);
    for ck in c.rows() {
        values.extend(x.rows().map(|xn| half_sq_dist(xn, ck)));
    }
    Ok(DistanceMatrix { k, n, values })
}

/// Nearest-centroid labels, ties to the lowest index.
pub fn nearest_labels(x: &DataMatrix, c: &CentroidSet) -> Result<Vec<usize>> {
    check_dims(x, c)?;
    let mut buf = vec![0.0; c.n_clusters()];
    Ok(x.rows()
        .map(|xn| {
            distances_to(xn, c, &mut buf);
            argmin(&buf)
        })
        .collect())
}

/// Index of the smallest value; the first one wins on ties.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Per-feature statistics fitted by [`zscore_normalize`].
///
/// Standard deviations use the population (N) denominator. A constant
/// feature records a std of 1 so that it is mapped to zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ZScore {
    pub fn fit(x: &DataMatrix) -> Result<Self> {
        if x.n_rows() < 2 {
            return Err(SkmError::invalid("z-score normalization needs at least 2 rows"));
        }
        let n = x.n_rows() as f64;
        let p = x.n_cols();
        let mut means = vec![0.0; p];
        for row in x.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; p];
        for row in x.rows() {
            for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { means, stds })
    }

    pub fn transform(&self, x: &DataMatrix) -> Result<DataMatrix> {
        if x.n_cols() != self.means.len() {
            return Err(SkmError::DimensionMismatch {
                expected: self.means.len(),
                got: x.n_cols(),
            });
        }
        let mut values = Vec::with_capacity(x.as_slice().len());
        for row in x.rows() {
            for ((v, m), s) in row.iter().zip(&self.means).zip(&self.stds) {
                values.push((v - m) / s);
            }
        }
        DataMatrix::new(x.n_rows(), x.n_cols(), values)
    }
}

/// Standardize every feature to zero mean and unit (population) variance.
pub fn zscore_normalize(x: &DataMatrix) -> Result<(DataMatrix, ZScore)> {
    let fitted = ZScore::fit(x)?;
    let out = fitted.transform(x)?;
    Ok((out, fitted))
}

/// Sample standard deviation of the class sizes over their mean.
pub fn coefficient_of_variation(class_sizes: &[usize]) -> Result<f64> {
    if class_sizes.len() < 2 {
        return Err(SkmError::invalid("coefficient of variation needs at least 2 classes"));
    }
    if class_sizes.contains(&0) {
        return Err(SkmError::invalid("class sizes must be positive"));
    }
    let k = class_sizes.len() as f64;
    let mean = class_sizes.iter().map(|&s| s as f64).sum::<f64>() / k;
    let ss = class_sizes
        .iter()
        .map(|&s| (s as f64 - mean).powi(2))
        .sum::<f64>();
    Ok((ss / (k - 1.0)).sqrt() / mean)
}

/// Number of observations per label value, indexed by label.
pub fn class_sizes(labels: &[usize]) -> Vec<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; k];
    for &l in labels {
        sizes[l] += 1;
    }
    sizes
}

/// A CSV table: features plus an optional trailing `label` column.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub data: DataMatrix,
    pub labels: Option<Vec<usize>>,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Parses CSV text. The first line is a header when any of its fields is
    /// not a number; a header whose last field is `label` marks a trailing
    /// integer label column.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = rdr.records();
        let first = match records.next() {
            Some(r) => r?,
            None => return Err(SkmError::Empty("CSV input has no rows")),
        };
        let is_header = first.iter().any(|f| f.parse::<f64>().is_err());
        let mut header: Option<Vec<String>> = None;
        let mut pending = None;
        if is_header {
            header = Some(first.iter().map(str::to_owned).collect());
        } else {
            pending = Some(first);
        }
        let has_label = header
            .as_ref()
            .and_then(|h| h.last())
            .is_some_and(|l| l.eq_ignore_ascii_case("label"));

        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut labels = Vec::new();
        let iter = pending.into_iter().map(Ok).chain(records);
        for (line, rec) in iter.enumerate() {
            let rec = rec?;
            let mut fields: Vec<&str> = rec.iter().collect();
            if fields.iter().all(|f| f.is_empty()) {
                continue;
            }
            if has_label {
                let raw = fields.pop().unwrap_or_default();
                let label = raw.parse::<usize>().map_err(|_| {
                    SkmError::Parse(format!("row {}: label '{raw}' is not a nonnegative integer", line + 1))
                })?;
                labels.push(label);
            }
            let row = fields
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        SkmError::Parse(format!("row {}: '{f}' is not a number", line + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(SkmError::Empty("CSV input has no data rows"));
        }
        let data = DataMatrix::from_rows(&rows)?;
        let feature_names = header.map(|mut h| {
            if has_label {
                h.pop();
            }
            h
        });
        Ok(Self {
            data,
            labels: has_label.then_some(labels),
            feature_names,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    /// Writes a header row (`x0..x{P-1}` unless names are set), then one row
    /// per observation with the label last when present.
    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = match &self.feature_names {
            Some(names) => names.clone(),
            None => (0..self.data.n_cols()).map(|j| format!("x{j}")).collect(),
        };
        if self.labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header)?;
        for (i, row) in self.data.rows().enumerate() {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            if let Some(labels) = &self.labels {
                rec.push(labels[i].to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.to_writer(std::io::BufWriter::new(file))
    }
}
