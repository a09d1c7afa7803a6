//! Smooth minimum functions `h(d_1, …, d_K)` and their gradients.
//!
//! The gradient `∂h/∂d_k` is the per-cluster influence weight of one
//! observation: an argmin indicator for the hard minimum, a softmax for
//! LogSumExp, the fuzzy membership raised to `m` for p-Norm, and a signed
//! weight (which can be negative, i.e. repulsive) for the Boltzmann operator.
//!
//! Every exponential is evaluated relative to the smallest argument so that
//! no finite input overflows or underflows the normalizer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SkmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmootherKind {
    HardMin,
    LogSumExp,
    PNorm,
    Boltzmann,
}

/// Which smooth minimum is active, with its sharpness parameter
/// (λ for LogSumExp, p for p-Norm, α for Boltzmann; ignored for HardMin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmootherSpec {
    pub kind: SmootherKind,
    pub param: f64,
}

impl SmootherSpec {
    pub fn new(kind: SmootherKind, param: f64) -> Result<Self> {
        if kind != SmootherKind::HardMin && !(param > 0.0 && param.is_finite()) {
            return Err(SkmError::invalid(format!(
                "{kind:?} parameter must be positive and finite, got {param}"
            )));
        }
        Ok(Self { kind, param })
    }

    pub fn hard() -> Self {
        Self {
            kind: SmootherKind::HardMin,
            param: 0.0,
        }
    }

    pub fn log_sum_exp(lambda: f64) -> Result<Self> {
        Self::new(SmootherKind::LogSumExp, lambda)
    }

    pub fn p_norm(p: f64) -> Result<Self> {
        Self::new(SmootherKind::PNorm, p)
    }

    pub fn boltzmann(alpha: f64) -> Result<Self> {
        Self::new(SmootherKind::Boltzmann, alpha)
    }

    /// Whether `h` is concave on the nonnegative orthant, so that the
    /// smoothed update is a guaranteed descent step.
    pub fn is_concave(&self) -> bool {
        !matches!(self.kind, SmootherKind::Boltzmann)
    }

    /// Whether the influence weights of one observation sum to one.
    pub fn weights_sum_to_one(&self) -> bool {
        !matches!(self.kind, SmootherKind::PNorm)
    }
}

impl fmt::Display for SmootherSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SmootherKind::HardMin => write!(f, "hard"),
            SmootherKind::LogSumExp => write!(f, "lse:{}", self.param),
            SmootherKind::PNorm => write!(f, "pnorm:{}", self.param),
            SmootherKind::Boltzmann => write!(f, "boltz:{}", self.param),
        }
    }
}

impl FromStr for SmootherSpec {
    type Err = SkmError;

    /// Parses `hard`, `lse:<λ>`, `pnorm:<p>` or `boltz:<α>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let kind = match name.to_ascii_lowercase().as_str() {
            "hard" | "hardmin" | "min" => SmootherKind::HardMin,
            "lse" | "logsumexp" => SmootherKind::LogSumExp,
            "pnorm" | "pn" => SmootherKind::PNorm,
            "boltz" | "boltzmann" => SmootherKind::Boltzmann,
            other => {
                return Err(SkmError::Parse(format!(
                    "unknown smoother '{other}' (expected hard, lse:<λ>, pnorm:<p>, boltz:<α>)"
                )))
            }
        };
        if kind == SmootherKind::HardMin {
            return Ok(Self::hard());
        }
        let param = param
            .ok_or_else(|| SkmError::Parse(format!("smoother '{name}' needs a parameter, e.g. {name}:1")))?
            .parse::<f64>()
            .map_err(|e| SkmError::Parse(format!("bad parameter in '{s}': {e}")))?;
        Self::new(kind, param)
    }
}

fn validate(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(SkmError::Empty("smooth minimum of an empty vector"));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(SkmError::invalid(format!(
            "smooth minimum arguments must be finite and nonnegative, got {v}"
        )));
    }
    Ok(())
}

/// Value of the smooth minimum of `values`.
pub fn smooth_min(spec: SmootherSpec, values: &[f64]) -> Result<f64> {
    validate(values)?;
    Ok(value_unchecked(spec, values))
}

/// Gradient of [`smooth_min`] with respect to each argument.
pub fn influence(spec: SmootherSpec, values: &[f64]) -> Result<Vec<f64>> {
    validate(values)?;
    let mut out = vec![0.0; values.len()];
    evaluate_into(spec, values, &mut out);
    Ok(out)
}

fn min_and_argmin(values: &[f64]) -> (f64, usize) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    (values[best], best)
}

pub(crate) fn value_unchecked(spec: SmootherSpec, values: &[f64]) -> f64 {
    let (lo, _) = min_and_argmin(values);
    match spec.kind {
        SmootherKind::HardMin => lo,
        SmootherKind::LogSumExp => {
            let lambda = spec.param;
            let s: f64 = values.iter().map(|x| (-lambda * (x - lo)).exp()).sum();
            lo - s.ln() / lambda
        }
        SmootherKind::PNorm => {
            if lo == 0.0 {
                return 0.0;
            }
            let p = spec.param;
            let s: f64 = values.iter().map(|x| (lo / x).powf(p)).sum();
            lo * s.powf(-1.0 / p)
        }
        SmootherKind::Boltzmann => {
            let alpha = spec.param;
            let (mut num, mut den) = (0.0, 0.0);
            for &x in values {
                let e = (-alpha * (x - lo)).exp();
                num += (x - lo) * e;
                den += e;
            }
            lo + num / den
        }
    }
}

/// Writes `∂h/∂d_k` into `out` and returns `h(values)`. Inputs must already
/// be finite and nonnegative.
pub(crate) fn evaluate_into(spec: SmootherSpec, values: &[f64], out: &mut [f64]) -> f64 {
    debug_assert_eq!(values.len(), out.len());
    let (lo, arg) = min_and_argmin(values);
    match spec.kind {
        SmootherKind::HardMin => {
            out.fill(0.0);
            out[arg] = 1.0;
            lo
        }
        SmootherKind::LogSumExp => {
            let lambda = spec.param;
            let mut s = 0.0;
            for (o, &x) in out.iter_mut().zip(values) {
                *o = (-lambda * (x - lo)).exp();
                s += *o;
            }
            out.iter_mut().for_each(|o| *o /= s);
            lo - s.ln() / lambda
        }
        SmootherKind::PNorm => {
            if lo == 0.0 {
                // coincident point: all pull goes to the first zero distance
                out.fill(0.0);
                out[arg] = 1.0;
                return 0.0;
            }
            let p = spec.param;
            let mut s = 0.0;
            for (o, &x) in out.iter_mut().zip(values) {
                *o = (lo / x).powf(p);
                s += *o;
            }
            // ∂h/∂d_k = (r_k / S)^((p+1)/p) with r_k = (d_min/d_k)^p
            let expo = (p + 1.0) / p;
            out.iter_mut().for_each(|o| *o = (*o / s).powf(expo));
            lo * s.powf(-1.0 / p)
        }
        SmootherKind::Boltzmann => {
            let alpha = spec.param;
            let (mut num, mut den) = (0.0, 0.0);
            for (o, &x) in out.iter_mut().zip(values) {
                *o = (-alpha * (x - lo)).exp();
                num += (x - lo) * *o;
                den += *o;
            }
            let shifted = num / den;
            for (o, &x) in out.iter_mut().zip(values) {
                let u = *o / den;
                *o = u * (1.0 - alpha * ((x - lo) - shifted));
            }
            lo + shifted
        }
    }
}
