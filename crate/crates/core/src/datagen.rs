//! Seeded synthetic mixtures: the four 1-D two-class case studies and 2-D
//! imbalanced suites A–D.
//!
//! Sampling uses `ChaCha8Rng` seeded from a `u64`; Gaussian draws use the
//! ziggurat method of `rand_distr::StandardNormal`, uniform draws use
//! `Uniform(center − scale, center + scale)` per dimension. Outputs are
//! bit-identical for a given seed within this implementation.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Result, SkmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Gaussian,
    Uniform,
}

/// One mixture component. For a Gaussian `scale` is the per-dimension
/// standard deviation; for a uniform it is the per-dimension half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub shape: Shape,
    pub size: usize,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Component {
    pub fn gaussian(size: usize, center: &[f64], scale: &[f64]) -> Self {
        Self {
            shape: Shape::Gaussian,
            size,
            center: center.to_vec(),
            scale: scale.to_vec(),
        }
    }

    pub fn uniform(size: usize, center: &[f64], scale: &[f64]) -> Self {
        Self {
            shape: Shape::Uniform,
            size,
            center: center.to_vec(),
            scale: scale.to_vec(),
        }
    }

    /// Standard deviation along unit direction `u`: `sqrt(Σ u_j² sd_j²)`.
    fn spread_along(&self, u: &[f64]) -> f64 {
        let sd = match self.shape {
            Shape::Gaussian => 1.0,
            Shape::Uniform => 1.0 / 3f64.sqrt(),
        };
        u.iter()
            .zip(&self.scale)
            .map(|(a, s)| a * a * s * s * sd * sd)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub components: Vec<Component>,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<usize> {
        let first = self
            .components
            .first()
            .ok_or(SkmError::Empty("mixture has no components"))?;
        let p = first.center.len();
        if p == 0 {
            return Err(SkmError::Empty("component center has no coordinates"));
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.size == 0 {
                return Err(SkmError::invalid(format!("component {i} has size 0")));
            }
            if c.center.len() != p || c.scale.len() != p {
                return Err(SkmError::DimensionMismatch {
                    expected: p,
                    got: c.center.len().min(c.scale.len()),
                });
            }
            if c.scale.iter().any(|&s| !(s > 0.0 && s.is_finite())) || c.center.iter().any(|v| !v.is_finite()) {
                return Err(SkmError::invalid(format!("component {i} needs finite center and positive scale")));
            }
        }
        Ok(p)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.size).collect()
    }

    /// Smallest ratio, over component pairs, of center distance to the sum
    /// of the two directional spreads along the line joining the centers.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.components.iter().enumerate() {
            for b in &self.components[i + 1..] {
                let diff: Vec<f64> = a.center.iter().zip(&b.center).map(|(x, y)| y - x).collect();
                let dist = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
                let u: Vec<f64> = diff.iter().map(|v| v / dist).collect();
                best = best.min(dist / (a.spread_along(&u) + b.spread_along(&u)));
            }
        }
        best
    }
}

/// Draws the mixture: rows are grouped by component in order and the label
/// of a row is its component index.
pub fn generate(spec: &MixtureSpec) -> Result<(DataMatrix, Vec<usize>)> {
    let p = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total: usize = spec.components.iter().map(|c| c.size).sum();
    let mut values = Vec::with_capacity(total * p);
    let mut labels = Vec::with_capacity(total);
    for (label, comp) in spec.components.iter().enumerate() {
        for _ in 0..comp.size {
            for (&mu, &s) in comp.center.iter().zip(&comp.scale) {
                let v = match comp.shape {
                    Shape::Gaussian => {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        mu + s * z
                    }
                    Shape::Uniform => Uniform::new_inclusive(mu - s, mu + s).sample(&mut rng),
                };
                values.push(v);
            }
            labels.push(label);
        }
    }
    Ok((DataMatrix::new(total, p, values)?, labels))
}

/// Fixed seed of case study `id` (1..=4).
pub fn case_study_seed(id: u8) -> u64 {
    0x5EED_0000 + id as u64
}

/// Mixture behind case study `id`: two unit-variance 1-D Gaussians.
///
/// | id | N₁   | N₂ | μ₁   | μ₂   |
/// |----|------|----|------|------|
/// | 1  | 50   | 50 | −5   | +5   |
/// | 2  | 50   | 50 | −0.5 | +0.5 |
/// | 3  | 5000 | 50 | −5   | +5   |
/// | 4  | 2000 | 50 | −2   | +2   |
pub fn case_study_spec(id: u8) -> Result<MixtureSpec> {
    let (n1, n2, mu1, mu2) = match id {
        1 => (50, 50, -5.0, 5.0),
        2 => (50, 50, -0.5, 0.5),
        3 => (5000, 50, -5.0, 5.0),
        4 => (2000, 50, -2.0, 2.0),
        _ => return Err(SkmError::invalid(format!("case study id must be 1..=4, got {id}"))),
    };
    Ok(MixtureSpec {
        components: vec![
            Component::gaussian(n1, &[mu1], &[1.0]),
            Component::gaussian(n2, &[mu2], &[1.0]),
        ],
        seed: case_study_seed(id),
    })
}

pub fn case_study(id: u8) -> Result<(DataMatrix, Vec<usize>)> {
    generate(&case_study_spec(id)?)
}

/// The 2-D imbalanced suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    A,
    B,
    C,
    D,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::A, Suite::B, Suite::C, Suite::D];

    pub fn n_classes(self) -> usize {
        match self {
            Suite::A | Suite::B => 3,
            Suite::C => 2,
            Suite::D => 9,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::A => "A",
            Suite::B => "B",
            Suite::C => "C",
            Suite::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = SkmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().trim_start_matches("DATA-") {
            "A" => Ok(Suite::A),
            "B" => Ok(Suite::B),
            "C" => Ok(Suite::C),
            "D" => Ok(Suite::D),
            _ => Err(SkmError::Parse(format!("unknown suite '{s}' (valid suites: A, B, C, D)"))),
        }
    }
}

/// Layout of each suite. Every pair of components is at least 6 spread
/// units apart (center distance over the sum of the two directional
/// spreads, see [`MixtureSpec::min_separation`]).
///
/// * A: Gaussian, sizes 2000/200/50, CV 1.4468.
/// * B: as A with uniform components of matching spread.
/// * C: Gaussian majority of 5000 plus a uniform minority of 200, CV 1.3054.
/// * D: uniform majority of 5000 plus eight Gaussian minorities of 50 on a
///   ring, CV 2.75.
pub fn imbalanced_suite_spec(suite: Suite, seed: u64) -> MixtureSpec {
    // uniform half-width with the same standard deviation as a Gaussian
    let u = |sd: f64| sd * 3f64.sqrt();
    let components = match suite {
        Suite::A => vec![
            Component::gaussian(2000, &[0.0, 0.0], &[1.5, 1.0]),
            Component::gaussian(200, &[6.0, 0.0], &[0.5, 0.5]),
            Component::gaussian(50, &[0.0, 4.5], &[0.25, 0.25]),
        ],
        Suite::B => vec![
            Component::uniform(2000, &[0.0, 0.0], &[u(1.5), u(1.0)]),
            Component::uniform(200, &[6.0, 0.0], &[u(0.5), u(0.5)]),
            Component::uniform(50, &[0.0, 4.5], &[u(0.25), u(0.25)]),
        ],
        Suite::C => vec![
            Component::gaussian(5000, &[0.0, 0.0], &[2.0, 0.5]),
            Component::uniform(200, &[0.0, 4.0], &[0.5, 0.5]),
        ],
        Suite::D => {
            let mut comps = vec![Component::uniform(5000, &[0.0, 0.0], &[3.0, 3.0])];
            for i in 0..8 {
                let t = i as f64 * std::f64::consts::FRAC_PI_4;
                comps.push(Component::gaussian(50, &[10.0 * t.cos(), 10.0 * t.sin()], &[0.3, 0.3]));
            }
            comps
        }
    };
    MixtureSpec { components, seed }
}

pub fn imbalanced_suite(suite: Suite, seed: u64) -> Result<(DataMatrix, Vec<usize>)> {
    generate(&imbalanced_suite_spec(suite, seed))
}
