//! Hyperplane rounding of embeddings into cuts.
//!
//! A hyperplane through the origin with unit normal `h` rounds an embedding by
//! the sign of `<h, x_i>` (ties go to +1). Batched rounding draws `B` normals
//! from independent seeded substreams, so sample `b` is reproducible in
//! isolation regardless of batch size or evaluation order.

use crate::error::{Error, Result};
use crate::graph::{cut_value, Assignment, Graph};
use crate::rng::{derive_seed, SplitMix64};
use crate::sdp::Embedding;

/// Unit normal of a rounding hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vec<f64>,
}

impl Hyperplane {
    /// Normalizes the given direction; rejects zero or non-finite input.
    pub fn new(direction: Vec<f64>) -> Result<Self> {
        if direction.is_empty() {
            return Err(Error::arg("hyperplane normal must be non-empty"));
        }
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::arg("hyperplane normal cannot be normalized"));
        }
        Ok(Hyperplane {
            normal: direction.into_iter().map(|x| x / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }
}

/// Draws a uniform point on the unit sphere in `R^d` by normalizing a
/// standard Gaussian vector.
pub fn sample_uniform_sphere(d: usize, rng: &mut SplitMix64) -> Result<Hyperplane> {
    if d == 0 {
        return Err(Error::arg("sphere dimension must be at least 1"));
    }
    loop {
        let direction: Vec<f64> = (0..d).map(|_| rng.next_normal()).collect();
        if let Ok(h) = Hyperplane::new(direction) {
            return Ok(h);
        }
    }
}

/// Signs of each node under the hyperplane: `+1` iff `<h, x_i> >= 0`.
pub fn round_embedding(e: &Embedding, h: &Hyperplane) -> Result<Assignment> {
    if h.dim() != e.dim() {
        return Err(Error::arg(format!(
            "hyperplane lives in dimension {}, embedding in {}",
            h.dim(),
            e.dim()
        )));
    }
    let values: Vec<i8> = (0..e.n())
        .map(|i| {
            let dot: f64 = e.column(i).iter().zip(h.normal()).map(|(a, b)| a * b).sum();
            if dot >= 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    Assignment::new(values)
}

/// Cut value of the rounded assignment for one hyperplane.
pub fn cut_of_hyperplane(g: &Graph, e: &Embedding, h: &Hyperplane) -> Result<i64> {
    if e.n() != g.n() {
        return Err(Error::arg(format!(
            "embedding has {} columns for {} nodes",
            e.n(),
            g.n()
        )));
    }
    cut_value(g, &round_embedding(e, h)?)
}

/// Closed-form expectation of the rounded cut over uniform hyperplanes:
/// `sum_ij w_ij * arccos(<x_i, x_j>) / pi`.
pub fn expected_cut_analytic(g: &Graph, e: &Embedding) -> Result<f64> {
    if e.n() != g.n() {
        return Err(Error::arg(format!(
            "embedding has {} columns for {} nodes",
            e.n(),
            g.n()
        )));
    }
    Ok(g.edges()
        .iter()
        .map(|edge| {
            let t = e.dot(edge.u as usize, edge.v as usize).clamp(-1.0, 1.0);
            edge.w as f64 * t.acos() / std::f64::consts::PI
        })
        .sum())
}

/// Result of batched hyperplane rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct PgwResult {
    /// Mean cut over the batch.
    pub avg_cut: f64,
    /// Best cut over the batch.
    pub max_cut: i64,
    /// Assignment achieving `max_cut` (earliest sample on ties).
    pub incumbent: Assignment,
    /// Number of hyperplanes drawn.
    pub samples: usize,
}

fn hyperplane_for_sample(d: usize, seed: u64, b: usize) -> Result<Hyperplane> {
    let mut rng = SplitMix64::new(derive_seed(seed, b as u64));
    sample_uniform_sphere(d, &mut rng)
}

/// Batched hyperplane rounding: draws `b_samples` hyperplanes from substreams
/// `derive_seed(seed, b)` and tracks the mean and best cut.
pub fn pgw(g: &Graph, e: &Embedding, b_samples: usize, seed: u64) -> Result<PgwResult> {
    if b_samples == 0 {
        return Err(Error::arg("batch size must be at least 1"));
    }
    if e.n() != g.n() {
        return Err(Error::arg(format!(
            "embedding has {} columns for {} nodes",
            e.n(),
            g.n()
        )));
    }
    let mut sum = 0.0f64;
    let mut max_cut = i64::MIN;
    let mut incumbent = None;
    for b in 0..b_samples {
        let h = hyperplane_for_sample(e.dim(), seed, b)?;
        let assignment = round_embedding(e, &h)?;
        let cut = cut_value(g, &assignment)?;
        sum += cut as f64;
        if cut > max_cut {
            max_cut = cut;
            incumbent = Some(assignment);
        }
    }
    Ok(PgwResult {
        avg_cut: sum / b_samples as f64,
        max_cut,
        incumbent: incumbent.expect("batch is non-empty"),
        samples: b_samples,
    })
}

/// The individual cut values behind [`pgw`], in sample order. Sample `b` uses
/// the same substream as in `pgw`, so the two agree element for element.
pub fn pgw_cut_samples(g: &Graph, e: &Embedding, b_samples: usize, seed: u64) -> Result<Vec<i64>> {
    if b_samples == 0 {
        return Err(Error::arg("batch size must be at least 1"));
    }
    if e.n() != g.n() {
        return Err(Error::arg(format!(
            "embedding has {} columns for {} nodes",
            e.n(),
            g.n()
        )));
    }
    (0..b_samples)
        .map(|b| {
            let h = hyperplane_for_sample(e.dim(), seed, b)?;
            cut_of_hyperplane(g, e, &h)
        })
        .collect()
}
