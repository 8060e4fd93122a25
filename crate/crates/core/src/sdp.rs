//! Low-rank relaxation of MaxCut solved by coordinate descent.
//!
//! Each node carries a unit vector in `R^d`. The relaxed objective
//! `sum_ij w_ij * (1 - <x_i, x_j>) / 2` is maximized by sweeping over nodes
//! and setting each vector against the weighted sum of its neighbors:
//! `x_i <- -g_i / |g_i|` with `g_i = sum_j w_ij x_j`. Every such update is the
//! exact minimizer of the coupling term for that coordinate, so the objective
//! never decreases. For `d` around `sqrt(2n)` spurious local optima vanish and
//! the relaxation value matches the full semidefinite program.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::SplitMix64;

/// Unit vectors for `n` nodes, stored column-major: column `i` occupies
/// `data[i*d .. (i+1)*d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    d: usize,
    n: usize,
    data: Vec<f64>,
}

impl Embedding {
    /// Wraps raw column-major data, renormalizing every column to unit length.
    pub fn new(d: usize, n: usize, mut data: Vec<f64>) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::arg("embedding dimensions must be positive"));
        }
        if data.len() != d * n {
            return Err(Error::arg(format!(
                "embedding data has {} entries, expected {}",
                data.len(),
                d * n
            )));
        }
        for i in 0..n {
            let col = &mut data[i * d..(i + 1) * d];
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::arg(format!(
                    "embedding column {} cannot be normalized",
                    i
                )));
            }
            for x in col {
                *x /= norm;
            }
        }
        Ok(Embedding { d, n, data })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn dot(&self, i: usize, j: usize) -> f64 {
        self.column(i)
            .iter()
            .zip(self.column(j))
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Binary layout: `n` and `d` as little-endian u64, then `n*d` f64
    /// little-endian values column-major.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.data.len());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&(self.d as u64).to_le_bytes());
        for x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 {
            return Err(Error::BadFormat("embedding file shorter than header".into()));
        }
        let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
        let d = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let expected = 16usize
            .checked_add(n.checked_mul(d).and_then(|nd| nd.checked_mul(8)).ok_or_else(
                || Error::BadFormat("embedding header overflows".into()),
            )?)
            .ok_or_else(|| Error::BadFormat("embedding header overflows".into()))?;
        if bytes.len() != expected {
            return Err(Error::BadFormat(format!(
                "embedding file has {} bytes, header implies {}",
                bytes.len(),
                expected
            )));
        }
        let data: Vec<f64> = bytes[16..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Embedding::new(d, n, data)
    }
}

/// Outcome of a coordinate-descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpReport {
    /// Relaxed cut value at the final iterate.
    pub objective: f64,
    /// Number of full sweeps performed.
    pub iterations: usize,
    /// Largest per-column displacement in the last sweep.
    pub final_delta: f64,
    /// Whether `final_delta` dropped below the tolerance before the sweep cap.
    pub converged: bool,
}

/// Default embedding rank: `min(n, ceil(sqrt(2n)) + 1)`, the smallest order
/// at which the low-rank factorization generically carries no spurious
/// second-order critical points.
pub fn default_rank(n: usize) -> usize {
    let r = (2.0 * n as f64).sqrt().ceil() as usize + 1;
    r.min(n)
}

/// Relaxed objective `sum_ij w_ij (1 - <x_i, x_j>) / 2` of an embedding.
pub fn sdp_objective(g: &Graph, e: &Embedding) -> Result<f64> {
    if e.n() != g.n() {
        return Err(Error::arg(format!(
            "embedding has {} columns for {} nodes",
            e.n(),
            g.n()
        )));
    }
    Ok(g.edges()
        .iter()
        .map(|edge| edge.w as f64 * (1.0 - e.dot(edge.u as usize, edge.v as usize)) / 2.0)
        .sum())
}

struct Solver {
    d: usize,
    data: Vec<f64>,
    /// adjacency[i] lists (neighbor, weight) pairs of node i.
    adjacency: Vec<Vec<(u32, f64)>>,
}

impl Solver {
    fn init(g: &Graph, d: usize, seed: u64) -> Self {
        let n = g.n();
        let mut rng = SplitMix64::new(seed);
        let mut data = vec![0.0f64; n * d];
        for i in 0..n {
            let col = &mut data[i * d..(i + 1) * d];
            loop {
                for x in col.iter_mut() {
                    *x = rng.next_normal();
                }
                let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 && norm.is_finite() {
                    for x in col.iter_mut() {
                        *x /= norm;
                    }
                    break;
                }
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in g.edges() {
            adjacency[e.u as usize].push((e.v, e.w as f64));
            adjacency[e.v as usize].push((e.u, e.w as f64));
        }
        Solver { d, data, adjacency }
    }

    /// Re-optimizes column `i` exactly; returns its displacement. Isolated
    /// nodes (and the measure-zero case of a vanishing neighbor sum) stay put.
    fn update_column(&mut self, i: usize) -> f64 {
        let d = self.d;
        let mut grad = vec![0.0f64; d];
        for &(j, w) in &self.adjacency[i] {
            let col = &self.data[j as usize * d..(j as usize + 1) * d];
            for (gk, xk) in grad.iter_mut().zip(col) {
                *gk += w * xk;
            }
        }
        let norm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return 0.0;
        }
        let col = &mut self.data[i * d..(i + 1) * d];
        let mut delta_sq = 0.0;
        for (xk, gk) in col.iter_mut().zip(&grad) {
            let new = -gk / norm;
            delta_sq += (new - *xk) * (new - *xk);
            *xk = new;
        }
        delta_sq.sqrt()
    }

    /// One full pass over all columns; returns the largest displacement.
    fn sweep(&mut self) -> f64 {
        let mut max_delta = 0.0f64;
        for i in 0..self.adjacency.len() {
            max_delta = max_delta.max(self.update_column(i));
        }
        max_delta
    }

    fn into_embedding(self) -> Embedding {
        let n = self.adjacency.len();
        Embedding::new(self.d, n, self.data).expect("solver columns stay unit length")
    }
}

/// Runs coordinate descent from a seeded random start until the largest
/// per-sweep column displacement drops below `tol` or `max_sweeps` is hit.
pub fn solve_sdp(
    g: &Graph,
    d: usize,
    tol: f64,
    max_sweeps: usize,
    seed: u64,
) -> Result<(Embedding, SdpReport)> {
    if d == 0 {
        return Err(Error::arg("embedding rank must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::arg(format!("tolerance must be positive, got {}", tol)));
    }
    if max_sweeps == 0 {
        return Err(Error::arg("sweep cap must be at least 1"));
    }
    let mut solver = Solver::init(g, d, seed);
    let mut iterations = 0;
    let mut final_delta = f64::INFINITY;
    let mut converged = false;
    while iterations < max_sweeps {
        final_delta = solver.sweep();
        iterations += 1;
        if final_delta < tol {
            converged = true;
            break;
        }
    }
    let embedding = solver.into_embedding();
    let objective = sdp_objective(g, &embedding)?;
    Ok((
        embedding,
        SdpReport {
            objective,
            iterations,
            final_delta,
            converged,
        },
    ))
}
