//! Actor-critic network over hyperplane states.
//!
//! One shared ReLU encoder feeds three linear heads: a scalar value, an
//! action mean in `R^d`, and a softplus-positive diagonal variance in `R^d`.
//! There are no bias terms. Gradients are hand-derived: the network is two
//! layers deep, so backpropagation is a handful of outer products. The value
//! parameter view is {W_enc, w_v}; the policy view is {W_enc, W_m, W_c}; the
//! views overlap exactly on the encoder.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Numerically stable `log(1 + exp(x))`.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic sigmoid, the derivative of softplus.
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Network weights. Layouts, with `d` the state/action dimension and `l` the
/// hidden width:
/// - `w_enc`: `l*d`, row `j` at `[j*d .. (j+1)*d]` feeds hidden unit `j`;
/// - `w_v`: `l`, value head;
/// - `w_m`, `w_c`: `l*d`, entry `[j*d + k]` couples hidden `j` to output `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentParams {
    d: usize,
    l: usize,
    w_enc: Vec<f64>,
    w_v: Vec<f64>,
    w_m: Vec<f64>,
    w_c: Vec<f64>,
}

const CHECKPOINT_VERSION: u32 = 1;

impl AgentParams {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Total number of scalar weights: `3*l*d + l`.
    pub fn flat_len(&self) -> usize {
        3 * self.l * self.d + self.l
    }

    /// Reads weight `idx` in the flat order `w_enc | w_v | w_m | w_c`.
    pub fn flat_get(&self, idx: usize) -> f64 {
        let ld = self.l * self.d;
        if idx < ld {
            self.w_enc[idx]
        } else if idx < ld + self.l {
            self.w_v[idx - ld]
        } else if idx < 2 * ld + self.l {
            self.w_m[idx - ld - self.l]
        } else {
            self.w_c[idx - 2 * ld - self.l]
        }
    }

    /// Writes weight `idx` in the flat order `w_enc | w_v | w_m | w_c`.
    pub fn flat_set(&mut self, idx: usize, value: f64) {
        let ld = self.l * self.d;
        if idx < ld {
            self.w_enc[idx] = value;
        } else if idx < ld + self.l {
            self.w_v[idx - ld] = value;
        } else if idx < 2 * ld + self.l {
            self.w_m[idx - ld - self.l] = value;
        } else {
            self.w_c[idx - 2 * ld - self.l] = value;
        }
    }

    /// Checkpoint bytes: u32 version, u64 `d`, u64 `l`, then the blocks
    /// `w_enc`, `w_v`, `w_m`, `w_c` as little-endian f64 in storage order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 8 * self.flat_len());
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.d as u64).to_le_bytes());
        out.extend_from_slice(&(self.l as u64).to_le_bytes());
        for block in [&self.w_enc, &self.w_v, &self.w_m, &self.w_c] {
            for x in block.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 20 {
            return Err(Error::BadFormat("checkpoint shorter than header".into()));
        }
        let version = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(Error::BadFormat(format!(
                "unsupported checkpoint version {}",
                version
            )));
        }
        let d = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
        let l = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        if d == 0 || l == 0 {
            return Err(Error::BadFormat("checkpoint has zero dimension".into()));
        }
        let count = 3usize
            .checked_mul(l)
            .and_then(|x| x.checked_mul(d))
            .and_then(|x| x.checked_add(l))
            .ok_or_else(|| Error::BadFormat("checkpoint header overflows".into()))?;
        let expected = 20 + 8 * count;
        if bytes.len() != expected {
            return Err(Error::BadFormat(format!(
                "checkpoint has {} bytes, header implies {}",
                bytes.len(),
                expected
            )));
        }
        let mut values = bytes[20..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut take = |n: usize| -> Vec<f64> { values.by_ref().take(n).collect() };
        let w_enc = take(l * d);
        let w_v = take(l);
        let w_m = take(l * d);
        let w_c = take(l * d);
        let params = AgentParams { d, l, w_enc, w_v, w_m, w_c };
        if params.w_c.len() != l * d {
            return Err(Error::BadFormat("checkpoint truncated".into()));
        }
        Ok(params)
    }
}

/// Fresh weights, i.i.d. uniform on `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`
/// (fan-in `d` for the encoder, `l` for the heads), drawn in storage order.
pub fn init_params(d: usize, l: usize, seed: u64) -> Result<AgentParams> {
    if d == 0 || l == 0 {
        return Err(Error::arg("network dimensions must be at least 1"));
    }
    let mut rng = SplitMix64::new(seed);
    let mut draw = |count: usize, fan_in: usize| -> Vec<f64> {
        let bound = 1.0 / (fan_in as f64).sqrt();
        (0..count).map(|_| (2.0 * rng.next_f64() - 1.0) * bound).collect()
    };
    Ok(AgentParams {
        d,
        l,
        w_enc: draw(l * d, d),
        w_v: draw(l, l),
        w_m: draw(l * d, l),
        w_c: draw(l * d, l),
    })
}

/// Cached results of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    /// State value estimate.
    pub value: f64,
    /// Action mean, length `d`.
    pub mean: Vec<f64>,
    /// Diagonal action variance, length `d`, strictly positive.
    pub var: Vec<f64>,
    /// Post-ReLU activations, length `l`; cached for backward.
    pub hidden: Vec<f64>,
    /// Pre-softplus variance head outputs, length `d`; cached for backward.
    pub cov_pre: Vec<f64>,
}

/// Forward pass: `hidden = ReLU(W_enc s)`, `value = w_v . hidden`,
/// `mean = W_m^T hidden`, `var = softplus(W_c^T hidden)`.
pub fn forward(p: &AgentParams, s: &[f64]) -> Result<PolicyOutput> {
    if s.len() != p.d {
        return Err(Error::arg(format!(
            "state has dimension {}, network expects {}",
            s.len(),
            p.d
        )));
    }
    let (d, l) = (p.d, p.l);
    let mut hidden = vec![0.0f64; l];
    for (j, h) in hidden.iter_mut().enumerate() {
        let row = &p.w_enc[j * d..(j + 1) * d];
        let pre: f64 = row.iter().zip(s).map(|(w, x)| w * x).sum();
        *h = pre.max(0.0);
    }
    let mut value = 0.0;
    let mut mean = vec![0.0f64; d];
    let mut cov_pre = vec![0.0f64; d];
    for (j, &h) in hidden.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        value += p.w_v[j] * h;
        let row_m = &p.w_m[j * d..(j + 1) * d];
        let row_c = &p.w_c[j * d..(j + 1) * d];
        for k in 0..d {
            mean[k] += row_m[k] * h;
            cov_pre[k] += row_c[k] * h;
        }
    }
    let var: Vec<f64> = cov_pre.iter().map(|&x| softplus(x)).collect();
    Ok(PolicyOutput { value, mean, var, hidden, cov_pre })
}

/// Draws `a = mean + sqrt(var) * z` with `z` standard normal.
pub fn sample_action(out: &PolicyOutput, rng: &mut SplitMix64) -> Vec<f64> {
    out.mean
        .iter()
        .zip(&out.var)
        .map(|(&m, &v)| m + v.sqrt() * rng.next_normal())
        .collect()
}

/// Log-density of `a` under the diagonal Gaussian `N(mean, diag(var))`.
pub fn log_prob(out: &PolicyOutput, a: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), out.mean.len());
    let two_pi = 2.0 * std::f64::consts::PI;
    out.mean
        .iter()
        .zip(&out.var)
        .zip(a)
        .map(|((&m, &v), &x)| -0.5 * (two_pi * v).ln() - (x - m) * (x - m) / (2.0 * v))
        .sum()
}

/// Deterministic state transition: the next state is the normalized action.
/// Returns `None` for a zero or non-finite action (caller resamples).
pub fn transition(a: &[f64]) -> Option<Vec<f64>> {
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(a.iter().map(|x| x / norm).collect())
}

/// Gradient blocks matching [`AgentParams`] layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub w_enc: Vec<f64>,
    pub w_v: Vec<f64>,
    pub w_m: Vec<f64>,
    pub w_c: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros_like(p: &AgentParams) -> Self {
        ParamGrads {
            w_enc: vec![0.0; p.l * p.d],
            w_v: vec![0.0; p.l],
            w_m: vec![0.0; p.l * p.d],
            w_c: vec![0.0; p.l * p.d],
        }
    }

    /// Reads gradient `idx` in the same flat order as [`AgentParams::flat_get`].
    pub fn flat_get(&self, idx: usize) -> f64 {
        let ld = self.w_enc.len();
        let l = self.w_v.len();
        if idx < ld {
            self.w_enc[idx]
        } else if idx < ld + l {
            self.w_v[idx - ld]
        } else if idx < 2 * ld + l {
            self.w_m[idx - ld - l]
        } else {
            self.w_c[idx - 2 * ld - l]
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for block in [&mut self.w_enc, &mut self.w_v, &mut self.w_m, &mut self.w_c] {
            for g in block.iter_mut() {
                *g *= factor;
            }
        }
    }
}

/// Gradients of a scalar loss with respect to the three network outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGrad {
    pub value: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl OutputGrad {
    pub fn zeros(d: usize) -> Self {
        OutputGrad { value: 0.0, mean: vec![0.0; d], var: vec![0.0; d] }
    }
}

/// Accumulates exact gradients of `upstream.value * value + upstream.mean .
/// mean + upstream.var . var` into `grads`. Needs the cached forward pass
/// `out` for the same `(p, s)`. ReLU uses subgradient 0 at 0; softplus
/// differentiates to the logistic sigmoid of the cached pre-activation.
pub fn accumulate_backward(
    p: &AgentParams,
    s: &[f64],
    out: &PolicyOutput,
    upstream: &OutputGrad,
    grads: &mut ParamGrads,
) -> Result<()> {
    let (d, l) = (p.d, p.l);
    if s.len() != d || out.hidden.len() != l || upstream.mean.len() != d || upstream.var.len() != d
    {
        return Err(Error::arg("backward pass dimension mismatch"));
    }
    // d(var_k)/d(cov_pre_k) folded into the upstream variance weights.
    let svec: Vec<f64> = upstream
        .var
        .iter()
        .zip(&out.cov_pre)
        .map(|(&u, &pre)| u * sigmoid(pre))
        .collect();
    for (j, &h) in out.hidden.iter().enumerate() {
        let row_m = &p.w_m[j * d..(j + 1) * d];
        let row_c = &p.w_c[j * d..(j + 1) * d];
        // Gradient flowing into hidden unit j from all three heads.
        let mut gh = upstream.value * p.w_v[j];
        for k in 0..d {
            gh += upstream.mean[k] * row_m[k] + svec[k] * row_c[k];
        }
        if h > 0.0 {
            let gm = &mut grads.w_m[j * d..(j + 1) * d];
            let gc = &mut grads.w_c[j * d..(j + 1) * d];
            grads.w_v[j] += upstream.value * h;
            for k in 0..d {
                gm[k] += upstream.mean[k] * h;
                gc[k] += svec[k] * h;
            }
            let ge = &mut grads.w_enc[j * d..(j + 1) * d];
            for (g, &x) in ge.iter_mut().zip(s) {
                *g += gh * x;
            }
        }
        // h == 0: the head weights see a zero activation and the encoder row
        // sits on the flat side of the ReLU, so nothing accumulates.
    }
    Ok(())
}

/// One-shot wrapper over [`accumulate_backward`].
pub fn backward(
    p: &AgentParams,
    s: &[f64],
    out: &PolicyOutput,
    upstream: &OutputGrad,
) -> Result<ParamGrads> {
    let mut grads = ParamGrads::zeros_like(p);
    accumulate_backward(p, s, out, upstream, &mut grads)?;
    Ok(grads)
}

/// Plain gradient descent: `w <- w - lr * g` on every block.
pub fn sgd_step(p: &mut AgentParams, grads: &ParamGrads, lr: f64) {
    let apply = |w: &mut Vec<f64>, g: &Vec<f64>| {
        for (wi, gi) in w.iter_mut().zip(g) {
            *wi -= lr * gi;
        }
    };
    apply(&mut p.w_enc, &grads.w_enc);
    apply(&mut p.w_v, &grads.w_v);
    apply(&mut p.w_m, &grads.w_m);
    apply(&mut p.w_c, &grads.w_c);
}

/// Adam with the conventional constants; kept behind a flag upstream, plain
/// SGD is the default update rule.
#[derive(Debug, Clone)]
pub struct AdamOptimizer {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamOptimizer {
    pub fn new(p: &AgentParams) -> Self {
        AdamOptimizer {
            m: vec![0.0; p.flat_len()],
            v: vec![0.0; p.flat_len()],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, p: &mut AgentParams, grads: &ParamGrads, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for idx in 0..p.flat_len() {
            let g = grads.flat_get(idx);
            self.m[idx] = self.beta1 * self.m[idx] + (1.0 - self.beta1) * g;
            self.v[idx] = self.beta2 * self.v[idx] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[idx] / bc1;
            let v_hat = self.v[idx] / bc2;
            p.flat_set(idx, p.flat_get(idx) - lr * m_hat / (v_hat.sqrt() + self.eps));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: same math, written as plain nested index loops
    /// against the flat accessor instead of the packed rows.
    fn naive_forward(p: &AgentParams, s: &[f64]) -> (f64, Vec<f64>, Vec<f64>, Vec<f64>) {
        let (d, l) = (p.d(), p.l());
        let ld = l * d;
        let mut hidden = vec![0.0; l];
        for j in 0..l {
            let mut pre = 0.0;
            for i in 0..d {
                pre += p.flat_get(j * d + i) * s[i];
            }
            hidden[j] = if pre > 0.0 { pre } else { 0.0 };
        }
        let mut value = 0.0;
        for j in 0..l {
            value += p.flat_get(ld + j) * hidden[j];
        }
        let mut mean = vec![0.0; d];
        let mut var = vec![0.0; d];
        for k in 0..d {
            let mut acc_m = 0.0;
            let mut acc_c = 0.0;
            for j in 0..l {
                acc_m += p.flat_get(ld + l + j * d + k) * hidden[j];
                acc_c += p.flat_get(2 * ld + l + j * d + k) * hidden[j];
            }
            mean[k] = acc_m;
            var[k] = (1.0 + acc_c.exp()).ln();
        }
        (value, mean, var, hidden)
    }

    fn random_state(d: usize, rng: &mut SplitMix64) -> Vec<f64> {
        let v: Vec<f64> = (0..d).map(|_| rng.next_normal()).collect();
        transition(&v).unwrap()
    }

    #[test]
    fn init_shapes_bounds_and_determinism() {
        let p = init_params(4, 8, 1).unwrap();
        assert_eq!(p.d(), 4);
        assert_eq!(p.l(), 8);
        assert_eq!(p.w_enc.len(), 32);
        assert_eq!(p.w_v.len(), 8);
        assert_eq!(p.w_m.len(), 32);
        assert_eq!(p.w_c.len(), 32);
        assert_eq!(p.flat_len(), 104);
        assert!(p.w_enc.iter().all(|x| x.abs() <= 0.5));
        let head_bound = 1.0 / 8.0f64.sqrt();
        assert!(p.w_v.iter().all(|x| x.abs() <= head_bound));
        assert_eq!(p, init_params(4, 8, 1).unwrap());
        assert_ne!(p, init_params(4, 8, 2).unwrap());
        assert!(init_params(0, 8, 1).is_err());
        assert!(init_params(4, 0, 1).is_err());
    }

    #[test]
    fn zero_weights_give_softplus_zero_variance() {
        let mut p = init_params(3, 5, 0).unwrap();
        for idx in 0..p.flat_len() {
            p.flat_set(idx, 0.0);
        }
        let out = forward(&p, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(out.value, 0.0);
        assert!(out.mean.iter().all(|&m| m == 0.0));
        let ln2 = std::f64::consts::LN_2;
        assert!(out.var.iter().all(|&v| (v - ln2).abs() < 1e-15));
    }

    #[test]
    fn nonpositive_preactivations_are_killed() {
        let mut p = init_params(2, 3, 0).unwrap();
        // Non-negative encoder weights and a non-positive state: ReLU zeroes
        // every hidden unit, so the heads see nothing.
        for (i, w) in [0.3, 0.7, 0.1, 0.4, 0.9, 0.2].iter().enumerate() {
            p.flat_set(i, *w);
        }
        let out = forward(&p, &[-1.0, 0.0]).unwrap();
        assert!(out.hidden.iter().all(|&h| h == 0.0));
        assert_eq!(out.value, 0.0);
        let ln2 = std::f64::consts::LN_2;
        assert!(out.var.iter().all(|&v| (v - ln2).abs() < 1e-15));
    }

    #[test]
    fn forward_matches_independent_reimplementation() {
        let mut rng = SplitMix64::new(7);
        for seed in 0..20 {
            let p = init_params(4, 6, seed).unwrap();
            let s = random_state(4, &mut rng);
            let out = forward(&p, &s).unwrap();
            let (value, mean, var, hidden) = naive_forward(&p, &s);
            assert!((out.value - value).abs() < 1e-12);
            for k in 0..4 {
                assert!((out.mean[k] - mean[k]).abs() < 1e-12);
                assert!((out.var[k] - var[k]).abs() < 1e-12);
            }
            for j in 0..6 {
                assert!((out.hidden[j] - hidden[j]).abs() < 1e-12);
            }
            assert!(out.var.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let p = init_params(3, 4, 0).unwrap();
        assert!(forward(&p, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn sampling_is_reproducible_and_calibrated() {
        let out = PolicyOutput {
            value: 0.0,
            mean: vec![0.0],
            var: vec![1.0],
            hidden: vec![],
            cov_pre: vec![],
        };
        let a1 = sample_action(&out, &mut SplitMix64::new(9));
        let a2 = sample_action(&out, &mut SplitMix64::new(9));
        assert_eq!(a1, a2);

        let mut rng = SplitMix64::new(42);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let a = sample_action(&out, &mut rng)[0];
            sum += a;
            sum_sq += a * a;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {}", mean);
        assert!((0.97..=1.03).contains(&var), "var {}", var);
    }

    #[test]
    fn log_prob_standard_normal_at_zero() {
        let out = PolicyOutput {
            value: 0.0,
            mean: vec![0.0],
            var: vec![1.0],
            hidden: vec![],
            cov_pre: vec![],
        };
        assert!((log_prob(&out, &[0.0]) - (-0.9189385332046727)).abs() < 1e-15);
        // At the mean the quadratic term drops out.
        let out2 = PolicyOutput {
            value: 0.0,
            mean: vec![1.5, -2.0],
            var: vec![0.3, 2.5],
            hidden: vec![],
            cov_pre: vec![],
        };
        let expected: f64 = out2
            .var
            .iter()
            .map(|v| -0.5 * (2.0 * std::f64::consts::PI * v).ln())
            .sum();
        assert!((log_prob(&out2, &[1.5, -2.0]) - expected).abs() < 1e-15);
    }

    #[test]
    fn density_integrates_to_one() {
        let mut rng = SplitMix64::new(31);
        let p = init_params(1, 6, 13).unwrap();
        let s = random_state(1, &mut rng);
        let out = forward(&p, &s).unwrap();
        let (mean, sd) = (out.mean[0], out.var[0].sqrt());
        // Simpson's rule over +-10 standard deviations.
        let (lo, hi) = (mean - 10.0 * sd, mean + 10.0 * sd);
        let n = 20_000usize;
        let h = (hi - lo) / n as f64;
        let f = |x: f64| log_prob(&out, &[x]).exp();
        let mut integral = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            integral += w * f(lo + i as f64 * h);
        }
        integral *= h / 3.0;
        assert!((integral - 1.0).abs() < 1e-3, "integral {}", integral);
    }

    #[test]
    fn transition_normalizes_and_signals_zero() {
        let t = transition(&[3.0, 4.0]).unwrap();
        assert!((t[0] - 0.6).abs() < 1e-15);
        assert!((t[1] - 0.8).abs() < 1e-15);
        let unit = transition(&[0.0, 1.0]).unwrap();
        assert_eq!(unit, vec![0.0, 1.0]);
        assert!(transition(&[0.0, 0.0]).is_none());
        assert!(transition(&[f64::NAN, 1.0]).is_none());
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let a: Vec<f64> = (0..5).map(|_| rng.next_normal()).collect();
            let t = transition(&a).unwrap();
            let norm: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let p = init_params(3, 5, 2).unwrap();
        let s = random_state(3, &mut SplitMix64::new(8));
        let out = forward(&p, &s).unwrap();
        let grads = backward(&p, &s, &out, &OutputGrad::zeros(3)).unwrap();
        for idx in 0..p.flat_len() {
            assert_eq!(grads.flat_get(idx), 0.0);
        }
    }

    #[test]
    fn value_gradient_ignores_mean_head() {
        let p = init_params(3, 5, 4).unwrap();
        let s = random_state(3, &mut SplitMix64::new(12));
        let out = forward(&p, &s).unwrap();
        let upstream = OutputGrad { value: 1.0, mean: vec![0.0; 3], var: vec![0.0; 3] };
        let grads = backward(&p, &s, &out, &upstream).unwrap();
        assert!(grads.w_m.iter().all(|&g| g == 0.0));
        assert!(grads.w_c.iter().all(|&g| g == 0.0));
        assert!(grads.w_v.iter().any(|&g| g != 0.0));
    }

    /// Composite scalar loss used by the finite-difference oracle.
    fn composite_loss(p: &AgentParams, s: &[f64], upstream: &OutputGrad) -> f64 {
        let out = forward(p, s).unwrap();
        let mut loss = upstream.value * out.value;
        for k in 0..s.len() {
            loss += upstream.mean[k] * out.mean[k] + upstream.var[k] * out.var[k];
        }
        loss
    }

    #[test]
    fn backward_matches_finite_differences_on_100_configs() {
        let mut rng = SplitMix64::new(2024);
        let mut tested = 0;
        let mut config_seed = 0u64;
        while tested < 100 {
            config_seed += 1;
            let d = 2 + (config_seed % 3) as usize;
            let l = 3 + (config_seed % 4) as usize;
            let p = init_params(d, l, config_seed).unwrap();
            let s = random_state(d, &mut rng);
            let out = forward(&p, &s).unwrap();
            // Skip configurations sitting on a ReLU kink: finite differences
            // straddle the non-differentiable point there.
            let near_kink = (0..l).any(|j| {
                let pre: f64 = p.w_enc[j * d..(j + 1) * d]
                    .iter()
                    .zip(&s)
                    .map(|(w, x)| w * x)
                    .sum();
                pre.abs() < 1e-6
            });
            if near_kink {
                continue;
            }
            let upstream = OutputGrad {
                value: rng.next_normal(),
                mean: (0..d).map(|_| rng.next_normal()).collect(),
                var: (0..d).map(|_| rng.next_normal()).collect(),
            };
            let grads = backward(&p, &s, &out, &upstream).unwrap();
            let step = 1e-5;
            for idx in 0..p.flat_len() {
                let mut plus = p.clone();
                plus.flat_set(idx, p.flat_get(idx) + step);
                let mut minus = p.clone();
                minus.flat_set(idx, p.flat_get(idx) - step);
                let fd = (composite_loss(&plus, &s, &upstream)
                    - composite_loss(&minus, &s, &upstream))
                    / (2.0 * step);
                let an = grads.flat_get(idx);
                let denom = an.abs().max(fd.abs()).max(1e-6);
                assert!(
                    ((an - fd) / denom).abs() < 1e-4,
                    "config {} weight {}: analytic {} vs fd {}",
                    config_seed,
                    idx,
                    an,
                    fd
                );
            }
            tested += 1;
        }
    }

    #[test]
    fn sgd_and_adam_move_against_gradient() {
        let p0 = init_params(2, 3, 6).unwrap();
        let mut grads = ParamGrads::zeros_like(&p0);
        grads.w_v[0] = 2.0;
        let mut p = p0.clone();
        sgd_step(&mut p, &grads, 0.1);
        assert!((p.w_v[0] - (p0.w_v[0] - 0.2)).abs() < 1e-15);
        assert_eq!(p.w_v[1], p0.w_v[1]);

        let mut p = p0.clone();
        let mut adam = AdamOptimizer::new(&p);
        adam.step(&mut p, &grads, 0.1);
        // First Adam step moves by ~lr in the gradient direction.
        assert!(p.w_v[0] < p0.w_v[0]);
        assert!((p.w_v[0] - p0.w_v[0]).abs() < 0.11);
        assert_eq!(p.w_v[1], p0.w_v[1]);
    }

    #[test]
    fn checkpoint_round_trips() {
        let p = init_params(5, 7, 77).unwrap();
        let bytes = p.to_bytes();
        assert_eq!(bytes.len(), 20 + 8 * p.flat_len());
        let back = AgentParams::from_bytes(&bytes).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn checkpoint_rejects_corruption() {
        let p = init_params(2, 2, 0).unwrap();
        let mut bytes = p.to_bytes();
        assert!(AgentParams::from_bytes(&bytes[..10]).is_err());
        bytes.pop();
        assert!(AgentParams::from_bytes(&bytes).is_err());
        let mut wrong_version = p.to_bytes();
        wrong_version[0] = 9;
        assert!(AgentParams::from_bytes(&wrong_version).is_err());
    }

    #[test]
    fn scale_and_flat_round_trip() {
        let p = init_params(3, 4, 5).unwrap();
        let mut clone = p.clone();
        for idx in 0..p.flat_len() {
            clone.flat_set(idx, p.flat_get(idx));
        }
        assert_eq!(p, clone);
        let mut grads = ParamGrads::zeros_like(&p);
        grads.w_enc[0] = 3.0;
        grads.scale(0.5);
        assert_eq!(grads.w_enc[0], 1.5);
    }
}
