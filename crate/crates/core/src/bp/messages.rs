//! Observation-node and symbol-node message updates on the real-domain
//! factor graph.
//!
//! Symbol nodes `i = 0..2M` and observation nodes `j = 0..2N` are fully
//! connected. Priors `p[i][j][k]` travel symbol -> observation, posterior LLRs
//! `beta[j][i][k]` travel observation -> symbol. All LLRs are referenced to
//! alphabet index 0, so `beta[j][i][0] == 0` always.

use crate::error::{Error, Result};
use crate::mimo::{ChannelInstance, ReceivedFrame, SystemConfig};
use crate::tensor::Tensor3;

/// Floor applied to prior weights before they enter a likelihood or a log.
pub const PRIOR_FLOOR: f64 = 1e-12;

/// Row-major real-domain view of one detection problem.
#[derive(Clone, Debug)]
pub struct RealSystem {
    obs: usize,
    sym: usize,
    h: Vec<f64>,
    h2: Vec<f64>,
    y: Vec<f64>,
    noise_var: f64,
    alphabet: Vec<f64>,
}

impl RealSystem {
    pub fn new(cfg: &SystemConfig, ch: &ChannelInstance, rx: &ReceivedFrame) -> Result<Self> {
        let alphabet = cfg.alphabet()?.levels().to_vec();
        let (obs, sym) = ch.h_real.shape();
        if sym != cfg.real_tx() || obs != cfg.real_rx() || rx.y_real.len() != obs {
            return Err(Error::Dimension(format!(
                "system {}x{} vs channel {obs}x{sym} and {} observations",
                cfg.real_rx(),
                cfg.real_tx(),
                rx.y_real.len()
            )));
        }
        let h: Vec<f64> = (0..obs)
            .flat_map(|j| (0..sym).map(move |i| (j, i)))
            .map(|(j, i)| ch.h_real[(j, i)])
            .collect();
        Self::from_parts(obs, sym, h, rx.y_real.clone(), ch.sigma2 / 2.0, alphabet)
    }

    /// Builds a system directly from a row-major `obs x sym` real matrix.
    pub fn from_parts(
        obs: usize,
        sym: usize,
        h: Vec<f64>,
        y: Vec<f64>,
        noise_var: f64,
        alphabet: Vec<f64>,
    ) -> Result<Self> {
        if h.len() != obs * sym || y.len() != obs {
            return Err(Error::Dimension("real system shape".into()));
        }
        if !(noise_var > 0.0) {
            return Err(Error::Degenerate(format!(
                "per-dimension noise variance must be positive, got {noise_var}"
            )));
        }
        let h2 = h.iter().map(|v| v * v).collect();
        Ok(Self {
            obs,
            sym,
            h,
            h2,
            y,
            noise_var,
            alphabet,
        })
    }

    /// `2N`
    pub fn observations(&self) -> usize {
        self.obs
    }

    /// `2M`
    pub fn symbols(&self) -> usize {
        self.sym
    }

    pub fn alphabet(&self) -> &[f64] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    /// Per real dimension, `sigma2 / 2`.
    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    #[inline]
    pub fn h(&self, j: usize, i: usize) -> f64 {
        self.h[j * self.sym + i]
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y[j]
    }

    /// Uniform `1/K` priors, the iteration-0 state.
    pub fn uniform_priors(&self) -> Tensor3 {
        let k = self.alphabet.len();
        Tensor3::filled(self.sym, self.obs, k, 1.0 / k as f64)
    }
}

/// Mean and variance of a symbol under (possibly unnormalized) prior weights.
///
/// Weights are floored at [`PRIOR_FLOOR`] and used as given, so max-sum
/// priors keep their overestimation. The variance is floored at zero.
#[inline]
fn prior_moments(weights: &[f64], alphabet: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (&p, &s) in weights.iter().zip(alphabet) {
        let w = p.max(PRIOR_FLOOR);
        mean += w * s;
        second += w * (s * s);
    }
    (mean, (second - mean * mean).max(0.0))
}

/// Posterior LLRs under the Gaussian interference approximation.
///
/// For each edge `(j, i)` the interference of all other symbols is replaced
/// by a Gaussian with mean `sum_{t != i} h_jt E[x_t]` and variance
/// `sum_{t != i} h_jt^2 Var[x_t] + sigma2 / 2`, both taken from the priors
/// `p[t][j]` sent to observation `j`.
pub fn observation_update(sys: &RealSystem, priors: &Tensor3) -> Result<Tensor3> {
    let (sym, obs, k) = (sys.sym, sys.obs, sys.alphabet.len());
    if priors.dims() != [sym, obs, k] {
        return Err(Error::Dimension(format!(
            "priors {:?}, expected {:?}",
            priors.dims(),
            [sym, obs, k]
        )));
    }
    let alphabet = &sys.alphabet;
    let mut beta = Tensor3::zeros(obs, sym, k);
    let mut means = vec![0.0; sym];
    let mut vars = vec![0.0; sym];
    for j in 0..obs {
        let mut mu_total = 0.0;
        let mut nu_total = 0.0;
        for t in 0..sym {
            let (m, v) = prior_moments(priors.lane(t, j), alphabet);
            means[t] = m;
            vars[t] = v;
            mu_total += sys.h(j, t) * m;
            nu_total += sys.h2[j * sym + t] * v;
        }
        let yj = sys.y[j];
        for i in 0..sym {
            let h = sys.h(j, i);
            let mu = mu_total - h * means[i];
            // Exact value is non-negative; clamp the cancellation residue.
            let nu = (nu_total - sys.h2[j * sym + i] * vars[i]).max(0.0) + sys.noise_var;
            if !(nu > 0.0) || !nu.is_finite() {
                return Err(Error::Degenerate(format!(
                    "interference variance {nu} at observation {j}, symbol {i}"
                )));
            }
            let r = yj - mu;
            let d1 = r - h * alphabet[0];
            let out = beta.lane_mut(j, i);
            out[0] = 0.0;
            for kk in 1..k {
                let dk = r - h * alphabet[kk];
                out[kk] = (d1 * d1 - dk * dk) / (2.0 * nu);
            }
        }
    }
    Ok(beta)
}

/// Extrinsic sum `alpha[i][j][k] = sum_{t != j} beta[t][i][k]`.
///
/// Computed from prefix and suffix sums so `alpha[i][j]` never touches
/// `beta[j][i]`.
pub fn extrinsic_sum(beta: &Tensor3) -> Tensor3 {
    let [obs, sym, k] = beta.dims();
    let mut alpha = Tensor3::zeros(sym, obs, k);
    let mut prefix = vec![0.0; obs];
    for i in 0..sym {
        for kk in 0..k {
            let mut acc = 0.0;
            for t in 0..obs {
                prefix[t] = acc;
                acc += beta.get(t, i, kk);
            }
            let mut suffix = 0.0;
            for t in (0..obs).rev() {
                alpha.set(i, t, kk, prefix[t] + suffix);
                suffix += beta.get(t, i, kk);
            }
        }
    }
    alpha
}

/// Numerically stable softmax over the last axis.
pub fn softmax_prior(alpha: &Tensor3) -> Tensor3 {
    let mut p = alpha.clone();
    let k = alpha.dims()[2];
    for lane in p.as_mut_slice().chunks_exact_mut(k) {
        softmax_in_place(lane);
    }
    p
}

pub(crate) fn softmax_in_place(lane: &mut [f64]) {
    let max = lane.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in lane.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in lane.iter_mut() {
        *v /= sum;
    }
}

/// Symbol-node update: extrinsic LLR sums and their softmax priors.
pub fn symbol_update(beta: &Tensor3) -> Result<(Tensor3, Tensor3)> {
    if let Some(bad) = beta.as_slice().iter().find(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite posterior LLR {bad}")));
    }
    let alpha = extrinsic_sum(beta);
    let p = softmax_prior(&alpha);
    Ok((alpha, p))
}

/// Soft output `gamma[i][k] = sum_t beta[t][i][k]`, row-major `2M x K`.
pub fn soft_output(beta: &Tensor3) -> Vec<f64> {
    let [obs, sym, k] = beta.dims();
    let mut gamma = vec![0.0; sym * k];
    for t in 0..obs {
        for i in 0..sym {
            for (g, b) in gamma[i * k..(i + 1) * k].iter_mut().zip(beta.lane(t, i)) {
                *g += b;
            }
        }
    }
    gamma
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_system(h: f64, y: f64, noise_var: f64, alphabet: Vec<f64>) -> RealSystem {
        RealSystem::from_parts(1, 1, vec![h], vec![y], noise_var, alphabet).unwrap()
    }

    #[test]
    fn single_symbol_matches_scalar_gaussian_llr() {
        let alphabet = vec![-3.0, -1.0, 1.0, 3.0]
            .into_iter()
            .map(|v: f64| v / 10f64.sqrt())
            .collect::<Vec<_>>();
        let (h, y, nv) = (0.7, 0.31, 0.2);
        let sys = scalar_system(h, y, nv, alphabet.clone());
        let beta = observation_update(&sys, &sys.uniform_priors()).unwrap();
        for k in 0..4 {
            let like = |s: f64| (-(y - h * s).powi(2) / (2.0 * nv)).exp();
            let oracle = (like(alphabet[k]) / like(alphabet[0])).ln();
            assert!((beta.get(0, 0, k) - oracle).abs() < 1e-12, "k={k}");
        }
        assert_eq!(beta.get(0, 0, 0), 0.0);
    }

    /// Straight-line evaluation for a 2x2 real system with K = 2.
    #[test]
    fn two_by_two_matches_hand_evaluation() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let alphabet = vec![-a, a];
        let h = vec![0.9, -0.4, 0.3, 1.2]; // rows are observations
        let y = vec![0.5, -0.8];
        let nv = 0.25;
        let sys = RealSystem::from_parts(2, 2, h.clone(), y.clone(), nv, alphabet.clone()).unwrap();
        // p[i][j] = (q, 1 - q)
        let q = [[0.2, 0.6], [0.7, 0.45]];
        let mut pri = Tensor3::zeros(2, 2, 2);
        for i in 0..2 {
            for j in 0..2 {
                pri.set(i, j, 0, q[i][j]);
                pri.set(i, j, 1, 1.0 - q[i][j]);
            }
        }
        let beta = observation_update(&sys, &pri).unwrap();
        for j in 0..2 {
            for i in 0..2 {
                let t = 1 - i;
                let pt0 = q[t][j];
                let mean = pt0 * (-a) + (1.0 - pt0) * a;
                let var = pt0 * a * a + (1.0 - pt0) * a * a - mean * mean;
                let htj = h[j * 2 + t];
                let hji = h[j * 2 + i];
                let mu = htj * mean;
                let nu = htj * htj * var + nv;
                let e1 = (y[j] - mu - hji * (-a)).powi(2);
                let e2 = (y[j] - mu - hji * a).powi(2);
                let oracle = (e1 - e2) / (2.0 * nu);
                assert!((beta.get(j, i, 1) - oracle).abs() < 1e-12);
                assert_eq!(beta.get(j, i, 0), 0.0);
            }
        }
    }

    #[test]
    fn zero_messages_give_uniform_priors() {
        let beta = Tensor3::zeros(3, 2, 4);
        let (alpha, p) = symbol_update(&beta).unwrap();
        assert!(alpha.as_slice().iter().all(|&v| v == 0.0));
        assert!(p.as_slice().iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn hand_evaluated_symbol_update() {
        // Two observations, one symbol, K = 2, beta = (0, ln 2) on both.
        let ln2 = 2f64.ln();
        let beta = Tensor3::from_vec(2, 1, 2, vec![0.0, ln2, 0.0, ln2]);
        let (alpha, p) = symbol_update(&beta).unwrap();
        assert_eq!(alpha.lane(0, 0), &[0.0, ln2]);
        assert!((p.get(0, 0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.get(0, 0, 1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn rejects_zero_noise() {
        assert!(RealSystem::from_parts(1, 1, vec![1.0], vec![0.0], 0.0, vec![-1.0, 1.0]).is_err());
    }
}
