//! Prior-probability rules that distinguish the BP variants.

use super::messages::PRIOR_FLOOR;
use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// A correction factor given either once for all messages or per message.
///
/// Per-message factors are row-major `2M x 2N`, one value per `(i, j)` edge,
/// shared across the alphabet axis.
#[derive(Clone, Copy, Debug)]
pub enum Factor<'a> {
    Scalar(f64),
    PerMessage(&'a [f64]),
}

impl Factor<'_> {
    #[inline]
    fn at(&self, edge: usize) -> f64 {
        match self {
            Factor::Scalar(v) => *v,
            Factor::PerMessage(v) => v[edge],
        }
    }

    fn check(&self, edges: usize, name: &str, range: Option<(f64, f64)>) -> Result<()> {
        let values: &[f64] = match self {
            Factor::Scalar(v) => std::slice::from_ref(v),
            Factor::PerMessage(v) => {
                if v.len() != edges {
                    return Err(Error::Dimension(format!(
                        "{name} has {} entries, expected {edges}",
                        v.len()
                    )));
                }
                v
            }
        };
        for &v in values {
            let ok = match range {
                Some((lo, hi)) => (lo..=hi).contains(&v),
                None => v.is_finite(),
            };
            if !ok {
                return Err(Error::InvalidConfig(format!("{name} = {v} out of range")));
            }
        }
        Ok(())
    }
}

/// Max-sum prior `exp(alpha_k - max_m alpha_m)`; no normalization.
pub fn ms_prior(alpha: &Tensor3) -> Tensor3 {
    let mut p = alpha.clone();
    let k = alpha.dims()[2];
    for lane in p.as_mut_slice().chunks_exact_mut(k) {
        let max = lane.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in lane.iter_mut() {
            *v = (*v - max).exp();
        }
    }
    p
}

/// Damping `(1 - delta) p_cur + delta p_prev`.
pub fn damp(p_cur: &Tensor3, p_prev: &Tensor3, delta: Factor<'_>) -> Result<Tensor3> {
    let [sym, obs, k] = p_cur.dims();
    if !p_cur.same_shape(p_prev) {
        return Err(Error::Dimension("damping operands differ in shape".into()));
    }
    delta.check(sym * obs, "delta", Some((0.0, 1.0)))?;
    let mut out = p_cur.clone();
    for (edge, (lane, prev)) in out
        .as_mut_slice()
        .chunks_exact_mut(k)
        .zip(p_prev.as_slice().chunks_exact(k))
        .enumerate()
    {
        let d = delta.at(edge);
        for (v, &pp) in lane.iter_mut().zip(prev) {
            *v = (1.0 - d) * *v + d * pp;
        }
    }
    Ok(out)
}

/// Damped normalized/offset max-sum correction
/// `(1 - delta) lambda p_cur - omega + delta p_prev`, clamped to
/// `[PRIOR_FLOOR, 1]`.
pub fn apply_correction(
    p_cur: &Tensor3,
    p_prev: &Tensor3,
    delta: Factor<'_>,
    lambda: Factor<'_>,
    omega: Factor<'_>,
) -> Result<Tensor3> {
    let [sym, obs, k] = p_cur.dims();
    if !p_cur.same_shape(p_prev) {
        return Err(Error::Dimension("correction operands differ in shape".into()));
    }
    let edges = sym * obs;
    delta.check(edges, "delta", Some((0.0, 1.0)))?;
    lambda.check(edges, "lambda", None)?;
    omega.check(edges, "omega", None)?;
    let mut out = p_cur.clone();
    for (edge, (lane, prev)) in out
        .as_mut_slice()
        .chunks_exact_mut(k)
        .zip(p_prev.as_slice().chunks_exact(k))
        .enumerate()
    {
        let (d, l, w) = (delta.at(edge), lambda.at(edge), omega.at(edge));
        for (v, &pp) in lane.iter_mut().zip(prev) {
            *v = ((1.0 - d) * l * *v - w + d * pp).clamp(PRIOR_FLOOR, 1.0);
        }
    }
    Ok(out)
}

/// One heuristic automatic damping step.
#[derive(Clone, Debug, PartialEq)]
pub struct HadStep {
    /// KL divergence of every message, row-major `2M x 2N`.
    pub d_per_message: Vec<f64>,
    pub d_avg: f64,
    pub delta: f64,
}

/// `KL(p_cur || p_prev)` of one message.
pub fn kl_divergence(p_cur: &[f64], p_prev: &[f64]) -> f64 {
    let d: f64 = p_cur
        .iter()
        .zip(p_prev)
        .map(|(&pc, &pp)| {
            if pc == 0.0 {
                0.0
            } else {
                pc * (pc.max(PRIOR_FLOOR) / pp.max(PRIOR_FLOOR)).ln()
            }
        })
        .sum();
    d.max(0.0)
}

/// Averaged KL divergence of successive priors and the damping factor
/// `d / (d + c)`.
pub fn had_damping_factor(p_cur: &Tensor3, p_prev: &Tensor3, c: f64) -> Result<HadStep> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidConfig(format!("HAD constant must be positive, got {c}")));
    }
    if !p_cur.same_shape(p_prev) {
        return Err(Error::Dimension("HAD operands differ in shape".into()));
    }
    let (d_per_message, d_avg) = kl_per_message(p_cur, p_prev);
    Ok(HadStep {
        delta: d_avg / (d_avg + c),
        d_per_message,
        d_avg,
    })
}

pub(crate) fn kl_per_message(p_cur: &Tensor3, p_prev: &Tensor3) -> (Vec<f64>, f64) {
    let k = p_cur.dims()[2];
    let d: Vec<f64> = p_cur
        .as_slice()
        .chunks_exact(k)
        .zip(p_prev.as_slice().chunks_exact(k))
        .map(|(a, b)| kl_divergence(a, b))
        .collect();
    let avg = d.iter().sum::<f64>() / d.len() as f64;
    (d, avg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(values: &[f64]) -> Tensor3 {
        Tensor3::from_vec(1, 1, values.len(), values.to_vec())
    }

    #[test]
    fn ms_prior_examples() {
        let ln2 = 2f64.ln();
        let p = ms_prior(&single(&[0.0, ln2]));
        assert!((p.get(0, 0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(p.get(0, 0, 1), 1.0);
    }

    #[test]
    fn damping_endpoints_and_midpoint() {
        let cur = single(&[0.8, 0.2]);
        let prev = single(&[0.4, 0.6]);
        assert_eq!(damp(&cur, &prev, Factor::Scalar(0.0)).unwrap(), cur);
        assert_eq!(damp(&cur, &prev, Factor::Scalar(1.0)).unwrap(), prev);
        let mid = damp(&cur, &prev, Factor::Scalar(0.5)).unwrap();
        assert!((mid.get(0, 0, 0) - 0.6).abs() < 1e-15);
        assert!(damp(&cur, &prev, Factor::Scalar(1.5)).is_err());
        assert!(damp(&cur, &prev, Factor::PerMessage(&[0.1, 0.2])).is_err());
    }

    #[test]
    fn correction_examples() {
        let cur = single(&[0.8]);
        let prev = single(&[0.4]);
        let one = Factor::Scalar(1.0);
        let zero = Factor::Scalar(0.0);
        assert_eq!(apply_correction(&cur, &prev, zero, one, zero).unwrap(), cur);
        let v = apply_correction(&cur, &prev, Factor::Scalar(0.5), Factor::Scalar(0.9), Factor::Scalar(0.1))
            .unwrap();
        assert!((v.get(0, 0, 0) - 0.46).abs() < 1e-15);
        let floor = apply_correction(&cur, &prev, zero, one, Factor::Scalar(5.0)).unwrap();
        assert_eq!(floor.get(0, 0, 0), PRIOR_FLOOR);
    }

    #[test]
    fn kl_examples() {
        let same = single(&[0.3, 0.7]);
        let step = had_damping_factor(&same, &same, 1.0).unwrap();
        assert_eq!((step.d_avg, step.delta), (0.0, 0.0));
        let d = kl_divergence(&[0.5, 0.5], &[0.25, 0.75]);
        let oracle = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((d - oracle).abs() < 1e-15);
        assert!((d - 0.143841).abs() < 1e-6);
        assert!(had_damping_factor(&same, &same, 0.0).is_err());
    }
}
