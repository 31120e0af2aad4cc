//! The unfolded forward pass recorded on a [`Tape`].
//!
//! Mirrors [`UnfoldedNetwork::forward_system`](crate::unfolded::UnfoldedNetwork::forward_system)
//! operation for operation, so the recorded loss equals the plain `f64`
//! evaluation up to the summation order of the output softmax.

use super::tape::{Tape, Var};
use crate::bp::{RealSystem, PRIOR_FLOOR};
use crate::error::{Error, Result};
use crate::unfolded::{CorrectionFactors, FactorKind, NetVariant};

/// Handles produced by [`record_loss`].
#[derive(Debug)]
pub struct RecordedLoss {
    /// One leaf per raw parameter, in [`CorrectionFactors::raw_params`] order.
    pub params: Vec<Var>,
    pub loss: Var,
}

struct Dims {
    sym: usize,
    obs: usize,
    k: usize,
}

impl Dims {
    // p / alpha: [i][j][k]
    #[inline]
    fn sjk(&self, i: usize, j: usize, kk: usize) -> usize {
        (i * self.obs + j) * self.k + kk
    }
    // beta: [j][i][k]
    #[inline]
    fn jik(&self, j: usize, i: usize, kk: usize) -> usize {
        (j * self.sym + i) * self.k + kk
    }
}

/// Records the cross-entropy loss of one sample.
///
/// `labels` holds the alphabet index of each real dimension.
pub fn record_loss(
    tape: &mut Tape,
    factors: &CorrectionFactors,
    sys: &RealSystem,
    labels: &[usize],
) -> Result<RecordedLoss> {
    let (layers, sym, obs) = factors.shape();
    let k = sys.alphabet_size();
    if sym != sys.symbols() || obs != sys.observations() {
        return Err(Error::Dimension(format!(
            "factors are {sym}x{obs}, system is {}x{}",
            sys.symbols(),
            sys.observations()
        )));
    }
    if labels.len() != sym || labels.iter().any(|&l| l >= k) {
        return Err(Error::Dimension(format!("{} labels for {sym} dimensions of alphabet {k}", labels.len())));
    }
    let d = Dims { sym, obs, k };
    let edges = sym * obs;

    let raw = factors.raw_params();
    let params: Vec<Var> = raw.iter().map(|&r| tape.leaf(r)).collect();
    let values: Vec<Var> = params.iter().map(|&p| tape.logistic(p)).collect();
    let family_len = layers * edges;
    let family = |kind: FactorKind| -> &[Var] {
        let pos = factors
            .variant()
            .families()
            .iter()
            .position(|&f| f == kind)
            .expect("family of variant");
        &values[pos * family_len..(pos + 1) * family_len]
    };

    let zero = tape.leaf(0.0);
    let uniform = tape.leaf(1.0 / k as f64);
    let mut p_cur = vec![uniform; edges * k];

    let alphabet = sys.alphabet().to_vec();
    let alphabet_sq: Vec<f64> = alphabet.iter().map(|s| s * s).collect();

    let mut beta = Vec::new();
    for layer in 0..layers {
        beta = observation_update(tape, sys, &d, &p_cur, &alphabet, &alphabet_sq, zero)?;
        if layer + 1 == layers {
            // The priors of the last layer feed nothing downstream.
            break;
        }
        let alpha = extrinsic_sum(tape, &d, &beta, zero);
        let lo = layer * edges;
        let delta = &family(FactorKind::Delta)[lo..lo + edges];
        let mut p_new = Vec::with_capacity(edges * k);
        match factors.variant() {
            NetVariant::DnnDbp => {
                for e in 0..edges {
                    let lane = &alpha[e * k..(e + 1) * k];
                    let shift = -lane.iter().map(|&a| tape.value(a)).fold(f64::NEG_INFINITY, f64::max);
                    let ex: Vec<Var> = lane.iter().map(|&a| tape.exp_offset(a, shift)).collect();
                    let sum = tape.sum(&ex);
                    for (kk, &x) in ex.iter().enumerate() {
                        let p = tape.div(x, sum);
                        p_new.push(tape.lerp(p, p_cur[e * k + kk], delta[e]));
                    }
                }
            }
            NetVariant::DnnMs => {
                let lambda = &family(FactorKind::Lambda)[lo..lo + edges];
                let omega = &family(FactorKind::Omega)[lo..lo + edges];
                for e in 0..edges {
                    let lane = &alpha[e * k..(e + 1) * k];
                    let mut m = lane[0];
                    for &a in &lane[1..] {
                        m = tape.max(m, a);
                    }
                    for (kk, &a) in lane.iter().enumerate() {
                        let p = tape.exp_diff(a, m);
                        p_new.push(tape.correct(
                            p,
                            p_cur[e * k + kk],
                            delta[e],
                            lambda[e],
                            omega[e],
                            PRIOR_FLOOR,
                            1.0,
                        ));
                    }
                }
            }
        }
        p_cur = p_new;
    }

    // Soft output, its softmax and the cross entropy against the labels.
    let mut logs = Vec::with_capacity(sym);
    let mut column = Vec::with_capacity(obs);
    for (i, &label) in labels.iter().enumerate() {
        let mut gamma = Vec::with_capacity(k);
        for kk in 0..k {
            if kk == 0 {
                gamma.push(zero);
                continue;
            }
            column.clear();
            column.extend((0..obs).map(|t| beta[d.jik(t, i, kk)]));
            gamma.push(tape.sum(&column));
        }
        let shift = -gamma.iter().map(|&g| tape.value(g)).fold(f64::NEG_INFINITY, f64::max);
        let ex: Vec<Var> = gamma.iter().map(|&g| tape.exp_offset(g, shift)).collect();
        let sum = tape.sum(&ex);
        let o = tape.div(ex[label], sum);
        let o = tape.floor(o, PRIOR_FLOOR);
        logs.push(tape.ln(o));
    }
    let total = tape.sum(&logs);
    let neg_dims = tape.leaf(-(sym as f64));
    let loss = tape.div(total, neg_dims);
    Ok(RecordedLoss { params, loss })
}

fn observation_update(
    tape: &mut Tape,
    sys: &RealSystem,
    d: &Dims,
    priors: &[Var],
    alphabet: &[f64],
    alphabet_sq: &[f64],
    zero: Var,
) -> Result<Vec<Var>> {
    let (sym, obs, k) = (d.sym, d.obs, d.k);
    let mut beta = vec![zero; obs * sym * k];
    let mut means = Vec::with_capacity(sym);
    let mut vars = Vec::with_capacity(sym);
    let mut h_row = vec![0.0; sym];
    let mut h2_row = vec![0.0; sym];
    for j in 0..obs {
        means.clear();
        vars.clear();
        for t in 0..sym {
            let lane = &priors[d.sjk(t, j, 0)..d.sjk(t, j, 0) + k];
            let mean = tape.floored_lin_comb(lane, alphabet, PRIOR_FLOOR);
            let second = tape.floored_lin_comb(lane, alphabet_sq, PRIOR_FLOOR);
            let mean_sq = tape.square(mean);
            let var = tape.sub(second, mean_sq);
            means.push(mean);
            vars.push(tape.floor(var, 0.0));
            h_row[t] = sys.h(j, t);
            h2_row[t] = h_row[t] * h_row[t];
        }
        let mu_total = tape.lin_comb(&means, &h_row, 0.0);
        let nu_total = tape.lin_comb(&vars, &h2_row, 0.0);
        let yj = sys.y(j);
        for i in 0..sym {
            let h = h_row[i];
            let mu = tape.lin_comb(&[mu_total, means[i]], &[1.0, -h], 0.0);
            let nu = tape.lin_comb(&[nu_total, vars[i]], &[1.0, -h2_row[i]], 0.0);
            let nu = tape.floor(nu, 0.0);
            let nu = tape.affine(nu, 1.0, sys.noise_var());
            let nu_val = tape.value(nu);
            if !(nu_val > 0.0) || !nu_val.is_finite() {
                return Err(Error::Degenerate(format!(
                    "interference variance {nu_val} at observation {j}, symbol {i}"
                )));
            }
            let two_nu = tape.scale(nu, 2.0);
            let r = tape.affine(mu, -1.0, yj);
            let d1 = tape.affine(r, 1.0, -(h * alphabet[0]));
            let d1_sq = tape.square(d1);
            for kk in 1..k {
                let dk = tape.affine(r, 1.0, -(h * alphabet[kk]));
                let dk_sq = tape.square(dk);
                let num = tape.sub(d1_sq, dk_sq);
                let b = tape.div(num, two_nu);
                if !tape.value(b).is_finite() {
                    return Err(Error::Degenerate(format!(
                        "non-finite posterior LLR at observation {j}, symbol {i}"
                    )));
                }
                beta[d.jik(j, i, kk)] = b;
            }
        }
    }
    Ok(beta)
}

/// Prefix/suffix extrinsic sums, matching the `f64` path bit for bit.
fn extrinsic_sum(tape: &mut Tape, d: &Dims, beta: &[Var], zero: Var) -> Vec<Var> {
    let (sym, obs, k) = (d.sym, d.obs, d.k);
    let mut alpha = vec![zero; sym * obs * k];
    let mut prefix = vec![zero; obs];
    for i in 0..sym {
        for kk in 1..k {
            let mut acc = zero;
            for (t, slot) in prefix.iter_mut().enumerate() {
                *slot = acc;
                acc = tape.add(acc, beta[d.jik(t, i, kk)]);
            }
            let mut suffix = zero;
            for t in (0..obs).rev() {
                alpha[d.sjk(i, t, kk)] = tape.add(prefix[t], suffix);
                suffix = tape.add(suffix, beta[d.jik(t, i, kk)]);
            }
        }
    }
    alpha
}

/// Loss and gradient with respect to the raw parameters of one sample.
pub fn loss_and_gradient(
    tape: &mut Tape,
    factors: &CorrectionFactors,
    sys: &RealSystem,
    labels: &[usize],
) -> Result<(f64, Vec<f64>)> {
    tape.clear();
    let rec = record_loss(tape, factors, sys, labels)?;
    tape.backward(rec.loss);
    let grad = rec.params.iter().map(|&p| tape.grad(p)).collect();
    Ok((tape.value(rec.loss), grad))
}
