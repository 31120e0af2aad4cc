use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::mimo::{ChannelInstance, ReceivedFrame, SystemConfig};

/// Linear MMSE estimate and its sliced decisions.
#[derive(Clone, Debug, PartialEq)]
pub struct MmseOutput {
    /// Real-domain estimate, length `2M`.
    pub estimate: Vec<f64>,
    /// Nearest alphabet index per real dimension.
    pub decisions: Vec<usize>,
}

/// `x = (Hr^T Hr + sigma2/2 I)^{-1} Hr^T yr`, then nearest-point slicing.
pub fn mmse_detect(cfg: &SystemConfig, ch: &ChannelInstance, rx: &ReceivedFrame) -> Result<MmseOutput> {
    let pam = cfg.alphabet()?;
    let hr = &ch.h_real;
    if hr.nrows() != rx.y_real.len() || hr.ncols() != cfg.real_tx() {
        return Err(Error::Dimension("MMSE operands".into()));
    }
    let noise = ch.sigma2 / 2.0;
    let mut gram = hr.tr_mul(hr);
    for d in 0..gram.nrows() {
        gram[(d, d)] += noise;
    }
    let rhs = hr.tr_mul(&DVector::from_column_slice(&rx.y_real));
    let x = gram
        .cholesky()
        .ok_or_else(|| Error::Degenerate("MMSE Gram matrix is not positive definite".into()))?
        .solve(&rhs);
    let estimate: Vec<f64> = x.iter().copied().collect();
    if estimate.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite MMSE estimate".into()));
    }
    let decisions = estimate.iter().map(|&v| pam.slice(v)).collect();
    Ok(MmseOutput { estimate, decisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    #[test]
    fn scalar_real_channel_closed_form() {
        // M = N = 1 complex with real h: Hr = diag(h, h).
        let cfg = SystemConfig::new(1, 1, 16);
        let h = 0.8;
        let ch = ChannelInstance::from_matrix(DMatrix::from_element(1, 1, Complex64::new(h, 0.0)), 0.5, 3.0);
        let rx = ReceivedFrame {
            y: vec![Complex64::new(0.3, -0.2)],
            y_real: vec![0.3, -0.2],
            snr_db: 3.0,
        };
        let out = mmse_detect(&cfg, &ch, &rx).unwrap();
        let gain = h / (h * h + 0.25);
        assert!((out.estimate[0] - gain * 0.3).abs() < 1e-14);
        assert!((out.estimate[1] + gain * 0.2).abs() < 1e-14);
    }
}
