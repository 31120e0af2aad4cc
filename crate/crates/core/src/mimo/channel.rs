//! Kronecker-correlated Rayleigh channels and the AWGN link.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{SymbolFrame, SystemConfig};
use crate::error::{Error, Result};

/// Exponential correlation matrix `R_ij = r^|i-j|`.
pub fn exponential_correlation(size: usize, r: f64) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| {
        if i == j {
            1.0
        } else {
            r.powi(i.abs_diff(j) as i32)
        }
    })
}

/// Principal square root of a symmetric positive definite matrix.
pub fn spd_sqrt(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(r.clone());
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l <= 0.0) {
        return Err(Error::Degenerate(format!(
            "correlation matrix is not positive definite (eigenvalue {bad})"
        )));
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&root) * v.transpose())
}

/// Real-domain expansion `[[Re H, -Im H], [Im H, Re H]]`.
pub fn real_expand(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (n, m) = h.shape();
    DMatrix::from_fn(2 * n, 2 * m, |r, c| {
        let z = h[(r % n, c % m)];
        match (r < n, c < m) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Complex noise variance giving per-receive-antenna SNR `M / sigma2`.
pub fn snr_to_sigma2(cfg: &SystemConfig, snr_db: f64) -> f64 {
    cfg.tx_antennas as f64 / 10f64.powf(snr_db / 10.0)
}

/// One channel realization together with its noise level.
#[derive(Clone, Debug)]
pub struct ChannelInstance {
    pub h: DMatrix<Complex64>,
    pub hw: DMatrix<Complex64>,
    pub rt: Arc<DMatrix<f64>>,
    pub rr: Arc<DMatrix<f64>>,
    /// Noise variance per complex receive dimension.
    pub sigma2: f64,
    pub snr_db: f64,
    pub h_real: DMatrix<f64>,
}

impl ChannelInstance {
    /// Wraps an explicit channel matrix with identity correlation.
    pub fn from_matrix(h: DMatrix<Complex64>, sigma2: f64, snr_db: f64) -> Self {
        let (n, m) = h.shape();
        let h_real = real_expand(&h);
        Self {
            hw: h.clone(),
            h,
            rt: Arc::new(DMatrix::identity(m, m)),
            rr: Arc::new(DMatrix::identity(n, n)),
            sigma2,
            snr_db,
            h_real,
        }
    }

    pub fn tx_antennas(&self) -> usize {
        self.h.ncols()
    }

    pub fn rx_antennas(&self) -> usize {
        self.h.nrows()
    }
}

/// Channel generator with the correlation square roots computed once.
#[derive(Clone, Debug)]
pub struct ChannelModel {
    cfg: SystemConfig,
    rt: Arc<DMatrix<f64>>,
    rr: Arc<DMatrix<f64>>,
    // `None` means identity; skips the multiply and keeps H == Hw exactly.
    rt_sqrt: Option<DMatrix<f64>>,
    rr_sqrt: Option<DMatrix<f64>>,
}

impl ChannelModel {
    pub fn new(cfg: SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let (m, n) = (cfg.tx_antennas, cfg.rx_antennas);
        let rt = exponential_correlation(m, cfg.rho_tx);
        let rr = exponential_correlation(n, cfg.rho_rx);
        let rt_sqrt = (cfg.rho_tx != 0.0).then(|| spd_sqrt(&rt)).transpose()?;
        let rr_sqrt = (cfg.rho_rx != 0.0).then(|| spd_sqrt(&rr)).transpose()?;
        Ok(Self {
            cfg,
            rt: Arc::new(rt),
            rr: Arc::new(rr),
            rt_sqrt,
            rr_sqrt,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    /// Draws `H = Rr^{1/2} Hw Rt^{1/2}` with `Hw` i.i.d. `CN(0, 1)`.
    pub fn generate<R: Rng + ?Sized>(&self, snr_db: f64, rng: &mut R) -> Result<ChannelInstance> {
        if !snr_db.is_finite() {
            return Err(Error::InvalidConfig(format!("SNR must be finite, got {snr_db}")));
        }
        let (m, n) = (self.cfg.tx_antennas, self.cfg.rx_antennas);
        let std = std::f64::consts::FRAC_1_SQRT_2;
        let hw = DMatrix::from_fn(n, m, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(std * re, std * im)
        });
        let mut h = hw.clone();
        if let Some(rr) = &self.rr_sqrt {
            h = rr.map(Complex64::from) * h;
        }
        if let Some(rt) = &self.rt_sqrt {
            h *= rt.map(Complex64::from);
        }
        let h_real = real_expand(&h);
        Ok(ChannelInstance {
            h,
            hw,
            rt: Arc::clone(&self.rt),
            rr: Arc::clone(&self.rr),
            sigma2: snr_to_sigma2(&self.cfg, snr_db),
            snr_db,
            h_real,
        })
    }
}

/// Convenience wrapper building a fresh [`ChannelModel`] for a single draw.
pub fn generate_channel<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    snr_db: f64,
    rng: &mut R,
) -> Result<ChannelInstance> {
    ChannelModel::new(*cfg)?.generate(snr_db, rng)
}

/// Received vector in complex and real-decomposed form.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedFrame {
    pub y: Vec<Complex64>,
    /// `[Re(y); Im(y)]`, length `2N`.
    pub y_real: Vec<f64>,
    pub snr_db: f64,
}

/// `y = Hx + n` with `n ~ CN(0, sigma2 I)`.
pub fn transmit<R: Rng + ?Sized>(
    ch: &ChannelInstance,
    frame: &SymbolFrame,
    rng: &mut R,
) -> Result<ReceivedFrame> {
    let (n, m) = ch.h.shape();
    if frame.x.len() != m {
        return Err(Error::Dimension(format!(
            "channel has {m} transmit antennas, frame has {} symbols",
            frame.x.len()
        )));
    }
    let std = (ch.sigma2 / 2.0).sqrt();
    let y: Vec<Complex64> = (0..n)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, x) in frame.x.iter().enumerate() {
                acc += ch.h[(j, i)] * x;
            }
            if std > 0.0 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                acc += Complex64::new(std * re, std * im);
            }
            acc
        })
        .collect();
    let y_real = y.iter().map(|z| z.re).chain(y.iter().map(|z| z.im)).collect();
    Ok(ReceivedFrame {
        y,
        y_real,
        snr_db: ch.snr_db,
    })
}
