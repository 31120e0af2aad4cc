//! Square QAM as a pair of Gray-coded PAM alphabets.
//!
//! A `K_c`-QAM symbol carries `log2(K_c)` bits: the first half select the
//! in-phase PAM level, the second half the quadrature level. Each real
//! dimension uses the `K = sqrt(K_c)` point alphabet
//! `(2k - (K - 1)) * scale`, `k = 0..K`, scaled to unit average complex
//! symbol energy. Alphabet index 0 is the most negative level and serves as
//! the LLR reference symbol throughout the detectors.

use num_complex::Complex64;
use rand::Rng;

use super::SystemConfig;
use crate::error::{Error, Result};

/// Per-dimension PAM alphabet with binary-reflected Gray labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PamAlphabet {
    levels: Vec<f64>,
    bits: usize,
    scale: f64,
}

impl PamAlphabet {
    /// `size` must be a power of two and at least 2.
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "PAM alphabet size must be a power of two >= 2, got {size}"
            )));
        }
        let k = size as f64;
        // E|x|^2 = 2 * (K^2 - 1) / 3 * scale^2 for the complex symbol.
        let scale = 1.0 / (2.0 * (k * k - 1.0) / 3.0).sqrt();
        let levels = (0..size)
            .map(|i| (2.0 * i as f64 - (k - 1.0)) * scale)
            .collect();
        Ok(Self {
            levels,
            bits: size.trailing_zeros() as usize,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Bits carried by one real dimension.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Half the distance between adjacent levels.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> f64 {
        self.levels[index]
    }

    /// Gray label of the level at `index`.
    pub fn label(&self, index: usize) -> usize {
        index ^ (index >> 1)
    }

    /// Level index carrying the Gray `label`.
    pub fn index_of_label(&self, label: usize) -> usize {
        let mut index = label;
        let mut shift = label >> 1;
        while shift != 0 {
            index ^= shift;
            shift >>= 1;
        }
        index
    }

    /// Nearest level index. Exact midpoints resolve to the lower index.
    pub fn slice(&self, value: f64) -> usize {
        let top = (self.len() - 1) as f64;
        let position = 0.5 * (value / self.scale + top);
        // Near-ties are treated as ties so that a midpoint spelled slightly
        // differently in floating point still rounds down.
        let index = (position - 0.5 - 1e-9).ceil();
        index.clamp(0.0, top) as usize
    }

    /// Appends the Gray bits of `index`, most significant first.
    pub fn push_bits(&self, index: usize, out: &mut Vec<u8>) {
        let label = self.label(index);
        for b in (0..self.bits).rev() {
            out.push(((label >> b) & 1) as u8);
        }
    }

    /// Reads `bits()` bits (MSB first) and returns the level index.
    pub fn index_from_bits(&self, bits: &[u8]) -> usize {
        let label = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        self.index_of_label(label)
    }
}

/// One transmitted vector in both complex and real-decomposed form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolFrame {
    pub bits: Vec<u8>,
    pub x: Vec<Complex64>,
    /// `[Re(x); Im(x)]`, length `2M`.
    pub x_real: Vec<f64>,
    /// Alphabet index of each real dimension, length `2M`.
    pub labels: Vec<usize>,
    alphabet_size: usize,
}

impl SymbolFrame {
    /// Row-major `2M x K` one-hot encoding of `labels`.
    pub fn labels_onehot(&self) -> Vec<f64> {
        let k = self.alphabet_size;
        let mut out = vec![0.0; self.labels.len() * k];
        for (i, &label) in self.labels.iter().enumerate() {
            out[i * k + label] = 1.0;
        }
        out
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }
}

/// Gray-maps `bits` onto `M` QAM symbols.
pub fn modulate(bits: &[u8], cfg: &SystemConfig) -> Result<SymbolFrame> {
    let pam = cfg.alphabet()?;
    let m = cfg.tx_antennas;
    let per_symbol = 2 * pam.bits();
    if bits.len() != m * per_symbol {
        return Err(Error::Dimension(format!(
            "expected {} bits for {m} symbols, got {}",
            m * per_symbol,
            bits.len()
        )));
    }
    let mut labels = vec![0; 2 * m];
    let mut x = Vec::with_capacity(m);
    for (i, chunk) in bits.chunks_exact(per_symbol).enumerate() {
        let re = pam.index_from_bits(&chunk[..pam.bits()]);
        let im = pam.index_from_bits(&chunk[pam.bits()..]);
        labels[i] = re;
        labels[m + i] = im;
        x.push(Complex64::new(pam.level(re), pam.level(im)));
    }
    let x_real = labels.iter().map(|&l| pam.level(l)).collect();
    Ok(SymbolFrame {
        bits: bits.to_vec(),
        x,
        x_real,
        labels,
        alphabet_size: pam.len(),
    })
}

/// Draws uniform random bits and modulates them.
pub fn random_frame<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<SymbolFrame> {
    let bits: Vec<u8> = (0..cfg.bits_per_vector())
        .map(|_| u8::from(rng.random::<bool>()))
        .collect();
    modulate(&bits, cfg)
}

/// Bits of per-dimension alphabet indices (length `2M`), in transmit order.
pub fn indices_to_bits(indices: &[usize], cfg: &SystemConfig) -> Result<Vec<u8>> {
    let pam = cfg.alphabet()?;
    let m = cfg.tx_antennas;
    if indices.len() != 2 * m {
        return Err(Error::Dimension(format!(
            "expected {} real dimensions, got {}",
            2 * m,
            indices.len()
        )));
    }
    let mut bits = Vec::with_capacity(cfg.bits_per_vector());
    for i in 0..m {
        pam.push_bits(indices[i], &mut bits);
        pam.push_bits(indices[m + i], &mut bits);
    }
    Ok(bits)
}

/// Slices a real-domain estimate to the nearest alphabet points and returns
/// their Gray bits.
pub fn hard_demap(x_hat: &[f64], cfg: &SystemConfig) -> Result<Vec<u8>> {
    let pam = cfg.alphabet()?;
    if let Some(bad) = x_hat.iter().find(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite estimate {bad}")));
    }
    let indices: Vec<usize> = x_hat.iter().map(|&v| pam.slice(v)).collect();
    indices_to_bits(&indices, cfg)
}
