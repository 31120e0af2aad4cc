//! MIMO system model: Gray-coded square QAM, Kronecker-correlated Rayleigh
//! channels, AWGN and the equivalent real-valued `2N x 2M` system.

mod channel;
mod qam;
mod scenario;

pub use channel::{
    exponential_correlation, generate_channel, real_expand, snr_to_sigma2, spd_sqrt, transmit,
    ChannelInstance, ChannelModel, ReceivedFrame,
};
pub use scenario::{ChannelScenario, ScenarioChannel};
pub use qam::{
    hard_demap, indices_to_bits, modulate, random_frame, PamAlphabet, SymbolFrame,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Antenna counts, constellation and correlation coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// `M`
    pub tx_antennas: usize,
    /// `N`
    pub rx_antennas: usize,
    /// Square QAM size `K_c` (16 for 16-QAM).
    #[serde(default = "default_modulation")]
    pub modulation_order: usize,
    #[serde(default)]
    pub rho_tx: f64,
    #[serde(default)]
    pub rho_rx: f64,
}

fn default_modulation() -> usize {
    16
}

impl SystemConfig {
    pub fn new(tx_antennas: usize, rx_antennas: usize, modulation_order: usize) -> Self {
        Self {
            tx_antennas,
            rx_antennas,
            modulation_order,
            rho_tx: 0.0,
            rho_rx: 0.0,
        }
    }

    pub fn with_correlation(mut self, rho_tx: f64, rho_rx: f64) -> Self {
        self.rho_tx = rho_tx;
        self.rho_rx = rho_rx;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_antennas == 0 || self.rx_antennas == 0 {
            return Err(Error::InvalidConfig("antenna counts must be >= 1".into()));
        }
        let k = self.alphabet_size();
        if k * k != self.modulation_order || k < 2 || !k.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "modulation order {} is not a square power-of-two QAM",
                self.modulation_order
            )));
        }
        for (name, r) in [("rho_tx", self.rho_tx), ("rho_rx", self.rho_rx)] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!("{name} = {r} outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// `rho = M / N`
    pub fn loading_factor(&self) -> f64 {
        self.tx_antennas as f64 / self.rx_antennas as f64
    }

    /// Real-domain alphabet size `K = sqrt(K_c)`.
    pub fn alphabet_size(&self) -> usize {
        (self.modulation_order as f64).sqrt().round() as usize
    }

    pub fn alphabet(&self) -> Result<PamAlphabet> {
        self.validate()?;
        PamAlphabet::new(self.alphabet_size())
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation_order.trailing_zeros() as usize
    }

    pub fn bits_per_vector(&self) -> usize {
        self.tx_antennas * self.bits_per_symbol()
    }

    /// Number of real symbol nodes, `2M`.
    pub fn real_tx(&self) -> usize {
        2 * self.tx_antennas
    }

    /// Number of real observation nodes, `2N`.
    pub fn real_rx(&self) -> usize {
        2 * self.rx_antennas
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let cfg = SystemConfig::new(8, 32, 16);
        assert_eq!(cfg.loading_factor(), 0.25);
        assert_eq!(cfg.alphabet_size(), 4);
        assert_eq!(cfg.bits_per_symbol(), 4);
        assert_eq!(cfg.bits_per_vector(), 32);
        assert_eq!((cfg.real_tx(), cfg.real_rx()), (16, 64));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SystemConfig::new(0, 4, 16).validate().is_err());
        assert!(SystemConfig::new(2, 4, 8).validate().is_err());
        assert!(SystemConfig::new(2, 4, 16).with_correlation(1.0, 0.0).validate().is_err());
        assert!(SystemConfig::new(2, 4, 4).validate().is_ok());
        assert!(SystemConfig::new(2, 4, 64).validate().is_ok());
    }
}
