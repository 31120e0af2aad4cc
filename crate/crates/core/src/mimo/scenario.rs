use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::{snr_to_sigma2, ChannelInstance, ChannelModel};
use super::SystemConfig;
use crate::error::{Error, Result};

/// Channel condition of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelScenario {
    #[default]
    Iid,
    RxCorrelated { r: f64 },
    TxCorrelated { r: f64 },
    RxtxCorrelated { r: f64 },
    /// `H = I`; needs `M == N`. With `M = N = 1` this is the scalar AWGN
    /// channel.
    Awgn,
}

impl ChannelScenario {
    /// `cfg` with this scenario's correlation coefficients.
    pub fn apply(&self, cfg: SystemConfig) -> SystemConfig {
        match *self {
            ChannelScenario::Iid | ChannelScenario::Awgn => cfg.with_correlation(0.0, 0.0),
            ChannelScenario::RxCorrelated { r } => cfg.with_correlation(0.0, r),
            ChannelScenario::TxCorrelated { r } => cfg.with_correlation(r, 0.0),
            ChannelScenario::RxtxCorrelated { r } => cfg.with_correlation(r, r),
        }
    }
}

impl fmt::Display for ChannelScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelScenario::Iid => f.write_str("iid"),
            ChannelScenario::RxCorrelated { r } => write!(f, "rx-correlated({r})"),
            ChannelScenario::TxCorrelated { r } => write!(f, "tx-correlated({r})"),
            ChannelScenario::RxtxCorrelated { r } => write!(f, "rxtx-correlated({r})"),
            ChannelScenario::Awgn => f.write_str("awgn"),
        }
    }
}

/// Draws channels for one system under one scenario.
#[derive(Clone, Debug)]
pub struct ScenarioChannel {
    cfg: SystemConfig,
    // `None` for the fixed identity channel.
    model: Option<ChannelModel>,
}

impl ScenarioChannel {
    pub fn new(cfg: SystemConfig, scenario: ChannelScenario) -> Result<Self> {
        let cfg = scenario.apply(cfg);
        cfg.validate()?;
        let model = match scenario {
            ChannelScenario::Awgn => {
                if cfg.tx_antennas != cfg.rx_antennas {
                    return Err(Error::InvalidConfig(format!(
                        "awgn scenario needs M == N, got {}x{}",
                        cfg.tx_antennas, cfg.rx_antennas
                    )));
                }
                None
            }
            _ => Some(ChannelModel::new(cfg)?),
        };
        Ok(Self { cfg, model })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn generate<R: Rng + ?Sized>(&self, snr_db: f64, rng: &mut R) -> Result<ChannelInstance> {
        match &self.model {
            Some(model) => model.generate(snr_db, rng),
            None => {
                if !snr_db.is_finite() {
                    return Err(Error::InvalidConfig(format!("SNR must be finite, got {snr_db}")));
                }
                let h = DMatrix::<Complex64>::identity(self.cfg.rx_antennas, self.cfg.tx_antennas);
                Ok(ChannelInstance::from_matrix(h, snr_to_sigma2(&self.cfg, snr_db), snr_db))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn awgn_is_identity_and_needs_square() {
        let cfg = SystemConfig::new(1, 1, 16);
        let ch = ScenarioChannel::new(cfg, ChannelScenario::Awgn).unwrap();
        let inst = ch.generate(10.0, &mut stream(1, &[])).unwrap();
        assert_eq!(inst.h[(0, 0)], Complex64::new(1.0, 0.0));
        assert!((inst.sigma2 - 0.1).abs() < 1e-15);
        assert!(ScenarioChannel::new(SystemConfig::new(1, 2, 16), ChannelScenario::Awgn).is_err());
    }

    #[test]
    fn scenario_sets_correlation() {
        let cfg = SystemConfig::new(8, 32, 16);
        let c = ChannelScenario::TxCorrelated { r: 0.3 }.apply(cfg);
        assert_eq!((c.rho_tx, c.rho_rx), (0.3, 0.0));
        let c = ChannelScenario::RxtxCorrelated { r: 0.3 }.apply(cfg);
        assert_eq!((c.rho_tx, c.rho_rx), (0.3, 0.3));
        assert_eq!(ChannelScenario::RxCorrelated { r: 0.3 }.to_string(), "rx-correlated(0.3)");
    }

    #[test]
    fn scenario_toml() {
        #[derive(Deserialize)]
        struct W {
            channel: ChannelScenario,
        }
        let w: W = toml::from_str("channel = { kind = \"tx-correlated\", r = 0.3 }").unwrap();
        assert_eq!(w.channel, ChannelScenario::TxCorrelated { r: 0.3 });
        let w: W = toml::from_str("channel = { kind = \"iid\" }").unwrap();
        assert_eq!(w.channel, ChannelScenario::Iid);
    }
}
