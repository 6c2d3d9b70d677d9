//! Flat `key = value` run configuration.
//!
//! Every key is optional except `seed`; unset keys fall back to the
//! scenario's defaults. Scalars are TOML scalars and grids are TOML arrays:
//!
//! ```text
//! seed = 7
//! charger_len = 8
//! battery_counts = [2, 3, 4]
//! h_values = [0.05, 0.5, 1.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<String>,
    /// Fixed charger length `L`.
    pub charger_len: Option<usize>,
    /// `L + n_b` for layouts that trade charger sites for battery qubits.
    pub total_sites: Option<usize>,
    pub battery_counts: Option<Vec<usize>>,
    pub j: Option<f64>,
    pub h: Option<f64>,
    pub kappa: Option<f64>,
    pub delta: Option<f64>,
    pub tau: Option<f64>,
    pub taus: Option<Vec<f64>>,
    pub kicks: Option<usize>,
    pub horizon: Option<usize>,
    pub disorder_width: Option<f64>,
    pub realizations: Option<usize>,
    pub h_values: Option<Vec<f64>>,
    pub kappa_values: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical text form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_text()?.as_bytes())))
    }

    pub fn master_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("a master seed is required (`seed = N` or --seed)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_flat_keys() {
        let c = ExperimentConfig::parse("seed = 3\nbattery_counts = [1, 2]\ntau = 0.5\n").unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.battery_counts, Some(vec![1, 2]));
        assert_eq!(c.tau, Some(0.5));
        assert!(c.kappa.is_none());
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(ExperimentConfig::parse("sed = 3"), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("seed = \"x\""), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("[table]\nseed = 1"), Err(Error::Config(_))));
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(ExperimentConfig::default().master_seed().is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(
            seed in any::<u32>(),
            tau in 0.01f64..3.0,
            counts in prop::collection::vec(1usize..7, 0..6),
            hs in prop::collection::vec(-5.0f64..5.0, 0..8),
            width in prop::option::of(0.0f64..0.9),
        ) {
            let c = ExperimentConfig {
                scenario: Some("dynamics".into()),
                seed: Some(seed as u64),
                tau: Some(tau),
                battery_counts: Some(counts),
                h_values: Some(hs),
                disorder_width: width,
                ..Default::default()
            };
            let back = ExperimentConfig::parse(&c.to_text().unwrap()).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.hash().unwrap(), c.hash().unwrap());
        }
    }
}
