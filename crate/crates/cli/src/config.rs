//! Experiment configuration: JSON schema, flag overrides, validation and
//! the provenance hash.
//!
//! A config file fully describes one experiment; command-line flags
//! override individual values and the provenance hash is computed from
//! the effective config after overrides, so every output row can be
//! traced to the exact inputs that produced it.

use std::path::{Path, PathBuf};

use baroclinic::model::{stability_check, FrictionRegime, ModelParams, OperatorVariant};
use baroclinic::sde::{IntegratorConfig, NoiseSpectrum};
use baroclinic::sphere::SphericalGrid;
use baroclinic::Scalar;
use serde::{Deserialize, Serialize};

use crate::error::Failure;

/// Viscosity grid and ensemble size for `sweep-nu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Strictly decreasing list of viscosities.
    pub nu_list: Vec<Scalar>,
    /// Independent trajectories per viscosity, merged into one estimate.
    pub ensemble: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            nu_list: vec![1e-1, 3e-2, 1e-2, 3e-3],
            ensemble: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Spectral truncation degree.
    pub l_max: usize,
    /// Grid rows; default sizes the grid for dealiased products.
    #[serde(default)]
    pub n_lat: Option<usize>,
    /// Grid columns; default as above.
    #[serde(default)]
    pub n_lon: Option<usize>,
    pub params: ModelParams<Scalar>,
    pub noise: NoiseSpectrum<Scalar>,
    pub integrator: IntegratorConfig<Scalar>,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Output directory; `--out` and then the current directory are the
    /// fallbacks.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Values from command-line flags that replace config-file fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub nu: Option<Scalar>,
    pub alpha: Option<Scalar>,
    pub variant: Option<OperatorVariant>,
    pub regime: Option<FrictionRegime>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("{} is not a valid config: {e}", path.display())))
    }

    /// Applies flag overrides. `--nu` pins both the single-run viscosity
    /// and the sweep grid to that one value.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), Failure> {
        if let Some(seed) = o.seed {
            self.integrator.seed = seed;
        }
        if let Some(nu) = o.nu {
            self.params.nu = nu;
            self.sweep.nu_list = vec![nu];
        }
        if let Some(alpha) = o.alpha {
            self.noise = self
                .noise
                .with_alpha(alpha)
                .map_err(|e| Failure::Config(e.to_string()))?;
        }
        if let Some(variant) = o.variant {
            self.params.variant = variant;
        }
        if let Some(regime) = o.regime {
            self.params.regime = regime;
        }
        if let Some(out) = &o.out {
            self.output = Some(out.clone());
        }
        Ok(())
    }

    /// First violated constraint, if any. Runs before any simulation.
    pub fn validate(&self) -> Result<(), Failure> {
        let fail = |msg: String| Err(Failure::Config(msg));
        if self.l_max < 1 {
            return fail("l_max must be at least 1".into());
        }
        if !(self.params.nu > 0.0) || !self.params.nu.is_finite() {
            return fail(format!(
                "nu = {} must be positive and finite",
                self.params.nu
            ));
        }
        if self.params.gamma < 0.0 {
            return fail(format!("gamma = {} must be nonnegative", self.params.gamma));
        }
        let stab = stability_check(&self.params);
        if !stab.le {
            return fail(format!(
                "k0 = {} exceeds the dissipativity threshold {} for variant {:?}",
                stab.k0, stab.threshold, self.params.variant
            ));
        }
        if self.noise.max_degree() > self.l_max {
            return fail(format!(
                "noise drives degree {} beyond the truncation l_max = {}",
                self.noise.max_degree(),
                self.l_max
            ));
        }
        self.integrator
            .validate()
            .map_err(|e| Failure::Config(e.to_string()))?;
        if self.sweep.nu_list.is_empty() {
            return fail("sweep.nu_list must not be empty".into());
        }
        for &nu in &self.sweep.nu_list {
            if !(nu > 0.0) || !nu.is_finite() {
                return fail(format!("sweep viscosity {nu} must be positive and finite"));
            }
        }
        for pair in self.sweep.nu_list.windows(2) {
            if !(pair[1] < pair[0]) {
                return fail(format!(
                    "sweep.nu_list must be strictly decreasing ({} then {})",
                    pair[0], pair[1]
                ));
            }
        }
        if self.sweep.ensemble == 0 {
            return fail("sweep.ensemble must be at least 1".into());
        }
        // Explicit grid sizes must support dealiased products; the
        // default sizes do by construction.
        if self.n_lat.is_some() || self.n_lon.is_some() {
            self.grid().map(|_| ())?;
        }
        Ok(())
    }

    /// The transform grid for this config: explicit sizes when given
    /// (checked for dealiasing capacity), otherwise the standard
    /// dealiased sizes for `l_max`.
    pub fn grid(&self) -> Result<SphericalGrid<Scalar>, Failure> {
        match (self.n_lat, self.n_lon) {
            (None, None) => Ok(SphericalGrid::dealiased(self.l_max)),
            (lat, lon) => {
                let fallback = SphericalGrid::<Scalar>::dealiased(self.l_max);
                let n_lat = lat.unwrap_or_else(|| fallback.n_lat());
                let n_lon = lon.unwrap_or_else(|| fallback.n_lon());
                let grid = SphericalGrid::new(self.l_max, n_lat, n_lon)
                    .map_err(|e| Failure::Config(e.to_string()))?;
                grid.check_dealias(self.l_max)
                    .map_err(|e| Failure::Config(e.to_string()))?;
                Ok(grid)
            }
        }
    }

    /// FNV-1a hash of the canonical JSON serialization, as fixed-width
    /// hex. Identifies the effective config in every output row.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", fnv1a_64(canonical.as_bytes()))
    }

    /// Output directory after defaults: config file value, else `.`.
    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// The identification fields attached to every emitted row.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub config: String,
    pub version: String,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Self {
            seed: cfg.integrator.seed,
            config: cfg.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            l_max: 5,
            n_lat: None,
            n_lon: None,
            params: ModelParams::new(0.1),
            noise: NoiseSpectrum::low_modes(2, 1.0, 0.5),
            integrator: IntegratorConfig {
                dt: 0.01,
                t_end: 1.0,
                seed: 7,
                stream: 0,
                burn_in: 0.2,
                sample_every: 2,
                blowup_norm: 1e6,
            },
            sweep: SweepConfig::default(),
            output: None,
        }
    }

    #[test]
    fn valid_config_passes_and_hashes_stably() {
        let cfg = small_config();
        cfg.validate().unwrap();
        assert_eq!(cfg.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 16);
        let mut other = cfg.clone();
        other.integrator.seed = 8;
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn fnv_matches_reference_vectors() {
        // Standard FNV-1a test values.
        assert_eq!(fnv1a_64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a_64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a_64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn validation_names_the_violated_constraint() {
        let mut cfg = small_config();
        cfg.params.k0 = 100.0;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("threshold"), "{err}");

        let mut cfg = small_config();
        cfg.noise = NoiseSpectrum::low_modes(6, 1.0, 0.5);
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("beyond the truncation"), "{err}");

        let mut cfg = small_config();
        cfg.integrator.dt = -1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = small_config();
        cfg.sweep.nu_list = vec![0.01, 0.1];
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("strictly decreasing"), "{err}");

        let mut cfg = small_config();
        cfg.n_lat = Some(4);
        let err = cfg.validate().unwrap_err().to_string();
        assert!(
            err.contains("dealias") || err.contains("transform"),
            "{err}"
        );
    }

    #[test]
    fn overrides_replace_fields_and_revalidate_alpha() {
        let mut cfg = small_config();
        cfg.apply(&Overrides {
            seed: Some(99),
            nu: Some(0.05),
            alpha: Some(0.75),
            variant: Some(OperatorVariant::A3Hat),
            regime: Some(FrictionRegime::Fixed),
            out: Some(PathBuf::from("elsewhere")),
        })
        .unwrap();
        assert_eq!(cfg.integrator.seed, 99);
        assert_eq!(cfg.params.nu, 0.05);
        assert_eq!(cfg.sweep.nu_list, vec![0.05]);
        assert_eq!(cfg.noise.alpha(), 0.75);
        assert_eq!(cfg.params.variant, OperatorVariant::A3Hat);
        assert_eq!(cfg.params.regime, FrictionRegime::Fixed);
        assert_eq!(cfg.output_dir(), PathBuf::from("elsewhere"));
        let bad = cfg.apply(&Overrides {
            alpha: Some(f64::NAN),
            ..Default::default()
        });
        assert!(bad.is_err());
    }

    #[test]
    fn json_round_trip_preserves_config() {
        let cfg = small_config();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        // Unknown keys are config errors, not silent drops.
        let with_extra = text.replace("\"l_max\"", "\"unknown_key\": 1, \"l_max\"");
        assert!(serde_json::from_str::<ExperimentConfig>(&with_extra).is_err());
    }

    #[test]
    fn default_grid_supports_dealiasing() {
        let cfg = small_config();
        let grid = cfg.grid().unwrap();
        grid.check_dealias(cfg.l_max).unwrap();
    }
}
