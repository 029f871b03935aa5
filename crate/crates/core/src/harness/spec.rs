//! Experiment description files.
//!
//! ```toml
//! seed = 7
//! jobs = 2
//!
//! [dataset]
//! source = "synth"        # or a dataset path (directory, .csv manifest, .idx)
//! per_class = 300
//!
//! [split]
//! train = 0.6667
//! test = 0.3333
//!
//! [[feature]]
//! name = "cp"
//! params = "kh=4,kv=4"
//!
//! [knn]
//! k = [3, 5, 7]
//!
//! [[pnn.subrange]]
//! label = "0-1"
//! values = [0.25, 0.5]
//!
//! [[fbpn.subrange]]
//! label = "21-30"
//! values = [25, 30]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SynthConfig;
use crate::classifiers::FbpnConfig;
use crate::error::{Error, Result};
use crate::features::FeatureKind;
use crate::image::Polarity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; does not affect results.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// Side length images are normalized to.
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default)]
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default, rename = "feature")]
    pub features: Vec<FeatureSpec>,
    #[serde(default)]
    pub knn: Option<KnnSpec>,
    #[serde(default)]
    pub pnn: Option<PnnSpec>,
    #[serde(default)]
    pub fbpn: Option<FbpnSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSpec {
    pub source: String,
    pub per_class: usize,
    pub rotation: f64,
    pub shear: f64,
    pub noise: f64,
    pub morph: u32,
    /// Template directory for synthetic data; the bundled glyphs when absent.
    pub templates: Option<String>,
    pub threshold: u8,
    pub polarity: String,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        let s = SynthConfig::default();
        Self {
            source: "synth".into(),
            per_class: s.per_class,
            rotation: s.max_rotation_deg,
            shear: s.max_shear,
            noise: s.noise,
            morph: s.morph_steps,
            templates: None,
            threshold: 128,
            polarity: "dark".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub test: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.6667,
            test: 0.3333,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(default)]
    pub params: String,
    #[serde(default = "yes")]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnSpec {
    pub k: Vec<usize>,
    #[serde(default = "yes")]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subrange<T> {
    pub label: String,
    pub values: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PnnSpec {
    pub subrange: Vec<Subrange<f64>>,
    #[serde(default = "yes")]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbpnSpec {
    pub subrange: Vec<Subrange<usize>>,
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "FbpnSpec::default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "FbpnSpec::default_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "FbpnSpec::default_validation_fraction")]
    pub validation_fraction: f64,
    #[serde(default = "FbpnSpec::default_patience")]
    pub patience: usize,
}

impl FbpnSpec {
    fn default_learning_rate() -> f64 {
        FbpnConfig::default().learning_rate
    }
    fn default_max_epochs() -> usize {
        FbpnConfig::default().max_epochs
    }
    fn default_validation_fraction() -> f64 {
        FbpnConfig::default().validation_fraction
    }
    fn default_patience() -> usize {
        FbpnConfig::default().patience
    }

    /// Training configuration for one hidden-layer width.
    pub fn config(&self, hidden: usize, seed: u64) -> FbpnConfig {
        FbpnConfig {
            hidden,
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            validation_fraction: self.validation_fraction,
            patience: self.patience,
            seed,
        }
    }
}

fn default_seed() -> u64 {
    1
}
fn default_jobs() -> usize {
    1
}
fn default_size() -> usize {
    16
}
fn yes() -> bool {
    true
}

impl ExperimentSpec {
    /// The full feature by classifier grid: eight feature rows and three
    /// subranges for each classifier.
    pub fn full_grid() -> Self {
        let feature = |name: &str, params: &str| FeatureSpec {
            name: name.into(),
            params: params.into(),
            enabled: true,
        };
        let sub = |label: &str, values: Vec<f64>| Subrange {
            label: label.into(),
            values,
        };
        let hid = |label: &str, values: Vec<usize>| Subrange {
            label: label.into(),
            values,
        };
        let fb = FbpnConfig::default();
        Self {
            seed: 1,
            jobs: 1,
            size: 16,
            dataset: DatasetSpec::default(),
            split: SplitSpec::default(),
            features: vec![
                feature("cp", "kh=4,kv=0"),
                feature("cp", "kh=8,kv=0"),
                feature("cp", "kh=4,kv=4"),
                feature("crossings", ""),
                feature("fourier", ""),
                feature("moments", ""),
                feature("hist", ""),
                feature("zoning", "rows=4,cols=4"),
            ],
            knn: Some(KnnSpec {
                k: vec![3, 5, 7],
                enabled: true,
            }),
            pnn: Some(PnnSpec {
                subrange: vec![
                    sub("0-1", vec![0.25, 0.5, 0.75, 1.0]),
                    sub("1-2", vec![1.25, 1.5, 2.0]),
                    sub("2-inf", vec![3.0, 5.0, 9.0, 30.0, 100.0, 900.0]),
                ],
                enabled: true,
            }),
            fbpn: Some(FbpnSpec {
                subrange: vec![hid("21-30", vec![25, 30]), hid("31-40", vec![35, 40]), hid("41-50", vec![45, 50])],
                enabled: true,
                learning_rate: fb.learning_rate,
                max_epochs: fb.max_epochs,
                validation_fraction: fb.validation_fraction,
                patience: fb.patience,
            }),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Spec(m));
        if !(self.split.train > 0.0 && self.split.test > 0.0 && self.split.train + self.split.test <= 1.0 + 1e-9) {
            return bad(format!(
                "split fractions {}/{} must be positive and sum to at most 1",
                self.split.train, self.split.test
            ));
        }
        if self.size == 0 {
            return bad("size must be positive".into());
        }
        let features = self.enabled_features()?;
        if features.is_empty() {
            return bad("no feature enabled".into());
        }
        for f in &features {
            f.output_len(self.size, self.size)?;
        }
        let mut any = false;
        if let Some(knn) = self.knn.as_ref().filter(|k| k.enabled) {
            if knn.k.contains(&0) {
                return bad("knn k must be at least 1".into());
            }
            any |= !knn.k.is_empty();
        }
        if let Some(pnn) = self.pnn.as_ref().filter(|p| p.enabled) {
            for s in &pnn.subrange {
                if s.values.is_empty() || s.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad(format!("pnn subrange `{}` needs positive spreads", s.label));
                }
            }
            any |= !pnn.subrange.is_empty();
        }
        if let Some(fbpn) = self.fbpn.as_ref().filter(|f| f.enabled) {
            for s in &fbpn.subrange {
                if s.values.is_empty() || s.values.contains(&0) {
                    return bad(format!("fbpn subrange `{}` needs positive hidden counts", s.label));
                }
            }
            if !(0.0..=0.5).contains(&fbpn.validation_fraction) || !(fbpn.learning_rate > 0.0) {
                return bad("fbpn needs validation_fraction in [0, 0.5] and a positive learning rate".into());
            }
            any |= !fbpn.subrange.is_empty();
        }
        if !any {
            return bad("no classifier enabled".into());
        }
        self.synth_config()?.validate()?;
        self.polarity()?;
        Ok(())
    }

    pub fn enabled_features(&self) -> Result<Vec<FeatureKind>> {
        self.features
            .iter()
            .filter(|f| f.enabled)
            .map(|f| FeatureKind::parse(&f.name, &f.params))
            .collect()
    }

    pub fn polarity(&self) -> Result<Polarity> {
        match self.dataset.polarity.as_str() {
            "dark" => Ok(Polarity::DarkForeground),
            "light" => Ok(Polarity::LightForeground),
            other => Err(Error::Spec(format!("polarity must be `dark` or `light`, got `{other}`"))),
        }
    }

    pub fn is_synthetic(&self) -> bool {
        self.dataset.source == "synth"
    }

    /// Dataset path, resolved against `base` when relative.
    pub fn dataset_path(&self, base: &Path) -> PathBuf {
        base.join(&self.dataset.source)
    }

    pub fn synth_config(&self) -> Result<SynthConfig> {
        Ok(SynthConfig {
            seed: self.seed,
            per_class: self.dataset.per_class,
            max_rotation_deg: self.dataset.rotation,
            max_shear: self.dataset.shear,
            noise: self.dataset.noise,
            morph_steps: self.dataset.morph,
            size: self.size,
        })
    }

    /// Seed of the train/test split.
    pub fn split_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    /// Hex digest identifying everything that influences results; the
    /// worker count is excluded.
    pub fn hash(&self) -> String {
        let canonical = Self { jobs: 0, ..self.clone() };
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 3
[dataset]
per_class = 20
[[feature]]
name = "cp"
params = "kh=4,kv=4"
[knn]
k = [3]
"#;

    #[test]
    fn minimal_spec_parses_with_defaults() {
        let spec = ExperimentSpec::parse(MINIMAL).unwrap();
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.jobs, 1);
        assert_eq!(spec.dataset.per_class, 20);
        assert_eq!(spec.dataset.rotation, 15.0);
        assert_eq!(spec.split, SplitSpec::default());
        assert_eq!(spec.enabled_features().unwrap().len(), 1);
        assert!(spec.pnn.is_none());
    }

    #[test]
    fn full_grid_round_trips_through_toml() {
        let spec = ExperimentSpec::full_grid();
        spec.validate().unwrap();
        assert_eq!(ExperimentSpec::parse(&spec.to_toml()).unwrap(), spec);
        assert_eq!(spec.enabled_features().unwrap().len(), 8);
    }

    #[test]
    fn hash_ignores_jobs_only() {
        let spec = ExperimentSpec::full_grid();
        let h = spec.hash();
        assert_eq!(h.len(), 16);
        assert_eq!(ExperimentSpec { jobs: 8, ..spec.clone() }.hash(), h);
        assert_ne!(ExperimentSpec { seed: 2, ..spec }.hash(), h);
    }

    #[test]
    fn invalid_specs() {
        let err = |t: &str| matches!(ExperimentSpec::parse(t), Err(Error::Spec(_)) | Err(Error::UnknownFeature(_)) | Err(Error::BadParams { .. }));
        assert!(err("seed = \"x\""));
        assert!(err("bogus = 1"));
        assert!(err(&MINIMAL.replace("[knn]\nk = [3]", "")));
        assert!(err(&format!("{MINIMAL}\n[split]\ntrain = 0.7\ntest = 0.7\n")));
        assert!(err(&MINIMAL.replace("\"cp\"", "\"wavelet\"")));
        assert!(err(&MINIMAL.replace("k = [3]", "k = [0]")));
        assert!(err(&MINIMAL.replace("[knn]\nk = [3]", "[[pnn.subrange]]\nlabel = \"a\"\nvalues = [0.0]")));
    }
}
