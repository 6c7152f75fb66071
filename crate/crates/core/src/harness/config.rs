//! Experiment configuration, its TOML form, digests and per-trial seeds.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::linops::BasisId;
use crate::reweight::ReweightParams;
use crate::sensing::{SensingKind, DEFAULT_VD_DECAY};
use crate::solvers::SolverParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "SARA")]
    Sara,
    /// SARA stopped after the unweighted solve.
    #[serde(rename = "BPSA")]
    Bpsa,
    /// Unweighted analysis over the single Db8 basis.
    #[serde(rename = "BPDb8")]
    BpDb8,
    /// Reweighted analysis over the single Db8 basis.
    #[serde(rename = "RW-BPDb8")]
    RwBpDb8,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Sara, Algorithm::Bpsa, Algorithm::BpDb8, Algorithm::RwBpDb8];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sara => "SARA",
            Algorithm::Bpsa => "BPSA",
            Algorithm::BpDb8 => "BPDb8",
            Algorithm::RwBpDb8 => "RW-BPDb8",
        }
    }

    pub fn single_basis(self) -> bool {
        matches!(self, Algorithm::BpDb8 | Algorithm::RwBpDb8)
    }

    pub fn reweighted(self) -> bool {
        matches!(self, Algorithm::Sara | Algorithm::RwBpDb8)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                invalid(format!(
                    "unknown algorithm {s:?} (expected SARA, BPSA, BPDb8 or RW-BPDb8)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DictionarySpec {
    pub bases: Vec<BasisId>,
    pub depth: usize,
}

impl Default for DictionarySpec {
    fn default() -> Self {
        DictionarySpec {
            bases: BasisId::daubechies_family(8).expect("8 is a valid order"),
            depth: 4,
        }
    }
}

/// Whether the sensing operator is redrawn for every trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    PerTrial,
    /// One operator, drawn from the master seed, shared by all trials.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingSpec {
    pub kind: SensingKind,
    /// M / N.
    pub ratio: f64,
    pub seed_policy: SeedPolicy,
    /// Density decay of variable-density Fourier sampling.
    pub decay: f64,
}

impl Default for SensingSpec {
    fn default() -> Self {
        SensingSpec {
            kind: SensingKind::SpreadSpectrum,
            ratio: 0.3,
            seed_policy: SeedPolicy::PerTrial,
            decay: DEFAULT_VD_DECAY,
        }
    }
}

/// A complete, serializable description of one experiment.
///
/// `image` is a file path or `builtin:<name>` (see [`super::builtin_image`]).
/// `solver.epsilon` is ignored: the radius always comes from the noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub image: String,
    pub algorithm: Algorithm,
    pub isnr_db: f64,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub dictionary: DictionarySpec,
    pub sensing: SensingSpec,
    pub solver: SolverParams,
    pub reweight: ReweightParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            image: "builtin:natural128".into(),
            algorithm: Algorithm::Sara,
            isnr_db: 30.0,
            trials: 30,
            master_seed: 1,
            output_dir: None,
            dictionary: DictionarySpec::default(),
            sensing: SensingSpec::default(),
            solver: SolverParams::default(),
            reweight: ReweightParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_base()?;
        if self.algorithm.single_basis() && self.dictionary.bases.len() != 1 {
            return Err(invalid(format!(
                "{} uses a single basis, but the dictionary lists {}",
                self.algorithm,
                self.dictionary.bases.len()
            )));
        }
        Ok(())
    }

    /// Everything except the algorithm/dictionary consistency rule, which
    /// [`ExperimentConfig::for_algorithm`] establishes.
    pub fn validate_base(&self) -> Result<()> {
        if !(self.sensing.ratio > 0.0 && self.sensing.ratio <= 1.0) {
            return Err(invalid(format!(
                "sensing ratio must lie in (0, 1], got {}",
                self.sensing.ratio
            )));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if !self.isnr_db.is_finite() {
            return Err(invalid("isnr_db must be finite"));
        }
        if !(self.sensing.decay >= 0.0 && self.sensing.decay.is_finite()) {
            return Err(invalid(format!(
                "decay must be finite and >= 0, got {}",
                self.sensing.decay
            )));
        }
        if self.dictionary.bases.is_empty() {
            return Err(invalid("dictionary needs at least one basis"));
        }
        if self.image.is_empty() {
            return Err(invalid("no image given"));
        }
        self.solver.validate()?;
        self.reweight.validate()
    }

    /// The configuration actually run for `algo`: single-basis algorithms
    /// fall back to Db8 when the dictionary is redundant, and the
    /// non-reweighted ones stop after one solve.
    pub fn for_algorithm(&self, algo: Algorithm) -> ExperimentConfig {
        let mut cfg = self.clone();
        cfg.algorithm = algo;
        if algo.single_basis() && cfg.dictionary.bases.len() != 1 {
            cfg.dictionary.bases = vec![BasisId::Daubechies(8)];
        }
        cfg
    }

    /// Reweighting parameters implied by the algorithm.
    pub fn effective_reweight(&self) -> ReweightParams {
        let mut rw = self.reweight;
        if !self.algorithm.reweighted() {
            rw.n_max = 1;
        }
        rw
    }

    /// Hex SHA-256 of the canonical TOML of everything that affects results
    /// (the output directory is left out).
    pub fn digest(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = None;
        let hash = Sha256::digest(canon.to_toml().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn hash_u64(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("32-byte digest"))
}

/// Stable seed of one trial. `sweep_value` is `None` outside sweeps.
pub fn trial_seed(master_seed: u64, trial_index: usize, sweep_value: Option<f64>) -> u64 {
    let value = sweep_value.map(|v| v.to_bits().to_le_bytes());
    hash_u64(&[
        b"trial",
        &master_seed.to_le_bytes(),
        &(trial_index as u64).to_le_bytes(),
        value.as_ref().map_or(&[][..], |v| &v[..]),
    ])
}

/// Independent stream derived from a trial seed, e.g. `"operator"` or `"noise"`.
pub fn sub_seed(seed: u64, purpose: &str) -> u64 {
    hash_u64(&[b"sub", &seed.to_le_bytes(), purpose.as_bytes()])
}
