//! Trials, parameter sweeps and the MRI demonstration.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{sub_seed, trial_seed, Algorithm, ExperimentConfig, SeedPolicy};
use super::image_io::{load_image, quantize, save_image};
use super::phantoms;
use crate::error::{invalid, Error, Result};
use crate::linops::{BasisId, Dictionary, Image};
use crate::metrics::{realized_isnr, snr, summarize, TrialRecord};
use crate::reweight::{sara_reconstruct, ReweightState};
use crate::sensing::{
    build_gaussian, build_spread_spectrum, build_vdfourier, calibrate_noise, simulate_measurements, Measurements,
    SensingKind, SensingOperator,
};

/// Names accepted after `builtin:` in [`ExperimentConfig::image`].
pub const BUILTIN_IMAGES: [&str; 6] = ["natural256", "natural128", "natural64", "brain", "brain112", "brain64"];

fn quantized(img: Image) -> Image {
    let bytes = quantize(&img).expect("phantoms are finite");
    Image::new(img.width(), img.height(), bytes.into_iter().map(f64::from).collect()).expect("finite")
}

/// The shipped test images, quantized to 8 bits exactly as stored under `data/`.
pub fn builtin_image(name: &str) -> Result<Image> {
    let natural128 = || -> Result<Image> { Ok(quantized(quantized(phantoms::natural_256()).downsample(2)?)) };
    match name {
        "natural256" => Ok(quantized(phantoms::natural_256())),
        "natural128" => natural128(),
        "natural64" => natural128()?.crop(32, 32, 64, 64),
        "brain" => Ok(quantized(phantoms::brain_phantom(224, 168))),
        "brain112" => Ok(quantized(quantized(phantoms::brain_phantom(224, 168)).downsample(2)?)),
        "brain64" => Ok(quantized(phantoms::brain_phantom(64, 48))),
        other => Err(invalid(format!(
            "unknown builtin image {other:?} (available: {})",
            BUILTIN_IMAGES.join(", ")
        ))),
    }
}

/// Loads `builtin:<name>` or an image file.
pub fn resolve_image(spec: &str) -> Result<Image> {
    match spec.strip_prefix("builtin:") {
        Some(name) => builtin_image(name),
        None => load_image(Path::new(spec)),
    }
}

pub fn num_measurements(ratio: f64, n: usize) -> usize {
    ((ratio * n as f64).floor() as usize).clamp(1, n)
}

fn build_operator(cfg: &ExperimentConfig, width: usize, height: usize, m: usize, seed: u64) -> Result<SensingOperator> {
    match cfg.sensing.kind {
        SensingKind::SpreadSpectrum => build_spread_spectrum(width, height, m, seed),
        SensingKind::Gaussian => build_gaussian(width, height, m, seed),
        SensingKind::VdFourier => build_vdfourier(width, height, m, seed, cfg.sensing.decay),
    }
}

/// One reconstruction with everything needed for outputs.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub algorithm: Algorithm,
    pub record: TrialRecord,
    pub x_hat: Image,
    pub state: ReweightState,
    pub config: ExperimentConfig,
}

struct Simulation {
    seed: u64,
    op: SensingOperator,
    meas: Measurements,
}

fn simulate(
    cfg: &ExperimentConfig,
    image: &Image,
    m: usize,
    trial_index: usize,
    sweep_value: Option<f64>,
) -> Result<Simulation> {
    let seed = trial_seed(cfg.master_seed, trial_index, sweep_value);
    let op_seed = match cfg.sensing.seed_policy {
        SeedPolicy::PerTrial => sub_seed(seed, "operator"),
        SeedPolicy::Fixed => sub_seed(cfg.master_seed, "operator"),
    };
    let op = build_operator(cfg, image.width(), image.height(), m, op_seed)?;
    // The noise level does not depend on the dictionary size.
    let noise = calibrate_noise(&op.apply_real(image.pixels()), cfg.isnr_db, 1)?;
    let meas = simulate_measurements(image, &op, &noise, sub_seed(seed, "noise"))?;
    Ok(Simulation { seed, op, meas })
}

/// Reconstructs from `sim` with `cfg` (already specialized to its algorithm)
/// and scores the result against `truth` after cropping to its size.
fn reconstruct(
    cfg: &ExperimentConfig,
    sim: &Simulation,
    padded: (usize, usize),
    truth: &Image,
) -> Result<TrialOutcome> {
    let start = Instant::now();
    let (w, h) = padded;
    let dict = Dictionary::new(&cfg.dictionary.bases, cfg.dictionary.depth, w, h)?;
    let noise = calibrate_noise(&sim.meas.clean, cfg.isnr_db, dict.coeff_len())?;
    let (x, state) = sara_reconstruct(
        &sim.meas.y,
        &sim.op,
        &dict,
        &noise,
        &cfg.effective_reweight(),
        &cfg.solver,
    )?;
    let mut x_hat = Image::new(w, h, x)?;
    if (w, h) != (truth.width(), truth.height()) {
        x_hat = x_hat.crop(0, 0, truth.width(), truth.height())?;
    }
    let record = TrialRecord {
        trial_seed: sim.seed,
        snr_db: snr(truth.pixels(), x_hat.pixels())?,
        realized_isnr_db: realized_isnr(&sim.meas.clean, &sim.meas.noise),
        iterations_total: state.total_inner_iterations(),
        wall_time_s: start.elapsed().as_secs_f64(),
        config_digest: cfg.digest(),
    };
    Ok(TrialOutcome {
        algorithm: cfg.algorithm,
        record,
        x_hat,
        state,
        config: cfg.clone(),
    })
}

/// Runs several algorithms on one shared draw of operator and noise.
/// The outer error covers the shared simulation; each algorithm may fail on
/// its own.
pub fn run_paired_trial(
    cfg: &ExperimentConfig,
    image: &Image,
    algorithms: &[Algorithm],
    trial_index: usize,
    sweep_value: Option<f64>,
) -> Result<Vec<Result<TrialOutcome>>> {
    cfg.validate_base()?;
    let m = num_measurements(cfg.sensing.ratio, image.len());
    let dims = (image.width(), image.height());
    // Reject bad dictionaries before paying for an operator.
    Dictionary::new(&cfg.dictionary.bases, cfg.dictionary.depth, dims.0, dims.1)?;
    let sim = simulate(cfg, image, m, trial_index, sweep_value)?;
    Ok(algorithms
        .iter()
        .map(|&a| {
            let c = cfg.for_algorithm(a);
            c.validate()?;
            reconstruct(&c, &sim, dims, image)
        })
        .collect())
}

/// One trial of `cfg.algorithm`. Writes the reconstruction, telemetry and
/// config when `cfg.output_dir` is set.
pub fn run_trial(cfg: &ExperimentConfig, trial_index: usize) -> Result<TrialRecord> {
    cfg.validate()?;
    let image = resolve_image(&cfg.image)?;
    let outcome = run_paired_trial(cfg, &image, &[cfg.algorithm], trial_index, None)?
        .pop()
        .expect("one algorithm")?;
    if let Some(dir) = &cfg.output_dir {
        write_outputs(dir, &outcome, trial_index)?;
    }
    Ok(outcome.record)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `config_<digest>.toml`, so the digest in any CSV row can be resolved.
pub fn write_config(dir: &Path, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let configs = dir.join("configs");
    create_dir(&configs)?;
    let path = configs.join(format!("{}.toml", cfg.digest()));
    let mut canon = cfg.clone();
    canon.output_dir = None;
    std::fs::write(&path, canon.to_toml()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct TelemetryRow {
    t: usize,
    gamma: f64,
    rho: f64,
    objective: f64,
    residual_norm: f64,
    inner_iterations: usize,
    converged: bool,
}

pub fn write_telemetry(path: &Path, state: &ReweightState) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    for h in &state.history {
        w.serialize(TelemetryRow {
            t: h.t,
            gamma: h.gamma,
            rho: h.rho,
            objective: h.objective,
            residual_norm: h.residual_norm,
            inner_iterations: h.inner_iterations,
            converged: h.converged,
        })
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `<algo>_t<index>.pgm`, `<algo>_t<index>_telemetry.csv` and the config.
pub fn write_outputs(dir: &Path, outcome: &TrialOutcome, trial_index: usize) -> Result<()> {
    create_dir(dir)?;
    let stem = format!("{}_t{trial_index}", outcome.algorithm.name());
    save_image(&outcome.x_hat, &dir.join(format!("{stem}.pgm")))?;
    write_telemetry(&dir.join(format!("{stem}_telemetry.csv")), &outcome.state)?;
    write_config(dir, &outcome.config)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Undersampling,
    Isnr,
    NumBases,
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").to_ascii_lowercase().as_str() {
            "undersampling" | "ratio" => Ok(SweepVariable::Undersampling),
            "isnr" => Ok(SweepVariable::Isnr),
            "num_bases" | "bases" => Ok(SweepVariable::NumBases),
            other => Err(invalid(format!("unknown sweep variable {other:?}"))),
        }
    }
}

/// A one-dimensional parameter study. Every value is run with every
/// algorithm on shared measurements; `depths`, when non-empty, repeats the
/// sweep for each wavelet depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    #[serde(default)]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub depths: Vec<usize>,
    pub config: ExperimentConfig,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: SweepSpec = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn algorithms(&self) -> Vec<Algorithm> {
        if self.algorithms.is_empty() {
            vec![self.config.algorithm]
        } else {
            self.algorithms.clone()
        }
    }

    fn depths(&self) -> Vec<usize> {
        if self.depths.is_empty() {
            vec![self.config.dictionary.depth]
        } else {
            self.depths.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid("sweep needs at least one value"));
        }
        for &v in &self.values {
            let ok = match self.variable {
                SweepVariable::Undersampling => v > 0.0 && v <= 1.0,
                SweepVariable::Isnr => v.is_finite(),
                SweepVariable::NumBases => v.fract() == 0.0 && (1.0..=8.0).contains(&v),
            };
            if !ok {
                return Err(invalid(format!(
                    "sweep value {v} outside the domain of {:?}",
                    self.variable
                )));
            }
        }
        if self.variable == SweepVariable::NumBases {
            if let Some(a) = self.algorithms().into_iter().find(|a| a.single_basis()) {
                return Err(invalid(format!("{a} cannot be swept over the number of bases")));
            }
        }
        if self.depths().contains(&0) {
            return Err(invalid("wavelet depth must be at least 1"));
        }
        self.config.validate_base()?;
        for v in &self.values {
            for a in self.algorithms() {
                self.config_for(*v, self.config.dictionary.depth)?
                    .for_algorithm(a)
                    .validate()?;
            }
        }
        Ok(())
    }

    /// The shared configuration of one sweep point, before specializing to an
    /// algorithm.
    pub fn config_for(&self, value: f64, depth: usize) -> Result<ExperimentConfig> {
        let mut cfg = self.config.clone();
        cfg.dictionary.depth = depth;
        match self.variable {
            SweepVariable::Undersampling => cfg.sensing.ratio = value,
            SweepVariable::Isnr => cfg.isnr_db = value,
            SweepVariable::NumBases => cfg.dictionary.bases = BasisId::daubechies_family(value as u8)?,
        }
        Ok(cfg)
    }
}

/// One CSV row; the column order is part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub algo: String,
    pub mean_snr_db: f64,
    pub std_snr_db: f64,
    /// Trials that completed.
    pub trials: usize,
    pub mean_iters: f64,
    pub mean_wall_s: f64,
    pub config_digest: String,
    pub error: String,
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "sweep_value",
    "algo",
    "mean_snr_db",
    "std_snr_db",
    "trials",
    "mean_iters",
    "mean_wall_s",
    "config_digest",
    "error",
];

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub csv_path: Option<PathBuf>,
}

fn row_from(value: f64, label: String, digest: String, results: Vec<Result<TrialRecord>>) -> SweepRow {
    let total = results.len();
    let mut ok = Vec::new();
    let mut first_error = None;
    for r in results {
        match r {
            Ok(rec) => ok.push(rec),
            Err(e) => {
                first_error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let error = first_error
        .map(|msg| format!("{} of {total} trials failed: {msg}", total - ok.len()))
        .unwrap_or_default();
    let snrs: Vec<f64> = ok.iter().map(|r| r.snr_db).collect();
    let iters: Vec<f64> = ok.iter().map(|r| r.iterations_total as f64).collect();
    let walls: Vec<f64> = ok.iter().map(|r| r.wall_time_s).collect();
    let mean = |v: &[f64]| summarize(v).map(|s| s.mean).unwrap_or(f64::NAN);
    SweepRow {
        sweep_value: value,
        algo: label,
        mean_snr_db: mean(&snrs),
        std_snr_db: summarize(&snrs).map(|s| s.std).unwrap_or(f64::NAN),
        trials: ok.len(),
        mean_iters: mean(&iters),
        mean_wall_s: mean(&walls),
        config_digest: digest,
        error,
    }
}

/// Runs every point of `spec`, trials in parallel, rows in sweep order.
/// With `config.output_dir` set, writes `sweep_<variable>.csv` and one
/// config file per row.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let image = resolve_image(&spec.config.image)?;
    let algorithms = spec.algorithms();
    let depths = spec.depths();
    let label = |a: Algorithm, depth: usize| {
        if depths.len() > 1 {
            format!("{a}@L{depth}")
        } else {
            a.name().to_string()
        }
    };
    let mut rows = Vec::new();
    for &depth in &depths {
        for &value in &spec.values {
            let cfg = spec.config_for(value, depth)?;
            let per_trial: Vec<Vec<Result<TrialRecord>>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| match run_paired_trial(&cfg, &image, &algorithms, t, Some(value)) {
                    Ok(outs) => outs.into_iter().map(|o| o.map(|o| o.record)).collect(),
                    Err(e) => {
                        let msg = e.to_string();
                        algorithms.iter().map(|_| Err(Error::Resource(msg.clone()))).collect()
                    }
                })
                .collect();
            for (i, &a) in algorithms.iter().enumerate() {
                let acfg = cfg.for_algorithm(a);
                let results = per_trial.iter().map(|r| clone_result(&r[i])).collect();
                rows.push(row_from(value, label(a, depth), acfg.digest(), results));
                if let Some(dir) = &spec.config.output_dir {
                    write_config(dir, &acfg)?;
                }
            }
        }
    }
    let csv_path = match &spec.config.output_dir {
        Some(dir) => {
            let name = match spec.variable {
                SweepVariable::Undersampling => "undersampling",
                SweepVariable::Isnr => "isnr",
                SweepVariable::NumBases => "num_bases",
            };
            let path = dir.join(format!("sweep_{name}.csv"));
            write_sweep_csv(&path, &rows)?;
            Some(path)
        }
        None => None,
    };
    Ok(SweepReport { rows, csv_path })
}

fn clone_result(r: &Result<TrialRecord>) -> Result<TrialRecord> {
    match r {
        Ok(rec) => Ok(rec.clone()),
        Err(e) => Err(Error::Resource(e.to_string())),
    }
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::io(path, e))?;
    }
    if rows.is_empty() {
        w.write_record(SWEEP_COLUMNS).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| Error::io(path, e))).collect()
}

/// The MRI setting: Db1-Db8 plus Dirac, variable-density Fourier at
/// `M = 0.05 N`, ISNR 30 dB, SARA. Fields not listed keep their values from
/// `base`.
pub fn mri_config(base: &ExperimentConfig) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.algorithm = Algorithm::Sara;
    cfg.dictionary.bases = BasisId::daubechies_family(8).expect("valid order");
    cfg.dictionary.bases.push(BasisId::Dirac);
    cfg.sensing.kind = SensingKind::VdFourier;
    cfg.sensing.ratio = 0.05;
    cfg.isnr_db = 30.0;
    cfg
}

#[derive(Debug, Clone)]
pub struct MriDemo {
    pub sara: TrialOutcome,
    /// Db8 reconstruction from the same measurements, when requested.
    pub baseline: Option<TrialOutcome>,
    pub measurements: usize,
    pub padded: (usize, usize),
}

/// Runs the MRI setting of `cfg` on its image. Images whose sides are not
/// multiples of `2^depth` are edge-padded for the reconstruction and cropped
/// back; `M` is computed from the unpadded size.
pub fn run_mri_demo(cfg: &ExperimentConfig, trial_index: usize, baseline: Option<Algorithm>) -> Result<MriDemo> {
    cfg.validate()?;
    let image = resolve_image(&cfg.image)?;
    let block = 1usize
        .checked_shl(cfg.dictionary.depth as u32)
        .filter(|&b| b <= image.width().max(image.height()))
        .ok_or_else(|| invalid(format!("depth {} too large for the image", cfg.dictionary.depth)))?;
    let pw = image.width().div_ceil(block) * block;
    let ph = image.height().div_ceil(block) * block;
    let padded = image.pad_edge(pw, ph)?;
    let m = num_measurements(cfg.sensing.ratio, image.len());
    let sim = simulate(cfg, &padded, m, trial_index, None)?;
    let sara = reconstruct(cfg, &sim, (pw, ph), &image)?;
    let baseline = match baseline {
        Some(a) => {
            let c = cfg.for_algorithm(a);
            c.validate()?;
            Some(reconstruct(&c, &sim, (pw, ph), &image)?)
        }
        None => None,
    };
    if let Some(dir) = &cfg.output_dir {
        write_outputs(dir, &sara, trial_index)?;
        if let Some(b) = &baseline {
            write_outputs(dir, b, trial_index)?;
        }
    }
    Ok(MriDemo {
        sara,
        baseline,
        measurements: m,
        padded: (pw, ph),
    })
}
