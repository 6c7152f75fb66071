use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sara::harness::config::Algorithm;
use sara::harness::experiment::{write_outputs, BUILTIN_IMAGES};
use sara::harness::{
    builtin_image, mri_config, resolve_image, run_mri_demo, run_paired_trial, run_selftest, run_sweep, save_image,
    ExperimentConfig, SweepSpec, SweepVariable,
};
use sara::linops::parse_basis_list;
use sara::sensing::SensingKind;
use sara::Result;

#[derive(Parser)]
#[command(
    name = "sara",
    version,
    about = "Sparsity averaging reweighted analysis for compressive imaging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct one image from simulated measurements.
    Reconstruct {
        #[command(flatten)]
        common: CommonArgs,
        /// Trial index used to derive the seeds.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Average SNR over trials while varying one parameter; writes a CSV.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep description file (TOML); flags override its base config.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// undersampling, isnr or num_bases.
        #[arg(long)]
        variable: Option<SweepVariable>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Comma-separated algorithms run on shared measurements.
        #[arg(long, value_delimiter = ',')]
        algos: Vec<Algorithm>,
        /// Comma-separated wavelet depths; the sweep is repeated for each.
        #[arg(long, value_delimiter = ',')]
        depths: Vec<usize>,
    },
    /// Brain-phantom reconstruction from variable-density Fourier samples.
    MriDemo {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Also reconstruct with this algorithm from the same measurements.
        #[arg(long)]
        baseline: Option<Algorithm>,
    },
    /// Check adjointness, perfect reconstruction and the Parseval identity.
    Selftest {
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Print every check, not only failures.
        #[arg(long)]
        verbose: bool,
    },
    /// Write the built-in test images as PGM files.
    Phantom {
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Base configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Image file or builtin:<name>.
    #[arg(long)]
    image: Option<String>,
    /// SARA, BPSA, BPDb8 or RW-BPDb8. Single-basis algorithms switch the dictionary to Db8 unless --bases is given.
    #[arg(long)]
    algo: Option<Algorithm>,
    /// Basis list such as "db1-db8,dirac".
    #[arg(long)]
    bases: Option<String>,
    /// Wavelet decomposition depth.
    #[arg(long)]
    depth: Option<usize>,
    /// spread_spectrum, gaussian or vd_fourier.
    #[arg(long)]
    sensing: Option<SensingKind>,
    /// Undersampling ratio M/N.
    #[arg(long)]
    ratio: Option<f64>,
    /// Density decay of variable-density sampling.
    #[arg(long)]
    decay: Option<f64>,
    /// Input SNR of the measurements in dB.
    #[arg(long)]
    isnr: Option<f64>,
    /// Number of trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Douglas-Rachford iterations per weighted solve.
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Douglas-Rachford step, relative to max |Psi^dagger Phi^dagger y|.
    #[arg(long)]
    dr_gamma: Option<f64>,
    #[arg(long)]
    dr_lambda: Option<f64>,
    /// Inner iterations of the analysis prox (redundant dictionaries).
    #[arg(long)]
    prox_iters: Option<usize>,
    /// Maximum number of weighted solves.
    #[arg(long)]
    n_max: Option<usize>,
    /// Decay factor of gamma between reweights.
    #[arg(long)]
    beta: Option<f64>,
    /// Stop reweighting once the relative change falls below this.
    #[arg(long)]
    eta: Option<f64>,
}

impl CommonArgs {
    fn apply(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            cfg = ExperimentConfig::load(path)?;
        }
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value.clone() {
                    $field = v;
                }
            };
        }
        set!(cfg.image, self.image);
        set!(cfg.dictionary.depth, self.depth);
        set!(cfg.sensing.kind, self.sensing);
        set!(cfg.sensing.ratio, self.ratio);
        set!(cfg.sensing.decay, self.decay);
        set!(cfg.isnr_db, self.isnr);
        set!(cfg.trials, self.trials);
        set!(cfg.master_seed, self.seed);
        set!(cfg.solver.max_iters, self.max_iters);
        set!(cfg.solver.rel_tol, self.rel_tol);
        set!(cfg.solver.dr_gamma, self.dr_gamma);
        set!(cfg.solver.dr_lambda, self.dr_lambda);
        set!(cfg.solver.prox_max_iters, self.prox_iters);
        set!(cfg.reweight.n_max, self.n_max);
        set!(cfg.reweight.beta, self.beta);
        set!(cfg.reweight.eta, self.eta);
        if let Some(b) = &self.bases {
            cfg.dictionary.bases = parse_basis_list(b)?;
        }
        if self.out.is_some() {
            cfg.output_dir = self.out.clone();
        }
        if let Some(a) = self.algo {
            cfg = if self.bases.is_some() {
                ExperimentConfig { algorithm: a, ..cfg }
            } else {
                cfg.for_algorithm(a)
            };
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Reconstruct { common, trial } => {
            let cfg = common.apply(ExperimentConfig::default())?;
            cfg.validate()?;
            let image = resolve_image(&cfg.image)?;
            let outcome = run_paired_trial(&cfg, &image, &[cfg.algorithm], trial, None)?
                .pop()
                .expect("one algorithm")?;
            for w in &outcome.state.warnings {
                eprintln!("warning: {w}");
            }
            let r = &outcome.record;
            println!(
                "{} snr_db={:.4} isnr_db={:.4} reweights={} iterations={} wall_s={:.2} digest={}",
                cfg.algorithm,
                r.snr_db,
                r.realized_isnr_db,
                outcome.state.t,
                r.iterations_total,
                r.wall_time_s,
                r.config_digest
            );
            if let Some(dir) = &cfg.output_dir {
                write_outputs(dir, &outcome, trial)?;
                println!("outputs written to {}", dir.display());
            }
        }
        Command::Sweep {
            common,
            spec,
            variable,
            values,
            algos,
            depths,
        } => {
            let mut sweep = match &spec {
                Some(path) => SweepSpec::load(path)?,
                None => SweepSpec {
                    variable: variable.unwrap_or(SweepVariable::Undersampling),
                    values: Vec::new(),
                    algorithms: Vec::new(),
                    depths: Vec::new(),
                    config: ExperimentConfig::default(),
                },
            };
            sweep.config = common.apply(sweep.config)?;
            if let Some(v) = variable {
                sweep.variable = v;
            }
            if !values.is_empty() {
                sweep.values = values;
            }
            if !algos.is_empty() {
                sweep.algorithms = algos;
            }
            if !depths.is_empty() {
                sweep.depths = depths;
            }
            if sweep.config.output_dir.is_none() {
                sweep.config.output_dir = Some(PathBuf::from("out"));
            }
            let report = run_sweep(&sweep)?;
            for r in &report.rows {
                println!(
                    "{:>8} {:<12} snr {:>8.3} ± {:<7.3} trials {:>3} {}",
                    r.sweep_value, r.algo, r.mean_snr_db, r.std_snr_db, r.trials, r.error
                );
            }
            if let Some(p) = report.csv_path {
                println!("wrote {}", p.display());
            }
        }
        Command::MriDemo {
            common,
            trial,
            baseline,
        } => {
            let base = ExperimentConfig {
                image: "builtin:brain".into(),
                ..ExperimentConfig::default()
            };
            let cfg = common.apply(mri_config(&base))?;
            let demo = run_mri_demo(&cfg, trial, baseline)?;
            println!(
                "image {}x{} padded to {}x{}, M={}, q={}",
                demo.sara.x_hat.width(),
                demo.sara.x_hat.height(),
                demo.padded.0,
                demo.padded.1,
                demo.measurements,
                demo.sara.config.dictionary.bases.len()
            );
            for o in std::iter::once(&demo.sara).chain(demo.baseline.as_ref()) {
                println!(
                    "{} snr_db={:.4} iterations={} digest={}",
                    o.algorithm, o.record.snr_db, o.record.iterations_total, o.record.config_digest
                );
            }
        }
        Command::Selftest { size, seed, verbose } => {
            let report = run_selftest(size, seed)?;
            for c in &report.checks {
                if verbose || !c.passed() {
                    let tag = if c.passed() { "ok  " } else { "FAIL" };
                    println!("{tag} {:<32} {:.3e} (tol {:.0e})", c.name, c.error, c.tolerance);
                }
            }
            let failed = report.failures().count();
            println!(
                "{} checks, {failed} failed, {:.1} s",
                report.checks.len(),
                report.elapsed_s
            );
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Phantom { out } => {
            std::fs::create_dir_all(&out).map_err(|e| sara::Error::io(&out, e))?;
            for name in BUILTIN_IMAGES {
                let img = builtin_image(name)?;
                let path = out.join(format!("{name}.pgm"));
                save_image(&img, &path)?;
                println!("{} ({}x{})", path.display(), img.width(), img.height());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
