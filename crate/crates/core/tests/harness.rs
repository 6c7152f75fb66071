//! Trials, sweeps and the MRI demonstration through the public harness API.

use std::path::Path;

use sara::harness::experiment::{read_sweep_csv, SWEEP_COLUMNS};
use sara::harness::{
    builtin_image, load_image, mri_config, run_mri_demo, run_paired_trial, run_sweep, run_trial, save_image, Algorithm,
    ExperimentConfig, SweepSpec, SweepVariable,
};
use sara::linops::BasisId;
use sara::sensing::SensingKind;

fn write_crop(dir: &Path, size: usize) -> String {
    let img = builtin_image("natural128").unwrap().crop(40, 40, size, size).unwrap();
    let path = dir.join(format!("crop{size}.pgm"));
    save_image(&img, &path).unwrap();
    path.to_string_lossy().into_owned()
}

/// A configuration cheap enough for many trials.
fn quick_config(image: String) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        image,
        trials: 2,
        ..Default::default()
    };
    cfg.dictionary.bases = BasisId::daubechies_family(2).unwrap();
    cfg.dictionary.depth = 2;
    cfg.solver.max_iters = 30;
    cfg.reweight.n_max = 2;
    cfg
}

#[test]
fn trials_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(write_crop(dir.path(), 16));
    let a = run_trial(&cfg, 3).unwrap();
    let b = run_trial(&cfg, 3).unwrap();
    assert_eq!(
        (a.trial_seed, a.snr_db, a.iterations_total),
        (b.trial_seed, b.snr_db, b.iterations_total)
    );
    assert_eq!(a.realized_isnr_db, b.realized_isnr_db);
    assert_eq!(a.config_digest, b.config_digest);
    let c = run_trial(&cfg, 4).unwrap();
    assert_ne!(a.trial_seed, c.trial_seed);
}

#[test]
fn bpsa_is_sara_with_one_pass() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(write_crop(dir.path(), 16));
    cfg.reweight.n_max = 1;
    let img = load_image(Path::new(&cfg.image)).unwrap();
    let outs = run_paired_trial(&cfg, &img, &[Algorithm::Sara, Algorithm::Bpsa], 0, None).unwrap();
    let sara = outs[0].as_ref().unwrap();
    let bpsa = outs[1].as_ref().unwrap();
    assert_eq!(sara.x_hat.pixels(), bpsa.x_hat.pixels());
}

#[test]
fn generous_sampling_gives_a_good_reconstruction() {
    let mut cfg = ExperimentConfig {
        image: "builtin:natural64".into(),
        ..Default::default()
    };
    cfg.sensing.ratio = 0.5;
    let rec = run_trial(&cfg, 0).unwrap();
    assert!(rec.snr_db > 20.0, "snr {}", rec.snr_db);
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(write_crop(dir.path(), 16));
    let out = dir.path().join("run");
    cfg.output_dir = Some(out.clone());
    let rec = run_trial(&cfg, 1).unwrap();
    let img = load_image(&out.join("SARA_t1.pgm")).unwrap();
    assert_eq!((img.width(), img.height()), (16, 16));
    let telemetry = std::fs::read_to_string(out.join("SARA_t1_telemetry.csv")).unwrap();
    assert!(telemetry.starts_with("t,gamma,rho,objective,residual_norm,inner_iterations,converged"));
    let saved = std::fs::read_to_string(out.join("configs").join(format!("{}.toml", rec.config_digest))).unwrap();
    let reloaded = ExperimentConfig::from_toml(&saved).unwrap();
    assert_eq!(reloaded.digest(), rec.config_digest);
}

#[test]
fn non_dyadic_images_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let img = builtin_image("natural64").unwrap().crop(0, 0, 20, 20).unwrap();
    let path = dir.path().join("odd.pgm");
    save_image(&img, &path).unwrap();
    let mut cfg = quick_config(path.to_string_lossy().into_owned());
    cfg.dictionary.depth = 4;
    let err = run_trial(&cfg, 0).unwrap_err().to_string();
    assert!(err.contains("divisible"), "{err}");
}

fn sweep(variable: SweepVariable, values: Vec<f64>, cfg: ExperimentConfig) -> SweepSpec {
    SweepSpec {
        variable,
        values,
        algorithms: vec![],
        depths: vec![],
        config: cfg,
    }
}

#[test]
fn undersampling_sweep_has_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(write_crop(dir.path(), 16));
    cfg.trials = 30;
    cfg.solver.max_iters = 10;
    cfg.reweight.n_max = 1;
    cfg.output_dir = Some(dir.path().join("out"));
    let values: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let report = run_sweep(&sweep(SweepVariable::Undersampling, values.clone(), cfg)).unwrap();
    assert_eq!(report.rows.len(), 9);
    let path = report.csv_path.unwrap();
    let header = std::fs::read_to_string(&path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header, SWEEP_COLUMNS.join(","));
    let rows = read_sweep_csv(&path).unwrap();
    assert_eq!(rows, report.rows);
    for (row, v) in rows.iter().zip(&values) {
        assert_eq!(row.sweep_value, *v);
        assert_eq!(row.trials, 30);
        assert!(row.error.is_empty());
        assert!(dir
            .path()
            .join("out/configs")
            .join(format!("{}.toml", row.config_digest))
            .exists());
    }
}

#[test]
fn bases_sweep_covers_every_depth() {
    let mut cfg = ExperimentConfig {
        image: "builtin:natural256".into(),
        trials: 1,
        ..Default::default()
    };
    cfg.solver.max_iters = 2;
    cfg.reweight.n_max = 1;
    let mut spec = sweep(SweepVariable::NumBases, (1..=8).map(f64::from).collect(), cfg);
    spec.depths = vec![1, 4, 8];
    let report = run_sweep(&spec).unwrap();
    assert_eq!(report.rows.len(), 24);
    assert_eq!(report.rows[0].algo, "SARA@L1");
    assert_eq!(report.rows[23].algo, "SARA@L8");
    let digests: std::collections::HashSet<_> = report.rows.iter().map(|r| r.config_digest.clone()).collect();
    assert_eq!(digests.len(), 24);
}

#[test]
fn isnr_sweep_with_several_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(write_crop(dir.path(), 16));
    cfg.sensing.ratio = 0.2;
    cfg.trials = 1;
    let mut spec = sweep(SweepVariable::Isnr, vec![0.0, 10.0, 20.0, 30.0, 40.0], cfg);
    let one = run_sweep(&spec).unwrap();
    assert_eq!(one.rows.len(), 5);
    spec.algorithms = vec![Algorithm::Sara, Algorithm::BpDb8];
    spec.config.dictionary.depth = 1;
    let two = run_sweep(&spec).unwrap();
    assert_eq!(two.rows.len(), 10);
    assert_eq!(two.rows[1].algo, "BPDb8");
    assert_ne!(two.rows[0].config_digest, two.rows[1].config_digest);
}

#[test]
fn failures_are_recorded_per_row() {
    let mut cfg = ExperimentConfig {
        image: "builtin:natural256".into(),
        trials: 1,
        ..Default::default()
    };
    cfg.sensing.kind = SensingKind::Gaussian;
    cfg.dictionary.bases = vec![BasisId::Daubechies(1)];
    cfg.solver.max_iters = 2;
    cfg.reweight.n_max = 1;
    // the second ratio needs a dense matrix far over the memory budget
    let report = run_sweep(&sweep(SweepVariable::Undersampling, vec![0.0005, 0.5], cfg)).unwrap();
    assert!(report.rows[0].error.is_empty(), "{}", report.rows[0].error);
    assert_eq!(report.rows[1].trials, 0);
    assert!(
        report.rows[1].error.contains("1 of 1 trials failed"),
        "{}",
        report.rows[1].error
    );
}

#[test]
fn invalid_sweeps_are_rejected() {
    let cfg = ExperimentConfig::default();
    assert!(run_sweep(&sweep(SweepVariable::Undersampling, vec![], cfg.clone())).is_err());
    assert!(run_sweep(&sweep(SweepVariable::Undersampling, vec![1.5], cfg.clone())).is_err());
    assert!(run_sweep(&sweep(SweepVariable::NumBases, vec![2.5], cfg.clone())).is_err());
    let mut spec = sweep(SweepVariable::NumBases, vec![2.0], cfg);
    spec.algorithms = vec![Algorithm::BpDb8];
    assert!(run_sweep(&spec).is_err());
}

#[test]
fn mri_configuration() {
    let cfg = mri_config(&ExperimentConfig {
        image: "builtin:brain".into(),
        ..Default::default()
    });
    assert_eq!(cfg.dictionary.bases.len(), 9);
    assert_eq!(cfg.dictionary.bases[8], BasisId::Dirac);
    assert!(cfg.to_toml().contains("\"dirac\""));
    assert_eq!(cfg.sensing.kind, SensingKind::VdFourier);
}

#[test]
fn mri_demo_beats_single_basis_on_most_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = mri_config(&ExperimentConfig {
        image: "builtin:brain112".into(),
        ..Default::default()
    });
    let mut wins = 0;
    for trial in 0..10 {
        cfg.output_dir = (trial == 0).then(|| dir.path().to_path_buf());
        let demo = run_mri_demo(&cfg, trial, Some(Algorithm::BpDb8)).unwrap();
        assert_eq!(demo.measurements, 112 * 84 / 20);
        assert_eq!(demo.padded, (112, 96));
        assert_eq!((demo.sara.x_hat.width(), demo.sara.x_hat.height()), (112, 84));
        let base = demo.baseline.unwrap();
        if demo.sara.record.snr_db > base.record.snr_db {
            wins += 1;
        }
        if trial == 0 {
            let saved = dir
                .path()
                .join("configs")
                .join(format!("{}.toml", demo.sara.record.config_digest));
            let emitted = ExperimentConfig::load(&saved).unwrap();
            assert_eq!(emitted.dictionary.bases.len(), 9);
            assert!(dir.path().join("SARA_t0.pgm").exists());
            assert!(dir.path().join("BPDb8_t0.pgm").exists());
        }
    }
    assert!(wins >= 8, "SARA won on {wins} of 10 seeds");
}

#[test]
fn shipped_images_match_builtins() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for name in sara::harness::experiment::BUILTIN_IMAGES {
        let shipped = load_image(&data.join(format!("{name}.pgm"))).unwrap();
        assert_eq!(shipped, builtin_image(name).unwrap(), "{name}");
    }
}
