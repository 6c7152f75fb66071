use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use sara_ffi::*;

fn last_error() -> String {
    let p = sara_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn dictionary(bases: &str, depth: usize, w: usize, h: usize) -> *mut SaraDictionary {
    let spec = CString::new(bases).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(
        unsafe { sara_dictionary_new(spec.as_ptr(), depth, w, h, &mut d) },
        SaraStatus::Ok
    );
    d
}

fn operator(kind: SaraSensingKind, w: usize, h: usize, m: usize) -> *mut SaraOperator {
    let mut op = ptr::null_mut();
    assert_eq!(
        unsafe { sara_operator_new(kind, w, h, m, 7, 2.0, &mut op) },
        SaraStatus::Ok
    );
    op
}

fn interleaved(n: usize, seed: usize) -> Vec<f64> {
    (0..2 * n)
        .map(|i| (((i + seed) * 2654435761) % 1000) as f64 / 500.0 - 1.0)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> (f64, f64) {
    // <a, b> with b conjugated
    a.chunks(2).zip(b.chunks(2)).fold((0.0, 0.0), |(re, im), (x, y)| {
        (re + x[0] * y[0] + x[1] * y[1], im + x[1] * y[0] - x[0] * y[1])
    })
}

#[test]
fn dictionary_round_trip_and_sizes() {
    let d = dictionary("db1-db4,dirac", 2, 16, 8);
    unsafe {
        assert_eq!(sara_dictionary_signal_len(d), 128);
        assert_eq!(sara_dictionary_coeff_len(d), 5 * 128);
        let x = interleaved(128, 1);
        let mut alpha = vec![0.0; 2 * 640];
        assert_eq!(
            sara_dictionary_analysis(d, x.as_ptr(), 128, alpha.as_mut_ptr(), 640),
            SaraStatus::Ok
        );
        let mut back = vec![0.0; 256];
        assert_eq!(
            sara_dictionary_synthesis(d, alpha.as_ptr(), 640, back.as_mut_ptr(), 128),
            SaraStatus::Ok
        );
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        sara_dictionary_free(d);
    }
}

#[test]
fn operators_are_adjoint() {
    for kind in [
        SaraSensingKind::SpreadSpectrum,
        SaraSensingKind::Gaussian,
        SaraSensingKind::VdFourier,
    ] {
        let op = operator(kind, 8, 8, 20);
        unsafe {
            assert_eq!((sara_operator_n(op), sara_operator_m(op)), (64, 20));
            let (u, v) = (interleaved(64, 3), interleaved(20, 11));
            let (mut fu, mut av) = (vec![0.0; 40], vec![0.0; 128]);
            assert_eq!(
                sara_operator_apply(op, u.as_ptr(), 64, fu.as_mut_ptr(), 20),
                SaraStatus::Ok
            );
            assert_eq!(
                sara_operator_adjoint(op, v.as_ptr(), 20, av.as_mut_ptr(), 64),
                SaraStatus::Ok
            );
            let (l, r) = (dot(&fu, &v), dot(&u, &av));
            assert!((l.0 - r.0).abs() + (l.1 - r.1).abs() < 1e-10, "{kind:?}");
            sara_operator_free(op);
        }
    }
}

#[test]
fn reconstruction_end_to_end() {
    let (w, h) = (16, 16);
    let image: Vec<f64> = (0..w * h)
        .map(|i| if (i % w) < 8 && (i / w) < 10 { 200.0 } else { 30.0 })
        .collect();
    let d = dictionary("db1-db4", 2, w, h);
    let op = operator(SaraSensingKind::SpreadSpectrum, w, h, 128);
    unsafe {
        let mut noise = SaraNoise {
            sigma_n: 0.0,
            isnr_db: 0.0,
            epsilon: 0.0,
            sigma_alpha: 0.0,
        };
        assert_eq!(
            sara_calibrate_noise(op, d, image.as_ptr(), 256, 30.0, &mut noise),
            SaraStatus::Ok
        );
        assert!(noise.epsilon > 0.0 && noise.sigma_alpha > 0.0);
        let mut y = vec![0.0; 256];
        assert_eq!(
            sara_simulate_measurements(op, &noise, image.as_ptr(), 256, 3, y.as_mut_ptr(), 128),
            SaraStatus::Ok
        );

        let mut x = vec![0.0; 256];
        let mut report: SaraReport = std::mem::zeroed();
        let status = sara_reconstruct(
            op,
            d,
            y.as_ptr(),
            128,
            &noise,
            ptr::null(),
            ptr::null(),
            x.as_mut_ptr(),
            256,
            &mut report,
        );
        assert_eq!(status, SaraStatus::Ok);
        assert!(report.solves >= 1 && report.solves <= sara_reweight_params_default().n_max);
        assert!(report.gamma >= noise.sigma_alpha);
        let mut snr = 0.0;
        assert_eq!(sara_snr(image.as_ptr(), x.as_ptr(), 256, &mut snr), SaraStatus::Ok);
        assert!(snr > 20.0, "snr {snr}");

        // one pass through the explicit parameter structs
        let rw = SaraReweightParams {
            n_max: 1,
            ..sara_reweight_params_default()
        };
        let sp = sara_solver_params_default();
        let status = sara_reconstruct(
            op,
            d,
            y.as_ptr(),
            128,
            &noise,
            &rw,
            &sp,
            x.as_mut_ptr(),
            256,
            &mut report,
        );
        assert_eq!((status, report.solves), (SaraStatus::Ok, 1));
        sara_operator_free(op);
        sara_dictionary_free(d);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut d = ptr::null_mut();
        let bad = CString::new("db9").unwrap();
        assert_eq!(
            sara_dictionary_new(bad.as_ptr(), 1, 8, 8, &mut d),
            SaraStatus::InvalidArgument
        );
        assert!(last_error().contains("db9"));
        assert!(d.is_null());

        let good = CString::new("db1").unwrap();
        assert_eq!(
            sara_dictionary_new(good.as_ptr(), 4, 12, 12, &mut d),
            SaraStatus::InvalidArgument
        );
        assert_eq!(
            sara_dictionary_new(ptr::null(), 1, 8, 8, &mut d),
            SaraStatus::NullPointer
        );
        assert_eq!(
            sara_dictionary_new(good.as_ptr(), 1, 8, 8, ptr::null_mut()),
            SaraStatus::NullPointer
        );

        let d = dictionary("db1", 1, 8, 8);
        assert!(sara_last_error_message().is_null());
        let x = vec![0.0; 128];
        let mut out = vec![0.0; 100];
        assert_eq!(
            sara_dictionary_analysis(d, x.as_ptr(), 64, out.as_mut_ptr(), 50),
            SaraStatus::InvalidArgument
        );
        assert_eq!(
            sara_dictionary_analysis(ptr::null(), x.as_ptr(), 64, out.as_mut_ptr(), 64),
            SaraStatus::NullPointer
        );
        assert_eq!(sara_dictionary_coeff_len(ptr::null()), 0);
        sara_dictionary_free(d);
        sara_dictionary_free(ptr::null_mut());

        let mut op = ptr::null_mut();
        let status = sara_operator_new(SaraSensingKind::Gaussian, 1024, 1024, 900_000, 1, 2.0, &mut op);
        assert_eq!(status, SaraStatus::Resource, "{}", last_error());
        let mut snr = 0.0;
        let zeros = [0.0; 4];
        assert_eq!(
            sara_snr(zeros.as_ptr(), zeros.as_ptr(), 4, &mut snr),
            SaraStatus::InvalidArgument
        );

        let v = CStr::from_ptr(sara_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

fn library_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    assert!(include.join("sara.h").exists());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("demo.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "sara.h"

int main(void) {
    SaraDictionary *dict = NULL;
    if (sara_dictionary_new("db1-db2", 1, 8, 8, &dict) != SARA_STATUS_OK) return 1;
    SaraOperator *op = NULL;
    if (sara_operator_new(SARA_SENSING_KIND_SPREAD_SPECTRUM, 8, 8, 32, 5, 2.0, &op) != SARA_STATUS_OK) return 2;
    double img[64], y[64], x[64];
    for (int i = 0; i < 64; i++) img[i] = (i % 8 < 4) ? 100.0 : 10.0;
    SaraNoise noise;
    if (sara_calibrate_noise(op, dict, img, 64, 40.0, &noise) != SARA_STATUS_OK) return 3;
    if (sara_simulate_measurements(op, &noise, img, 64, 1, y, 32) != SARA_STATUS_OK) return 4;
    SaraReport report;
    if (sara_reconstruct(op, dict, y, 32, &noise, NULL, NULL, x, 64, &report) != SARA_STATUS_OK) return 5;
    if (sara_dictionary_new("nope", 1, 8, 8, &dict) != SARA_STATUS_INVALID_ARGUMENT) return 6;
    printf("solves=%zu error=%s\n", report.solves, sara_last_error_message());
    sara_operator_free(op);
    sara_dictionary_free(dict);
    return 0;
}
"#,
    )
    .unwrap();

    let syntax = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(syntax.success());

    let lib = library_dir();
    assert!(
        lib.join("libsara_ffi.so").exists(),
        "no shared library in {}",
        lib.display()
    );
    let exe = dir.path().join("demo");
    let status = Command::new("cc")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg("-o")
        .arg(&exe)
        .arg(format!("-L{}", lib.display()))
        .arg(format!("-Wl,-rpath,{}", lib.display()))
        .arg("-lsara_ffi")
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("solves="), "{text}");
    assert!(text.contains("nope"), "{text}");
}
