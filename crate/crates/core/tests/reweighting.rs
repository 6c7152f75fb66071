//! Behaviour of the reweighting loop on small reconstructions.

mod common;

use common::rng;
use rand::Rng;
use sara::linops::{BasisId, Dictionary, Image};
use sara::metrics::snr;
use sara::reweight::{sara_reconstruct, ReweightParams};
use sara::sensing::{build_spread_spectrum, calibrate_noise, simulate_measurements};
use sara::solvers::SolverParams;

/// Rectangles and discs of constant intensity on a constant background.
fn blocky_phantom(size: usize, seed: u64) -> Image {
    let mut r = rng(seed);
    let mut px = vec![40.0; size * size];
    for _ in 0..12 {
        let v = r.random_range(0.0..255.0);
        let (cx, cy) = (r.random_range(0..size) as f64, r.random_range(0..size) as f64);
        let rad = r.random_range(3.0..size as f64 / 4.0);
        let disc = r.random_bool(0.5);
        for row in 0..size {
            for col in 0..size {
                let (dx, dy) = (col as f64 - cx, row as f64 - cy);
                let inside = if disc {
                    dx * dx + dy * dy <= rad * rad
                } else {
                    dx.abs() <= rad && dy.abs() <= rad / 2.0
                };
                if inside {
                    px[row * size + col] = v;
                }
            }
        }
    }
    Image::new(size, size, px).unwrap()
}

#[test]
fn reweighting_improves_on_the_unweighted_solve() {
    let size = 64;
    let dict = Dictionary::new(&BasisId::daubechies_family(8).unwrap(), 4, size, size).unwrap();
    let sp = SolverParams::default();
    let mut wins = 0;
    for seed in 0..10 {
        let img = blocky_phantom(size, seed);
        let op = build_spread_spectrum(size, size, size * size * 3 / 10, seed).unwrap();
        let noise = calibrate_noise(&op.apply_real(img.pixels()), 30.0, dict.coeff_len()).unwrap();
        let meas = simulate_measurements(&img, &op, &noise, 1000 + seed).unwrap();
        let (sara, _) = sara_reconstruct(&meas.y, &op, &dict, &noise, &ReweightParams::default(), &sp).unwrap();
        let single = ReweightParams {
            n_max: 1,
            ..Default::default()
        };
        let (bp, _) = sara_reconstruct(&meas.y, &op, &dict, &noise, &single, &sp).unwrap();
        if snr(img.pixels(), &sara).unwrap() >= snr(img.pixels(), &bp).unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 8, "reweighting won on {wins} of 10 seeds");
}

#[test]
fn loop_state_is_consistent() {
    let size = 32;
    let img = blocky_phantom(size, 3);
    let dict = Dictionary::new(&BasisId::daubechies_family(3).unwrap(), 3, size, size).unwrap();
    let op = build_spread_spectrum(size, size, 400, 4).unwrap();
    let noise = calibrate_noise(&op.apply_real(img.pixels()), 25.0, dict.coeff_len()).unwrap();
    let meas = simulate_measurements(&img, &op, &noise, 5).unwrap();
    let rw = ReweightParams {
        n_max: 6,
        ..Default::default()
    };
    let (x, state) = sara_reconstruct(&meas.y, &op, &dict, &noise, &rw, &SolverParams::default()).unwrap();
    assert_eq!(x, state.x_current);
    assert!(state.t >= 1 && state.t <= rw.n_max);
    assert_eq!(state.history.len(), state.t);
    assert!(state.history.windows(2).all(|h| h[1].gamma <= h[0].gamma));
    assert!(state.history.iter().all(|h| h.gamma >= noise.sigma_alpha));
    assert!(state.weights.as_slice().iter().all(|&w| w > 0.0 && w <= 1.0));
    assert!(x.iter().all(|&v| v >= 0.0));
    assert!(state
        .history
        .iter()
        .all(|h| h.residual_norm <= noise.epsilon * (1.0 + 1e-3)));
}

#[test]
fn single_pass_equals_first_pass_of_the_loop() {
    let size = 32;
    let img = blocky_phantom(size, 6);
    let dict = Dictionary::new(&BasisId::daubechies_family(2).unwrap(), 2, size, size).unwrap();
    let op = build_spread_spectrum(size, size, 300, 7).unwrap();
    let noise = calibrate_noise(&op.apply_real(img.pixels()), 30.0, dict.coeff_len()).unwrap();
    let meas = simulate_measurements(&img, &op, &noise, 8).unwrap();
    let sp = SolverParams::default();
    let one = ReweightParams {
        n_max: 1,
        ..Default::default()
    };
    let (a, sa) = sara_reconstruct(&meas.y, &op, &dict, &noise, &one, &sp).unwrap();
    let (b, _) = sara_reconstruct(&meas.y, &op, &dict, &noise, &one, &sp).unwrap();
    assert_eq!(a, b);
    assert_eq!(sa.t, 1);
    let (_, full) = sara_reconstruct(&meas.y, &op, &dict, &noise, &ReweightParams::default(), &sp).unwrap();
    assert_eq!(full.history[0].objective, sa.history[0].objective);
}
