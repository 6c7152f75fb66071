//! Numerical invariants of the operators: adjointness, perfect
//! reconstruction and the Parseval identity.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linops::{adjoint_mismatch, dwt_forward, dwt_inverse, norm2, BasisId, Dictionary, Image};
use crate::sensing::{build_gaussian, build_spread_spectrum, build_vdfourier, DEFAULT_VD_DECAY};

pub const ADJOINT_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
pub const PARSEVAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub elapsed_s: f64,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

fn random_complex(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    d / norm2(b).max(f64::MIN_POSITIVE)
}

/// Dictionary `q` of the suite: Db1..Dbq for q <= 8, Db1..Db8 plus Dirac for 9.
pub fn suite_dictionary(q: usize) -> Result<Vec<BasisId>> {
    let mut bases = BasisId::daubechies_family(q.min(8) as u8)?;
    if q == 9 {
        bases.push(BasisId::Dirac);
    }
    Ok(bases)
}

/// Runs every check on `size`x`size` images at depths 1, 4 and 8 (depths
/// too deep for `size` are skipped).
pub fn run_selftest(size: usize, seed: u64) -> Result<SelftestReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let n = size * size;
    let depths: Vec<usize> = [1usize, 4, 8]
        .into_iter()
        .filter(|&l| size.is_multiple_of(1 << l))
        .collect();

    for &depth in &depths {
        for order in 1..=8u8 {
            let img = Image::new(size, size, (0..n).map(|_| rng.random_range(0.0..255.0)).collect())?;
            let basis = BasisId::Daubechies(order);
            let coeffs = dwt_forward(&img, basis, depth)?;
            let back = dwt_inverse(&coeffs, basis, depth, size, size)?;
            let err: f64 = img
                .pixels()
                .iter()
                .zip(back.pixels())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let scale: f64 = img.pixels().iter().map(|a| a * a).sum::<f64>().sqrt();
            checks.push(Check {
                name: format!("reconstruction db{order} L={depth}"),
                error: err / scale,
                tolerance: RECONSTRUCTION_TOL,
            });
        }
        for q in 1..=9 {
            let dict = Dictionary::new(&suite_dictionary(q)?, depth, size, size)?;
            let x = random_complex(&mut rng, n);
            let alpha = random_complex(&mut rng, dict.coeff_len());
            checks.push(Check {
                name: format!("adjoint q={q} L={depth}"),
                error: adjoint_mismatch(&dict, &x, &alpha),
                tolerance: ADJOINT_TOL,
            });
            let round = dict.synthesis(&dict.analysis(&x)?)?;
            checks.push(Check {
                name: format!("parseval q={q} L={depth}"),
                error: rel_diff(&round, &x),
                tolerance: PARSEVAL_TOL,
            });
        }
    }

    let m = n / 3;
    let ops = [
        ("spread spectrum", build_spread_spectrum(size, size, m, seed)?),
        (
            "variable density",
            build_vdfourier(size, size, m, seed, DEFAULT_VD_DECAY)?,
        ),
        ("gaussian", build_gaussian(16, 16, 96, seed)?),
    ];
    for (name, op) in &ops {
        let x = random_complex(&mut rng, op.n());
        let y = random_complex(&mut rng, op.m());
        checks.push(Check {
            name: format!("adjoint {name}"),
            error: adjoint_mismatch(op, &x, &y),
            tolerance: ADJOINT_TOL,
        });
    }

    Ok(SelftestReport {
        checks,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}
