//! Measurement operators and noise simulation.

mod fft;
mod gaussian;

use std::fmt;

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linops::{norm2, Image, LinearMap};

use fft::{signed_frequency, Fft2d};
pub(crate) use gaussian::{
    row_major_apply as dense_apply, row_major_apply_adjoint as dense_apply_adjoint, EigenProjector,
};
pub use gaussian::{GaussianMatrix, DEFAULT_DENSE_BUDGET_BYTES};

/// Default radial decay exponent of the variable-density profile.
pub const DEFAULT_VD_DECAY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingKind {
    SpreadSpectrum,
    Gaussian,
    VdFourier,
}

impl fmt::Display for SensingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensingKind::SpreadSpectrum => "spread_spectrum",
            SensingKind::Gaussian => "gaussian",
            SensingKind::VdFourier => "vd_fourier",
        })
    }
}

impl std::str::FromStr for SensingKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "spread_spectrum" | "ss" => Ok(SensingKind::SpreadSpectrum),
            "gaussian" => Ok(SensingKind::Gaussian),
            "vd_fourier" | "vdfourier" => Ok(SensingKind::VdFourier),
            other => Err(invalid(format!("unknown sensing kind '{other}'"))),
        }
    }
}

#[derive(Debug)]
enum Repr {
    SpreadSpectrum {
        signs: Vec<f64>,
        mask: Vec<usize>,
        fft: Fft2d,
    },
    Gaussian(GaussianMatrix),
    VdFourier {
        mask: Vec<usize>,
        fft: Fft2d,
    },
}

/// A linear measurement operator `Phi: C^N -> C^M` on images of fixed size.
#[derive(Debug)]
pub struct SensingOperator {
    width: usize,
    height: usize,
    m: usize,
    repr: Repr,
}

fn check_counts(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(invalid(format!("need 1 <= M <= N, got M={m}, N={n}")));
    }
    Ok(())
}

/// Spread spectrum `Phi = M F C`: random signs, unitary 2D FFT, and `m`
/// Fourier coefficients selected uniformly without replacement.
pub fn build_spread_spectrum(width: usize, height: usize, m: usize, seed: u64) -> Result<SensingOperator> {
    let n = width * height;
    check_counts(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signs = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let mut mask = index::sample(&mut rng, n, m).into_vec();
    mask.sort_unstable();
    Ok(SensingOperator {
        width,
        height,
        m,
        repr: Repr::SpreadSpectrum {
            signs,
            mask,
            fft: Fft2d::new(width, height),
        },
    })
}

/// Dense complex Gaussian matrix with entry variance `1/m`.
pub fn build_gaussian(width: usize, height: usize, m: usize, seed: u64) -> Result<SensingOperator> {
    build_gaussian_with_budget(width, height, m, seed, DEFAULT_DENSE_BUDGET_BYTES)
}

pub fn build_gaussian_with_budget(
    width: usize,
    height: usize,
    m: usize,
    seed: u64,
    budget_bytes: usize,
) -> Result<SensingOperator> {
    let n = width * height;
    check_counts(n, m)?;
    Ok(SensingOperator {
        width,
        height,
        m,
        repr: Repr::Gaussian(GaussianMatrix::random(m, n, seed, budget_bytes)?),
    })
}

/// Sampling weight of an FFT bin under the radial variable-density profile.
pub fn vd_weight(index: usize, width: usize, height: usize, decay: f64) -> f64 {
    let kx = signed_frequency(index % width, width);
    let ky = signed_frequency(index / width, height);
    let kmax = ((width as f64 / 2.0).powi(2) + (height as f64 / 2.0).powi(2)).sqrt();
    (1.0 + (kx * kx + ky * ky).sqrt() / kmax).powf(-decay)
}

/// Variable-density Fourier sampling: the zero frequency plus `m - 1` bins
/// drawn without replacement with probability proportional to
/// `(1 + |k| / k_max)^(-decay)`.
pub fn build_vdfourier(width: usize, height: usize, m: usize, seed: u64, decay: f64) -> Result<SensingOperator> {
    let n = width * height;
    check_counts(n, m)?;
    if !(decay >= 0.0 && decay.is_finite()) {
        return Err(invalid(format!("decay must be finite and non-negative, got {decay}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = vec![0usize];
    if m > 1 {
        let picked = index::sample_weighted(&mut rng, n - 1, |j| vd_weight(j + 1, width, height, decay), m - 1)
            .map_err(|e| invalid(format!("variable-density sampling failed: {e}")))?;
        mask.extend(picked.into_iter().map(|j| j + 1));
    }
    mask.sort_unstable();
    Ok(SensingOperator {
        width,
        height,
        m,
        repr: Repr::VdFourier {
            mask,
            fft: Fft2d::new(width, height),
        },
    })
}

impl SensingOperator {
    pub fn kind(&self) -> SensingKind {
        match self.repr {
            Repr::SpreadSpectrum { .. } => SensingKind::SpreadSpectrum,
            Repr::Gaussian(_) => SensingKind::Gaussian,
            Repr::VdFourier { .. } => SensingKind::VdFourier,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn n(&self) -> usize {
        self.width * self.height
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `nu` with `Phi Phi^dagger = nu I`, when the operator is tight.
    pub fn tight_constant(&self) -> Option<f64> {
        match self.repr {
            Repr::Gaussian(_) => None,
            _ => Some(1.0),
        }
    }

    pub fn mask(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::SpreadSpectrum { mask, .. } | Repr::VdFourier { mask, .. } => Some(mask),
            Repr::Gaussian(_) => None,
        }
    }

    pub fn signs(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::SpreadSpectrum { signs, .. } => Some(signs),
            _ => None,
        }
    }

    pub fn gaussian(&self) -> Option<&GaussianMatrix> {
        match &self.repr {
            Repr::Gaussian(g) => Some(g),
            _ => None,
        }
    }

    pub(crate) fn eigen_projector(&self) -> Result<Option<&EigenProjector>> {
        match &self.repr {
            Repr::Gaussian(g) => g.projector().map(Some),
            _ => Ok(None),
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n(), "sensing input length");
        match &self.repr {
            Repr::SpreadSpectrum { signs, mask, fft } => {
                let mut buf: Vec<Complex64> = x.iter().zip(signs).map(|(v, s)| v * s).collect();
                fft.forward(&mut buf);
                mask.iter().map(|&i| buf[i]).collect()
            }
            Repr::VdFourier { mask, fft } => {
                let mut buf = x.to_vec();
                fft.forward(&mut buf);
                mask.iter().map(|&i| buf[i]).collect()
            }
            Repr::Gaussian(g) => g.apply(x),
        }
    }

    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.m, "sensing adjoint input length");
        match &self.repr {
            Repr::SpreadSpectrum { signs, mask, fft } => {
                let mut buf = scatter(mask, y, self.n());
                fft.inverse(&mut buf);
                buf.iter_mut().zip(signs).for_each(|(v, s)| *v *= s);
                buf
            }
            Repr::VdFourier { mask, fft } => {
                let mut buf = scatter(mask, y, self.n());
                fft.inverse(&mut buf);
                buf
            }
            Repr::Gaussian(g) => g.apply_adjoint(y),
        }
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<Complex64> {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.apply(&xc)
    }
}

fn scatter(mask: &[usize], y: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (&i, v) in mask.iter().zip(y) {
        buf[i] = *v;
    }
    buf
}

impl LinearMap for SensingOperator {
    fn in_dim(&self) -> usize {
        self.n()
    }

    fn out_dim(&self) -> usize {
        self.m
    }

    fn forward(&self, input: &[Complex64]) -> Vec<Complex64> {
        self.apply(input)
    }

    fn adjoint(&self, input: &[Complex64]) -> Vec<Complex64> {
        self.apply_adjoint(input)
    }
}

/// Complex Gaussian noise level and the derived constraint radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of each complex noise sample; real and imaginary
    /// parts each have variance `sigma_n^2 / 2`.
    pub sigma_n: f64,
    pub isnr_db: f64,
    /// Radius of the data-fidelity ball.
    pub epsilon: f64,
    /// Noise level in the sparsity domain, the floor of the reweighting
    /// homotopy parameter.
    pub sigma_alpha: f64,
}

/// `epsilon^2 = (2M + 4 sqrt(M)) sigma_n^2 / 2`: mean plus two standard
/// deviations of the chi-square with `2M` degrees of freedom.
pub fn epsilon_bound(m: usize, sigma_n: f64) -> f64 {
    let m = m as f64;
    ((2.0 * m + 4.0 * m.sqrt()) * sigma_n * sigma_n / 2.0).sqrt()
}

/// `sigma_alpha = sqrt(M / D) sigma_n`.
pub fn sparsity_noise_level(m: usize, d: usize, sigma_n: f64) -> f64 {
    (m as f64 / d as f64).sqrt() * sigma_n
}

impl NoiseModel {
    pub fn from_sigma(sigma_n: f64, isnr_db: f64, m: usize, d: usize) -> Result<Self> {
        if !(sigma_n >= 0.0) || !sigma_n.is_finite() || m == 0 || d == 0 {
            return Err(invalid("noise model needs finite sigma_n >= 0 and positive M, D"));
        }
        Ok(NoiseModel {
            sigma_n,
            isnr_db,
            epsilon: epsilon_bound(m, sigma_n),
            sigma_alpha: sparsity_noise_level(m, d, sigma_n),
        })
    }
}

/// Noise level achieving `isnr_db` in expectation: `E|n|^2 = M sigma_n^2`.
pub fn calibrate_noise(y0: &[Complex64], isnr_db: f64, d: usize) -> Result<NoiseModel> {
    let energy = norm2(y0);
    if y0.is_empty() || energy == 0.0 {
        return Err(invalid("clean measurements are zero; ISNR undefined"));
    }
    if isnr_db.is_nan() {
        return Err(invalid("ISNR is NaN"));
    }
    let m = y0.len();
    let sigma_n = energy * 10f64.powf(-isnr_db / 20.0) / (m as f64).sqrt();
    NoiseModel::from_sigma(sigma_n, isnr_db, m, d)
}

/// Noisy measurements together with the clean data and the noise realization.
#[derive(Debug, Clone)]
pub struct Measurements {
    pub y: Vec<Complex64>,
    pub clean: Vec<Complex64>,
    pub noise: Vec<Complex64>,
}

/// `y = Phi x + n` with i.i.d. complex Gaussian `n` of level `noise.sigma_n`.
pub fn simulate_measurements(x: &Image, op: &SensingOperator, noise: &NoiseModel, seed: u64) -> Result<Measurements> {
    if x.len() != op.n() {
        return Err(invalid(format!(
            "image has {} pixels but operator expects {}",
            x.len(),
            op.n()
        )));
    }
    let clean = op.apply_real(x.pixels());
    let n = complex_gaussian(clean.len(), noise.sigma_n, seed);
    let y = clean.iter().zip(&n).map(|(a, b)| a + b).collect();
    Ok(Measurements { y, clean, noise: n })
}

/// `len` i.i.d. complex Gaussian samples with `E|n_i|^2 = sigma^2`.
pub fn complex_gaussian(len: usize, sigma: f64, seed: u64) -> Vec<Complex64> {
    if sigma == 0.0 {
        return vec![Complex64::new(0.0, 0.0); len];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma / 2f64.sqrt()).expect("finite sigma");
    (0..len)
        .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect()
}
