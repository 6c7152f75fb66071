use num_complex::Complex64;

use super::wavelet::{check_depth, Wavelet2d};
use super::{BasisId, LinearMap};
use crate::error::{invalid, Result};

/// Normalized concatenation of orthonormal bases, `Psi = [Psi_1 ... Psi_q] / sqrt(q)`.
///
/// The analysis operator maps an image of `N` pixels to `D = q N`
/// coefficients, block `i` holding basis `i`. Synthesis after analysis is the
/// identity (Parseval frame). Immutable once built, so it can be shared across
/// threads.
#[derive(Debug, Clone)]
pub struct Dictionary {
    bases: Vec<BasisId>,
    transforms: Vec<Option<Wavelet2d>>,
    depth: usize,
    width: usize,
    height: usize,
    scale: f64,
}

impl Dictionary {
    pub fn new(bases: &[BasisId], depth: usize, width: usize, height: usize) -> Result<Self> {
        if bases.is_empty() {
            return Err(invalid("dictionary needs at least one basis"));
        }
        if width == 0 || height == 0 {
            return Err(invalid("dictionary dimensions must be positive"));
        }
        for (i, b) in bases.iter().enumerate() {
            if bases[..i].contains(b) {
                return Err(invalid(format!("duplicate basis {b} in dictionary")));
            }
        }
        // The Dirac basis does not care about the decomposition depth.
        if bases.iter().any(BasisId::is_wavelet) {
            check_depth(depth, width, height)?;
        }
        let transforms = bases
            .iter()
            .map(|b| match *b {
                BasisId::Daubechies(k) => Wavelet2d::new(k, depth, width, height).map(Some),
                BasisId::Dirac => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dictionary {
            bases: bases.to_vec(),
            transforms,
            depth,
            width,
            height,
            scale: 1.0 / (bases.len() as f64).sqrt(),
        })
    }

    pub fn bases(&self) -> &[BasisId] {
        &self.bases
    }

    pub fn num_bases(&self) -> usize {
        self.bases.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Signal length `N`.
    pub fn signal_len(&self) -> usize {
        self.width * self.height
    }

    /// Coefficient length `D = q N`.
    pub fn coeff_len(&self) -> usize {
        self.bases.len() * self.signal_len()
    }

    /// A single orthonormal basis: analysis is an isometry onto its range and
    /// synthesis is its exact inverse.
    pub fn is_orthonormal(&self) -> bool {
        self.bases.len() == 1
    }

    /// `Psi^dagger x`.
    pub fn analysis(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.signal_len();
        if x.len() != n {
            return Err(invalid(format!("analysis input has length {}, expected {n}", x.len())));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeff_len()];
        self.analysis_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn analysis_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.signal_len();
        let (re, im) = split(x);
        let has_imag = im.iter().any(|&v| v != 0.0);
        let mut buf_re = vec![0.0; n];
        let mut buf_im = vec![0.0; n];
        for (t, block) in self.transforms.iter().zip(out.chunks_exact_mut(n)) {
            match t {
                Some(wt) => {
                    wt.forward(&re, &mut buf_re);
                    if has_imag {
                        wt.forward(&im, &mut buf_im);
                    } else {
                        buf_im.fill(0.0);
                    }
                    for ((o, &a), &b) in block.iter_mut().zip(&buf_re).zip(&buf_im) {
                        *o = Complex64::new(a * self.scale, b * self.scale);
                    }
                }
                None => {
                    for (o, v) in block.iter_mut().zip(x) {
                        *o = v * self.scale;
                    }
                }
            }
        }
    }

    /// `Psi alpha`.
    pub fn synthesis(&self, alpha: &[Complex64]) -> Result<Vec<Complex64>> {
        let d = self.coeff_len();
        if alpha.len() != d {
            return Err(invalid(format!(
                "synthesis input has length {}, expected {d}",
                alpha.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.signal_len()];
        self.synthesis_into(alpha, &mut out);
        Ok(out)
    }

    pub(crate) fn synthesis_into(&self, alpha: &[Complex64], out: &mut [Complex64]) {
        let n = self.signal_len();
        let mut acc_re = vec![0.0; n];
        let mut acc_im = vec![0.0; n];
        let mut buf = vec![0.0; n];
        for (t, block) in self.transforms.iter().zip(alpha.chunks_exact(n)) {
            let (re, im) = split(block);
            match t {
                Some(wt) => {
                    wt.inverse(&re, &mut buf);
                    acc_re.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                    if im.iter().any(|&v| v != 0.0) {
                        wt.inverse(&im, &mut buf);
                        acc_im.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                    }
                }
                None => {
                    acc_re.iter_mut().zip(&re).for_each(|(a, b)| *a += b);
                    acc_im.iter_mut().zip(&im).for_each(|(a, b)| *a += b);
                }
            }
        }
        for ((o, a), b) in out.iter_mut().zip(acc_re).zip(acc_im) {
            *o = Complex64::new(a * self.scale, b * self.scale);
        }
    }

    /// Analysis of a real image.
    pub fn analysis_real(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.analysis(&xc)
    }
}

fn split(x: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    x.iter().map(|c| (c.re, c.im)).unzip()
}

impl LinearMap for Dictionary {
    fn in_dim(&self) -> usize {
        self.signal_len()
    }

    fn out_dim(&self) -> usize {
        self.coeff_len()
    }

    /// Forward direction is analysis, `Psi^dagger`.
    fn forward(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeff_len()];
        self.analysis_into(input, &mut out);
        out
    }

    fn adjoint(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.signal_len()];
        self.synthesis_into(input, &mut out);
        out
    }
}

/// Number of coefficients with magnitude strictly above `threshold`.
pub fn average_l0(alpha: &[Complex64], threshold: f64) -> usize {
    alpha.iter().filter(|a| a.norm() > threshold).count()
}
