//! Separable 2D orthonormal Daubechies transforms with periodic boundaries.
//!
//! Coefficient layout for an image of `N` pixels and depth `L`:
//! `[approx_L | H_L V_L D_L | ... | H_1 V_1 D_1]`. The detail block of level
//! `l` occupies `[N/4^l, N/4^(l-1))`, with `H` low-pass along rows and
//! high-pass along columns, `V` the converse and `D` high-pass in both. Every
//! sub-band is stored row-major.

use super::filters::{daubechies_lowpass, quadrature_mirror};
use super::{BasisId, Image};
use crate::error::{invalid, Result};

/// A planned multi-level 2D wavelet transform for fixed image dimensions.
#[derive(Debug, Clone)]
pub struct Wavelet2d {
    lowpass: &'static [f64],
    highpass: Vec<f64>,
    depth: usize,
    width: usize,
    height: usize,
}

/// Checks that `depth` levels fit an image of the given dimensions.
pub(crate) fn check_depth(depth: usize, width: usize, height: usize) -> Result<()> {
    if depth == 0 {
        return Err(invalid("wavelet depth must be at least 1"));
    }
    if depth >= usize::BITS as usize {
        return Err(invalid(format!("wavelet depth {depth} is too large")));
    }
    let block = 1usize << depth;
    if !width.is_multiple_of(block) || !height.is_multiple_of(block) {
        return Err(invalid(format!(
            "image {width}x{height} is not divisible by 2^{depth}={block}; \
             pad or crop each dimension to a multiple of {block}"
        )));
    }
    Ok(())
}

impl Wavelet2d {
    pub fn new(order: u8, depth: usize, width: usize, height: usize) -> Result<Self> {
        let lowpass =
            daubechies_lowpass(order).ok_or_else(|| invalid(format!("Daubechies order {order} outside 1..=8")))?;
        check_depth(depth, width, height)?;
        Ok(Wavelet2d {
            lowpass,
            highpass: quadrature_mirror(lowpass),
            depth,
            width,
            height,
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Analysis: image (row-major) to coefficients.
    pub fn forward(&self, input: &[f64], out: &mut [f64]) {
        let n = self.len();
        assert_eq!(input.len(), n);
        assert_eq!(out.len(), n);
        let mut approx = input.to_vec();
        let (mut w, mut h) = (self.width, self.height);
        let mut row_lo = vec![0.0; n / 2];
        let mut row_hi = vec![0.0; n / 2];
        let mut ext = vec![0.0; self.width.max(self.height) + self.lowpass.len()];
        for level in 1..=self.depth {
            let (hw, hh) = (w / 2, h / 2);
            let band = hw * hh;
            let row_lo = &mut row_lo[..hw * h];
            let row_hi = &mut row_hi[..hw * h];
            for r in 0..h {
                self.analyze_line(
                    &approx[r * w..(r + 1) * w],
                    &mut ext,
                    &mut row_lo[r * hw..(r + 1) * hw],
                    &mut row_hi[r * hw..(r + 1) * hw],
                );
            }
            let start = n >> (2 * level);
            let (h_band, rest) = out[start..start + 3 * band].split_at_mut(band);
            let (v_band, d_band) = rest.split_at_mut(band);
            let mut next = vec![0.0; band];
            self.analyze_columns(row_lo, hw, h, &mut next, h_band);
            self.analyze_columns(row_hi, hw, h, v_band, d_band);
            approx = next;
            w = hw;
            h = hh;
        }
        out[..w * h].copy_from_slice(&approx);
    }

    /// Synthesis: coefficients to image. Exact inverse (and adjoint) of
    /// [`Wavelet2d::forward`].
    pub fn inverse(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = self.len();
        assert_eq!(coeffs.len(), n);
        assert_eq!(out.len(), n);
        let (mut w, mut h) = (self.width >> self.depth, self.height >> self.depth);
        let mut approx = coeffs[..w * h].to_vec();
        let mut col_lo = vec![0.0; n / 2];
        let mut col_hi = vec![0.0; n / 2];
        let mut acc = vec![0.0; self.width.max(self.height) + self.lowpass.len()];
        for level in (1..=self.depth).rev() {
            let band = w * h;
            let start = n >> (2 * level);
            let h_band = &coeffs[start..start + band];
            let v_band = &coeffs[start + band..start + 2 * band];
            let d_band = &coeffs[start + 2 * band..start + 3 * band];
            let (fw, fh) = (2 * w, 2 * h);
            let col_lo = &mut col_lo[..w * fh];
            let col_hi = &mut col_hi[..w * fh];
            self.synthesize_columns(&approx, h_band, w, h, col_lo);
            self.synthesize_columns(v_band, d_band, w, h, col_hi);
            let mut next = vec![0.0; fw * fh];
            for r in 0..fh {
                self.synthesize_line(
                    &col_lo[r * w..(r + 1) * w],
                    &col_hi[r * w..(r + 1) * w],
                    &mut acc,
                    &mut next[r * fw..(r + 1) * fw],
                );
            }
            approx = next;
            w = fw;
            h = fh;
        }
        out.copy_from_slice(&approx);
    }

    fn analyze_line(&self, line: &[f64], ext: &mut [f64], lo: &mut [f64], hi: &mut [f64]) {
        let n = line.len();
        let f = self.lowpass.len();
        let ext = &mut ext[..n + f];
        for (j, e) in ext.iter_mut().enumerate() {
            *e = line[j % n];
        }
        for i in 0..n / 2 {
            let window = &ext[2 * i..2 * i + f];
            let mut a = 0.0;
            let mut d = 0.0;
            for ((&l, &h), &v) in self.lowpass.iter().zip(self.highpass.iter()).zip(window) {
                a += l * v;
                d += h * v;
            }
            lo[i] = a;
            hi[i] = d;
        }
    }

    fn synthesize_line(&self, lo: &[f64], hi: &[f64], acc: &mut [f64], out: &mut [f64]) {
        let n = out.len();
        let f = self.lowpass.len();
        let acc = &mut acc[..n + f];
        acc.fill(0.0);
        for i in 0..n / 2 {
            let (a, d) = (lo[i], hi[i]);
            let window = &mut acc[2 * i..2 * i + f];
            for ((v, &l), &h) in window.iter_mut().zip(self.lowpass.iter()).zip(self.highpass.iter()) {
                *v += l * a + h * d;
            }
        }
        out.copy_from_slice(&acc[..n]);
        for (j, v) in acc[n..].iter().enumerate() {
            out[j % n] += v;
        }
    }

    /// Filters the columns of a `w`x`h` block, writing two `w`x`h/2` blocks.
    fn analyze_columns(&self, input: &[f64], w: usize, h: usize, lo: &mut [f64], hi: &mut [f64]) {
        lo.fill(0.0);
        hi.fill(0.0);
        for i in 0..h / 2 {
            let lo_row = &mut lo[i * w..(i + 1) * w];
            let hi_row = &mut hi[i * w..(i + 1) * w];
            for k in 0..self.lowpass.len() {
                let src = (2 * i + k) % h;
                let src_row = &input[src * w..(src + 1) * w];
                let (a, d) = (self.lowpass[k], self.highpass[k]);
                for ((l, hv), s) in lo_row.iter_mut().zip(hi_row.iter_mut()).zip(src_row) {
                    *l += a * s;
                    *hv += d * s;
                }
            }
        }
    }

    /// Inverse of [`Self::analyze_columns`]: two `w`x`h` blocks to `w`x`2h`.
    fn synthesize_columns(&self, lo: &[f64], hi: &[f64], w: usize, h: usize, out: &mut [f64]) {
        out.fill(0.0);
        let full = 2 * h;
        for i in 0..h {
            let lo_row = &lo[i * w..(i + 1) * w];
            let hi_row = &hi[i * w..(i + 1) * w];
            for k in 0..self.lowpass.len() {
                let dst = (2 * i + k) % full;
                let (a, d) = (self.lowpass[k], self.highpass[k]);
                let out_row = &mut out[dst * w..(dst + 1) * w];
                for ((o, l), hv) in out_row.iter_mut().zip(lo_row).zip(hi_row) {
                    *o += a * l + d * hv;
                }
            }
        }
    }
}

fn wavelet_for(basis: BasisId, depth: usize, width: usize, height: usize) -> Result<Wavelet2d> {
    match basis {
        BasisId::Daubechies(k) => Wavelet2d::new(k, depth, width, height),
        BasisId::Dirac => Err(invalid("the Dirac basis has no wavelet transform")),
    }
}

/// Orthonormal 2D wavelet analysis of an image.
pub fn dwt_forward(img: &Image, basis: BasisId, depth: usize) -> Result<Vec<f64>> {
    let wt = wavelet_for(basis, depth, img.width(), img.height())?;
    let mut out = vec![0.0; img.len()];
    wt.forward(img.pixels(), &mut out);
    Ok(out)
}

/// Inverse of [`dwt_forward`].
pub fn dwt_inverse(coeffs: &[f64], basis: BasisId, depth: usize, width: usize, height: usize) -> Result<Image> {
    if coeffs.len() != width * height {
        return Err(invalid(format!(
            "{} coefficients do not match a {width}x{height} image",
            coeffs.len()
        )));
    }
    let wt = wavelet_for(basis, depth, width, height)?;
    let mut out = vec![0.0; coeffs.len()];
    wt.inverse(coeffs, &mut out);
    Image::new(width, height, out)
}
