//! Linear operators and the multi-basis wavelet dictionary.

mod dictionary;
pub mod filters;
mod wavelet;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use dictionary::{average_l0, Dictionary};
pub use wavelet::{dwt_forward, dwt_inverse, Wavelet2d};

/// A real image stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid("image dimensions must be positive"));
        }
        if pixels.len() != width * height {
            return Err(invalid(format!(
                "pixel buffer has {} entries, expected {}x{}={}",
                pixels.len(),
                width,
                height,
                width * height
            )));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(invalid("image contains non-finite pixels"));
        }
        Ok(Image { width, height, pixels })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            pixels: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.pixels.iter().all(|&p| p >= 0.0)
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.pixels.iter().map(|&p| Complex64::new(p, 0.0)).collect()
    }

    /// Sub-image with top-left corner at (`row`, `col`).
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<Image> {
        if row + height > self.height || col + width > self.width {
            return Err(invalid(format!(
                "crop {width}x{height} at ({row},{col}) exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for r in row..row + height {
            let start = r * self.width + col;
            pixels.extend_from_slice(&self.pixels[start..start + width]);
        }
        Image::new(width, height, pixels)
    }

    /// Grow to `width`x`height` by replicating the last row and column.
    pub fn pad_edge(&self, width: usize, height: usize) -> Result<Image> {
        if width < self.width || height < self.height {
            return Err(invalid("padding target smaller than image"));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            let sr = r.min(self.height - 1);
            for c in 0..width {
                pixels.push(self.get(sr, c.min(self.width - 1)));
            }
        }
        Image::new(width, height, pixels)
    }

    /// Average non-overlapping `factor`x`factor` blocks.
    pub fn downsample(&self, factor: usize) -> Result<Image> {
        if factor == 0 || !self.width.is_multiple_of(factor) || !self.height.is_multiple_of(factor) {
            return Err(invalid(format!("cannot downsample by {factor}")));
        }
        let (w, h) = (self.width / factor, self.height / factor);
        let norm = 1.0 / (factor * factor) as f64;
        let mut pixels = vec![0.0; w * h];
        for r in 0..h {
            for c in 0..w {
                let mut acc = 0.0;
                for dr in 0..factor {
                    for dc in 0..factor {
                        acc += self.get(r * factor + dr, c * factor + dc);
                    }
                }
                pixels[r * w + c] = acc * norm;
            }
        }
        Image::new(w, h, pixels)
    }
}

/// One orthonormal basis of the sparsity dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BasisId {
    /// Daubechies wavelet with the given number of vanishing moments (1..=8).
    Daubechies(u8),
    Dirac,
}

impl BasisId {
    pub fn daubechies(order: u8) -> Result<Self> {
        if (1..=8).contains(&order) {
            Ok(BasisId::Daubechies(order))
        } else {
            Err(invalid(format!("Daubechies order {order} outside 1..=8")))
        }
    }

    /// Db1, Db2, ..., Db`count`.
    pub fn daubechies_family(count: u8) -> Result<Vec<BasisId>> {
        (1..=count).map(BasisId::daubechies).collect()
    }

    pub fn is_wavelet(&self) -> bool {
        matches!(self, BasisId::Daubechies(_))
    }
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisId::Daubechies(k) => write!(f, "db{k}"),
            BasisId::Dirac => write!(f, "dirac"),
        }
    }
}

impl FromStr for BasisId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "dirac" {
            return Ok(BasisId::Dirac);
        }
        match lower.strip_prefix("db").map(str::parse::<u8>) {
            Some(Ok(k @ 1..=8)) => Ok(BasisId::Daubechies(k)),
            _ => Err(invalid(format!("unknown basis '{s}', expected db1 to db8 or dirac"))),
        }
    }
}

impl TryFrom<String> for BasisId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BasisId> for String {
    fn from(b: BasisId) -> String {
        b.to_string()
    }
}

/// Parse a basis list such as `db1-db8,dirac` or `db1,db4`.
pub fn parse_basis_list(spec: &str) -> Result<Vec<BasisId>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once('-') {
            let (lo, hi) = match (a.parse()?, b.parse()?) {
                (BasisId::Daubechies(lo), BasisId::Daubechies(hi)) if lo <= hi => (lo, hi),
                _ => return Err(invalid(format!("bad basis range '{part}'"))),
            };
            out.extend((lo..=hi).map(BasisId::Daubechies));
        } else {
            out.push(part.parse()?);
        }
    }
    if out.is_empty() {
        return Err(invalid("empty basis list"));
    }
    Ok(out)
}

/// A linear map between complex vector spaces together with its adjoint.
pub trait LinearMap {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn forward(&self, input: &[Complex64]) -> Vec<Complex64>;
    fn adjoint(&self, input: &[Complex64]) -> Vec<Complex64>;
}

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm2_real(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `|<Au, v> - <u, A*v>| / (|u| |v|)` for one pair of vectors.
pub fn adjoint_mismatch<A: LinearMap + ?Sized>(op: &A, u: &[Complex64], v: &[Complex64]) -> f64 {
    let lhs = dot(&op.forward(u), v);
    let rhs = dot(u, &op.adjoint(v));
    (lhs - rhs).norm() / (norm2(u) * norm2(v)).max(f64::MIN_POSITIVE)
}
