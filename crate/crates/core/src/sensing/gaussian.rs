//! Dense complex Gaussian sensing matrix and its exact l2-ball projector.

use std::sync::OnceLock;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};

/// Default cap on the memory a dense operator (plus projector) may use.
pub const DEFAULT_DENSE_BUDGET_BYTES: usize = 2 << 30;

/// Row-major `m`x`n` matrix with i.i.d. complex Gaussian entries of
/// variance `1/m`.
#[derive(Debug)]
pub struct GaussianMatrix {
    m: usize,
    n: usize,
    entries: Vec<Complex64>,
    projector: OnceLock<std::result::Result<EigenProjector, String>>,
}

/// Eigendecomposition `Phi Phi^dagger = U diag(lambda) U^dagger`, stored as
/// the eigenvalues and the rotated matrix `U^dagger Phi` (row-major).
#[derive(Debug)]
pub(crate) struct EigenProjector {
    pub eigenvalues: Vec<f64>,
    pub rotated: Vec<Complex64>,
    pub basis: Mat<Complex64>,
}

pub(crate) fn dense_bytes(m: usize, n: usize) -> usize {
    let c = std::mem::size_of::<Complex64>();
    // entries + rotated copy + Gram/eigenvector matrices
    (2 * m * n + 2 * m * m).saturating_mul(c)
}

impl GaussianMatrix {
    pub fn random(m: usize, n: usize, seed: u64, budget_bytes: usize) -> Result<Self> {
        if m == 0 || m > n {
            return Err(invalid(format!("need 1 <= M <= N, got M={m}, N={n}")));
        }
        let need = dense_bytes(m, n);
        if need > budget_bytes {
            return Err(Error::Resource(format!(
                "dense {m}x{n} Gaussian operator needs {need} bytes, budget is {budget_bytes}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, (0.5 / m as f64).sqrt()).expect("positive std");
        let entries = (0..m * n)
            .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        Ok(GaussianMatrix {
            m,
            n,
            entries,
            projector: OnceLock::new(),
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        row_major_apply(&self.entries, self.m, self.n, x)
    }

    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        row_major_apply_adjoint(&self.entries, self.m, self.n, y)
    }

    pub(crate) fn projector(&self) -> Result<&EigenProjector> {
        self.projector
            .get_or_init(|| EigenProjector::new(&self.entries, self.m, self.n))
            .as_ref()
            .map_err(|e| invalid(e.clone()))
    }
}

pub(crate) fn row_major_apply(a: &[Complex64], m: usize, n: usize, x: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(x.len(), n);
    (0..m)
        .map(|r| {
            let row = &a[r * n..(r + 1) * n];
            let (mut re, mut im) = (0.0, 0.0);
            for (p, q) in row.iter().zip(x) {
                re += p.re * q.re - p.im * q.im;
                im += p.re * q.im + p.im * q.re;
            }
            Complex64::new(re, im)
        })
        .collect()
}

pub(crate) fn row_major_apply_adjoint(a: &[Complex64], m: usize, n: usize, y: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(y.len(), m);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (r, yr) in y.iter().enumerate() {
        let row = &a[r * n..(r + 1) * n];
        for (o, p) in out.iter_mut().zip(row) {
            // conj(p) * yr
            o.re += p.re * yr.re + p.im * yr.im;
            o.im += p.re * yr.im - p.im * yr.re;
        }
    }
    out
}

impl EigenProjector {
    fn new(entries: &[Complex64], m: usize, n: usize) -> std::result::Result<Self, String> {
        let phi = Mat::<Complex64>::from_fn(m, n, |i, j| entries[i * n + j]);
        let mut gram = Mat::<Complex64>::zeros(m, m);
        matmul(
            gram.as_mut(),
            Accum::Replace,
            phi.as_ref(),
            phi.adjoint(),
            Complex64::new(1.0, 0.0),
            Par::Seq,
        );
        faer::set_global_parallelism(Par::Seq);
        let evd = gram
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| format!("eigendecomposition failed: {e:?}"))?;
        let eigenvalues: Vec<f64> = (0..m).map(|i| evd.S().column_vector()[i].re).collect();
        let basis = evd.U().to_owned();
        let mut rot = Mat::<Complex64>::zeros(m, n);
        matmul(
            rot.as_mut(),
            Accum::Replace,
            basis.adjoint(),
            phi.as_ref(),
            Complex64::new(1.0, 0.0),
            Par::Seq,
        );
        let mut rotated = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                rotated.push(rot[(i, j)]);
            }
        }
        Ok(EigenProjector {
            eigenvalues,
            rotated,
            basis,
        })
    }

    /// `U^dagger v` for a vector in measurement space.
    pub fn rotate(&self, v: &[Complex64]) -> Vec<Complex64> {
        let m = v.len();
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (j, o) in out.iter_mut().enumerate() {
            let col = self.basis.col(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                acc += col[i].conj() * vi;
            }
            *o = acc;
        }
        out
    }
}
