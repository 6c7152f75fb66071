//! Reference solutions from a general-purpose conic solver, used as
//! independent oracles for the proximal operators and the constrained solver.

#![allow(dead_code)]

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus, SupportedConeT,
    ZeroConeT,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sara::linops::LinearMap;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Dense `out_dim x in_dim` matrix of a linear map, row-major.
pub fn dense<A: LinearMap + ?Sized>(op: &A) -> Vec<Vec<Complex64>> {
    let (n, m) = (op.in_dim(), op.out_dim());
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); n]; m];
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        for (i, v) in op.forward(&e).into_iter().enumerate() {
            rows[i][j] = v;
        }
    }
    rows
}

/// Sparse builder for `A` in `A x + s = b`.
struct Rows {
    ncols: usize,
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    fn new(ncols: usize) -> Self {
        Rows {
            ncols,
            i: vec![],
            j: vec![],
            v: vec![],
            b: vec![],
        }
    }

    /// Adds the row `s = b - sum(coef * x)`.
    fn push(&mut self, entries: &[(usize, f64)], b: f64) {
        let row = self.b.len();
        for &(j, v) in entries {
            if v != 0.0 {
                self.i.push(row);
                self.j.push(j);
                self.v.push(v);
            }
        }
        self.b.push(b);
    }

    fn matrix(&self) -> CscMatrix<f64> {
        CscMatrix::new_from_triplets(self.b.len(), self.ncols, self.i.clone(), self.j.clone(), self.v.clone())
    }
}

fn diag(n: usize, entries: &[(usize, f64)]) -> CscMatrix<f64> {
    let (i, v): (Vec<usize>, Vec<f64>) = entries.iter().copied().unzip();
    CscMatrix::new_from_triplets(n, n, i.clone(), i, v)
}

fn solve(p: CscMatrix<f64>, q: Vec<f64>, rows: Rows, cones: Vec<SupportedConeT<f64>>, tol: f64) -> Vec<f64> {
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(400)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .tol_ktratio(tol.sqrt())
        .build()
        .unwrap();
    let a = rows.matrix();
    let mut solver = DefaultSolver::new(&p, &q, &a, &rows.b, &cones, settings).unwrap();
    solver.solve();
    assert!(
        matches!(
            solver.solution.status,
            SolverStatus::Solved | SolverStatus::AlmostSolved
        ),
        "oracle failed: {:?}",
        solver.solution.status
    );
    solver.solution.x.clone()
}

/// `argmin_u tau sum_i w_i |(A u)_i| + |u - x|^2 / 2` over complex `u`, for a
/// real analysis matrix `A` (rows of `Psi^dagger`).
pub fn prox_oracle(x: &[Complex64], analysis: &[Vec<Complex64>], w: &[f64], tau: f64) -> Vec<Complex64> {
    let n = x.len();
    let d = analysis.len();
    // variables: [re u (n), im u (n), t (d)]
    let nv = 2 * n + d;
    let p = diag(nv, &(0..2 * n).map(|k| (k, 1.0)).collect::<Vec<_>>());
    let mut q: Vec<f64> = x.iter().map(|v| -v.re).chain(x.iter().map(|v| -v.im)).collect();
    q.extend(w.iter().map(|wi| tau * wi));
    let mut rows = Rows::new(nv);
    let mut cones = Vec::new();
    for (i, a) in analysis.iter().enumerate() {
        assert!(a.iter().all(|c| c.im == 0.0), "analysis operator must be real");
        rows.push(&[(2 * n + i, -1.0)], 0.0);
        rows.push(&a.iter().enumerate().map(|(j, c)| (j, -c.re)).collect::<Vec<_>>(), 0.0);
        rows.push(
            &a.iter().enumerate().map(|(j, c)| (n + j, -c.re)).collect::<Vec<_>>(),
            0.0,
        );
        cones.push(SecondOrderConeT(3));
    }
    let sol = solve(p, q, rows, cones, 1e-12);
    (0..n).map(|k| Complex64::new(sol[k], sol[n + k])).collect()
}

/// Pushes rows `s = (eps, y - Phi u)` as one second-order cone, with `u`
/// complex (`complex_u`) or real, starting at column 0.
fn ball_rows(
    rows: &mut Rows,
    cones: &mut Vec<SupportedConeT<f64>>,
    phi: &[Vec<Complex64>],
    y: &[Complex64],
    eps: f64,
    complex_u: bool,
) {
    let n = phi[0].len();
    rows.push(&[], eps);
    for (row, yi) in phi.iter().zip(y) {
        // Re(Phi u) = Re(Phi) Re(u) - Im(Phi) Im(u)
        let mut re: Vec<(usize, f64)> = row.iter().enumerate().map(|(j, c)| (j, c.re)).collect();
        let mut im: Vec<(usize, f64)> = row.iter().enumerate().map(|(j, c)| (j, c.im)).collect();
        if complex_u {
            re.extend(row.iter().enumerate().map(|(j, c)| (n + j, -c.im)));
            im.extend(row.iter().enumerate().map(|(j, c)| (n + j, c.re)));
        }
        rows.push(&re, yi.re);
        rows.push(&im, yi.im);
    }
    cones.push(SecondOrderConeT(2 * y.len() + 1));
}

/// `argmin_u |u - x|^2 / 2` subject to `|y - Phi u| <= eps`, complex `u`.
pub fn projection_oracle(x: &[Complex64], phi: &[Vec<Complex64>], y: &[Complex64], eps: f64) -> Vec<Complex64> {
    let n = x.len();
    let p = diag(2 * n, &(0..2 * n).map(|k| (k, 1.0)).collect::<Vec<_>>());
    let q: Vec<f64> = x.iter().map(|v| -v.re).chain(x.iter().map(|v| -v.im)).collect();
    let mut rows = Rows::new(2 * n);
    let mut cones = Vec::new();
    ball_rows(&mut rows, &mut cones, phi, y, eps, true);
    let sol = solve(p, q, rows, cones, 1e-10);
    let u = refine_projection(&sol, x, phi, y, eps);
    (0..n).map(|k| Complex64::new(u[k], u[n + k])).collect()
}

/// Dense solve with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Newton iterations on the KKT system of the ball projection,
/// `u - x + mu A^T (A u - b) = 0`, `|A u - b|^2 = eps^2`, in real form.
/// Interior-point solutions are only accurate to about the square root of
/// their duality gap; a few Newton steps bring them to machine precision.
fn refine_projection(start: &[f64], x: &[Complex64], phi: &[Vec<Complex64>], y: &[Complex64], eps: f64) -> Vec<f64> {
    let n = x.len();
    let m = y.len();
    let mut a = vec![vec![0.0; 2 * n]; 2 * m];
    for (i, row) in phi.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            a[i][j] = c.re;
            a[i][n + j] = -c.im;
            a[m + i][j] = c.im;
            a[m + i][n + j] = c.re;
        }
    }
    let b: Vec<f64> = y.iter().map(|v| v.re).chain(y.iter().map(|v| v.im)).collect();
    let v: Vec<f64> = x.iter().map(|c| c.re).chain(x.iter().map(|c| c.im)).collect();
    let dim = 2 * n;
    let mut u = start[..dim].to_vec();
    let residual = |u: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(&b)
            .map(|(row, bi)| row.iter().zip(u).map(|(p, q)| p * q).sum::<f64>() - bi)
            .collect()
    };
    let at = |r: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|j| a.iter().zip(r).map(|(row, ri)| row[j] * ri).sum())
            .collect()
    };
    let g = at(&residual(&u));
    let diff: Vec<f64> = u.iter().zip(&v).map(|(p, q)| p - q).collect();
    let mut mu = -diff.iter().zip(&g).map(|(p, q)| p * q).sum::<f64>() / g.iter().map(|q| q * q).sum::<f64>();
    let mut ata = vec![vec![0.0; dim]; dim];
    for row in &a {
        for i in 0..dim {
            for j in 0..dim {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    for _ in 0..8 {
        let r = residual(&u);
        let g = at(&r);
        let mut f: Vec<f64> = (0..dim).map(|i| u[i] - v[i] + mu * g[i]).collect();
        f.push(0.5 * (r.iter().map(|t| t * t).sum::<f64>() - eps * eps));
        let mut jac = vec![vec![0.0; dim + 1]; dim + 1];
        for i in 0..dim {
            for j in 0..dim {
                jac[i][j] = mu * ata[i][j] + if i == j { 1.0 } else { 0.0 };
            }
            jac[i][dim] = g[i];
            jac[dim][i] = g[i];
        }
        let step = gauss_solve(jac, f.iter().map(|t| -t).collect());
        for i in 0..dim {
            u[i] += step[i];
        }
        mu += step[dim];
    }
    u
}

/// Optimal value and minimizer of
/// `min sum_i w_i |(A u)_i|  s.t.  |y - Phi u| <= eps, u >= 0` over real `u`.
/// With `eps == 0` the ball becomes the equality `Phi u = y`.
pub fn weighted_l1_oracle(
    phi: &[Vec<Complex64>],
    y: &[Complex64],
    eps: f64,
    analysis: &[Vec<Complex64>],
    w: &[f64],
) -> (f64, Vec<f64>) {
    let n = phi[0].len();
    let d = analysis.len();
    let nv = n + d;
    let p = CscMatrix::zeros((nv, nv));
    let mut q = vec![0.0; n];
    q.extend_from_slice(w);
    let mut rows = Rows::new(nv);
    let mut cones = Vec::new();
    // u >= 0 and t_i -+ (A u)_i >= 0
    for j in 0..n {
        rows.push(&[(j, -1.0)], 0.0);
    }
    for (i, a) in analysis.iter().enumerate() {
        let mut plus = vec![(n + i, -1.0)];
        plus.extend(a.iter().enumerate().map(|(j, c)| (j, c.re)));
        rows.push(&plus, 0.0);
        let mut minus = vec![(n + i, -1.0)];
        minus.extend(a.iter().enumerate().map(|(j, c)| (j, -c.re)));
        rows.push(&minus, 0.0);
    }
    cones.push(NonnegativeConeT(n + 2 * d));
    if eps == 0.0 {
        for (row, yi) in phi.iter().zip(y) {
            rows.push(
                &row.iter().enumerate().map(|(j, c)| (j, c.re)).collect::<Vec<_>>(),
                yi.re,
            );
            rows.push(
                &row.iter().enumerate().map(|(j, c)| (j, c.im)).collect::<Vec<_>>(),
                yi.im,
            );
        }
        cones.push(ZeroConeT(2 * y.len()));
    } else {
        ball_rows(&mut rows, &mut cones, phi, y, eps, false);
    }
    let sol = solve(p, q, rows, cones, 1e-10);
    let u: Vec<f64> = sol[..n].to_vec();
    let value = analysis
        .iter()
        .zip(w)
        .map(|(a, wi)| wi * a.iter().zip(&u).map(|(c, uj)| c.re * uj).sum::<f64>().abs())
        .sum();
    (value, u)
}
