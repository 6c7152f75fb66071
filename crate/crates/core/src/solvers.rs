//! Proximal operators and the Douglas-Rachford solver for
//! `min |W Psi^dagger x|_1  s.t.  |y - Phi x|_2 <= epsilon,  x >= 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linops::{norm2, Dictionary};
use crate::sensing::{EigenProjector, SensingOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Diagonal of the weighting matrix; every entry in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn ones(len: usize) -> Self {
        WeightVector(vec![1.0; len])
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(bad) = weights.iter().find(|&&w| !(w > 0.0 && w <= 1.0)) {
            return Err(invalid(format!("weight {bad} outside (0, 1]")));
        }
        Ok(WeightVector(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Douglas-Rachford and inner-solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// Radius of the data-fidelity ball. Normally set from the noise model.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Stop once the relative change of the averaged iterate drops below this.
    pub rel_tol: f64,
    /// Proximal step, in units of [`data_scale`].
    pub dr_gamma: f64,
    /// Relaxation, in (0, 2).
    pub dr_lambda: f64,
    pub ball_proj_tol: f64,
    pub ball_proj_max_iters: usize,
    /// Relative tolerance of the inner dual iteration computing the analysis
    /// prox for redundant dictionaries.
    pub prox_tol: f64,
    pub prox_max_iters: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            epsilon: 0.0,
            max_iters: 500,
            rel_tol: 1e-4,
            dr_gamma: 0.01,
            dr_lambda: 1.0,
            ball_proj_tol: 1e-6,
            ball_proj_max_iters: 200,
            prox_tol: 1e-3,
            prox_max_iters: 2,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if self.max_iters == 0 || self.ball_proj_max_iters == 0 || self.prox_max_iters == 0 {
            return Err(invalid("iteration limits must be positive"));
        }
        if !(self.dr_lambda > 0.0 && self.dr_lambda < 2.0) {
            return Err(invalid(format!("dr_lambda must lie in (0, 2), got {}", self.dr_lambda)));
        }
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("dr_gamma", self.dr_gamma),
            ("ball_proj_tol", self.ball_proj_tol),
            ("prox_tol", self.prox_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `v max(|v| - t, 0) / |v|`, zero at `v = 0`.
pub fn soft_threshold(v: Complex64, t: f64) -> Complex64 {
    let mag = v.norm();
    if mag <= t || mag == 0.0 {
        ZERO
    } else {
        v * ((mag - t) / mag)
    }
}

/// Radial clip of `v` onto the disc of radius `t`.
fn clip(v: Complex64, t: f64) -> Complex64 {
    let mag = v.norm();
    if mag <= t {
        v
    } else {
        v * (t / mag)
    }
}

/// Real part, clamped at zero.
pub fn project_positive(x: &[Complex64]) -> Vec<Complex64> {
    x.iter().map(|v| Complex64::new(v.re.max(0.0), 0.0)).collect()
}

pub fn project_positive_real(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|v| v.re.max(0.0)).collect()
}

/// Proximal operator of `tau |W Psi^dagger .|_1`, warm-startable.
///
/// For a single orthonormal basis this is `Psi ST(Psi^dagger x)`. For a
/// redundant Parseval frame there is no closed form; it is computed by an
/// accelerated projected-gradient iteration on the dual
/// `min_{|v_i| <= tau w_i} |x - Psi v|^2 / 2`, the prox being `x - Psi v`.
/// The first dual step from `v = 0` reproduces `Psi ST(Psi^dagger x)`.
#[derive(Debug, Clone)]
pub struct AnalysisProx<'a> {
    dict: &'a Dictionary,
    weights: &'a [f64],
    dual: Vec<Complex64>,
}

impl<'a> AnalysisProx<'a> {
    pub fn new(dict: &'a Dictionary, weights: &'a WeightVector) -> Result<Self> {
        if weights.len() != dict.coeff_len() {
            return Err(invalid(format!(
                "weight vector has length {}, dictionary has {} coefficients",
                weights.len(),
                dict.coeff_len()
            )));
        }
        Ok(AnalysisProx {
            dict,
            weights: weights.as_slice(),
            dual: vec![ZERO; dict.coeff_len()],
        })
    }

    pub fn with_dual(mut self, dual: Option<&[Complex64]>) -> Self {
        if let Some(d) = dual.filter(|d| d.len() == self.dual.len()) {
            self.dual.copy_from_slice(d);
        }
        self
    }

    pub fn dual(&self) -> &[Complex64] {
        &self.dual
    }

    /// Returns the prox and the number of inner iterations spent.
    pub fn apply(&mut self, x: &[Complex64], tau: f64, tol: f64, max_iters: usize) -> (Vec<Complex64>, usize) {
        let dict = self.dict;
        let n = dict.signal_len();
        if tau == 0.0 {
            return (x.to_vec(), 0);
        }
        if dict.is_orthonormal() {
            let mut alpha = vec![ZERO; dict.coeff_len()];
            dict.analysis_into(x, &mut alpha);
            for (a, w) in alpha.iter_mut().zip(self.weights) {
                *a = soft_threshold(*a, tau * w);
            }
            let mut out = vec![ZERO; n];
            dict.synthesis_into(&alpha, &mut out);
            return (out, 1);
        }

        let bounds: Vec<f64> = self.weights.iter().map(|w| tau * w).collect();
        for (v, &b) in self.dual.iter_mut().zip(&bounds) {
            *v = clip(*v, b);
        }
        let mut v = std::mem::take(&mut self.dual);
        let mut s = vec![ZERO; n];
        dict.synthesis_into(&v, &mut s);
        let mut p: Vec<Complex64> = x.iter().zip(&s).map(|(a, b)| a - b).collect();
        let mut v_prev = v.clone();
        let mut s_prev = s.clone();
        let mut t = 1.0f64;
        let mut grad = vec![ZERO; dict.coeff_len()];
        let mut r = vec![ZERO; n];
        let mut iters = 0;
        while iters < max_iters {
            iters += 1;
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for ((ri, xi), (si, spi)) in r.iter_mut().zip(x).zip(s.iter().zip(&s_prev)) {
                *ri = xi - (si + (si - spi) * beta);
            }
            dict.analysis_into(&r, &mut grad);
            let mut restart = 0.0;
            let mut v_next = Vec::with_capacity(v.len());
            for (((vi, vpi), gi), &b) in v.iter().zip(&v_prev).zip(&grad).zip(&bounds) {
                let u = vi + (vi - vpi) * beta;
                let nv = clip(u + gi, b);
                restart += ((u - nv).conj() * (nv - vi)).re;
                v_next.push(nv);
            }
            v_prev = std::mem::replace(&mut v, v_next);
            s_prev = std::mem::replace(&mut s, vec![ZERO; n]);
            dict.synthesis_into(&v, &mut s);
            let p_next: Vec<Complex64> = x.iter().zip(&s).map(|(a, b)| a - b).collect();
            let change = relative_diff(&p_next, &p);
            p = p_next;
            t = if restart > 0.0 { 1.0 } else { t_next };
            if change <= tol {
                break;
            }
        }
        self.dual = v;
        (p, iters)
    }
}

fn relative_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale = norm2(a);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Exact prox of `tau |W Psi^dagger .|_1` at `x`, iterated to `tol`.
pub fn prox_weighted_l1_analysis(
    x: &[Complex64],
    dict: &Dictionary,
    weights: &WeightVector,
    tau: f64,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<Complex64>> {
    if x.len() != dict.signal_len() {
        return Err(invalid(format!(
            "prox input has length {}, expected {}",
            x.len(),
            dict.signal_len()
        )));
    }
    if !(tau >= 0.0) {
        return Err(invalid("prox step must be non-negative"));
    }
    let mut prox = AnalysisProx::new(dict, weights)?;
    Ok(prox.apply(x, tau, tol, max_iters).0)
}

/// Projection onto `{x : |y - Phi x|_2 <= epsilon}`, prepared for repeated use
/// with the same data.
#[derive(Debug)]
pub struct DataBall<'a> {
    op: &'a SensingOperator,
    y: &'a [Complex64],
    epsilon: f64,
    eigen: Option<(&'a EigenProjector, Vec<Complex64>)>,
}

impl<'a> DataBall<'a> {
    pub fn new(op: &'a SensingOperator, y: &'a [Complex64], epsilon: f64) -> Result<Self> {
        if y.len() != op.m() {
            return Err(invalid(format!(
                "data has length {}, operator has {} rows",
                y.len(),
                op.m()
            )));
        }
        if !(epsilon >= 0.0) {
            return Err(invalid("epsilon must be non-negative"));
        }
        let eigen = match op.tight_constant() {
            Some(_) => None,
            None => {
                let proj = op
                    .eigen_projector()?
                    .ok_or_else(|| invalid("non-tight operator without projector"))?;
                let rotated_y = proj.rotate(y);
                Some((proj, rotated_y))
            }
        };
        Ok(DataBall { op, y, epsilon, eigen })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn residual_norm(&self, x: &[Complex64]) -> f64 {
        let fx = self.op.apply(x);
        fx.iter()
            .zip(self.y)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn residual_norm_real(&self, x: &[f64]) -> f64 {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.residual_norm(&xc)
    }

    /// Projects `x`. For tight operators this is closed form; otherwise the
    /// Lagrange multiplier is found by a safeguarded Newton iteration on the
    /// secular equation in the eigenbasis of `Phi Phi^dagger`, stopping once
    /// the result satisfies `|y - Phi x'| <= epsilon (1 + tol)`.
    pub fn project(&self, x: &[Complex64], tol: f64, max_iters: usize) -> Result<Vec<Complex64>> {
        match &self.eigen {
            None => Ok(self.project_tight(x)),
            Some((proj, rotated_y)) => self.project_eigen(proj, rotated_y, x, tol, max_iters),
        }
    }

    fn project_tight(&self, x: &[Complex64]) -> Vec<Complex64> {
        let nu = self.op.tight_constant().unwrap_or(1.0);
        let fx = self.op.apply(x);
        let r: Vec<Complex64> = fx.iter().zip(self.y).map(|(a, b)| a - b).collect();
        let rn = norm2(&r);
        if rn <= self.epsilon {
            return x.to_vec();
        }
        // P(Phi x) - Phi x = (epsilon / |r| - 1) r
        let shrink = self.epsilon / rn - 1.0;
        let delta: Vec<Complex64> = r.iter().map(|v| v * (shrink / nu)).collect();
        let back = self.op.apply_adjoint(&delta);
        x.iter().zip(&back).map(|(a, b)| a + b).collect()
    }

    fn project_eigen(
        &self,
        proj: &EigenProjector,
        rotated_y: &[Complex64],
        x: &[Complex64],
        tol: f64,
        max_iters: usize,
    ) -> Result<Vec<Complex64>> {
        let m = self.op.m();
        let n = self.op.n();
        let apply = |v: &[Complex64]| gaussian_rows(&proj.rotated, m, n, v);
        let mut c = apply(x);
        c.iter_mut().zip(rotated_y).for_each(|(a, b)| *a -= b);
        let energy: Vec<f64> = c.iter().map(|v| v.norm_sqr()).collect();
        let cn = energy.iter().sum::<f64>().sqrt();
        if cn <= self.epsilon {
            return Ok(x.to_vec());
        }
        let lambda = &proj.eigenvalues;
        let update = |coef: Vec<Complex64>| -> Vec<Complex64> {
            let back = gaussian_rows_adjoint(&proj.rotated, m, n, &coef);
            x.iter().zip(&back).map(|(a, b)| a - b).collect()
        };
        if self.epsilon == 0.0 {
            if lambda.iter().any(|&l| l <= 0.0) {
                return Err(invalid(
                    "rank-deficient operator: equality constraint may be infeasible",
                ));
            }
            let coef = c.iter().zip(lambda).map(|(v, l)| v / l).collect();
            return Ok(update(coef));
        }
        let target = self.epsilon;
        let norm_at = |mu: f64| -> (f64, f64) {
            let mut phi = 0.0;
            let mut dphi = 0.0;
            for (e, l) in energy.iter().zip(lambda) {
                let den = 1.0 + mu * l.max(0.0);
                phi += e / (den * den);
                dphi -= 2.0 * l.max(0.0) * e / (den * den * den);
            }
            (phi, dphi)
        };
        // psi(mu) = 1/sqrt(phi) - 1/eps is increasing and concave; Newton from
        // the left stays feasible-from-outside and converges monotonically.
        let mut mu = 0.0f64;
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        let mut iters = 0;
        let mut last = f64::INFINITY;
        while iters < max_iters {
            iters += 1;
            let (phi, dphi) = norm_at(mu);
            let rn = phi.sqrt();
            last = rn;
            if rn <= target * (1.0 + tol) && rn >= target * (1.0 - tol) {
                break;
            }
            if rn > target {
                lo = mu;
            } else {
                hi = mu;
            }
            let psi = 1.0 / rn - 1.0 / target;
            let dpsi = -0.5 * dphi / (phi * rn);
            let mut next = if dpsi > 0.0 { mu - psi / dpsi } else { f64::NAN };
            if !(next.is_finite() && next > lo && next < hi) {
                next = if hi.is_finite() {
                    0.5 * (lo + hi)
                } else {
                    2.0 * lo.max(1e-12) + 1.0
                };
            }
            mu = next;
        }
        let converged = last <= target * (1.0 + tol);
        let coef: Vec<Complex64> = c
            .iter()
            .zip(lambda)
            .map(|(v, l)| v * (mu / (1.0 + mu * l.max(0.0))))
            .collect();
        let out = update(coef);
        if converged {
            Ok(out)
        } else {
            Err(Error::ProjectionNotConverged {
                iterations: iters,
                residual: (last - target) / target,
                last_iterate: out,
            })
        }
    }
}

fn gaussian_rows(a: &[Complex64], m: usize, n: usize, x: &[Complex64]) -> Vec<Complex64> {
    crate::sensing::dense_apply(a, m, n, x)
}

fn gaussian_rows_adjoint(a: &[Complex64], m: usize, n: usize, y: &[Complex64]) -> Vec<Complex64> {
    crate::sensing::dense_apply_adjoint(a, m, n, y)
}

/// Projection of `x` onto `{u : |y - Phi u|_2 <= epsilon}`.
pub fn project_l2_ball(
    x: &[Complex64],
    op: &SensingOperator,
    y: &[Complex64],
    epsilon: f64,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<Complex64>> {
    if x.len() != op.n() {
        return Err(invalid(format!(
            "input has length {}, operator has {} columns",
            x.len(),
            op.n()
        )));
    }
    DataBall::new(op, y, epsilon)?.project(x, tol, max_iters)
}

/// Reference magnitude for the Douglas-Rachford step: the largest analysis
/// coefficient of the back-projected data, `max |Psi^dagger Phi^dagger y|`.
pub fn data_scale(y: &[Complex64], op: &SensingOperator, dict: &Dictionary) -> f64 {
    let back = op.apply_adjoint(y);
    let mut alpha = vec![ZERO; dict.coeff_len()];
    dict.analysis_into(&back, &mut alpha);
    let s = alpha.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Outcome of one weighted problem.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x_hat: Vec<f64>,
    pub iterations: usize,
    /// `|W Psi^dagger x_hat|_1`
    pub objective: f64,
    /// `|y - Phi x_hat|_2`
    pub residual_norm: f64,
    pub converged: bool,
    /// `|z_k - z_(k-1)|` of the stacked splitting variables, per iteration.
    pub fixed_point_residuals: Vec<f64>,
    /// Inner iterations spent on analysis prox evaluations.
    pub prox_iterations: usize,
    /// Ball projections that hit their iteration cap.
    pub projection_failures: usize,
    pub(crate) l1_dual: Vec<Complex64>,
}

/// Starting point for [`solve_weighted_l1_warm`].
#[derive(Debug, Clone, Default)]
pub struct WarmStart {
    pub x: Vec<f64>,
    pub dual: Option<Vec<Complex64>>,
}

impl WarmStart {
    pub fn from_result(res: &SolverResult) -> Self {
        WarmStart {
            x: res.x_hat.clone(),
            dual: Some(res.l1_dual.clone()),
        }
    }
}

/// Weighted analysis-l1 objective `sum_i w_i |(Psi^dagger x)_i|`.
pub fn weighted_l1(x: &[f64], dict: &Dictionary, weights: &WeightVector) -> Result<f64> {
    let alpha = dict.analysis_real(x)?;
    Ok(alpha.iter().zip(weights.as_slice()).map(|(a, w)| w * a.norm()).sum())
}

/// Solves the weighted problem from the back-projection `Phi^dagger y`.
pub fn solve_weighted_l1(
    y: &[Complex64],
    op: &SensingOperator,
    dict: &Dictionary,
    weights: &WeightVector,
    params: &SolverParams,
) -> Result<SolverResult> {
    solve_weighted_l1_warm(y, op, dict, weights, params, None)
}

/// Product-space Douglas-Rachford over the weighted analysis-l1 norm, the
/// data-fidelity ball and the non-negative orthant.
///
/// Each iteration reflects the consensus average through the three proxes,
/// relaxes with `dr_lambda`, and re-averages. After the loop the averaged
/// iterate is pushed onto ball ∩ orthant by alternating projections so the
/// returned image is non-negative and (when `converged`) feasible.
pub fn solve_weighted_l1_warm(
    y: &[Complex64],
    op: &SensingOperator,
    dict: &Dictionary,
    weights: &WeightVector,
    params: &SolverParams,
    warm: Option<&WarmStart>,
) -> Result<SolverResult> {
    params.validate()?;
    let n = op.n();
    if dict.signal_len() != n {
        return Err(invalid(format!(
            "dictionary acts on {} pixels, operator on {n}",
            dict.signal_len()
        )));
    }
    let ball = DataBall::new(op, y, params.epsilon)?;
    let mut l1 = AnalysisProx::new(dict, weights)?.with_dual(warm.and_then(|w| w.dual.as_deref()));
    let gamma = params.dr_gamma * data_scale(y, op, dict);
    let lambda = params.dr_lambda;

    let start: Vec<Complex64> = match warm {
        Some(w) if w.x.len() == n => w.x.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        Some(w) => {
            return Err(invalid(format!("warm start has length {}, expected {n}", w.x.len())));
        }
        None => op.apply_adjoint(y),
    };
    let mut z = [start.clone(), start.clone(), start.clone()];
    let mut avg = start;
    let mut fixed_point_residuals = Vec::new();
    let mut prox_iterations = 0;
    let mut projection_failures = 0;
    let mut iterations = 0;
    let mut dr_converged = false;

    let mut reflected = [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]];
    while iterations < params.max_iters {
        iterations += 1;
        for (r, zi) in reflected.iter_mut().zip(&z) {
            for ((ri, a), b) in r.iter_mut().zip(&avg).zip(zi) {
                *ri = 2.0 * a - b;
            }
        }
        let (p1, p23) = rayon::join(
            || l1.apply(&reflected[0], gamma, params.prox_tol, params.prox_max_iters),
            || {
                let p2 = ball.project(&reflected[1], params.ball_proj_tol, params.ball_proj_max_iters);
                (p2, project_positive(&reflected[2]))
            },
        );
        let (p1, inner) = p1;
        prox_iterations += inner;
        let p2 = match p23.0 {
            Ok(p) => p,
            Err(Error::ProjectionNotConverged { last_iterate, .. }) => {
                projection_failures += 1;
                last_iterate
            }
            Err(e) => return Err(e),
        };
        let proxes = [p1, p2, p23.1];

        let mut step_sq = 0.0;
        for (zi, pi) in z.iter_mut().zip(&proxes) {
            for ((zv, pv), a) in zi.iter_mut().zip(pi).zip(&avg) {
                let step = (pv - a) * lambda;
                step_sq += step.norm_sqr();
                *zv += step;
            }
        }
        fixed_point_residuals.push(step_sq.sqrt());
        let next: Vec<Complex64> = (0..n).map(|i| (z[0][i] + z[1][i] + z[2][i]) / 3.0).collect();
        let change = relative_diff(&next, &avg);
        avg = next;
        if change <= params.rel_tol {
            dr_converged = true;
            break;
        }
    }

    let (x_hat, residual_norm, feasible) = polish(&avg, &ball, params);
    let objective = weighted_l1(&x_hat, dict, weights)?;
    Ok(SolverResult {
        x_hat,
        iterations,
        objective,
        residual_norm,
        converged: dr_converged && feasible,
        fixed_point_residuals,
        prox_iterations,
        projection_failures,
        l1_dual: l1.dual().to_vec(),
    })
}

/// Numerical slack added to the feasibility test so that `epsilon = 0`
/// problems can be declared feasible.
fn feasibility_bound(epsilon: f64, y: &[Complex64]) -> f64 {
    epsilon * (1.0 + 1e-3) + 1e-12 * norm2(y)
}

const POLISH_MAX_ITERS: usize = 500;

/// Alternating projections onto ball and orthant, ending on the orthant.
fn polish(avg: &[Complex64], ball: &DataBall<'_>, params: &SolverParams) -> (Vec<f64>, f64, bool) {
    let bound = feasibility_bound(ball.epsilon(), ball.y);
    let mut x = project_positive(avg);
    let mut res = ball.residual_norm(&x);
    let mut rounds = 0;
    while res > bound && rounds < POLISH_MAX_ITERS {
        rounds += 1;
        let p = match ball.project(&x, params.ball_proj_tol, params.ball_proj_max_iters) {
            Ok(p) => p,
            Err(Error::ProjectionNotConverged { last_iterate, .. }) => last_iterate,
            Err(_) => break,
        };
        x = project_positive(&p);
        res = ball.residual_norm(&x);
    }
    (x.iter().map(|v| v.re).collect(), res, res <= bound)
}
