//! Independent conic solver for the weighted SINR-constrained problem.
//!
//! Since the SINR is phase invariant, user `k`'s constraint can be written
//! as the second-order cone
//!
//!   sqrt(1 + 1/gamma_k) Re(h_k^H w_k) >= || (h_k^H w_1, ..., h_k^H w_K, sigma_k) ||
//!
//! The problem `min sum_k w_k^H (c2 I + D) w_k` over these cones is solved
//! here in real coordinates with a primal log-barrier method and damped
//! Newton steps, starting from scaled zero-forcing beams. None of the
//! closed-form kernels are used, so the result is an independent check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{CVector, QosTargets, C64};
use crate::qos::DiagLoad;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub w: Vec<CVector>,
    /// `sum_k w_k^H (c2 I + D) w_k`
    pub objective: f64,
    pub newton_steps: usize,
}

/// One second-order cone `u0 >= ||u[1..]||` with `u = G x + g`.
struct Cone {
    g_mat: DMatrix<f64>,
    offset: DVector<f64>,
}

impl Cone {
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.g_mat * x + &self.offset
    }
}

fn slack(u: &DVector<f64>) -> f64 {
    u[0] * u[0] - u.rows(1, u.len() - 1).norm_squared()
}

struct Problem {
    weights: DVector<f64>,
    cones: Vec<Cone>,
}

impl Problem {
    fn build(h: &[CVector], qos: &QosTargets, c2: f64, d: &DiagLoad) -> Self {
        let nt = d.len();
        let k = h.len();
        let n = 2 * nt * k;
        let idx = |j: usize, i: usize| 2 * (j * nt + i);

        let weights = DVector::from_fn(n, |r, _| c2 + d.as_slice()[(r / 2) % nt]);
        let cones = (0..k)
            .map(|u| {
                let rows = 2 * k + 2;
                let mut g_mat = DMatrix::zeros(rows, n);
                let scale = (1.0 + 1.0 / qos.gamma[u]).sqrt();
                // Re/Im of h_u^H w_j = sum_i conj(h_u[i]) w_j[i].
                for j in 0..k {
                    for (i, hui) in h[u].iter().enumerate() {
                        let (hr, hi) = (hui.re, hui.im);
                        let c = idx(j, i);
                        g_mat[(1 + 2 * j, c)] = hr;
                        g_mat[(1 + 2 * j, c + 1)] = hi;
                        g_mat[(2 + 2 * j, c)] = -hi;
                        g_mat[(2 + 2 * j, c + 1)] = hr;
                        if j == u {
                            g_mat[(0, c)] = scale * hr;
                            g_mat[(0, c + 1)] = scale * hi;
                        }
                    }
                }
                let mut offset = DVector::zeros(rows);
                offset[rows - 1] = qos.sigma2[u].sqrt();
                Cone { g_mat, offset }
            })
            .collect();
        Self { weights, cones }
    }

    fn objective(&self, x: &DVector<f64>) -> f64 {
        x.iter().zip(self.weights.iter()).map(|(v, a)| a * v * v).sum()
    }

    /// Barrier value, or `None` outside the cone interiors.
    fn barrier(&self, x: &DVector<f64>, tau: f64) -> Option<f64> {
        let mut f = tau * self.objective(x);
        for cone in &self.cones {
            let u = cone.eval(x);
            let s = slack(&u);
            if !(s > 0.0 && u[0] > 0.0) {
                return None;
            }
            f -= s.ln();
        }
        Some(f)
    }

    fn gradient_hessian(&self, x: &DVector<f64>, tau: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let mut grad = DVector::from_fn(n, |r, _| 2.0 * tau * self.weights[r] * x[r]);
        let mut hess = DMatrix::from_diagonal(&self.weights.map(|a| 2.0 * tau * a));
        for cone in &self.cones {
            let u = cone.eval(x);
            let s = slack(&u);
            let mut ju = u.clone();
            for v in ju.iter_mut().skip(1) {
                *v = -*v;
            }
            // d/du of -ln(u0^2 - |u_bar|^2).
            let gu = &ju * (-2.0 / s);
            let mut hu = &ju * ju.transpose() * (4.0 / (s * s));
            hu[(0, 0)] -= 2.0 / s;
            for r in 1..u.len() {
                hu[(r, r)] += 2.0 / s;
            }
            grad += cone.g_mat.transpose() * gu;
            hess += cone.g_mat.transpose() * hu * &cone.g_mat;
        }
        (grad, hess)
    }
}

fn unpack(x: &DVector<f64>, nt: usize, k: usize) -> Vec<CVector> {
    (0..k)
        .map(|j| CVector::from_fn(nt, |i, _| C64::new(x[2 * (j * nt + i)], x[2 * (j * nt + i) + 1])))
        .collect()
}

/// Zero-forcing beams scaled to lie strictly inside every cone.
fn initial_point(h: &[CVector], qos: &QosTargets) -> Result<DVector<f64>> {
    let nt = h[0].len();
    let k = h.len();
    let hmat = DMatrix::from_fn(nt, k, |i, u| h[u][i]);
    let gram = hmat.adjoint() * &hmat;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::OracleNoConvergence("channel Gram matrix is singular".into()))?;
    let zf = &hmat * inv;
    let mut x = DVector::zeros(2 * nt * k);
    for j in 0..k {
        let alpha = 2.0 * (qos.gamma[j] * qos.sigma2[j]).sqrt();
        for i in 0..nt {
            let z = zf[(i, j)] * alpha;
            x[2 * (j * nt + i)] = z.re;
            x[2 * (j * nt + i) + 1] = z.im;
        }
    }
    Ok(x)
}

const REL_GAP: f64 = 1e-9;
const MAX_NEWTON: usize = 500;
const MAX_OUTER: usize = 80;

/// Minimizes `sum_k w_k^H (c2 I + D) w_k` subject to the SINR targets with
/// a log-barrier interior-point method. Meant for small instances.
pub fn oracle_solve_weighted(h: &[CVector], qos: &QosTargets, c2: f64, d: &DiagLoad) -> Result<OracleSolution> {
    let nt = d.len();
    let k = h.len();
    if k == 0 || h.iter().any(|v| v.len() != nt) || qos.len() != k {
        return Err(Error::DimensionMismatch("oracle inputs disagree".into()));
    }
    let prob = Problem::build(h, qos, c2, d);
    let mut x = initial_point(h, qos)?;
    // Each cone barrier has degree 2.
    let degree = 2.0 * k as f64;
    let mut tau = degree / prob.objective(&x).max(1e-12);
    let mut steps = 0;

    for _ in 0..MAX_OUTER {
        for _ in 0..MAX_NEWTON {
            let (grad, hess) = prob.gradient_hessian(&x, tau);
            let neg = -&grad;
            let dx = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&neg),
                None => hess
                    .lu()
                    .solve(&neg)
                    .ok_or_else(|| Error::OracleNoConvergence("singular Newton system".into()))?,
            };
            let decrement = -grad.dot(&dx);
            if decrement / 2.0 <= 1e-12 {
                break;
            }
            let f0 = prob.barrier(&x, tau).expect("iterate stays interior");
            let mut t = 1.0;
            loop {
                let trial = &x + &dx * t;
                if let Some(f) = prob.barrier(&trial, tau) {
                    if f <= f0 - 0.25 * t * decrement {
                        x = trial;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-14 {
                    break;
                }
            }
            steps += 1;
            if t < 1e-14 {
                break;
            }
        }
        let obj = prob.objective(&x);
        if degree / tau <= REL_GAP * obj {
            return Ok(OracleSolution {
                w: unpack(&x, nt, k),
                objective: obj,
                newton_steps: steps,
            });
        }
        tau *= 8.0;
    }
    Err(Error::OracleNoConvergence(format!(
        "duality gap above {REL_GAP:e} after {MAX_OUTER} barrier updates"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_user_matches_matched_filter_power() {
        let h = [CVector::from_vec(vec![C64::new(1.0, 1.0), C64::new(0.5, -0.5), C64::new(2.0, 0.0)])];
        let qos = QosTargets::uniform(1, 2.0, 0.5);
        let sol = oracle_solve_weighted(&h, &qos, 1.0, &DiagLoad::zeros(3)).unwrap();
        let expected = 2.0 * 0.5 / h[0].norm_squared();
        assert!((sol.objective - expected).abs() < 1e-6 * expected);
    }
}
