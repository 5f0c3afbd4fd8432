//! Closed-form KKT kernels for one narrowband SINR-constrained problem
//!
//! Every solver in the crate reduces to the same weighted problem
//!
//!   min  sum_k w_k^H (c2 I + D) w_k   s.t.  SINR_k >= gamma_k
//!
//! where `D` is a nonnegative diagonal loading (the antenna sparsity duals,
//! plus the per-antenna cap duals when caps are enforced). Its KKT system is
//! solved in three steps:
//!
//! 1. the SINR duals are the fixed point of
//!    `1/nu_k = (1 + 1/gamma_k) h_k^H (c2 I + D + sum_j nu_j h_j h_j^H)^{-1} h_k`;
//! 2. the beam directions are `u_k ~ (c2 I + D + sum_j nu_j h_j h_j^H)^{-1} h_k`,
//!    which by the matrix inversion lemma is collinear with the solution of
//!    the per-user eigen equation;
//! 3. the powers make every SINR constraint tight, which is a K x K linear
//!    system.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{CVector, QosTargets, C64};

/// Nonnegative diagonal loading added to `c2 I` in the loaded covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagLoad(Vec<f64>);

impl DiagLoad {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if let Some(v) = d.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidPowerModel(format!(
                "diagonal loading must be finite and >= 0, got {v}"
            )));
        }
        Ok(Self(d))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub nu: Vec<f64>,
    /// Number of dual updates applied.
    pub iterations: usize,
    /// `max_k |nu_k RHS_k(nu) - 1|` at the returned `nu`.
    pub residual: f64,
}

/// Output of [`solve_weighted`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSolution {
    pub w: Vec<CVector>,
    pub directions: Vec<CVector>,
    pub powers: Vec<f64>,
    pub nu: Vec<f64>,
    pub fixed_point_iters: usize,
    pub fixed_point_residual: f64,
}

fn check_dims(h: &[CVector], per_user: &[f64], d: &DiagLoad) -> Result<usize> {
    let n = h.first().map(|v| v.len()).unwrap_or(0);
    if per_user.len() != h.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} per-user values for {} users",
            per_user.len(),
            h.len()
        )));
    }
    if d.len() != n || h.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "diagonal load of length {} for {n} antennas",
            d.len()
        )));
    }
    Ok(n)
}

/// `c2 I + D + sum_j nu_j h_j h_j^H`.
pub fn loaded_covariance(h: &[CVector], nu: &[f64], c2: f64, d: &DiagLoad) -> DMatrix<C64> {
    let n = d.len();
    let mut c = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        d.as_slice().iter().map(|&di| C64::new(c2 + di, 0.0)),
    ));
    for (hj, &nuj) in h.iter().zip(nu) {
        if nuj != 0.0 {
            c.gerc(C64::new(nuj, 0.0), hj, hj, C64::new(1.0, 0.0));
        }
    }
    c
}

/// Solves `C x_k = h_k` for every user with one Cholesky factorization.
fn solve_loaded(h: &[CVector], nu: &[f64], c2: f64, d: &DiagLoad) -> Result<Vec<CVector>> {
    let chol = loaded_covariance(h, nu, c2, d)
        .cholesky()
        .ok_or(Error::SingularSystem)?;
    Ok(h.iter().map(|hk| chol.solve(hk)).collect())
}

fn quad_forms(h: &[CVector], nu: &[f64], c2: f64, d: &DiagLoad) -> Result<Vec<f64>> {
    let x = solve_loaded(h, nu, c2, d)?;
    Ok(h.iter().zip(&x).map(|(hk, xk)| hk.dotc(xk).re).collect())
}

fn residual_of(nu: &[f64], gamma: &[f64], q: &[f64]) -> f64 {
    nu.iter()
        .zip(gamma)
        .zip(q)
        .map(|((n, g), qk)| (n * (1.0 + 1.0 / g) * qk - 1.0).abs())
        .fold(0.0, f64::max)
}

/// One undamped sweep `nu_k <- 1 / ((1 + 1/gamma_k) h_k^H C(nu)^{-1} h_k)`.
pub fn nu_step(h: &[CVector], gamma: &[f64], c2: f64, d: &DiagLoad, nu: &[f64]) -> Result<Vec<f64>> {
    check_dims(h, gamma, d)?;
    let q = quad_forms(h, nu, c2, d)?;
    Ok(q.iter()
        .zip(gamma)
        .map(|(qk, g)| 1.0 / ((1.0 + 1.0 / g) * qk))
        .collect())
}

/// Fixed-point residual `max_k |nu_k RHS_k(nu) - 1|`.
pub fn fixed_point_residual(
    h: &[CVector],
    gamma: &[f64],
    c2: f64,
    d: &DiagLoad,
    nu: &[f64],
) -> Result<f64> {
    check_dims(h, gamma, d)?;
    Ok(residual_of(nu, gamma, &quad_forms(h, nu, c2, d)?))
}

/// Solves the SINR dual fixed point starting from `nu = 0`.
pub fn nu_fixed_point(
    h: &[CVector],
    gamma: &[f64],
    c2: f64,
    d: &DiagLoad,
    opts: &FixedPointOptions,
) -> Result<FixedPoint> {
    nu_fixed_point_from(h, gamma, c2, d, opts, &vec![0.0; h.len()])
}

/// Solves the SINR dual fixed point from an arbitrary nonnegative start.
///
/// The map is a standard interference function, so the iteration converges
/// to the same fixed point from any start; from zero the iterates increase
/// monotonically.
pub fn nu_fixed_point_from(
    h: &[CVector],
    gamma: &[f64],
    c2: f64,
    d: &DiagLoad,
    opts: &FixedPointOptions,
    init: &[f64],
) -> Result<FixedPoint> {
    check_dims(h, gamma, d)?;
    check_dims(h, init, d)?;
    let mut nu = init.to_vec();
    let mut residual = f64::INFINITY;
    for iterations in 0..=opts.max_iter {
        let q = quad_forms(h, &nu, c2, d)?;
        residual = residual_of(&nu, gamma, &q);
        if residual <= opts.tol {
            return Ok(FixedPoint {
                nu,
                iterations,
                residual,
            });
        }
        if iterations == opts.max_iter {
            break;
        }
        for ((n, qk), g) in nu.iter_mut().zip(&q).zip(gamma) {
            *n = 1.0 / ((1.0 + 1.0 / g) * qk);
        }
        if nu.iter().any(|n| !n.is_finite()) {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Unit-norm beam directions `u_k ~ C(nu)^{-1} h_k` with `h_k^H u_k` real
/// and nonnegative.
pub fn beam_directions(h: &[CVector], nu: &[f64], c2: f64, d: &DiagLoad) -> Result<Vec<CVector>> {
    check_dims(h, nu, d)?;
    let x = solve_loaded(h, nu, c2, d)?;
    x.into_iter()
        .zip(h)
        .map(|(xk, hk)| {
            let a = hk.dotc(&xk);
            let norm = xk.norm();
            if !(norm > 0.0 && norm.is_finite() && a.norm() > 0.0) {
                return Err(Error::SingularSystem);
            }
            let phase = a.conj() / a.norm();
            Ok(xk * (phase / C64::new(norm, 0.0)))
        })
        .collect()
}

/// Per-user residual of the stationarity (eigen) condition
/// `c2 u_k = (nu_k/gamma_k h_k h_k^H - sum_{j != k} nu_j h_j h_j^H - D) u_k`,
/// i.e. `|| C(nu) u_k - nu_k (1 + 1/gamma_k) h_k h_k^H u_k ||`.
pub fn eigen_residual(
    h: &[CVector],
    gamma: &[f64],
    nu: &[f64],
    c2: f64,
    d: &DiagLoad,
    u: &[CVector],
) -> Vec<f64> {
    let c = loaded_covariance(h, nu, c2, d);
    u.iter()
        .enumerate()
        .map(|(k, uk)| {
            let hu = h[k].dotc(uk);
            let scale = C64::new(nu[k] * (1.0 + 1.0 / gamma[k]), 0.0) * hu;
            (&c * uk - &h[k] * scale).norm()
        })
        .collect()
}

const NEGATIVE_POWER_TOL: f64 = 1e-10;

/// Powers making every SINR constraint tight for fixed unit directions.
///
/// Solves `M p = sigma2` with `M_kk = |h_k^H u_k|^2 / gamma_k` and
/// `M_ki = -|h_k^H u_i|^2`.
pub fn power_loading(h: &[CVector], u: &[CVector], gamma: &[f64], sigma2: &[f64]) -> Result<Vec<f64>> {
    let k = h.len();
    if u.len() != k || gamma.len() != k || sigma2.len() != k {
        return Err(Error::DimensionMismatch(
            "power loading inputs disagree on the user count".into(),
        ));
    }
    let m = DMatrix::from_fn(k, k, |r, c| {
        let g = h[r].dotc(&u[c]).norm_sqr();
        if r == c {
            g / gamma[r]
        } else {
            -g
        }
    });
    let b = DVector::from_column_slice(sigma2);
    let p = m.lu().solve(&b).ok_or(Error::SingularLoading)?;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularLoading);
    }
    p.iter()
        .enumerate()
        .map(|(user, &power)| {
            if power < -NEGATIVE_POWER_TOL {
                Err(Error::NegativePower { user, power })
            } else {
                Ok(power.max(0.0))
            }
        })
        .collect()
}

/// `|h_k^H w_k|^2 / (sum_{i != k} |h_k^H w_i|^2 + sigma_k^2)` for every user.
pub fn sinr_of(w: &[CVector], h: &[CVector], sigma2: &[f64]) -> Vec<f64> {
    h.iter()
        .enumerate()
        .map(|(k, hk)| {
            let mut signal = 0.0;
            let mut interference = 0.0;
            for (i, wi) in w.iter().enumerate() {
                let g = hk.dotc(wi).norm_sqr();
                if i == k {
                    signal = g;
                } else {
                    interference += g;
                }
            }
            signal / (interference + sigma2[k])
        })
        .collect()
}

/// Solves the weighted problem `min sum_k w_k^H (c2 I + D) w_k` subject to
/// the SINR targets, from a cold dual start.
pub fn solve_weighted(h: &[CVector], qos: &QosTargets, c2: f64, d: &DiagLoad) -> Result<WeightedSolution> {
    solve_weighted_with(h, qos, c2, d, &FixedPointOptions::default(), None)
}

/// [`solve_weighted`] with explicit fixed-point options and an optional
/// warm start for the SINR duals.
pub fn solve_weighted_with(
    h: &[CVector],
    qos: &QosTargets,
    c2: f64,
    d: &DiagLoad,
    opts: &FixedPointOptions,
    warm: Option<&[f64]>,
) -> Result<WeightedSolution> {
    let fp = match warm {
        Some(init) => nu_fixed_point_from(h, &qos.gamma, c2, d, opts, init)?,
        None => nu_fixed_point(h, &qos.gamma, c2, d, opts)?,
    };
    let directions = beam_directions(h, &fp.nu, c2, d)?;
    let powers = power_loading(h, &directions, &qos.gamma, &qos.sigma2)?;
    let w = directions
        .iter()
        .zip(&powers)
        .map(|(u, &p)| u * C64::new(p.sqrt(), 0.0))
        .collect();
    Ok(WeightedSolution {
        w,
        directions,
        powers,
        nu: fp.nu,
        fixed_point_iters: fp.iterations,
        fixed_point_residual: fp.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&(r, i)| C64::new(r, i)))
    }

    fn correlated_pair() -> Vec<CVector> {
        vec![
            cv(&[(1.0, 0.0), (0.0, 0.0)]),
            cv(&[(0.5, 0.0), (0.75f64.sqrt(), 0.0)]),
        ]
    }

    #[test]
    fn single_user_unit_channel_gives_unit_dual() {
        let h = [cv(&[(1.0, 0.0)])];
        let fp = nu_fixed_point(&h, &[1.0], 1.0, &DiagLoad::zeros(1), &Default::default()).unwrap();
        assert!((fp.nu[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_user_dual_closed_form() {
        let h = [cv(&[(1.0, 2.0), (-0.5, 0.3), (0.0, -1.0)])];
        let g = h[0].norm_squared();
        let (gamma, c2) = (2.5, 1.0 / 0.3);
        let fp = nu_fixed_point(&h, &[gamma], c2, &DiagLoad::zeros(3), &Default::default()).unwrap();
        assert!((fp.nu[0] - gamma * c2 / g).abs() < 1e-9 * fp.nu[0]);
    }

    #[test]
    fn correlated_pair_independent_starts_agree() {
        let h = correlated_pair();
        let gamma = [2.0, 2.0];
        let c2 = 1.0 / 0.3;
        let d = DiagLoad::zeros(2);
        let opts = FixedPointOptions {
            tol: 1e-12,
            max_iter: 100_000,
        };
        let a = nu_fixed_point(&h, &gamma, c2, &d, &opts).unwrap();
        let b = nu_fixed_point_from(&h, &gamma, c2, &d, &opts, &[10.0, 10.0]).unwrap();
        for (x, y) in a.nu.iter().zip(&b.nu) {
            assert!((x - y).abs() < 1e-9 * x.max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn iterates_from_zero_are_nondecreasing() {
        let h = correlated_pair();
        let gamma = [2.0, 3.0];
        let d = DiagLoad::new(vec![0.3, 1.2]).unwrap();
        let mut nu = vec![0.0, 0.0];
        for _ in 0..200 {
            let next = nu_step(&h, &gamma, 1.0, &d, &nu).unwrap();
            for (a, b) in nu.iter().zip(&next) {
                assert!(*b >= a - 1e-12);
            }
            nu = next;
        }
    }

    #[test]
    fn single_user_direction_is_matched_filter() {
        let h = [cv(&[(1.0, 2.0), (-0.5, 0.3), (0.0, -1.0)])];
        let d = DiagLoad::zeros(3);
        let fp = nu_fixed_point(&h, &[2.0], 1.0, &d, &Default::default()).unwrap();
        let u = beam_directions(&h, &fp.nu, 1.0, &d).unwrap();
        let mf = &h[0] / C64::new(h[0].norm(), 0.0);
        assert!((&u[0] - mf).norm() < 1e-10);
    }

    #[test]
    fn orthogonal_users_get_matched_filters() {
        let h = vec![cv(&[(2.0, 0.0), (0.0, 0.0)]), cv(&[(0.0, 0.0), (0.0, 1.5)])];
        let d = DiagLoad::zeros(2);
        let fp = nu_fixed_point(&h, &[2.0, 3.0], 1.0, &d, &Default::default()).unwrap();
        let u = beam_directions(&h, &fp.nu, 1.0, &d).unwrap();
        for (uk, hk) in u.iter().zip(&h) {
            let mf = hk / C64::new(hk.norm(), 0.0);
            assert!((uk - mf).norm() < 1e-12);
        }
    }

    #[test]
    fn directions_have_real_nonnegative_gain() {
        let h = correlated_pair();
        let d = DiagLoad::new(vec![0.1, 0.7]).unwrap();
        let fp = nu_fixed_point(&h, &[2.0, 2.0], 1.0, &d, &Default::default()).unwrap();
        let u = beam_directions(&h, &fp.nu, 1.0, &d).unwrap();
        for (uk, hk) in u.iter().zip(&h) {
            let a = hk.dotc(uk);
            assert!(a.re > 0.0 && a.im.abs() < 1e-14);
            assert!((uk.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_user_power_loading() {
        let h = [cv(&[(2.0, 0.0)])];
        let u = [cv(&[(1.0, 0.0)])];
        let p = power_loading(&h, &u, &[2.0], &[1.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn correlated_pair_power_loading_matches_cramer() {
        let h = correlated_pair();
        let d = DiagLoad::zeros(2);
        let gamma = [2.0, 2.0];
        let sigma2 = [1.0, 0.5];
        let fp = nu_fixed_point(&h, &gamma, 1.0 / 0.3, &d, &Default::default()).unwrap();
        let u = beam_directions(&h, &fp.nu, 1.0 / 0.3, &d).unwrap();
        let p = power_loading(&h, &u, &gamma, &sigma2).unwrap();

        let g = |k: usize, i: usize| h[k].dotc(&u[i]).norm_sqr();
        let (a, b, c, dd) = (g(0, 0) / gamma[0], -g(0, 1), -g(1, 0), g(1, 1) / gamma[1]);
        let det = a * dd - b * c;
        let p0 = (sigma2[0] * dd - b * sigma2[1]) / det;
        let p1 = (a * sigma2[1] - c * sigma2[0]) / det;
        assert!((p[0] - p0).abs() < 1e-12 * p0);
        assert!((p[1] - p1).abs() < 1e-12 * p1);
    }

    #[test]
    fn singular_loading_detected() {
        // Two users on the same single antenna cannot both be served.
        let h = vec![cv(&[(1.0, 0.0)]), cv(&[(1.0, 0.0)])];
        let u = vec![cv(&[(1.0, 0.0)]), cv(&[(1.0, 0.0)])];
        let r = power_loading(&h, &u, &[1.0, 1.0], &[1.0, 1.0]);
        assert!(matches!(
            r,
            Err(Error::SingularLoading) | Err(Error::NegativePower { .. })
        ));
    }

    #[test]
    fn sinr_of_zero_beams_is_zero() {
        let h = correlated_pair();
        let w = vec![CVector::zeros(2), CVector::zeros(2)];
        assert_eq!(sinr_of(&w, &h, &[1.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn sinr_of_single_user_closed_form() {
        let h = [cv(&[(1.0, -1.0), (0.5, 2.0)])];
        let (gamma, sigma2) = (3.0f64, 0.7);
        let g = h[0].norm_squared();
        let w = [&h[0] * C64::new((gamma * sigma2).sqrt() / g, 0.0)];
        let s = sinr_of(&w, &h, &[sigma2]);
        assert!((s[0] - gamma).abs() < 1e-12);
    }

    #[test]
    fn solve_weighted_meets_targets_with_equality() {
        let h = correlated_pair();
        let qos = QosTargets::new(vec![2.0, 1.5], vec![1.0, 2.0]);
        let d = DiagLoad::new(vec![0.3, 0.3]).unwrap();
        let sol = solve_weighted(&h, &qos, 1.0 / 0.3, &d).unwrap();
        let s = sinr_of(&sol.w, &h, &qos.sigma2);
        for (sk, gk) in s.iter().zip(&qos.gamma) {
            assert!((sk / gk - 1.0).abs() < 1e-8);
        }
        let res = eigen_residual(&h, &qos.gamma, &sol.nu, 1.0 / 0.3, &d, &sol.directions);
        assert!(res.iter().all(|r| *r < 1e-6), "{res:?}");
    }

    #[test]
    fn noise_scaling_scales_powers_only() {
        let h = correlated_pair();
        let qos = QosTargets::new(vec![2.0, 2.0], vec![1.0, 1.0]);
        let scaled = QosTargets::new(vec![2.0, 2.0], vec![3.0, 3.0]);
        let d = DiagLoad::zeros(2);
        let a = solve_weighted(&h, &qos, 1.0, &d).unwrap();
        let b = solve_weighted(&h, &scaled, 1.0, &d).unwrap();
        for k in 0..2 {
            assert!((b.powers[k] - 3.0 * a.powers[k]).abs() < 1e-9 * b.powers[k]);
            assert!((&a.directions[k] - &b.directions[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn negative_load_rejected() {
        assert!(DiagLoad::new(vec![0.0, -1.0]).is_err());
    }
}
