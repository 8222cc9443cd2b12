//! Constrained least-squares fit of the lifecycle curve.
//!
//! The four curve parameters are optimized in an unconstrained space and
//! mapped back through smooth transforms, so every iterate is feasible:
//!
//! * `b = σ(u_b)`, `c = σ(u_c)` (logistic), keeping both in `(0, 1)`;
//! * without an asymptote cap: `a = softplus(u_a)`, `d = softplus(u_d)`;
//! * with a cap `S`: `s = S·σ(u_s)` is the asymptote `d + a` and
//!   `d = s·σ(u_d)`, so `d >= 0`, `a > 0` and `d + a <= S`.
//!
//! Each start runs a damped Gauss-Newton (Levenberg-Marquardt) loop. Starts are
//! drawn from a seeded ChaCha generator and the winner is chosen by
//! `(rmse, start index)`, so the result is a pure function of the inputs.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gompertz::GompertzParams;
use crate::model::AdoptionObservation;

/// Number of free curve parameters; also the minimum number of observations.
pub const MIN_OBSERVATIONS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub starts: usize,
    pub seed: u64,
    /// Iteration budget per start.
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the squared-residual sum by less than
    /// this fraction.
    pub relative_tolerance: f64,
    /// Upper bound on the asymptote `d + a`. Penetration data never exceeds 1.
    pub max_asymptote: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { starts: 16, seed: 0, max_iterations: 500, relative_tolerance: 1e-12, max_asymptote: Some(1.0) }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::Validation("fit needs at least one start".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("iteration budget must be positive".into()));
        }
        if !(self.relative_tolerance.is_finite() && self.relative_tolerance >= 0.0) {
            return Err(Error::Validation(format!("invalid tolerance {}", self.relative_tolerance)));
        }
        if let Some(cap) = self.max_asymptote {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::Validation(format!("asymptote cap must be finite and > 0, got {cap}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: GompertzParams,
    pub residual_rmse: f64,
    /// `M(t_i) - y_i` in observation order.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub(crate) fn from_params(params: GompertzParams, obs: &[AdoptionObservation], iterations: usize, converged: bool) -> Self {
        let residuals: Vec<f64> = obs.iter().map(|o| params.eval(o.time_t) - o.penetration).collect();
        Self { params, residual_rmse: rms(&residuals), residuals, iterations, converged }
    }
}

pub(crate) fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|r| r * r).sum::<f64>() / values.len() as f64).sqrt()
}

/// Shared input checks for every fitting routine.
pub(crate) fn check_fit_input(observations: &[AdoptionObservation]) -> Result<()> {
    for o in observations {
        o.validate()?;
    }
    let mut times: Vec<f64> = observations.iter().map(|o| o.time_t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData { needed: MIN_OBSERVATIONS, got: times.len() });
    }
    crate::model::validate_observations(observations)?;
    let first = observations[0].penetration;
    if observations.iter().all(|o| o.penetration == first) {
        return Err(Error::DegenerateData("constant penetration series leaves the curve shape unidentifiable".into()));
    }
    Ok(())
}

// Bounds on the unconstrained coordinates keep the mapped values strictly
// inside their open intervals. The level coordinates get a shallow floor: past
// it their gradient underflows and a baseline driven to zero cannot recover.
const U_MIN: f64 = -700.0;
const U_MAX: f64 = 36.0;
const LEVEL_MIN: f64 = -25.0;

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn softplus(u: f64) -> f64 {
    if u > 30.0 {
        u + (-u).exp()
    } else {
        u.exp().ln_1p()
    }
}

fn softplus_inv(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp_m1().ln()
    }
}

/// Maps between the unconstrained vector `(u_d, u_a|u_s, u_b, u_c)` and curve parameters.
#[derive(Debug, Clone, Copy)]
struct Transform {
    cap: Option<f64>,
}

impl Transform {
    fn clamp(&self, u: &mut Vector4<f64>) {
        for (i, x) in u.iter_mut().enumerate() {
            let lo = if i <= 1 { LEVEL_MIN } else { U_MIN };
            // softplus coordinates only need a floor
            let hi = if i <= 1 && self.cap.is_none() { 1e6 } else { U_MAX };
            *x = x.clamp(lo, hi);
        }
    }

    fn params_at(&self, u: &Vector4<f64>) -> GompertzParams {
        let shape = logistic(u[2]);
        let rate = logistic(u[3]);
        let (baseline, scale) = match self.cap {
            Some(cap) => {
                let s = cap * logistic(u[1]);
                let q = logistic(u[0]);
                (s * q, s * (1.0 - q))
            }
            None => (softplus(u[0]), softplus(u[1])),
        };
        GompertzParams { baseline, scale, shape, rate }
    }

    fn coords_of(&self, p: &GompertzParams) -> Vector4<f64> {
        let (u0, u1) = match self.cap {
            Some(cap) => {
                let s = p.asymptote();
                (logit(p.baseline / s), logit(s / cap))
            }
            None => (softplus_inv(p.baseline), softplus_inv(p.scale)),
        };
        let mut u = Vector4::new(u0, u1, logit(p.shape), logit(p.rate));
        self.clamp(&mut u);
        u
    }

    /// Residuals and Jacobian with respect to the unconstrained coordinates.
    fn residuals_jacobian(&self, u: &Vector4<f64>, obs: &[AdoptionObservation]) -> (Vec<f64>, Vec<[f64; 4]>) {
        let p = self.params_at(u);
        let (b, c) = (p.shape, p.rate);
        let ln_b = b.ln();
        let mut res = Vec::with_capacity(obs.len());
        let mut jac = Vec::with_capacity(obs.len());
        for o in obs {
            let t = o.time_t;
            let ct = c.powf(t);
            let g = (ct * ln_b).exp();
            res.push(p.baseline + p.scale * g - o.penetration);

            let d_ub = p.scale * g * ct * (1.0 - b);
            let d_uc = p.scale * g * ln_b * t * ct * (1.0 - c);
            let (d_u0, d_u1) = match self.cap {
                Some(cap) => {
                    let q = logistic(u[0]);
                    let sig_s = logistic(u[1]);
                    let s = cap * sig_s;
                    let dm_ds = q + (1.0 - q) * g;
                    let dm_dq = s * (1.0 - g);
                    (dm_dq * q * (1.0 - q), dm_ds * cap * sig_s * (1.0 - sig_s))
                }
                None => (logistic(u[0]), g * logistic(u[1])),
            };
            jac.push([d_u0, d_u1, d_ub, d_uc]);
        }
        (res, jac)
    }

    fn ssr(&self, u: &Vector4<f64>, obs: &[AdoptionObservation]) -> f64 {
        let p = self.params_at(u);
        obs.iter().map(|o| (p.eval(o.time_t) - o.penetration).powi(2)).sum()
    }
}

#[derive(Debug, Clone)]
struct StartOutcome {
    params: GompertzParams,
    ssr: f64,
    iterations: usize,
    converged: bool,
}

const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

fn levenberg_marquardt(transform: Transform, mut u: Vector4<f64>, obs: &[AdoptionObservation], cfg: &FitConfig) -> StartOutcome {
    let mut ssr = transform.ssr(&u, obs);
    let mut lambda = LAMBDA_INIT;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        if ssr == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;
        let (res, jac) = transform.residuals_jacobian(&u, obs);
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (r, row) in res.iter().zip(&jac) {
            let row = Vector4::from_row_slice(row);
            jtj += row * row.transpose();
            jtr += row * *r;
        }
        let diag_floor = jtj.diagonal().max() * 1e-12 + f64::MIN_POSITIVE;

        let mut accepted = false;
        while lambda <= LAMBDA_MAX {
            let mut damped = jtj;
            for i in 0..4 {
                damped[(i, i)] += lambda * jtj[(i, i)].max(diag_floor);
            }
            let step = damped.cholesky().map(|ch| ch.solve(&(-jtr)));
            if let Some(step) = step.filter(|s| s.iter().all(|x| x.is_finite())) {
                let mut candidate = u + step;
                transform.clamp(&mut candidate);
                let candidate_ssr = transform.ssr(&candidate, obs);
                if candidate_ssr < ssr {
                    let relative_decrease = (ssr - candidate_ssr) / ssr;
                    u = candidate;
                    ssr = candidate_ssr;
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    if relative_decrease < cfg.relative_tolerance {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No descent direction left at any damping: a stationary point.
            converged = true;
        }
        if converged {
            break;
        }
    }
    StartOutcome { params: transform.params_at(&u), ssr, iterations, converged }
}

/// Draws `count` feasible starting points.
///
/// `b` is drawn through `ln(-ln b)` so very small shapes are reachable; `d`
/// and `a` come from a two-point secant through the lowest and highest
/// observations for the drawn `(b, c)`.
fn starting_points(obs: &[AdoptionObservation], cfg: &FitConfig) -> Vec<GompertzParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = obs.iter().fold((&obs[0], &obs[0]), |(lo, hi), o| {
        (if o.penetration < lo.penetration { o } else { lo }, if o.penetration > hi.penetration { o } else { hi })
    });
    let cap = cfg.max_asymptote.unwrap_or(f64::INFINITY);
    let eps = 1e-9;
    (0..cfg.starts)
        .map(|_| {
            let shape = (-rng.random_range(-3.0f64..3.5).exp()).exp().clamp(1e-300, 1.0 - 1e-9);
            let rate: f64 = rng.random_range(0.05..0.98);
            let g = |t: f64| shape.powf(rate.powf(t));
            let (g_lo, g_hi) = (g(lo.time_t), g(hi.time_t));
            let mut scale = if (g_hi - g_lo).abs() > 1e-12 {
                ((hi.penetration - lo.penetration) / (g_hi - g_lo)).abs()
            } else {
                hi.penetration.max(eps)
            };
            let mut baseline = (lo.penetration - scale * g_lo).max(0.0);
            if baseline + scale > 0.98 * cap {
                let s = 0.98 * cap;
                baseline = baseline.min(0.5 * s);
                scale = s - baseline;
            }
            GompertzParams { baseline, scale: scale.max(eps), shape, rate }
        })
        .collect()
}

/// Fits `M(t) = d + a·b^(c^t)` to the observations by constrained least squares.
pub fn fit_gompertz(observations: &[AdoptionObservation], config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    check_fit_input(observations)?;
    let transform = Transform { cap: config.max_asymptote };

    let outcomes: Vec<StartOutcome> = starting_points(observations, config)
        .iter()
        .map(|p| levenberg_marquardt(transform, transform.coords_of(p), observations, config))
        .collect();

    let best = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.ssr.is_finite())
        .min_by(|(i, x), (j, y)| x.ssr.total_cmp(&y.ssr).then(i.cmp(j)))
        .map(|(_, o)| o.clone())
        .ok_or_else(|| Error::DegenerateData("no start produced a finite residual".into()))?;

    best.params.validate()?;
    let result = FitResult::from_params(best.params, observations, best.iterations, best.converged);
    if !result.converged {
        return Err(Error::NonConvergence { best: Box::new(result) });
    }
    Ok(result)
}
