//! Brute-force reference fit used to check [`crate::fit::fit_gompertz`].
//!
//! For fixed `(b, c)` the curve is linear in `(d, a)`, so the oracle scans a
//! regular `(b, c)` grid, solves the bracketed two-variable least-squares
//! problem exactly at every node, then polishes the best node with a
//! Nelder-Mead search over the profiled objective. It shares no code with the
//! Levenberg-Marquardt path beyond input validation and curve evaluation.

use crate::error::{Error, Result};
use crate::fit::{check_fit_input, FitResult};
use crate::gompertz::GompertzParams;
use crate::model::AdoptionObservation;

/// Bracket on `a` when no asymptote cap is given, as a multiple of the
/// largest observation.
const UNCAPPED_SCALE_FACTOR: f64 = 10.0;

/// Box for the linear sub-problem. `d ∈ [0, max y]`, `a ∈ [0, a_max]`, and with
/// a cap also `d + a <= cap`.
#[derive(Debug, Clone, Copy)]
struct Bracket {
    d_max: f64,
    a_max: f64,
    cap: Option<f64>,
}

impl Bracket {
    fn from_data(obs: &[AdoptionObservation], cap: Option<f64>) -> Self {
        let y_max = obs.iter().map(|o| o.penetration).fold(0.0, f64::max);
        match cap {
            Some(cap) => Bracket { d_max: y_max.min(cap), a_max: cap, cap: Some(cap) },
            None => Bracket { d_max: y_max, a_max: UNCAPPED_SCALE_FACTOR * y_max.max(1e-12), cap: None },
        }
    }

    fn feasible(&self, d: f64, a: f64) -> bool {
        const TOL: f64 = 1e-12;
        d >= -TOL
            && d <= self.d_max + TOL
            && a >= -TOL
            && a <= self.a_max + TOL
            && self.cap.is_none_or(|cap| d + a <= cap + TOL)
    }

    /// Constraint lines `α·d + β·a = γ`.
    fn lines(&self) -> Vec<(f64, f64, f64)> {
        let mut lines = vec![(1.0, 0.0, 0.0), (1.0, 0.0, self.d_max), (0.0, 1.0, 0.0), (0.0, 1.0, self.a_max)];
        if let Some(cap) = self.cap {
            lines.push((1.0, 1.0, cap));
        }
        lines
    }
}

fn ssr_da(d: f64, a: f64, g: &[f64], y: &[f64]) -> f64 {
    g.iter().zip(y).map(|(gi, yi)| (d + a * gi - yi).powi(2)).sum()
}

/// Exact minimizer of `Σ (d + a·g_i - y_i)²` over the bracket, by enumerating
/// every active set of the convex problem.
fn solve_linear(g: &[f64], y: &[f64], bracket: &Bracket) -> Option<(f64, f64, f64)> {
    let n = g.len() as f64;
    let (sg, sy) = (g.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sgg: f64 = g.iter().map(|v| v * v).sum();
    let sgy: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();

    let mut candidates: Vec<(f64, f64)> = Vec::new();
    // interior: normal equations [n sg; sg sgg] (d, a) = (sy, sgy)
    let det = n * sgg - sg * sg;
    if det.abs() > 1e-300 {
        candidates.push(((sy * sgg - sg * sgy) / det, (n * sgy - sg * sy) / det));
    }
    let lines = bracket.lines();
    // one active constraint: parameterize the line as x0 + s·dir
    for &(al, be, ga) in &lines {
        let norm2 = al * al + be * be;
        let (x0d, x0a) = (al * ga / norm2, be * ga / norm2);
        let (dd, da) = (-be, al);
        // residual_i(s) = (x0d + x0a g_i - y_i) + s (dd + da g_i)
        let (mut num, mut den) = (0.0, 0.0);
        for (gi, yi) in g.iter().zip(y) {
            let base = x0d + x0a * gi - yi;
            let slope = dd + da * gi;
            num += base * slope;
            den += slope * slope;
        }
        if den > 0.0 {
            let s = -num / den;
            candidates.push((x0d + s * dd, x0a + s * da));
        }
    }
    // two active constraints: vertices
    for (i, &(a1, b1, g1)) in lines.iter().enumerate() {
        for &(a2, b2, g2) in &lines[i + 1..] {
            let det = a1 * b2 - a2 * b1;
            if det.abs() > 1e-300 {
                candidates.push(((g1 * b2 - g2 * b1) / det, (a1 * g2 - a2 * g1) / det));
            }
        }
    }
    candidates
        .into_iter()
        .filter(|&(d, a)| bracket.feasible(d, a))
        .map(|(d, a)| {
            let d = d.clamp(0.0, bracket.d_max);
            let a = a.clamp(0.0, bracket.a_max);
            let a = bracket.cap.map_or(a, |cap| a.min(cap - d));
            (d, a, ssr_da(d, a, g, y))
        })
        .min_by(|x, y| x.2.total_cmp(&y.2))
}

struct Profile {
    times: Vec<f64>,
    y: Vec<f64>,
    bracket: Bracket,
}

impl Profile {
    /// Best `(d, a, ssr)` for fixed shape and rate.
    fn at(&self, shape: f64, rate: f64) -> Option<(f64, f64, f64)> {
        if !(shape > 0.0 && shape < 1.0 && rate > 0.0 && rate < 1.0) {
            return None;
        }
        let g: Vec<f64> = self.times.iter().map(|t| shape.powf(rate.powf(*t))).collect();
        solve_linear(&g, &self.y, &self.bracket).filter(|s| s.1 > 0.0)
    }

    /// Profile in log-log coordinates `b = exp(-e^v)`, `c = exp(-e^w)`.
    fn at_loglog(&self, v: f64, w: f64) -> f64 {
        let shape = (-v.exp()).exp();
        let rate = (-w.exp()).exp();
        self.at(shape, rate).map_or(f64::INFINITY, |s| s.2)
    }
}

/// Minimal 2-D Nelder-Mead. Returns the best vertex and iterations used.
fn nelder_mead(f: impl Fn(f64, f64) -> f64, start: (f64, f64), step: f64, max_iter: usize) -> ((f64, f64), usize) {
    let mut simplex = [
        (start, f(start.0, start.1)),
        ((start.0 + step, start.1), f(start.0 + step, start.1)),
        ((start.0, start.1 + step), f(start.0, start.1 + step)),
    ];
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let [(best, fb), (mid, fm), (worst, fw)] = simplex;
        let spread = (best.0 - worst.0).abs().max((best.1 - worst.1).abs()).max((best.0 - mid.0).abs()).max((best.1 - mid.1).abs());
        if spread < 1e-13 || (fw - fb).abs() <= 1e-30 {
            break;
        }
        let centroid = ((best.0 + mid.0) / 2.0, (best.1 + mid.1) / 2.0);
        let along = |k: f64| (centroid.0 + k * (worst.0 - centroid.0), centroid.1 + k * (worst.1 - centroid.1));
        let r = along(-1.0);
        let fr = f(r.0, r.1);
        if fr < fb {
            let e = along(-2.0);
            let fe = f(e.0, e.1);
            simplex[2] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < fm {
            simplex[2] = (r, fr);
        } else {
            let c = if fr < fw { along(-0.5) } else { along(0.5) };
            let fc = f(c.0, c.1);
            if fc < fw.min(fr) {
                simplex[2] = (c, fc);
            } else {
                for v in simplex.iter_mut().skip(1) {
                    let p = ((best.0 + v.0 .0) / 2.0, (best.1 + v.0 .1) / 2.0);
                    *v = (p, f(p.0, p.1));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0, iter)
}

/// Exhaustive grid search over `(b, c)` at `resolution`, followed by a local polish.
///
/// `max_asymptote` brackets `d + a` as in [`crate::fit::FitConfig`].
pub fn grid_oracle_fit(observations: &[AdoptionObservation], resolution: f64, max_asymptote: Option<f64>) -> Result<FitResult> {
    if !(resolution > 0.0 && resolution < 0.5) {
        return Err(Error::Validation(format!("grid resolution must lie in (0, 0.5), got {resolution}")));
    }
    check_fit_input(observations)?;
    let profile = Profile {
        times: observations.iter().map(|o| o.time_t).collect(),
        y: observations.iter().map(|o| o.penetration).collect(),
        bracket: Bracket::from_data(observations, max_asymptote),
    };

    let steps = (1.0 / resolution).round() as usize;
    let mut best: Option<(f64, f64, f64)> = None; // (ssr, b, c)
    for i in 1..steps {
        let shape = i as f64 * resolution;
        for j in 1..steps {
            let rate = j as f64 * resolution;
            if let Some((_, _, ssr)) = profile.at(shape, rate) {
                if best.is_none_or(|b| ssr < b.0) {
                    best = Some((ssr, shape, rate));
                }
            }
        }
    }
    let (_, shape0, rate0) = best.ok_or_else(|| Error::DegenerateData("no grid node admits a feasible fit".into()))?;

    // polish, restarting until a restart no longer improves
    let mut point = ((-shape0.ln()).ln(), (-rate0.ln()).ln());
    let mut value = profile.at_loglog(point.0, point.1);
    let mut iterations = (steps - 1) * (steps - 1);
    for _ in 0..50 {
        let (p, it) = nelder_mead(|v, w| profile.at_loglog(v, w), point, 0.1, 5_000);
        iterations += it;
        let fp = profile.at_loglog(p.0, p.1);
        let improved = fp < value;
        if fp <= value {
            point = p;
            value = fp;
        }
        if !improved {
            break;
        }
    }

    let shape = (-point.0.exp()).exp();
    let rate = (-point.1.exp()).exp();
    let (d, a, _) = profile.at(shape, rate).ok_or_else(|| Error::DegenerateData("polish left the feasible region".into()))?;
    let params = GompertzParams::new(d, a, shape, rate)?;
    Ok(FitResult::from_params(params, observations, iterations, true))
}
