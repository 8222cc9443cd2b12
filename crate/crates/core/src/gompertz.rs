//! The modified Gompertz lifecycle curve
//!
//! ```text
//! M(t) = d + a · b^(c^t)
//! ```
//!
//! rising from the initial level `d + a·b` at `t = 0` toward the asymptote
//! `d + a` as the standard matures. The rate `c` is sometimes written `k`;
//! it is an independent parameter here and is not tied to the adopter count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GompertzParams {
    /// `d >= 0`
    #[serde(rename = "baseline_d")]
    pub baseline: f64,
    /// `a > 0`
    #[serde(rename = "scale_a")]
    pub scale: f64,
    /// `0 < b < 1`
    #[serde(rename = "shape_b")]
    pub shape: f64,
    /// `0 < c < 1`; smaller values reach the asymptote sooner.
    #[serde(rename = "rate_c")]
    pub rate: f64,
}

impl GompertzParams {
    /// Builds validated parameters.
    pub fn new(baseline: f64, scale: f64, shape: f64, rate: f64) -> Result<Self> {
        let p = Self { baseline, scale, shape, rate };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { baseline, scale, shape, rate } = *self;
        if !(baseline.is_finite() && baseline >= 0.0) {
            return Err(Error::Domain(format!("baseline d must be finite and >= 0, got {baseline}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!("scale a must be finite and > 0, got {scale}")));
        }
        if !(shape > 0.0 && shape < 1.0) {
            return Err(Error::Domain(format!("shape b must lie in (0, 1), got {shape}")));
        }
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::Domain(format!("rate c must lie in (0, 1), got {rate}")));
        }
        Ok(())
    }

    /// Level at `t = 0`: `d + a·b`.
    pub fn initial_level(&self) -> f64 {
        self.baseline + self.scale * self.shape
    }

    /// Asymptotic level: `d + a`.
    pub fn asymptote(&self) -> f64 {
        self.baseline + self.scale
    }

    /// Curve value without parameter checks.
    pub(crate) fn eval(&self, t: f64) -> f64 {
        self.baseline + self.scale * self.shape.powf(self.rate.powf(t))
    }
}

/// Evaluates `d + a·b^(c^t)`.
pub fn gompertz_value(params: &GompertzParams, t: f64) -> Result<f64> {
    params.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(params.eval(t))
}

/// Inverts the curve: the unique `t` with `M(t) = level`.
///
/// Requires `d + a·b < level < d + a`. Precision degrades where the curve is
/// flat, i.e. once `c^t·ln(b)` approaches machine epsilon.
pub fn time_to_level(params: &GompertzParams, level: f64) -> Result<f64> {
    params.validate()?;
    let (lo, hi) = (params.initial_level(), params.asymptote());
    if !(level > lo && level < hi) {
        return Err(Error::Domain(format!("level {level} outside the open range ({lo}, {hi})")));
    }
    // b^(c^t) = (level - d)/a  =>  c^t = ln((level - d)/a) / ln b
    let ratio = (level - params.baseline) / params.scale;
    let c_pow_t = ratio.ln() / params.shape.ln();
    let t = c_pow_t.ln() / params.rate.ln();
    Ok(t.max(0.0))
}

/// Paired curve values with and without a time shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftPoint {
    pub time_t: f64,
    pub shifted: f64,
    pub unshifted: f64,
    /// `shifted / unshifted - 1`
    pub relative_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualComparison {
    pub shift_years: f64,
    pub horizon: f64,
    pub points: Vec<ShiftPoint>,
    pub gain_at_horizon: f64,
    pub mean_gain: f64,
}

/// Compares `M(t + shift)` with `M(t)` on yearly steps over `[0, horizon]`,
/// the horizon itself always included.
///
/// Models an earlier release of the standard by `shift` years.
pub fn counterfactual_shift(params: &GompertzParams, shift_years: f64, horizon: f64) -> Result<CounterfactualComparison> {
    params.validate()?;
    if !shift_years.is_finite() || shift_years < 0.0 {
        return Err(Error::Validation(format!("shift must be finite and >= 0, got {shift_years}")));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::Validation(format!("horizon must be finite and > 0, got {horizon}")));
    }
    let mut times: Vec<f64> = (0..).map(f64::from).take_while(|t| *t < horizon).collect();
    times.push(horizon);

    let point = |t: f64| {
        let shifted = params.eval(t + shift_years);
        let unshifted = params.eval(t);
        ShiftPoint { time_t: t, shifted, unshifted, relative_gain: shifted / unshifted - 1.0 }
    };
    let points: Vec<ShiftPoint> = times.into_iter().map(point).collect();
    let gain_at_horizon = points.last().map(|p| p.relative_gain).unwrap_or(0.0);
    let mean_gain = points.iter().map(|p| p.relative_gain).sum::<f64>() / points.len() as f64;
    Ok(CounterfactualComparison { shift_years, horizon, points, gain_at_horizon, mean_gain })
}

/// Samples the curve at `count` evenly spaced times over `[start, end]`.
pub fn sample_curve(params: &GompertzParams, start: f64, end: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    if !(start.is_finite() && end.is_finite() && start >= 0.0 && end >= start) {
        return Err(Error::Validation(format!("invalid sampling range [{start}, {end}]")));
    }
    Ok(match count {
        0 => Vec::new(),
        1 => vec![(start, params.eval(start))],
        n => (0..n)
            .map(|i| {
                let t = start + (end - start) * i as f64 / (n - 1) as f64;
                (t, params.eval(t))
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: f64, a: f64, b: f64, c: f64) -> GompertzParams {
        GompertzParams::new(d, a, b, c).unwrap()
    }

    #[test]
    fn value_examples() {
        assert_eq!(gompertz_value(&p(0.0, 1.0, 0.1, 0.5), 0.0).unwrap(), 0.1);
        let limit = gompertz_value(&p(0.02, 0.5, 0.2, 0.9), 1e6).unwrap();
        assert!((limit - 0.52).abs() < 1e-9);
        // 0.05^(0.5^2) = 0.05^0.25, evaluated as a fourth root
        let expected = 0.05f64.sqrt().sqrt();
        assert!((gompertz_value(&p(0.0, 1.0, 0.05, 0.5), 2.0).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.472871).abs() < 1e-6);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GompertzParams::new(0.0, 1.0, 1.0, 0.5).is_err());
        assert!(GompertzParams::new(0.0, 1.0, 0.5, 0.0).is_err());
        assert!(GompertzParams::new(-0.1, 1.0, 0.5, 0.5).is_err());
        assert!(GompertzParams::new(0.0, 0.0, 0.5, 0.5).is_err());
        let bad = GompertzParams { baseline: 0.0, scale: 1.0, shape: 0.5, rate: 1.5 };
        assert!(matches!(gompertz_value(&bad, 1.0), Err(Error::Domain(_))));
        assert!(gompertz_value(&p(0.0, 1.0, 0.5, 0.5), -1.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let params = p(0.0, 1.0, 0.1, 0.5);
        let t = time_to_level(&params, 0.1 + 1e-9).unwrap();
        assert!(t < 1e-3, "t = {t}");
        let t = time_to_level(&p(0.0, 1.0, 0.05, 0.5), 0.472871).unwrap();
        assert!((t - 2.0).abs() < 1e-4, "t = {t}");
        assert!(matches!(time_to_level(&params, 1.0), Err(Error::Domain(_))));
        assert!(matches!(time_to_level(&params, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_shift_has_no_gain() {
        let c = counterfactual_shift(&p(0.01, 0.6, 0.08, 0.75), 0.0, 10.0).unwrap();
        assert!(c.points.iter().all(|pt| pt.relative_gain == 0.0));
        assert_eq!(c.points.len(), 11);
    }

    #[test]
    fn fractional_horizon_is_included() {
        let c = counterfactual_shift(&p(0.01, 0.6, 0.08, 0.75), 1.0, 2.5).unwrap();
        let times: Vec<f64> = c.points.iter().map(|pt| pt.time_t).collect();
        assert_eq!(times, vec![0.0, 1.0, 2.0, 2.5]);
    }

    #[test]
    fn shift_argument_errors() {
        let params = p(0.01, 0.6, 0.08, 0.75);
        assert!(matches!(counterfactual_shift(&params, 1.0, -1.0), Err(Error::Validation(_))));
        assert!(matches!(counterfactual_shift(&params, 1.0, 0.0), Err(Error::Validation(_))));
        assert!(matches!(counterfactual_shift(&params, -1.0, 5.0), Err(Error::Validation(_))));
    }

    #[test]
    fn curve_samples() {
        let params = p(0.0, 1.0, 0.1, 0.5);
        let s = sample_curve(&params, 0.0, 10.0, 11).unwrap();
        assert_eq!(s.len(), 11);
        assert_eq!(s[0], (0.0, 0.1));
        assert_eq!(s[10].0, 10.0);
        assert!(sample_curve(&params, 0.0, 1.0, 0).unwrap().is_empty());
    }
}
