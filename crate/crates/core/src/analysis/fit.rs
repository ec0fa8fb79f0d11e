//! Stretched-exponential fits of echo decays.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{minimize, Residuals};
use crate::cce::EchoCurve;
use crate::{Error, Result};

/// A curve that never falls below this is reported as diverged.
pub const DIVERGENCE_LEVEL: f64 = 0.9;
/// Points below this are treated as noise floor and not fitted.
pub const NOISE_FLOOR: f64 = 0.02;
/// Largest change between the last two quarters of a curve for its tail to
/// count as settled.
pub const SETTLED_DRIFT: f64 = 0.02;
/// Minimum number of grid points a curve must carry.
pub const MIN_POINTS: usize = 10;

const STRETCH_STARTS: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 3.5];

/// Result of fitting `L(t) = exp[−t/T₂ − (t/T_SD)ⁿ]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// s; `None` when the linear term vanishes.
    pub t2: Option<f64>,
    /// s; equals the lower bound when diverged.
    pub t_sd: f64,
    /// Stretch exponent, confined to `[1, 4]`.
    pub n: f64,
    /// RMS residual of `ln L`.
    pub residual_rms: f64,
    pub diverged: bool,
    pub t_sd_lower_bound: Option<f64>,
    pub converged: bool,
}

impl DecayFit {
    /// `T_SD`, or its lower bound when diverged.
    pub fn effective_t_sd(&self) -> f64 {
        self.t_sd_lower_bound.unwrap_or(self.t_sd)
    }
}

/// Model on normalised time `x = t / t_scale` with parameters
/// `p = (q, ln x_SD, u)`: `1/T₂ = q²`, `n = 1 + 3σ(u)`.
struct LogDecay {
    x: Vec<f64>,
    y: Vec<f64>,
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn stretch(u: f64) -> f64 {
    1.0 + 3.0 * sigmoid(u)
}

fn stretch_inverse(n: f64) -> f64 {
    let s = (n - 1.0) / 3.0;
    (s / (1.0 - s)).ln()
}

impl Residuals for LogDecay {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let n = stretch(p[2]);
        DVector::from_iterator(
            self.x.len(),
            self.x.iter().zip(&self.y).map(|(x, y)| -p[0] * p[0] * x - (n * (x.ln() - p[1])).exp() - y),
        )
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let s = sigmoid(p[2]);
        let n = 1.0 + 3.0 * s;
        DMatrix::from_fn(self.x.len(), 3, |r, c| {
            let x = self.x[r];
            let z = x.ln() - p[1];
            let e = (n * z).exp();
            match c {
                0 => -2.0 * p[0] * x,
                1 => e * n,
                _ => -e * z * 3.0 * s * (1.0 - s),
            }
        })
    }
}

/// `T_SD` bound for a curve that stays above [`DIVERGENCE_LEVEL`] up to `t_max`
/// under the `n = 2` convention.
pub fn divergence_bound(t_max: f64) -> f64 {
    t_max / (-DIVERGENCE_LEVEL.ln()).sqrt()
}

/// Fit `ln L` with uniform weights.
///
/// A curve that never drops below [`DIVERGENCE_LEVEL`], or whose tail settles
/// above `1/e`, has not lost its coherence on the grid. It is reported as
/// diverged with the `n = 2` bound `t_max / sqrt(−ln L_min)`.
///
/// Otherwise the fit runs up to the lowest point of the curve, and points
/// below [`NOISE_FLOOR`] are dropped. When the tail sits on a plateau
/// `P > NOISE_FLOOR` (mean of the last quarter) only the points up to the
/// first one below `P + 0.1(1 − P)` are used, so the fit describes the decay
/// rather than the residual level.
pub fn fit_decay(times: &[f64], l: &[f64]) -> Result<DecayFit> {
    if times.len() != l.len() {
        return Err(Error::invalid("times and L differ in length"));
    }
    if times.len() < MIN_POINTS {
        return Err(Error::invalid(format!("need at least {MIN_POINTS} points, got {}", times.len())));
    }
    if times.iter().chain(l).any(|v| !v.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("times must be finite and ascending and L finite"));
    }
    let t_max = *times.last().expect("non-empty");
    let l_min = l.iter().copied().fold(f64::INFINITY, f64::min);
    let diverged = |level: f64| {
        let bound = t_max / (-level.ln()).sqrt();
        DecayFit {
            t2: None,
            t_sd: bound,
            n: 2.0,
            residual_rms: 0.0,
            diverged: true,
            t_sd_lower_bound: Some(bound),
            converged: true,
        }
    };
    if l_min >= DIVERGENCE_LEVEL {
        return Ok(diverged(DIVERGENCE_LEVEL));
    }

    let quarter = (l.len() / 4).max(1);
    let tail = &l[l.len() - quarter..];
    let plateau = tail.iter().sum::<f64>() / tail.len() as f64;
    let before = &l[l.len() - 2 * quarter..l.len() - quarter];
    let settled = (before.iter().sum::<f64>() / before.len() as f64 - plateau).abs() < SETTLED_DRIFT;
    if settled && plateau > (-1.0f64).exp() {
        return Ok(diverged(l_min));
    }
    // a decay stops at its minimum; a settled tail is cut where the curve
    // is 90 % of the way down to it
    let lowest = l.iter().position(|&v| v == l_min).expect("non-empty");
    let mut end = lowest + 1;
    if plateau > NOISE_FLOOR {
        let level = plateau + 0.1 * (1.0 - plateau);
        end = end.min(l.iter().position(|&v| v <= level).map_or(l.len(), |k| k + 1));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (&t, &v) in times[..end].iter().zip(&l[..end]) {
        if t > 0.0 && (NOISE_FLOOR..=1.0).contains(&v) {
            x.push(t);
            y.push(v.ln());
        }
    }
    if x.len() < 3 {
        return Err(Error::invalid("fewer than three usable points above the noise floor"));
    }
    let scale = *x.last().expect("non-empty");
    x.iter_mut().for_each(|v| *v /= scale);

    // start T_SD where the curve crosses 1/e, or at the last fitted point
    let x_e = x.iter().zip(&y).find(|(_, &v)| v <= -1.0).map_or(1.0, |(x, _)| *x);
    let model = LogDecay { x, y };
    let best = STRETCH_STARTS
        .iter()
        .map(|&n| minimize(&model, DVector::from_vec(vec![0.05, x_e.ln(), stretch_inverse(n)])))
        .filter(|o| o.cost.is_finite())
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .ok_or_else(|| Error::invalid("decay fit failed from every starting point"))?;
    let p = &best.params;
    let rate = p[0] * p[0] / scale;
    Ok(DecayFit {
        t2: (rate > 0.0).then(|| 1.0 / rate),
        t_sd: p[1].exp() * scale,
        n: stretch(p[2]),
        residual_rms: (best.cost / model.x.len() as f64).sqrt(),
        diverged: false,
        t_sd_lower_bound: None,
        converged: best.converged,
    })
}

pub fn fit_curve(curve: &EchoCurve) -> Result<DecayFit> {
    fit_decay(&curve.times, &curve.l)
}
