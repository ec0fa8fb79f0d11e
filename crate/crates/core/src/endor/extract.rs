//! Coupling extraction from measured spectra.
//!
//! Each spectrum is first decomposed into equal-width Gaussians. Every fitted
//! peak, read as a line of either donor level, proposes candidate couplings;
//! a candidate survives when its predicted lines land on fitted peaks in most
//! spectra. Couplings are accepted greedily, each consuming the peak capacity
//! it explains, and finally refined together against the raw spectra.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lines::effective_interaction;
use super::spectrum::MeasuredSpectrum;
use super::table::{CouplingEntry, CouplingTable};
use crate::analysis::lm::{minimize, Residuals};
use crate::spin::{eigensystem, DonorSpec};
use crate::{Error, Result};

/// Equal-width Gaussian decomposition of one spectrum. Frequencies in Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakFit {
    pub centres: Vec<f64>,
    /// Peak heights in the spectrum's amplitude units.
    pub heights: Vec<f64>,
    pub sigma: f64,
    /// RMS residual relative to the spectrum maximum.
    pub residual_rms: f64,
    pub converged: bool,
}

impl PeakFit {
    pub fn areas(&self) -> Vec<f64> {
        self.heights.iter().map(|h| h * self.sigma * (2.0 * PI).sqrt()).collect()
    }
}

struct GaussSum<'a> {
    x: &'a [f64],
    y: &'a [f64],
    n: usize,
}

impl GaussSum<'_> {
    fn eval(&self, p: &DVector<f64>, with_jac: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
        let sigma = p[2 * self.n].exp();
        let mut r = DVector::from_iterator(self.x.len(), self.y.iter().map(|y| -y));
        let mut j = with_jac.then(|| DMatrix::zeros(self.x.len(), 2 * self.n + 1));
        for (row, &x) in self.x.iter().enumerate() {
            for k in 0..self.n {
                let (c, h) = (p[k], p[self.n + k]);
                let z = (x - c) / sigma;
                let g = (-0.5 * z * z).exp();
                r[row] += h * g;
                if let Some(j) = j.as_mut() {
                    j[(row, k)] = h * g * z / sigma;
                    j[(row, self.n + k)] = g;
                    j[(row, 2 * self.n)] += h * g * z * z;
                }
            }
        }
        (r, j)
    }
}

impl Residuals for GaussSum<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        self.eval(p, false).0
    }
    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        self.eval(p, true).1.expect("requested")
    }
}

fn local_maxima(y: &[f64], half_window: usize, threshold: f64) -> Vec<usize> {
    (0..y.len())
        .filter(|&k| {
            let lo = k.saturating_sub(half_window);
            let hi = (k + half_window).min(y.len() - 1);
            y[k] >= threshold && (lo..=hi).all(|q| y[q] <= y[k]) && (lo..=hi).any(|q| q != k && y[q] < y[k])
        })
        .collect()
}

/// Fit equal-width Gaussians to `amp(freq)`. Peaks are seeded from local
/// maxima above `threshold` (fraction of the maximum); the residual is then
/// searched for missed shoulders, adding one peak per round.
pub fn fit_peaks(freq: &[f64], amp: &[f64], sigma_guess: Option<f64>, threshold: f64) -> Result<PeakFit> {
    if freq.len() != amp.len() || freq.len() < 5 {
        return Err(Error::invalid("spectrum needs at least five points"));
    }
    let scale = amp.iter().fold(0.0f64, |m, a| m.max(*a));
    if !(scale > 0.0) {
        return Err(Error::invalid("spectrum has no resolvable peak"));
    }
    let x: Vec<f64> = freq.iter().map(|f| f / 1e6).collect();
    let y: Vec<f64> = amp.iter().map(|a| a / scale).collect();
    let step = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let sigma0 = match sigma_guess {
        Some(s) => s / 1e6,
        None => estimate_width(&x, &y),
    };
    let half = ((0.5 * sigma0 / step).round() as usize).max(1);
    let mut centres: Vec<f64> = local_maxima(&y, half, threshold).into_iter().map(|k| x[k]).collect();
    if centres.is_empty() {
        return Err(Error::invalid("spectrum has no resolvable peak"));
    }
    let mut best: Option<(DVector<f64>, f64, bool)> = None;
    for _round in 0..4 {
        let n = centres.len();
        let mut p0 = DVector::zeros(2 * n + 1);
        for (k, &c) in centres.iter().enumerate() {
            p0[k] = c;
            p0[n + k] = interp(&x, &y, c).max(0.05);
        }
        p0[2 * n] = sigma0.ln();
        let model = GaussSum { x: &x, y: &y, n };
        let out = minimize(&model, p0);
        let resid = model.residuals(&out.params);
        let rms = (out.cost / x.len() as f64).sqrt();
        let improved = best.as_ref().is_none_or(|b| rms < 0.8 * b.1);
        if !improved {
            break;
        }
        // a missed line leaves a positive lobe in the residual
        let sigma = out.params[2 * n].exp();
        let neg: Vec<f64> = resid.iter().map(|r| -r).collect();
        let miss = local_maxima(&neg, ((0.5 * sigma / step).round() as usize).max(1), threshold);
        let params = out.params.clone();
        best = Some((out.params, rms, out.converged));
        let Some(&k) = miss.iter().max_by(|&&a, &&b| neg[a].total_cmp(&neg[b])) else {
            break;
        };
        centres = (0..n).map(|q| params[q]).collect();
        centres.push(x[k]);
    }
    let (p, rms, converged) = best.expect("at least one round");
    let n = (p.len() - 1) / 2;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    Ok(PeakFit {
        centres: order.iter().map(|&k| p[k] * 1e6).collect(),
        heights: order.iter().map(|&k| p[n + k] * scale).collect(),
        sigma: p[2 * n].exp() * 1e6,
        residual_rms: rms,
        converged,
    })
}

fn interp(x: &[f64], y: &[f64], at: f64) -> f64 {
    match x.binary_search_by(|v| v.total_cmp(&at)) {
        Ok(k) => y[k],
        Err(0) => y[0],
        Err(k) if k >= x.len() => y[x.len() - 1],
        Err(k) => {
            let t = (at - x[k - 1]) / (x[k] - x[k - 1]);
            y[k - 1] * (1.0 - t) + y[k] * t
        }
    }
}

/// Half width at half maximum of the tallest peak, converted to σ.
fn estimate_width(x: &[f64], y: &[f64]) -> f64 {
    let top = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap_or(0);
    let half = y[top] / 2.0;
    let mut r = top;
    while r + 1 < y.len() && y[r] > half {
        r += 1;
    }
    let mut l = top;
    while l > 0 && y[l] > half {
        l -= 1;
    }
    let hwhm = 0.5 * (x[r] - x[l]);
    (hwhm / (2.0 * 2f64.ln()).sqrt()).max(x[1] - x[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOptions {
    /// Matching window in units of the fitted linewidth.
    pub tolerance: f64,
    /// Fraction of predicted lines that must land on a peak.
    pub min_match_fraction: f64,
    /// Upper limit for candidate couplings (Hz).
    pub max_coupling: f64,
    /// Linewidth seed (Hz); estimated from the data when absent.
    pub sigma_guess: Option<f64>,
    /// Peak detection threshold relative to each spectrum's maximum.
    pub threshold: f64,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        ExtractionOptions {
            tolerance: 0.5,
            min_match_fraction: 0.7,
            max_coupling: 50e6,
            sigma_guess: None,
            threshold: 0.1,
        }
    }
}

/// Per-spectrum data used for matching, frequencies in MHz.
struct Obs {
    nu: f64,
    s: [f64; 2],
    peaks: Vec<f64>,
    capacity: Vec<u32>,
    tol: f64,
    sigma: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

const MIN_SZ: f64 = 0.01;

fn observe(spec: &DonorSpec, m: &MeasuredSpectrum, opts: &ExtractionOptions) -> Result<Obs> {
    let es = eigensystem(spec, m.field)?;
    let (u, l) = (es.level(m.transition.0)?, es.level(m.transition.1)?);
    let fit = fit_peaks(&m.freq, &m.amplitude, opts.sigma_guess, opts.threshold)?;
    let areas = fit.areas();
    let mut sorted = areas.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let unit = sorted[sorted.len() / 2].max(f64::MIN_POSITIVE);
    let scale = m.amplitude.iter().fold(0.0f64, |a, b| a.max(*b));
    Ok(Obs {
        nu: spec.si_zeeman(m.field) / (2.0 * PI) / 1e6,
        s: [spec.sz(u.m, u.branch, es.omega0), spec.sz(l.m, l.branch, es.omega0)],
        peaks: fit.centres.iter().map(|c| c / 1e6).collect(),
        capacity: areas.iter().map(|a| ((a / unit).round() as u32).max(1)).collect(),
        tol: opts.tolerance * fit.sigma / 1e6,
        sigma: fit.sigma / 1e6,
        x: m.freq.iter().map(|f| f / 1e6).collect(),
        y: m.amplitude.iter().map(|a| a / scale).collect(),
    })
}

#[derive(Default)]
struct Match {
    hits: Vec<(usize, usize, usize)>, // (spectrum, level, peak)
    sse: f64,
}

fn match_candidate(obs: &[Obs], a: f64, cap: &[Vec<u32>]) -> Match {
    let mut m = Match::default();
    for (k, o) in obs.iter().enumerate() {
        for lev in 0..2 {
            if o.s[lev].abs() < MIN_SZ {
                continue;
            }
            let f = (-o.nu + o.s[lev] * a).abs();
            let near = o
                .peaks
                .iter()
                .enumerate()
                .filter(|(p, _)| cap[k][*p] > 0)
                .map(|(p, c)| (p, (c - f).abs()))
                .min_by(|x, y| x.1.total_cmp(&y.1));
            if let Some((p, d)) = near {
                if d <= o.tol {
                    m.hits.push((k, lev, p));
                    m.sse += d * d;
                }
            }
        }
    }
    m
}

fn usable_lines(obs: &[Obs]) -> usize {
    obs.iter().map(|o| o.s.iter().filter(|s| s.abs() >= MIN_SZ).count()).sum()
}

/// Least-squares coupling for a fixed line assignment.
fn refine_assigned(obs: &[Obs], hits: &[(usize, usize, usize)], a0: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &(k, lev, p) in hits {
        let o = &obs[k];
        let sgn = if -o.nu + o.s[lev] * a0 >= 0.0 { 1.0 } else { -1.0 };
        let c = o.s[lev] * sgn;
        num += c * (o.peaks[p] + sgn * o.nu);
        den += c * c;
    }
    if den > 0.0 {
        (num / den).max(0.0)
    } else {
        a0
    }
}

struct Joint<'a> {
    obs: &'a [Obs],
    n: usize,
}

impl Joint<'_> {
    fn layout(&self) -> (usize, usize) {
        // a (n), ln σ per spectrum, heights (spectrum, entry, level)
        (self.n, self.n + self.obs.len())
    }

    fn eval(&self, p: &DVector<f64>, with_jac: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
        let (sig0, h0) = self.layout();
        let rows: usize = self.obs.iter().map(|o| o.x.len()).sum();
        let mut r = DVector::zeros(rows);
        let mut j = with_jac.then(|| DMatrix::zeros(rows, p.len()));
        let mut row0 = 0;
        for (k, o) in self.obs.iter().enumerate() {
            let sigma = p[sig0 + k].exp();
            for (q, (&x, &y)) in o.x.iter().zip(&o.y).enumerate() {
                let row = row0 + q;
                r[row] = -y;
                for e in 0..self.n {
                    for lev in 0..2 {
                        let hi = h0 + (k * self.n + e) * 2 + lev;
                        let h = p[hi];
                        let arg = -o.nu + o.s[lev] * p[e];
                        let c = arg.abs();
                        let z = (x - c) / sigma;
                        if z.abs() > 8.0 {
                            continue;
                        }
                        let g = (-0.5 * z * z).exp();
                        r[row] += h * g;
                        if let Some(j) = j.as_mut() {
                            let sgn = if arg >= 0.0 { 1.0 } else { -1.0 };
                            j[(row, e)] += h * g * z / sigma * sgn * o.s[lev];
                            j[(row, sig0 + k)] += h * g * z * z;
                            j[(row, hi)] = g;
                        }
                    }
                }
            }
            row0 += o.x.len();
        }
        (r, j)
    }
}

impl Residuals for Joint<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        self.eval(p, false).0
    }
    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        self.eval(p, true).1.expect("requested")
    }
}

/// Isotropic couplings consistent with every spectrum (one field or
/// orientation each). With a single spectrum the pairing of peaks is not
/// unique; entries that another pairing explains equally well are marked
/// `low_confidence`.
pub fn extract_couplings(
    spec: &DonorSpec,
    spectra: &[MeasuredSpectrum],
    opts: &ExtractionOptions,
) -> Result<CouplingTable> {
    if spectra.is_empty() {
        return Err(Error::invalid("no spectra given"));
    }
    let obs = spectra.iter().map(|m| observe(spec, m, opts)).collect::<Result<Vec<_>>>()?;
    let total = usable_lines(&obs);
    if total == 0 {
        return Err(Error::invalid("every level is decoupled; couplings cannot be inferred"));
    }
    let needed = ((opts.min_match_fraction * total as f64).ceil() as usize).max(2.min(total));
    let a_cap = opts.max_coupling / 1e6;

    let mut candidates = Vec::new();
    for o in &obs {
        for &p in &o.peaks {
            for s in o.s {
                if s.abs() < MIN_SZ {
                    continue;
                }
                for a in [(o.nu + p) / s, (o.nu - p) / s] {
                    if a > -o.tol / s.abs() && a <= a_cap {
                        candidates.push(a.max(0.0));
                    }
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.total_cmp(b));
    candidates.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let full_cap: Vec<Vec<u32>> = obs.iter().map(|o| o.capacity.clone()).collect();
    let mut cap = full_cap.clone();
    let mut accepted: Vec<(f64, f64)> = Vec::new(); // (a, matched fraction)
    loop {
        let mut best: Option<(f64, Match)> = None;
        for &a in &candidates {
            let m = match_candidate(&obs, a, &cap);
            if m.hits.len() < needed {
                continue;
            }
            let better = match &best {
                None => true,
                Some((_, b)) => m.hits.len() > b.hits.len() || (m.hits.len() == b.hits.len() && m.sse < b.sse),
            };
            if better {
                best = Some((a, m));
            }
        }
        let Some((a0, m0)) = best else { break };
        let a = refine_assigned(&obs, &m0.hits, a0);
        let m = match_candidate(&obs, a, &cap);
        let m = if m.hits.len() >= m0.hits.len() { m } else { m0 };
        let mut consumed: Vec<(usize, usize)> = m.hits.iter().map(|h| (h.0, h.2)).collect();
        consumed.sort_unstable();
        consumed.dedup();
        for (k, p) in consumed {
            cap[k][p] -= 1;
        }
        accepted.push((a, m.hits.len() as f64 / total as f64));
    }
    if accepted.is_empty() {
        return Ok(CouplingTable::default());
    }

    // joint refinement against the raw spectra
    let n = accepted.len();
    let joint = Joint { obs: &obs, n };
    let (sig0, h0) = joint.layout();
    let mut p0 = DVector::zeros(h0 + obs.len() * n * 2);
    for (e, (a, _)) in accepted.iter().enumerate() {
        p0[e] = *a;
    }
    for (k, o) in obs.iter().enumerate() {
        p0[sig0 + k] = o.sigma.ln();
        for (e, (a, _)) in accepted.iter().enumerate() {
            for lev in 0..2 {
                let c = (-o.nu + o.s[lev] * a).abs();
                let crowd = accepted
                    .iter()
                    .flat_map(|(b, _)| o.s.iter().map(move |s| (-o.nu + s * b).abs()))
                    .filter(|d| (d - c).abs() < o.sigma)
                    .count()
                    .max(1);
                p0[h0 + (k * n + e) * 2 + lev] = interp(&o.x, &o.y, c) / crowd as f64;
            }
        }
    }
    let out = minimize(&joint, p0);

    let mut entries: Vec<CouplingEntry> = accepted
        .iter()
        .enumerate()
        .map(|(e, &(a_greedy, frac))| {
            let a = if out.converged { out.params[e].max(0.0) } else { a_greedy };
            let mut entry = CouplingEntry::isotropic("", a * 1e6);
            entry.low_confidence = frac < 0.9 || !out.converged;
            if obs.len() == 1 {
                let tol_a = obs[0].tol / obs[0].s.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(MIN_SZ);
                let rivals = candidates
                    .iter()
                    .filter(|&&b| (b - a).abs() > 2.0 * tol_a)
                    .filter(|&&b| match_candidate(&obs, b, &full_cap).hits.len() >= needed)
                    .count();
                entry.low_confidence |= rivals > 0;
            }
            entry
        })
        .collect();
    entries.sort_by(|x, y| x.a_iso.total_cmp(&y.a_iso));
    for (k, e) in entries.iter_mut().enumerate() {
        e.label = format!("E{}", k + 1);
    }
    Ok(CouplingTable { entries })
}

struct AnisoFit<'a> {
    spec: &'a DonorSpec,
    /// (ω₀, s, θ, assigned peak in MHz)
    points: Vec<(f64, f64, f64, f64)>,
}

impl AnisoFit<'_> {
    fn predict(&self, a: f64, t: f64, w: f64, s: f64, theta: f64) -> f64 {
        let (al, be) = effective_interaction(a, t, theta).unwrap_or((a, 0.0));
        (-self.spec.delta_si * w / (2.0 * PI) / 1e6 + s * al).hypot(s * be)
    }
}

impl Residuals for AnisoFit<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.points.len(),
            self.points.iter().map(|&(w, s, th, f)| self.predict(p[0], p[1], w, s, th) - f),
        )
    }
    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let h = 1e-7;
        let r0 = self.residuals(p);
        let mut j = DMatrix::zeros(self.points.len(), 2);
        for c in 0..2 {
            let mut q = p.clone();
            q[c] += h;
            let r1 = self.residuals(&q);
            j.set_column(c, &((r1 - &r0) / h));
        }
        j
    }
}

/// Fit `(a_iso, T)` of one anisotropic coupling from spectra recorded at
/// several orientations; each spectrum must carry its angle `theta`.
pub fn extract_anisotropic(
    spec: &DonorSpec,
    spectra: &[MeasuredSpectrum],
    opts: &ExtractionOptions,
) -> Result<CouplingEntry> {
    if spectra.len() < 2 {
        return Err(Error::invalid("anisotropic extraction needs at least two orientations"));
    }
    let mut obs = Vec::with_capacity(spectra.len());
    for m in spectra {
        let theta = m.theta.ok_or_else(|| Error::invalid("every orientation needs theta"))?;
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid(format!("angle {theta} outside [0, π]")));
        }
        let o = observe(spec, m, opts)?;
        obs.push((spec.omega0(m.field), o, theta));
    }
    let model = AnisoFit { spec, points: Vec::new() };
    let cost = |a: f64, t: f64| -> f64 {
        obs.iter()
            .map(|(w, o, th)| {
                o.s.iter()
                    .map(|&s| {
                        let f = model.predict(a, t, *w, s, *th);
                        let d = o.peaks.iter().map(|p| (p - f).abs()).fold(f64::INFINITY, f64::min);
                        d.min(3.0 * o.sigma).powi(2)
                    })
                    .sum::<f64>()
            })
            .sum()
    };
    // coarse search over a ∈ [0, cap], T ∈ [−cap, cap]
    let a_cap = (opts.max_coupling / 1e6).min(20.0);
    let step = 0.05;
    let steps = (a_cap / step).ceil() as i64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for ia in 0..=steps {
        for it in -steps..=steps {
            let (a, t) = (ia as f64 * step, it as f64 * step);
            let c = cost(a, t);
            if c < best.0 {
                best = (c, a, t);
            }
        }
    }
    let (_, a0, t0) = best;
    let mut points = Vec::new();
    for (w, o, th) in &obs {
        for &s in &o.s {
            let f = model.predict(a0, t0, *w, s, *th);
            let (p, d) = o
                .peaks
                .iter()
                .map(|p| (*p, (p - f).abs()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("fit_peaks returns at least one peak");
            if d <= 3.0 * o.sigma {
                points.push((*w, s, *th, p));
            }
        }
    }
    let fit = AnisoFit { spec, points };
    let out = minimize(&fit, DVector::from_vec(vec![a0, t0]));
    let mut entry = CouplingEntry::anisotropic("X", out.params[0] * 1e6, out.params[1] * 1e6, 0.0);
    entry.low_confidence = !out.converged || fit.points.len() < 2 * obs.len();
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endor::{synthesize_spectrum, CouplingTable};

    fn measured(table: &CouplingTable, upper: usize, lower: usize, b: f64) -> MeasuredSpectrum {
        let s = synthesize_spectrum(&DonorSpec::si_bi(), table, upper, lower, b, 40e3, None).unwrap();
        MeasuredSpectrum::new(s.freq, s.amplitude, b, (upper, lower)).unwrap()
    }

    #[test]
    fn peak_fit_recovers_two_gaussians() {
        let x: Vec<f64> = (0..600).map(|k| k as f64 * 5e3).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&f| {
                super::super::spectrum::gaussian(f, 1.0e6, 4e4) + 2.0 * super::super::spectrum::gaussian(f, 1.3e6, 4e4)
            })
            .collect();
        let fit = fit_peaks(&x, &y, None, 0.1).unwrap();
        assert_eq!(fit.centres.len(), 2);
        assert!((fit.centres[0] - 1.0e6).abs() < 1.0);
        assert!((fit.centres[1] - 1.3e6).abs() < 1.0);
        assert!((fit.sigma - 4e4).abs() < 1.0);
        let areas = fit.areas();
        assert!((areas[1] / areas[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn flat_spectrum_is_rejected() {
        assert!(fit_peaks(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0; 5], None, 0.1).is_err());
    }

    #[test]
    fn peak_at_bare_zeeman_means_zero_coupling() {
        let t = CouplingTable { entries: vec![CouplingEntry::isotropic("z", 0.0)] };
        let m = measured(&t, 12, 9, 0.32);
        let out = extract_couplings(&DonorSpec::si_bi(), &[m], &ExtractionOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.entries[0].a_iso.abs() < 1e3, "{:?}", out.entries);
    }

    #[test]
    fn two_fields_pin_couplings() {
        let t =
            CouplingTable { entries: vec![CouplingEntry::isotropic("a", 1.1e6), CouplingEntry::isotropic("b", 3.7e6)] };
        let spectra = [measured(&t, 14, 7, 0.3213), measured(&t, 16, 5, 0.2033)];
        let out = extract_couplings(&DonorSpec::si_bi(), &spectra, &ExtractionOptions::default()).unwrap();
        assert_eq!(out.len(), 2, "{:?}", out.entries);
        assert!((out.entries[0].a_iso - 1.1e6).abs() < 1e3);
        assert!((out.entries[1].a_iso - 3.7e6).abs() < 1e3);
        assert!(out.entries.iter().all(|e| !e.low_confidence));
    }
}
