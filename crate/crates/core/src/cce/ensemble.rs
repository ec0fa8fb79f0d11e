//! Configuration averages, time grids and echo-curve files.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expansion::{configuration_echo, CceOptions, Kernel};
use super::system::EchoContext;
use crate::io::{fmt_f64, parse_table, render_table, Metadata};
use crate::lattice::{BathModel, LatticeSpec};
use crate::spin::DonorSpec;
use crate::{Error, Result};

/// Default end of the time grid (t = 2τ, seconds).
pub const DEFAULT_T_MAX: f64 = 4e-3;

/// Successive grid ends tried by [`adaptive_echo`].
pub const ADAPTIVE_T_MAX: [f64; 5] = [4e-3, 4e-2, 4e-1, 4.0, 10.0];

/// Echo times `t = 2τ` with 60 points: zero, 14 geometric points resolving
/// the early curvature, then 45 uniform points up to `t_max`.
pub fn default_times(t_max: f64) -> Result<Vec<f64>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::invalid("t_max must be positive"));
    }
    let step = t_max / 45.0;
    let (lo, n_geo) = (t_max / 1000.0, 14);
    let ratio = (step / lo).powf(1.0 / n_geo as f64);
    let mut t = vec![0.0];
    t.extend((0..n_geo).map(|k| lo * ratio.powi(k)));
    t.extend((1..=45).map(|k| k as f64 * step));
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub lattice: LatticeSpec,
    pub upper: usize,
    pub lower: usize,
    /// T
    pub field: f64,
    pub k_max: usize,
    pub r_max: Option<f64>,
    pub kernel: Kernel,
    pub n_configs: usize,
    pub seed: u64,
    /// Average complex amplitudes instead of echo intensities.
    pub amplitude_average: bool,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        EnsembleParams {
            lattice: LatticeSpec::default(),
            upper: 12,
            lower: 9,
            field: 0.32,
            k_max: 2,
            r_max: None,
            kernel: Kernel::Fast,
            n_configs: 100,
            seed: 0,
            amplitude_average: false,
        }
    }
}

impl EnsembleParams {
    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        if self.n_configs == 0 {
            return Err(Error::invalid("n_configs must be at least 1"));
        }
        if !(1..=3).contains(&self.k_max) {
            return Err(Error::invalid(format!("k_max {} outside 1..=3", self.k_max)));
        }
        if !(self.field >= 0.0 && self.field.is_finite()) {
            return Err(Error::invalid("field must be finite and non-negative"));
        }
        Ok(())
    }

    fn options(&self) -> CceOptions {
        CceOptions { k_max: self.k_max, r_max: self.r_max, kernel: self.kernel }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoMeta {
    pub upper: usize,
    pub lower: usize,
    /// T
    pub field: f64,
    pub k_max: usize,
    pub n_configs: usize,
    pub seed: u64,
    /// Å
    pub side_length: f64,
    pub occupancy: f64,
    pub invalid_divisions: usize,
    pub amplitude_average: bool,
}

/// Normalised echo intensity against `t = 2τ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoCurve {
    pub times: Vec<f64>,
    pub l: Vec<f64>,
    pub meta: EchoMeta,
    /// Per-configuration curves, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_config: Option<Vec<Vec<f64>>>,
}

impl EchoCurve {
    pub fn metadata(&self) -> Metadata {
        let m = &self.meta;
        Metadata::new()
            .with("transition", format!("{},{}", m.upper, m.lower))
            .with("B_mT", fmt_f64(m.field * 1e3))
            .with("k_max", m.k_max)
            .with("n_configs", m.n_configs)
            .with("seed", m.seed)
            .with("side_length_A", fmt_f64(m.side_length))
            .with("occupancy", fmt_f64(m.occupancy))
            .with("invalid_divisions", m.invalid_divisions)
            .with("amplitude_average", m.amplitude_average)
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> =
            self.times.iter().zip(&self.l).map(|(t, l)| vec![fmt_f64(*t), fmt_f64(*l)]).collect();
        render_table(&self.metadata(), &["t_seconds", "L"], &rows)
    }

    pub fn from_csv(text: &str, source: &str) -> Result<Self> {
        let t = parse_table(text, source)?;
        let (tc, lc) = (t.column("t_seconds")?, t.column("L")?);
        let mut times = Vec::with_capacity(t.rows.len());
        let mut l = Vec::with_capacity(t.rows.len());
        for row in 0..t.rows.len() {
            times.push(t.f64_at(row, tc)?);
            l.push(t.f64_at(row, lc)?);
        }
        let missing = |k: &str| Error::invalid(format!("{source}: metadata '{k}' missing or malformed"));
        let num = |k: &str| t.meta.get_f64(k).ok_or_else(|| missing(k));
        let int = |k: &str| t.meta.get(k).and_then(|v| v.parse::<u64>().ok()).ok_or_else(|| missing(k));
        let (upper, lower) = t
            .meta
            .get("transition")
            .and_then(|v| v.split_once(','))
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
            .ok_or_else(|| missing("transition"))?;
        let meta = EchoMeta {
            upper,
            lower,
            field: num("B_mT")? / 1e3,
            k_max: int("k_max")? as usize,
            n_configs: int("n_configs")? as usize,
            seed: int("seed")?,
            side_length: num("side_length_A")?,
            occupancy: num("occupancy")?,
            invalid_divisions: int("invalid_divisions").unwrap_or(0) as usize,
            amplitude_average: t.meta.get("amplitude_average") == Some("true"),
        };
        Ok(EchoCurve { times, l, meta, per_config: None })
    }

    /// Write `path` (CSV) and `path` with a `.json` extension (metadata).
    pub fn write(&self, path: &Path) -> Result<()> {
        crate::io::write_text(path, self.to_csv())?;
        crate::io::write_text(&path.with_extension("json"), serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }

    /// Read a curve written by [`EchoCurve::write`]. The JSON sidecar, when
    /// present, supplies the metadata exactly (the CSV header carries mT).
    pub fn read(path: &Path) -> Result<Self> {
        let text = crate::io::read_text(path)?;
        let mut curve = Self::from_csv(&text, &path.display().to_string())?;
        let side = path.with_extension("json");
        if side.exists() {
            curve.meta = serde_json::from_str(&crate::io::read_text(&side)?)?;
        }
        Ok(curve)
    }

    pub fn min(&self) -> f64 {
        self.l.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Average echo of `params.n_configs` random configurations.
///
/// Configuration `k` is drawn with seed `params.seed ^ k`. Configurations run
/// in parallel but are reduced in index order, so the result is bit-identical
/// for any thread count.
pub fn ensemble_average(spec: &DonorSpec, params: &EnsembleParams, times: &[f64]) -> Result<EchoCurve> {
    params.validate()?;
    let model = BathModel::new(spec, &params.lattice)?;
    ensemble_average_with(&model, params, times, false)
}

/// As [`ensemble_average`] on a prepared lattice, optionally keeping every
/// configuration's curve.
pub fn ensemble_average_with(
    model: &BathModel,
    params: &EnsembleParams,
    times: &[f64],
    keep_curves: bool,
) -> Result<EchoCurve> {
    params.validate()?;
    let ctx = EchoContext::new(&model.spec, params.field, (params.upper, params.lower))?;
    let taus: Vec<f64> = times.iter().map(|t| t / 2.0).collect();
    let opts = params.options();
    let runs = (0..params.n_configs)
        .into_par_iter()
        .map(|k| {
            let config = model.sample(params.lattice.occupancy, params.seed ^ k as u64)?;
            configuration_echo(&config, &ctx, &opts, &taus)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = params.n_configs as f64;
    let mut invalid = 0;
    let l = if params.amplitude_average {
        let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); times.len()];
        for (curve, bad) in &runs {
            invalid += bad;
            acc.iter_mut().zip(curve).for_each(|(a, c)| *a += c);
        }
        acc.iter().map(|a| a.norm() / n).collect()
    } else {
        let mut acc = vec![0.0; times.len()];
        for (curve, bad) in &runs {
            invalid += bad;
            acc.iter_mut().zip(curve).for_each(|(a, c)| *a += c.norm());
        }
        acc.iter().map(|a| a / n).collect()
    };
    let per_config = keep_curves.then(|| runs.iter().map(|(c, _)| c.iter().map(|x| x.norm()).collect()).collect());
    Ok(EchoCurve {
        times: times.to_vec(),
        l,
        meta: EchoMeta {
            upper: params.upper,
            lower: params.lower,
            field: params.field,
            k_max: params.k_max,
            n_configs: params.n_configs,
            seed: params.seed,
            side_length: params.lattice.side_length,
            occupancy: params.lattice.occupancy,
            invalid_divisions: invalid,
            amplitude_average: params.amplitude_average,
        },
        per_config,
    })
}

/// Run on the default grid, extending the end time through
/// [`ADAPTIVE_T_MAX`] while the echo stays above `1/e`.
pub fn adaptive_echo(model: &BathModel, params: &EnsembleParams) -> Result<EchoCurve> {
    let mut curve = None;
    for &t_max in &ADAPTIVE_T_MAX {
        let c = ensemble_average_with(model, params, &default_times(t_max)?, false)?;
        let done = c.min() <= (-1.0f64).exp();
        curve = Some(c);
        if done {
            break;
        }
    }
    Ok(curve.expect("at least one grid"))
}
