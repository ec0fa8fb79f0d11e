//! `T_SD` against field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fit::{fit_curve, DecayFit};
use super::owp::find_owp;
use crate::cce::{adaptive_echo, default_times, ensemble_average_with, EchoCurve, EnsembleParams, DEFAULT_T_MAX};
use crate::io::{fmt_f64, parse_table, render_table, Metadata};
use crate::lattice::BathModel;
use crate::spin::DonorSpec;
use crate::{Error, Result};

const COLUMNS: [&str; 8] =
    ["B_mT", "T_SD_s", "n", "T2_s", "diverged", "T_SD_lower_bound_s", "residual_rms", "converged"];

/// Golden-ratio increment used to spread per-field seeds.
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of sweep entry `index` under master seed `master`.
pub fn entry_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add((index as u64).wrapping_mul(SEED_STRIDE))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Extend the time grid while the echo has not decayed.
    pub adaptive: bool,
    /// Grid end when not adaptive (s).
    pub t_max: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { adaptive: true, t_max: DEFAULT_T_MAX }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    /// T
    pub field: f64,
    pub seed: u64,
    /// Fit, or the reason this field failed.
    pub fit: std::result::Result<DecayFit, String>,
    #[serde(skip)]
    pub curve: Option<EchoCurve>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub params: EnsembleParams,
    /// OWP of the swept transition, if it has one.
    pub b_owp: Option<f64>,
    /// Neighbouring fields on the same side of the OWP where `T_SD` (or its
    /// bound) fails to grow towards it.
    pub monotonicity_violations: Vec<(f64, f64)>,
}

impl SweepResult {
    pub fn fields(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.field).collect()
    }

    pub fn to_csv(&self, meta: &Metadata) -> String {
        let blank = String::new;
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| match &e.fit {
                Ok(f) => vec![
                    fmt_f64(e.field * 1e3),
                    fmt_f64(f.t_sd),
                    fmt_f64(f.n),
                    f.t2.map_or_else(blank, fmt_f64),
                    f.diverged.to_string(),
                    f.t_sd_lower_bound.map_or_else(blank, fmt_f64),
                    fmt_f64(f.residual_rms),
                    f.converged.to_string(),
                ],
                Err(_) => {
                    let mut row = vec![blank(); COLUMNS.len()];
                    row[0] = fmt_f64(e.field * 1e3);
                    row
                }
            })
            .collect();
        let mut meta = meta.clone();
        if let Some(b) = self.b_owp {
            meta.set("B_owp_mT", fmt_f64(b * 1e3));
        }
        meta.set("transition", format!("{},{}", self.params.upper, self.params.lower))
            .set("n_configs", self.params.n_configs)
            .set("k_max", self.params.k_max)
            .set("seed", self.params.seed)
            .set("side_length_A", fmt_f64(self.params.lattice.side_length))
            .set("occupancy", fmt_f64(self.params.lattice.occupancy));
        for (k, e) in self.entries.iter().enumerate() {
            if let Err(msg) = &e.fit {
                meta.set(&format!("error_{k}"), msg.replace('\n', " "));
            }
        }
        render_table(&meta, &COLUMNS, &rows)
    }

    /// Entries back from [`SweepResult::to_csv`] output (without curves), plus
    /// the header metadata. Seeds are re-derived from the master seed.
    pub fn entries_from_csv(text: &str, source: &str) -> Result<(Vec<SweepEntry>, Metadata)> {
        let t = parse_table(text, source)?;
        let col = COLUMNS.map(|c| t.column(c));
        let [b, tsd, n, t2, div, bound, rms, conv] = col;
        let (b, tsd, n, t2, div, bound, rms, conv) = (b?, tsd?, n?, t2?, div?, bound?, rms?, conv?);
        let master = t.meta.get("seed").and_then(|v| v.parse::<u64>().ok()).unwrap_or(0);
        let mut entries = Vec::with_capacity(t.rows.len());
        for (k, (line, row)) in t.rows.iter().enumerate() {
            let opt = |c: usize| -> Result<Option<f64>> {
                if row[c].is_empty() {
                    Ok(None)
                } else {
                    t.f64_at(k, c).map(Some)
                }
            };
            let flag = |c: usize| -> Result<bool> {
                row[c].parse::<bool>().map_err(|_| Error::Parse {
                    file: source.to_string(),
                    line: *line,
                    message: format!("'{}' is not true/false", row[c]),
                })
            };
            let fit = match opt(tsd)? {
                Some(t_sd) => Ok(DecayFit {
                    t2: opt(t2)?,
                    t_sd,
                    n: t.f64_at(k, n)?,
                    residual_rms: t.f64_at(k, rms)?,
                    diverged: flag(div)?,
                    t_sd_lower_bound: opt(bound)?,
                    converged: flag(conv)?,
                }),
                None => Err(t.meta.get(&format!("error_{k}")).unwrap_or("fit failed").to_string()),
            };
            entries.push(SweepEntry { field: t.f64_at(k, b)? / 1e3, seed: entry_seed(master, k), fit, curve: None });
        }
        Ok((entries, t.meta))
    }

    pub fn write_csv(&self, path: &Path, meta: &Metadata) -> Result<()> {
        crate::io::write_text(path, self.to_csv(meta))?;
        Ok(())
    }
}

/// Ensemble echo and decay fit at every field.
///
/// Field `k` uses seed [`entry_seed`]`(params.seed, k)`. A failure at one
/// field is recorded in its entry and the sweep carries on.
pub fn tsd_sweep(
    spec: &DonorSpec,
    params: &EnsembleParams,
    fields: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if fields.is_empty() {
        return Err(Error::invalid("field list is empty"));
    }
    params.validate()?;
    let model = BathModel::new(spec, &params.lattice)?;
    let entries = fields
        .iter()
        .enumerate()
        .map(|(k, &field)| {
            let seed = entry_seed(params.seed, k);
            let p = EnsembleParams { field, seed, ..*params };
            let run = || -> Result<(EchoCurve, DecayFit)> {
                let curve = if opts.adaptive {
                    adaptive_echo(&model, &p)?
                } else {
                    ensemble_average_with(&model, &p, &default_times(opts.t_max)?, false)?
                };
                let fit = fit_curve(&curve)?;
                Ok((curve, fit))
            };
            match run() {
                Ok((curve, fit)) => SweepEntry { field, seed, fit: Ok(fit), curve: Some(curve) },
                Err(e) => SweepEntry { field, seed, fit: Err(e.to_string()), curve: None },
            }
        })
        .collect::<Vec<_>>();
    let b_owp = find_owp(spec, params.upper, params.lower)?.map(|r| r.b_owp);
    let monotonicity_violations = b_owp.map(|b| monotonicity_violations(&entries, b)).unwrap_or_default();
    Ok(SweepResult { entries, params: *params, b_owp, monotonicity_violations })
}

/// Pairs of fields on one side of `b_owp`, ordered towards it, where the
/// effective `T_SD` decreases. Two diverged bounds may tie.
pub fn monotonicity_violations(entries: &[SweepEntry], b_owp: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for below in [true, false] {
        let mut side: Vec<(f64, DecayFit)> = entries
            .iter()
            .filter(|e| (e.field < b_owp) == below)
            .filter_map(|e| e.fit.as_ref().ok().map(|f| (e.field, *f)))
            .collect();
        side.sort_by(|a, b| (b.0 - b_owp).abs().total_cmp(&(a.0 - b_owp).abs()));
        for w in side.windows(2) {
            let (far, near) = (&w[0].1, &w[1].1);
            let tie_ok = far.diverged && near.diverged;
            let grows =
                near.effective_t_sd() > far.effective_t_sd() || tie_ok && near.effective_t_sd() >= far.effective_t_sd();
            if !grows {
                out.push((w[0].0, w[1].0));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fit_decay;
    use crate::lattice::LatticeSpec;

    fn entry(field: f64, t_sd: f64, diverged: bool) -> SweepEntry {
        let fit = DecayFit {
            t2: None,
            t_sd,
            n: 2.0,
            residual_rms: 0.0,
            diverged,
            t_sd_lower_bound: diverged.then_some(t_sd),
            converged: true,
        };
        SweepEntry { field, seed: 0, fit: Ok(fit), curve: None }
    }

    #[test]
    fn seeds_are_distinct() {
        let s: std::collections::BTreeSet<u64> = (0..100).map(|k| entry_seed(7, k)).collect();
        assert_eq!(s.len(), 100);
        assert_eq!(entry_seed(7, 0), 7);
    }

    #[test]
    fn csv_round_trip() {
        let mut entries = vec![entry(0.17, 1.25e-3, false), entry(0.188, 3.5, true)];
        entries.push(SweepEntry { field: 0.2, seed: 0, fit: Err("no data".into()), curve: None });
        for (k, e) in entries.iter_mut().enumerate() {
            e.seed = entry_seed(11, k);
        }
        let params = EnsembleParams { seed: 11, ..EnsembleParams::default() };
        let r = SweepResult { entries, params, b_owp: None, monotonicity_violations: vec![] };
        let text = r.to_csv(&Metadata::new());
        let (back, meta) = SweepResult::entries_from_csv(&text, "sweep").unwrap();
        assert_eq!(meta.get("seed"), Some("11"));
        for (a, b) in r.entries.iter().zip(&back) {
            assert!((a.field - b.field).abs() < 1e-15);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.fit, b.fit);
        }
    }

    #[test]
    fn detects_dips() {
        let e = vec![
            entry(0.17, 1e-3, false),
            entry(0.18, 5e-3, false),
            entry(0.195, 2e-3, false),
            entry(0.20, 3e-3, false),
        ];
        assert_eq!(monotonicity_violations(&e, 0.188), vec![(0.20, 0.195)]);
        let d = vec![entry(0.186, 0.5, true), entry(0.187, 0.5, true)];
        assert!(monotonicity_violations(&d, 0.188).is_empty());
    }

    #[test]
    fn single_field_matches_direct_pipeline() {
        let spec = DonorSpec::si_bi();
        let params = EnsembleParams {
            lattice: LatticeSpec { side_length: 40.0, ..LatticeSpec::default() },
            n_configs: 3,
            seed: 5,
            field: 0.32,
            ..EnsembleParams::default()
        };
        let opts = SweepOptions { adaptive: false, t_max: 4e-3 };
        let r = tsd_sweep(&spec, &params, &[0.32], &opts).unwrap();
        assert_eq!(r.entries.len(), 1);
        let model = BathModel::new(&spec, &params.lattice).unwrap();
        let direct = ensemble_average_with(&model, &params, &default_times(4e-3).unwrap(), false).unwrap();
        let fit = fit_decay(&direct.times, &direct.l);
        assert_eq!(r.entries[0].fit.as_ref().ok(), fit.as_ref().ok());
        let csv = r.to_csv(&Metadata::new());
        assert!(csv.contains("B_owp_mT="));
        assert!(tsd_sweep(&spec, &params, &[], &opts).is_err());
    }
}
