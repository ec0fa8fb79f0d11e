//! Optimal working points and `df/dB` extrema.

use serde::{Deserialize, Serialize};

use super::roots::{bisect, sign_changes};
use crate::spin::{
    df_db_closed_form, eigensystem, sx_element, Branch, DonorEigensystem, DonorOperators, DonorSpec, TransitionSpec,
};
use crate::{Error, Result};

/// Field window searched for roots (T).
pub const SEARCH_RANGE: (f64, f64) = (1e-3, 1.0);
/// Scan steps across [`SEARCH_RANGE`] before bisection.
pub const SCAN_STEPS: usize = 2000;
/// `|⟨i|S_x|j⟩|` above which a transition counts as dipole-allowed.
pub const ALLOWED_SX: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OwpReport {
    pub transition: TransitionSpec,
    /// Field where both levels couple equally to the bath (T).
    pub b_owp: f64,
    /// Field where `df/dB = 0` (T).
    pub b_dfdb_zero: Option<f64>,
    /// `(γ_m(upper), γ_m(lower))` at `b_owp`.
    pub gamma_values: (f64, f64),
}

/// `(m, branch)` of a label; taken at a reference field since adiabatic
/// labels do not change character below 1 T.
fn doublet_of(spec: &DonorSpec, label: usize) -> Result<(i32, Branch)> {
    let es = eigensystem(spec, 0.1)?;
    let l = es.level(label)?;
    Ok((l.m, l.branch))
}

/// `⟨S_z⟩` of `(m, branch)` at `ω₀`. The stretched states are pure
/// `|m_S = ±½⟩` at every field, whatever branch they were labelled with.
fn sz_at(spec: &DonorSpec, m: i32, branch: Branch, omega0: f64) -> f64 {
    if m.abs() == spec.m_max() {
        0.5 * m.signum() as f64
    } else {
        spec.sz(m, branch, omega0)
    }
}

/// Locate the optimal working point of `upper → lower`: the field where
/// `⟨S_z⟩` of the two levels coincide, i.e. `Δ⟨S_z⟩ = 0`. For `|12⟩→|9⟩`
/// this is `γ₋₃ = −γ₋₄`.
///
/// Returns `None` when `Δ⟨S_z⟩` keeps its sign over [`SEARCH_RANGE`] (always
/// the case for the unmixed `|m| = 5` states).
pub fn find_owp(spec: &DonorSpec, upper: usize, lower: usize) -> Result<Option<OwpReport>> {
    if upper == lower {
        return Err(Error::invalid("transition needs two distinct levels"));
    }
    let (mu, bu) = doublet_of(spec, upper)?;
    let (ml, bl) = doublet_of(spec, lower)?;
    let g = |b: f64| -> Result<f64> {
        let w = spec.omega0(b);
        Ok(sz_at(spec, mu, bu, w) - sz_at(spec, ml, bl, w))
    };
    let (lo, hi) = SEARCH_RANGE;
    let Some(&(a, b)) = sign_changes(g, lo, hi, SCAN_STEPS)?.first() else {
        return Ok(None);
    };
    let b_owp = bisect(g, a, b, 0.0)?;
    let w = spec.omega0(b_owp);

    // df/dB = 0 lies within the bracket for the small δ_Bi of bismuth; widen
    // to a few scan steps to be safe
    let dfdb = |b: f64| -> Result<f64> {
        let es = eigensystem(spec, b)?;
        df_db_closed_form(spec, &es, upper, lower)
    };
    let step = (hi - lo) / SCAN_STEPS as f64;
    let (wa, wb) = ((b_owp - 5.0 * step).max(lo), (b_owp + 5.0 * step).min(hi));
    let b_dfdb_zero = match sign_changes(dfdb, wa, wb, 50)?.first() {
        Some(&(x, y)) => Some(bisect(dfdb, x, y, 0.0)?),
        None => None,
    };
    Ok(Some(OwpReport {
        transition: TransitionSpec::at(spec, upper, lower, b_owp)?,
        b_owp,
        b_dfdb_zero,
        gamma_values: (spec.gamma(mu, w), spec.gamma(ml, w)),
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

/// A turning point of a transition frequency against field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfDbExtremum {
    pub upper: usize,
    pub lower: usize,
    /// T
    pub field: f64,
    /// Hz
    pub frequency: f64,
    pub sx: f64,
    pub kind: ExtremumKind,
}

type Key = (i32, Branch);

/// Label of `(m, branch)`; the single-member `|m| = m_max` states are
/// matched on `m` alone because their branch flips with the sign of `Ω_m`.
fn find_label(spec: &DonorSpec, es: &DonorEigensystem, key: Key) -> Option<usize> {
    if key.0.abs() == spec.m_max() {
        es.levels.iter().position(|l| l.m == key.0).map(|k| k + 1)
    } else {
        es.label_of(key.0, key.1)
    }
}

/// All `df/dB = 0` points of dipole-allowed transitions in `[f_min, f_max]`
/// (Hz) for fields in [`SEARCH_RANGE`], sorted by frequency.
///
/// Transitions are tracked by the `(m, branch)` of their levels so a scan
/// step never pairs different states. Only `Δm = ±1` pairs carry `S_x`
/// weight; each root is kept if `|⟨i|S_x|j⟩| > ALLOWED_SX` there.
pub fn find_df_db_extrema(spec: &DonorSpec, f_min: f64, f_max: f64) -> Result<Vec<DfDbExtremum>> {
    if !(f_min < f_max) {
        return Err(Error::invalid("f_min must be below f_max"));
    }
    let mm = spec.m_max();
    let mut keys: Vec<Key> = Vec::new();
    for m in -mm..=mm {
        for br in [Branch::Minus, Branch::Plus] {
            if m.abs() < mm || br == Branch::Plus {
                keys.push((m, br));
            }
        }
    }
    let ops = DonorOperators::new(spec)?;
    let labels = |es: &DonorEigensystem, p: Key, q: Key| -> Result<(usize, usize)> {
        let (a, b) = (find_label(spec, es, p), find_label(spec, es, q));
        match (a, b) {
            (Some(a), Some(b)) => Ok(if a > b { (a, b) } else { (b, a) }),
            _ => Err(Error::invalid("level lost while tracking doublets")),
        }
    };
    let (lo, hi) = SEARCH_RANGE;
    let grid: Vec<f64> = (0..=SCAN_STEPS).map(|k| lo + (hi - lo) * k as f64 / SCAN_STEPS as f64).collect();
    let systems = grid.iter().map(|&b| eigensystem(spec, b)).collect::<Result<Vec<_>>>()?;
    let slope = |es: &DonorEigensystem, p: Key, q: Key| -> Result<f64> {
        let (u, l) = labels(es, p, q)?;
        df_db_closed_form(spec, es, u, l)
    };
    let mut out = Vec::new();
    for (k, &p) in keys.iter().enumerate() {
        for &q in &keys[k + 1..] {
            if (p.0 - q.0).abs() != 1 {
                continue;
            }
            let values = systems.iter().map(|es| slope(es, p, q)).collect::<Result<Vec<_>>>()?;
            for w in 0..SCAN_STEPS {
                let (before, after) = (values[w], values[w + 1]);
                if before == 0.0 || (before > 0.0) == (after > 0.0) || after == 0.0 {
                    continue;
                }
                let root = bisect(|b| slope(&eigensystem(spec, b)?, p, q), grid[w], grid[w + 1], 0.0)?;
                let es = eigensystem(spec, root)?;
                let (u, l) = labels(&es, p, q)?;
                let frequency = (es.energy(u)? - es.energy(l)?) / (2.0 * std::f64::consts::PI);
                let sx = sx_element(&es, &ops, u, l)?;
                if sx > ALLOWED_SX && (f_min..=f_max).contains(&frequency) {
                    let kind = if before < 0.0 { ExtremumKind::Minimum } else { ExtremumKind::Maximum };
                    out.push(DfDbExtremum { upper: u, lower: l, field: root, frequency, sx, kind });
                }
            }
        }
    }
    out.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn owp_of_12_9() {
        let spec = DonorSpec::si_bi();
        let r = find_owp(&spec, 12, 9).unwrap().unwrap();
        assert!((r.b_owp - 0.18797).abs() < 1e-4, "{}", r.b_owp);
        assert!((r.gamma_values.0 + r.gamma_values.1).abs() < 1e-8);
        let z = r.b_dfdb_zero.unwrap();
        assert!((z - r.b_owp).abs() < 1e-3);
        // only the small nuclear Zeeman slope remains
        assert!(r.transition.dfdb.abs() < 1e7, "{}", r.transition.dfdb);
    }

    #[test]
    fn stretched_states_have_no_owp() {
        let spec = DonorSpec::si_bi();
        let es = eigensystem(&spec, 0.1).unwrap();
        let top = find_label(&spec, &es, (5, Branch::Plus)).unwrap();
        let bottom = find_label(&spec, &es, (-5, Branch::Plus)).unwrap();
        assert!(find_owp(&spec, top, bottom).unwrap().is_none());
    }

    #[test]
    fn empty_above_every_transition() {
        let spec = DonorSpec::si_bi();
        assert!(find_df_db_extrema(&spec, 100e9, 200e9).unwrap().is_empty());
        assert!(find_df_db_extrema(&spec, 2e9, 1e9).is_err());
    }
}
