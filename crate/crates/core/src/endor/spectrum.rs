use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::lines::{endor_lines, ENDORLine};
use super::table::CouplingTable;
use crate::io::{fmt_f64, parse_key_values, parse_table, render_table, Metadata};
use crate::spin::{eigensystem, sx_element, DonorOperators, DonorSpec};
use crate::{Error, Result};

/// Default Gaussian linewidth (Hz).
pub const DEFAULT_LINEWIDTH: f64 = 40e3;

/// Sum of equal-width unit-area Gaussians on a frequency grid (Hz).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freq: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub sigma: f64,
}

pub fn gaussian(f: f64, centre: f64, sigma: f64) -> f64 {
    let z = (f - centre) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

fn check_grid(freq: &[f64]) -> Result<()> {
    if freq.is_empty() {
        return Err(Error::invalid("frequency grid is empty"));
    }
    if freq.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("frequency grid must be strictly increasing"));
    }
    Ok(())
}

/// Uniform grid from 0 to 10σ beyond the highest line (or the bare ²⁹Si
/// Zeeman frequency), spaced σ/8.
pub fn default_grid(lines: &[ENDORLine], bare: f64, sigma: f64) -> Vec<f64> {
    let top = lines.iter().map(|l| l.frequency).fold(bare, f64::max) + 10.0 * sigma;
    let step = sigma / 8.0;
    let n = (top / step).ceil() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

impl Spectrum {
    pub fn from_lines(lines: &[ENDORLine], sigma: f64, freq: Vec<f64>) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("linewidth must be positive"));
        }
        check_grid(&freq)?;
        let amplitude = freq
            .iter()
            .map(|&f| lines.iter().fold(0.0, |acc, l| acc + l.intensity * gaussian(f, l.frequency, sigma)))
            .collect();
        Ok(Spectrum { freq, amplitude, sigma })
    }

    pub fn to_csv(&self, meta: &Metadata) -> String {
        let meta = meta.clone().with("sigma_kHz", fmt_f64(self.sigma / 1e3));
        let rows: Vec<Vec<String>> =
            self.freq.iter().zip(&self.amplitude).map(|(f, a)| vec![fmt_f64(f / 1e6), fmt_f64(*a)]).collect();
        render_table(&meta, &["frequency_MHz", "amplitude"], &rows)
    }

    pub fn from_csv(text: &str, source: &str) -> Result<(Self, Metadata)> {
        let (freq, amplitude, meta) = parse_two_column(text, source)?;
        if amplitude.iter().any(|&a| a < 0.0) {
            return Err(Error::invalid(format!("{source}: synthesized spectra must be non-negative")));
        }
        let sigma = meta.get_f64("sigma_kHz").map(|s| s * 1e3).unwrap_or(DEFAULT_LINEWIDTH);
        Ok((Spectrum { freq, amplitude, sigma }, meta))
    }
}

fn parse_two_column(text: &str, source: &str) -> Result<(Vec<f64>, Vec<f64>, Metadata)> {
    let t = parse_table(text, source)?;
    let fc = t.column("frequency_MHz")?;
    let ac = t.column("amplitude")?;
    let mut freq = Vec::with_capacity(t.rows.len());
    let mut amp = Vec::with_capacity(t.rows.len());
    for row in 0..t.rows.len() {
        let f = t.f64_at(row, fc)? * 1e6;
        if let Some(&prev) = freq.last() {
            if !(f > prev) {
                return Err(t.parse_err(row, "frequencies must increase strictly"));
            }
        }
        freq.push(f);
        amp.push(t.f64_at(row, ac)?);
    }
    if freq.is_empty() {
        return Err(Error::Parse { file: source.into(), line: 1, message: "spectrum has no rows".into() });
    }
    Ok((freq, amp, t.meta))
}

/// Synthetic spectrum of `table` on both levels of `upper → lower` at `field`.
/// `grid` defaults to [`default_grid`].
pub fn synthesize_spectrum(
    spec: &DonorSpec,
    table: &CouplingTable,
    upper: usize,
    lower: usize,
    field: f64,
    sigma: f64,
    grid: Option<Vec<f64>>,
) -> Result<Spectrum> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("linewidth must be positive"));
    }
    let lines = endor_lines(spec, table, upper, lower, field)?;
    let freq = grid.unwrap_or_else(|| default_grid(&lines, spec.si_zeeman(field) / (2.0 * PI), sigma));
    Spectrum::from_lines(&lines, sigma, freq)
}

/// Spread `max − min` of the line positions (Hz).
pub fn comb_width(lines: &[ENDORLine]) -> f64 {
    let (lo, hi) =
        lines.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(l.frequency), hi.max(l.frequency)));
    if lines.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Midpoint of the line positions (Hz).
pub fn comb_centre(lines: &[ENDORLine]) -> f64 {
    let (lo, hi) =
        lines.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(l.frequency), hi.max(l.frequency)));
    0.5 * (lo + hi)
}

/// A measured (or noisy synthetic) spectrum with its acquisition conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSpectrum {
    /// Hz
    pub freq: Vec<f64>,
    pub amplitude: Vec<f64>,
    /// T
    pub field: f64,
    /// Hz
    pub mw_frequency: Option<f64>,
    pub orientation: String,
    /// Field angle to the coupling axis when known (rad).
    pub theta: Option<f64>,
    pub transition: (usize, usize),
}

impl MeasuredSpectrum {
    pub fn new(freq: Vec<f64>, amplitude: Vec<f64>, field: f64, transition: (usize, usize)) -> Result<Self> {
        check_grid(&freq)?;
        if freq.len() != amplitude.len() {
            return Err(Error::invalid("frequency and amplitude lengths differ"));
        }
        Ok(MeasuredSpectrum {
            freq,
            amplitude,
            field,
            mw_frequency: None,
            orientation: String::new(),
            theta: None,
            transition,
        })
    }

    /// Path of the `key=value` sidecar belonging to a spectrum CSV.
    pub fn sidecar_path(csv: &Path) -> PathBuf {
        let mut p = csv.as_os_str().to_owned();
        p.push(".meta");
        PathBuf::from(p)
    }

    /// Read `frequency_MHz,amplitude` data and its sidecar (`B_mT`,
    /// `mw_frequency_GHz`, `orientation`, optional `theta_rad`, optional
    /// `transition = upper,lower`). Without a transition, the strongest
    /// dipole-allowed transition closest to the microwave frequency is used.
    pub fn read(spec: &DonorSpec, csv: &Path) -> Result<Self> {
        let text = crate::io::read_text(csv)?;
        let (freq, amplitude, _) = parse_two_column(&text, &csv.display().to_string())?;
        let side = Self::sidecar_path(csv);
        let side_text = crate::io::read_text(&side)?;
        let kv = parse_key_values(&side_text, &side.display().to_string())?;
        let num = |k: &str| -> Result<Option<f64>> {
            kv.get(k)
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::invalid(format!("{}: '{k}' is not a number", side.display())))
                })
                .transpose()
        };
        let field = num("B_mT")?.ok_or_else(|| Error::invalid(format!("{}: missing B_mT", side.display())))? * 1e-3;
        let mw = num("mw_frequency_GHz")?.map(|g| g * 1e9);
        let transition = match kv.get("transition") {
            Some(t) => parse_transition(t)?,
            None => {
                let mw = mw.ok_or_else(|| {
                    Error::invalid(format!("{}: need transition or mw_frequency_GHz", side.display()))
                })?;
                nearest_transition(spec, field, mw)?
            }
        };
        let mut m = MeasuredSpectrum::new(freq, amplitude, field, transition)?;
        m.mw_frequency = mw;
        m.orientation = kv.get("orientation").cloned().unwrap_or_default();
        m.theta = num("theta_rad")?;
        Ok(m)
    }

    pub fn write(&self, csv: &Path, meta: &Metadata) -> Result<()> {
        let rows: Vec<Vec<String>> =
            self.freq.iter().zip(&self.amplitude).map(|(f, a)| vec![fmt_f64(f / 1e6), fmt_f64(*a)]).collect();
        crate::io::write_text(csv, render_table(meta, &["frequency_MHz", "amplitude"], &rows))?;
        let mut side =
            format!("B_mT={}\ntransition={},{}\n", fmt_f64(self.field * 1e3), self.transition.0, self.transition.1);
        if let Some(mw) = self.mw_frequency {
            side.push_str(&format!("mw_frequency_GHz={}\n", fmt_f64(mw / 1e9)));
        }
        if !self.orientation.is_empty() {
            side.push_str(&format!("orientation={}\n", self.orientation));
        }
        if let Some(t) = self.theta {
            side.push_str(&format!("theta_rad={}\n", fmt_f64(t)));
        }
        crate::io::write_text(&Self::sidecar_path(csv), side)?;
        Ok(())
    }
}

/// Parse `"12,9"` into `(12, 9)`.
pub fn parse_transition(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::invalid(format!("transition '{text}' is not of the form upper,lower"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let a = a.trim().parse::<usize>().map_err(|_| bad())?;
    let b = b.trim().parse::<usize>().map_err(|_| bad())?;
    if a == b {
        return Err(Error::invalid(format!("transition '{text}' needs two distinct levels")));
    }
    Ok((a, b))
}

fn nearest_transition(spec: &DonorSpec, field: f64, mw: f64) -> Result<(usize, usize)> {
    let es = eigensystem(spec, field)?;
    let ops = DonorOperators::new(spec)?;
    let mut best: Option<(f64, (usize, usize))> = None;
    for i in 2..=es.len() {
        for j in 1..i {
            if sx_element(&es, &ops, i, j)? < 1e-3 {
                continue;
            }
            let f = (es.energy(i)? - es.energy(j)?).abs() / (2.0 * PI);
            let d = (f - mw).abs();
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, (i, j)));
            }
        }
    }
    best.map(|b| b.1).ok_or_else(|| Error::invalid("no allowed transition"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endor::CouplingEntry;

    #[test]
    fn single_coupling_gives_two_peaks() {
        let t = CouplingTable { entries: vec![CouplingEntry::isotropic("a", 2e6)] };
        let s = synthesize_spectrum(&DonorSpec::si_bi(), &t, 12, 9, 0.32, DEFAULT_LINEWIDTH, None).unwrap();
        let peaks = (1..s.freq.len() - 1)
            .filter(|&k| s.amplitude[k] > s.amplitude[k - 1] && s.amplitude[k] >= s.amplitude[k + 1])
            .count();
        assert_eq!(peaks, 2);
        assert!(s.amplitude.iter().all(|&a| a >= 0.0));
        // both lines have unit area
        let step = s.freq[1] - s.freq[0];
        let area: f64 = s.amplitude.iter().sum::<f64>() * step;
        assert!((area - 2.0).abs() < 1e-6, "{area}");
    }

    #[test]
    fn empty_table_is_flat() {
        let s = synthesize_spectrum(&DonorSpec::si_bi(), &CouplingTable::default(), 12, 9, 0.188, 4e4, None).unwrap();
        assert!(s.amplitude.iter().all(|&a| a == 0.0));
        assert!(synthesize_spectrum(&DonorSpec::si_bi(), &CouplingTable::default(), 12, 9, 0.188, 0.0, None).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = CouplingTable { entries: vec![CouplingEntry::isotropic("a", 1e6)] };
        let s = synthesize_spectrum(&DonorSpec::si_bi(), &t, 12, 9, 0.3, 3e4, None).unwrap();
        let (back, _) = Spectrum::from_csv(&s.to_csv(&Metadata::new()), "mem").unwrap();
        assert_eq!(back.amplitude, s.amplitude);
        assert!(back.freq.iter().zip(&s.freq).all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0)));
        assert_eq!(back.sigma, s.sigma);
    }

    #[test]
    fn measured_round_trip_and_transition_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let spec = DonorSpec::si_bi();
        let mut m = MeasuredSpectrum::new(vec![1e6, 2e6], vec![0.1, -0.01], 0.3213, (14, 7)).unwrap();
        m.mw_frequency = Some(9.755e9);
        m.orientation = "B||[001]".into();
        m.write(&path, &Metadata::new()).unwrap();
        assert_eq!(MeasuredSpectrum::read(&spec, &path).unwrap(), m);
        std::fs::write(MeasuredSpectrum::sidecar_path(&path), "B_mT=321.3\nmw_frequency_GHz=9.755\n").unwrap();
        let inferred = MeasuredSpectrum::read(&spec, &path).unwrap();
        assert_eq!(inferred.transition, (14, 7));
    }

    #[test]
    fn transition_parsing() {
        assert_eq!(parse_transition("12,9").unwrap(), (12, 9));
        assert!(parse_transition("12").is_err());
        assert!(parse_transition("3,3").is_err());
    }
}
