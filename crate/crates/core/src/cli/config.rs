use std::path::{Path, PathBuf};

use crate::cce::{EnsembleParams, Kernel};
use crate::endor::{parse_transition, DEFAULT_LINEWIDTH};
use crate::io::{fmt_f64, Metadata};
use crate::lattice::{LatticeSpec, SI29_ABUNDANCE, SI_LATTICE_CONSTANT};
use crate::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SIBI_OUT_DIR";

/// Largest field accepted anywhere (T).
pub const MAX_FIELD: f64 = 2.0;
/// Smallest lattice edge accepted (Å).
pub const MIN_SIDE: f64 = 10.0;

/// Parameters of one run, in SI units internally.
///
/// Built from an optional `key = value` file and then overridden by
/// command-line flags. Keys carry their boundary unit (`B_mT`, `t_max_ms`, ...).
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub transition: (usize, usize),
    /// T
    pub field: Option<f64>,
    /// T
    pub fields: Vec<f64>,
    /// `(start, stop, step)` in T.
    pub field_range: (Option<f64>, Option<f64>, Option<f64>),
    /// Å
    pub side_length: f64,
    pub occupancy: f64,
    pub n_configs: usize,
    pub seed: u64,
    pub k_max: usize,
    pub kernel: Kernel,
    /// s
    pub t_max: Option<f64>,
    /// `None` leaves the choice to the command.
    pub adaptive: Option<bool>,
    pub amplitude_average: bool,
    pub couplings: Option<PathBuf>,
    /// Gaussian σ (Hz).
    pub linewidth: f64,
    /// Hz
    pub mw_frequency: Option<f64>,
    /// Hz
    pub f_min: Option<f64>,
    /// Hz
    pub f_max: Option<f64>,
    pub spectra: Vec<PathBuf>,
    pub anisotropic: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            transition: (12, 9),
            field: None,
            fields: Vec::new(),
            field_range: (None, None, None),
            side_length: 160.0,
            occupancy: SI29_ABUNDANCE,
            n_configs: 100,
            seed: 0,
            k_max: 2,
            kernel: Kernel::Fast,
            t_max: None,
            adaptive: None,
            amplitude_average: false,
            couplings: None,
            linewidth: DEFAULT_LINEWIDTH,
            mw_frequency: None,
            f_min: None,
            f_max: None,
            spectra: Vec::new(),
            anisotropic: false,
            out_dir: None,
        }
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    match value.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::invalid(format!("{key}: '{value}' is not a finite number"))),
    }
}

fn integer<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::invalid(format!("{key}: '{value}' is not a non-negative integer")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::invalid(format!("{key}: '{other}' is not a boolean"))),
    }
}

fn list<T>(value: &str, mut item: impl FnMut(&str) -> Result<T>) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(&mut item).collect()
}

impl RunConfig {
    /// Every key understood by [`RunConfig::set`].
    pub const KEYS: [&'static str; 23] = [
        "transition",
        "B_mT",
        "fields_mT",
        "B_start_mT",
        "B_stop_mT",
        "B_step_mT",
        "side_A",
        "occupancy",
        "configs",
        "seed",
        "k_max",
        "kernel",
        "t_max_ms",
        "adaptive",
        "amplitude_average",
        "couplings",
        "linewidth_kHz",
        "mw_GHz",
        "f_min_GHz",
        "f_max_GHz",
        "spectra",
        "anisotropic",
        "out_dir",
    ];

    /// Set one parameter from its boundary representation.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mt = |v: &str| number(key, v).map(|x| x * 1e-3);
        let ghz = |v: &str| number(key, v).map(|x| x * 1e9);
        match key {
            "transition" => self.transition = parse_transition(value)?,
            "B_mT" => self.field = Some(mt(value)?),
            "fields_mT" => self.fields = list(value, mt)?,
            "B_start_mT" => self.field_range.0 = Some(mt(value)?),
            "B_stop_mT" => self.field_range.1 = Some(mt(value)?),
            "B_step_mT" => self.field_range.2 = Some(mt(value)?),
            "side_A" => self.side_length = number(key, value)?,
            "occupancy" => self.occupancy = number(key, value)?,
            "configs" => self.n_configs = integer(key, value)?,
            "seed" => self.seed = integer(key, value)?,
            "k_max" => self.k_max = integer(key, value)?,
            "kernel" => self.kernel = value.trim().parse()?,
            "t_max_ms" => self.t_max = Some(number(key, value)? * 1e-3),
            "adaptive" => self.adaptive = Some(boolean(key, value)?),
            "amplitude_average" => self.amplitude_average = boolean(key, value)?,
            "couplings" => self.couplings = Some(PathBuf::from(value.trim())),
            "linewidth_kHz" => self.linewidth = number(key, value)? * 1e3,
            "mw_GHz" => self.mw_frequency = Some(ghz(value)?),
            "f_min_GHz" => self.f_min = Some(ghz(value)?),
            "f_max_GHz" => self.f_max = Some(ghz(value)?),
            "spectra" => self.spectra = list(value, |s| Ok(PathBuf::from(s)))?,
            "anisotropic" => self.anisotropic = boolean(key, value)?,
            "out_dir" => self.out_dir = Some(PathBuf::from(value.trim())),
            other => return Err(Error::invalid(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Apply a `key = value` file on top of `self`. `#` starts a comment.
    pub fn merge_text(&mut self, text: &str, source: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { file: source.to_string(), line: k + 1, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| parse_err(format!("expected key = value, found '{line}'")))?;
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::InvalidArgument(m) => parse_err(m),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let text = crate::io::read_text(path)?;
        cfg.merge_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let check_field = |b: f64| {
            if (0.0..=MAX_FIELD).contains(&b) {
                Ok(())
            } else {
                Err(Error::invalid(format!("field {} mT outside [0, {}] mT", fmt_f64(b * 1e3), MAX_FIELD * 1e3)))
            }
        };
        for b in self.field.iter().chain(&self.fields) {
            check_field(*b)?;
        }
        let (start, stop, step) = self.field_range;
        for b in [start, stop].into_iter().flatten() {
            check_field(b)?;
        }
        if let Some(s) = step {
            if !(s > 0.0) {
                return Err(Error::invalid("B_step_mT must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.occupancy) {
            return Err(Error::invalid(format!("occupancy {} outside [0, 1]", self.occupancy)));
        }
        if !(self.side_length >= MIN_SIDE) {
            return Err(Error::invalid(format!("lattice side {} Å below {MIN_SIDE} Å", self.side_length)));
        }
        if self.n_configs == 0 {
            return Err(Error::invalid("configs must be at least 1"));
        }
        if !(1..=3).contains(&self.k_max) {
            return Err(Error::invalid(format!("k_max {} outside 1..=3", self.k_max)));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0) {
                return Err(Error::invalid("t_max_ms must be positive"));
            }
        }
        if !(self.linewidth > 0.0) {
            return Err(Error::invalid("linewidth_kHz must be positive"));
        }
        if let (Some(lo), Some(hi)) = (self.f_min, self.f_max) {
            if !(lo < hi) {
                return Err(Error::invalid("f_min_GHz must be below f_max_GHz"));
            }
        }
        Ok(())
    }

    /// Fields from `B_start/B_stop/B_step` when given, else `fields_mT`,
    /// else the single `B_mT`.
    pub fn field_list(&self) -> Result<Vec<f64>> {
        match self.field_range {
            (Some(start), Some(stop), Some(step)) => {
                if stop < start {
                    return Err(Error::invalid("B_stop_mT is below B_start_mT"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|k| start + k as f64 * step).collect())
            }
            (None, None, None) if !self.fields.is_empty() => Ok(self.fields.clone()),
            (None, None, None) => Ok(self.field.into_iter().collect()),
            _ => Err(Error::invalid("a field range needs B_start_mT, B_stop_mT and B_step_mT")),
        }
    }

    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec {
            side_length: self.side_length,
            lattice_constant: SI_LATTICE_CONSTANT,
            occupancy: self.occupancy,
            seed: self.seed,
        }
    }

    pub fn ensemble(&self, field: f64) -> EnsembleParams {
        EnsembleParams {
            lattice: self.lattice(),
            upper: self.transition.0,
            lower: self.transition.1,
            field,
            k_max: self.k_max,
            r_max: None,
            kernel: self.kernel,
            n_configs: self.n_configs,
            seed: self.seed,
            amplitude_average: self.amplitude_average,
        }
    }

    /// `out_dir`, else `$SIBI_OUT_DIR`, else the working directory.
    pub fn output_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    /// Header written into every output file.
    pub fn metadata(&self, command: &str) -> Metadata {
        Metadata::new()
            .with("command", command)
            .with("seed", self.seed)
            .with("transition", format!("{},{}", self.transition.0, self.transition.1))
    }
}
