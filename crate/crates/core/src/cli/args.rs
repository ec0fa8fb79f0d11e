use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::RunConfig;
use crate::Result;

/// Si:Bi donor decoherence, optimal working points and ENDOR spectra.
#[derive(Debug, Parser)]
#[command(name = "sibi", version)]
pub struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// `key = value` configuration file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $SIBI_OUT_DIR or the working directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ENDOR line trajectories and spectra for a coupling table.
    Endor(EndorArgs),
    /// Optimal working point of a transition and df/dB turning points.
    Owp(OwpArgs),
    /// Ensemble Hahn-echo decay at one field, with its fit.
    Decay(DecayArgs),
    /// Fitted T_SD over a list of fields.
    Sweep(SweepArgs),
    /// Draw one ²⁹Si bath configuration.
    Lattice(LatticeArgs),
    /// Extract couplings from measured ENDOR spectra.
    FitSpectrum(FitSpectrumArgs),
}

type Pairs = Vec<(&'static str, String)>;

fn push(out: &mut Pairs, key: &'static str, value: &Option<String>) {
    if let Some(v) = value {
        out.push((key, v.clone()));
    }
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Field (mT).
    #[arg(long = "B", value_name = "mT", allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Comma-separated fields (mT).
    #[arg(long, value_name = "mT,...")]
    pub fields: Option<String>,
    /// Field range start, stop and step (mT), inclusive.
    #[arg(long = "B-start", value_name = "mT")]
    pub b_start: Option<String>,
    #[arg(long = "B-stop", value_name = "mT")]
    pub b_stop: Option<String>,
    #[arg(long = "B-step", value_name = "mT")]
    pub b_step: Option<String>,
}

impl FieldArgs {
    fn pairs(&self, out: &mut Pairs) {
        push(out, "B_mT", &self.b);
        push(out, "fields_mT", &self.fields);
        push(out, "B_start_mT", &self.b_start);
        push(out, "B_stop_mT", &self.b_stop);
        push(out, "B_step_mT", &self.b_step);
    }
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// Cube edge (Å).
    #[arg(long, value_name = "Å")]
    pub side: Option<String>,
    /// ²⁹Si occupancy.
    #[arg(long)]
    pub occupancy: Option<String>,
    /// Master seed; configuration `i` uses `seed ^ i`.
    #[arg(long)]
    pub seed: Option<String>,
}

impl LatticeArgs {
    fn pairs(&self, out: &mut Pairs) {
        push(out, "side_A", &self.side);
        push(out, "occupancy", &self.occupancy);
        push(out, "seed", &self.seed);
    }
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Number of bath configurations.
    #[arg(long)]
    pub configs: Option<String>,
    /// Largest cluster size.
    #[arg(long)]
    pub k_max: Option<String>,
    /// `fast` or `exact`.
    #[arg(long)]
    pub kernel: Option<String>,
    /// End of the time grid t = 2τ (ms).
    #[arg(long, value_name = "ms")]
    pub t_max_ms: Option<String>,
    /// Extend the grid up to 10 s while the echo has not decayed.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub adaptive: Option<String>,
    /// Average complex amplitudes rather than intensities.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub amplitude_average: Option<String>,
}

impl EnsembleArgs {
    fn pairs(&self, out: &mut Pairs) {
        self.lattice.pairs(out);
        push(out, "configs", &self.configs);
        push(out, "k_max", &self.k_max);
        push(out, "kernel", &self.kernel);
        push(out, "t_max_ms", &self.t_max_ms);
        push(out, "adaptive", &self.adaptive);
        push(out, "amplitude_average", &self.amplitude_average);
    }
}

#[derive(Debug, Args)]
pub struct EndorArgs {
    /// `upper,lower` level labels.
    #[arg(long)]
    pub transition: Option<String>,
    #[command(flatten)]
    pub fields: FieldArgs,
    /// Coupling table CSV.
    #[arg(long)]
    pub couplings: Option<String>,
    /// Gaussian σ (kHz).
    #[arg(long, value_name = "kHz")]
    pub linewidth_khz: Option<String>,
    /// Microwave frequency; spectra are taken at the resonant fields.
    #[arg(long, value_name = "GHz")]
    pub mw_ghz: Option<String>,
}

#[derive(Debug, Args)]
pub struct OwpArgs {
    /// `upper,lower` level labels.
    #[arg(long)]
    pub transition: Option<String>,
    /// Lower edge of the df/dB census window.
    #[arg(long, value_name = "GHz")]
    pub f_min_ghz: Option<String>,
    /// Upper edge of the df/dB census window.
    #[arg(long, value_name = "GHz")]
    pub f_max_ghz: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    /// `upper,lower` level labels.
    #[arg(long)]
    pub transition: Option<String>,
    /// Field (mT).
    #[arg(long = "B", value_name = "mT")]
    pub b: Option<String>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `upper,lower` level labels.
    #[arg(long)]
    pub transition: Option<String>,
    #[command(flatten)]
    pub fields: FieldArgs,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
}

#[derive(Debug, Args)]
pub struct FitSpectrumArgs {
    /// Comma-separated spectrum CSVs, each with a `.meta` sidecar.
    #[arg(long)]
    pub spectra: Option<String>,
    /// Fit one anisotropic coupling across orientations.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub anisotropic: Option<String>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Endor(_) => "endor",
            Command::Owp(_) => "owp",
            Command::Decay(_) => "decay",
            Command::Sweep(_) => "sweep",
            Command::Lattice(_) => "lattice",
            Command::FitSpectrum(_) => "fit-spectrum",
        }
    }

    /// Flag values as configuration entries.
    pub fn overrides(&self) -> Pairs {
        let mut out = Pairs::new();
        match self {
            Command::Endor(a) => {
                push(&mut out, "transition", &a.transition);
                a.fields.pairs(&mut out);
                push(&mut out, "couplings", &a.couplings);
                push(&mut out, "linewidth_kHz", &a.linewidth_khz);
                push(&mut out, "mw_GHz", &a.mw_ghz);
            }
            Command::Owp(a) => {
                push(&mut out, "transition", &a.transition);
                push(&mut out, "f_min_GHz", &a.f_min_ghz);
                push(&mut out, "f_max_GHz", &a.f_max_ghz);
            }
            Command::Decay(a) => {
                push(&mut out, "transition", &a.transition);
                push(&mut out, "B_mT", &a.b);
                a.ensemble.pairs(&mut out);
            }
            Command::Sweep(a) => {
                push(&mut out, "transition", &a.transition);
                a.fields.pairs(&mut out);
                a.ensemble.pairs(&mut out);
            }
            Command::Lattice(a) => a.pairs(&mut out),
            Command::FitSpectrum(a) => {
                push(&mut out, "spectra", &a.spectra);
                push(&mut out, "anisotropic", &a.anisotropic);
            }
        }
        out
    }
}

impl Cli {
    /// Configuration file (if any), then flags, then validation.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for (key, value) in self.command.overrides() {
            cfg.set(key, &value)?;
        }
        if let Some(dir) = &self.out_dir {
            cfg.out_dir = Some(dir.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "B_mT = 150\nconfigs = 7\nseed = 3\n").unwrap();
        let cli = Cli::try_parse_from([
            "sibi",
            "decay",
            "--config",
            path.to_str().unwrap(),
            "--B",
            "188.0",
            "--transition",
            "12,9",
            "--adaptive",
        ])
        .unwrap();
        let cfg = cli.run_config().unwrap();
        assert!((cfg.field.unwrap() - 0.188).abs() < 1e-15);
        assert_eq!(cfg.n_configs, 7);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.adaptive, Some(true));
    }

    #[test]
    fn invalid_values_are_reported() {
        let cli = Cli::try_parse_from(["sibi", "lattice", "--occupancy", "2"]).unwrap();
        assert!(cli.run_config().is_err());
        let cli = Cli::try_parse_from(["sibi", "owp", "--transition", "12"]).unwrap();
        assert!(cli.run_config().is_err());
    }
}
