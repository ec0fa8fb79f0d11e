use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::args::{Cli, Command};
use super::config::{RunConfig, MAX_FIELD};
use crate::analysis::{find_df_db_extrema, find_owp, fit_curve, tsd_sweep, DecayFit, OwpReport, SweepOptions};
use crate::cce::{adaptive_echo, default_times, ensemble_average_with, DEFAULT_T_MAX};
use crate::endor::{
    comb_width, endor_lines, extract_anisotropic, extract_couplings, resonant_fields, synthesize_spectrum,
    CouplingTable, ExtractionOptions, MeasuredSpectrum,
};
use crate::io::{fmt_f64, render_table, Metadata};
use crate::lattice::{sample_bath, BathModel};
use crate::spin::DonorSpec;
use crate::{Error, Result};

/// Run the selected subcommand; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = cli.run_config()?;
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir).map_err(|source| Error::File { path: dir.display().to_string(), source })?;
    match &cli.command {
        Command::Endor(_) => cmd_endor(&cfg, &dir),
        Command::Owp(_) => cmd_owp(&cfg, &dir),
        Command::Decay(_) => cmd_decay(&cfg, &dir),
        Command::Sweep(_) => cmd_sweep(&cfg, &dir),
        Command::Lattice(_) => cmd_lattice(&cfg, &dir),
        Command::FitSpectrum(_) => cmd_fit_spectrum(&cfg, &dir),
    }
}

fn tag(cfg: &RunConfig) -> String {
    format!("{}_{}", cfg.transition.0, cfg.transition.1)
}

fn mt(b: f64) -> String {
    fmt_f64((b * 1e3 * 1e6).round() / 1e6)
}

fn write(path: PathBuf, text: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    crate::io::write_text(&path, text)?;
    out.push(path);
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// ENDOR line trajectories over a field range and spectra at single fields.
///
/// With `B_start/B_stop/B_step` a trajectory table is written; spectra are
/// written for `B_mT`/`fields_mT`, or at the fields where the transition is
/// resonant with `mw_GHz`.
pub fn cmd_endor(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let spec = DonorSpec::si_bi();
    let path = cfg.couplings.as_ref().ok_or_else(|| Error::invalid("endor needs a couplings table"))?;
    let (table, _) = CouplingTable::read_csv(path)?;
    let (upper, lower) = cfg.transition;
    let base =
        cfg.metadata("endor").with("couplings", file_name(path)).with("linewidth_kHz", fmt_f64(cfg.linewidth / 1e3));
    let mut out = Vec::new();

    let range = matches!(cfg.field_range, (Some(_), Some(_), Some(_)));
    if range {
        let fields = cfg.field_list()?;
        let mut columns = vec!["B_mT".to_string(), "zeeman_MHz".to_string()];
        for e in &table.entries {
            for level in [upper, lower] {
                columns.push(format!("{}@{level}_MHz", e.label));
            }
        }
        let mut rows = Vec::with_capacity(fields.len());
        for &b in &fields {
            let mut row = vec![mt(b), fmt_f64(spec.si_zeeman(b) / (2.0 * PI) / 1e6)];
            row.extend(endor_lines(&spec, &table, upper, lower, b)?.iter().map(|l| fmt_f64(l.frequency / 1e6)));
            rows.push(row);
        }
        let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
        write(dir.join(format!("endor_{}_trajectories.csv", tag(cfg))), &render_table(&base, &cols, &rows), &mut out)?;
    }

    let mut fields = if range { Vec::new() } else { cfg.field_list()? };
    if let Some(mw) = cfg.mw_frequency {
        fields.extend(resonant_fields(&spec, upper, lower, mw, 1e-3, MAX_FIELD)?);
    }
    if fields.is_empty() && !range {
        return Err(Error::invalid("endor needs B_mT, fields_mT, a field range or mw_GHz"));
    }
    for &b in &fields {
        let lines = endor_lines(&spec, &table, upper, lower, b)?;
        let spectrum = synthesize_spectrum(&spec, &table, upper, lower, b, cfg.linewidth, None)?;
        let meta = base
            .clone()
            .with("B_mT", mt(b))
            .with("zeeman_MHz", fmt_f64(spec.si_zeeman(b) / (2.0 * PI) / 1e6))
            .with("comb_width_MHz", fmt_f64(comb_width(&lines) / 1e6));
        let stem = format!("endor_{}_{}mT", tag(cfg), mt(b));
        write(dir.join(format!("{stem}.csv")), &spectrum.to_csv(&meta), &mut out)?;
        let rows: Vec<Vec<String>> = lines
            .iter()
            .map(|l| {
                vec![
                    table.entries[l.coupling_ref].label.clone(),
                    l.label.to_string(),
                    l.m.to_string(),
                    l.branch.symbol().to_string(),
                    fmt_f64(l.frequency / 1e6),
                    fmt_f64(l.intensity),
                ]
            })
            .collect();
        let cols = ["coupling", "level", "m", "branch", "frequency_MHz", "intensity"];
        write(dir.join(format!("{stem}_lines.csv")), &render_table(&meta, &cols, &rows), &mut out)?;
    }
    Ok(out)
}

/// Contents of the OWP JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OwpFile {
    pub version: String,
    pub transition: (usize, usize),
    #[serde(rename = "B_owp_mT")]
    pub b_owp_mt: Option<f64>,
    #[serde(rename = "B_dfdb_zero_mT")]
    pub b_dfdb_zero_mt: Option<f64>,
    pub report: Option<OwpReport>,
}

pub fn cmd_owp(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let spec = DonorSpec::si_bi();
    let (upper, lower) = cfg.transition;
    let report = find_owp(&spec, upper, lower)?;
    let file = OwpFile {
        version: crate::VERSION.to_string(),
        transition: cfg.transition,
        b_owp_mt: report.map(|r| r.b_owp * 1e3),
        b_dfdb_zero_mt: report.and_then(|r| r.b_dfdb_zero).map(|b| b * 1e3),
        report,
    };
    let mut out = Vec::new();
    write(dir.join(format!("owp_{}.json", tag(cfg))), &serde_json::to_string_pretty(&file)?, &mut out)?;

    if let (Some(lo), Some(hi)) = (cfg.f_min, cfg.f_max) {
        let rows: Vec<Vec<String>> = find_df_db_extrema(&spec, lo, hi)?
            .iter()
            .map(|e| {
                vec![
                    e.upper.to_string(),
                    e.lower.to_string(),
                    format!("{:?}", e.kind).to_lowercase(),
                    fmt_f64(e.field * 1e3),
                    fmt_f64(e.frequency / 1e9),
                    fmt_f64(e.sx),
                ]
            })
            .collect();
        let meta = cfg.metadata("owp").with("f_min_GHz", fmt_f64(lo / 1e9)).with("f_max_GHz", fmt_f64(hi / 1e9));
        let cols = ["upper", "lower", "kind", "B_mT", "frequency_GHz", "sx"];
        let name = format!("dfdb_extrema_{}_{}GHz.csv", fmt_f64(lo / 1e9), fmt_f64(hi / 1e9));
        write(dir.join(name), &render_table(&meta, &cols, &rows), &mut out)?;
    }
    Ok(out)
}

/// Echo curve (`.csv` + `.json`) and its fit (`_fit.json`).
pub fn cmd_decay(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let spec = DonorSpec::si_bi();
    let field = cfg.field.ok_or_else(|| Error::invalid("decay needs B_mT"))?;
    let params = cfg.ensemble(field);
    params.validate()?;
    let model = BathModel::new(&spec, &params.lattice)?;
    let curve = if cfg.adaptive.unwrap_or(false) {
        adaptive_echo(&model, &params)?
    } else {
        ensemble_average_with(&model, &params, &default_times(cfg.t_max.unwrap_or(DEFAULT_T_MAX))?, false)?
    };
    let stem = format!("decay_{}_{}mT", tag(cfg), mt(field));
    let csv = dir.join(format!("{stem}.csv"));
    curve.write(&csv)?;
    let mut out = vec![csv.clone(), csv.with_extension("json")];
    let fit: std::result::Result<DecayFit, String> = fit_curve(&curve).map_err(|e| e.to_string());
    write(dir.join(format!("{stem}_fit.json")), &serde_json::to_string_pretty(&fit)?, &mut out)?;
    Ok(out)
}

pub fn cmd_sweep(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let fields = cfg.field_list()?;
    if fields.is_empty() {
        return Err(Error::invalid("sweep needs fields_mT or a field range"));
    }
    let opts = SweepOptions { adaptive: cfg.adaptive.unwrap_or(true), t_max: cfg.t_max.unwrap_or(DEFAULT_T_MAX) };
    let params = cfg.ensemble(fields[0]);
    let result = tsd_sweep(&DonorSpec::si_bi(), &params, &fields, &opts)?;
    let meta = cfg
        .metadata("sweep")
        .with("adaptive", opts.adaptive)
        .with("monotonicity_violations", result.monotonicity_violations.len());
    let mut out = Vec::new();
    write(dir.join(format!("sweep_{}.csv", tag(cfg))), &result.to_csv(&meta), &mut out)?;
    Ok(out)
}

pub fn cmd_lattice(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let lattice = cfg.lattice();
    let config = sample_bath(&DonorSpec::si_bi(), &lattice)?;
    let meta = Metadata::new()
        .with("command", "lattice")
        .with("seed", cfg.seed)
        .with("side_A", fmt_f64(cfg.side_length))
        .with("occupancy", fmt_f64(cfg.occupancy))
        .with("sites", config.len())
        .with("pairs", config.pairs.len());
    let path = dir.join(format!("bath_{}A_seed{}.csv", fmt_f64(cfg.side_length), cfg.seed));
    config.write_csv(&path, &meta)?;
    Ok(vec![path])
}

pub fn cmd_fit_spectrum(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    if cfg.spectra.is_empty() {
        return Err(Error::invalid("fit-spectrum needs at least one spectrum"));
    }
    let spec = DonorSpec::si_bi();
    let spectra = cfg.spectra.iter().map(|p| MeasuredSpectrum::read(&spec, p)).collect::<Result<Vec<_>>>()?;
    let opts = ExtractionOptions::default();
    let table = if cfg.anisotropic {
        CouplingTable::new(vec![extract_anisotropic(&spec, &spectra, &opts)?])?
    } else {
        extract_couplings(&spec, &spectra, &opts)?
    };
    let names: Vec<String> = cfg.spectra.iter().map(|p| file_name(p)).collect();
    let meta = Metadata::new()
        .with("command", "fit-spectrum")
        .with("spectra", names.join(";"))
        .with("anisotropic", cfg.anisotropic);
    let path = dir.join("couplings_fit.csv");
    table.write_csv(&path, &meta)?;
    Ok(vec![path])
}
