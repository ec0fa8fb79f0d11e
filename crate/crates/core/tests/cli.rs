use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sibi::analysis::DecayFit;
use sibi::cce::EchoCurve;
use sibi::cli::OwpFile;
use sibi::endor::{resonances, synthesize_spectrum, CouplingEntry, CouplingTable, MeasuredSpectrum, Spectrum};
use sibi::io::{read_table, Metadata};
use sibi::lattice::BathConfiguration;
use sibi::spin::DonorSpec;
use tempfile::TempDir;

fn sibi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sibi"))
        .current_dir(dir)
        .env_remove("SIBI_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Vec<PathBuf> {
    let out = sibi(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().lines().map(|l| dir.join(l)).collect()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn owp_json_reports_the_working_point() {
    let d = TempDir::new().unwrap();
    let files = ok(d.path(), &["owp", "--transition", "12,9"]);
    assert_eq!(files.len(), 1);
    let f: OwpFile = serde_json::from_str(&read(&files[0])).unwrap();
    assert!((f.b_owp_mt.unwrap() - 188.0).abs() < 0.1);
    assert_eq!(f.version, sibi::VERSION);
    assert_eq!(f.report.unwrap().transition.upper, 12);
}

#[test]
fn owp_window_lists_the_turning_points() {
    let d = TempDir::new().unwrap();
    let files = ok(d.path(), &["owp", "--transition", "12,9", "--f-min-ghz", "0.9", "--f-max-ghz", "1.1"]);
    let t = read_table(&files[1]).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert!(t.rows.iter().all(|(_, r)| r[2] == "maximum"));
    assert_eq!(t.meta.get("f_min_GHz"), Some("0.9"));
}

#[test]
fn decay_at_the_working_point_does_not_decay() {
    let d = TempDir::new().unwrap();
    let args = ["decay", "--B", "188.0", "--transition", "12,9", "--side", "40", "--configs", "3"];
    let files = ok(d.path(), &args);
    let curve = EchoCurve::read(&files[0]).unwrap();
    assert_eq!(curve.times.len(), 60);
    assert!(curve.l.iter().all(|l| *l > 0.9));
    let fit: Result<DecayFit, String> = serde_json::from_str(&read(&files[2])).unwrap();
    assert!(fit.unwrap().diverged);
    assert!(read(&files[1]).contains("\"n_configs\": 3"));
}

#[test]
fn identical_runs_are_byte_identical_for_any_pool_size() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = |t: &'static str| {
        vec!["--threads", t, "sweep", "--transition", "12,9", "--fields", "250,320", "--side", "40", "--configs", "4"]
    };
    let fa = ok(a.path(), &args("1"));
    let fb = ok(b.path(), &args("3"));
    assert_eq!(read(&fa[0]), read(&fb[0]));
    let again = ok(a.path(), &args("2"));
    assert_eq!(read(&fa[0]), read(&again[0]));
    let t = read_table(&fa[0]).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.meta.get("seed"), Some("0"));
    assert_eq!(t.meta.get("version"), Some(sibi::VERSION));
}

#[test]
fn config_file_with_flag_override() {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("run.cfg"), "# small bath\nside_A = 40\nseed = 5\nconfigs = 2\n").unwrap();
    let files = ok(d.path(), &["--config", "run.cfg", "lattice", "--seed", "6"]);
    assert!(files[0].ends_with("bath_40A_seed6.csv"));
    let spec = DonorSpec::si_bi();
    let (bath, meta) = BathConfiguration::read_csv(&spec, &files[0]).unwrap();
    assert_eq!(meta.get("seed"), Some("6"));
    // parse ∘ emit is the identity on the data model
    let text = bath.to_csv(&meta);
    assert_eq!(BathConfiguration::from_csv(&spec, &text, "again").unwrap().0, bath);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let d = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sibi"))
        .current_dir(d.path())
        .env("SIBI_OUT_DIR", "results")
        .args(["owp", "--transition", "11,8"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.path().join("results/owp_11_8.json").exists());
    let files = ok(d.path(), &["--out-dir", "elsewhere", "owp", "--transition", "11,8"]);
    assert!(files[0].starts_with(d.path().join("elsewhere")));
}

#[test]
fn errors_are_one_machine_readable_line() {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("bad.cfg"), "transition = 12,9\n\nside_A = wide\n").unwrap();
    let cases: [(&[&str], &str, &str); 4] = [
        (&["--config", "bad.cfg", "owp"], "parse", "bad.cfg:3"),
        (&["owp", "--transition", "12,12"], "invalid-argument", "distinct"),
        (&["decay", "--B", "2500"], "invalid-argument", "2500 mT"),
        (&["endor", "--couplings", "missing.csv", "--B", "200"], "io", "missing"),
    ];
    for (args, kind, needle) in cases {
        let out = sibi(d.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with(&format!("error: kind={kind} message=\"")), "{err}");
        assert!(err.contains(needle), "{err}");
    }
}

#[test]
fn endor_trajectories_and_spectra() {
    let d = TempDir::new().unwrap();
    let table = CouplingTable::new(vec![CouplingEntry::isotropic("A", 1.2e6), CouplingEntry::isotropic("B", 0.6e6)]);
    table.unwrap().write_csv(&d.path().join("c.csv"), &Metadata::new()).unwrap();
    let files = ok(
        d.path(),
        &[
            "endor",
            "--transition",
            "12,9",
            "--couplings",
            "c.csv",
            "--B-start",
            "100",
            "--B-stop",
            "600",
            "--B-step",
            "10",
        ],
    );
    let t = read_table(&files[0]).unwrap();
    assert_eq!(t.rows.len(), 51);
    assert_eq!(t.columns.len(), 6);

    let files =
        ok(d.path(), &["endor", "--transition", "12,9", "--couplings", "c.csv", "--B", "188", "--linewidth-khz", "20"]);
    let (s, meta) = Spectrum::from_csv(&read(&files[0]), "spectrum").unwrap();
    assert_eq!(s.sigma, 20e3);
    assert!(meta.get("comb_width_MHz").unwrap().parse::<f64>().unwrap() < 0.05);
    let lines = read_table(&files[1]).unwrap();
    assert_eq!(lines.rows.len(), 4);
}

#[test]
fn empty_coupling_table_gives_flat_spectra() {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("none.csv"), "label,a_iso_MHz\n").unwrap();
    let files = ok(d.path(), &["endor", "--transition", "12,9", "--couplings", "none.csv", "--fields", "188,320"]);
    assert_eq!(files.len(), 4);
    let (s, _) = Spectrum::from_csv(&read(&files[0]), "flat").unwrap();
    assert!(!s.amplitude.is_empty());
    assert!(s.amplitude.iter().all(|a| *a == 0.0 && a.is_sign_positive()));
}

#[test]
fn fit_spectrum_recovers_a_table() {
    let d = TempDir::new().unwrap();
    let spec = DonorSpec::si_bi();
    let table =
        CouplingTable::new(vec![CouplingEntry::isotropic("A", 1.3e6), CouplingEntry::isotropic("B", 3.1e6)]).unwrap();
    let mut names = Vec::new();
    for (k, r) in resonances(&spec, 9.755e9, 0.3).unwrap().iter().take(4).enumerate() {
        let s = synthesize_spectrum(&spec, &table, r.upper, r.lower, r.field, 40e3, None).unwrap();
        let mut m = MeasuredSpectrum::new(s.freq, s.amplitude, r.field, (r.upper, r.lower)).unwrap();
        m.mw_frequency = Some(9.755e9);
        let name = format!("s{k}.csv");
        m.write(&d.path().join(&name), &Metadata::new()).unwrap();
        names.push(name);
    }
    let files = ok(d.path(), &["fit-spectrum", "--spectra", &names.join(",")]);
    let (got, meta) = CouplingTable::read_csv(&files[0]).unwrap();
    assert_eq!(meta.get("spectra"), Some(names.join(";").as_str()));
    assert_eq!(got.len(), 2);
    for (g, w) in got.entries.iter().zip(&table.entries) {
        assert!((g.a_iso - w.a_iso).abs() < 0.01 * w.a_iso, "{g:?}");
    }
}
