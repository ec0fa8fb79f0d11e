//! Ensemble-averaged Hahn echo of |12⟩→|9⟩ away from and close to the OWP,
//! with stretched-exponential fits.
//!
//! `cargo run --release --example hahn_echo -- [side_A] [n_configs]`

use sibi::analysis::fit_curve;
use sibi::cce::{adaptive_echo, EnsembleParams};
use sibi::lattice::{BathModel, LatticeSpec};
use sibi::spin::DonorSpec;

fn main() -> sibi::Result<()> {
    let mut args = std::env::args().skip(1);
    let side: f64 = args.next().map_or(Ok(100.0), |s| s.parse()).expect("side length in Å");
    let n_configs: usize = args.next().map_or(Ok(10), |s| s.parse()).expect("configuration count");

    let spec = DonorSpec::si_bi();
    let lattice = LatticeSpec { side_length: side, ..LatticeSpec::default() };
    let model = BathModel::new(&spec, &lattice)?;
    println!("{side} Å cube, {} candidate sites, {n_configs} configurations", model.lattice.len());

    for b_mt in [320.0, 250.0, 200.0, 190.0] {
        let params = EnsembleParams { lattice, field: b_mt * 1e-3, n_configs, seed: 1, ..EnsembleParams::default() };
        let start = std::time::Instant::now();
        let curve = adaptive_echo(&model, &params)?;
        let fit = fit_curve(&curve)?;
        let t_end = curve.times.last().copied().unwrap_or(0.0);
        if fit.diverged {
            println!(
                "B = {b_mt} mT  no decay up to {t_end:.1e} s, T_SD > {:.3e} s  ({:.1?})",
                fit.t_sd,
                start.elapsed()
            );
        } else {
            println!(
                "B = {b_mt} mT  T_SD = {:.3} ms  n = {:.2}  T2 = {:.2e} s  L(end) = {:.3}  ({:.1?})",
                fit.t_sd * 1e3,
                fit.n,
                fit.t2.unwrap_or(f64::INFINITY),
                curve.l.last().copied().unwrap_or(1.0),
                start.elapsed()
            );
        }
    }
    Ok(())
}
