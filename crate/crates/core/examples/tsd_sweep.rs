//! T_SD of |12⟩→|9⟩ across the 188 mT optimal working point.
//!
//! `cargo run --release --example tsd_sweep -- [side_A] [n_configs]`

use sibi::analysis::{tsd_sweep, SweepOptions};
use sibi::cce::EnsembleParams;
use sibi::lattice::LatticeSpec;
use sibi::spin::DonorSpec;

fn main() -> sibi::Result<()> {
    let mut args = std::env::args().skip(1);
    let side: f64 = args.next().map_or(Ok(80.0), |s| s.parse()).expect("side length in Å");
    let n_configs: usize = args.next().map_or(Ok(20), |s| s.parse()).expect("configuration count");

    let params = EnsembleParams {
        lattice: LatticeSpec { side_length: side, ..LatticeSpec::default() },
        n_configs,
        seed: 2024,
        ..EnsembleParams::default()
    };
    let fields: Vec<f64> = [150.0, 170.0, 180.0, 185.0, 187.0, 188.0, 189.0, 191.0, 196.0, 210.0, 250.0, 320.0]
        .iter()
        .map(|b| b * 1e-3)
        .collect();
    let sweep = tsd_sweep(&DonorSpec::si_bi(), &params, &fields, &SweepOptions::default())?;

    println!("OWP at {:.3} mT", sweep.b_owp.unwrap_or(f64::NAN) * 1e3);
    println!("{:>8} {:>12} {:>6}  note", "B (mT)", "T_SD (s)", "n");
    for e in &sweep.entries {
        match &e.fit {
            Ok(f) if f.diverged => {
                println!("{:>8.1} {:>12.3e} {:>6}  lower bound", e.field * 1e3, f.effective_t_sd(), "-")
            }
            Ok(f) => println!("{:>8.1} {:>12.3e} {:>6.2}", e.field * 1e3, f.t_sd, f.n),
            Err(msg) => println!("{:>8.1}  failed: {msg}", e.field * 1e3),
        }
    }
    for (far, near) in &sweep.monotonicity_violations {
        println!("T_SD does not grow from {:.1} to {:.1} mT", far * 1e3, near * 1e3);
    }
    Ok(())
}
