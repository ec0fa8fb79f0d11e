//! The twenty Si:Bi levels at one field: energies, doublet mixing and the
//! strongest X-band transitions.
//!
//! `cargo run --example donor_levels -- [B_mT]`

use std::f64::consts::PI;

use sibi::endor::resonances;
use sibi::spin::{eigensystem, transition_frequency, DonorSpec};

fn main() -> sibi::Result<()> {
    let b_mt: f64 = std::env::args().nth(1).map_or(Ok(188.0), |s| s.parse()).expect("field in mT");
    let spec = DonorSpec::si_bi();
    let es = eigensystem(&spec, b_mt * 1e-3)?;

    println!("B = {b_mt} mT");
    println!("{:>5} {:>4} {:>3} {:>12} {:>8} {:>8}", "label", "m", "±", "E (GHz)", "γ_m", "<Sz>");
    for label in (1..=es.len()).rev() {
        let l = es.level(label)?;
        let e = es.energy(label)? / (2.0 * PI) / 1e9;
        println!("{label:>5} {:>4} {:>3} {e:>12.5} {:>8.4} {:>8.4}", l.m, l.branch.symbol(), l.gamma, l.sz());
    }

    let f = transition_frequency(&spec, 12, 9, b_mt * 1e-3)?;
    println!("\n|12>->|9> at {:.4} GHz", f / 1e9);
    println!("\nresonant with 9.755 GHz, |Sx| > 0.3:");
    for r in resonances(&spec, 9.755e9, 0.3)? {
        println!("  |{:>2}>->|{:>2}>  {:7.2} mT  |Sx| = {:.3}", r.upper, r.lower, r.field * 1e3, r.sx);
    }
    Ok(())
}
