//! One random ²⁹Si bath: site count, coupling hierarchy and the pair list
//! used by the cluster expansion.
//!
//! `cargo run --release --example lattice_bath -- [side_A] [seed]`

use std::f64::consts::PI;

use sibi::lattice::{sample_bath, LatticeSpec};
use sibi::spin::DonorSpec;

fn main() -> sibi::Result<()> {
    let mut args = std::env::args().skip(1);
    let side: f64 = args.next().map_or(Ok(80.0), |s| s.parse()).expect("side length in Å");
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse()).expect("seed");

    let lattice = LatticeSpec { side_length: side, seed, ..LatticeSpec::default() };
    let bath = sample_bath(&DonorSpec::si_bi(), &lattice)?;
    println!("{side} Å cube, seed {seed}: {} spins, {} pairs", bath.len(), bath.pairs.len());

    let mut sites = bath.sites.clone();
    sites.sort_by(|a, b| b.a_iso.abs().total_cmp(&a.a_iso.abs()));
    println!("\nstrongest contact couplings:");
    for s in sites.iter().take(8) {
        let r = s.position.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!("  r = {r:6.2} Å  a = {:9.4} MHz", s.a_iso / (2.0 * PI) / 1e6);
    }

    let max_zz = bath.pairs.iter().map(|p| p.b_zz.abs()).fold(0.0, f64::max);
    let max_ff = bath.pairs.iter().map(|p| p.b_ff.abs()).fold(0.0, f64::max);
    println!(
        "\nlargest pair couplings: b_zz {:.3} kHz, b_ff {:.3} kHz",
        max_zz / (2.0 * PI) / 1e3,
        max_ff / (2.0 * PI) / 1e3
    );
    Ok(())
}
