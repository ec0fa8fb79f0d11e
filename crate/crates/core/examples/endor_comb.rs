//! Collapse of the ENDOR comb of |12⟩→|9⟩ at its optimal working point.
//!
//! Lines from a twelve-coupling table are listed at a few fields; near 188 mT
//! both levels carry the same ⟨S_z⟩ and the comb folds onto itself.

use std::f64::consts::PI;

use sibi::analysis::find_owp;
use sibi::endor::{comb_centre, comb_width, endor_lines, CouplingEntry, CouplingTable};
use sibi::spin::DonorSpec;

fn main() -> sibi::Result<()> {
    let spec = DonorSpec::si_bi();
    let mhz = [0.42, 0.78, 1.15, 1.52, 2.06, 2.81, 3.37, 4.18, 5.04, 6.27, 7.55, 8.93];
    let table = CouplingTable::new(
        mhz.iter().enumerate().map(|(k, a)| CouplingEntry::isotropic(&format!("S{k}"), a * 1e6)).collect(),
    )?;
    let owp = find_owp(&spec, 12, 9)?.expect("12→9 has an OWP").b_owp;

    println!("{:>9} {:>10} {:>12} {:>12}", "B (mT)", "ν_Si (MHz)", "centre (MHz)", "width (MHz)");
    for b in [0.1, 0.15, 0.18, owp, 0.2, 0.25, 0.32, 0.45, 0.57] {
        let lines = endor_lines(&spec, &table, 12, 9, b)?;
        println!(
            "{:>9.3} {:>10.4} {:>12.4} {:>12.4}",
            b * 1e3,
            spec.si_zeeman(b) / (2.0 * PI) / 1e6,
            comb_centre(&lines) / 1e6,
            comb_width(&lines) / 1e6
        );
    }

    println!("\nlines at the OWP ({:.3} mT):", owp * 1e3);
    for l in endor_lines(&spec, &table, 12, 9, owp)? {
        println!("  {:>4} on |{:>2}>  {:.4} MHz", table.entries[l.coupling_ref].label, l.label, l.frequency / 1e6);
    }
    Ok(())
}
