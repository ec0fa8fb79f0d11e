//! Optimal working point of |12⟩→|9⟩ and every df/dB turning point of the
//! dipole-allowed transitions between 5 and 7.5 GHz and close to 1 GHz.

use sibi::analysis::{find_df_db_extrema, find_owp};
use sibi::spin::DonorSpec;

fn main() -> sibi::Result<()> {
    let spec = DonorSpec::si_bi();
    let owp = find_owp(&spec, 12, 9)?.expect("12→9 has an OWP");
    println!(
        "|12>->|9>  B_owp = {:.3} mT  df/dB = 0 at {:.3} mT  f = {:.4} GHz",
        owp.b_owp * 1e3,
        owp.b_dfdb_zero.unwrap_or(f64::NAN) * 1e3,
        owp.transition.frequency / 1e9
    );

    for (lo, hi) in [(5.0, 7.5), (0.8, 1.2)] {
        println!("\nturning points between {lo} and {hi} GHz:");
        for e in find_df_db_extrema(&spec, lo * 1e9, hi * 1e9)? {
            println!(
                "  |{:>2}>->|{:>2}>  {:?}  B = {:7.2} mT  f = {:.4} GHz  |Sx| = {:.3}",
                e.upper,
                e.lower,
                e.kind,
                e.field * 1e3,
                e.frequency / 1e9,
                e.sx
            );
        }
    }
    Ok(())
}
