//! Hahn-echo propagators for a single cluster.

use num_complex::Complex64;

use super::system::{check_taus, ClusterSystem, EchoContext, MAX_CLUSTER};
use crate::linalg::{eigh, kron, CMatrix};
use crate::{Error, Result};

/// Pure-dephasing echo `L(2τ) = Tr[U_i† U_j† U_i U_j] / d` with
/// `U_c = exp(−i H_c τ)` and `H_c` the bath Hamiltonian conditioned on donor
/// level `c`.
///
/// With `H_c = V_c Λ_c V_c†` and `W = V_i† V_j` this is
/// `(1/d) Σ_ac e^{i(λ_a − λ_c)τ} |Σ_b W_ab W*_cb e^{iμ_b τ}|²`.
pub fn cluster_echo_fast(sys: &ClusterSystem, ctx: &EchoContext, taus: &[f64]) -> Result<Vec<Complex64>> {
    check_taus(taus)?;
    if sys.len() > MAX_CLUSTER {
        return Err(Error::invalid("cluster too large"));
    }
    if sys.is_empty() || sys.is_static() {
        return Ok(vec![Complex64::new(1.0, 0.0); taus.len()]);
    }
    let d = sys.dimension();
    let hi = eigh(&sys.conditional(ctx.s[0], ctx.nu));
    let hj = eigh(&sys.conditional(ctx.s[1], ctx.nu));
    let w = hi.vectors.adjoint() * &hj.vectors;
    let mut out = Vec::with_capacity(taus.len());
    let mut g = vec![Complex64::new(0.0, 0.0); d * d];
    for &tau in taus {
        if tau == 0.0 {
            out.push(Complex64::new(1.0, 0.0));
            continue;
        }
        let ph_j: Vec<Complex64> = hj.values.iter().map(|m| Complex64::from_polar(1.0, m * tau)).collect();
        let ph_i: Vec<Complex64> = hi.values.iter().map(|l| Complex64::from_polar(1.0, l * tau)).collect();
        for a in 0..d {
            for c in 0..d {
                g[a * d + c] = (0..d).map(|b| w[(a, b)] * w[(c, b)].conj() * ph_j[b]).sum();
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..d {
            for c in 0..d {
                acc += ph_i[a] * ph_i[c].conj() * g[a * d + c].norm_sqr();
            }
        }
        out.push(acc / d as f64);
    }
    Ok(out)
}

/// Echo for the two-spin case under its customary name.
pub fn pair_echo_fast(sys: &ClusterSystem, ctx: &EchoContext, taus: &[f64]) -> Result<Vec<Complex64>> {
    cluster_echo_fast(sys, ctx, taus)
}

/// Hahn echo of the full donor ⊗ cluster system.
///
/// The Hamiltonian is written in the donor eigenbasis:
/// `diag(E) ⊗ 1 + diag(⟨S_z⟩) ⊗ Σ(α Iᶻ + β Iˣ) + 1 ⊗ H_bath`. The π pulse exchanges
/// `|i⟩ ↔ |j⟩` and acts as identity on the other donor levels. The result is
/// `ρ_ij(2τ) / ρ_ij(0)` averaged over the `2^k` bath product states.
pub fn hahn_echo_exact(sys: &ClusterSystem, ctx: &EchoContext, taus: &[f64]) -> Result<Vec<Complex64>> {
    check_taus(taus)?;
    if sys.len() > MAX_CLUSTER {
        return Err(Error::invalid(format!("exact propagation supports at most {MAX_CLUSTER} bath spins")));
    }
    let es = &ctx.eigensystem;
    let nd = es.len();
    let db = sys.dimension();
    let n = nd * db;
    // Secular in the donor eigenbasis: only ⟨c|S_z|c⟩ survives, the
    // intra-doublet elements connect levels split by GHz and are dropped.
    let sz = {
        let ops = crate::spin::DonorOperators::new(&ctx.spec)?;
        let full = es.to_eigenbasis(&ops.sz);
        CMatrix::from_fn(nd, nd, |r, c| if r == c { full[(r, r)] } else { Complex64::new(0.0, 0.0) })
    };
    let energies =
        CMatrix::from_fn(
            nd,
            nd,
            |r, c| if r == c { Complex64::new(es.energies[r], 0.0) } else { Complex64::new(0.0, 0.0) },
        );
    let h = kron(&energies, &CMatrix::identity(db, db))
        + kron(&sz, &sys.coupling_operator())
        + kron(&CMatrix::identity(nd, nd), &sys.bath_hamiltonian(ctx.nu));
    let e = eigh(&h);
    let (i, j) = (ctx.upper - 1, ctx.lower - 1);
    let vt = e.vectors.adjoint();

    let apply_u = |psi: &[Complex64], tau: f64| -> Vec<Complex64> {
        let mut c: Vec<Complex64> = (0..n).map(|k| (0..n).map(|r| vt[(k, r)] * psi[r]).sum()).collect();
        for (k, ck) in c.iter_mut().enumerate() {
            *ck *= Complex64::from_polar(1.0, -e.values[k] * tau);
        }
        (0..n).map(|r| (0..n).map(|k| e.vectors[(r, k)] * c[k]).sum()).collect()
    };
    let pulse = |psi: &mut Vec<Complex64>| {
        for b in 0..db {
            psi.swap(i * db + b, j * db + b);
        }
    };

    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        if tau == 0.0 {
            out.push(Complex64::new(1.0, 0.0));
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for b0 in 0..db {
            let mut psi = vec![Complex64::new(0.0, 0.0); n];
            psi[i * db + b0] = amp;
            psi[j * db + b0] = amp;
            let mut psi = apply_u(&psi, tau);
            pulse(&mut psi);
            let psi = apply_u(&psi, tau);
            let rho_ij: Complex64 = (0..db).map(|b| psi[i * db + b] * psi[j * db + b].conj()).sum();
            acc += rho_ij / 0.5;
        }
        out.push(acc / db as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{secular_pair_coupling, SI_LATTICE_CONSTANT};
    use crate::spin::DonorSpec;
    use std::f64::consts::PI;

    fn ctx(b: f64) -> EchoContext {
        EchoContext::new(&DonorSpec::si_bi(), b, (12, 9)).unwrap()
    }

    /// Second-shell pair; nearest neighbours sit at the magic angle for B ∥ [001].
    fn shell2_pair(a1: f64, a2: f64) -> ClusterSystem {
        let u = SI_LATTICE_CONSTANT / 4.0;
        let c = secular_pair_coupling(&DonorSpec::si_bi(), [2.0 * u, 0.0, 2.0 * u]).unwrap();
        ClusterSystem { alpha: vec![a1, a2], beta: vec![0.0, 0.0], pairs: vec![(0, 1, c.b_zz, c.b_ff)] }
    }

    fn taus(n: usize, max: f64) -> Vec<f64> {
        (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn no_interaction_means_no_decay() {
        let sys = ClusterSystem { alpha: vec![0.0, 0.0], beta: vec![0.0, 0.0], pairs: vec![] };
        for l in hahn_echo_exact(&sys, &ctx(0.3), &taus(8, 1e-3)).unwrap() {
            assert!((l.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lone_isotropic_spin_is_refocused() {
        let sys = ClusterSystem { alpha: vec![2.0 * PI * 1e6], beta: vec![0.0], pairs: vec![] };
        for l in hahn_echo_exact(&sys, &ctx(0.3), &taus(8, 1e-3)).unwrap() {
            assert!((l.norm() - 1.0).abs() < 1e-6, "{l}");
        }
        for l in cluster_echo_fast(&sys, &ctx(0.3), &taus(8, 1e-3)).unwrap() {
            assert_eq!(l, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn fast_agrees_with_exact_for_a_pair() {
        // nearly degenerate couplings so the flip-flop is not detuned away
        let sys = shell2_pair(2.0 * PI * 0.6e6, 2.0 * PI * (0.6e6 + 300.0));
        let c = ctx(0.32);
        let t = taus(30, 5e-3);
        let fast = cluster_echo_fast(&sys, &c, &t).unwrap();
        let exact = hahn_echo_exact(&sys, &c, &t).unwrap();
        let dev = fast.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-6, "{dev}");
        let min = fast.iter().map(|l| l.norm()).fold(1.0, f64::min);
        assert!(min < 0.9, "pair should decay, min {min}");
    }

    #[test]
    fn symmetric_levels_do_not_decay() {
        let sys = shell2_pair(2.0 * PI * 0.6e6, 2.0 * PI * 0.2e6);
        let mut c = ctx(0.32);
        c.s = [0.2, 0.2];
        for l in cluster_echo_fast(&sys, &c, &taus(10, 5e-3)).unwrap() {
            assert!((l - 1.0).norm() < 1e-12);
        }
        c.s = [0.0, 0.0];
        for l in cluster_echo_fast(&sys, &c, &taus(10, 5e-3)).unwrap() {
            assert!((l - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn descending_grid_is_rejected() {
        let sys = shell2_pair(1.0, 2.0);
        assert!(cluster_echo_fast(&sys, &ctx(0.3), &[0.0, 2.0, 1.0]).is_err());
        assert!(hahn_echo_exact(&sys, &ctx(0.3), &[1.0, 0.5]).is_err());
    }
}
