use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::table::CouplingTable;
use crate::analysis::roots::{bisect, sign_changes};
use crate::linalg::{eigh, kron, CMatrix};
use crate::spin::{
    build_donor_hamiltonian, build_spin_matrices, eigensystem, sx_element, Branch, DonorOperators, DonorSpec,
};
use crate::{Error, Result};

/// Reduced secular interaction `(α, β)` for a site at angle `θ` from the field:
/// `α = a − T + 3T cos²θ`, `β = 3T sinθ cosθ`.
pub fn effective_interaction(a_iso: f64, t: f64, theta: f64) -> Result<(f64, f64)> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::invalid(format!("angle {theta} outside [0, π]")));
    }
    let (s, c) = theta.sin_cos();
    Ok((a_iso - t + 3.0 * t * c * c, 3.0 * t * s * c))
}

/// ENDOR line (Hz) of an isotropic coupling `a_iso` (rad/s) on doublet member
/// `(m, branch)`: `|−δ_Si ω₀ ± (a/2) γ_m| / 2π`.
pub fn endor_frequency_iso(spec: &DonorSpec, m: i32, branch: Branch, omega0: f64, a_iso: f64) -> f64 {
    let s = spec.sz(m, branch, omega0);
    (-spec.delta_si * omega0 + s * a_iso).abs() / (2.0 * PI)
}

/// Anisotropic generalisation: the splitting of
/// `⟨S_z⟩(α Iᶻ + β Iˣ) − δ_Si ω₀ Iᶻ`, in Hz.
pub fn endor_frequency_aniso(spec: &DonorSpec, m: i32, branch: Branch, omega0: f64, alpha: f64, beta: f64) -> f64 {
    let s = spec.sz(m, branch, omega0);
    (-spec.delta_si * omega0 + s * alpha).hypot(s * beta) / (2.0 * PI)
}

/// `(Δ₊, Δ₋)` for both members of doublet `m`.
pub fn doublet_endor_frequencies(spec: &DonorSpec, m: i32, omega0: f64, alpha: f64, beta: f64) -> (f64, f64) {
    (
        endor_frequency_aniso(spec, m, Branch::Plus, omega0, alpha, beta),
        endor_frequency_aniso(spec, m, Branch::Minus, omega0, alpha, beta),
    )
}

/// Splitting of donor level `label` coupled to one ²⁹Si nucleus, by direct
/// diagonalisation of the 40-dimensional donor ⊗ nucleus Hamiltonian
/// `H_donor ⊗ 1 + S_z ⊗ (α Iᶻ + β Iˣ) − δ_Si ω₀ 1 ⊗ Iᶻ` (Hz).
pub fn exact_endor_frequency(spec: &DonorSpec, label: usize, field: f64, alpha: f64, beta: f64) -> Result<f64> {
    let es = eigensystem(spec, field)?;
    let ops = DonorOperators::new(spec)?;
    let n = build_spin_matrices(0.5)?;
    let h_donor = build_donor_hamiltonian(spec, field)?;
    let one = n.identity();
    let c = |x: f64| Complex64::new(x, 0.0);
    let h = kron(&h_donor, &one) + kron(&ops.sz, &(&n.jz * c(alpha) + &n.jx * c(beta)))
        - kron(&CMatrix::identity(spec.dimension(), spec.dimension()), &n.jz) * c(spec.delta_si * es.omega0);
    let e = eigh(&h);
    let target = es.state(label)?;
    let mut weights: Vec<(f64, f64)> = (0..e.values.len())
        .map(|k| {
            let w: f64 = (0..2)
                .map(|nu| {
                    (0..spec.dimension())
                        .map(|r| target[r].conj() * e.vectors[(2 * r + nu, k)])
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum();
            (w, e.values[k])
        })
        .collect();
    weights.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok((weights[0].1 - weights[1].1).abs() / (2.0 * PI))
}

/// One ENDOR resonance of a tabulated coupling on one donor level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ENDORLine {
    /// Hz
    pub frequency: f64,
    pub label: usize,
    pub m: i32,
    pub branch: Branch,
    /// Row of the coupling table.
    pub coupling_ref: usize,
    pub intensity: f64,
}

/// Lines for every table entry on both levels of `upper → lower` at `field`.
pub fn endor_lines(
    spec: &DonorSpec,
    table: &CouplingTable,
    upper: usize,
    lower: usize,
    field: f64,
) -> Result<Vec<ENDORLine>> {
    let es = eigensystem(spec, field)?;
    let mut out = Vec::with_capacity(2 * table.entries.len());
    for (k, entry) in table.entries.iter().enumerate() {
        let (alpha, beta) = effective_interaction(entry.a_iso * 2.0 * PI, entry.t * 2.0 * PI, entry.theta)?;
        for label in [upper, lower] {
            let l = es.level(label)?;
            out.push(ENDORLine {
                frequency: endor_frequency_aniso(spec, l.m, l.branch, es.omega0, alpha, beta),
                label,
                m: l.m,
                branch: l.branch,
                coupling_ref: k,
                intensity: 1.0,
            });
        }
    }
    Ok(out)
}

/// Fields in `[b_min, b_max]` where `upper → lower` is resonant with `f_mw` (Hz).
pub fn resonant_fields(
    spec: &DonorSpec,
    upper: usize,
    lower: usize,
    f_mw: f64,
    b_min: f64,
    b_max: f64,
) -> Result<Vec<f64>> {
    if !(b_min >= 0.0 && b_max > b_min) {
        return Err(Error::invalid("field window must satisfy 0 <= min < max"));
    }
    let f = |b: f64| -> Result<f64> {
        let es = eigensystem(spec, b)?;
        Ok((es.energy(upper)? - es.energy(lower)?).abs() / (2.0 * PI) - f_mw)
    };
    let steps = ((b_max - b_min) / 1e-3).ceil().max(100.0) as usize;
    sign_changes(f, b_min, b_max, steps)?.into_iter().map(|(lo, hi)| bisect(f, lo, hi, 1e-12)).collect()
}

/// A dipole-allowed transition resonant with a fixed microwave frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub upper: usize,
    pub lower: usize,
    /// T
    pub field: f64,
    /// `|⟨upper|S_x|lower⟩|`
    pub sx: f64,
}

/// All transitions with `|⟨S_x⟩| ≥ min_sx` resonant with `f_mw` in
/// `[1 mT, 1 T]`, sorted by field.
pub fn resonances(spec: &DonorSpec, f_mw: f64, min_sx: f64) -> Result<Vec<Resonance>> {
    let ops = DonorOperators::new(spec)?;
    let n = spec.dimension();
    let (lo, hi, steps) = (1e-3, 1.0, 2000);
    let grid: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let energies = grid.iter().map(|&b| Ok(eigensystem(spec, b)?.energies)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for upper in 2..=n {
        for lower in 1..upper {
            let g = |e: &[f64]| (e[upper - 1] - e[lower - 1]).abs() / (2.0 * PI) - f_mw;
            for k in 0..steps {
                let (g0, g1) = (g(&energies[k]), g(&energies[k + 1]));
                if g0 == 0.0 || (g0 > 0.0) != (g1 > 0.0) && g1 != 0.0 {
                    let f = |b: f64| -> Result<f64> { Ok(g(&eigensystem(spec, b)?.energies)) };
                    let field = bisect(f, grid[k], grid[k + 1], 1e-12)?;
                    let sx = sx_element(&eigensystem(spec, field)?, &ops, upper, lower)?;
                    if sx >= min_sx {
                        out.push(Resonance { upper, lower, field, sx });
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.field.total_cmp(&b.field));
    Ok(out)
}
