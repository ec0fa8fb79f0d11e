use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::contact::MU0;
use crate::spin::{DonorSpec, HBAR};
use crate::{Error, Result};

/// Nuclear–nuclear dipolar tensor with the field along `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipolarTensor {
    /// rad/s
    pub d: Matrix3<f64>,
    /// Separation (Å).
    pub r: Vector3<f64>,
}

/// Ising and flip-flop parts of a ²⁹Si pair coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    /// Coefficient of `I₁ᶻ I₂ᶻ` (rad/s).
    pub b_zz: f64,
    /// Coefficient of `I₁⁺I₂⁻ + I₁⁻I₂⁺` (rad/s).
    pub b_ff: f64,
}

/// `C = μ₀ δ_Si² μ² / (4π ħ r³)` in rad/s for `r` in Å.
pub fn dipolar_prefactor(spec: &DonorSpec, r: f64) -> f64 {
    let r_m = r * 1e-10;
    MU0 * spec.delta_si * spec.delta_si * spec.moment * spec.moment / (4.0 * std::f64::consts::PI * HBAR * r_m.powi(3))
}

/// `D_ij = C (δ_ij − 3 r̂_i r̂_j)`.
pub fn dipolar_tensor(spec: &DonorSpec, r: [f64; 3]) -> Result<DipolarTensor> {
    let v = Vector3::from(r);
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::invalid("dipolar tensor needs a finite nonzero separation"));
    }
    let c = dipolar_prefactor(spec, n);
    let u = v / n;
    let d = (Matrix3::identity() - u * u.transpose() * 3.0) * c;
    Ok(DipolarTensor { d, r: v })
}

/// Secular (total-`Iᶻ`-conserving) projection: `b_zz = D_zz`,
/// `b_ff = (D_xx + D_yy)/4 = −D_zz/4`.
pub fn secular_pair_coupling(spec: &DonorSpec, r: [f64; 3]) -> Result<PairCoupling> {
    let t = dipolar_tensor(spec, r)?;
    Ok(PairCoupling { b_zz: t.d[(2, 2)], b_ff: (t.d[(0, 0)] + t.d[(1, 1)]) / 4.0 })
}
