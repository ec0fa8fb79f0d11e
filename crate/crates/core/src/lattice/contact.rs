//! Isotropic Fermi-contact couplings from a six-valley Kohn–Luttinger donor
//! wavefunction.
//!
//! The six valleys at `±k₀x̂, ±k₀ŷ, ±k₀ẑ` each carry amplitude `1/√6`; pairing
//! opposite valleys gives `Ψ(r) = (2/√6) Σ_{μ=x,y,z} F_μ(r) cos(k₀ r_μ)` with
//! anisotropic hydrogenic envelopes. For the valley along `z`,
//! `F_z(r) = exp(−sqrt((x²+y²)/a² + z²/b²)) / sqrt(π a² b)`.
//! The envelope radii are the effective-mass values scaled by
//! `sqrt(E_eff / E_i)` for the donor ionisation energy `E_i`.
//!
//! The contact coupling is `a_iso = (2μ₀/3) μ_e γ_Si η |Ψ(r)|²`; the Bloch-cell
//! density enhancement `η` is the single calibration constant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::spin::{DonorSpec, HBAR};
use crate::{Error, Result};

/// Vacuum permeability (N A⁻²).
pub const MU0: f64 = 4.0e-7 * PI;

/// Effective-mass envelope radii (Å) perpendicular / parallel to the valley axis.
pub const KL_RADIUS_PERP: f64 = 25.09;
pub const KL_RADIUS_PAR: f64 = 14.43;
/// Effective-mass ground-state binding energy the radii above belong to (eV).
pub const EFFECTIVE_MASS_ENERGY_EV: f64 = 0.03127;
/// Ionisation energy of the bismuth donor (eV).
pub const BI_IONIZATION_EV: f64 = 0.069;
/// Conduction-band minimum position in units of `2π/a₀`.
pub const VALLEY_POSITION: f64 = 0.85;
/// Bloch-function density enhancement at ²⁹Si sites.
pub const DEFAULT_DENSITY_ENHANCEMENT: f64 = 186.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactModel {
    /// Envelope radius perpendicular to the valley axis (Å).
    pub radius_perp: f64,
    /// Envelope radius along the valley axis (Å).
    pub radius_par: f64,
    /// Valley wavenumber (Å⁻¹).
    pub k0: f64,
    /// rad/s per (Å⁻³ of |Ψ|²).
    pub scale: f64,
}

impl ContactModel {
    pub fn kohn_luttinger(spec: &DonorSpec, ionization_ev: f64, lattice_constant: f64) -> Result<Self> {
        if !(ionization_ev > 0.0) {
            return Err(Error::invalid("ionisation energy must be positive"));
        }
        let shrink = (EFFECTIVE_MASS_ENERGY_EV / ionization_ev).sqrt();
        let gamma_si = spec.delta_si * spec.moment / HBAR;
        let scale = 2.0 * MU0 / 3.0 * spec.moment * gamma_si * DEFAULT_DENSITY_ENHANCEMENT * 1e30;
        Ok(ContactModel {
            radius_perp: KL_RADIUS_PERP * shrink,
            radius_par: KL_RADIUS_PAR * shrink,
            k0: VALLEY_POSITION * 2.0 * PI / lattice_constant,
            scale,
        })
    }

    /// Default model for Si:Bi on the silicon lattice.
    pub fn si_bi(spec: &DonorSpec) -> Self {
        Self::kohn_luttinger(spec, BI_IONIZATION_EV, super::SI_LATTICE_CONSTANT).expect("default parameters are valid")
    }

    fn envelopes(&self, r: [f64; 3]) -> [f64; 3] {
        let norm = 1.0 / (PI * self.radius_perp * self.radius_perp * self.radius_par).sqrt();
        let f = |along: f64, p: f64, q: f64| {
            norm * (-((p * p + q * q) / (self.radius_perp * self.radius_perp)
                + along * along / (self.radius_par * self.radius_par))
                .sqrt())
            .exp()
        };
        [f(r[0], r[1], r[2]), f(r[1], r[0], r[2]), f(r[2], r[0], r[1])]
    }

    /// `|Ψ(r)|²` in Å⁻³.
    pub fn density(&self, r: [f64; 3]) -> f64 {
        let f = self.envelopes(r);
        let psi = 2.0 / 6f64.sqrt()
            * (f[0] * (self.k0 * r[0]).cos() + f[1] * (self.k0 * r[1]).cos() + f[2] * (self.k0 * r[2]).cos());
        psi * psi
    }

    /// Fermi-contact coupling (rad/s) at position `r` (Å) relative to the donor.
    pub fn a_iso(&self, r: [f64; 3]) -> Result<f64> {
        if r.iter().all(|&x| x == 0.0) {
            return Err(Error::invalid("contact coupling is undefined at the donor site"));
        }
        Ok(self.scale * self.density(r))
    }

    /// Coupling with every valley-interference factor set to one; an upper bound
    /// for [`ContactModel::a_iso`].
    pub fn envelope_only(&self, r: [f64; 3]) -> f64 {
        let f = self.envelopes(r);
        let s = f[0] + f[1] + f[2];
        self.scale * 4.0 / 6.0 * s * s
    }

    /// Rescale so the largest coupling over `sites` equals `target` (rad/s).
    pub fn calibrated_to_max(mut self, sites: impl IntoIterator<Item = [f64; 3]>, target: f64) -> Result<Self> {
        let max = sites.into_iter().filter_map(|r| self.a_iso(r).ok()).fold(0.0, f64::max);
        if !(max > 0.0) || !(target > 0.0) {
            return Err(Error::invalid("calibration needs positive couplings"));
        }
        self.scale *= target / max;
        Ok(self)
    }
}
