use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cubic lattice constant of silicon (Å).
pub const SI_LATTICE_CONSTANT: f64 = 5.431;

/// Natural abundance of ²⁹Si.
pub const SI29_ABUNDANCE: f64 = 0.0467;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Cube edge (Å).
    pub side_length: f64,
    /// Å
    pub lattice_constant: f64,
    pub occupancy: f64,
    pub seed: u64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        LatticeSpec { side_length: 160.0, lattice_constant: SI_LATTICE_CONSTANT, occupancy: SI29_ABUNDANCE, seed: 0 }
    }
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.occupancy >= 0.0 && self.occupancy <= 1.0) {
            return Err(Error::invalid(format!("occupancy {} outside [0, 1]", self.occupancy)));
        }
        if !(self.lattice_constant > 0.0 && self.lattice_constant.is_finite()) {
            return Err(Error::invalid("lattice constant must be positive"));
        }
        if !(self.side_length > 0.0 && self.side_length.is_finite()) {
            return Err(Error::invalid("side length must be positive"));
        }
        if self.side_length < 2.0 * self.lattice_constant {
            return Err(Error::invalid(format!("side length {} Å is below two lattice constants", self.side_length)));
        }
        Ok(())
    }

    /// Largest coordinate (units of `a₀/4`) inside the cube.
    pub fn half_extent(&self) -> i32 {
        (2.0 * self.side_length / self.lattice_constant).floor() as i32
    }
}

/// Diamond-cubic sites stored as integer coordinates in units of `a₀/4`.
///
/// The donor occupies the site at the origin.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub lattice_constant: f64,
    /// Coordinates run over `−half_extent..=half_extent`.
    pub half_extent: i32,
    pub sites: Vec<[i32; 3]>,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Å per integer coordinate step.
    pub fn unit(&self) -> f64 {
        self.lattice_constant / 4.0
    }

    pub fn position(&self, coords: [i32; 3]) -> [f64; 3] {
        let u = self.unit();
        [coords[0] as f64 * u, coords[1] as f64 * u, coords[2] as f64 * u]
    }

    /// Every site except the donor at the origin, in generation order.
    pub fn bath_candidates(&self) -> impl Iterator<Item = [i32; 3]> + '_ {
        self.sites.iter().copied().filter(|c| *c != [0, 0, 0])
    }
}

/// Whether integer coordinates (units of `a₀/4`) lie on the diamond lattice.
pub fn is_diamond_site(c: [i32; 3]) -> bool {
    let all_even = c.iter().all(|x| x.rem_euclid(2) == 0);
    let all_odd = c.iter().all(|x| x.rem_euclid(2) == 1);
    if all_even {
        (c[0] + c[1] + c[2]).rem_euclid(4) == 0
    } else if all_odd {
        (c[0] + c[1] + c[2] - 3).rem_euclid(4) == 0
    } else {
        false
    }
}

/// Diamond sites inside the cube `|x|, |y|, |z| ≤ side/2` centred on the
/// donor, so the box has the full octahedral symmetry of the origin.
pub fn generate_lattice(spec: &LatticeSpec) -> Result<Lattice> {
    spec.validate()?;
    let h = spec.half_extent();
    let n = (2 * h + 1) as usize;
    let mut sites = Vec::with_capacity(n.pow(3) / 8 + 1);
    for x in -h..=h {
        for y in -h..=h {
            for z in -h..=h {
                if is_diamond_site([x, y, z]) {
                    sites.push([x, y, z]);
                }
            }
        }
    }
    Ok(Lattice { lattice_constant: spec.lattice_constant, half_extent: h, sites })
}

/// Squared lengths (units of `(a₀/4)²`) of the first few diamond neighbour
/// shells: 3, 8, 11, 16, 19, …
pub fn neighbor_shell_sq(shell: usize) -> Result<i32> {
    const SHELLS: [i32; 8] = [3, 8, 11, 16, 19, 24, 27, 32];
    if shell == 0 || shell > SHELLS.len() {
        return Err(Error::invalid(format!("neighbour shell {shell} not tabulated")));
    }
    Ok(SHELLS[shell - 1])
}

/// Distance of the `shell`-th nearest-neighbour shell (Å).
pub fn neighbor_distance(lattice_constant: f64, shell: usize) -> Result<f64> {
    Ok((neighbor_shell_sq(shell)? as f64).sqrt() * lattice_constant / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cells_give_95_sites() {
        // the closed cube [−4, 4]³ holds 64 sites plus its far faces
        let spec = LatticeSpec { side_length: 2.0 * SI_LATTICE_CONSTANT, ..Default::default() };
        let l = generate_lattice(&spec).unwrap();
        assert_eq!(l.half_extent, 4);
        assert_eq!(l.len(), 95);
        assert!(l.sites.iter().all(|&c| is_diamond_site(c)));
        // nearest-neighbour distance sqrt(3) a0 / 4
        let nn = l
            .sites
            .iter()
            .filter(|&&c| c != [0, 0, 0])
            .map(|&c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) as f64)
            .fold(f64::INFINITY, f64::min)
            .sqrt()
            * l.unit();
        assert!((nn - 3f64.sqrt() * SI_LATTICE_CONSTANT / 4.0).abs() < 1e-12);
        assert!((nn - 2.3517).abs() < 1e-3);
    }

    #[test]
    fn full_size_count() {
        let spec = LatticeSpec::default();
        let l = generate_lattice(&spec).unwrap();
        assert_eq!(spec.half_extent(), 58);
        assert_eq!(l.len(), 200_245);
        assert_eq!(l.bath_candidates().count(), l.len() - 1);
        assert!(l.bath_candidates().all(|c| c != [0, 0, 0]));
        assert!(l.sites.contains(&[0, 0, 0]));
        let extent =
            |k: usize| l.sites.iter().map(|c| c[k]).fold((i32::MAX, i32::MIN), |(a, b), v| (a.min(v), b.max(v)));
        for k in 0..3 {
            let (lo, hi) = extent(k);
            assert_eq!((lo, hi), (-58, 58), "axis {k}");
        }
    }

    #[test]
    fn shell_multiplicities_are_4_12_12() {
        let spec = LatticeSpec { side_length: 40.0, ..Default::default() };
        let l = generate_lattice(&spec).unwrap();
        let count = |sq: i32| l.sites.iter().filter(|c| c[0] * c[0] + c[1] * c[1] + c[2] * c[2] == sq).count();
        assert_eq!(count(3), 4);
        assert_eq!(count(8), 12);
        assert_eq!(count(11), 12);
        assert_eq!(count(16), 6);
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            LatticeSpec { occupancy: 1.5, ..Default::default() },
            LatticeSpec { side_length: 5.0, ..Default::default() },
            LatticeSpec { side_length: -1.0, ..Default::default() },
        ];
        for s in bad {
            assert!(generate_lattice(&s).is_err());
        }
    }
}
