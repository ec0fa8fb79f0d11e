use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::contact::ContactModel;
use super::diamond::{generate_lattice, neighbor_distance, Lattice, LatticeSpec};
use super::dipolar::secular_pair_coupling;
use crate::io::{fmt_f64, parse_table, render_table, Metadata};
use crate::spin::DonorSpec;
use crate::{Error, Result};

/// Default pair cutoff: third-nearest-neighbour shell.
pub const DEFAULT_PAIR_SHELL: usize = 3;

/// An occupied ²⁹Si site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSite {
    pub index: usize,
    /// Å, donor at the origin.
    pub position: [f64; 3],
    /// Isotropic coupling (rad/s).
    pub a_iso: f64,
    /// Anisotropic coupling (rad/s).
    pub t_aniso: f64,
    /// Angle between the field (`z`) and the donor–site line (rad).
    pub theta: f64,
}

impl BathSite {
    pub fn distance(&self, other: &BathSite) -> f64 {
        let d: f64 = (0..3).map(|k| (self.position[k] - other.position[k]).powi(2)).sum();
        d.sqrt()
    }
}

/// Secular dipolar coupling between sites `i < j` (indices into `sites`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathPair {
    pub i: usize,
    pub j: usize,
    pub b_zz: f64,
    pub b_ff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathConfiguration {
    pub sites: Vec<BathSite>,
    /// Sorted by `(i, j)`.
    pub pairs: Vec<BathPair>,
    /// Largest separation included in `pairs` (Å).
    pub pair_cutoff: f64,
}

/// Angle of `r` from the `z` axis in `[0, π]`.
pub fn polar_angle(r: [f64; 3]) -> f64 {
    let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if n == 0.0 {
        0.0
    } else {
        (r[2] / n).clamp(-1.0, 1.0).acos()
    }
}

impl BathConfiguration {
    /// Build from explicit sites; pairs are every site pair within `pair_cutoff`.
    pub fn from_sites(spec: &DonorSpec, sites: Vec<BathSite>, pair_cutoff: f64) -> Result<Self> {
        let mut pairs = Vec::new();
        for i in 0..sites.len() {
            for j in i + 1..sites.len() {
                let d = sites[i].distance(&sites[j]);
                if d <= pair_cutoff * (1.0 + 1e-9) {
                    pairs.push(make_pair(spec, &sites, i, j)?);
                }
            }
        }
        Ok(BathConfiguration { sites, pairs, pair_cutoff })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Bath CSV with columns `index,x,y,z,a_iso_Hz,T_Hz,theta_rad`.
    pub fn to_csv(&self, meta: &Metadata) -> String {
        let meta = meta.clone().with("pair_cutoff_A", fmt_f64(self.pair_cutoff));
        let rows: Vec<Vec<String>> = self
            .sites
            .iter()
            .map(|s| {
                vec![
                    s.index.to_string(),
                    fmt_f64(s.position[0]),
                    fmt_f64(s.position[1]),
                    fmt_f64(s.position[2]),
                    fmt_f64(s.a_iso / (2.0 * PI)),
                    fmt_f64(s.t_aniso / (2.0 * PI)),
                    fmt_f64(s.theta),
                ]
            })
            .collect();
        render_table(&meta, &["index", "x", "y", "z", "a_iso_Hz", "T_Hz", "theta_rad"], &rows)
    }

    /// Parse a bath CSV; pair couplings are recomputed from the positions.
    pub fn from_csv(spec: &DonorSpec, text: &str, source: &str) -> Result<(Self, Metadata)> {
        let t = parse_table(text, source)?;
        let cols = ["index", "x", "y", "z", "a_iso_Hz", "T_Hz", "theta_rad"].map(|c| t.column(c));
        let mut c = [0usize; 7];
        for (k, col) in cols.into_iter().enumerate() {
            c[k] = col?;
        }
        let mut sites = Vec::with_capacity(t.rows.len());
        for row in 0..t.rows.len() {
            let index = t.str_at(row, c[0])?.parse::<usize>().map_err(|_| t.parse_err(row, "bad site index"))?;
            let theta = t.f64_at(row, c[6])?;
            if !(0.0..=PI).contains(&theta) {
                return Err(t.parse_err(row, "theta outside [0, π]"));
            }
            sites.push(BathSite {
                index,
                position: [t.f64_at(row, c[1])?, t.f64_at(row, c[2])?, t.f64_at(row, c[3])?],
                a_iso: t.f64_at(row, c[4])? * 2.0 * PI,
                t_aniso: t.f64_at(row, c[5])? * 2.0 * PI,
                theta,
            });
        }
        let cutoff = t.meta.get_f64("pair_cutoff_A").ok_or_else(|| Error::Parse {
            file: source.into(),
            line: 1,
            message: "missing pair_cutoff_A".into(),
        })?;
        Ok((Self::from_sites(spec, sites, cutoff)?, t.meta))
    }

    pub fn write_csv(&self, path: &Path, meta: &Metadata) -> Result<()> {
        crate::io::write_text(path, self.to_csv(meta))?;
        Ok(())
    }

    pub fn read_csv(spec: &DonorSpec, path: &Path) -> Result<(Self, Metadata)> {
        let text = crate::io::read_text(path)?;
        Self::from_csv(spec, &text, &path.display().to_string())
    }
}

fn make_pair(spec: &DonorSpec, sites: &[BathSite], i: usize, j: usize) -> Result<BathPair> {
    let r = [
        sites[j].position[0] - sites[i].position[0],
        sites[j].position[1] - sites[i].position[1],
        sites[j].position[2] - sites[i].position[2],
    ];
    let c = secular_pair_coupling(spec, r)?;
    Ok(BathPair { i, j, b_zz: c.b_zz, b_ff: c.b_ff })
}

/// Everything needed to draw bath configurations on one lattice.
#[derive(Clone, Debug)]
pub struct BathModel {
    pub spec: DonorSpec,
    pub lattice_spec: LatticeSpec,
    pub lattice: Lattice,
    pub contact: ContactModel,
    /// Pair cutoff (Å).
    pub pair_cutoff: f64,
    offsets: Vec<[i32; 3]>,
}

impl BathModel {
    pub fn new(spec: &DonorSpec, lattice_spec: &LatticeSpec) -> Result<Self> {
        let lattice = generate_lattice(lattice_spec)?;
        let cutoff = neighbor_distance(lattice_spec.lattice_constant, DEFAULT_PAIR_SHELL)?;
        let contact =
            ContactModel::kohn_luttinger(spec, super::contact::BI_IONIZATION_EV, lattice_spec.lattice_constant)?;
        Self::with_parts(spec, lattice_spec, lattice, contact, cutoff)
    }

    pub fn with_parts(
        spec: &DonorSpec,
        lattice_spec: &LatticeSpec,
        lattice: Lattice,
        contact: ContactModel,
        pair_cutoff: f64,
    ) -> Result<Self> {
        if !(pair_cutoff >= 0.0 && pair_cutoff.is_finite()) {
            return Err(Error::invalid("pair cutoff must be finite and non-negative"));
        }
        let unit = lattice.unit();
        let reach = (pair_cutoff / unit).floor() as i32 + 1;
        let limit = (pair_cutoff / unit).powi(2) * (1.0 + 1e-9);
        let mut offsets = Vec::new();
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    let sq = (dx * dx + dy * dy + dz * dz) as f64;
                    if sq > 0.0 && sq <= limit {
                        offsets.push([dx, dy, dz]);
                    }
                }
            }
        }
        Ok(BathModel { spec: *spec, lattice_spec: *lattice_spec, lattice, contact, pair_cutoff, offsets })
    }

    /// Change the pair cutoff to the given neighbour shell.
    pub fn with_pair_shell(self, shell: usize) -> Result<Self> {
        let cutoff = neighbor_distance(self.lattice.lattice_constant, shell)?;
        let BathModel { spec, lattice_spec, lattice, contact, .. } = self;
        Self::with_parts(&spec, &lattice_spec, lattice, contact, cutoff)
    }

    /// Occupy every candidate site independently with probability `p`.
    pub fn sample(&self, p: f64, seed: u64) -> Result<BathConfiguration> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("occupancy {p} outside [0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let occupied: Vec<[i32; 3]> = self.lattice.bath_candidates().filter(|_| rng.random::<f64>() < p).collect();
        self.configuration_from(&occupied)
    }

    /// Configuration for an explicit set of occupied lattice coordinates.
    pub fn configuration_from(&self, occupied: &[[i32; 3]]) -> Result<BathConfiguration> {
        let mut sites = Vec::with_capacity(occupied.len());
        let mut lookup = HashMap::with_capacity(occupied.len());
        for (k, &c) in occupied.iter().enumerate() {
            let r = self.lattice.position(c);
            sites.push(BathSite {
                index: k,
                position: r,
                a_iso: self.contact.a_iso(r)?,
                t_aniso: 0.0,
                theta: polar_angle(r),
            });
            lookup.insert(c, k);
        }
        let mut pairs = Vec::new();
        for (i, c) in occupied.iter().enumerate() {
            for o in &self.offsets {
                if let Some(&j) = lookup.get(&[c[0] + o[0], c[1] + o[1], c[2] + o[2]]) {
                    if j > i {
                        pairs.push(make_pair(&self.spec, &sites, i, j)?);
                    }
                }
            }
        }
        pairs.sort_by_key(|p| (p.i, p.j));
        Ok(BathConfiguration { sites, pairs, pair_cutoff: self.pair_cutoff })
    }
}

/// Generate the lattice for `lattice_spec` and draw one configuration using
/// its occupancy and seed.
pub fn sample_bath(spec: &DonorSpec, lattice_spec: &LatticeSpec) -> Result<BathConfiguration> {
    BathModel::new(spec, lattice_spec)?.sample(lattice_spec.occupancy, lattice_spec.seed)
}
