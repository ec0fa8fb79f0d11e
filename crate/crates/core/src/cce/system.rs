use std::collections::HashMap;

use num_complex::Complex64;

use crate::endor::effective_interaction;
use crate::lattice::{BathConfiguration, Cluster};
use crate::linalg::{kron, CMatrix};
use crate::spin::{build_spin_matrices, eigensystem, DonorEigensystem, DonorSpec};
use crate::{Error, Result};

/// Largest cluster the propagators accept.
pub const MAX_CLUSTER: usize = 3;

/// Donor-side data shared by every cluster at one field and transition.
#[derive(Clone, Debug)]
pub struct EchoContext {
    pub spec: DonorSpec,
    pub field: f64,
    pub upper: usize,
    pub lower: usize,
    /// `⟨S_z⟩` of the two levels.
    pub s: [f64; 2],
    /// Bare ²⁹Si Zeeman angular frequency.
    pub nu: f64,
    pub eigensystem: DonorEigensystem,
}

impl EchoContext {
    pub fn new(spec: &DonorSpec, field: f64, transition: (usize, usize)) -> Result<Self> {
        let (upper, lower) = transition;
        if upper == lower {
            return Err(Error::invalid("transition needs two distinct levels"));
        }
        let es = eigensystem(spec, field)?;
        let lu = *es.level(upper)?;
        let ll = *es.level(lower)?;
        Ok(EchoContext {
            spec: *spec,
            field,
            upper,
            lower,
            s: [spec.sz(lu.m, lu.branch, es.omega0), spec.sz(ll.m, ll.branch, es.omega0)],
            nu: spec.si_zeeman(field),
            eigensystem: es,
        })
    }
}

/// Spin-½ nuclei of one cluster: secular SHF parameters `(α, β)` per site
/// (rad/s) and pair couplings `(a, b, b_zz, b_ff)` on local indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClusterSystem {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub pairs: Vec<(usize, usize, f64, f64)>,
}

/// `(i, j) → (b_zz, b_ff)` for a configuration.
pub type PairLookup = HashMap<(usize, usize), (f64, f64)>;

pub fn pair_lookup(config: &BathConfiguration) -> PairLookup {
    config.pairs.iter().map(|p| ((p.i, p.j), (p.b_zz, p.b_ff))).collect()
}

impl ClusterSystem {
    pub fn from_cluster(config: &BathConfiguration, lookup: &PairLookup, cluster: &Cluster) -> Result<Self> {
        let m = cluster.members();
        if m.len() > MAX_CLUSTER {
            return Err(Error::invalid(format!("cluster of {} spins exceeds the limit of {MAX_CLUSTER}", m.len())));
        }
        let mut sys = ClusterSystem::default();
        for &i in m {
            let s = config.sites.get(i).ok_or_else(|| Error::invalid(format!("site {i} not in configuration")))?;
            let (a, b) = effective_interaction(s.a_iso, s.t_aniso, s.theta)?;
            sys.alpha.push(a);
            sys.beta.push(b);
        }
        for x in 0..m.len() {
            for y in x + 1..m.len() {
                if let Some(&(zz, ff)) = lookup.get(&(m[x], m[y])) {
                    sys.pairs.push((x, y, zz, ff));
                }
            }
        }
        Ok(sys)
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Whether the two conditional Hamiltonians commute trivially (a lone
    /// spin with purely longitudinal coupling).
    pub fn is_static(&self) -> bool {
        self.len() == 1 && self.beta[0] == 0.0
    }

    pub fn dimension(&self) -> usize {
        1 << self.len()
    }

    /// `(I_z, I_x, I_+)` of every spin on the `2^k` product space.
    fn operators(&self) -> Vec<(CMatrix, CMatrix, CMatrix)> {
        let half = build_spin_matrices(0.5).expect("spin 1/2");
        let one = half.identity();
        let k = self.len();
        let embed = |op: &CMatrix, n: usize| {
            let mut out = CMatrix::identity(1, 1);
            for q in 0..k {
                out = kron(&out, if q == n { op } else { &one });
            }
            out
        };
        (0..k).map(|n| (embed(&half.jz, n), embed(&half.jx, n), embed(&half.jplus, n))).collect()
    }

    /// `−ν Σ Iᶻ + Σ b_zz IᶻIᶻ + b_ff (I⁺I⁻ + I⁻I⁺)`.
    pub fn bath_hamiltonian(&self, nu: f64) -> CMatrix {
        let ops = self.operators();
        let d = self.dimension();
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut h = CMatrix::zeros(d, d);
        for (iz, _, _) in &ops {
            h -= iz * c(nu);
        }
        for &(a, b, zz, ff) in &self.pairs {
            let flip = &ops[a].2 * ops[b].2.adjoint();
            h += &ops[a].0 * &ops[b].0 * c(zz) + (&flip + flip.adjoint()) * c(ff);
        }
        h
    }

    /// `Σ (α Iᶻ + β Iˣ)`, the operator multiplying `S_z`.
    pub fn coupling_operator(&self) -> CMatrix {
        let ops = self.operators();
        let d = self.dimension();
        let mut h = CMatrix::zeros(d, d);
        for (n, (iz, ix, _)) in ops.iter().enumerate() {
            h += iz * Complex64::new(self.alpha[n], 0.0) + ix * Complex64::new(self.beta[n], 0.0);
        }
        h
    }

    /// Conditional Hamiltonian for donor `⟨S_z⟩ = s`.
    pub fn conditional(&self, s: f64, nu: f64) -> CMatrix {
        self.bath_hamiltonian(nu) + self.coupling_operator() * Complex64::new(s, 0.0)
    }
}

pub(crate) fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("τ values must be finite and non-negative"));
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("τ grid must be strictly ascending"));
    }
    Ok(())
}
