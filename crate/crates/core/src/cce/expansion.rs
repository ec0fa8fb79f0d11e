//! Cluster correlation expansion over one bath configuration.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernels::{cluster_echo_fast, hahn_echo_exact};
use super::system::{ClusterSystem, EchoContext, PairLookup};
use crate::lattice::{enumerate_clusters, BathConfiguration, Cluster};
use crate::{Error, Result};

/// Below this modulus a subset factor is treated as zero.
pub const DIVISION_GUARD: f64 = 1e-12;

/// Propagator used for every cluster.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// Conditional bath evolution with the donor reduced to `⟨S_z⟩`.
    #[default]
    Fast,
    /// Full donor ⊗ cluster propagation.
    Exact,
}

impl Kernel {
    pub fn run(self, sys: &ClusterSystem, ctx: &EchoContext, taus: &[f64]) -> Result<Vec<Complex64>> {
        match self {
            Kernel::Fast => cluster_echo_fast(sys, ctx, taus),
            Kernel::Exact => hahn_echo_exact(sys, ctx, taus),
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Kernel::Fast),
            "exact" => Ok(Kernel::Exact),
            other => Err(Error::invalid(format!("unknown kernel '{other}' (expected fast or exact)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CceOptions {
    pub k_max: usize,
    /// Largest pair distance kept (Å); `None` uses the configuration cutoff.
    pub r_max: Option<f64>,
    pub kernel: Kernel,
}

impl Default for CceOptions {
    fn default() -> Self {
        CceOptions { k_max: 2, r_max: None, kernel: Kernel::Fast }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterContribution {
    pub cluster: Cluster,
    /// Echo of the cluster on its own.
    pub l: Vec<Complex64>,
    /// Irreducible factor after dividing out every proper subset.
    pub l_tilde: Vec<Complex64>,
}

/// `L̃_S = L_S / Π_{C⊂S} L̃_C`, evaluated pointwise.
///
/// Where the denominator modulus drops below [`DIVISION_GUARD`] the factor
/// is set to one; the number of such points is returned alongside.
pub fn cluster_factor(l: &[Complex64], subsets: &[&[Complex64]]) -> Result<(Vec<Complex64>, usize)> {
    if subsets.iter().any(|s| s.len() != l.len()) {
        return Err(Error::invalid("subset factors must share the time grid"));
    }
    let mut invalid = 0;
    let out = (0..l.len())
        .map(|t| {
            let den: Complex64 = subsets.iter().map(|s| s[t]).product();
            if den.norm() < DIVISION_GUARD {
                invalid += 1;
                Complex64::new(1.0, 0.0)
            } else {
                l[t] / den
            }
        })
        .collect();
    Ok((out, invalid))
}

/// Every cluster up to `opts.k_max` with its raw and irreducible echo.
///
/// Cluster echoes are computed in parallel; the factorisation then runs in
/// enumeration order so results never depend on scheduling.
pub fn cluster_contributions(
    config: &BathConfiguration,
    ctx: &EchoContext,
    opts: &CceOptions,
    taus: &[f64],
) -> Result<(Vec<ClusterContribution>, usize)> {
    let r_max = opts.r_max.unwrap_or(config.pair_cutoff);
    let clusters = enumerate_clusters(config, opts.k_max, r_max)?;
    // pairs beyond r_max are dropped everywhere, including inside triples
    let lookup: PairLookup = config
        .pairs
        .iter()
        .filter(|p| config.sites[p.i].distance(&config.sites[p.j]) <= r_max * (1.0 + 1e-12))
        .map(|p| ((p.i, p.j), (p.b_zz, p.b_ff)))
        .collect();
    let raw: Vec<Vec<Complex64>> = clusters
        .par_iter()
        .map(|c| opts.kernel.run(&ClusterSystem::from_cluster(config, &lookup, c)?, ctx, taus))
        .collect::<Result<_>>()?;

    let mut index: HashMap<&Cluster, usize> = HashMap::with_capacity(clusters.len());
    let mut out: Vec<ClusterContribution> = Vec::with_capacity(clusters.len());
    let mut invalid = 0;
    for (k, (cluster, l)) in clusters.iter().zip(raw).enumerate() {
        let subsets = cluster.proper_subsets();
        // subsets that were not enumerated are non-interacting, so L̃ = 1
        let factors: Vec<&[Complex64]> =
            subsets.iter().filter_map(|s| index.get(s)).map(|&i| out[i].l_tilde.as_slice()).collect();
        let (l_tilde, bad) = cluster_factor(&l, &factors)?;
        invalid += bad;
        index.insert(cluster, k);
        out.push(ClusterContribution { cluster: cluster.clone(), l, l_tilde });
    }
    Ok((out, invalid))
}

/// `L⁽ᵏ⁾(t) = Π_{|S|≤k} L̃_S(t)`; no clusters gives one.
pub fn cce_combine(contributions: &[ClusterContribution], k_max: usize, n_times: usize) -> Vec<Complex64> {
    let mut total = vec![Complex64::new(1.0, 0.0); n_times];
    for c in contributions.iter().filter(|c| c.cluster.len() <= k_max) {
        for (t, f) in total.iter_mut().zip(&c.l_tilde) {
            *t *= f;
        }
    }
    total
}

/// Complex echo of one configuration and the count of guarded divisions.
pub fn configuration_echo(
    config: &BathConfiguration,
    ctx: &EchoContext,
    opts: &CceOptions,
    taus: &[f64],
) -> Result<(Vec<Complex64>, usize)> {
    let (contribs, invalid) = cluster_contributions(config, ctx, opts, taus)?;
    Ok((cce_combine(&contribs, opts.k_max, taus.len()), invalid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{BathModel, LatticeSpec, SI_LATTICE_CONSTANT};
    use crate::spin::DonorSpec;

    fn model() -> BathModel {
        let ls = LatticeSpec { side_length: 30.0, ..LatticeSpec::default() };
        BathModel::new(&DonorSpec::si_bi(), &ls).unwrap()
    }

    fn taus() -> Vec<f64> {
        (0..25).map(|k| k as f64 * 1e-4).collect()
    }

    fn ctx() -> EchoContext {
        EchoContext::new(&DonorSpec::si_bi(), 0.32, (12, 9)).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn guard_clamps_and_counts() {
        let one = Complex64::new(1.0, 0.0);
        let l = vec![one, Complex64::new(0.5, 0.0)];
        let zero = vec![one, Complex64::new(0.0, 0.0)];
        let (f, bad) = cluster_factor(&l, &[&zero]).unwrap();
        assert_eq!(bad, 1);
        assert_eq!(f[1], one);
        assert!(cluster_factor(&l, &[&[one][..]]).is_err());
    }

    #[test]
    fn empty_bath_gives_unity() {
        let m = model();
        let config = m.configuration_from(&[]).unwrap();
        let (l, bad) = configuration_echo(&config, &ctx(), &CceOptions::default(), &taus()).unwrap();
        assert_eq!(bad, 0);
        assert!(l.iter().all(|x| *x == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn single_pair_equals_its_own_echo() {
        let m = model();
        let config = m.configuration_from(&[[5, 1, 1], [7, 3, 1]]).unwrap();
        assert_eq!(config.pairs.len(), 1);
        let (contribs, _) = cluster_contributions(&config, &ctx(), &CceOptions::default(), &taus()).unwrap();
        assert_eq!(contribs.len(), 3);
        let total = cce_combine(&contribs, 2, taus().len());
        assert!(close(&total, &contribs[2].l, 1e-14));
    }

    #[test]
    fn distant_pairs_factorise() {
        let m = model();
        let a = [[5, 1, 1], [7, 3, 1]];
        let b = [[-7, 1, 1], [-5, 3, 1]];
        let echo = |occ: &[[i32; 3]]| {
            configuration_echo(&m.configuration_from(occ).unwrap(), &ctx(), &CceOptions::default(), &taus()).unwrap().0
        };
        let both: Vec<[i32; 3]> = a.iter().chain(&b).copied().collect();
        let product: Vec<Complex64> = echo(&a).iter().zip(echo(&b)).map(|(x, y)| x * y).collect();
        assert!(close(&echo(&both), &product, 1e-12));
    }

    #[test]
    fn r_max_must_fit_inside_cutoff() {
        let m = model();
        let config = m.configuration_from(&[[1, 1, 1]]).unwrap();
        let opts = CceOptions { r_max: Some(3.0 * SI_LATTICE_CONSTANT), ..CceOptions::default() };
        assert!(configuration_echo(&config, &ctx(), &opts, &taus()).is_err());
    }

    #[test]
    fn kernel_names() {
        assert_eq!("exact".parse::<Kernel>().unwrap(), Kernel::Exact);
        assert!("slow".parse::<Kernel>().is_err());
    }
}
