use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::bath::BathConfiguration;
use crate::{Error, Result};

/// Sorted, duplicate-free set of bath-site indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cluster {
    members: Vec<usize>,
}

impl Cluster {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        let before = members.len();
        members.dedup();
        if members.is_empty() || members.len() != before {
            return Err(Error::invalid("cluster must be nonempty without duplicates"));
        }
        Ok(Cluster { members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Proper nonempty subsets, smallest first.
    pub fn proper_subsets(&self) -> Vec<Cluster> {
        let n = self.members.len();
        let mut out: Vec<Cluster> = (1u32..(1 << n) - 1)
            .map(|mask| Cluster { members: (0..n).filter(|b| mask & (1 << b) != 0).map(|b| self.members[b]).collect() })
            .collect();
        out.sort_by(|a, b| (a.len(), &a.members).cmp(&(b.len(), &b.members)));
        out
    }
}

/// Singletons, pairs within `r_max` (Å), and for `k_max = 3` connected triples.
///
/// Pairs come from the configuration's pair list, so `r_max` may not exceed
/// the cutoff it was built with. The result is ordered by size, then members.
pub fn enumerate_clusters(config: &BathConfiguration, k_max: usize, r_max: f64) -> Result<Vec<Cluster>> {
    if !(1..=3).contains(&k_max) {
        return Err(Error::invalid(format!("cluster size {k_max} not supported (1, 2 or 3)")));
    }
    if r_max > config.pair_cutoff * (1.0 + 1e-9) {
        return Err(Error::invalid(format!(
            "cluster cutoff {r_max} Å exceeds the configuration pair cutoff {} Å",
            config.pair_cutoff
        )));
    }
    let mut out: Vec<Cluster> = (0..config.len()).map(|i| Cluster { members: vec![i] }).collect();
    if k_max == 1 {
        return Ok(out);
    }
    let edges: Vec<(usize, usize)> = config
        .pairs
        .iter()
        .filter(|p| config.sites[p.i].distance(&config.sites[p.j]) <= r_max * (1.0 + 1e-9))
        .map(|p| (p.i, p.j))
        .collect();
    out.extend(edges.iter().map(|&(i, j)| Cluster { members: vec![i, j] }));
    if k_max == 3 {
        let mut adj = vec![Vec::new(); config.len()];
        for &(i, j) in &edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut triples = BTreeSet::new();
        for (centre, nb) in adj.iter().enumerate() {
            for a in 0..nb.len() {
                for b in a + 1..nb.len() {
                    let mut t = [centre, nb[a], nb[b]];
                    t.sort_unstable();
                    triples.insert(t);
                }
            }
        }
        out.extend(triples.into_iter().map(|t| Cluster { members: t.to_vec() }));
    }
    Ok(out)
}
