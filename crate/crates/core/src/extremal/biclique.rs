use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::PartiteHypergraph;
use crate::util::{for_each_subset, for_each_tuple, product};

/// Default cap on search nodes before the answer becomes `Unknown`.
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

/// Dense bit relation over `P_j x ... x P_{k-1}`.
#[derive(Clone, Debug)]
struct Relation {
    sizes: Vec<usize>,
    bits: Vec<u64>,
}

impl Relation {
    fn full(sizes: &[usize]) -> Self {
        let n = product(sizes) as usize;
        let mut bits = vec![u64::MAX; n.div_ceil(64)];
        if !n.is_multiple_of(64) {
            *bits.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
        }
        Relation { sizes: sizes.to_vec(), bits }
    }

    fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn get(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn and_slice(&mut self, rel: &Relation, x: usize) {
        // slice `x` of `rel` along its first coordinate
        let stride = product(&rel.sizes[1..]) as usize;
        let start = x * stride;
        let off = start % 64;
        let base = start / 64;
        for w in 0..self.bits.len() {
            let lo = rel.bits.get(base + w).copied().unwrap_or(0) >> off;
            let hi = if off == 0 { 0 } else { rel.bits.get(base + w + 1).copied().unwrap_or(0) << (64 - off) };
            let mut word = lo | hi;
            let remaining = stride - w * 64;
            if remaining < 64 {
                word &= (1u64 << remaining) - 1;
            }
            self.bits[w] &= word;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum BicliqueVerdict {
    /// No `K_{u,...,u}` exists.
    Free,
    /// One `u`-subset per part, the lexicographically least found.
    Contains { witness: Vec<Vec<usize>> },
    /// The node budget ran out before the search finished.
    Unknown { nodes: u64 },
}

impl BicliqueVerdict {
    pub fn is_free(&self) -> bool {
        matches!(self, BicliqueVerdict::Free)
    }

    pub fn label(&self) -> &'static str {
        match self {
            BicliqueVerdict::Free => "free",
            BicliqueVerdict::Contains { .. } => "contains",
            BicliqueVerdict::Unknown { .. } => "unknown",
        }
    }
}

struct Search {
    u: usize,
    nodes: u64,
    budget: u64,
}

impl Search {
    /// Searches a `K_{u,...,u}` inside `rel`; `Ok(None)` means none, `Err(())` budget.
    fn run(&mut self, rel: &Relation) -> std::result::Result<Option<Vec<Vec<usize>>>, ()> {
        let u = self.u;
        if rel.sizes.len() == 1 {
            let picks: Vec<usize> = (0..rel.sizes[0]).filter(|&i| rel.get(i)).take(u).collect();
            return Ok((picks.len() == u).then(|| vec![picks]));
        }
        let rest = &rel.sizes[1..];
        let need = (u as u64).pow(rest.len() as u32);
        // candidates whose slice alone is large enough
        let stride = product(rest) as usize;
        let cand: Vec<usize> = (0..rel.sizes[0])
            .filter(|&x| (0..stride).filter(|&i| rel.get(x * stride + i)).count() as u64 >= need)
            .collect();
        if cand.len() < u {
            return Ok(None);
        }
        let mut chosen = Vec::with_capacity(u);
        let common = Relation::full(rest);
        self.extend(rel, &cand, 0, &mut chosen, common, need)
    }

    fn extend(
        &mut self,
        rel: &Relation,
        cand: &[usize],
        from: usize,
        chosen: &mut Vec<usize>,
        common: Relation,
        need: u64,
    ) -> std::result::Result<Option<Vec<Vec<usize>>>, ()> {
        if chosen.len() == self.u {
            if let Some(mut w) = self.run(&common)? {
                w.insert(0, chosen.clone());
                return Ok(Some(w));
            }
            return Ok(None);
        }
        for j in from..cand.len() {
            if cand.len() - j < self.u - chosen.len() {
                break;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(());
            }
            let mut next = common.clone();
            next.and_slice(rel, cand[j]);
            if next.count() < need {
                continue;
            }
            chosen.push(cand[j]);
            let found = self.extend(rel, cand, j + 1, chosen, next, need)?;
            chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

fn edge_relation(h: &PartiteHypergraph, tuple_budget: u128) -> Result<Relation> {
    let sizes = h.sizes();
    let total = product(&sizes);
    if total > tuple_budget {
        return Err(Error::Budget { what: "edge relation".into(), needed: total, budget: tuple_budget });
    }
    let oracle = h.oracle()?;
    let mut rel = Relation { sizes: sizes.clone(), bits: vec![0; (total as usize).div_ceil(64)] };
    let mut i = 0usize;
    for_each_tuple(&sizes, |t| {
        if oracle.is_edge(t) {
            rel.bits[i / 64] |= 1 << (i % 64);
        }
        i += 1;
        true
    });
    Ok(rel)
}

/// Exact search for `K_{u,...,u}` with common-neighbourhood pruning.
pub fn contains_biclique(h: &PartiteHypergraph, u: usize, node_budget: u64) -> Result<BicliqueVerdict> {
    if u == 0 {
        return Err(Error::Input("u must be positive".into()));
    }
    let rel = edge_relation(h, crate::hypergraph::DEFAULT_TUPLE_BUDGET)?;
    let mut s = Search { u, nodes: 0, budget: node_budget };
    Ok(match s.run(&rel) {
        Ok(Some(witness)) => BicliqueVerdict::Contains { witness },
        Ok(None) => BicliqueVerdict::Free,
        Err(()) => BicliqueVerdict::Unknown { nodes: s.nodes },
    })
}

/// Reference answer by enumerating every choice of `u`-subsets; tiny inputs only.
pub fn contains_biclique_naive(h: &PartiteHypergraph, u: usize) -> Result<bool> {
    let oracle = h.oracle()?;
    let sizes = h.sizes();
    let k = h.k();
    let mut subsets: Vec<Vec<Vec<usize>>> = Vec::with_capacity(k);
    for &n in &sizes {
        let mut all = Vec::new();
        for_each_subset(n, u, |s| {
            all.push(s.to_vec());
            true
        });
        subsets.push(all);
    }
    let counts: Vec<usize> = subsets.iter().map(Vec::len).collect();
    let inner = vec![u; k];
    let mut t = vec![0; k];
    let free = for_each_tuple(&counts, |choice| {
        let complete = for_each_tuple(&inner, |idx| {
            for i in 0..k {
                t[i] = subsets[i][choice[i]][idx[i]];
            }
            oracle.is_edge(&t)
        });
        !complete
    });
    Ok(!free)
}
