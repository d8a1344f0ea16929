use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cograph::{extract_cograph, CographConfig};
use crate::error::Result;
use crate::graph::BitGraph;
use crate::hypergraph::{BlowupConfig, HardInstance};
use crate::util::{rng, sub_seed};

/// Pairs checked exhaustively up to this many, sampled beyond.
pub const PAIR_AUDIT_LIMIT: usize = 10_000;
/// Largest vertex count measured by exact clique search.
pub const BRUTE_FORCE_LIMIT: usize = 24;
/// Base graphs with more ordered pairs than this skip the quadruple audit.
pub const QUADRUPLE_PAIR_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RamseyMethod {
    /// Exact maximum clique and independent set.
    BruteForce,
    /// Lower bounds read off an extracted cograph.
    CographProbe,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardInstanceAudit {
    pub t: usize,
    pub k: usize,
    pub r: usize,
    pub vertices: usize,
    pub total_degree: u32,
    pub pairs_checked: usize,
    pub pairs_exhaustive: bool,
    pub pair_mismatches: usize,
    /// Ordered quadruples `(a, b, c, e)` of base vertices with equal `Φ` classes.
    pub quadruples_checked: u64,
    pub quadruple_violations: u64,
    /// `(clique, independent set)` of each base graph sampled.
    pub base_attempts: Vec<(usize, usize)>,
    pub clique_threshold: usize,
    pub method: RamseyMethod,
    pub largest_clique: usize,
    pub largest_independent: usize,
}

impl HardInstanceAudit {
    pub fn passed(&self) -> bool {
        self.pair_mismatches == 0 && self.quadruple_violations == 0
    }
}

fn vertex_id(cfg: &BlowupConfig, digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, &x| acc * cfg.t + x)
}

/// Builds the encoded graph and audits it against the combinatorial reference.
pub fn build_hard_instance(cfg: &BlowupConfig) -> Result<(HardInstance, HardInstanceAudit)> {
    let inst = HardInstance::build(cfg)?;
    let oracle = inst.graph.oracle()?;
    let n = inst.vertices.len();

    let exhaustive = n * n <= PAIR_AUDIT_LIMIT;
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
    } else {
        let mut r = rng(sub_seed(cfg.seed, 0xa0d1));
        (0..PAIR_AUDIT_LIMIT).map(|_| (r.gen_range(0..n), r.gen_range(0..n))).collect()
    };
    let pair_mismatches = pairs
        .par_iter()
        .filter(|&&(a, b)| oracle.is_edge(&[a, b]) != inst.reference_adjacency(&inst.vertices[a], &inst.vertices[b]))
        .count();

    // the quadruple check runs on the encoded graph: a base vertex x sits at (x, 0, ..., 0)
    let base = inst.base.vertices();
    let m = base.len();
    let (mut quadruples_checked, mut quadruple_violations) = (0u64, 0u64);
    if m * m <= QUADRUPLE_PAIR_LIMIT {
        let lift = |x: &[usize]| {
            let mut d = x.to_vec();
            d.resize(cfg.k * cfg.r, 0);
            vertex_id(cfg, &d)
        };
        let mut groups: HashMap<_, (u64, u64)> = HashMap::new();
        for a in &base {
            for b in &base {
                if a == b {
                    continue;
                }
                let e = oracle.is_edge(&[lift(a), lift(b)]);
                let g = groups.entry(inst.base.phi(a, b)).or_default();
                if e {
                    g.0 += 1;
                } else {
                    g.1 += 1;
                }
            }
        }
        for (yes, no) in groups.values() {
            quadruples_checked += (yes + no) * (yes + no);
            quadruple_violations += 2 * yes * no;
        }
    }

    let (method, largest_clique, largest_independent) = if n <= BRUTE_FORCE_LIMIT {
        let g = BitGraph::from_fn(n, |a, b| oracle.is_edge(&[a, b]));
        (RamseyMethod::BruteForce, g.max_clique().len(), g.complement().max_clique().len())
    } else {
        let cert = extract_cograph(&inst.graph, &CographConfig { seed: cfg.seed, ..CographConfig::default() })?;
        let (c, i) = cert.cotree.max_clique_and_independent();
        (RamseyMethod::CographProbe, c.len(), i.len())
    };

    let audit = HardInstanceAudit {
        t: cfg.t,
        k: cfg.k,
        r: cfg.r,
        vertices: n,
        total_degree: inst.graph.total_degree(),
        pairs_checked: pairs.len(),
        pairs_exhaustive: exhaustive,
        pair_mismatches,
        quadruples_checked,
        quadruple_violations,
        base_attempts: inst.attempts.clone(),
        clique_threshold: cfg.clique_threshold(),
        method,
        largest_clique,
        largest_independent,
    };
    Ok((inst, audit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_graph_on_two_vertices() {
        let (inst, audit) = build_hard_instance(&BlowupConfig::new(2, 1, 1, 0).unwrap()).unwrap();
        assert_eq!(audit.vertices, 2);
        assert!(audit.passed());
        let o = inst.graph.oracle().unwrap();
        assert_eq!(o.is_edge(&[0, 1]), inst.base.adjacent(&[0], &[1]));
    }

    #[test]
    fn criterion_configs() {
        for (t, k, r) in [(2, 1, 2), (3, 1, 2), (2, 2, 1)] {
            let (_, a) = build_hard_instance(&BlowupConfig::new(t, k, r, 7).unwrap()).unwrap();
            assert!(a.pairs_exhaustive);
            assert_eq!(a.pairs_checked, a.vertices * a.vertices);
            assert_eq!((a.pair_mismatches, a.quadruple_violations), (0, 0));
            assert!(a.quadruples_checked > 0);
            assert_eq!(a.method, RamseyMethod::BruteForce);
        }
    }

    #[test]
    fn three_by_two_has_small_homogeneous_sets() {
        let (_, a) = build_hard_instance(&BlowupConfig::new(3, 1, 2, 3).unwrap()).unwrap();
        assert_eq!(a.vertices, 9);
        assert!(a.largest_clique.max(a.largest_independent) < 9);
        assert!(a.largest_clique * a.largest_independent >= 3);
    }

    #[test]
    fn larger_instance_uses_probe_and_sampling() {
        let (_, a) = build_hard_instance(&BlowupConfig::new(3, 1, 3, 1).unwrap()).unwrap();
        assert_eq!(a.vertices, 27);
        assert_eq!(a.method, RamseyMethod::CographProbe);
        assert!(a.passed());
        let (_, b) = build_hard_instance(&BlowupConfig::new(4, 1, 4, 1).unwrap()).unwrap();
        assert!(!b.pairs_exhaustive && b.pairs_checked == PAIR_AUDIT_LIMIT && b.passed());
    }
}
