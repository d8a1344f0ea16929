//! Iterated blowup of a random base graph on `S^k`, encoded as a semialgebraic
//! graph in `R^{2k}` through base-`B` and base-`B^2` digit expansions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::Rng as _;

use super::families::v;
use super::{Formula, PartiteHypergraph, PointSet, SignPredicate, SignSet};
use crate::error::{input, Error, Result};
use crate::graph::BitGraph;
use crate::poly::Polynomial;
use crate::rational::{ratio, Rational};
use crate::util::{rng, sub_seed};

/// Greedy Sidon set: repeatedly add the smallest integer keeping all sums
/// `s_i + s_j` (`i <= j`) distinct. Fails if it leaves `{1, ..., 2t^2}`.
pub fn sidon_set(t: usize) -> Result<Vec<i64>> {
    let limit = 2 * (t as i64) * (t as i64);
    let mut s: Vec<i64> = Vec::with_capacity(t);
    let mut sums = std::collections::HashSet::new();
    let mut n = 0;
    while s.len() < t {
        n += 1;
        if n > limit {
            return input(format!("greedy Sidon set of size {t} does not fit in [1, {limit}]"));
        }
        let new: Vec<i64> = s.iter().map(|&x| x + n).chain([2 * n]).collect();
        if new.iter().all(|x| !sums.contains(x)) {
            sums.extend(new);
            s.push(n);
        }
    }
    Ok(s)
}

pub fn is_sidon(s: &[i64]) -> bool {
    let mut seen = std::collections::HashSet::new();
    (0..s.len()).all(|i| (i..s.len()).all(|j| seen.insert(s[i] + s[j])))
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlowupConfig {
    pub t: usize,
    pub k: usize,
    pub r: usize,
    pub seed: u64,
    pub sidon: Vec<i64>,
    pub base: i64,
    /// Base graph acceptance: largest clique and independent set must be at
    /// most `ceil(clique_factor * k * log2 t) + 1`.
    pub clique_factor: f64,
    pub max_attempts: usize,
}

impl BlowupConfig {
    pub fn new(t: usize, k: usize, r: usize, seed: u64) -> Result<Self> {
        if t < 2 || k < 1 || r < 1 {
            return input(format!("blowup needs t >= 2, k >= 1, r >= 1 (got t={t}, k={k}, r={r})"));
        }
        let sidon = sidon_set(t)?;
        Ok(BlowupConfig {
            t,
            k,
            r,
            seed,
            sidon,
            base: 20 * (t * t) as i64,
            clique_factor: 2.0,
            max_attempts: 20,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.t.pow((self.k * self.r) as u32)
    }

    pub fn clique_threshold(&self) -> usize {
        (self.clique_factor * self.k as f64 * (self.t as f64).log2()).ceil() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.sidon.len() != self.t || !is_sidon(&self.sidon) {
            return input("S must be a Sidon set of size t");
        }
        let lim = 2 * (self.t * self.t) as i64;
        if self.sidon.iter().any(|&x| x < 1 || x > lim) {
            return input(format!("S must lie in [1, {lim}]"));
        }
        if self.base != 20 * (self.t * self.t) as i64 {
            return input("B must equal 20 t^2");
        }
        Ok(())
    }

    /// Vertex number `id` as `r` blocks of `k` digit indices into `S`.
    pub fn vertex(&self, mut id: usize) -> Vec<usize> {
        let mut digits = vec![0; self.k * self.r];
        for slot in digits.iter_mut().rev() {
            *slot = id % self.t;
            id /= self.t;
        }
        digits
    }

    /// `x_i = Σ_j a_{j,i} B^{r-j}`, `y_i = Σ_j a_{j,i} B^{2(r-j)}` (blocks 1-based).
    pub fn encode(&self, a: &[usize]) -> Vec<Rational> {
        let b = BigInt::from(self.base);
        let mut xs = vec![BigInt::from(0); self.k];
        let mut ys = vec![BigInt::from(0); self.k];
        for j in 0..self.r {
            for i in 0..self.k {
                let digit = BigInt::from(self.sidon[a[j * self.k + i]]);
                let e = self.r - 1 - j;
                xs[i] += &digit * num_traits::pow(b.clone(), e);
                ys[i] += &digit * num_traits::pow(b.clone(), 2 * e);
            }
        }
        xs.into_iter().chain(ys).map(Rational::from_integer).collect()
    }
}

/// `Φ_i(a, b) = (a_i, b_i)` when they differ, `*` otherwise.
pub type PhiClass = Vec<Option<(i64, i64)>>;

fn canonical(c: &PhiClass) -> PhiClass {
    let swapped: PhiClass = c.iter().map(|e| e.map(|(p, q)| (q, p))).collect();
    if swapped < *c {
        swapped
    } else {
        c.clone()
    }
}

/// Base graph on `S^k` whose adjacency depends only on `Φ`.
#[derive(Clone, Debug)]
pub struct BaseGraph {
    pub k: usize,
    pub sidon: Vec<i64>,
    coins: BTreeMap<PhiClass, bool>,
}

impl BaseGraph {
    /// One fair coin per unordered class `{Φ(a,b), Φ(b,a)}`, drawn in lexicographic class order.
    pub fn random(sidon: &[i64], k: usize, seed: u64) -> Self {
        let mut entries: Vec<Option<(i64, i64)>> = vec![None];
        for &p in sidon {
            for &q in sidon {
                if p != q {
                    entries.push(Some((p, q)));
                }
            }
        }
        let mut r = rng(seed);
        let mut coins = BTreeMap::new();
        crate::util::for_each_tuple(&vec![entries.len(); k], |t| {
            let c: PhiClass = t.iter().map(|&i| entries[i]).collect();
            if c.iter().any(Option::is_some) && canonical(&c) == c {
                coins.insert(c, r.gen_bool(0.5));
            }
            true
        });
        BaseGraph { k, sidon: sidon.to_vec(), coins }
    }

    pub fn phi(&self, a: &[usize], b: &[usize]) -> PhiClass {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x != y).then(|| (self.sidon[x], self.sidon[y])))
            .collect()
    }

    pub fn class_is_edge(&self, c: &PhiClass) -> bool {
        self.coins[&canonical(c)]
    }

    pub fn classes(&self) -> impl Iterator<Item = (&PhiClass, &bool)> {
        self.coins.iter()
    }

    pub fn adjacent(&self, a: &[usize], b: &[usize]) -> bool {
        a != b && self.class_is_edge(&self.phi(a, b))
    }

    pub fn vertices(&self) -> Vec<Vec<usize>> {
        let t = self.sidon.len();
        let mut out = Vec::new();
        crate::util::for_each_tuple(&vec![t; self.k], |v| {
            out.push(v.to_vec());
            true
        });
        out
    }

    pub fn bitgraph(&self) -> BitGraph {
        let vs = self.vertices();
        BitGraph::from_fn(vs.len(), |u, w| self.adjacent(&vs[u], &vs[w]))
    }
}

/// Encoded graph plus the data needed to audit it.
#[derive(Clone, Debug)]
pub struct HardInstance {
    pub cfg: BlowupConfig,
    pub base: BaseGraph,
    pub graph: PartiteHypergraph,
    pub vertices: Vec<Vec<usize>>,
    /// `(largest clique, largest independent set)` of every base graph tried.
    pub attempts: Vec<(usize, usize)>,
}

impl HardInstance {
    pub fn build(cfg: &BlowupConfig) -> Result<Self> {
        cfg.validate()?;
        let mut attempts = Vec::new();
        let threshold = cfg.clique_threshold();
        let base = loop {
            if attempts.len() == cfg.max_attempts {
                return Err(Error::Precondition(format!(
                    "no base graph with clique and independent set <= {threshold} after {} attempts; measured {:?}",
                    cfg.max_attempts, attempts
                )));
            }
            let g = BaseGraph::random(&cfg.sidon, cfg.k, sub_seed(cfg.seed, attempts.len() as u64));
            let bg = g.bitgraph();
            let sizes = (bg.max_clique().len(), bg.complement().max_clique().len());
            attempts.push(sizes);
            if sizes.0 <= threshold && sizes.1 <= threshold {
                break g;
            }
        };
        let vertices: Vec<Vec<usize>> = (0..cfg.vertex_count()).map(|i| cfg.vertex(i)).collect();
        let points = PointSet::new(cfg.dim(), vertices.iter().map(|a| cfg.encode(a)).collect())?;
        let pred = encoded_predicate(cfg, &base)?;
        let graph = PartiteHypergraph::new(vec![points.clone(), points], pred)?;
        Ok(HardInstance { cfg: cfg.clone(), base, graph, vertices, attempts })
    }

    /// Adjacency decided by the first block where the vertices differ.
    pub fn reference_adjacency(&self, a: &[usize], b: &[usize]) -> bool {
        reference_adjacency(&self.cfg, &self.base, a, b)
    }
}

pub fn reference_adjacency(cfg: &BlowupConfig, g0: &BaseGraph, a: &[usize], b: &[usize]) -> bool {
    let k = cfg.k;
    (0..cfg.r)
        .map(|j| (&a[j * k..(j + 1) * k], &b[j * k..(j + 1) * k]))
        .find(|(x, y)| x != y)
        .is_some_and(|(x, y)| g0.adjacent(x, y))
}

struct PolyIndex {
    /// `pair[i][(pi, qi)]` = index of the first of the four quadratics for `p = S[pi] > q = S[qi]`.
    pair: Vec<BTreeMap<(usize, usize), usize>>,
    dy: Vec<usize>,
    /// `cross[(i1, i2)]` = index of the first of four cross-axis linear forms.
    cross: BTreeMap<(usize, usize), usize>,
}

fn encoded_predicate(cfg: &BlowupConfig, g0: &BaseGraph) -> Result<SignPredicate> {
    let k = cfg.k;
    let d = 2 * k;
    let dx = |i: usize| &v(2, d, 0, i) - &v(2, d, 1, i);
    let dy = |i: usize| &v(2, d, 0, k + i) - &v(2, d, 1, k + i);
    let c = |x: Rational| Polynomial::constant(2 * d, x);
    let bb = Rational::from_integer(BigInt::from(cfg.base));
    let s = &cfg.sidon;
    let mut polys = Vec::new();
    let mut idx = PolyIndex { pair: vec![BTreeMap::new(); k], dy: vec![], cross: BTreeMap::new() };
    for i in 0..k {
        let sq = &dx(i) * &dx(i);
        for pi in 0..s.len() {
            for qi in 0..s.len() {
                if s[pi] <= s[qi] {
                    continue;
                }
                let diff = s[pi] - s[qi];
                let hi = &c(ratio(2 * diff + 1, 2)) * &dy(i);
                let lo = &c(ratio(2 * diff - 1, 2)) * &dy(i);
                idx.pair[i].insert((pi, qi), polys.len());
                polys.push(&sq - &hi);
                polys.push(&sq - &lo);
                polys.push(&sq + &lo);
                polys.push(&sq + &hi);
            }
        }
        idx.dy.push(polys.len());
        polys.push(dy(i));
    }
    for i1 in 0..k {
        for i2 in i1 + 1..k {
            idx.cross.insert((i1, i2), polys.len());
            let (a, b) = (dy(i1), dy(i2));
            let bbig = c(bb.clone());
            polys.push(&a - &(&bbig * &b));
            polys.push(&a + &(&bbig * &b));
            polys.push(&(&bbig * &a) - &b);
            polys.push(&(&bbig * &a) + &b);
        }
    }

    let atom = Formula::atom;
    let both = |r: usize, s1: SignSet, s2: SignSet| Formula::and(vec![atom(r, s1), atom(r + 1, s2)]);
    // |Δy_{i'}| > B |Δy_i|
    let dominates = |ip: usize, i: usize| -> Formula {
        if ip < i {
            let r = idx.cross[&(ip, i)];
            Formula::or(vec![both(r, SignSet::POS, SignSet::POS), both(r, SignSet::NEG, SignSet::NEG)])
        } else {
            let r = idx.cross[&(i, ip)] + 2;
            Formula::or(vec![both(r, SignSet::POS, SignSet::NEG), both(r, SignSet::NEG, SignSet::POS)])
        }
    };
    let at_min = |i: usize| -> Formula {
        let mut args = vec![atom(idx.dy[i], SignSet::NONZERO)];
        args.extend((0..k).filter(|&ip| ip != i).map(|ip| Formula::not(dominates(ip, i))));
        Formula::and(args)
    };
    let pos = |x: i64| s.iter().position(|&y| y == x).unwrap();
    let lead = |i: usize, p: i64, q: i64| -> Formula {
        if p > q {
            let r = idx.pair[i][&(pos(p), pos(q))];
            Formula::and(vec![atom(idx.dy[i], SignSet::POS), atom(r, SignSet::NEG), atom(r + 1, SignSet::POS)])
        } else {
            let r = idx.pair[i][&(pos(q), pos(p))];
            Formula::and(vec![atom(idx.dy[i], SignSet::NEG), atom(r + 3, SignSet::NEG), atom(r + 2, SignSet::POS)])
        }
    };

    let mut clauses = Vec::new();
    for (class, &edge) in g0.classes() {
        if !edge {
            continue;
        }
        let swapped: PhiClass = class.iter().map(|e| e.map(|(p, q)| (q, p))).collect();
        let mut variants = vec![class.clone()];
        if swapped != *class {
            variants.push(swapped);
        }
        for c in variants {
            let conj = c
                .iter()
                .enumerate()
                .map(|(i, e)| match e {
                    None => Formula::not(at_min(i)),
                    Some((p, q)) => Formula::and(vec![at_min(i), lead(i, *p, *q)]),
                })
                .collect();
            clauses.push(Formula::and(conj));
        }
    }
    SignPredicate::new(polys, Formula::or(clauses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::binomial;

    #[test]
    fn greedy_sidon_fits_for_small_t() {
        for t in 2..=32 {
            let s = sidon_set(t).unwrap();
            assert_eq!(s.len(), t);
            assert!(is_sidon(&s));
            assert!(*s.last().unwrap() <= 2 * (t * t) as i64);
        }
        assert_eq!(sidon_set(2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn encoding_example() {
        let cfg = BlowupConfig::new(2, 1, 2, 0).unwrap();
        assert_eq!(cfg.base, 80);
        // digits (1, 2) are indices (0, 1) into S = {1, 2}
        let pt = cfg.encode(&[0, 1]);
        assert_eq!(pt, vec![Rational::from_integer(82.into()), Rational::from_integer(6402.into())]);
    }

    #[test]
    fn encoding_is_injective() {
        let cfg = BlowupConfig::new(3, 2, 2, 0).unwrap();
        let mut seen = std::collections::HashSet::new();
        for id in 0..cfg.vertex_count() {
            assert!(seen.insert(cfg.encode(&cfg.vertex(id))));
        }
    }

    #[test]
    fn degree_bound() {
        for (t, k) in [(2, 1), (3, 1), (2, 2), (3, 2)] {
            let h = HardInstance::build(&BlowupConfig::new(t, k, 1, 4).unwrap()).unwrap();
            let expect = k as u64 * (8 * binomial(t as u64, 2) as u64 + 1) + 4 * binomial(k as u64, 2) as u64;
            assert_eq!(h.graph.total_degree() as u64, expect);
            assert!((h.graph.total_degree() as usize) < 4 * k * t * t + 2 * k * k);
        }
    }

    #[test]
    fn base_graph_depends_only_on_phi() {
        let g = BaseGraph::random(&[1, 2, 5], 2, 11);
        let vs = g.vertices();
        for a in &vs {
            for b in &vs {
                for c in &vs {
                    for d in &vs {
                        if a != b && g.phi(a, b) == g.phi(c, d) {
                            assert_eq!(g.adjacent(a, b), g.adjacent(c, d));
                        }
                    }
                }
                assert_eq!(g.adjacent(a, b), g.adjacent(b, a));
            }
        }
    }

    #[test]
    fn reference_uses_first_differing_block() {
        let cfg = BlowupConfig::new(3, 1, 2, 1).unwrap();
        let h = HardInstance::build(&cfg).unwrap();
        assert!(!h.reference_adjacency(&[0, 1], &[0, 1]));
        for s in 0..3 {
            for u in 0..3 {
                for w in 0..3 {
                    if u != w {
                        assert_eq!(h.reference_adjacency(&[s, u], &[s, w]), h.base.adjacent(&[u], &[w]));
                    }
                }
            }
        }
    }

    #[test]
    fn encoded_graph_matches_reference() {
        for (t, k, r, seed) in [(2, 1, 2, 0), (3, 1, 2, 1), (2, 2, 1, 2), (3, 2, 2, 3), (4, 1, 3, 4)] {
            let h = HardInstance::build(&BlowupConfig::new(t, k, r, seed).unwrap()).unwrap();
            let o = h.graph.oracle().unwrap();
            let n = h.vertices.len();
            for a in 0..n {
                for b in 0..n {
                    let want = h.reference_adjacency(&h.vertices[a], &h.vertices[b]);
                    assert_eq!(o.is_edge(&[a, b]), want, "t={t} k={k} r={r} pair ({a},{b})");
                }
            }
            // spot check the rational reference path too
            for (a, b) in [(0, n - 1), (1, n / 2), (n - 1, 0)] {
                assert_eq!(h.graph.is_edge(&[a, b]).unwrap(), o.is_edge(&[a, b]));
            }
        }
    }
}
