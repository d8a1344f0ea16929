use std::collections::HashMap;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::families::{grid_points, random_points, unit_distance, v};
use crate::hypergraph::{EdgeOracle, Formula, PartiteHypergraph, PointSet, SignPredicate, SignSet};
use crate::poly::Polynomial;
use crate::rational::{format_rational, int, ratio, serde_str, Rational};
use crate::util::{rng, sub_seed};

/// Vertex classes of a host and the `k`-ary predicate deciding its edges.
///
/// A pattern vertex may only land in its own class, and an edge
/// `(v_1, ..., v_k)` of the pattern is present when the predicate holds on
/// the concatenated coordinates of the images, in that order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Host {
    pub classes: Vec<PointSet>,
    pub predicate: SignPredicate,
}

impl Host {
    /// Classes are the parts of `h`, so only part-respecting copies count.
    pub fn from_hypergraph(h: &PartiteHypergraph) -> Self {
        Host { classes: h.parts.clone(), predicate: h.predicate.clone() }
    }

    /// One class holding every vertex.
    pub fn single(points: PointSet, predicate: SignPredicate) -> Self {
        Host { classes: vec![points], predicate }
    }

    pub fn total_degree(&self) -> u32 {
        self.predicate.total_degree()
    }

    pub fn dim(&self) -> usize {
        self.classes.first().map_or(0, |c| c.d)
    }
}

/// A small `k`-uniform pattern with each vertex pinned to a host class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub class_of: Vec<usize>,
    pub edges: Vec<Vec<usize>>,
}

impl Pattern {
    pub fn new(class_of: Vec<usize>, edges: Vec<Vec<usize>>) -> Result<Self> {
        let p = Pattern { class_of, edges };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let k = self.edges.first().map_or(0, Vec::len);
        if k == 0 {
            return Err(Error::Input("pattern needs at least one nonempty edge".into()));
        }
        for e in &self.edges {
            if e.len() != k {
                return Err(Error::Input("pattern edges must all have the same size".into()));
            }
            if e.iter().any(|&x| x >= n) {
                return Err(Error::Input(format!("pattern edge {e:?} uses a vertex outside 0..{n}")));
            }
            let mut s = e.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != k {
                return Err(Error::Input(format!("pattern edge {e:?} repeats a vertex")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.class_of.len()
    }

    pub fn k(&self) -> usize {
        self.edges[0].len()
    }

    /// Triangle with all three vertices in class 0.
    pub fn triangle() -> Self {
        Pattern { class_of: vec![0; 3], edges: vec![vec![0, 1], vec![1, 2], vec![0, 2]] }
    }

    /// Triangle with vertex `i` in class `i`.
    pub fn partite_triangle() -> Self {
        Pattern { class_of: vec![0, 1, 2], edges: vec![vec![0, 1], vec![1, 2], vec![0, 2]] }
    }

    /// One edge with vertex `i` in class `i`.
    pub fn single_edge(k: usize) -> Self {
        Pattern { class_of: (0..k).collect(), edges: vec![(0..k).collect()] }
    }
}

/// Host and pattern compiled together: one oracle per class signature.
struct Embedder {
    sizes: Vec<usize>,
    class_of: Vec<usize>,
    edges: Vec<(Vec<usize>, usize)>,
    oracles: Vec<EdgeOracle>,
}

impl Embedder {
    fn new(host: &Host, pattern: &Pattern) -> Result<Self> {
        pattern.validate()?;
        let sizes: Vec<usize> = host.classes.iter().map(PointSet::len).collect();
        if let Some(&c) = pattern.class_of.iter().find(|&&c| c >= sizes.len()) {
            return Err(Error::Input(format!("pattern uses class {c} but the host has {}", sizes.len())));
        }
        let mut sig_index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut oracles = Vec::new();
        let mut edges = Vec::new();
        for e in &pattern.edges {
            let sig: Vec<usize> = e.iter().map(|&x| pattern.class_of[x]).collect();
            let idx = match sig_index.get(&sig) {
                Some(&i) => i,
                None => {
                    let parts = sig.iter().map(|&c| host.classes[c].clone()).collect();
                    oracles.push(PartiteHypergraph::new(parts, host.predicate.clone())?.oracle()?);
                    sig_index.insert(sig, oracles.len() - 1);
                    oracles.len() - 1
                }
            };
            edges.push((e.clone(), idx));
        }
        Ok(Embedder { sizes, class_of: pattern.class_of.clone(), edges, oracles })
    }

    fn edge_present(&self, e: usize, phi: &[usize]) -> bool {
        let (verts, o) = &self.edges[e];
        let t: Vec<usize> = verts.iter().map(|&x| phi[x]).collect();
        self.oracles[*o].is_edge(&t)
    }

    fn is_copy(&self, phi: &[usize]) -> bool {
        (0..self.edges.len()).all(|e| self.edge_present(e, phi))
    }

    fn demand(&self) -> Vec<usize> {
        let mut need = vec![0; self.sizes.len()];
        for &c in &self.class_of {
            need[c] += 1;
        }
        need
    }

    /// Labelled injections in total, or `None` on overflow.
    fn injection_count(&self) -> Option<u128> {
        let mut total: u128 = 1;
        for (c, &k) in self.demand().iter().enumerate() {
            let n = self.sizes[c] as u128;
            if (k as u128) > n {
                return Some(0);
            }
            for i in 0..k as u128 {
                total = total.checked_mul(n - i)?;
            }
        }
        Some(total)
    }

    fn random_injection(&self, r: &mut crate::util::Rng) -> Vec<usize> {
        let need = self.demand();
        let mut picks: Vec<Vec<usize>> =
            need.iter().enumerate().map(|(c, &k)| sample(r, self.sizes[c], k).into_vec()).collect();
        self.class_of.iter().map(|&c| picks[c].pop().unwrap()).collect()
    }
}

/// Labelled copies: injections respecting classes under which every pattern edge is a host edge.
pub fn count_labelled_copies(host: &Host, pattern: &Pattern, budget: u128) -> Result<u128> {
    let emb = Embedder::new(host, pattern)?;
    let total = emb.injection_count().unwrap_or(u128::MAX);
    if total > budget {
        return Err(Error::Budget { what: "labelled injections".into(), needed: total, budget });
    }
    if total == 0 {
        return Ok(0);
    }
    let n = pattern.n();
    // edges become checkable once their largest vertex is placed
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (e, _)) in emb.edges.iter().enumerate() {
        ready[*e.iter().max().unwrap()].push(i);
    }
    let first: Vec<usize> = (0..emb.sizes[emb.class_of[0]]).collect();
    Ok(first
        .par_iter()
        .map(|&x| {
            let mut phi = vec![usize::MAX; n];
            phi[0] = x;
            if !ready[0].iter().all(|&e| emb.edge_present(e, &phi)) {
                return 0;
            }
            extend(&emb, &ready, &mut phi, 1)
        })
        .sum())
}

fn extend(emb: &Embedder, ready: &[Vec<usize>], phi: &mut Vec<usize>, at: usize) -> u128 {
    if at == phi.len() {
        return 1;
    }
    let c = emb.class_of[at];
    let mut total = 0;
    for x in 0..emb.sizes[c] {
        if (0..at).any(|j| emb.class_of[j] == c && phi[j] == x) {
            continue;
        }
        phi[at] = x;
        if ready[at].iter().all(|&e| emb.edge_present(e, phi)) {
            total += extend(emb, ready, phi, at + 1);
        }
    }
    phi[at] = usize::MAX;
    total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TesterConfig {
    pub pattern: Pattern,
    #[serde(with = "serde_str")]
    pub eps: Rational,
    pub trials: usize,
    /// Vertex queries per trial; each injection spends `|V(H)|` of them.
    pub queries: usize,
    pub seed: u64,
}

impl TesterConfig {
    pub fn validate(&self) -> Result<()> {
        self.pattern.validate()?;
        let mut bad = Vec::new();
        if self.queries < self.pattern.n() {
            bad.push(format!("queries = {} is below the pattern size {}", self.queries, self.pattern.n()));
        }
        if self.trials == 0 {
            bad.push("trials must be positive".to_string());
        }
        if self.eps <= int(0) || self.eps > int(1) {
            bad.push("eps must lie in (0, 1]".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Input(bad.join("; ")))
        }
    }

    pub fn injections_per_trial(&self) -> usize {
        self.queries / self.pattern.n()
    }
}

/// Vertex queries `ceil(c * eps^{-(d+1)n} * D^{dn})`, floored at `n`.
/// The constant is a desk-scale choice; the asymptotic constant is not explicit.
pub fn desk_query_budget(d: usize, big_d: u32, n: usize, eps: f64, c: f64) -> usize {
    let e = (d + 1) as f64 * n as f64;
    let raw = c * eps.powf(-e) * (big_d.max(1) as f64).powf((d * n) as f64);
    (raw.ceil().min(usize::MAX as f64) as usize).max(n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialVerdict {
    pub trial: usize,
    pub seed: u64,
    /// Injections drawn before the trial stopped.
    pub injections: usize,
    pub rejected: bool,
    /// Host indices of the copy that caused rejection.
    pub witness: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TesterReport {
    pub eps: String,
    pub pattern_size: usize,
    pub injections_per_trial: usize,
    pub verdicts: Vec<TrialVerdict>,
    pub rejected: usize,
    pub acceptance_rate: f64,
    pub rejection_rate: f64,
}

/// One-sided sampling tester: a trial rejects only on a verified copy.
pub fn test_h_freeness(host: &Host, cfg: &TesterConfig) -> Result<TesterReport> {
    cfg.validate()?;
    let emb = Embedder::new(host, &cfg.pattern)?;
    if emb.injection_count() == Some(0) {
        return Err(Error::Precondition("a class of the host is smaller than the pattern asks for".into()));
    }
    let per = cfg.injections_per_trial();
    let verdicts: Vec<TrialVerdict> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = sub_seed(cfg.seed, trial as u64);
            let mut r = rng(seed);
            for i in 0..per {
                let phi = emb.random_injection(&mut r);
                if emb.is_copy(&phi) {
                    return TrialVerdict { trial, seed, injections: i + 1, rejected: true, witness: Some(phi) };
                }
            }
            TrialVerdict { trial, seed, injections: per, rejected: false, witness: None }
        })
        .collect();
    let rejected = verdicts.iter().filter(|v| v.rejected).count();
    let rate = rejected as f64 / cfg.trials as f64;
    Ok(TesterReport {
        eps: format_rational(&cfg.eps),
        pattern_size: cfg.pattern.n(),
        injections_per_trial: per,
        verdicts,
        rejected,
        acceptance_rate: 1.0 - rate,
        rejection_rate: rate,
    })
}

/// Lower bound on the distance to triangle-freeness of a symmetric one-class host.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarCertificate {
    pub vertices: usize,
    pub edges: u64,
    /// `|E| - floor(N^2 / 4)`: edges any triangle-free subgraph must lose.
    pub removals: i64,
    /// `removals / N^2`
    #[serde(with = "serde_str")]
    pub certified_eps: Rational,
}

/// Every triangle-free graph on `N` vertices has at most `N^2 / 4` edges.
pub fn triangle_far_certificate(host: &Host) -> Result<FarCertificate> {
    if host.classes.len() != 1 {
        return Err(Error::Input("the certificate needs a single-class host".into()));
    }
    let p = &host.classes[0];
    let o = PartiteHypergraph::new(vec![p.clone(), p.clone()], host.predicate.clone())?.oracle()?;
    let n = p.len();
    let edges: u64 = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut c = 0u64;
            for w in u + 1..n {
                let e = o.is_edge(&[u, w]);
                if e != o.is_edge(&[w, u]) {
                    return Err(Error::Precondition(format!("host is not symmetric on ({u}, {w})")));
                }
                c += e as u64;
            }
            Ok(c)
        })
        .sum::<Result<u64>>()?;
    let removals = edges as i64 - (n * n / 4) as i64;
    Ok(FarCertificate {
        vertices: n,
        edges,
        removals,
        certified_eps: Rational::new(removals.into(), ((n * n).max(1) as i64).into()),
    })
}

/// Complete 5-partite graph on `(class, j / per)` points, minus pairs with `y + y' < 1/10`.
pub fn planted_multipartite(n: usize) -> Result<Host> {
    let per = n.div_ceil(5).max(1);
    let pts: Vec<Vec<Rational>> =
        (0..n).map(|i| vec![int((i / per) as i64), ratio((i % per) as i64, per as i64)]).collect();
    let p = PointSet::new(2, pts)?;
    let apart = &v(2, 2, 0, 0) - &v(2, 2, 1, 0);
    let corner = &(&v(2, 2, 0, 1) + &v(2, 2, 1, 1)) - &Polynomial::constant(4, ratio(1, 10));
    let pred = SignPredicate::new(
        vec![apart, corner],
        Formula::and(vec![Formula::atom(0, SignSet::NONZERO), Formula::atom(1, SignSet::NONNEG)]),
    )?;
    Ok(Host::single(p, pred))
}

/// Random points of `[0,1)^2` joined when their squared distance is at most `3/5`.
pub fn dense_unit_disk(n: usize, seed: u64) -> Result<Host> {
    let p = random_points(n, 2, 64, seed)?;
    let sq = crate::hypergraph::families::squared_distance_poly(2, 2, 0, 1);
    let g = &sq - &Polynomial::constant(4, ratio(3, 5));
    Ok(Host::single(p, SignPredicate::new(vec![g], Formula::atom(0, SignSet::NONPOS))?))
}

/// Random points of `[0,1)` joined when `x + y >= 1/4`.
pub fn threshold_graph(n: usize, seed: u64) -> Result<Host> {
    let p = random_points(n, 1, 1024, seed)?;
    let g = &(&v(2, 1, 0, 0) + &v(2, 1, 1, 0)) - &Polynomial::constant(2, ratio(1, 4));
    Ok(Host::single(p, SignPredicate::new(vec![g], Formula::atom(0, SignSet::NONNEG))?))
}

/// Random points of `[0,1)` joined across the split at `1/2`: complete bipartite.
pub fn split_bipartite(n: usize, seed: u64) -> Result<Host> {
    let p = random_points(n, 1, 1024, seed)?;
    let half = |b: usize| &v(2, 1, b, 0) - &Polynomial::constant(2, ratio(1, 2));
    let g = &half(0) * &half(1);
    Ok(Host::single(p, SignPredicate::new(vec![g], Formula::atom(0, SignSet::NEG))?))
}

/// Unit distances on the `s x s` integer grid; bipartite by coordinate parity.
pub fn grid_unit_distance(s: usize) -> Result<Host> {
    let h = unit_distance(grid_points(2, s, 0)?, int(1))?;
    Ok(Host::single(h.parts[0].clone(), h.predicate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::families::grid;

    fn three_clusters() -> Host {
        // two points per cluster, joined across clusters
        let pts = |c: i64| PointSet::from_ints(2, &[vec![c, 0], vec![c, 1]]).unwrap();
        let g = &v(2, 2, 0, 0) - &v(2, 2, 1, 0);
        Host { classes: vec![pts(0), pts(1), pts(2)], predicate: SignPredicate::new(vec![g], Formula::atom(0, SignSet::NONZERO)).unwrap() }
    }

    fn cfg(pattern: Pattern, trials: usize, queries: usize) -> TesterConfig {
        TesterConfig { pattern, eps: ratio(1, 10), trials, queries, seed: 3 }
    }

    #[test]
    fn single_edge_counts_edges() {
        let h = grid(2, 4).unwrap();
        let want = h.oracle().unwrap().count_edges();
        assert_eq!(count_labelled_copies(&Host::from_hypergraph(&h), &Pattern::single_edge(2), 1 << 20).unwrap(), want);
    }

    #[test]
    fn partite_triangle_in_complete_tripartite() {
        let host = three_clusters();
        assert_eq!(count_labelled_copies(&host, &Pattern::partite_triangle(), 1000).unwrap(), 8);
        let r = test_h_freeness(&host, &cfg(Pattern::partite_triangle(), 50, 3)).unwrap();
        assert_eq!(r.rejection_rate, 1.0);
    }

    #[test]
    fn budget_is_enforced() {
        let host = three_clusters();
        assert!(matches!(count_labelled_copies(&host, &Pattern::partite_triangle(), 7), Err(Error::Budget { .. })));
    }

    #[test]
    fn free_hosts_always_accept() {
        for host in [split_bipartite(40, 1).unwrap(), grid_unit_distance(6).unwrap()] {
            assert_eq!(count_labelled_copies(&host, &Pattern::triangle(), 1 << 20).unwrap(), 0);
            let r = test_h_freeness(&host, &cfg(Pattern::triangle(), 100, 300)).unwrap();
            assert_eq!(r.acceptance_rate, 1.0);
            assert!(r.verdicts.iter().all(|v| v.injections == 100));
        }
    }

    #[test]
    fn far_hosts_are_certified_and_rejected() {
        for host in [planted_multipartite(100).unwrap(), dense_unit_disk(100, 2).unwrap(), threshold_graph(100, 5).unwrap()] {
            let c = triangle_far_certificate(&host).unwrap();
            assert!(c.certified_eps >= ratio(1, 10), "{}", format_rational(&c.certified_eps));
            let r = test_h_freeness(&host, &cfg(Pattern::triangle(), 60, 30)).unwrap();
            assert!(r.rejection_rate >= 2.0 / 3.0);
            for v in r.verdicts.iter().filter(|v| v.rejected) {
                let w = v.witness.as_ref().unwrap();
                assert!(w[0] != w[1] && w[1] != w[2] && w[0] != w[2]);
            }
        }
    }

    #[test]
    fn config_validation_lists_every_problem() {
        let mut c = cfg(Pattern::triangle(), 0, 2);
        c.eps = int(2);
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("queries") && msg.contains("trials") && msg.contains("eps"));
        assert!(Pattern::new(vec![0, 0], vec![vec![0, 0]]).is_err());
    }

    #[test]
    fn reports_are_seed_deterministic() {
        let host = dense_unit_disk(50, 1).unwrap();
        let a = test_h_freeness(&host, &cfg(Pattern::triangle(), 20, 9)).unwrap();
        let b = test_h_freeness(&host, &cfg(Pattern::triangle(), 20, 9)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn desk_budget_shape() {
        assert_eq!(desk_query_budget(1, 2, 3, 0.5, 1.0), 512);
        assert_eq!(desk_query_budget(1, 1, 3, 1.0, 1e-9), 3);
    }
}
