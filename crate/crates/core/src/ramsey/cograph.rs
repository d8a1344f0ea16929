use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{turan_extract, TuranConfig};
use crate::hypergraph::{EdgeOracle, Formula, PartiteHypergraph, SignPredicate};
use crate::rational::ratio;
use crate::util::{rng, sub_seed};

/// Cotree over vertex indices of the host graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Cotree {
    Leaf { v: usize },
    Union { children: Vec<Cotree> },
    Join { children: Vec<Cotree> },
}

impl Cotree {
    pub fn leaf(v: usize) -> Self {
        Cotree::Leaf { v }
    }

    pub fn union(children: Vec<Cotree>) -> Self {
        Cotree::Union { children }
    }

    pub fn join(children: Vec<Cotree>) -> Self {
        Cotree::Join { children }
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<usize>) {
        match self {
            Cotree::Leaf { v } => out.push(*v),
            Cotree::Union { children } | Cotree::Join { children } => children.iter().for_each(|c| c.collect(out)),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Cotree::Leaf { .. } => 1,
            Cotree::Union { children } | Cotree::Join { children } => children.iter().map(Cotree::len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f(u, v, adjacent)` for every leaf pair, adjacency read off the
    /// lowest common ancestor. Stops at the first `false`.
    fn for_each_pair(&self, f: &mut impl FnMut(usize, usize, bool) -> bool) -> bool {
        let (children, join) = match self {
            Cotree::Leaf { .. } => return true,
            Cotree::Union { children } => (children, false),
            Cotree::Join { children } => (children, true),
        };
        let sets: Vec<Vec<usize>> = children.iter().map(Cotree::leaves).collect();
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                for &u in &sets[a] {
                    for &v in &sets[b] {
                        if !f(u, v, join) {
                            return false;
                        }
                    }
                }
            }
        }
        children.iter().all(|c| c.for_each_pair(f))
    }

    /// A maximum clique and a maximum independent set of the cograph.
    pub fn max_clique_and_independent(&self) -> (Vec<usize>, Vec<usize>) {
        match self {
            Cotree::Leaf { v } => (vec![*v], vec![*v]),
            Cotree::Union { children } | Cotree::Join { children } => {
                let parts: Vec<_> = children.iter().map(Cotree::max_clique_and_independent).collect();
                let max_of = |sel: &dyn Fn(&(Vec<usize>, Vec<usize>)) -> &Vec<usize>| {
                    // first maximum, so results do not depend on iterator tie-breaking
                    parts.iter().map(sel).fold(&Vec::new(), |a, b| if b.len() > a.len() { b } else { a }).clone()
                };
                let concat = |sel: &dyn Fn(&(Vec<usize>, Vec<usize>)) -> &Vec<usize>| {
                    parts.iter().flat_map(sel).copied().collect::<Vec<usize>>()
                };
                if matches!(self, Cotree::Join { .. }) {
                    (concat(&|p| &p.0), max_of(&|p| &p.1))
                } else {
                    (max_of(&|p| &p.0), concat(&|p| &p.1))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DenseSide {
    /// `S x T` is complete in the graph: the pieces are joined.
    Graph,
    /// `S x T` is empty in the graph: the pieces are united.
    Complement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CographStep {
    pub depth: usize,
    pub size: usize,
    pub p: usize,
    pub q: usize,
    pub side: DenseSide,
    pub s: usize,
    pub t: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CographCertificate {
    /// Leaves of the cotree in order, as indices into the host point set.
    pub vertices: Vec<usize>,
    pub cotree: Cotree,
    pub trace: Vec<CographStep>,
}

impl CographCertificate {
    pub fn from_cotree(cotree: Cotree) -> Self {
        CographCertificate { vertices: cotree.leaves(), cotree, trace: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Compares the cotree adjacency with `adj` on every pair; returns the number of mismatches.
    pub fn mismatches(&self, adj: impl Fn(usize, usize) -> bool) -> Result<u64> {
        let mut seen = self.vertices.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input("cotree repeats a vertex".into()));
        }
        if self.cotree.leaves() != self.vertices {
            return Err(Error::Input("vertex list disagrees with cotree leaves".into()));
        }
        let mut bad = 0;
        self.cotree.for_each_pair(&mut |u, v, want| {
            bad += (adj(u, v) != want) as u64;
            true
        });
        Ok(bad)
    }

    /// Checks every pair and, as a second line of defence, `samples` random
    /// 4-subsets for an induced path on four vertices.
    pub fn verify(&self, adj: impl Fn(usize, usize) -> bool, samples: usize, seed: u64) -> Result<()> {
        let bad = self.mismatches(&adj)?;
        if bad > 0 {
            return Err(Error::Internal(format!("cograph certificate fails on {bad} pairs")));
        }
        if self.len() >= 4 {
            let mut r = rng(seed);
            for _ in 0..samples {
                let q: Vec<usize> = self.vertices.choose_multiple(&mut r, 4).copied().collect();
                if induces_p4(&q, &adj) {
                    return Err(Error::Internal(format!("induced P4 on {q:?}")));
                }
            }
        }
        Ok(())
    }
}

fn induces_p4(q: &[usize], adj: &impl Fn(usize, usize) -> bool) -> bool {
    let mut deg = [0usize; 4];
    let mut edges = 0;
    for a in 0..4 {
        for b in a + 1..4 {
            if adj(q[a], q[b]) {
                deg[a] += 1;
                deg[b] += 1;
                edges += 1;
            }
        }
    }
    let mut d = deg;
    d.sort_unstable();
    // three edges with degrees 1,1,2,2 is exactly P4
    edges == 3 && d == [1, 1, 2, 2]
}

/// Symmetric graph given by a 2-uniform hypergraph whose parts coincide.
pub(crate) struct SymmetricGraph {
    pub oracle: EdgeOracle,
}

impl SymmetricGraph {
    pub fn new(h: &PartiteHypergraph) -> Result<Self> {
        if h.k() != 2 || !h.has_equal_parts() {
            return Err(Error::Precondition("need a graph with both parts identical".into()));
        }
        let oracle = h.oracle()?;
        let n = h.parts[0].len();
        for u in 0..n {
            for v in u + 1..n {
                if oracle.is_edge(&[u, v]) != oracle.is_edge(&[v, u]) {
                    return Err(Error::Precondition(format!("predicate is not symmetric on ({u}, {v})")));
                }
            }
        }
        Ok(SymmetricGraph { oracle })
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        u != v && self.oracle.is_edge(&[u, v])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CographConfig {
    #[serde(default)]
    pub turan: TuranConfig,
    /// Random 4-subsets checked for an induced path after the pair check.
    pub p4_samples: usize,
    pub seed: u64,
}

impl Default for CographConfig {
    fn default() -> Self {
        CographConfig { turan: TuranConfig::default(), p4_samples: 2000, seed: 0 }
    }
}

/// Builds a cograph on a vertex subset by bipartitioning, extracting a
/// homogeneous product with eps = 1/2 and recursing on both sides.
pub fn extract_cograph(h: &PartiteHypergraph, cfg: &CographConfig) -> Result<CographCertificate> {
    let g = SymmetricGraph::new(h)?;
    let n = h.parts[0].len();
    let complement = SignPredicate::new(h.predicate.polys.clone(), Formula::not(h.predicate.formula.clone()))?;
    let mut trace = Vec::new();
    let all: Vec<usize> = (0..n).collect();
    let cotree = build(h, &g, &complement, &all, 0, cfg, &mut trace)?;
    let cert = CographCertificate { vertices: cotree.leaves(), cotree, trace };
    cert.verify(|u, v| g.adjacent(u, v), cfg.p4_samples, sub_seed(cfg.seed, 4))?;
    Ok(cert)
}

fn build(
    h: &PartiteHypergraph,
    g: &SymmetricGraph,
    complement: &SignPredicate,
    vs: &[usize],
    depth: usize,
    cfg: &CographConfig,
    trace: &mut Vec<CographStep>,
) -> Result<Cotree> {
    match vs.len() {
        0 => return Err(Error::Internal("empty vertex set in cograph recursion".into())),
        1 => return Ok(Cotree::leaf(vs[0])),
        _ => {}
    }
    let (p, q) = vs.split_at(vs.len() / 2);
    let edges: usize = p.iter().map(|&u| q.iter().filter(|&&v| g.adjacent(u, v)).count()).sum();
    // ties go to the graph side
    let side = if 2 * edges >= p.len() * q.len() { DenseSide::Graph } else { DenseSide::Complement };
    let pred = match side {
        DenseSide::Graph => h.predicate.clone(),
        DenseSide::Complement => complement.clone(),
    };
    let pts = &h.parts[0];
    let bip = PartiteHypergraph::new(vec![pts.subset(p), pts.subset(q)], pred)?;
    let r = turan_extract(&bip, &ratio(1, 2), 1, &cfg.turan)?;
    let s: Vec<usize> = r.s[0].iter().map(|&i| p[i]).collect();
    let t: Vec<usize> = r.t.iter().map(|row| q[row[0]]).collect();
    trace.push(CographStep { depth, size: vs.len(), p: p.len(), q: q.len(), side, s: s.len(), t: t.len() });
    let left = build(h, g, complement, &s, depth + 1, cfg, trace)?;
    let right = build(h, g, complement, &t, depth + 1, cfg, trace)?;
    Ok(match side {
        DenseSide::Graph => Cotree::join(vec![left, right]),
        DenseSide::Complement => Cotree::union(vec![left, right]),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Clique,
    Independent,
}

/// The larger of a maximum clique and a maximum independent set of the
/// cograph, checked pair by pair against `adj`. Cliques win ties.
pub fn clique_or_is_from_cograph(
    cert: &CographCertificate,
    adj: impl Fn(usize, usize) -> bool,
) -> Result<(SetKind, Vec<usize>)> {
    let bad = cert.mismatches(&adj)?;
    if bad > 0 {
        return Err(Error::Input(format!("certificate is invalid on {bad} pairs")));
    }
    let (clique, indep) = cert.cotree.max_clique_and_independent();
    let (kind, mut set) =
        if clique.len() >= indep.len() { (SetKind::Clique, clique) } else { (SetKind::Independent, indep) };
    set.sort_unstable();
    let want = kind == SetKind::Clique;
    for (a, &u) in set.iter().enumerate() {
        for &v in &set[a + 1..] {
            if adj(u, v) != want {
                return Err(Error::Internal(format!("returned set fails on pair ({u}, {v})")));
            }
        }
    }
    let need = (cert.len() as f64).sqrt().ceil() as usize;
    if set.len() < need {
        return Err(Error::Internal(format!("set of size {} is below sqrt bound {need}", set.len())));
    }
    Ok((kind, set))
}

/// Convenience wrapper reading adjacency from a symmetric graph.
pub fn clique_or_is_in_graph(h: &PartiteHypergraph, cert: &CographCertificate) -> Result<(SetKind, Vec<usize>)> {
    let g = SymmetricGraph::new(h)?;
    clique_or_is_from_cograph(cert, |u, v| g.adjacent(u, v))
}
