//! Homogeneous partitions: exact error measurement and the regularization driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::hypergraph::{EdgeOracle, PartiteHypergraph, PointSet};
use crate::partition::{build_partition, equitable_sizes, PartitionParams, SearchBudget};
use crate::rational::{format_rational, serde_str, to_f64, Rational};
use crate::util::{for_each_tuple, product};

/// One partition per vertex set, each a list of parts holding point indices.
pub type VertexPartition = Vec<Vec<usize>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TupleClass {
    Complete,
    Empty,
    Inhomogeneous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Homogeneity {
    #[serde(with = "serde_str")]
    pub error: Rational,
    pub tuples: u128,
    pub complete: u128,
    pub empty: u128,
    pub inhomogeneous: u128,
    /// Only tuples of pairwise distinct vertices were inspected.
    pub distinct: bool,
}

/// Which member tuples count when classifying a part tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TupleMode {
    All,
    /// Skip member tuples that repeat a vertex; used when all parts share one point set.
    Distinct,
    /// `Distinct` when every part holds the same points, otherwise `All`.
    Auto,
}

impl TupleMode {
    fn resolve(self, h: &PartiteHypergraph) -> bool {
        match self {
            TupleMode::All => false,
            TupleMode::Distinct => true,
            TupleMode::Auto => h.has_equal_parts(),
        }
    }
}

fn check_partitions(h: &PartiteHypergraph, parts: &[VertexPartition]) -> Result<()> {
    if parts.len() != h.k() {
        return Err(Error::Arity { expected: h.k(), got: parts.len() });
    }
    for (i, (pi, p)) in parts.iter().zip(&h.parts).enumerate() {
        let mut seen = vec![false; p.len()];
        for part in pi {
            if part.is_empty() {
                return input(format!("partition {i} has an empty part"));
            }
            for &m in part {
                if m >= p.len() || seen[m] {
                    return input(format!("partition {i} repeats or overruns vertex {m}"));
                }
                seen[m] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return input(format!("partition {i} does not cover its point set"));
        }
    }
    Ok(())
}

fn classify(oracle: &EdgeOracle, members: &[&[usize]], distinct: bool, early_exit: bool) -> TupleClass {
    let sizes: Vec<usize> = members.iter().map(|m| m.len()).collect();
    let k = members.len();
    let mut t = vec![0; k];
    let (mut edge, mut non) = (false, false);
    for_each_tuple(&sizes, |idx| {
        for i in 0..k {
            t[i] = members[i][idx[i]];
        }
        if distinct && (1..k).any(|i| t[..i].contains(&t[i])) {
            return true;
        }
        if oracle.is_edge(&t) {
            edge = true;
        } else {
            non = true;
        }
        !(early_exit && edge && non)
    });
    match (edge, non) {
        (true, true) => TupleClass::Inhomogeneous,
        (true, false) => TupleClass::Complete,
        // no inspected tuple at all counts as empty
        _ => TupleClass::Empty,
    }
}

fn measure(h: &PartiteHypergraph, parts: &[VertexPartition], mode: TupleMode, early_exit: bool) -> Result<Homogeneity> {
    check_partitions(h, parts)?;
    let oracle = h.oracle()?;
    let distinct = mode.resolve(h);
    let counts: Vec<usize> = parts.iter().map(Vec::len).collect();
    let k = h.k();
    // (complete, empty, inhomogeneous, inhomogeneous mass) per first part
    let rows: Vec<[u128; 4]> = (0..counts[0])
        .into_par_iter()
        .map(|p0| {
            let mut acc = [0u128; 4];
            let mut cur = vec![p0; k];
            for_each_tuple(&counts[1..], |rest| {
                cur[1..].copy_from_slice(rest);
                let members: Vec<&[usize]> = (0..k).map(|i| parts[i][cur[i]].as_slice()).collect();
                match classify(&oracle, &members, distinct, early_exit) {
                    TupleClass::Complete => acc[0] += 1,
                    TupleClass::Empty => acc[1] += 1,
                    TupleClass::Inhomogeneous => {
                        acc[2] += 1;
                        acc[3] += members.iter().map(|m| m.len() as u128).product::<u128>();
                    }
                }
                true
            });
            acc
        })
        .collect();
    let sum = |j: usize| rows.iter().map(|r| r[j]).sum::<u128>();
    let total = product(&h.sizes());
    let error = if total == 0 { Rational::from_integer(0.into()) } else { Rational::new(sum(3).into(), total.into()) };
    Ok(Homogeneity {
        error,
        tuples: product(&counts),
        complete: sum(0),
        empty: sum(1),
        inhomogeneous: sum(2),
        distinct,
    })
}

/// Exact vertex mass of the part tuples that are neither complete nor empty.
pub fn homogeneity_error(h: &PartiteHypergraph, parts: &[VertexPartition], mode: TupleMode) -> Result<Homogeneity> {
    measure(h, parts, mode, true)
}

/// Same quantity without early exit; the reference for tests.
pub fn homogeneity_error_naive(h: &PartiteHypergraph, parts: &[VertexPartition], mode: TupleMode) -> Result<Homogeneity> {
    measure(h, parts, mode, false)
}

/// Class of every part tuple, last index fastest.
pub fn tuple_classes(h: &PartiteHypergraph, parts: &[VertexPartition], mode: TupleMode) -> Result<Vec<TupleClass>> {
    check_partitions(h, parts)?;
    let oracle = h.oracle()?;
    let distinct = mode.resolve(h);
    let counts: Vec<usize> = parts.iter().map(Vec::len).collect();
    let k = h.k();
    let rows: Vec<Vec<TupleClass>> = (0..counts[0])
        .into_par_iter()
        .map(|p0| {
            let mut out = Vec::new();
            let mut cur = vec![p0; k];
            for_each_tuple(&counts[1..], |rest| {
                cur[1..].copy_from_slice(rest);
                let members: Vec<&[usize]> = (0..k).map(|i| parts[i][cur[i]].as_slice()).collect();
                out.push(classify(&oracle, &members, distinct, true));
                true
            });
            out
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// How the partition parameter is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum ARule {
    Explicit {
        #[serde(with = "serde_str")]
        a: Rational,
    },
    /// `A = ceil(c * D / eps)`.
    Auto { c: f64 },
}

impl Default for ARule {
    fn default() -> Self {
        ARule::Auto { c: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityRequest {
    #[serde(with = "serde_str")]
    pub eps: Rational,
    #[serde(default)]
    pub a_rule: ARule,
    #[serde(default)]
    pub equitable: bool,
    #[serde(default)]
    pub search: SearchBudget,
    /// Defaults to `All`: parts are treated as disjoint vertex sets even when
    /// their points coincide.
    #[serde(default = "all_mode")]
    pub mode: TupleMode,
}

fn all_mode() -> TupleMode {
    TupleMode::All
}

impl RegularityRequest {
    pub fn new(eps: Rational) -> Self {
        RegularityRequest {
            eps,
            a_rule: ARule::default(),
            equitable: false,
            search: SearchBudget::default(),
            mode: TupleMode::All,
        }
    }

    /// The partition parameter for a predicate of total degree `big_d`.
    pub fn parameter(&self, big_d: u32) -> Rational {
        let one = Rational::from_integer(1.into());
        if self.eps >= one {
            return one;
        }
        match &self.a_rule {
            ARule::Explicit { a } => a.clone(),
            ARule::Auto { c } => {
                let a = (c * big_d.max(1) as f64 / to_f64(&self.eps)).ceil().max(1.0);
                Rational::from_integer((a as i64).into())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub a: String,
    pub partitions: Vec<VertexPartition>,
    pub part_counts: Vec<usize>,
    pub homogeneity: Homogeneity,
    /// Stragglers created by the equitable refinement, per vertex set.
    pub bad_parts: Vec<usize>,
    /// `max |Pi_i| / (D/eps)^d`
    pub bound_constant: f64,
}

impl RegularityReport {
    /// `set,size,count` rows of the part-size histogram.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("set,size,count\n");
        for (i, pi) in self.partitions.iter().enumerate() {
            let mut hist = std::collections::BTreeMap::new();
            for p in pi {
                *hist.entry(p.len()).or_insert(0usize) += 1;
            }
            for (s, c) in hist {
                out.push_str(&format!("{i},{s},{c}\n"));
            }
        }
        out
    }
}

/// Splits a list of contiguous parts into `k` equitable intervals of the
/// concatenated order. Returns the new parts and how many of them straddle
/// an old boundary.
pub fn equitable_refine(parts: &[Vec<usize>], k: usize) -> (VertexPartition, usize) {
    let order: Vec<usize> = parts.iter().flatten().copied().collect();
    let mut owner = Vec::with_capacity(order.len());
    for (j, p) in parts.iter().enumerate() {
        owner.extend(std::iter::repeat_n(j, p.len()));
    }
    let mut out = Vec::new();
    let mut bad = 0;
    let mut start = 0;
    for s in equitable_sizes(order.len(), k.max(1)) {
        if owner[start] != owner[start + s - 1] {
            bad += 1;
        }
        out.push(order[start..start + s].to_vec());
        start += s;
    }
    (out, bad)
}

/// Oblivious partition of one point set into parts listed in cell order. Once `ceil(A)^d >= |P|` the size bound
/// admits singletons, which are returned without running the search.
pub fn oblivious_parts(p: &PointSet, a: &Rational, search: &SearchBudget) -> Result<VertexPartition> {
    let ceil_a = a.ceil().to_integer();
    if p.d >= 2 && num_traits::pow(ceil_a, p.d) >= p.len().into() {
        return Ok((0..p.len()).map(|i| vec![i]).collect());
    }
    let params = PartitionParams { a: a.clone(), max_level: None, search: search.clone() };
    Ok(build_partition(p, &params)?.parts())
}

pub fn regularize(h: &PartiteHypergraph, req: &RegularityRequest) -> Result<RegularityReport> {
    if req.eps <= Rational::from_integer(0.into()) {
        return input("eps must be positive");
    }
    let a = req.parameter(h.total_degree());
    let k = h.k();
    let mut partitions = Vec::with_capacity(k);
    let mut bad_parts = Vec::with_capacity(k);
    for p in &h.parts {
        let mut pi = oblivious_parts(p, &a, &req.search)?;
        let mut bad = 0;
        let sizes = pi.iter().map(Vec::len);
        let spread = sizes.clone().max().unwrap_or(0) - sizes.min().unwrap_or(0);
        // already equitable partitions (all of d = 1) are kept as they are
        if req.equitable && spread > 1 {
            let eps = to_f64(&req.eps);
            let target = (4.0 * k as f64 * pi.len() as f64 / eps).ceil() as usize;
            let (refined, b) = equitable_refine(&pi, target);
            pi = refined;
            bad = b;
        }
        partitions.push(pi);
        bad_parts.push(bad);
    }
    let homogeneity = homogeneity_error(h, &partitions, req.mode)?;
    let part_counts: Vec<usize> = partitions.iter().map(Vec::len).collect();
    let scale = (h.total_degree().max(1) as f64 / to_f64(&req.eps)).powi(h.d() as i32);
    Ok(RegularityReport {
        a: format_rational(&a),
        bound_constant: *part_counts.iter().max().unwrap_or(&0) as f64 / scale,
        part_counts,
        partitions,
        homogeneity,
        bad_parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::families::{grid, random_predicate_instance, StripesConfig};
    use crate::hypergraph::{Formula, SignPredicate};
    use crate::poly::Polynomial;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn singletons(n: usize) -> VertexPartition {
        (0..n).map(|i| vec![i]).collect()
    }

    fn whole(n: usize) -> VertexPartition {
        vec![(0..n).collect()]
    }

    #[test]
    fn complete_predicate_is_homogeneous() {
        let g = grid(1, 5).unwrap();
        let h = PartiteHypergraph::new(g.parts.clone(), SignPredicate::new(vec![], Formula::truth()).unwrap()).unwrap();
        let r = homogeneity_error(&h, &[whole(5), vec![vec![0, 1], vec![2, 3, 4]]], TupleMode::All).unwrap();
        assert_eq!(r.error, int(0));
        assert_eq!(r.complete, 2);
    }

    #[test]
    fn singletons_are_homogeneous() {
        let h = grid(2, 3).unwrap();
        let r = homogeneity_error(&h, &[singletons(9), singletons(9)], TupleMode::All).unwrap();
        assert_eq!(r.error, int(0));
        assert_eq!(r.tuples, 81);
    }

    #[test]
    fn grid_one_part_each() {
        let h = grid(1, 2).unwrap();
        let r = homogeneity_error(&h, &[whole(2), whole(2)], TupleMode::All).unwrap();
        assert_eq!(r.error, int(1));
        assert_eq!(r.inhomogeneous, 1);
    }

    #[test]
    fn mismatched_partition_rejected() {
        let h = grid(1, 3).unwrap();
        assert!(homogeneity_error(&h, &[whole(3)], TupleMode::All).is_err());
        assert!(homogeneity_error(&h, &[whole(3), vec![vec![0, 1]]], TupleMode::All).is_err());
        assert!(homogeneity_error(&h, &[whole(3), vec![vec![0, 1], vec![1, 2]]], TupleMode::All).is_err());
    }

    #[test]
    fn distinct_mode_ignores_loops() {
        // edges iff x = y: with distinct vertices only, every tuple is empty
        let h = grid(1, 4).unwrap();
        let all = homogeneity_error(&h, &[whole(4), whole(4)], TupleMode::All).unwrap();
        let dis = homogeneity_error(&h, &[whole(4), whole(4)], TupleMode::Auto).unwrap();
        assert_eq!(all.error, int(1));
        assert_eq!(dis.error, int(0));
        assert!(dis.distinct);
    }

    #[test]
    fn refine_examples() {
        let (p, bad) = equitable_refine(&[vec![0, 1, 2, 3], vec![4, 5, 6, 7]], 4);
        assert_eq!(p.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 2, 2, 2]);
        assert_eq!(bad, 0);
        let (p, bad) = equitable_refine(&[vec![0, 1, 2, 3, 4], vec![5, 6, 7]], 4);
        assert_eq!(p.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 2, 2, 2]);
        assert_eq!(bad, 1);
        let (p, bad) = equitable_refine(&[vec![0, 1, 2], vec![3]], 10);
        assert_eq!(p.len(), 4);
        assert_eq!(bad, 0);
    }

    #[test]
    fn eps_one_is_trivial() {
        let h = StripesConfig::new(2, 1, 50).unwrap().hypergraph().unwrap();
        let r = regularize(&h, &RegularityRequest::new(int(1))).unwrap();
        assert_eq!(r.part_counts, vec![1, 1]);
        assert!(r.homogeneity.error <= int(1));
    }

    #[test]
    fn stripes_quarter() {
        let h = StripesConfig::new(2, 1, 400).unwrap().hypergraph().unwrap();
        let mut req = RegularityRequest::new(ratio(1, 4));
        req.a_rule = ARule::Auto { c: 4.0 };
        let r = regularize(&h, &req).unwrap();
        assert!(r.homogeneity.error <= ratio(1, 4), "{}", r.homogeneity.error);
        assert_eq!(r.part_counts, vec![32, 32]);
    }

    #[test]
    fn equitable_sizes_within_one() {
        let h = random_predicate_instance(1, 2, 60, 64, 2, 5).unwrap();
        let mut req = RegularityRequest::new(ratio(1, 2));
        req.equitable = true;
        req.a_rule = ARule::Explicit { a: int(3) };
        let r = regularize(&h, &req).unwrap();
        for pi in &r.partitions {
            let s: Vec<usize> = pi.iter().map(Vec::len).collect();
            assert!(s.iter().max().unwrap() - s.iter().min().unwrap() <= 1);
        }
        assert!(r.bad_parts.iter().all(|&b| b <= 9));
    }

    #[test]
    fn grid_lower_bound() {
        // any partition with error e needs at least (2e)^-d parts per side
        for (d, m) in [(1usize, 6usize), (2, 5)] {
            let h = grid(d, m).unwrap();
            for a in 1..=4 {
                let req = RegularityRequest { a_rule: ARule::Explicit { a: int(a) }, ..RegularityRequest::new(ratio(1, 2)) };
                let r = regularize(&h, &req).unwrap();
                let e = to_f64(&r.homogeneity.error);
                if e > 0.0 {
                    let need = (2.0 * e).powi(-(d as i32));
                    for &k in &r.part_counts {
                        assert!(k as f64 >= need - 1e-9, "d={d} a={a} e={e} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn oblivious_across_predicates() {
        let h1 = random_predicate_instance(2, 2, 40, 32, 2, 11).unwrap();
        let mut h2 = h1.clone();
        let x = Polynomial::var(4, 0);
        h2.predicate = SignPredicate::new(vec![&x * &x - Polynomial::var(4, 3)], Formula::atom(0, crate::hypergraph::SignSet::POS)).unwrap();
        let req = RegularityRequest { a_rule: ARule::Explicit { a: int(3) }, ..RegularityRequest::new(ratio(1, 3)) };
        assert_eq!(regularize(&h1, &req).unwrap().partitions, regularize(&h2, &req).unwrap().partitions);
    }

    fn random_partition(n: usize, parts: usize, seed: u64) -> VertexPartition {
        use rand::Rng;
        let mut r = crate::util::rng(seed);
        let mut out = vec![Vec::new(); parts];
        for i in 0..n {
            out[if i < parts { i } else { r.gen_range(0..parts) }].push(i);
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn early_exit_matches_naive(seed in 0u64..500, a in 1usize..6, b in 1usize..6) {
            let h = random_predicate_instance(1, 2, 24, 64, 3, seed).unwrap();
            let parts = [random_partition(24, a, seed), random_partition(24, b, seed + 1)];
            let fast = homogeneity_error(&h, &parts, TupleMode::All).unwrap();
            let slow = homogeneity_error_naive(&h, &parts, TupleMode::All).unwrap();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn refinement_never_hurts(seed in 0u64..500, a in 1usize..5) {
            let h = random_predicate_instance(2, 2, 20, 16, 2, seed).unwrap();
            let coarse = [random_partition(20, a, seed), random_partition(20, a, seed + 7)];
            // split every part of the first partition in two
            let mut fine0 = Vec::new();
            for p in &coarse[0] {
                let (l, r) = p.split_at(p.len().div_ceil(2));
                fine0.push(l.to_vec());
                if !r.is_empty() {
                    fine0.push(r.to_vec());
                }
            }
            let e1 = homogeneity_error(&h, &coarse, TupleMode::All).unwrap().error;
            let e2 = homogeneity_error(&h, &[fine0, coarse[1].clone()], TupleMode::All).unwrap().error;
            prop_assert!(e2 <= e1);
        }
    }
}
