//! Oblivious cell partitions of point sets.
//!
//! A partition depends only on the points and the parameters, never on any
//! edge predicate. In one dimension it is an equitable interval split. In two
//! or more dimensions it comes from repeated simultaneous bisection by
//! polynomials of growing degree; points lying on a cutter are split along a
//! lexicographic order per sign stratum.

mod bisect;
mod crossing;
mod one_d;

pub use bisect::{Normalized, SearchBudget, SideCounts};
pub use crossing::{crossing_stats, CrossingStats};
pub use one_d::{equitable_sizes, partition_1d, split_equitably};

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::hypergraph::PointSet;
use crate::poly::{Polynomial, Sign};
use crate::rational::{format_rational, serde_str, to_f64, Rational};
use crate::util::{binomial, sub_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    #[serde(with = "serde_str")]
    pub a: Rational,
    /// Highest level tag for points on cutters; defaults to the dimension.
    #[serde(default)]
    pub max_level: Option<usize>,
    #[serde(default)]
    pub search: SearchBudget,
}

impl PartitionParams {
    pub fn new(a: Rational) -> Self {
        PartitionParams { a, max_level: None, search: SearchBudget::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.search.seed = seed;
        self
    }

    pub fn ceil_a(&self) -> usize {
        let c = self.a.ceil().to_integer();
        c.to_usize().unwrap_or(usize::MAX)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub level: usize,
    pub signs: Vec<Sign>,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub degree: u32,
    pub groups: usize,
    pub largest_group: usize,
    pub realized_slack: usize,
    pub met: bool,
    pub newly_on_cutter: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub a: String,
    pub points: usize,
    pub cells: usize,
    pub top_cells: usize,
    pub max_cell: usize,
    pub max_top_cell: usize,
    pub total_degree: u32,
    pub rounds: Vec<RoundReport>,
    pub degenerate: bool,
    pub quality_met: bool,
    /// `cells / A^d`
    pub cell_constant: f64,
    /// `max_top_cell * A^d / |P|`
    pub size_constant: f64,
    /// `total_degree / A`
    pub degree_constant: f64,
}

impl PartitionReport {
    pub(crate) fn summarize(
        n: usize,
        d: usize,
        a: &Rational,
        cutters: &[Polynomial],
        cells: &[Cell],
        rounds: Vec<RoundReport>,
        degenerate: bool,
    ) -> Self {
        let af = to_f64(a);
        let ad = af.powi(d as i32);
        let top: Vec<&Cell> = cells.iter().filter(|c| c.level == 0).collect();
        let max_top_cell = top.iter().map(|c| c.members.len()).max().unwrap_or(0);
        let total_degree = cutters.iter().map(Polynomial::degree).sum();
        PartitionReport {
            a: format_rational(a),
            points: n,
            cells: cells.len(),
            top_cells: top.len(),
            max_cell: cells.iter().map(|c| c.members.len()).max().unwrap_or(0),
            max_top_cell,
            total_degree,
            quality_met: rounds.iter().all(|r| r.met),
            rounds,
            degenerate,
            cell_constant: cells.len() as f64 / ad,
            size_constant: if n == 0 { 0.0 } else { max_top_cell as f64 * ad / n as f64 },
            degree_constant: total_degree as f64 / af,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPartition {
    pub dim: usize,
    pub n_points: usize,
    pub cutters: Vec<Polynomial>,
    pub cells: Vec<Cell>,
    pub assignment: Vec<usize>,
    pub report: PartitionReport,
}

#[derive(Serialize)]
struct Dump<'a> {
    cutters: &'a [Polynomial],
    cells: &'a [Cell],
}

impl CellPartition {
    /// Cutters and cells only, in a stable order suitable for diffing.
    pub fn dump_json(&self) -> String {
        serde_json::to_string(&Dump { cutters: &self.cutters, cells: &self.cells })
            .expect("partition dump serializes")
    }

    pub fn parts(&self) -> Vec<Vec<usize>> {
        self.cells.iter().map(|c| c.members.clone()).collect()
    }

    /// Structural checks: coverage, disjointness, assignment and sign-vector shape.
    pub fn check_invariants(&self) -> Result<()> {
        let mut seen = vec![false; self.n_points];
        for (i, c) in self.cells.iter().enumerate() {
            if c.id != i {
                return Err(Error::Internal(format!("cell {i} has id {}", c.id)));
            }
            if c.members.is_empty() {
                return Err(Error::Internal(format!("cell {i} is empty")));
            }
            if c.signs.len() != self.cutters.len() {
                return Err(Error::Internal(format!("cell {i} sign vector has wrong length")));
            }
            if c.level == 0 && c.signs.contains(&0) {
                return Err(Error::Internal(format!("level-0 cell {i} lies on a cutter")));
            }
            if c.level > 0 && !c.signs.contains(&0) {
                return Err(Error::Internal(format!("cell {i} has level {} but no zero sign", c.level)));
            }
            for &m in &c.members {
                if m >= self.n_points || seen[m] {
                    return Err(Error::Internal(format!("point {m} covered twice or out of range")));
                }
                seen[m] = true;
                if self.assignment[m] != i {
                    return Err(Error::Internal(format!("assignment of point {m} disagrees")));
                }
            }
        }
        if let Some(m) = seen.iter().position(|s| !s) {
            return Err(Error::Internal(format!("point {m} is not covered")));
        }
        Ok(())
    }
}

/// Simultaneous bisection of several point sets by one degree-`t` polynomial.
#[derive(Clone, Debug)]
pub struct BisectionResult {
    /// The cut in the original coordinates.
    pub poly: Polynomial,
    pub counts: Vec<SideCounts>,
    pub allowed_slack: Vec<usize>,
    pub realized_slack: usize,
    pub met: bool,
}

pub fn bisect_simultaneously(sets: &[PointSet], t: u32, budget: &SearchBudget) -> Result<BisectionResult> {
    let d = match sets.first() {
        Some(s) => s.d,
        None => return input("need at least one point set"),
    };
    if t == 0 {
        return input("bisection degree must be at least 1");
    }
    if sets.iter().any(|s| s.d != d) {
        return input("all sets must share one dimension");
    }
    let dof = binomial((d + t as usize) as u64, d as u64) - 1;
    if sets.len() as u128 > dof {
        return input(format!("{} sets exceed the {dof} degrees of freedom", sets.len()));
    }
    let all: Vec<Vec<Rational>> = sets.iter().flat_map(|s| s.points.iter().cloned()).collect();
    let norm = Normalized::new(&all, d);
    let mut groups = Vec::new();
    let mut start = 0;
    for s in sets {
        groups.push((start..start + s.len()).collect::<Vec<_>>());
        start += s.len();
    }
    let b = bisect::search(&norm, &groups, t, budget, budget.seed)?;
    Ok(BisectionResult {
        poly: norm.compose(&b.g)?,
        realized_slack: b.realized_slack(),
        counts: b.counts,
        allowed_slack: b.allowed,
        met: b.met,
    })
}

/// Oblivious partition of `p` with parameter `A`.
pub fn build_partition(p: &PointSet, params: &PartitionParams) -> Result<CellPartition> {
    if params.a < Rational::one() {
        return input(format!("A must be at least 1, got {}", format_rational(&params.a)));
    }
    if p.d == 1 {
        let mut c = partition_1d(p, params.ceil_a())?;
        c.report.a = format_rational(&params.a);
        return Ok(c);
    }
    let d = p.d;
    let n = p.len();
    let a_ceil = params.ceil_a();
    let max_level = params.max_level.unwrap_or(d).clamp(1, d);
    let rounds = if params.a.is_one() || n <= 1 {
        0
    } else {
        (d as f64 * to_f64(&params.a).log2() - 1e-9).ceil().max(1.0) as usize
    };

    let mut cutters: Vec<Polynomial> = Vec::new();
    let mut signs: Vec<Vec<Sign>> = vec![Vec::new(); n];
    let mut reports = Vec::new();
    let mut degenerate = false;

    if rounds > 0 {
        if let Some(h) = affine_hull_normal(p)? {
            // every point vanishes on h: the whole set moves to level 1
            degenerate = true;
            for s in signs.iter_mut() {
                s.push(0);
            }
            cutters.push(h);
        }
    }

    if rounds > 0 && !degenerate {
        let norm = Normalized::new(&p.points, d);
        for j in 1..=rounds {
            let groups = splittable_groups(p, &signs);
            if groups.is_empty() {
                break;
            }
            let mut t = ((j + 1) as f64 / d as f64).exp2();
            t = (t - 1e-9).ceil();
            let mut t = t as u32;
            while binomial((d + t as usize) as u64, d as u64) - 1 < groups.len() as u128 {
                t += 1;
            }
            let b = bisect::search(&norm, &groups, t, &params.search, sub_seed(params.search.seed, j as u64))?;
            let all = bisect::exact_signs(&norm, &b.g, 0..n)?;
            let before = signs.iter().filter(|s| s.contains(&0)).count();
            for (s, x) in signs.iter_mut().zip(all) {
                s.push(x);
            }
            let after = signs.iter().filter(|s| s.contains(&0)).count();
            reports.push(RoundReport {
                degree: t,
                groups: groups.len(),
                largest_group: groups.iter().map(Vec::len).max().unwrap_or(0),
                realized_slack: b.realized_slack(),
                met: b.met,
                newly_on_cutter: after - before,
            });
            cutters.push(norm.compose(&b.g)?);
        }
    }

    // sign classes, then strata of points on cutters split along the lexicographic order
    let mut classes: BTreeMap<Vec<Sign>, Vec<usize>> = BTreeMap::new();
    for (i, s) in signs.iter().enumerate() {
        classes.entry(s.clone()).or_default().push(i);
    }
    let mut cells = Vec::new();
    for (key, members) in classes.iter().filter(|(k, _)| !k.contains(&0)) {
        cells.push(Cell { id: cells.len(), level: 0, signs: key.clone(), members: members.clone() });
    }
    for (key, members) in classes.iter().filter(|(k, _)| k.contains(&0)) {
        let zeros = key.iter().filter(|&&s| s == 0).count();
        let mut ordered = members.clone();
        ordered.sort_by(|&i, &j| p.points[i].cmp(&p.points[j]).then(i.cmp(&j)));
        for mut part in split_equitably(&ordered, a_ceil.max(1)) {
            part.sort_unstable();
            cells.push(Cell { id: cells.len(), level: zeros.min(max_level), signs: key.clone(), members: part });
        }
    }
    let mut assignment = vec![0; n];
    for c in &cells {
        for &m in &c.members {
            assignment[m] = c.id;
        }
    }
    let report = PartitionReport::summarize(n, d, &params.a, &cutters, &cells, reports, degenerate);
    Ok(CellPartition { dim: d, n_points: n, cutters, cells, assignment, report })
}

/// Current sign classes with at least two distinct points and no zero sign.
fn splittable_groups(p: &PointSet, signs: &[Vec<Sign>]) -> Vec<Vec<usize>> {
    let mut classes: BTreeMap<&[Sign], Vec<usize>> = BTreeMap::new();
    for (i, s) in signs.iter().enumerate() {
        if !s.contains(&0) {
            classes.entry(s.as_slice()).or_default().push(i);
        }
    }
    classes
        .into_values()
        .filter(|g| g.len() >= 2 && g.iter().any(|&i| p.points[i] != p.points[g[0]]))
        .collect()
}

/// If all points lie in one affine hyperplane, returns a linear polynomial vanishing on it.
pub fn affine_hull_normal(p: &PointSet) -> Result<Option<Polynomial>> {
    let d = p.d;
    if p.is_empty() {
        return Ok(None);
    }
    let origin = &p.points[0];
    // reduced row echelon basis of the differences
    let mut basis: Vec<(usize, Vec<Rational>)> = Vec::new();
    for q in &p.points[1..] {
        let mut v: Vec<Rational> = q.iter().zip(origin).map(|(a, b)| a - b).collect();
        for (piv, row) in &basis {
            if !v[*piv].is_zero() {
                let f = v[*piv].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(piv) = v.iter().position(|x| !x.is_zero()) {
            let inv = Rational::one() / &v[piv];
            v.iter_mut().for_each(|x| *x *= &inv);
            for (_, row) in basis.iter_mut() {
                if !row[piv].is_zero() {
                    let f = row[piv].clone();
                    for (x, y) in row.iter_mut().zip(&v) {
                        *x -= &f * y;
                    }
                }
            }
            basis.push((piv, v));
            if basis.len() == d {
                return Ok(None);
            }
        }
    }
    // a free column gives a normal vector orthogonal to every basis row
    let pivots: Vec<usize> = basis.iter().map(|(p, _)| *p).collect();
    let free = (0..d).find(|j| !pivots.contains(j)).unwrap();
    let mut normal = vec![Rational::zero(); d];
    normal[free] = Rational::one();
    for (piv, row) in &basis {
        normal[*piv] = -row[free].clone();
    }
    // clear denominators for a tidy integer normal
    let l = normal.iter().fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let normal: Vec<Rational> = normal.iter().map(|x| x * Rational::from_integer(l.clone())).collect();
    let mut h = Polynomial::zero(d);
    let mut c = Rational::zero();
    for j in 0..d {
        h = &h + &Polynomial::var(d, j).scale(&normal[j]);
        c += &normal[j] * &origin[j];
    }
    Ok(Some(&h - &Polynomial::constant(d, c)))
}

#[cfg(test)]
mod tests;
