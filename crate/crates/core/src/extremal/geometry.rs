use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::hypergraph::PointSet;
use crate::rational::{format_rational, lcm_denominators, Rational};

/// Points scaled to a common denominator `q`, so squared distances are integers over `q^2`.
struct IntPoints {
    q: BigInt,
    coords: Vec<Vec<i128>>,
}

impl IntPoints {
    fn new(p: &PointSet) -> Option<Self> {
        let q = lcm_denominators(p.points.iter().flatten());
        let coords = p
            .points
            .iter()
            .map(|pt| pt.iter().map(|x| (x.numer() * (&q / x.denom())).to_i128()).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        // keep squared sums far from overflow
        let max = coords.iter().flatten().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        (max < 1u128 << 40).then_some(IntPoints { q, coords })
    }

    fn sq(&self, i: usize, j: usize) -> i128 {
        self.coords[i].iter().zip(&self.coords[j]).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

fn sq_rational(p: &PointSet, i: usize, j: usize) -> Rational {
    p.points[i].iter().zip(&p.points[j]).fold(Rational::zero(), |acc, (a, b)| {
        let t = a - b;
        acc + &t * &t
    })
}

/// Histogram of squared distances over unordered pairs, keyed exactly.
pub fn distance_histogram(p: &PointSet) -> Vec<(Rational, u64)> {
    let n = p.len();
    let mut out: Vec<(Rational, u64)> = if let Some(ip) = IntPoints::new(p) {
        let mut h: HashMap<i128, u64> = HashMap::new();
        for i in 0..n {
            for j in i + 1..n {
                *h.entry(ip.sq(i, j)).or_default() += 1;
            }
        }
        let q2 = &ip.q * &ip.q;
        h.into_iter().map(|(k, c)| (Rational::new(k.into(), q2.clone()), c)).collect()
    } else {
        let mut h: HashMap<Rational, u64> = HashMap::new();
        for i in 0..n {
            for j in i + 1..n {
                *h.entry(sq_rational(p, i, j)).or_default() += 1;
            }
        }
        h.into_iter().collect()
    };
    out.sort();
    out
}

/// Unordered pairs at squared distance exactly `sq_scale`.
pub fn count_unit_distances(p: &PointSet, sq_scale: &Rational) -> Result<u64> {
    if p.d < 2 {
        return input("unit distances need d >= 2");
    }
    if let Some(ip) = IntPoints::new(p) {
        let target = sq_scale * Rational::from_integer(&ip.q * &ip.q);
        if !target.is_integer() {
            return Ok(0);
        }
        let Some(t) = target.to_integer().to_i128() else { return Ok(0) };
        let n = p.len();
        let mut c = 0;
        for i in 0..n {
            for j in i + 1..n {
                c += (ip.sq(i, j) == t) as u64;
            }
        }
        return Ok(c);
    }
    Ok(count_unit_distances_bruteforce(p, sq_scale))
}

/// Reference count with rational arithmetic throughout.
pub fn count_unit_distances_bruteforce(p: &PointSet, sq_scale: &Rational) -> u64 {
    let n = p.len();
    let mut c = 0;
    for i in 0..n {
        for j in i + 1..n {
            c += (&sq_rational(p, i, j) == sq_scale) as u64;
        }
    }
    c
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSweep {
    /// The most frequent squared distance, smallest on ties.
    pub best_sq: String,
    pub best_count: u64,
    pub distinct_distances: usize,
}

/// Scans every squared distance present in `p` for the most frequent one.
pub fn sweep_unit_distance(p: &PointSet) -> Result<(Rational, DistanceSweep)> {
    if p.d < 2 {
        return input("unit distances need d >= 2");
    }
    let hist = distance_histogram(p);
    let (sq, count) = hist
        .iter()
        .filter(|(s, _)| !s.is_zero())
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .cloned()
        .unwrap_or((Rational::zero(), 0));
    let report = DistanceSweep { best_sq: format_rational(&sq), best_count: count, distinct_distances: hist.len() };
    Ok((sq, report))
}

/// Unordered triples of distinct points with all three squared side lengths equal.
pub fn count_equilateral_triangles(p: &PointSet) -> Result<u64> {
    if p.d != 2 {
        return input("equilateral counting is exact only in the plane");
    }
    let n = p.len();
    let ip = IntPoints::new(p);
    let sq = |i: usize, j: usize| -> Rational {
        match &ip {
            Some(ip) => Rational::from_integer(ip.sq(i, j).into()),
            None => sq_rational(p, i, j),
        }
    };
    // every triangle is found once from each apex
    let mut found = 0u64;
    for z in 0..n {
        let mut by_dist: HashMap<Rational, Vec<usize>> = HashMap::new();
        for x in 0..n {
            if x != z {
                let s = sq(z, x);
                if !s.is_zero() {
                    by_dist.entry(s).or_default().push(x);
                }
            }
        }
        for (s, group) in &by_dist {
            for (a, &x) in group.iter().enumerate() {
                for &y in &group[a + 1..] {
                    if &sq(x, y) == s {
                        found += 1;
                    }
                }
            }
        }
    }
    Ok(found / 3)
}

/// Reference count over all triples with rational arithmetic.
pub fn count_equilateral_bruteforce(p: &PointSet) -> u64 {
    let n = p.len();
    let mut c = 0;
    for i in 0..n {
        for j in i + 1..n {
            let a = sq_rational(p, i, j);
            if a.is_zero() {
                continue;
            }
            for k in j + 1..n {
                if sq_rational(p, j, k) == a && sq_rational(p, i, k) == a {
                    c += 1;
                }
            }
        }
    }
    c
}
