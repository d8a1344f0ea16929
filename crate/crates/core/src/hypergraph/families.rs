//! Generators for the named instance families.

use num_traits::One;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{blowup, Formula, PartiteHypergraph, PointSet, SignPredicate, SignSet};
use crate::error::{input, Result};
use crate::poly::Polynomial;
use crate::rational::{int, ratio, serde_str, Rational};
use crate::util::rng;

/// Where the points of a single-point-set family come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointSource {
    /// `{1..n}^d`.
    Grid { n: usize, d: usize },
    /// `count` distinct points with coordinates `j / denom`, `0 <= j < denom`.
    Random { count: usize, d: usize, denom: i64, seed: u64 },
    Explicit { set: PointSet },
}

impl PointSource {
    pub fn build(&self) -> Result<PointSet> {
        match self {
            PointSource::Grid { n, d } => grid_points(*d, *n, 1),
            PointSource::Random { count, d, denom, seed } => {
                random_points(*count, *d, *denom, *seed)
            }
            PointSource::Explicit { set } => Ok(set.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointLineLayout {
    /// Points `[s] x [2st]`, lines `y = mx + b` with `m in [t]`, `b in [st]`.
    Lattice { s: usize, t: usize },
    /// Random points, lines with random rational slopes (never vertical).
    Random { points: usize, lines: usize, denom: i64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Grid {
        d: usize,
        m: usize,
    },
    Stripes {
        #[serde(rename = "D")]
        big_d: usize,
        d: usize,
        m: usize,
        #[serde(default)]
        symmetric: bool,
    },
    UnitDistance {
        points: PointSource,
        #[serde(with = "serde_str", default = "Rational::one")]
        sq_scale: Rational,
    },
    PointLine {
        layout: PointLineLayout,
    },
    Equilateral {
        points: PointSource,
    },
    Blowup {
        t: usize,
        k: usize,
        r: usize,
        seed: u64,
    },
    RandomPoints {
        d: usize,
        k: usize,
        n: usize,
        denom: i64,
        degree: u32,
        seed: u64,
    },
}

pub fn generate(family: &Family) -> Result<PartiteHypergraph> {
    match family {
        Family::Grid { d, m } => grid(*d, *m),
        Family::Stripes { big_d, d, m, symmetric } => {
            let cfg = StripesConfig::new(*big_d, *d, *m)?;
            if *symmetric {
                cfg.symmetric_hypergraph()
            } else {
                cfg.hypergraph()
            }
        }
        Family::UnitDistance { points, sq_scale } => unit_distance(points.build()?, sq_scale.clone()),
        Family::PointLine { layout } => point_line(layout),
        Family::Equilateral { points } => equilateral(points.build()?),
        Family::Blowup { t, k, r, seed } => {
            let cfg = blowup::BlowupConfig::new(*t, *k, *r, *seed)?;
            Ok(blowup::HardInstance::build(&cfg)?.graph)
        }
        Family::RandomPoints { d, k, n, denom, degree, seed } => {
            random_predicate_instance(*d, *k, *n, *denom, *degree, *seed)
        }
    }
}

/// `{lo..lo+n-1}^d` in lexicographic order.
pub fn grid_points(d: usize, n: usize, lo: i64) -> Result<PointSet> {
    if d == 0 {
        return input("grid dimension must be positive");
    }
    let mut pts = Vec::new();
    crate::util::for_each_tuple(&vec![n; d], |t| {
        pts.push(t.iter().map(|&c| int(lo + c as i64)).collect());
        true
    });
    PointSet::new(d, pts)
}

pub fn random_points(count: usize, d: usize, denom: i64, seed: u64) -> Result<PointSet> {
    if denom < 1 {
        return input("denominator must be positive");
    }
    let cells = (denom as f64).powi(d as i32);
    if (count as f64) > cells {
        return input(format!("cannot draw {count} distinct points from a grid of {cells} cells"));
    }
    let mut r = rng(seed);
    let mut seen = std::collections::HashSet::new();
    let mut pts = Vec::with_capacity(count);
    while pts.len() < count {
        let c: Vec<i64> = (0..d).map(|_| r.gen_range(0..denom)).collect();
        if seen.insert(c.clone()) {
            pts.push(c.into_iter().map(|x| ratio(x, denom)).collect());
        }
    }
    PointSet::new(d, pts)
}

/// Variable `j` of block `b` in a predicate over `k` blocks of dimension `d`.
pub(crate) fn v(k: usize, d: usize, b: usize, j: usize) -> Polynomial {
    Polynomial::var(k * d, b * d + j)
}

/// Adjacent iff some coordinate agrees.
pub fn grid(d: usize, m: usize) -> Result<PartiteHypergraph> {
    let p = grid_points(d, m, 1)?;
    let polys: Vec<Polynomial> = (0..d).map(|j| &v(2, d, 0, j) - &v(2, d, 1, j)).collect();
    let formula = Formula::or((0..d).map(|j| Formula::atom(j, SignSet::ZERO)).collect());
    PartiteHypergraph::new(vec![p.clone(), p], SignPredicate::new(polys, formula)?)
}

/// Stripe parameters: `k = floor(D/d)` offsets `a_i = i^2/p mod 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StripesConfig {
    pub big_d: usize,
    pub d: usize,
    pub m: usize,
    pub k: usize,
    pub p: u64,
    pub a: Vec<Rational>,
}

pub fn smallest_prime_above(k: u64) -> u64 {
    let is_prime = |n: u64| n >= 2 && (2..).take_while(|q| q * q <= n).all(|q| !n.is_multiple_of(q));
    (k + 1..).find(|&n| is_prime(n)).unwrap()
}

/// `a_i = (i^2 mod p) / p` for the smallest prime `p > k`.
pub fn stripe_offsets(k: usize) -> (u64, Vec<Rational>) {
    let p = smallest_prime_above(k as u64);
    let a = (0..k as u64)
        .map(|i| ratio(((i * i) % p) as i64, p as i64))
        .collect();
    (p, a)
}

impl StripesConfig {
    pub fn new(big_d: usize, d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 {
            return input("stripes needs d >= 1 and m >= 1");
        }
        if big_d < d {
            return input(format!("stripes needs D >= d, got D={big_d}, d={d}"));
        }
        let k = big_d / d;
        let (p, a) = stripe_offsets(k);
        Ok(StripesConfig { big_d, d, m, k, p, a })
    }

    /// Offset `i*m/k + a_i*m/(3k)` of stripe `i`.
    pub fn offset(&self, i: usize) -> Rational {
        let (m, k) = (self.m as i64, self.k as i64);
        ratio(i as i64 * m, k) + &self.a[i] * ratio(m, 3 * k)
    }

    /// `P_1 = [m]^d`, `P_2 = [2m]^d`; adjacent iff an even number of
    /// `y_j - x_j - offset_i >= 0` hold.
    pub fn hypergraph(&self) -> Result<PartiteHypergraph> {
        let d = self.d;
        let mut polys = Vec::new();
        for j in 0..d {
            for i in 0..self.k {
                let diff = &v(2, d, 1, j) - &v(2, d, 0, j);
                polys.push(&diff - &Polynomial::constant(2 * d, self.offset(i)));
            }
        }
        let atoms = (0..polys.len()).map(|r| Formula::atom(r, SignSet::NONNEG)).collect();
        let pred = SignPredicate::new(polys, Formula::not(Formula::xor(atoms)))?;
        let p1 = grid_points(d, self.m, 1)?;
        let p2 = grid_points(d, 2 * self.m, 1)?;
        PartiteHypergraph::new(vec![p1, p2], pred)
    }

    /// Symmetric variant on `[m]^d` for both parts: an even number of
    /// `(y_j - x_j)^2 - offset_i^2 >= 0` hold.
    pub fn symmetric_hypergraph(&self) -> Result<PartiteHypergraph> {
        let d = self.d;
        let mut polys = Vec::new();
        for j in 0..d {
            for i in 0..self.k {
                let diff = &v(2, d, 1, j) - &v(2, d, 0, j);
                let c = self.offset(i);
                polys.push(&(&diff * &diff) - &Polynomial::constant(2 * d, &c * &c));
            }
        }
        let atoms = (0..polys.len()).map(|r| Formula::atom(r, SignSet::NONNEG)).collect();
        let pred = SignPredicate::new(polys, Formula::not(Formula::xor(atoms)))?;
        let p = grid_points(d, self.m, 1)?;
        PartiteHypergraph::new(vec![p.clone(), p], pred)
    }
}

pub fn squared_distance_poly(k: usize, d: usize, a: usize, b: usize) -> Polynomial {
    (0..d).fold(Polynomial::zero(k * d), |acc, j| {
        let diff = &v(k, d, a, j) - &v(k, d, b, j);
        &acc + &(&diff * &diff)
    })
}

/// Adjacent iff the squared distance equals `sq_scale`.
pub fn unit_distance(p: PointSet, sq_scale: Rational) -> Result<PartiteHypergraph> {
    if p.d < 2 {
        return input("unit distance graphs need d >= 2");
    }
    let d = p.d;
    let g = &squared_distance_poly(2, d, 0, 1) - &Polynomial::constant(2 * d, sq_scale);
    let pred = SignPredicate::new(vec![g], Formula::atom(0, SignSet::ZERO))?;
    PartiteHypergraph::new(vec![p.clone(), p], pred)
}

/// Triples with `|xy|^2 = |yz|^2 = |zx|^2`.
pub fn equilateral(p: PointSet) -> Result<PartiteHypergraph> {
    if p.d != 2 {
        return input("equilateral triangles are supported in the plane only");
    }
    let g1 = &squared_distance_poly(3, 2, 0, 1) - &squared_distance_poly(3, 2, 1, 2);
    let g2 = &squared_distance_poly(3, 2, 1, 2) - &squared_distance_poly(3, 2, 2, 0);
    let f = Formula::and(vec![Formula::atom(0, SignSet::ZERO), Formula::atom(1, SignSet::ZERO)]);
    PartiteHypergraph::new(vec![p.clone(), p.clone(), p], SignPredicate::new(vec![g1, g2], f)?)
}

/// Point `(x, y)` and line `(m, b)` are incident iff `y - m x - b = 0`.
pub fn point_line(layout: &PointLineLayout) -> Result<PartiteHypergraph> {
    let (points, lines) = match layout {
        PointLineLayout::Lattice { s, t } => {
            let (s, t) = (*s as i64, *t as i64);
            if s < 1 || t < 1 {
                return input("lattice layout needs s, t >= 1");
            }
            let pts: Vec<Vec<i64>> = (1..=s)
                .flat_map(|x| (1..=2 * s * t).map(move |y| vec![x, y]))
                .collect();
            let lns: Vec<Vec<i64>> = (1..=t)
                .flat_map(|m| (1..=s * t).map(move |b| vec![m, b]))
                .collect();
            (PointSet::from_ints(2, &pts)?, PointSet::from_ints(2, &lns)?)
        }
        PointLineLayout::Random { points, lines, denom, seed } => {
            let pts = random_points(*points, 2, *denom, *seed)?;
            let lns = random_points(*lines, 2, *denom, crate::util::sub_seed(*seed, 1))?;
            (pts, lns)
        }
    };
    let (x, y, m, b) = (v(2, 2, 0, 0), v(2, 2, 0, 1), v(2, 2, 1, 0), v(2, 2, 1, 1));
    let g = &(&y - &(&m * &x)) - &b;
    let pred = SignPredicate::new(vec![g], Formula::atom(0, SignSet::ZERO))?;
    PartiteHypergraph::new(vec![points, lines], pred)
}

/// Lattice layout whose geometric mean size `sqrt(|P||L|)` is close to `n`,
/// preferring balanced shapes `t ≈ 2s`.
pub fn lattice_for_size(n: usize) -> (usize, usize) {
    let target = n as f64;
    let mut best = (1, 1, f64::INFINITY);
    for s in 1..=64usize {
        for t in 1..=128usize {
            let p = (2 * s * s * t) as f64;
            let l = (s * t * t) as f64;
            let size = (p * l).sqrt();
            let score = (size.ln() - target.ln()).abs() + 0.25 * ((t as f64) / (2.0 * s as f64)).ln().abs();
            if score < best.2 {
                best = (s, t, score);
            }
        }
    }
    (best.0, best.1)
}

/// `k` parts of `n` random points and one random polynomial `g >= 0` of the given degree.
pub fn random_predicate_instance(
    d: usize,
    k: usize,
    n: usize,
    denom: i64,
    degree: u32,
    seed: u64,
) -> Result<PartiteHypergraph> {
    if k == 0 {
        return input("need at least one part");
    }
    let parts = (0..k)
        .map(|i| random_points(n, d, denom, crate::util::sub_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let g = random_polynomial(k * d, degree, crate::util::sub_seed(seed, 99))?;
    let g = &g - &Polynomial::constant(k * d, g.eval(&vec![ratio(1, 2); k * d])?);
    let pred = SignPredicate::new(vec![g], Formula::atom(0, SignSet::NONNEG))?;
    PartiteHypergraph::new(parts, pred)
}

/// Dense random polynomial with small integer coefficients and exact degree `degree`.
pub fn random_polynomial(arity: usize, degree: u32, seed: u64) -> Result<Polynomial> {
    let mut r = rng(seed);
    let mut terms = Vec::new();
    for e in 0..=degree {
        for m in super::super::poly::monomials_of_degree(arity, e) {
            let c: i64 = r.gen_range(-4..=4);
            if c != 0 {
                terms.push((m, int(c)));
            }
        }
    }
    // force the top degree to be attained
    let mut top = vec![0; arity];
    top[0] = degree;
    let p = Polynomial::from_terms(arity, terms)?;
    let p = if p.degree() < degree {
        &p + &Polynomial::from_terms(arity, [(top, int(1))])?
    } else {
        p
    };
    Ok(p)
}
