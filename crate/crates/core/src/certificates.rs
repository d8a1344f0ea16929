//! Executable checks of the inequalities behind the lower-bound constructions.
//!
//! Every quantity is computed by brute force and compared exactly. Bounds
//! involving `|A|^(1/d)` are decided on certified rational enclosures of the
//! root that are refined until the comparison is settled, so no floating point
//! enters a verdict.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::families::{grid, stripe_offsets, StripesConfig};
use crate::rational::{exact_root, format_rational, int, ratio, root_bounds, Rational};
use crate::regularity::{regularize, ARule, RegularityReport, RegularityRequest};
use crate::util::{rng, sub_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub inequality: String,
    /// Exact value, or a certified interval `[lo, hi]` when a radical is involved.
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateVerdict {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub checks: Vec<InequalityCheck>,
    pub status: Status,
    pub note: Option<String>,
}

impl CertificateVerdict {
    fn new(name: &str, params: &[(&str, String)], checks: Vec<InequalityCheck>) -> Self {
        let status = if checks.iter().all(|c| c.holds) { Status::Pass } else { Status::Fail };
        CertificateVerdict {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            checks,
            status,
            note: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Pass or not applicable: nothing contradicts the bound.
    pub fn consistent(&self) -> bool {
        self.status != Status::Fail
    }
}

fn q(x: u64) -> Rational {
    Rational::from_integer(x.into())
}

fn fmt(r: &Rational) -> String {
    format_rational(r)
}

fn interval(lo: &Rational, hi: &Rational) -> String {
    if lo == hi {
        fmt(lo)
    } else {
        format!("[{}, {}]", fmt(lo), fmt(hi))
    }
}

/// Decides `g(s) >= 0` for `s = a^(1/d)`, where `bounds(lo, hi)` encloses `g`
/// on `[lo, hi]`. Returns the decision and the last enclosure of `g`.
fn decide_radical(
    a: u64,
    d: u32,
    bounds: impl Fn(&Rational, &Rational) -> (Rational, Rational),
) -> (Option<bool>, Rational, Rational) {
    let big = BigUint::from(a);
    if let Some(r) = exact_root(&big, d) {
        let s = Rational::from_integer(r.into());
        let (g, _) = bounds(&s, &s);
        return (Some(!g.is_negative()), g.clone(), g);
    }
    let mut last = (Rational::zero(), Rational::zero());
    for bits in [32u32, 64, 128, 256, 512, 1024] {
        let (lo, hi) = root_bounds(&big, d, bits);
        let (glo, ghi) = bounds(&lo, &hi);
        if !glo.is_negative() {
            return (Some(true), glo, ghi);
        }
        if ghi.is_negative() {
            return (Some(false), glo, ghi);
        }
        last = (glo, ghi);
    }
    (None, last.0, last.1)
}

/// Neighbourhood expansion in the coordinate-agreement grid graph on `[m]^d`.
///
/// Checks `|N(A)| >= m^d - (m - |A|^(1/d))^d` and
/// `m^d - (m - |A|^(1/d))^d >= |A|^(1/d) m^(d-1)` for a set `A` of points of
/// `[m]^d` with coordinates in `1..=m`.
pub fn expansion_check(m: usize, d: usize, a: &[Vec<i64>]) -> Result<CertificateVerdict> {
    if a.is_empty() {
        return Err(Error::Input("A must be nonempty".into()));
    }
    if d == 0 || m == 0 {
        return Err(Error::Input("need m, d >= 1".into()));
    }
    let mut seen = HashSet::new();
    let mut idx = Vec::with_capacity(a.len());
    for x in a {
        if x.len() != d || x.iter().any(|&c| c < 1 || c > m as i64) {
            return Err(Error::Input(format!("{x:?} is not a point of [{m}]^{d}")));
        }
        if seen.insert(x.clone()) {
            idx.push(x.iter().fold(0usize, |acc, &c| acc * m + (c - 1) as usize));
        }
    }
    let h = grid(d, m)?;
    let o = h.oracle()?;
    let total = m.pow(d as u32);
    let n_a = (0..total).into_par_iter().filter(|&y| idx.iter().any(|&x| o.is_edge(&[x, y]))).count() as u64;
    let size = idx.len() as u64;

    let (mm, md) = (q(m as u64), q(total as u64));
    let md1 = q(m.pow(d as u32 - 1) as u64);
    let pow = |x: &Rational| num_traits::pow(x.clone(), d);
    let clamp = |x: Rational| if x.is_negative() { Rational::zero() } else { x };
    // m^d - (m - s)^d is increasing in s on [0, m]
    let bound_at = |s: &Rational| &md - pow(&clamp(&mm - s));

    let (first, lo1, hi1) = decide_radical(size, d as u32, |lo, hi| {
        (q(n_a) - bound_at(hi), q(n_a) - bound_at(lo))
    });
    let (second, lo2, hi2) = decide_radical(size, d as u32, |lo, hi| {
        (bound_at(lo) - hi * &md1, bound_at(hi) - lo * &md1)
    });
    let root = if let Some(r) = exact_root(&BigUint::from(size), d as u32) {
        let r = Rational::from_integer(r.into());
        (r.clone(), r)
    } else {
        root_bounds(&BigUint::from(size), d as u32, 64)
    };
    let rhs1 = (bound_at(&root.0), bound_at(&root.1));
    let checks = vec![
        InequalityCheck {
            inequality: "|N(A)| >= m^d - (m - |A|^(1/d))^d".into(),
            lhs: n_a.to_string(),
            rhs: interval(&rhs1.0, &rhs1.1),
            holds: first == Some(true),
        },
        InequalityCheck {
            inequality: "m^d - (m - |A|^(1/d))^d >= |A|^(1/d) m^(d-1)".into(),
            lhs: interval(&rhs1.0, &rhs1.1),
            rhs: interval(&(&root.0 * &md1), &(&root.1 * &md1)),
            holds: second == Some(true),
        },
    ];
    let mut v = CertificateVerdict::new(
        "expansion",
        &[("m", m.to_string()), ("d", d.to_string()), ("|A|", size.to_string())],
        checks,
    );
    if first.is_none() || second.is_none() {
        v.note = Some(format!(
            "undecided after 1024-bit enclosures: margins {} and {}",
            interval(&lo1, &hi1),
            interval(&lo2, &hi2)
        ));
    }
    Ok(v)
}

/// Counts ordered pairs `i != i'` in `{0..k-l-1}` with
/// `|a_{i+l} - a_i - a_{i'+l} + a_{i'}| < 1/16` and compares with `k^2/4 - k/2`.
pub fn well_spaced_count(k: usize, l: usize) -> Result<CertificateVerdict> {
    if k < 2 {
        return Err(Error::Input(format!("the spacing bound needs k >= 2, got {k}")));
    }
    if l < 1 || l > k {
        return Err(Error::Input(format!("need 1 <= l <= k, got l = {l}")));
    }
    let (p, a) = stripe_offsets(k);
    let range = k - l;
    let sixteenth = ratio(1, 16);
    let mut count = 0u64;
    for i in 0..range {
        for j in 0..range {
            if i != j {
                let x = &a[i + l] - &a[i] - &a[j + l] + &a[j];
                count += (x.abs() < sixteenth) as u64;
            }
        }
    }
    let bound = ratio((k * k) as i64, 4) - ratio(k as i64, 2);
    let holds = q(count) <= bound;
    Ok(CertificateVerdict::new(
        "well_spaced",
        &[("k", k.to_string()), ("l", l.to_string()), ("p", p.to_string())],
        vec![InequalityCheck {
            inequality: "#{close pairs} <= k^2/4 - k/2".into(),
            lhs: count.to_string(),
            rhs: fmt(&bound),
            holds,
        }],
    ))
}

/// Minimum `m / k` at which the symmetric-difference bound is claimed.
pub const SYMDIFF_SCALE: usize = 4000;

/// Neighbourhoods of `x, x'` in the one-dimensional stripes graph on `[m] x [2m]`
/// differ on at least `min{k(|x - x'| - 1)/2, m/200}` points and agree on as many.
pub fn symdiff_check(k: usize, m: usize, x: usize, xp: usize) -> Result<CertificateVerdict> {
    if m < SYMDIFF_SCALE * k {
        return Err(Error::Precondition(format!("the bound is claimed only for m >= {SYMDIFF_SCALE} k; got m = {m}, k = {k}")));
    }
    if x < 1 || x > m || xp < 1 || xp > m {
        return Err(Error::Input(format!("x and x' must lie in [1, {m}]")));
    }
    let h = StripesConfig::new(k, 1, m)?.hypergraph()?;
    let o = h.oracle()?;
    let delta = (0..2 * m).into_par_iter().filter(|&y| o.is_edge(&[x - 1, y]) != o.is_edge(&[xp - 1, y])).count() as u64;
    let gap = x.abs_diff(xp) as i64;
    let near = ratio(k as i64 * (gap - 1), 2);
    let far = ratio(m as i64, 200);
    let rhs = if near < far { near } else { far };
    let checks = vec![
        InequalityCheck {
            inequality: "|N(x) Δ N(x')| >= min{k(|x-x'|-1)/2, m/200}".into(),
            lhs: delta.to_string(),
            rhs: fmt(&rhs),
            holds: q(delta) >= rhs,
        },
        InequalityCheck {
            inequality: "2m - |N(x) Δ N(x')| >= min{k(|x-x'|-1)/2, m/200}".into(),
            lhs: (2 * m as u64 - delta).to_string(),
            rhs: fmt(&rhs),
            holds: q(2 * m as u64 - delta) >= rhs,
        },
    ];
    Ok(CertificateVerdict::new(
        "symdiff",
        &[("k", k.to_string()), ("m", m.to_string()), ("x", x.to_string()), ("x'", xp.to_string())],
        checks,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "example", rename_all = "snake_case")]
pub enum LowerBoundExample {
    Grid {
        d: usize,
        m: usize,
    },
    Stripes {
        #[serde(rename = "D")]
        big_d: usize,
        d: usize,
        m: usize,
    },
}

/// A partition with measured error `e` and at most `parts` parts per side must
/// respect the part-count lower bound of its example, when `m` is large enough.
pub fn partition_consistency(example: &LowerBoundExample, error: &Rational, parts: usize) -> CertificateVerdict {
    let e = error.clone();
    let k = q(parts as u64);
    let (name, params, applicable, bound, shape) = match *example {
        LowerBoundExample::Grid { d, m } => {
            // m >= d e^-(d+1)  <=>  m e^(d+1) >= d
            let ok = e.is_positive() && q(m as u64) * num_traits::pow(e.clone(), d + 1) >= q(d as u64);
            let bound = if e.is_positive() { num_traits::pow(Rational::one() / (int(2) * &e), d) } else { Rational::zero() };
            ("grid_parts", vec![("d", d.to_string()), ("m", m.to_string())], ok, bound, "K >= (2e)^(-d)")
        }
        LowerBoundExample::Stripes { big_d, d, m } => {
            // m >= 4D/e and D >= 2d
            let ok = e.is_positive() && big_d >= 2 * d && q(m as u64) * &e >= q(4 * big_d as u64);
            let bound = if e.is_positive() {
                num_traits::pow(q(big_d as u64) / (int(32) * &e * q(d as u64)), d)
            } else {
                Rational::zero()
            };
            ("stripes_parts", vec![("D", big_d.to_string()), ("d", d.to_string()), ("m", m.to_string())], ok, bound, "K >= (D/(32 e d))^d")
        }
    };
    let mut params = params;
    params.push(("e", fmt(&e)));
    params.push(("K", parts.to_string()));
    let check = InequalityCheck { inequality: shape.into(), lhs: parts.to_string(), rhs: fmt(&bound), holds: k >= bound };
    let mut v = CertificateVerdict::new(name, &params, vec![check]);
    if !applicable {
        v.status = Status::NotApplicable;
        v.note = Some("m is below the size the bound assumes".into());
    }
    v
}

pub fn partition_consistency_for(example: &LowerBoundExample, report: &RegularityReport) -> CertificateVerdict {
    let parts = report.part_counts.iter().copied().max().unwrap_or(0);
    partition_consistency(example, &report.homogeneity.error, parts)
}

/// `count` random nonempty subsets of `[m]^d`, sizes spread over `1..=m^d`.
pub fn random_subsets(m: usize, d: usize, count: usize, seed: u64) -> Vec<Vec<Vec<i64>>> {
    let total = m.pow(d as u32);
    (0..count)
        .map(|i| {
            let mut r = rng(sub_seed(seed, i as u64));
            // a coarse spread of sizes: very small, medium and nearly full sets
            let size = match i % 3 {
                0 => r.gen_range(1..=m.min(total)),
                1 => r.gen_range(1..=total),
                _ => r.gen_range(total / 2..=total).max(1),
            };
            rand::seq::index::sample(&mut r, total, size)
                .into_iter()
                .map(|id| {
                    let mut x = vec![0; d];
                    let mut rest = id;
                    for slot in x.iter_mut().rev() {
                        *slot = (rest % m) as i64 + 1;
                        rest /= m;
                    }
                    x
                })
                .collect()
        })
        .collect()
}

/// Sizes of the default certificate suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub expansion_m: Vec<usize>,
    pub expansion_sets: usize,
    pub spacing_max_k: usize,
    pub symdiff_k: usize,
    pub symdiff_m: usize,
    pub symdiff_pairs: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            expansion_m: vec![10, 20],
            expansion_sets: 50,
            spacing_max_k: 12,
            symdiff_k: 2,
            symdiff_m: 8000,
            symdiff_pairs: 100,
            seed: 0,
        }
    }
}

/// Runs every certificate over the configured sweep, plus consistency checks
/// on fresh regularity runs of both lower-bound examples.
pub fn default_suite(cfg: &SuiteConfig) -> Result<Vec<CertificateVerdict>> {
    let mut out = Vec::new();
    for &m in &cfg.expansion_m {
        for a in random_subsets(m, 2, cfg.expansion_sets, sub_seed(cfg.seed, m as u64)) {
            out.push(expansion_check(m, 2, &a)?);
        }
    }
    for k in 2..=cfg.spacing_max_k {
        for l in 1..=k {
            out.push(well_spaced_count(k, l)?);
        }
    }
    let mut r = rng(sub_seed(cfg.seed, 0x5d));
    let m = cfg.symdiff_m;
    for i in 0..cfg.symdiff_pairs {
        let (x, xp) = match i {
            0 => (1, 2),
            1 => (1, m / 2),
            2 => (7, 7),
            _ => (r.gen_range(1..=m), r.gen_range(1..=m)),
        };
        out.push(symdiff_check(cfg.symdiff_k, m, x, xp)?);
    }
    for (d, m, a_values) in [(1usize, 200usize, vec![2, 4, 8, 12]), (2, 30, vec![1, 2, 3])] {
        let h = grid(d, m)?;
        for a in a_values {
            let req = RegularityRequest { a_rule: ARule::Explicit { a: int(a) }, ..RegularityRequest::new(ratio(1, 2)) };
            out.push(partition_consistency_for(&LowerBoundExample::Grid { d, m }, &regularize(&h, &req)?));
        }
    }
    for big_d in [2usize, 4, 8] {
        let m = 2000;
        let h = StripesConfig::new(big_d, 1, m)?.hypergraph()?;
        for eps in [ratio(1, 4), ratio(1, 10)] {
            let req = RegularityRequest { a_rule: ARule::Auto { c: 2.0 }, ..RegularityRequest::new(eps) };
            out.push(partition_consistency_for(&LowerBoundExample::Stripes { big_d, d: 1, m }, &regularize(&h, &req)?));
        }
    }
    Ok(out)
}
