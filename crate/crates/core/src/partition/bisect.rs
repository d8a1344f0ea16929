//! Simultaneous bisection of several point groups by one polynomial.
//!
//! Points are first mapped into `[-1, 1]^d` by a dyadic affine change of
//! coordinates. The search works on float Veronese lifts: each iteration
//! forces the current cut through the "median" of every group (the lift of the
//! middle point, or the average lift of the middle pair) by projecting the
//! coefficient vector onto those linear constraints. Every candidate that
//! looks balanced in floats is rounded to dyadic coefficients and re-counted
//! exactly; only exact counts decide acceptance.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{compile_single, Polynomial, ScaledPoints, Sign, VeroneseImage};
use crate::rational::{dyadic, to_f64, Rational};
use crate::util::{rng, Rng};

/// Search effort and tolerance for the bisection heuristic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Groups up to this size must be bisected exactly.
    pub exact_up_to: usize,
    /// Allowed excess for larger groups, as a fraction of the group size.
    pub slack_fraction: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { iterations: 60, restarts: 6, seed: 0, exact_up_to: 64, slack_fraction: 0.02 }
    }
}

impl SearchBudget {
    pub fn allowed_slack(&self, n: usize) -> usize {
        if n <= self.exact_up_to {
            0
        } else {
            (self.slack_fraction * n as f64).ceil() as usize
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideCounts {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

impl SideCounts {
    pub fn total(&self) -> usize {
        self.pos + self.neg + self.zero
    }

    /// How far the larger strict side exceeds `ceil(n/2)`.
    pub fn excess(&self) -> usize {
        self.pos.max(self.neg).saturating_sub(self.total().div_ceil(2))
    }
}

/// The dyadic affine map `z = (x - c) / s` onto roughly `[-1, 1]^d`.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub d: usize,
    pub center: Vec<Rational>,
    pub scale: Vec<Rational>,
    pub scaled: ScaledPoints,
    pub float: Vec<Vec<f64>>,
}

impl Normalized {
    pub fn new(points: &[Vec<Rational>], d: usize) -> Self {
        let mut center = Vec::with_capacity(d);
        let mut scale = Vec::with_capacity(d);
        for j in 0..d {
            let lo = points.iter().map(|p| &p[j]).min().cloned().unwrap_or_else(Rational::zero);
            let hi = points.iter().map(|p| &p[j]).max().cloned().unwrap_or_else(Rational::zero);
            let half = to_f64(&((&hi - &lo) / Rational::from_integer(2.into())));
            let e = if half > 0.0 { half.log2().ceil() as i32 } else { 0 };
            let s = pow2(e);
            let mid = to_f64(&((&hi + &lo) / Rational::from_integer(2.into())));
            // center on a dyadic grid fine compared to the scale
            let bits = (12 - e).max(0) as u32;
            center.push(dyadic(mid, bits));
            scale.push(s);
        }
        let z: Vec<Vec<Rational>> = points
            .iter()
            .map(|p| (0..d).map(|j| (&p[j] - &center[j]) / &scale[j]).collect())
            .collect();
        let float = z.iter().map(|p| p.iter().map(to_f64).collect()).collect();
        let scaled = ScaledPoints::new(&z, d);
        Normalized { d, center, scale, scaled, float }
    }

    /// `g(T(x))` as a polynomial in the original coordinates.
    pub fn compose(&self, g: &Polynomial) -> Result<Polynomial> {
        let d = self.d;
        let subs: Vec<Polynomial> = (0..d)
            .map(|j| {
                let inv = Rational::one() / &self.scale[j];
                &Polynomial::var(d, j).scale(&inv) - &Polynomial::constant(d, &self.center[j] * &inv)
            })
            .collect();
        g.substitute(&subs)
    }

    pub fn len(&self) -> usize {
        self.float.len()
    }

    pub fn is_empty(&self) -> bool {
        self.float.is_empty()
    }
}

fn pow2(e: i32) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << e as usize)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// Result of one simultaneous bisection, in normalized coordinates.
#[derive(Clone, Debug)]
pub struct Bisection {
    pub g: Polynomial,
    pub counts: Vec<SideCounts>,
    pub allowed: Vec<usize>,
    pub met: bool,
}

impl Bisection {
    pub fn realized_slack(&self) -> usize {
        self.counts.iter().map(SideCounts::excess).max().unwrap_or(0)
    }

    fn score(&self) -> (usize, usize) {
        let over: usize = self
            .counts
            .iter()
            .zip(&self.allowed)
            .map(|(c, &a)| c.excess().saturating_sub(a))
            .sum();
        (over, self.realized_slack())
    }
}

struct Lifted {
    dim: usize,
    rows: Vec<f64>,
}

impl Lifted {
    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }
}

/// Finds a degree-`t` polynomial bisecting every group (indices into `norm`).
pub fn search(norm: &Normalized, groups: &[Vec<usize>], t: u32, budget: &SearchBudget, seed: u64) -> Result<Bisection> {
    let ver = VeroneseImage::new(norm.d, t);
    let dim = ver.dim();
    if groups.len() > dim {
        return Err(Error::Input(format!(
            "{} groups exceed the {} degrees of freedom of degree {t} in dimension {}",
            groups.len(),
            dim,
            norm.d
        )));
    }
    let members: Vec<usize> = groups.iter().flatten().copied().collect();
    let mut local = vec![usize::MAX; norm.len()];
    for (li, &g) in members.iter().enumerate() {
        local[g] = li;
    }
    let mut rows = Vec::with_capacity(members.len() * dim);
    let mut buf = Vec::with_capacity(dim);
    for &m in &members {
        ver.lift_f64(&norm.float[m], &mut buf);
        rows.extend_from_slice(&buf);
    }
    let lifted = Lifted { dim, rows };
    let local_groups: Vec<Vec<usize>> = groups.iter().map(|g| g.iter().map(|&m| local[m]).collect()).collect();
    let allowed: Vec<usize> = groups.iter().map(|g| budget.allowed_slack(g.len())).collect();

    let mut r = rng(seed);
    let mut best: Option<Bisection> = None;
    let consider = |cand: Bisection, best: &mut Option<Bisection>| {
        if best.as_ref().is_none_or(|b| cand.score() < b.score()) {
            *best = Some(cand);
        }
    };

    let mut warm: Option<Vec<f64>> = None;
    for _ in 0..budget.restarts.max(1) {
        // later restarts start near the best cut so far
        let mut theta = match &warm {
            Some(w) => normalized(w.iter().map(|t: &f64| t + SHAKE * (r.gen::<f64>() - 0.5)).collect()),
            None => random_theta(&mut r, dim + 1),
        };
        let mut cur = medians(&lifted, &local_groups, &allowed, &theta);
        let mut best_float = (cur.over, cur.imbalance, theta.clone());
        let mut last_exact = usize::MAX;
        for _ in 0..budget.iterations.max(1) {
            if cur.over == 0 && cur.imbalance < last_exact {
                // keep polishing a feasible cut until it is perfectly balanced
                last_exact = cur.imbalance;
                let cand = exact(norm, &ver, groups, &allowed, &theta)?;
                let perfect = cand.met && cand.realized_slack() == 0;
                consider(cand, &mut best);
                if perfect {
                    return Ok(best.unwrap());
                }
            }
            // Gauss-Newton on smoothed side counts, then a Newton step on the
            // median residuals, each with backtracking on the true imbalance
            let dirs = [
                smooth_direction(&lifted, &local_groups, &theta),
                project(&theta, &cur.rows).iter().zip(&theta).map(|(p, t)| p - t).collect(),
            ];
            let mut accepted = None;
            'dirs: for dir in &dirs {
                let mut step = 1.0;
                while step > MIN_STEP {
                    let next = normalized(theta.iter().zip(dir).map(|(t, d)| t + step * d).collect());
                    let m = medians(&lifted, &local_groups, &allowed, &next);
                    if m.imbalance < cur.imbalance {
                        accepted = Some((next, m));
                        break 'dirs;
                    }
                    step *= 0.5;
                }
            }
            let (next, m) = accepted.unwrap_or_else(|| {
                // no descent along the Newton direction: shake
                let next = normalized(theta.iter().map(|t| t + SHAKE * (r.gen::<f64>() - 0.5)).collect());
                let m = medians(&lifted, &local_groups, &allowed, &next);
                (next, m)
            });
            theta = next;
            cur = m;
            if (cur.over, cur.imbalance) < (best_float.0, best_float.1) {
                best_float = (cur.over, cur.imbalance, theta.clone());
            }
        }
        let cand = exact(norm, &ver, groups, &allowed, &best_float.2)?;
        consider(cand, &mut best);
        warm = Some(best_float.2);
        if best.as_ref().is_some_and(|b| b.met) {
            return Ok(best.unwrap());
        }
    }
    Ok(best.expect("at least one candidate is evaluated"))
}

const MIN_STEP: f64 = 1.0 / 64.0;
const SHAKE: f64 = 0.05;

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm2(&v);
    if n > 1e-12 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

fn random_theta(r: &mut Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect();
    let s = norm2(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct MedianState {
    /// Total excess over the allowed slack.
    over: usize,
    /// Sum of `|pos - neg|` over groups.
    imbalance: usize,
    /// Normalized median constraint row of every group.
    rows: Vec<Vec<f64>>,
}

fn medians(lifted: &Lifted, groups: &[Vec<usize>], allowed: &[usize], theta: &[f64]) -> MedianState {
    let val = |i: usize| theta[0] + lifted.row(i).iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>();
    let mut over = 0;
    let mut imbalance = 0;
    let mut rows = Vec::with_capacity(groups.len());
    for (g, &slack) in groups.iter().zip(allowed) {
        let mut vals: Vec<(f64, usize)> = g.iter().map(|&i| (val(i), i)).collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = vals.len();
        let pos = vals.iter().filter(|v| v.0 > 0.0).count();
        let neg = vals.iter().filter(|v| v.0 < 0.0).count();
        over += pos.max(neg).saturating_sub(n.div_ceil(2) + slack);
        imbalance += pos.abs_diff(neg);
        let mut u = vec![1.0; lifted.dim + 1];
        if n % 2 == 1 {
            u[1..].copy_from_slice(lifted.row(vals[n / 2].1));
        } else {
            let (a, b) = (lifted.row(vals[n / 2 - 1].1), lifted.row(vals[n / 2].1));
            for j in 0..lifted.dim {
                u[j + 1] = 0.5 * (a[j] + b[j]);
            }
        }
        rows.push(normalized(u));
    }
    MedianState { over, imbalance, rows }
}

/// Minimum-norm Gauss-Newton step driving `sum tanh(f/tau)` to zero in every group.
fn smooth_direction(lifted: &Lifted, groups: &[Vec<usize>], theta: &[f64]) -> Vec<f64> {
    let n = lifted.dim + 1;
    let val = |i: usize| theta[0] + lifted.row(i).iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>();
    let mut jac = Vec::with_capacity(groups.len());
    let mut res = Vec::with_capacity(groups.len());
    for g in groups {
        let vals: Vec<f64> = g.iter().map(|&i| val(i)).collect();
        let mut mags: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
        mags.sort_by(f64::total_cmp);
        // temperature from the spread of values near the boundary
        let tau = mags[(g.len() / 8).min(g.len() - 1)].max(1e-12);
        let mut row = vec![0.0; n];
        let mut r = 0.0;
        for (&i, &v) in g.iter().zip(&vals) {
            let th = (v / tau).tanh();
            r += th;
            let w = (1.0 - th * th) / tau;
            row[0] += w;
            for (o, x) in row[1..].iter_mut().zip(lifted.row(i)) {
                *o += w * x;
            }
        }
        let len = g.len() as f64;
        row.iter_mut().for_each(|x| *x /= len);
        jac.push(row);
        res.push(r / len);
    }
    let m = jac.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut sys = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            sys[i][j] = dot(&jac[i], &jac[j]);
        }
        sys[i][i] += 1e-9 + 1e-6 * sys[i][i];
        sys[i][m] = res[i];
    }
    let y = solve(sys);
    let mut dir = vec![0.0; n];
    for (row, yi) in jac.iter().zip(&y) {
        for (o, x) in dir.iter_mut().zip(row) {
            *o -= yi * x;
        }
    }
    dir
}

/// Orthogonal projection of `theta` onto `{x : U x = 0}`.
fn project(theta: &[f64], u: &[Vec<f64>]) -> Vec<f64> {
    let m = u.len();
    if m == 0 {
        return theta.to_vec();
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut g = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            g[i][j] = dot(&u[i], &u[j]);
        }
        g[i][i] += 1e-10;
        g[i][m] = dot(&u[i], theta);
    }
    let lambda = solve(g);
    let mut out = theta.to_vec();
    for (row, l) in u.iter().zip(&lambda) {
        for (o, x) in out.iter_mut().zip(row) {
            *o -= l * x;
        }
    }
    out
}

/// Gaussian elimination with partial pivoting on an augmented `m x (m+1)` matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for c in 0..m {
        let p = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        let piv = a[c][c];
        if piv.abs() < 1e-300 {
            continue;
        }
        for i in c + 1..m {
            let f = a[i][c] / piv;
            if f != 0.0 {
                for j in c..=m {
                    a[i][j] -= f * a[c][j];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for c in (0..m).rev() {
        let s: f64 = (c + 1..m).map(|j| a[c][j] * x[j]).sum();
        x[c] = if a[c][c].abs() < 1e-300 { 0.0 } else { (a[c][m] - s) / a[c][c] };
    }
    x
}

/// Rounds `theta` to dyadic coefficients and counts sides exactly.
fn exact(norm: &Normalized, ver: &VeroneseImage, groups: &[Vec<usize>], allowed: &[usize], theta: &[f64]) -> Result<Bisection> {
    let g = rounded_poly(ver, theta)?;
    let signs = exact_signs(norm, &g, groups.iter().flatten().copied())?;
    let mut it = signs.into_iter();
    let counts: Vec<SideCounts> = groups
        .iter()
        .map(|grp| {
            let mut c = SideCounts::default();
            for _ in grp {
                match it.next().unwrap() {
                    1 => c.pos += 1,
                    -1 => c.neg += 1,
                    _ => c.zero += 1,
                }
            }
            c
        })
        .collect();
    let met = counts.iter().zip(allowed).all(|(c, &a)| c.excess() <= a);
    Ok(Bisection { g, counts, allowed: allowed.to_vec(), met })
}

pub fn rounded_poly(ver: &VeroneseImage, theta: &[f64]) -> Result<Polynomial> {
    let scale = theta.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let q: Vec<Rational> = theta.iter().map(|x| dyadic(x / scale, 40)).collect();
    let g = ver.polynomial(&q[0], &q[1..])?;
    if g.is_zero() {
        return Ok(Polynomial::constant(ver.source_dim(), Rational::one()));
    }
    // make the leading coefficient positive for a canonical form
    let lead = g.terms().last().map(|(_, c)| c.is_negative()).unwrap_or(false);
    Ok(if lead { -&g } else { g })
}

pub fn exact_signs(norm: &Normalized, g: &Polynomial, idx: impl Iterator<Item = usize>) -> Result<Vec<Sign>> {
    let c = compile_single(g, &norm.scaled)?;
    Ok(idx.map(|i| c.eval_sign(&[(&norm.scaled, i)])).collect())
}
