use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{EdgeOracle, PartiteHypergraph};
use crate::partition::SearchBudget;
use crate::rational::{format_rational, to_f64, Rational};
use crate::regularity::{
    homogeneity_error, oblivious_parts, tuple_classes, TupleClass, TupleMode, VertexPartition,
};
use crate::util::{for_each_tuple, product};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuranConfig {
    /// Constant of the initial parameter `A = ceil(c * D / target)`.
    pub c: f64,
    /// Growth factor applied to `A` while the measured error misses its target.
    pub growth: f64,
    #[serde(default)]
    pub search: SearchBudget,
}

impl Default for TuranConfig {
    fn default() -> Self {
        TuranConfig { c: 2.0, growth: 1.5, search: SearchBudget::default() }
    }
}

/// One level of the extraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuranStep {
    pub sizes: Vec<usize>,
    pub density: String,
    pub a: String,
    pub parts: Vec<usize>,
    pub error: String,
    /// `None` when the pigeonhole step succeeded, else the set that was shrunk.
    pub descend_into: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuranResult {
    pub ell: usize,
    pub s: Vec<Vec<usize>>,
    pub t: Vec<Vec<usize>>,
    pub verified: bool,
    pub s_ratios: Vec<f64>,
    pub t_ratio: f64,
    /// Smallest `C` with `|S_i| >= (eps/D)^d |P_i| / C` for every `i`.
    pub measured_c: f64,
    pub trace: Vec<TuranStep>,
}

struct Level {
    parts: Vec<VertexPartition>,
    a: Rational,
    error: Rational,
}

/// Partitions every set with the smallest scheduled `A` whose measured error is at most `target`.
fn regularize_to(h: &PartiteHypergraph, target: &Rational, cfg: &TuranConfig) -> Result<Level> {
    let big_d = h.total_degree().max(1) as f64;
    let cap = h.sizes().into_iter().max().unwrap_or(1).max(1) as f64;
    let mut a = 1.0;
    loop {
        let ar = Rational::from_integer((a as i64).into());
        let parts = h
            .parts
            .iter()
            .map(|p| oblivious_parts(p, &ar, &cfg.search))
            .collect::<Result<Vec<_>>>()?;
        let error = homogeneity_error(h, &parts, TupleMode::All)?.error;
        if &error <= target {
            return Ok(Level { parts, a: ar, error });
        }
        if parts.iter().all(|pi| pi.iter().all(|p| p.len() == 1)) {
            return Err(Error::Internal("singleton partition is inhomogeneous".into()));
        }
        a = if a == 1.0 {
            // one part each failed: jump to the scheduled parameter
            (cfg.c * big_d / to_f64(target)).ceil().clamp(2.0, cap)
        } else {
            (a * cfg.growth).ceil()
        };
    }
}

fn density(oracle: &EdgeOracle) -> (u128, Rational) {
    let e = oracle.count_edges();
    let total = product(oracle.sizes());
    (e, Rational::new(e.into(), total.max(1).into()))
}

/// Finds `S_1 x ... x S_ell x T` inside the edge set, verified exactly.
pub fn turan_extract(h: &PartiteHypergraph, eps: &Rational, ell: usize, cfg: &TuranConfig) -> Result<TuranResult> {
    let k = h.k();
    if ell == 0 || ell > k {
        return Err(Error::Input(format!("ell must lie in 1..={k}, got {ell}")));
    }
    let zero = Rational::from_integer(0.into());
    if eps <= &zero {
        return Err(Error::Input("eps must be positive".into()));
    }
    let (_, dens) = density(&h.oracle()?);
    if &dens < eps {
        return Err(Error::Precondition(format!(
            "edge density {} is below eps = {}",
            format_rational(&dens),
            format_rational(eps)
        )));
    }
    let d = h.d();
    let big_d = h.total_degree().max(1);
    // current vertex sets as indices into the original point sets
    let mut active: Vec<Vec<usize>> = h.sizes().into_iter().map(|n| (0..n).collect()).collect();
    let mut cur_eps = eps.clone();
    let mut trace = Vec::new();
    let max_steps: usize = h.sizes()[..ell].iter().sum::<usize>().max(1);
    let three = Rational::from_integer(3.into());

    loop {
        if trace.len() > max_steps {
            return Err(Error::Internal("extraction did not terminate within its induction measure".into()));
        }
        let sub = PartiteHypergraph::new(
            h.parts.iter().zip(&active).map(|(p, a)| p.subset(a)).collect(),
            h.predicate.clone(),
        )?;
        let sizes = sub.sizes();
        // one dimension: equitable parts at eps/2 and no small-part excision
        let target = if d == 1 { &cur_eps / Rational::from_integer(2.into()) } else { &cur_eps / &three };
        let level = regularize_to(&sub, &target, cfg)?;
        let classes = tuple_classes(&sub, &level.parts, TupleMode::All)?;
        let counts: Vec<usize> = level.parts.iter().map(Vec::len).collect();
        let mut owner: Vec<Vec<usize>> = sizes.iter().map(|&n| vec![0; n]).collect();
        for (i, pi) in level.parts.iter().enumerate() {
            for (j, part) in pi.iter().enumerate() {
                for &m in part {
                    owner[i][m] = j;
                }
            }
        }
        let small: Vec<Vec<bool>> = (0..k)
            .map(|i| {
                let thr = sizes[i] as f64 / (9.0 * (k * k) as f64 * counts[i] as f64);
                level.parts[i].iter().map(|p| d >= 2 && i < ell && (p.len() as f64) <= thr).collect()
            })
            .collect();
        let class_of = |t: &[usize]| {
            let mut idx = 0;
            for i in 0..k {
                idx = idx * counts[i] + owner[i][t[i]];
            }
            classes[idx]
        };
        let oracle = sub.oracle()?;
        let head: Vec<usize> = sizes[..ell].to_vec();
        let mut per_head = vec![0u128; product(&head) as usize];
        let mut touching = vec![0u128; ell];
        let mut touching_any = 0u128;
        for_each_tuple(&sizes, |t| {
            if !oracle.is_edge(t) {
                return true;
            }
            let hits: Vec<bool> = (0..ell).map(|i| small[i][owner[i][t[i]]]).collect();
            for (c, &h) in touching.iter_mut().zip(&hits) {
                *c += h as u128;
            }
            if hits.iter().any(|&x| x) {
                touching_any += 1;
            } else if class_of(t) == TupleClass::Complete {
                let mut idx = 0;
                for i in 0..ell {
                    idx = idx * head[i] + t[i];
                }
                per_head[idx] += 1;
            }
            true
        });
        let total = product(&sizes);
        let mut step = TuranStep {
            sizes: sizes.clone(),
            density: format_rational(&cur_eps),
            a: format_rational(&level.a),
            parts: counts.clone(),
            error: format_rational(&level.error),
            descend_into: None,
        };
        let third = Rational::new(touching_any.into(), total.into()) <= &cur_eps / &three;
        if d == 1 || third {
            trace.push(step);
            // pigeonhole: the head tuple with the most surviving edges, lowest index on ties
            let best = (0..per_head.len()).max_by(|&a, &b| per_head[a].cmp(&per_head[b]).then(b.cmp(&a))).unwrap();
            let mut x = vec![0; ell];
            let mut rem = best;
            for i in (0..ell).rev() {
                x[i] = rem % head[i];
                rem /= head[i];
            }
            let mut t_local = Vec::new();
            let mut full = x.clone();
            full.resize(k, 0);
            for_each_tuple(&sizes[ell..], |rest| {
                full[ell..].copy_from_slice(rest);
                if oracle.is_edge(&full) && class_of(&full) == TupleClass::Complete {
                    t_local.push(rest.to_vec());
                }
                true
            });
            let s: Vec<Vec<usize>> = (0..ell)
                .map(|i| {
                    let mut v: Vec<usize> = level.parts[i][owner[i][x[i]]].iter().map(|&m| active[i][m]).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            let t: Vec<Vec<usize>> = t_local
                .iter()
                .map(|r| r.iter().enumerate().map(|(j, &m)| active[ell + j][m]).collect())
                .collect();
            return finish(h, eps, ell, d, big_d, s, t, trace);
        }
        // recurse into the small parts of the first set carrying enough edges
        let need = &cur_eps / Rational::from_integer((3 * k as i64).into());
        let i = (0..ell)
            .find(|&i| Rational::new(touching[i].into(), total.into()) >= need)
            .ok_or_else(|| Error::Internal("no small-part set carries its share of edges".into()))?;
        step.descend_into = Some(i);
        trace.push(step);
        let keep: Vec<usize> = (0..sizes[i]).filter(|&m| small[i][owner[i][m]]).map(|m| active[i][m]).collect();
        active[i] = keep;
        let sub2 = PartiteHypergraph::new(
            h.parts.iter().zip(&active).map(|(p, a)| p.subset(a)).collect(),
            h.predicate.clone(),
        )?;
        cur_eps = density(&sub2.oracle()?).1;
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    h: &PartiteHypergraph,
    eps: &Rational,
    ell: usize,
    d: usize,
    big_d: u32,
    s: Vec<Vec<usize>>,
    t: Vec<Vec<usize>>,
    trace: Vec<TuranStep>,
) -> Result<TuranResult> {
    let oracle = h.oracle()?;
    let mut tuple = vec![0; h.k()];
    let sizes: Vec<usize> = s.iter().map(Vec::len).collect();
    let verified = for_each_tuple(&sizes, |idx| {
        for i in 0..ell {
            tuple[i] = s[i][idx[i]];
        }
        t.iter().all(|rest| {
            tuple[ell..].copy_from_slice(rest);
            oracle.is_edge(&tuple)
        })
    });
    if !verified {
        return Err(Error::Internal("extracted product is not contained in the edge set".into()));
    }
    let all = h.sizes();
    let s_ratios: Vec<f64> = (0..ell).map(|i| s[i].len() as f64 / all[i] as f64).collect();
    let scale = (to_f64(eps) / big_d as f64).powi(d as i32);
    let measured_c = s_ratios.iter().map(|r| scale / r).fold(0.0, f64::max);
    Ok(TuranResult {
        ell,
        t_ratio: t.len() as f64 / product(&all[ell..]) as f64,
        s,
        t,
        verified,
        s_ratios,
        measured_c,
        trace,
    })
}
