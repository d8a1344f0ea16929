use serde::{Deserialize, Serialize};

use super::biclique::{contains_biclique, BicliqueVerdict, DEFAULT_NODE_BUDGET};
use super::geometry::sweep_unit_distance;
use crate::error::{input, Result};
use crate::hypergraph::families::{grid_points, lattice_for_size, point_line, unit_distance};
use crate::hypergraph::{Formula, PartiteHypergraph, PointLineLayout, PointSet, SignPredicate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SweepFamily {
    /// Lattice point-line incidences; ladder entries are target sizes `sqrt(|P||L|)`.
    PointLine,
    /// `s x s` integer grids at their most frequent distance; ladder entries are `s^2`.
    UnitDistanceGrid,
    /// Complete bipartite control on `N + N` points.
    Complete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub target: usize,
    pub p: usize,
    pub q: usize,
    /// `sqrt(|P||Q|)`
    pub n: f64,
    pub edges: u128,
    /// Degree-free comparison curves with all implied constants set to 1.
    pub weak_curve: f64,
    pub strong_curve: f64,
    pub verdict: String,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZarankiewiczExperiment {
    pub family: SweepFamily,
    pub u: usize,
    pub rows: Vec<LadderRow>,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// True when every row was certified free.
    pub all_free: bool,
    /// True when some row could not be decided.
    pub any_unknown: bool,
}

impl ZarankiewiczExperiment {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("target,p,q,n,edges,weak_curve,strong_curve,verdict\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.3},{},{:.3},{:.3},{}\n",
                r.target, r.p, r.q, r.n, r.edges, r.weak_curve, r.strong_curve, r.verdict
            ));
        }
        out
    }
}

/// Ordinary least squares fit `y = a + b x`; returns `(b, a, r^2)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (b, my - b * mx, r2)
}

/// Comparison curves for a `K_{u,u}`-free graph in `R^d` with total degree `D`.
pub fn comparison_curves(u: usize, d: usize, big_d: u32, p: usize, q: usize) -> (f64, f64) {
    let (u, d, dd, p, q) = (u as f64, d as f64, big_d as f64, p as f64, q as f64);
    let weak = u.powf(1.0 / d) * dd * p * q.powf(1.0 - 1.0 / d) + u * q;
    let strong = u.powf(2.0 / (d + 1.0)) * dd.powf(2.0 * d / (d + 1.0)) * (p * q).powf(d / (d + 1.0)) + u * p + u * q;
    (weak, strong)
}

fn instance(family: &SweepFamily, target: usize) -> Result<PartiteHypergraph> {
    match family {
        SweepFamily::PointLine => {
            let (s, t) = lattice_for_size(target);
            point_line(&PointLineLayout::Lattice { s, t })
        }
        SweepFamily::UnitDistanceGrid => {
            let side = (target as f64).sqrt().round() as usize;
            if side * side != target {
                return input(format!("unit-distance ladder entries must be squares, got {target}"));
            }
            let g = grid_points(2, side, 0)?;
            let (sq, _) = sweep_unit_distance(&g)?;
            unit_distance(g, sq)
        }
        SweepFamily::Complete => {
            let p = PointSet::from_ints(1, &(0..target as i64).map(|i| vec![i]).collect::<Vec<_>>())?;
            PartiteHypergraph::new(vec![p.clone(), p], SignPredicate::new(vec![], Formula::truth())?)
        }
    }
}

/// Edge counts along a size ladder, a log-log fit, and freeness certificates
/// for every instance with `sqrt(|P||Q|) <= certify_limit`.
pub fn zarankiewicz_sweep(family: SweepFamily, ladder: &[usize], u: usize, certify_limit: usize) -> Result<ZarankiewiczExperiment> {
    if ladder.len() < 4 {
        return input("a fit needs at least four ladder points");
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for &target in ladder {
        let h = instance(&family, target)?;
        let (p, q) = (h.parts[0].len(), h.parts[1].len());
        let n = ((p * q) as f64).sqrt();
        let edges = h.oracle()?.count_edges();
        let (weak_curve, strong_curve) = comparison_curves(u, h.d(), h.total_degree(), p, q);
        let (verdict, detail) = if n <= certify_limit as f64 {
            match contains_biclique(&h, u, DEFAULT_NODE_BUDGET)? {
                BicliqueVerdict::Free => ("free".to_string(), None),
                BicliqueVerdict::Contains { witness } => ("contains".to_string(), Some(format!("{witness:?}"))),
                BicliqueVerdict::Unknown { nodes } => ("unknown".to_string(), Some(format!("budget hit after {nodes} nodes"))),
            }
        } else {
            ("unknown".to_string(), Some(format!("above certification limit {certify_limit}")))
        };
        rows.push(LadderRow { target, p, q, n, edges, weak_curve, strong_curve, verdict, detail });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.edges.max(1) as f64).ln()).collect();
    let (exponent, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(ZarankiewiczExperiment {
        all_free: rows.iter().all(|r| r.verdict == "free"),
        any_unknown: rows.iter().any(|r| r.verdict == "unknown"),
        family,
        u,
        rows,
        exponent,
        intercept,
        r_squared,
    })
}
