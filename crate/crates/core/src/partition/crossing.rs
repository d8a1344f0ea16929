use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CellPartition;
use crate::error::{Error, Result};
use crate::hypergraph::PointSet;
use crate::poly::{CompiledPoly, Polynomial, ScaledPoints};
use crate::rational::{serde_str, Rational};
use crate::util::{for_each_tuple, product};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingStats {
    pub tuples: u128,
    pub nonconstant: u128,
    /// `nonconstant / tuples`
    #[serde(with = "serde_str")]
    pub fraction: Rational,
    /// Vertex mass of the non-constant cell tuples.
    #[serde(with = "serde_str")]
    pub weighted: Rational,
}

/// How often `g` changes sign inside a product of cells, over the finite members.
pub fn crossing_stats(partitions: &[&CellPartition], sets: &[&PointSet], g: &Polynomial) -> Result<CrossingStats> {
    if partitions.len() != sets.len() || partitions.is_empty() {
        return Err(Error::Arity { expected: partitions.len(), got: sets.len() });
    }
    for (c, s) in partitions.iter().zip(sets) {
        if c.n_points != s.len() || c.dim != s.d {
            return Err(Error::Input("partition does not match its point set".into()));
        }
    }
    let scaled: Vec<ScaledPoints> = sets.iter().map(|s| ScaledPoints::new(&s.points, s.d)).collect();
    let dims: Vec<usize> = sets.iter().map(|s| s.d).collect();
    let denoms: Vec<_> = scaled.iter().map(ScaledPoints::denom).collect();
    let compiled = CompiledPoly::new(g, &dims, &denoms)?;
    let counts: Vec<usize> = partitions.iter().map(|c| c.cells.len()).collect();

    let k = partitions.len();
    // (nonconstant count, mass numerator) per first cell
    let per_first: Vec<(u128, u128)> = (0..counts[0])
        .into_par_iter()
        .map(|c0| {
            let mut non = 0u128;
            let mut mass = 0u128;
            let mut cells = vec![c0; k];
            for_each_tuple(&counts[1..], |rest| {
                cells[1..].copy_from_slice(rest);
                let members: Vec<&[usize]> = (0..k).map(|i| partitions[i].cells[cells[i]].members.as_slice()).collect();
                let sizes: Vec<usize> = members.iter().map(|m| m.len()).collect();
                let mut first = None;
                let mut args: Vec<(&ScaledPoints, usize)> = scaled.iter().map(|s| (s, 0)).collect();
                let constant = for_each_tuple(&sizes, |t| {
                    for i in 0..k {
                        args[i].1 = members[i][t[i]];
                    }
                    let s = compiled.eval_sign(&args);
                    *first.get_or_insert(s) == s
                });
                if !constant {
                    non += 1;
                    mass += product(&sizes);
                }
                true
            });
            (non, mass)
        })
        .collect();
    let tuples = product(&counts);
    let nonconstant: u128 = per_first.iter().map(|x| x.0).sum();
    let mass: u128 = per_first.iter().map(|x| x.1).sum();
    let total = product(&sets.iter().map(|s| s.len()).collect::<Vec<_>>());
    let frac = |a: u128, b: u128| {
        if b == 0 {
            Rational::from_integer(0.into())
        } else {
            Rational::new(a.into(), b.into())
        }
    };
    Ok(CrossingStats { tuples, nonconstant, fraction: frac(nonconstant, tuples), weighted: frac(mass, total) })
}
