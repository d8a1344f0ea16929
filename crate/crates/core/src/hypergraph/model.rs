use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Formula, PointSet, SignPredicate};
use crate::error::{Error, Result};
use crate::poly::{CompiledPoly, ScaledPoints, Sign};
use crate::rational::Rational;
use crate::util::{for_each_tuple, product};

pub const DEFAULT_TUPLE_BUDGET: u128 = 100_000_000;

/// k point sets in `R^d` and a sign predicate of arity `k*d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartiteHypergraph {
    pub parts: Vec<PointSet>,
    pub predicate: SignPredicate,
}

impl PartiteHypergraph {
    pub fn new(parts: Vec<PointSet>, predicate: SignPredicate) -> Result<Self> {
        let h = PartiteHypergraph { parts, predicate };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .parts
            .first()
            .ok_or_else(|| Error::Input("hypergraph needs at least one part".into()))?;
        if let Some(p) = self.parts.iter().find(|p| p.d != first.d) {
            return Err(Error::Input(format!(
                "parts have mixed dimensions {} and {}",
                first.d, p.d
            )));
        }
        self.predicate.validate()?;
        if let Some(a) = self.predicate.arity() {
            let want = self.parts.len() * first.d;
            if a != want {
                return Err(Error::Arity { expected: want, got: a });
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn d(&self) -> usize {
        self.parts[0].d
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(PointSet::len).collect()
    }

    pub fn total_degree(&self) -> u32 {
        self.predicate.total_degree()
    }

    pub fn tuple_count(&self) -> u128 {
        product(&self.sizes())
    }

    /// True when every part holds the same points, as for symmetric instances.
    pub fn has_equal_parts(&self) -> bool {
        self.parts.windows(2).all(|w| w[0].points == w[1].points)
    }

    /// Exact reference evaluation with rational arithmetic.
    pub fn is_edge(&self, tuple: &[usize]) -> Result<bool> {
        if tuple.len() != self.k() {
            return Err(Error::Arity { expected: self.k(), got: tuple.len() });
        }
        let mut x: Vec<Rational> = Vec::with_capacity(self.k() * self.d());
        for (i, (&j, part)) in tuple.iter().zip(&self.parts).enumerate() {
            if j >= part.len() {
                return Err(Error::Input(format!(
                    "index {j} out of range for part {i} of size {}",
                    part.len()
                )));
            }
            x.extend_from_slice(part.point(j));
        }
        let signs = self
            .predicate
            .polys
            .iter()
            .map(|p| p.eval_sign(&x))
            .collect::<Result<Vec<Sign>>>()?;
        Ok(self.predicate.eval_signs(&signs))
    }

    pub fn oracle(&self) -> Result<EdgeOracle> {
        EdgeOracle::new(self)
    }

    pub fn count_edges_bruteforce(&self, budget: u128) -> Result<u128> {
        let total = self.tuple_count();
        if total > budget {
            return Err(Error::Budget { what: "edge count".into(), needed: total, budget });
        }
        Ok(self.oracle()?.count_edges())
    }
}

/// Compiled edge test for repeated queries on one hypergraph.
#[derive(Clone, Debug)]
pub struct EdgeOracle {
    sizes: Vec<usize>,
    scaled: Vec<ScaledPoints>,
    polys: Vec<CompiledPoly>,
    formula: Formula,
}

impl EdgeOracle {
    pub fn new(h: &PartiteHypergraph) -> Result<Self> {
        h.validate()?;
        let d = h.d();
        let scaled: Vec<ScaledPoints> =
            h.parts.iter().map(|p| ScaledPoints::new(&p.points, d)).collect();
        let dims = vec![d; h.k()];
        let denoms: Vec<&BigInt> = scaled.iter().map(ScaledPoints::denom).collect();
        let polys = h
            .predicate
            .polys
            .iter()
            .map(|p| CompiledPoly::new(p, &dims, &denoms))
            .collect::<Result<Vec<_>>>()?;
        Ok(EdgeOracle {
            sizes: h.sizes(),
            scaled,
            polys,
            formula: h.predicate.formula.clone(),
        })
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn sign(&self, r: usize, tuple: &[usize]) -> Sign {
        let mut refs = [(&self.scaled[0], 0usize); 8];
        if tuple.len() <= 8 {
            for (b, &i) in tuple.iter().enumerate() {
                refs[b] = (&self.scaled[b], i);
            }
            self.polys[r].eval_sign(&refs[..tuple.len()])
        } else {
            let v: Vec<_> = tuple.iter().enumerate().map(|(b, &i)| (&self.scaled[b], i)).collect();
            self.polys[r].eval_sign(&v)
        }
    }

    /// Edge test on in-range indices (checked in debug builds only).
    pub fn is_edge(&self, tuple: &[usize]) -> bool {
        debug_assert!(tuple.iter().zip(&self.sizes).all(|(&i, &s)| i < s));
        const UNSET: Sign = 2;
        let n = self.polys.len();
        if n <= 32 {
            let mut memo = [UNSET; 32];
            self.formula.eval(&mut |r| {
                if memo[r] == UNSET {
                    memo[r] = self.sign(r, tuple);
                }
                memo[r]
            })
        } else {
            let mut memo = vec![UNSET; n];
            self.formula.eval(&mut |r| {
                if memo[r] == UNSET {
                    memo[r] = self.sign(r, tuple);
                }
                memo[r]
            })
        }
    }

    pub fn count_edges(&self) -> u128 {
        let rest = &self.sizes[1..];
        (0..self.sizes[0])
            .into_par_iter()
            .map(|i| {
                let mut t = vec![i; self.k()];
                let mut c = 0u128;
                for_each_tuple(rest, |r| {
                    t[1..].copy_from_slice(r);
                    c += self.is_edge(&t) as u128;
                    true
                });
                c
            })
            .sum()
    }
}
