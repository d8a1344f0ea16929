//! Fast exact sign evaluation over fixed point sets.
//!
//! Coordinates of each point set are scaled by a common denominator `Q`, so they
//! become integers. A polynomial over several blocks of variables is then made
//! integral by clearing its coefficient denominators and multiplying every term by
//! `Q_b^(deg_b - e_b)` per block, which is a positive factor and leaves the sign
//! unchanged. Evaluation runs a float filter with a rigorous error bound, falls back
//! to checked `i128`, and finally to `BigInt`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{Polynomial, Sign};
use crate::error::{Error, Result};
use crate::rational::{lcm_denominators, Rational};

/// A point set stored as integers `x * Q`.
#[derive(Clone, Debug)]
pub struct ScaledPoints {
    dim: usize,
    denom: BigInt,
    big: Vec<BigInt>,
    small: Option<Vec<i128>>,
    float: Vec<f64>,
}

impl ScaledPoints {
    pub fn new(points: &[Vec<Rational>], dim: usize) -> Self {
        let denom = lcm_denominators(points.iter().flatten());
        let big: Vec<BigInt> = points
            .iter()
            .flat_map(|p| {
                debug_assert_eq!(p.len(), dim);
                p.iter().map(|x| x.numer() * (&denom / x.denom()))
            })
            .collect();
        let small = big.iter().map(|b| b.to_i128()).collect::<Option<Vec<_>>>();
        let float = big.iter().map(|b| b.to_f64().unwrap_or(f64::INFINITY)).collect();
        ScaledPoints { dim, denom, big, small, float }
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.big.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }
}

#[derive(Clone, Debug)]
struct Term {
    big: BigInt,
    small: Option<i128>,
    float: f64,
    /// (block, coordinate, exponent)
    factors: Vec<(usize, usize, u32)>,
}

/// A polynomial compiled against fixed block denominators.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    dims: Vec<usize>,
    terms: Vec<Term>,
    /// Upper bound on the float rounding steps of any term plus the summation.
    ops: f64,
}

const UNIT: f64 = f64::EPSILON; // 2u, doubled again below for slack

impl CompiledPoly {
    /// `dims[b]` is the number of variables of block `b`, `denoms[b]` the
    /// common denominator of the point set that block is evaluated on.
    pub fn new(poly: &Polynomial, dims: &[usize], denoms: &[&BigInt]) -> Result<Self> {
        let arity: usize = dims.iter().sum();
        if arity != poly.arity() {
            return Err(Error::Arity { expected: poly.arity(), got: arity });
        }
        if dims.len() != denoms.len() {
            return Err(Error::Arity { expected: dims.len(), got: denoms.len() });
        }
        let offsets: Vec<usize> = dims
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect();
        let block_deg: Vec<u32> = offsets
            .iter()
            .zip(dims)
            .map(|(&o, &d)| poly.degree_in(o..o + d))
            .collect();
        let lcm = lcm_denominators(poly.terms().map(|(_, c)| c));
        let mut max_factors = 0usize;
        let terms = poly
            .terms()
            .map(|(m, c)| {
                let mut coef = c.numer() * (&lcm / c.denom());
                let mut factors = Vec::new();
                for (b, (&o, &d)) in offsets.iter().zip(dims).enumerate() {
                    let eb = m.degree_in(o..o + d);
                    coef *= num_traits::pow(denoms[b].clone(), (block_deg[b] - eb) as usize);
                    for j in 0..d {
                        if m.0[o + j] > 0 {
                            factors.push((b, j, m.0[o + j]));
                        }
                    }
                }
                max_factors = max_factors.max(m.degree() as usize + factors.len());
                Term {
                    small: coef.to_i128(),
                    float: coef.to_f64().unwrap_or(f64::INFINITY),
                    big: coef,
                    factors,
                }
            })
            .collect::<Vec<_>>();
        let ops = (max_factors + terms.len() + 4) as f64;
        Ok(CompiledPoly { dims: dims.to_vec(), terms, ops })
    }

    pub fn blocks(&self) -> usize {
        self.dims.len()
    }

    /// Sign at the tuple whose block `b` is point `pts[b].1` of `pts[b].0`.
    pub fn eval_sign(&self, pts: &[(&ScaledPoints, usize)]) -> Sign {
        debug_assert_eq!(pts.len(), self.dims.len());
        if let Some(s) = self.sign_float(pts) {
            return s;
        }
        if let Some(s) = self.sign_i128(pts) {
            return s;
        }
        self.sign_big(pts)
    }

    fn sign_float(&self, pts: &[(&ScaledPoints, usize)]) -> Option<Sign> {
        let mut sum = 0.0f64;
        let mut abs = 0.0f64;
        for t in &self.terms {
            let mut v = t.float;
            for &(b, j, e) in &t.factors {
                let (sp, i) = pts[b];
                let x = sp.float[i * sp.dim + j];
                for _ in 0..e {
                    v *= x;
                }
            }
            sum += v;
            abs += v.abs();
        }
        if !abs.is_finite() {
            return None;
        }
        // integer inputs: a zero absolute sum means every term vanished exactly
        if abs == 0.0 {
            return Some(0);
        }
        let bound = 2.0 * UNIT * self.ops * abs;
        if sum.abs() > bound {
            Some(if sum > 0.0 { 1 } else { -1 })
        } else {
            None
        }
    }

    fn sign_i128(&self, pts: &[(&ScaledPoints, usize)]) -> Option<Sign> {
        let mut sum = 0i128;
        for t in &self.terms {
            let mut v = t.small?;
            for &(b, j, e) in &t.factors {
                let (sp, i) = pts[b];
                let x = sp.small.as_ref()?[i * sp.dim + j];
                for _ in 0..e {
                    v = v.checked_mul(x)?;
                }
            }
            sum = sum.checked_add(v)?;
        }
        Some(sum.signum() as Sign)
    }

    fn sign_big(&self, pts: &[(&ScaledPoints, usize)]) -> Sign {
        let mut sum = BigInt::zero();
        for t in &self.terms {
            let mut v = t.big.clone();
            for &(b, j, e) in &t.factors {
                let (sp, i) = pts[b];
                let x = &sp.big[i * sp.dim + j];
                for _ in 0..e {
                    v *= x;
                }
            }
            sum += v;
        }
        if sum.is_zero() {
            0
        } else if sum.is_positive() {
            1
        } else {
            -1
        }
    }
}

/// Convenience for single-block polynomials.
pub fn compile_single(poly: &Polynomial, pts: &ScaledPoints) -> Result<CompiledPoly> {
    CompiledPoly::new(poly, &[pts.dim()], &[pts.denom()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn rand_poly(arity: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(
            (prop::collection::vec(0u32..4, arity), -50i64..50, 1i64..9),
            1..8,
        )
        .prop_map(move |ts| {
            Polynomial::from_terms(arity, ts.into_iter().map(|(e, n, d)| (e, ratio(n, d))))
                .unwrap()
        })
    }

    fn rand_points(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
        prop::collection::vec(
            prop::collection::vec((-30i64..30, 1i64..7).prop_map(|(a, b)| ratio(a, b)), d),
            n,
        )
    }

    #[test]
    fn detects_exact_zero_with_huge_values() {
        // (x - y)^2 at x = y = 10^30 + 1/3 must be exactly zero
        let p = {
            let d = &Polynomial::var(2, 0) - &Polynomial::var(2, 1);
            &d * &d
        };
        let big = Rational::from_integer(BigInt::from(10u32).pow(30)) + ratio(1, 3);
        let a = ScaledPoints::new(&[vec![big.clone()]], 1);
        let c = CompiledPoly::new(&p, &[1, 1], &[a.denom(), a.denom()]).unwrap();
        assert_eq!(c.eval_sign(&[(&a, 0), (&a, 0)]), 0);
        let b = ScaledPoints::new(&[vec![big + ratio(1, 10i64.pow(15))]], 1);
        let c = CompiledPoly::new(&p, &[1, 1], &[a.denom(), b.denom()]).unwrap();
        assert_eq!(c.eval_sign(&[(&a, 0), (&b, 0)]), 1);
    }

    #[test]
    fn constant_polynomial() {
        let p = Polynomial::constant(1, int(-3));
        let a = ScaledPoints::new(&[vec![int(5)]], 1);
        assert_eq!(compile_single(&p, &a).unwrap().eval_sign(&[(&a, 0)]), -1);
    }

    proptest! {
        #[test]
        fn agrees_with_rational_evaluation(p in rand_poly(4), xs in rand_points(3, 2), ys in rand_points(3, 2)) {
            let a = ScaledPoints::new(&xs, 2);
            let b = ScaledPoints::new(&ys, 2);
            let c = CompiledPoly::new(&p, &[2, 2], &[a.denom(), b.denom()]).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let pt: Vec<Rational> = xs[i].iter().chain(&ys[j]).cloned().collect();
                    prop_assert_eq!(c.eval_sign(&[(&a, i), (&b, j)]), p.eval_sign(&pt).unwrap());
                    prop_assert_eq!(c.sign_big(&[(&a, i), (&b, j)]), p.eval_sign(&pt).unwrap());
                }
            }
        }
    }
}
