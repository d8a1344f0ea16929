use num_traits::{One, Zero};

use super::{Monomial, Polynomial};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Exponent vectors of total degree exactly `e` in `d` variables, descending lex.
pub fn monomials_of_degree(d: usize, e: u32) -> Vec<Vec<u32>> {
    fn rec(d: usize, e: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == d {
            prefix.push(e);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=e).rev() {
            prefix.push(first);
            rec(d, e - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        if e == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(d, e, &mut Vec::with_capacity(d), &mut out);
    out
}

/// The lift `x -> (x^α)` over all non-constant monomials of degree at most `t`.
#[derive(Clone, Debug)]
pub struct VeroneseImage {
    d: usize,
    t: u32,
    monomials: Vec<Monomial>,
}

impl VeroneseImage {
    pub fn new(d: usize, t: u32) -> Self {
        let monomials = (1..=t)
            .flat_map(|e| monomials_of_degree(d, e))
            .map(Monomial)
            .collect();
        VeroneseImage { d, t, monomials }
    }

    pub fn source_dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> u32 {
        self.t
    }

    /// Dimension of the image, `C(d + t, d) - 1`.
    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn lift(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.d {
            return Err(Error::Arity { expected: self.d, got: x.len() });
        }
        Ok(self
            .monomials
            .iter()
            .map(|m| {
                m.0.iter().zip(x).fold(Rational::one(), |acc, (&e, xi)| {
                    acc * num_traits::pow(xi.clone(), e as usize)
                })
            })
            .collect())
    }

    /// Float lift, computed incrementally: each monomial is a lower one times one variable.
    pub fn lift_f64(&self, x: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.d);
        out.clear();
        for m in &self.monomials {
            let v = m.0.iter().zip(x).fold(1.0, |acc, (&e, xi)| acc * xi.powi(e as i32));
            out.push(v);
        }
    }

    /// `c0 + Σ coeffs[i] * monomial_i`.
    pub fn polynomial(&self, c0: &Rational, coeffs: &[Rational]) -> Result<Polynomial> {
        if coeffs.len() != self.dim() {
            return Err(Error::Arity { expected: self.dim(), got: coeffs.len() });
        }
        let terms = std::iter::once((vec![0; self.d], c0.clone())).chain(
            self.monomials
                .iter()
                .zip(coeffs)
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m.0.clone(), c.clone())),
        );
        Polynomial::from_terms(self.d, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn plane_quadratic_lift() {
        let v = VeroneseImage::new(2, 2);
        let (a, b) = (int(3), ratio(1, 2));
        let got = v.lift(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(got, vec![a.clone(), b.clone(), &a * &a, &a * &b, &b * &b]);
    }

    #[test]
    fn dimension_formula() {
        for d in 1..5 {
            for t in 1..5 {
                assert_eq!(VeroneseImage::new(d, t).dim(), binom(d + t as usize, d) - 1);
            }
        }
    }

    proptest! {
        #[test]
        fn hyperplanes_pull_back(
            c0 in -5i64..5,
            coeffs in prop::collection::vec(-5i64..5, 9),
            x in prop::collection::vec(-4i64..4, 3),
        ) {
            // d = 3, t = 2 has 9 monomials
            let v = VeroneseImage::new(3, 2);
            let c: Vec<Rational> = coeffs.into_iter().map(int).collect();
            let x: Vec<Rational> = x.into_iter().map(int).collect();
            let p = v.polynomial(&int(c0), &c).unwrap();
            let lifted = v.lift(&x).unwrap();
            let h = lifted.iter().zip(&c).fold(int(c0), |acc, (l, ci)| acc + l * ci);
            prop_assert_eq!(p.eval(&x).unwrap(), h);
        }
    }
}
