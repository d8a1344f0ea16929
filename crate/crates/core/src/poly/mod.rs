//! Sparse multivariate polynomials with exact rational coefficients.

mod compiled;
mod veronese;

pub use compiled::{compile_single, CompiledPoly, ScaledPoints};
pub use veronese::{monomials_of_degree, VeroneseImage};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, sign_of, Rational};

/// Sign of a value: -1, 0 or +1.
pub type Sign = i8;

/// Exponent vector. Ordered by total degree, then descending lexicographically,
/// so that `a, b, a^2, ab, b^2` is increasing for two variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(arity: usize) -> Self {
        Monomial(vec![0; arity])
    }

    pub fn var(arity: usize, i: usize) -> Self {
        let mut e = vec![0; arity];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn degree_in(&self, vars: std::ops::Range<usize>) -> u32 {
        self.0[vars].iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    arity: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(arity: usize) -> Self {
        Polynomial { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, c: Rational) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(Monomial::one(arity), c);
        p
    }

    pub fn var(arity: usize, i: usize) -> Self {
        assert!(i < arity, "variable {i} out of range for arity {arity}");
        let mut p = Self::zero(arity);
        p.add_term(Monomial::var(arity, i), Rational::one());
        p
    }

    pub fn from_terms(
        arity: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self> {
        let mut p = Self::zero(arity);
        for (e, c) in terms {
            if e.len() != arity {
                return Err(Error::Arity { expected: arity, got: e.len() });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, vars: std::ops::Range<usize>) -> u32 {
        self.terms
            .keys()
            .map(|m| m.degree_in(vars.clone()))
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.arity);
        }
        Polynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.arity, Rational::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    fn check_arity(&self, got: usize) -> Result<()> {
        if got != self.arity {
            return Err(Error::Arity { expected: self.arity, got });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational> {
        self.check_arity(x.len())?;
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_sign(&self, x: &[Rational]) -> Result<Sign> {
        Ok(sign_of(&self.eval(x)?))
    }

    /// Floating point evaluation, no guarantees on the sign.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(x)
                    .fold(crate::rational::to_f64(c), |t, (&e, xi)| t * xi.powi(e as i32))
            })
            .sum()
    }

    /// Reinterprets the variables as positions `offset..offset+arity` of a
    /// polynomial with `new_arity` variables.
    pub fn embed(&self, new_arity: usize, offset: usize) -> Self {
        assert!(offset + self.arity <= new_arity);
        let mut p = Self::zero(new_arity);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_arity];
            e[offset..offset + self.arity].copy_from_slice(&m.0);
            p.add_term(Monomial(e), c.clone());
        }
        p
    }

    /// Replaces variable `i` by `subs[i]`; all substitutes share one arity.
    pub fn substitute(&self, subs: &[Polynomial]) -> Result<Self> {
        self.check_arity(subs.len())?;
        let target = subs.first().map(|s| s.arity).unwrap_or(0);
        if let Some(bad) = subs.iter().find(|s| s.arity != target) {
            return Err(Error::Arity { expected: target, got: bad.arity });
        }
        let mut powers: Vec<Vec<Polynomial>> = subs
            .iter()
            .map(|s| vec![Polynomial::constant(target, Rational::one()), s.clone()])
            .collect();
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &subs[i];
                    powers[i].push(next);
                }
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermJson {
                    exp: m.0.clone(),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i > 0 {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            } else if neg {
                write!(f, "-")?;
            }
            let a = c.abs();
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| if e == 1 { format!("x{v}") } else { format!("x{v}^{e}") })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", format_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&a), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a> std::ops::$tr<&'a Polynomial> for &'a Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &'a Polynomial) -> Polynomial {
                assert_eq!(self.arity, rhs.arity, "polynomial arity mismatch");
                let f: fn(&Polynomial, &Polynomial) -> Polynomial = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                std::ops::$tr::$method(&self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let mut p = a.clone();
    for (m, c) in &b.terms {
        p.add_term(m.clone(), c.clone());
    }
    p
});

binop!(Sub, sub, |a, b| {
    let mut p = a.clone();
    for (m, c) in &b.terms {
        p.add_term(m.clone(), -c.clone());
    }
    p
});

binop!(Mul, mul, |a, b| {
    let mut p = Polynomial::zero(a.arity);
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            p.add_term(ma.mul(mb), ca * cb);
        }
    }
    p
});

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

/// Wire form of a polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub arity: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub num: String,
    pub den: String,
}

impl TryFrom<PolyJson> for Polynomial {
    type Error = Error;
    fn try_from(j: PolyJson) -> Result<Self> {
        let terms = j
            .terms
            .into_iter()
            .map(|t| {
                let c = parse_rational(&format!("{}/{}", t.num, t.den))?;
                Ok((t.exp, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Polynomial::from_terms(j.arity, terms)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolyJson::deserialize(d)?;
        Polynomial::try_from(j).map_err(serde::de::Error::custom)
    }
}
