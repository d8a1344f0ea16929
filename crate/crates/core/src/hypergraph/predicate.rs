use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Polynomial, Sign};

/// A subset of `{-1, 0, +1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignSet(u8);

impl SignSet {
    pub const NEG: SignSet = SignSet(1);
    pub const ZERO: SignSet = SignSet(2);
    pub const POS: SignSet = SignSet(4);
    pub const NONZERO: SignSet = SignSet(5);
    pub const NONNEG: SignSet = SignSet(6);
    pub const NONPOS: SignSet = SignSet(3);

    pub fn of(signs: &[Sign]) -> Self {
        SignSet(signs.iter().fold(0, |m, &s| m | Self::bit(s)))
    }

    fn bit(s: Sign) -> u8 {
        1 << (s + 1) as u8
    }

    pub fn contains(self, s: Sign) -> bool {
        self.0 & Self::bit(s) != 0
    }

    pub fn signs(self) -> Vec<Sign> {
        [-1, 0, 1].into_iter().filter(|&s| self.contains(s)).collect()
    }
}

impl Serialize for SignSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.signs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SignSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i8>::deserialize(d)?;
        if let Some(bad) = v.iter().find(|s| !(-1..=1).contains(*s)) {
            return Err(serde::de::Error::custom(format!("sign {bad} not in {{-1,0,1}}")));
        }
        Ok(SignSet::of(&v))
    }
}

/// Boolean formula over polynomial signs. `And([])` is true, `Or([])` is false.
///
/// `Xor` is n-ary parity; it keeps stripe predicates linear in size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Formula {
    Atom { poly: usize, signs: SignSet },
    And { args: Vec<Formula> },
    Or { args: Vec<Formula> },
    Not { arg: Box<Formula> },
    Xor { args: Vec<Formula> },
}

impl Formula {
    pub fn atom(poly: usize, signs: SignSet) -> Self {
        Formula::Atom { poly, signs }
    }

    pub fn and(args: Vec<Formula>) -> Self {
        Formula::And { args }
    }

    pub fn or(args: Vec<Formula>) -> Self {
        Formula::Or { args }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(arg: Formula) -> Self {
        Formula::Not { arg: Box::new(arg) }
    }

    pub fn xor(args: Vec<Formula>) -> Self {
        Formula::Xor { args }
    }

    pub fn truth() -> Self {
        Formula::And { args: vec![] }
    }

    /// Evaluates lazily; `sign(r)` is only called for atoms actually reached.
    pub fn eval<F: FnMut(usize) -> Sign>(&self, sign: &mut F) -> bool {
        match self {
            Formula::Atom { poly, signs } => signs.contains(sign(*poly)),
            Formula::And { args } => args.iter().all(|a| a.eval(sign)),
            Formula::Or { args } => args.iter().any(|a| a.eval(sign)),
            Formula::Not { arg } => !arg.eval(sign),
            Formula::Xor { args } => args.iter().fold(false, |acc, a| acc ^ a.eval(sign)),
        }
    }

    pub fn max_atom(&self) -> Option<usize> {
        match self {
            Formula::Atom { poly, .. } => Some(*poly),
            Formula::And { args } | Formula::Or { args } | Formula::Xor { args } => {
                args.iter().filter_map(Formula::max_atom).max()
            }
            Formula::Not { arg } => arg.max_atom(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPredicate {
    pub polys: Vec<Polynomial>,
    pub formula: Formula,
}

impl SignPredicate {
    pub fn new(polys: Vec<Polynomial>, formula: Formula) -> Result<Self> {
        let p = SignPredicate { polys, formula };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.formula.max_atom() {
            if r >= self.polys.len() {
                return Err(Error::Input(format!(
                    "formula references polynomial {r}, only {} given",
                    self.polys.len()
                )));
            }
        }
        if let Some(first) = self.polys.first() {
            if let Some(bad) = self.polys.iter().find(|p| p.arity() != first.arity()) {
                return Err(Error::Arity { expected: first.arity(), got: bad.arity() });
            }
        }
        Ok(())
    }

    /// Sum of the degrees of the defining polynomials.
    pub fn total_degree(&self) -> u32 {
        self.polys.iter().map(Polynomial::degree).sum()
    }

    pub fn arity(&self) -> Option<usize> {
        self.polys.first().map(Polynomial::arity)
    }

    pub fn eval_signs(&self, signs: &[Sign]) -> bool {
        self.formula.eval(&mut |r| signs[r])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    #[test]
    fn formula_json_shape() {
        let f = Formula::or(vec![
            Formula::atom(0, SignSet::ZERO),
            Formula::not(Formula::atom(1, SignSet::NONNEG)),
        ]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"op":"or","args":[{"op":"atom","poly":0,"signs":[0]},{"op":"not","arg":{"op":"atom","poly":1,"signs":[0,1]}}]}"#
        );
        assert_eq!(serde_json::from_str::<Formula>(&s).unwrap(), f);
    }

    #[test]
    fn empty_connectives() {
        assert!(Formula::truth().eval(&mut |_| 0));
        assert!(!Formula::or(vec![]).eval(&mut |_| 0));
    }

    #[test]
    fn rejects_dangling_atom() {
        let p = Polynomial::constant(2, int(1));
        assert!(SignPredicate::new(vec![p], Formula::atom(1, SignSet::POS)).is_err());
    }

    proptest! {
        #[test]
        fn total_degree_ignores_order(degs in prop::collection::vec(0u32..5, 0..6), seed in 0u64..1000) {
            let polys: Vec<Polynomial> = degs.iter()
                .map(|&e| Polynomial::from_terms(1, [(vec![e], int(1))]).unwrap())
                .collect();
            let mut shuffled = polys.clone();
            let n = shuffled.len();
            if n > 1 {
                shuffled.rotate_left((seed as usize) % n);
                shuffled.swap(0, n - 1);
            }
            let a = SignPredicate::new(polys, Formula::truth()).unwrap();
            let b = SignPredicate::new(shuffled, Formula::truth()).unwrap();
            prop_assert_eq!(a.total_degree(), b.total_degree());
            prop_assert_eq!(a.total_degree(), degs.iter().sum::<u32>());
        }

        #[test]
        fn xor_is_parity(bits in prop::collection::vec(any::<bool>(), 0..8)) {
            let f = Formula::xor((0..bits.len()).map(|i| Formula::atom(i, SignSet::POS)).collect());
            let got = f.eval(&mut |r| if bits[r] { 1 } else { -1 });
            prop_assert_eq!(got, bits.iter().filter(|&&b| b).count() % 2 == 1);
        }
    }
}
