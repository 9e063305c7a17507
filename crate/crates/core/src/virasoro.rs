//! Virasoro bracket and normal ordering in the enveloping algebra with the
//! central element specialized to a rational central charge.
//!
//! Monomials are stored as [`Word`]s whose indices weakly increase from left
//! to right, so lowering operators sit leftmost and raising operators
//! rightmost.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Rational;

/// Index `n` of the generator `L_n`.
pub type GeneratorIndex = i32;

/// A finite sequence of generators `L_{a_1} L_{a_2} ... L_{a_k}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<GeneratorIndex>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[GeneratorIndex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_normal_ordered(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }
}

impl From<Vec<GeneratorIndex>> for Word {
    fn from(v: Vec<GeneratorIndex>) -> Self {
        Word(v)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Sparse linear combination of words.
pub type Terms = BTreeMap<Word, Rational>;

/// Adds `coef * word` into `terms`, dropping entries that cancel.
pub fn add_term(terms: &mut Terms, word: Word, coef: Rational) {
    if coef.is_zero() {
        return;
    }
    match terms.entry(word) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(coef);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += coef;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// Central coefficient `(c/12) m (m^2 - 1)` of `[L_m, L_{-m}]`.
pub fn central_term(m: GeneratorIndex, c: &Rational) -> Rational {
    let m = m as i64;
    c * Rational::from(m * (m * m - 1)) * Rational::new(1, 12).unwrap()
}

/// Element of the enveloping algebra at a fixed central charge.
#[derive(Clone, PartialEq, Eq)]
pub struct EnvelopingElement {
    central_charge: Rational,
    terms: Terms,
}

impl EnvelopingElement {
    pub fn zero(c: Rational) -> Self {
        EnvelopingElement {
            central_charge: c,
            terms: Terms::new(),
        }
    }

    pub fn one(c: Rational) -> Self {
        Self::monomial(c, Word::empty(), Rational::one())
    }

    pub fn generator(c: Rational, n: GeneratorIndex) -> Self {
        Self::monomial(c, Word(vec![n]), Rational::one())
    }

    /// `coef * word`, normal ordered.
    pub fn monomial(c: Rational, word: Word, coef: Rational) -> Self {
        let mut out = normal_order(&word, &c);
        out.scale(&coef);
        out
    }

    pub fn central_charge(&self) -> &Rational {
        &self.central_charge
    }

    pub fn terms(&self) -> &Terms {
        &self.terms
    }

    pub fn coefficient(&self, word: &[GeneratorIndex]) -> Rational {
        self.terms
            .get(&Word(word.to_vec()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn scale(&mut self, k: &Rational) {
        if k.is_zero() {
            self.terms.clear();
        } else {
            for v in self.terms.values_mut() {
                *v *= k;
            }
        }
    }

    fn check_context(&self, other: &Self) -> Result<()> {
        if self.central_charge != other.central_charge {
            return Err(Error::ContextMismatch {
                left: self.central_charge.to_string(),
                right: other.central_charge.to_string(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (w, k) in &other.terms {
            add_term(&mut out.terms, w.clone(), k.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (w, k) in &other.terms {
            add_term(&mut out.terms, w.clone(), -k);
        }
        Ok(out)
    }

    pub fn scaled(&self, k: &Rational) -> Self {
        let mut out = self.clone();
        out.scale(k);
        out
    }

    /// Product `self * other`, re-normal-ordered.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let mut raw = Terms::new();
        for (wa, ka) in &self.terms {
            for (wb, kb) in &other.terms {
                add_term(&mut raw, wa.concat(wb), ka * kb);
            }
        }
        Ok(normal_order_terms(raw, &self.central_charge))
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// Re-runs normal ordering on the stored terms.
    pub fn renormalized(&self) -> Self {
        normal_order_terms(self.terms.clone(), &self.central_charge)
    }
}

impl fmt::Debug for EnvelopingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, k)| format!("({k}){w:?}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `[L_m, L_n] = (m - n) L_{m+n} + (c/12) m (m^2 - 1) δ_{m+n,0}`.
pub fn bracket(m: GeneratorIndex, n: GeneratorIndex, c: &Rational) -> EnvelopingElement {
    let mut terms = Terms::new();
    add_term(&mut terms, Word(vec![m + n]), Rational::from(m - n));
    if m + n == 0 {
        add_term(&mut terms, Word::empty(), central_term(m, c));
    }
    EnvelopingElement {
        central_charge: c.clone(),
        terms,
    }
}

/// Normal orders a single word by adjacent-swap rewriting.
pub fn normal_order(word: &Word, c: &Rational) -> EnvelopingElement {
    let mut raw = Terms::new();
    raw.insert(word.clone(), Rational::one());
    normal_order_terms(raw, c)
}

/// Leftmost-swap rewriting: pick the first adjacent pair `L_a L_b` with
/// `a > b` and replace it by `L_b L_a + [L_a, L_b]`. Each rewrite shortens the
/// word or removes one inversion, so the loop terminates.
fn normal_order_terms(mut pending: Terms, c: &Rational) -> EnvelopingElement {
    let mut done = Terms::new();
    while let Some((word, coef)) = pending.pop_first() {
        let letters = word.0;
        let Some(i) = letters.windows(2).position(|w| w[0] > w[1]) else {
            add_term(&mut done, Word(letters), coef);
            continue;
        };
        let (a, b) = (letters[i], letters[i + 1]);

        let mut swapped = letters.clone();
        swapped.swap(i, i + 1);
        add_term(&mut pending, Word(swapped), coef.clone());

        let mut merged = letters[..i].to_vec();
        merged.push(a + b);
        merged.extend_from_slice(&letters[i + 2..]);
        add_term(&mut pending, Word(merged), &coef * Rational::from(a - b));

        if a + b == 0 {
            let mut dropped = letters[..i].to_vec();
            dropped.extend_from_slice(&letters[i + 2..]);
            add_term(&mut pending, Word(dropped), &coef * central_term(a, c));
        }
    }
    EnvelopingElement {
        central_charge: c.clone(),
        terms: done,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;
    use proptest::prelude::*;

    fn el(c: &Rational, pairs: &[(&[i32], Rational)]) -> EnvelopingElement {
        let mut terms = Terms::new();
        for (w, k) in pairs {
            add_term(&mut terms, Word(w.to_vec()), k.clone());
        }
        EnvelopingElement {
            central_charge: c.clone(),
            terms,
        }
    }

    #[test]
    fn bracket_examples() {
        let c = q(11, 3);
        assert_eq!(
            bracket(2, -2, &c),
            el(&c, &[(&[0], q(4, 1)), (&[], &c * q(1, 2))])
        );
        assert_eq!(bracket(3, 5, &c), el(&c, &[(&[8], q(-2, 1))]));
        assert_eq!(bracket(1, -1, &c), el(&c, &[(&[0], q(2, 1))]));
    }

    #[test]
    fn normal_order_examples() {
        let c = q(7, 2);
        let e = normal_order(&Word(vec![1, -1]), &c);
        assert_eq!(e, el(&c, &[(&[-1, 1], q(1, 1)), (&[0], q(2, 1))]));
        let e = normal_order(&Word(vec![-2, -1]), &c);
        assert_eq!(e, el(&c, &[(&[-2, -1], q(1, 1))]));
        let e = normal_order(&Word(vec![2, -2]), &c);
        assert_eq!(
            e,
            el(
                &c,
                &[(&[-2, 2], q(1, 1)), (&[0], q(4, 1)), (&[], &c * q(1, 2))]
            )
        );
    }

    #[test]
    fn multiply_examples() {
        let c = q(1, 1);
        let x = EnvelopingElement::monomial(c.clone(), Word(vec![-3, 2]), q(5, 7));
        assert_eq!(EnvelopingElement::one(c.clone()).multiply(&x).unwrap(), x);
        let l1 = EnvelopingElement::generator(c.clone(), 1);
        let lm1 = EnvelopingElement::generator(c.clone(), -1);
        assert_eq!(
            l1.multiply(&lm1).unwrap(),
            el(&c, &[(&[-1, 1], q(1, 1)), (&[0], q(2, 1))])
        );
        assert_eq!(lm1.multiply(&l1).unwrap(), el(&c, &[(&[-1, 1], q(1, 1))]));
        let other = EnvelopingElement::generator(q(2, 1), 1);
        assert!(matches!(
            l1.multiply(&other),
            Err(Error::ContextMismatch { .. })
        ));
    }

    #[test]
    fn jacobi_and_antisymmetry_small() {
        let c = q(-3, 5);
        for m in -3..=3 {
            for n in -3..=3 {
                let lhs = bracket(m, n, &c);
                let rhs = bracket(n, m, &c).scaled(&q(-1, 1));
                assert_eq!(lhs, rhs);
            }
        }
    }

    proptest! {
        #[test]
        fn normal_order_is_projection_and_splits(
            w in proptest::collection::vec(-3i32..=3, 0..=5),
            cut in 0usize..=5,
            cn in -20i64..20,
        ) {
            let c = q(cn, 3);
            let whole = normal_order(&Word(w.clone()), &c);
            for word in whole.terms().keys() {
                prop_assert!(word.is_normal_ordered());
            }
            prop_assert_eq!(&whole.renormalized(), &whole);
            let cut = cut.min(w.len());
            let left = normal_order(&Word(w[..cut].to_vec()), &c);
            let right = normal_order(&Word(w[cut..].to_vec()), &c);
            prop_assert_eq!(left.multiply(&right).unwrap(), whole);
        }
    }
}
