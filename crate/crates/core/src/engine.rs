//! PBW left multiplication in a module induced from a one-dimensional
//! representation of a Virasoro subalgebra.
//!
//! A [`Character`] splits the generators into *basis letters* (kept in PBW
//! monomials, ordered by index) and *subalgebra letters*, which act on the
//! generating vector by a scalar. Verma modules (subalgebra `L_{n>=0}`) and
//! the universal Whittaker modules are both instances.
//!
//! `left_mul(a, w)` computes `L_a · L_w|v⟩` for a PBW-ordered basis word `w`
//! by migrating `L_a` one letter at a time:
//!
//! ```text
//! L_a L_b w' = L_b (L_a w') + (a - b) L_{a+b} w' + δ_{a+b,0} (c/12)(a^3 - a) w'
//! ```
//!
//! Every branch either has fewer letters than `L_a L_b w'` or is the leading
//! PBW monomial, which `L_b` prefixes without further rewriting, so the
//! recursion is well founded. Results are memoized per `(a, w)`.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;

use crate::exact::Rational;
use crate::virasoro::{add_term, central_term, GeneratorIndex, Terms, Word};

pub trait Character: Send + Sync {
    fn central_charge(&self) -> &Rational;

    /// Whether `L_i` is a PBW basis letter (as opposed to a subalgebra letter).
    fn is_basis_letter(&self, i: GeneratorIndex) -> bool;

    /// Scalar by which a subalgebra letter acts on the generating vector.
    fn value(&self, i: GeneratorIndex) -> Rational;
}

pub struct InducedModule<C: Character> {
    character: C,
    cache: RwLock<HashMap<(GeneratorIndex, Word), Arc<Terms>>>,
}

impl<C: Character> InducedModule<C> {
    pub fn new(character: C) -> Self {
        InducedModule {
            character,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn character(&self) -> &C {
        &self.character
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().len()
    }

    /// `L_a` applied to the basis vector `L_w|v⟩`.
    pub fn left_mul(&self, a: GeneratorIndex, w: &Word) -> Arc<Terms> {
        let key = (a, w.clone());
        if let Some(hit) = self.cache.read().get(&key) {
            return hit.clone();
        }
        let out = Arc::new(self.left_mul_uncached(a, w));
        self.cache.write().insert(key, out.clone());
        out
    }

    fn left_mul_uncached(&self, a: GeneratorIndex, w: &Word) -> Terms {
        let ch = &self.character;
        let mut out = Terms::new();
        let letters = w.letters();
        let basis_a = ch.is_basis_letter(a);
        match letters.first() {
            None => {
                if basis_a {
                    out.insert(Word(vec![a]), Rational::one());
                } else {
                    add_term(&mut out, Word::empty(), ch.value(a));
                }
            }
            Some(&b) if basis_a && a <= b => {
                let mut prefixed = Vec::with_capacity(letters.len() + 1);
                prefixed.push(a);
                prefixed.extend_from_slice(letters);
                out.insert(Word(prefixed), Rational::one());
            }
            Some(&b) => {
                let rest = Word(letters[1..].to_vec());
                for (u, k) in self.left_mul(a, &rest).iter() {
                    for (v, k2) in self.left_mul(b, u).iter() {
                        add_term(&mut out, v.clone(), k * k2);
                    }
                }
                if a != b {
                    let k = Rational::from(a - b);
                    for (v, k2) in self.left_mul(a + b, &rest).iter() {
                        add_term(&mut out, v.clone(), &k * k2);
                    }
                }
                if a + b == 0 {
                    add_term(&mut out, rest, central_term(a, ch.central_charge()));
                }
            }
        }
        out
    }

    /// `L_a` applied to a linear combination of basis vectors.
    pub fn act(&self, a: GeneratorIndex, v: &Terms) -> Terms {
        let mut out = Terms::new();
        for (w, k) in v {
            for (u, k2) in self.left_mul(a, w).iter() {
                add_term(&mut out, u.clone(), k * k2);
            }
        }
        out
    }

    /// The word `L_{x_1} ... L_{x_n}` applied to `v` (rightmost letter first).
    pub fn act_word(&self, word: &[GeneratorIndex], v: &Terms) -> Terms {
        word.iter()
            .rev()
            .fold(v.clone(), |acc, &a| self.act(a, &acc))
    }
}
