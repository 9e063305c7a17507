//! The Verma module `V_{c,Δ}`.
//!
//! The canonical basis at level `n` is `L_{-i_1} ... L_{-i_k}|Δ⟩` with
//! `i_1 >= ... >= i_k > 0` (most negative index leftmost), labelled by the
//! partition `(i_1, ..., i_k)`. The opposite ordering
//! `L_{-i_k} ... L_{-i_1}|Δ⟩` is reachable through [`basis_change`].

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::engine::{Character, InducedModule};
use crate::exact::Rational;
use crate::linalg::Matrix;
use crate::virasoro::{GeneratorIndex, Terms, Word};

/// Weakly decreasing sequence of positive parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Partition with `multiplicities[i]` copies of `i + 1`.
    pub fn from_multiplicities(multiplicities: &[u32]) -> Self {
        let mut parts = Vec::new();
        for (i, &m) in multiplicities.iter().enumerate().rev() {
            parts.extend(std::iter::repeat_n(i as u32 + 1, m as usize));
        }
        Partition(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest_part(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    /// Multiplicity of each part size `1..=largest`, index 0 for part 1.
    pub fn multiplicities(&self) -> Vec<u32> {
        let mut m = vec![0; self.largest_part() as usize];
        for &p in &self.0 {
            m[p as usize - 1] += 1;
        }
        m
    }

    pub fn multiplicity(&self, part: u32) -> u32 {
        self.0.iter().filter(|&&p| p == part).count() as u32
    }

    /// Canonical-order word `[-i_1, ..., -i_k]`.
    pub fn to_word(&self) -> Word {
        Word(self.0.iter().map(|&p| -(p as GeneratorIndex)).collect())
    }

    /// Word of the opposite ordering `L_{-i_k} ... L_{-i_1}`.
    pub fn to_increasing_word(&self) -> Word {
        Word(
            self.0
                .iter()
                .rev()
                .map(|&p| -(p as GeneratorIndex))
                .collect(),
        )
    }

    pub fn from_word(word: &Word) -> Option<Self> {
        if !word.is_normal_ordered() || word.letters().iter().any(|&x| x >= 0) {
            return None;
        }
        Some(Partition(
            word.letters().iter().map(|&x| (-x) as u32).collect(),
        ))
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = String;
    fn try_from(parts: Vec<u32>) -> Result<Self, String> {
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(format!(
                "{parts:?} is not a weakly decreasing positive sequence"
            ));
        }
        Ok(Partition(parts))
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// All partitions of `level`, in reverse-lexicographic order.
pub fn enumerate_partitions(level: usize) -> Vec<Partition> {
    fn rec(remaining: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        for p in (1..=remaining.min(max)).rev() {
            prefix.push(p);
            rec(remaining - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(level as u32, level as u32, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct VermaContext {
    pub c: Rational,
    pub delta: Rational,
}

impl VermaContext {
    pub fn new(c: Rational, delta: Rational) -> Self {
        VermaContext { c, delta }
    }
}

struct HighestWeight {
    ctx: VermaContext,
}

impl Character for HighestWeight {
    fn central_charge(&self) -> &Rational {
        &self.ctx.c
    }

    fn is_basis_letter(&self, i: GeneratorIndex) -> bool {
        i < 0
    }

    fn value(&self, i: GeneratorIndex) -> Rational {
        if i == 0 {
            self.ctx.delta.clone()
        } else {
            Rational::zero()
        }
    }
}

/// Vector in `V_{c,Δ}` expanded in the canonical basis; may mix levels.
#[derive(Clone, PartialEq, Eq)]
pub struct VermaVector {
    context: VermaContext,
    terms: BTreeMap<Partition, Rational>,
}

impl VermaVector {
    pub fn zero(context: VermaContext) -> Self {
        VermaVector {
            context,
            terms: BTreeMap::new(),
        }
    }

    pub fn highest_weight(context: VermaContext) -> Self {
        Self::basis(context, Partition::empty())
    }

    pub fn basis(context: VermaContext, p: Partition) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(p, Rational::one());
        VermaVector { context, terms }
    }

    pub fn from_terms(
        context: VermaContext,
        terms: impl IntoIterator<Item = (Partition, Rational)>,
    ) -> Self {
        let mut v = Self::zero(context);
        for (p, k) in terms {
            v.add_term(p, k);
        }
        v
    }

    pub fn context(&self) -> &VermaContext {
        &self.context
    }

    pub fn terms(&self) -> &BTreeMap<Partition, Rational> {
        &self.terms
    }

    pub fn coefficient(&self, p: &Partition) -> Rational {
        self.terms.get(p).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, p: Partition, k: Rational) {
        if k.is_zero() {
            return;
        }
        match self.terms.entry(p) {
            Entry::Vacant(e) => {
                e.insert(k);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += k;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &VermaVector) -> VermaVector {
        let mut out = self.clone();
        for (p, k) in &other.terms {
            out.add_term(p.clone(), k.clone());
        }
        out
    }

    pub fn sub(&self, other: &VermaVector) -> VermaVector {
        self.add(&other.scaled(&-Rational::one()))
    }

    pub fn scaled(&self, k: &Rational) -> VermaVector {
        if k.is_zero() {
            return VermaVector::zero(self.context.clone());
        }
        VermaVector {
            context: self.context.clone(),
            terms: self.terms.iter().map(|(p, v)| (p.clone(), v * k)).collect(),
        }
    }

    pub fn max_level(&self) -> Option<usize> {
        self.terms.keys().map(Partition::level).max()
    }

    /// Component of a single level.
    pub fn level_component(&self, level: usize) -> VermaVector {
        VermaVector {
            context: self.context.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.level() == level)
                .map(|(p, k)| (p.clone(), k.clone()))
                .collect(),
        }
    }

    pub fn truncated(&self, max_level: usize) -> VermaVector {
        VermaVector {
            context: self.context.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.level() <= max_level)
                .map(|(p, k)| (p.clone(), k.clone()))
                .collect(),
        }
    }

    /// Coefficients at `level` in the order of [`enumerate_partitions`].
    pub fn level_coordinates(&self, level: usize) -> Vec<Rational> {
        enumerate_partitions(level)
            .iter()
            .map(|p| self.coefficient(p))
            .collect()
    }

    fn to_word_terms(&self) -> Terms {
        self.terms
            .iter()
            .map(|(p, k)| (p.to_word(), k.clone()))
            .collect()
    }

    fn from_word_terms(context: VermaContext, terms: Terms) -> Self {
        VermaVector {
            context,
            terms: terms
                .into_iter()
                .map(|(w, k)| (Partition::from_word(&w).expect("canonical Verma word"), k))
                .collect(),
        }
    }
}

impl fmt::Debug for VermaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(p, k)| format!("({k}){p:?}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A Verma module with memoized generator action, basis changes and Gram
/// matrices.
pub struct VermaModule {
    ctx: VermaContext,
    engine: InducedModule<HighestWeight>,
    basis_changes: Mutex<HashMap<usize, Arc<Matrix>>>,
    pub(crate) grams: Mutex<HashMap<usize, Arc<crate::shapovalov::GramMatrix>>>,
}

impl VermaModule {
    /// A fresh module with empty caches.
    pub fn new(ctx: VermaContext) -> Self {
        VermaModule {
            engine: InducedModule::new(HighestWeight { ctx: ctx.clone() }),
            ctx,
            basis_changes: Mutex::new(HashMap::new()),
            grams: Mutex::new(HashMap::new()),
        }
    }

    /// Process-wide module for `ctx`, shared between calls.
    pub fn shared(ctx: &VermaContext) -> Arc<VermaModule> {
        static REGISTRY: OnceLock<Mutex<HashMap<VermaContext, Arc<VermaModule>>>> = OnceLock::new();
        let registry = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        registry
            .lock()
            .entry(ctx.clone())
            .or_insert_with(|| Arc::new(VermaModule::new(ctx.clone())))
            .clone()
    }

    pub fn context(&self) -> &VermaContext {
        &self.ctx
    }

    /// `L_m` applied to a basis vector.
    pub fn act_basis(&self, m: GeneratorIndex, p: &Partition) -> VermaVector {
        let terms = self.engine.left_mul(m, &p.to_word());
        VermaVector::from_word_terms(self.ctx.clone(), (*terms).clone())
    }

    pub fn act(&self, m: GeneratorIndex, v: &VermaVector) -> VermaVector {
        debug_assert_eq!(v.context, self.ctx);
        let out = self.engine.act(m, &v.to_word_terms());
        VermaVector::from_word_terms(self.ctx.clone(), out)
    }

    /// Applies the word `L_{x_1} ... L_{x_n}` (rightmost first).
    pub fn act_word(&self, word: &[GeneratorIndex], v: &VermaVector) -> VermaVector {
        let out = self.engine.act_word(word, &v.to_word_terms());
        VermaVector::from_word_terms(self.ctx.clone(), out)
    }

    /// `L_{-i_k} ... L_{-i_1}|Δ⟩` expanded in the canonical basis.
    pub fn increasing_basis_vector(&self, p: &Partition) -> VermaVector {
        let hw = VermaVector::highest_weight(self.ctx.clone());
        self.act_word(p.to_increasing_word().letters(), &hw)
    }

    /// Row `μ` holds the canonical coordinates of the increasing-order
    /// monomial labelled by `μ`; rows and columns follow
    /// [`enumerate_partitions`].
    pub fn basis_change(&self, level: usize) -> Arc<Matrix> {
        if let Some(m) = self.basis_changes.lock().get(&level) {
            return m.clone();
        }
        let basis = enumerate_partitions(level);
        let rows = basis
            .iter()
            .map(|p| self.increasing_basis_vector(p).level_coordinates(level))
            .collect();
        let m = Arc::new(Matrix::from_rows(rows));
        self.basis_changes.lock().insert(level, m.clone());
        m
    }
}

pub fn act(m: GeneratorIndex, v: &VermaVector) -> VermaVector {
    VermaModule::shared(v.context()).act(m, v)
}

pub fn basis_change(level: usize, ctx: &VermaContext) -> Arc<Matrix> {
    VermaModule::shared(ctx).basis_change(level)
}

/// Exact number of partitions of `n`, by the standard recurrence on the
/// largest part. Independent of [`enumerate_partitions`].
pub fn partition_count(n: usize) -> u64 {
    let mut table = vec![0u64; n + 1];
    table[0] = 1;
    for part in 1..=n {
        for total in part..=n {
            table[total] += table[total - part];
        }
    }
    table[n]
}
