//! Universal Whittaker modules `W_ψ` for the subalgebras
//! `span{L_r, L_{r+1}, ...}` and `span{L_1, L_n, L_{n+1}, ...}`.
//!
//! Vectors are expanded on PBW monomials `L_λ|w⟩` whose letters lie outside
//! the subalgebra, written in weakly increasing order. The action is the
//! generic induced-module rewriting of [`crate::engine`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use parking_lot::Mutex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Character, InducedModule};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::forms::{WhittakerType, WhittakerType1N, WhittakerTypeR};
use crate::linalg::Matrix;
use crate::par;
use crate::verma::enumerate_partitions;
use crate::virasoro::{add_term, GeneratorIndex, Terms, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    OrderR { r: u32 },
    Pair1N { n: u32 },
}

impl Variant {
    pub fn of(ty: &WhittakerType) -> Self {
        match ty {
            WhittakerType::Order(t) => Variant::OrderR { r: t.r() },
            WhittakerType::Pair(t) => Variant::Pair1N { n: t.n() },
        }
    }

    /// Whether `L_i` may appear in a basis monomial.
    pub fn allows(&self, i: GeneratorIndex) -> bool {
        match *self {
            Variant::OrderR { r } => i < r as GeneratorIndex,
            Variant::Pair1N { n } => i <= 0 || (2..n as GeneratorIndex).contains(&i),
        }
    }

    pub fn order(&self) -> u32 {
        match *self {
            Variant::OrderR { r } => r,
            Variant::Pair1N { n } => n,
        }
    }
}

/// Label of the basis monomial `L_λ|w⟩`: letters in weakly increasing order.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PseudoPartitionJson", into = "PseudoPartitionJson")]
pub struct PseudoPartition {
    variant: Variant,
    letters: Vec<GeneratorIndex>,
}

impl PseudoPartition {
    pub fn new(variant: Variant, mut letters: Vec<GeneratorIndex>) -> Result<Self> {
        if let Some(bad) = letters.iter().find(|&&i| !variant.allows(i)) {
            return Err(Error::InvalidArgument(format!(
                "L_{bad} is not a basis letter for {variant:?}"
            )));
        }
        letters.sort_unstable();
        Ok(PseudoPartition { variant, letters })
    }

    pub fn empty(variant: Variant) -> Self {
        PseudoPartition {
            variant,
            letters: Vec::new(),
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn letters(&self) -> &[GeneratorIndex] {
        &self.letters
    }

    pub fn word(&self) -> Word {
        Word(self.letters.clone())
    }

    pub fn count(&self, i: GeneratorIndex) -> u32 {
        self.letters.iter().filter(|&&x| x == i).count() as u32
    }

    /// `#λ`: number of nonnegative letters.
    pub fn length(&self) -> usize {
        self.letters.iter().filter(|&&i| i >= 0).count()
    }

    /// `|λ|`: minus the sum of the negative letters.
    pub fn level(&self) -> usize {
        self.letters
            .iter()
            .filter(|&&i| i < 0)
            .map(|&i| (-i) as usize)
            .sum()
    }

    /// Smallest nonnegative letter, or the variant's order when there is none.
    pub fn l_lambda(&self) -> u32 {
        self.letters
            .iter()
            .find(|&&i| i >= 0)
            .map_or(self.variant.order(), |&i| i as u32)
    }

    pub fn minus(&self) -> PseudoPartition {
        PseudoPartition {
            variant: self.variant,
            letters: self.letters.iter().copied().filter(|&i| i < 0).collect(),
        }
    }

    pub fn plus(&self) -> PseudoPartition {
        PseudoPartition {
            variant: self.variant,
            letters: self.letters.iter().copied().filter(|&i| i >= 0).collect(),
        }
    }

    fn from_word(variant: Variant, w: &Word) -> Self {
        PseudoPartition {
            variant,
            letters: w.letters().to_vec(),
        }
    }
}

impl Ord for PseudoPartition {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.variant, self.level(), self.length(), &self.letters).cmp(&(
            other.variant,
            other.level(),
            other.length(),
            &other.letters,
        ))
    }
}

impl PartialOrd for PseudoPartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PseudoPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "|w⟩");
        }
        let ls: Vec<String> = self.letters.iter().map(|i| format!("L_{i}")).collect();
        write!(f, "{}|w⟩", ls.join(" "))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PseudoPartitionJson {
    variant: Variant,
    counts: Vec<CountJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CountJson {
    index: GeneratorIndex,
    multiplicity: u32,
}

impl TryFrom<PseudoPartitionJson> for PseudoPartition {
    type Error = Error;
    fn try_from(j: PseudoPartitionJson) -> Result<Self> {
        let letters = j
            .counts
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.index, c.multiplicity as usize))
            .collect();
        PseudoPartition::new(j.variant, letters)
    }
}

impl From<PseudoPartition> for PseudoPartitionJson {
    fn from(p: PseudoPartition) -> Self {
        let mut counts: BTreeMap<GeneratorIndex, u32> = BTreeMap::new();
        for &i in &p.letters {
            *counts.entry(i).or_default() += 1;
        }
        PseudoPartitionJson {
            variant: p.variant,
            counts: counts
                .into_iter()
                .map(|(index, multiplicity)| CountJson {
                    index,
                    multiplicity,
                })
                .collect(),
        }
    }
}

struct WhittakerCharacter {
    ty: WhittakerType,
    variant: Variant,
    c: Rational,
}

impl Character for WhittakerCharacter {
    fn central_charge(&self) -> &Rational {
        &self.c
    }

    fn is_basis_letter(&self, i: GeneratorIndex) -> bool {
        self.variant.allows(i)
    }

    fn value(&self, i: GeneratorIndex) -> Rational {
        self.ty.value(i).expect("subalgebra letter")
    }
}

/// Vector of `W_ψ`. Zero coefficients are not stored.
#[derive(Clone, PartialEq, Eq)]
pub struct UniversalVector {
    ty: WhittakerType,
    c: Rational,
    terms: Terms,
}

impl UniversalVector {
    pub fn zero(ty: WhittakerType, c: Rational) -> Self {
        UniversalVector {
            ty,
            c,
            terms: Terms::new(),
        }
    }

    /// The generating vector `|w⟩`.
    pub fn vacuum(ty: WhittakerType, c: Rational) -> Self {
        Self::basis(ty, c, Word::empty())
    }

    fn basis(ty: WhittakerType, c: Rational, w: Word) -> Self {
        let mut terms = Terms::new();
        terms.insert(w, Rational::one());
        UniversalVector { ty, c, terms }
    }

    /// `Σ k · L_{x_1} ... L_{x_m}|w⟩` for arbitrary (not necessarily ordered)
    /// words, reduced to the PBW basis.
    pub fn from_monomials(
        ty: WhittakerType,
        c: Rational,
        monomials: impl IntoIterator<Item = (Vec<GeneratorIndex>, Rational)>,
    ) -> Self {
        let module = UniversalModule::shared(&ty, &c);
        let vacuum = Self::vacuum(ty.clone(), c.clone());
        let mut out = Self::zero(ty, c);
        for (word, k) in monomials {
            out = out.add(&module.act_word(&word, &vacuum).scaled(&k));
        }
        out
    }

    pub fn ty(&self) -> &WhittakerType {
        &self.ty
    }

    pub fn central_charge(&self) -> &Rational {
        &self.c
    }

    pub fn variant(&self) -> Variant {
        Variant::of(&self.ty)
    }

    /// Terms in pseudo-partition order.
    pub fn terms(&self) -> Vec<(PseudoPartition, Rational)> {
        let v = self.variant();
        let mut out: Vec<_> = self
            .terms
            .iter()
            .map(|(w, k)| (PseudoPartition::from_word(v, w), k.clone()))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn coefficient(&self, letters: &[GeneratorIndex]) -> Rational {
        let mut sorted = letters.to_vec();
        sorted.sort_unstable();
        self.terms
            .get(&Word(sorted))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &UniversalVector) -> UniversalVector {
        let mut out = self.clone();
        for (w, k) in &other.terms {
            add_term(&mut out.terms, w.clone(), k.clone());
        }
        out
    }

    pub fn sub(&self, other: &UniversalVector) -> UniversalVector {
        self.add(&other.scaled(&-Rational::one()))
    }

    pub fn scaled(&self, k: &Rational) -> UniversalVector {
        let mut out = Self::zero(self.ty.clone(), self.c.clone());
        for (w, x) in &self.terms {
            add_term(&mut out.terms, w.clone(), x * k);
        }
        out
    }

    /// Largest level among the terms (`max`), `None` for the zero vector.
    pub fn max_level(&self) -> Option<usize> {
        self.terms().iter().map(|(p, _)| p.level()).max()
    }

    /// Largest length among the terms (`max^#`), `None` for the zero vector.
    pub fn max_length(&self) -> Option<usize> {
        self.terms().iter().map(|(p, _)| p.length()).max()
    }

    pub fn to_json(&self) -> UniversalVectorJson {
        UniversalVectorJson {
            ty: self.ty.clone(),
            c: self.c.clone(),
            terms: self
                .terms()
                .into_iter()
                .map(|(pseudo_partition, coefficient)| UniversalTermJson {
                    pseudo_partition,
                    coefficient,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &UniversalVectorJson) -> Result<Self> {
        let variant = Variant::of(&j.ty);
        let mut out = Self::zero(j.ty.clone(), j.c.clone());
        for t in &j.terms {
            if t.pseudo_partition.variant != variant {
                return Err(Error::InvalidArgument(format!(
                    "term {:?} does not belong to {variant:?}",
                    t.pseudo_partition
                )));
            }
            add_term(
                &mut out.terms,
                t.pseudo_partition.word(),
                t.coefficient.clone(),
            );
        }
        Ok(out)
    }
}

impl fmt::Debug for UniversalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .iter()
            .map(|(p, k)| format!("({k}){p:?}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalVectorJson {
    #[serde(rename = "type")]
    pub ty: WhittakerType,
    pub c: Rational,
    pub terms: Vec<UniversalTermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalTermJson {
    pub pseudo_partition: PseudoPartition,
    pub coefficient: Rational,
}

/// `W_ψ` at central charge `c`, with memoized generator action.
pub struct UniversalModule {
    engine: InducedModule<WhittakerCharacter>,
}

impl UniversalModule {
    pub fn new(ty: &WhittakerType, c: &Rational) -> Self {
        UniversalModule {
            engine: InducedModule::new(WhittakerCharacter {
                variant: Variant::of(ty),
                ty: ty.clone(),
                c: c.clone(),
            }),
        }
    }

    /// Process-wide module for `(ψ, c)`.
    pub fn shared(ty: &WhittakerType, c: &Rational) -> Arc<UniversalModule> {
        type Registry = Mutex<HashMap<(WhittakerType, Rational), Arc<UniversalModule>>>;
        static REGISTRY: OnceLock<Registry> = OnceLock::new();
        REGISTRY
            .get_or_init(|| Mutex::new(HashMap::new()))
            .lock()
            .entry((ty.clone(), c.clone()))
            .or_insert_with(|| Arc::new(UniversalModule::new(ty, c)))
            .clone()
    }

    pub fn ty(&self) -> &WhittakerType {
        &self.engine.character().ty
    }

    pub fn act(&self, m: GeneratorIndex, v: &UniversalVector) -> UniversalVector {
        debug_assert_eq!(&v.ty, self.ty());
        UniversalVector {
            ty: v.ty.clone(),
            c: v.c.clone(),
            terms: self.engine.act(m, &v.terms),
        }
    }

    /// Applies `L_{x_1} ... L_{x_n}` (rightmost first).
    pub fn act_word(&self, word: &[GeneratorIndex], v: &UniversalVector) -> UniversalVector {
        UniversalVector {
            ty: v.ty.clone(),
            c: v.c.clone(),
            terms: self.engine.act_word(word, &v.terms),
        }
    }
}

pub fn act_universal(m: GeneratorIndex, v: &UniversalVector) -> UniversalVector {
    UniversalModule::shared(&v.ty, &v.c).act(m, v)
}

fn subalgebra_order(ty: &WhittakerType) -> GeneratorIndex {
    match ty {
        WhittakerType::Order(t) => t.r() as GeneratorIndex,
        WhittakerType::Pair(t) => t.n() as GeneratorIndex,
    }
}

/// `(L_m - ψ(L_m)) v`.
pub fn dot_act(m: GeneratorIndex, v: &UniversalVector) -> Result<UniversalVector> {
    let Some(psi) = v.ty.value(m) else {
        return Err(Error::IndexOutsideSubalgebra {
            m,
            order: subalgebra_order(&v.ty),
        });
    };
    Ok(act_universal(m, v).sub(&v.scaled(&psi)))
}

const NILPOTENCY_LIMIT: usize = 10_000;

/// Least `k` with `(L_m ·)^k v = 0`; zero for the zero vector.
pub fn nilpotency_index(m: GeneratorIndex, v: &UniversalVector) -> Result<usize> {
    let mut current = v.clone();
    for k in 0..NILPOTENCY_LIMIT {
        if current.is_zero() {
            return Ok(k);
        }
        current = dot_act(m, &current)?;
    }
    Err(Error::InvalidArgument(format!(
        "dot action of L_{m} not nilpotent within {NILPOTENCY_LIMIT} steps"
    )))
}

/// Largest `k` for which `(L_m ·)^k v` still has a term with `stat > 0`,
/// or 0 when there is none.
fn last_positive(
    m: GeneratorIndex,
    v: &UniversalVector,
    stat: fn(&UniversalVector) -> Option<usize>,
) -> Result<usize> {
    let mut current = v.clone();
    let mut last = 0;
    let mut k = 0;
    while !current.is_zero() {
        if stat(&current).unwrap_or(0) > 0 {
            last = k;
        }
        current = dot_act(m, &current)?;
        k += 1;
    }
    Ok(last)
}

/// Smallest `k > 2 max(k_+ + 1, k_- + 1)`, maximized over the terms of `v`,
/// where `k_-` is the last dot-power of `L_m` leaving `L_{λ-}|w⟩` at
/// positive level and `k_+` the last one leaving `L_{λ+}|w⟩` at positive
/// length.
pub fn nilpotency_bound(m: GeneratorIndex, v: &UniversalVector) -> Result<usize> {
    let mut bound = 0;
    for (p, _) in v.terms() {
        let minus = UniversalVector::basis(v.ty.clone(), v.c.clone(), p.minus().word());
        let plus = UniversalVector::basis(v.ty.clone(), v.c.clone(), p.plus().word());
        let k_minus = last_positive(m, &minus, UniversalVector::max_level)?;
        let k_plus = last_positive(m, &plus, UniversalVector::max_length)?;
        bound = bound.max(2 * (k_plus + 1).max(k_minus + 1) + 1);
    }
    Ok(bound)
}

/// Multisets of `letters` with sizes in `lengths`, each as an increasing word.
pub fn multisets(
    letters: &[GeneratorIndex],
    lengths: std::ops::RangeInclusive<usize>,
) -> Vec<Vec<GeneratorIndex>> {
    fn rec(
        letters: &[GeneratorIndex],
        len: usize,
        prefix: &mut Vec<GeneratorIndex>,
        out: &mut Vec<Vec<GeneratorIndex>>,
    ) {
        if len == 0 {
            out.push(prefix.clone());
            return;
        }
        for (i, &x) in letters.iter().enumerate() {
            prefix.push(x);
            rec(&letters[i..], len - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut sorted = letters.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out = Vec::new();
    for len in lengths {
        rec(&sorted, len, &mut Vec::new(), &mut out);
    }
    out
}

/// Subalgebra type `ψ_{r'}` induced on the level-0 subspace:
/// `L_k ↦ ψ_r(L_k)` for `r' <= k <= 2r'`.
pub fn subspace_type(psi: &WhittakerTypeR, r_prime: u32) -> Result<WhittakerTypeR> {
    let mu = (r_prime..=2 * r_prime).map(|k| psi.mu_at(k)).collect();
    WhittakerTypeR::new(r_prime, mu)
}

/// Spanning vectors `L_λ|w⟩` with `|λ| = 0`, `l_λ >= s - r' + 1` and at most
/// `max_length` letters of the Whittaker vectors of type `ψ_{r'}`.
pub fn whittaker_subspace_level0(
    psi: &WhittakerTypeR,
    c: &Rational,
    r_prime: u32,
    max_length: usize,
) -> Result<Vec<UniversalVector>> {
    let (r, s) = (psi.r(), psi.rank());
    let classified = if s + 1 >= 2 * r {
        r_prime == r || (s + 2 <= r_prime + r && r_prime <= s)
    } else {
        r <= r_prime && r_prime <= s
    };
    if !classified {
        return Err(Error::NotClassified {
            r: r as i32,
            rank: s as i32,
            r_prime: r_prime as i32,
        });
    }
    let lo = (s + 1 - r_prime) as GeneratorIndex;
    let letters: Vec<GeneratorIndex> = (lo..r as GeneratorIndex).collect();
    let ty = WhittakerType::Order(psi.clone());
    Ok(multisets(&letters, 0..=max_length)
        .into_iter()
        .map(|w| UniversalVector::basis(ty.clone(), c.clone(), Word(w)))
        .collect())
}

fn nonzero(alpha: &Rational) -> Result<()> {
    if alpha.is_zero() {
        return Err(Error::InvalidArgument(
            "the leading coefficient must be nonzero".into(),
        ));
    }
    Ok(())
}

fn power_word(pieces: &[(GeneratorIndex, usize)]) -> Vec<GeneratorIndex> {
    pieces
        .iter()
        .flat_map(|&(i, k)| std::iter::repeat_n(i, k))
        .collect()
}

/// `Σ_{k=0}^{l} α_k L_2^{l-k} L_3^{2k}|w⟩` with
/// `α_k = -(l+1-k)/(4k ν_4) α_{k-1}`, for `n = 4`.
pub fn family_w_l_2(
    psi: &WhittakerType1N,
    c: &Rational,
    l: usize,
    alpha0: &Rational,
) -> Result<UniversalVector> {
    if psi.n() != 4 {
        return Err(Error::InvalidArgument(format!(
            "family_w_l_2 needs n = 4, got {}",
            psi.n()
        )));
    }
    let ty = WhittakerType::Pair(psi.clone());
    nonzero(alpha0)?;
    let mut alpha = alpha0.clone();
    let mut monomials = vec![(power_word(&[(2, l)]), alpha.clone())];
    for k in 1..=l {
        let ratio = Rational::from((l + 1 - k) as i64)
            .checked_div(&(Rational::from(4 * k as i64) * psi.nun()))?;
        alpha = -(ratio * &alpha);
        monomials.push((power_word(&[(2, l - k), (3, 2 * k)]), alpha.clone()));
    }
    Ok(UniversalVector::from_monomials(ty, c.clone(), monomials))
}

/// `Σ_{k=0}^{l} α_k L_{n-2}^{l-k} L_{n-1}^{2k}|w⟩` with
/// `α_{k+1} = -(n-3)(l-k)/(2(n-2)(k+1) ν_n) α_k`, for `n > 4`.
pub fn family_w_l_2_n(
    psi: &WhittakerType1N,
    c: &Rational,
    l: usize,
    alpha0: &Rational,
) -> Result<UniversalVector> {
    let n = psi.n() as GeneratorIndex;
    if n <= 4 {
        return Err(Error::InvalidArgument(format!(
            "family_w_l_2_n needs n > 4, got {n}"
        )));
    }
    nonzero(alpha0)?;
    let mut alpha = alpha0.clone();
    let mut monomials = vec![(power_word(&[(n - 2, l)]), alpha.clone())];
    for k in 0..l {
        let num = Rational::from((n as i64 - 3) * (l - k) as i64);
        let den = Rational::from(2 * (n as i64 - 2) * (k as i64 + 1)) * psi.nun();
        alpha = -(num.checked_div(&den)? * &alpha);
        monomials.push((
            power_word(&[(n - 2, l - k - 1), (n - 1, 2 * (k + 1))]),
            alpha.clone(),
        ));
    }
    Ok(UniversalVector::from_monomials(
        WhittakerType::Pair(psi.clone()),
        c.clone(),
        monomials,
    ))
}

/// `Σ_{k=l}^{n-1} α_k L_k L_{n-1}^{k-l}|w⟩` for `2 <= l <= n-2`, `n > 4`.
pub fn family_w_1_l_n(
    psi: &WhittakerType1N,
    c: &Rational,
    l: usize,
    alpha_l: &Rational,
) -> Result<UniversalVector> {
    let n = psi.n() as i64;
    let l = l as i64;
    if n <= 4 || l < 2 || l > n - 2 {
        return Err(Error::InvalidArgument(format!(
            "family_w_1_l_n needs n > 4 and 2 <= l <= n-2, got n = {n}, l = {l}"
        )));
    }
    nonzero(alpha_l)?;
    let nu = psi.nun();
    let mut alpha = alpha_l.clone();
    let mut monomials = Vec::new();
    for k in l..=n - 1 {
        if k > l {
            let (num, den) = if k == n - 1 {
                (n - 3, (n - 2) * (n - l))
            } else {
                (k - 2, (n - 2) * (k - l))
            };
            alpha = -(Rational::from(num).checked_div(&(Rational::from(den) * nu))? * &alpha);
        }
        let word = power_word(&[
            (k as GeneratorIndex, 1),
            ((n - 1) as GeneratorIndex, (k - l) as usize),
        ]);
        monomials.push((word, alpha.clone()));
    }
    Ok(UniversalVector::from_monomials(
        WhittakerType::Pair(psi.clone()),
        c.clone(),
        monomials,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleN5 {
    W11_23,
    W2_2,
}

/// The two explicit `n = 5` Whittaker vectors, with `μ = ν_5`.
pub fn example_n5(
    which: ExampleN5,
    psi: &WhittakerType1N,
    c: &Rational,
) -> Result<UniversalVector> {
    if psi.n() != 5 {
        return Err(Error::InvalidArgument(format!(
            "example_n5 needs n = 5, got {}",
            psi.n()
        )));
    }
    let mu = psi.nun();
    let term = |num: i64, den: i64, power: u32| {
        Rational::from(num).checked_div(&(Rational::from(den) * mu.pow(power)))
    };
    let monomials: Vec<(Vec<GeneratorIndex>, Rational)> = match which {
        ExampleN5::W11_23 => vec![
            (vec![2, 3], term(1, 1, 0)?),
            (vec![2, 4, 4], term(-1, 3, 1)?),
            (vec![3, 3, 4], term(-1, 3, 1)?),
            (vec![3, 4, 4, 4], term(5, 27, 2)?),
            (vec![4, 4, 4, 4, 4], term(-2, 81, 3)?),
        ],
        ExampleN5::W2_2 => vec![
            (vec![2, 2], term(1, 1, 0)?),
            (vec![2, 3, 4], term(-2, 3, 1)?),
            (vec![2, 4, 4, 4], term(4, 27, 2)?),
            (vec![3, 3, 4, 4], term(1, 9, 2)?),
            (vec![3, 4, 4, 4, 4], term(-4, 81, 3)?),
            (vec![4], term(-1, 3, 0)?),
            (vec![4, 4, 4, 4, 4, 4], term(4, 729, 4)?),
        ],
    };
    Ok(UniversalVector::from_monomials(
        WhittakerType::Pair(psi.clone()),
        c.clone(),
        monomials,
    ))
}

fn type_top(ty: &WhittakerType) -> GeneratorIndex {
    match ty {
        WhittakerType::Order(t) => t.rank() as GeneratorIndex,
        WhittakerType::Pair(t) => t.n() as GeneratorIndex,
    }
}

fn target_top(ty: &WhittakerType) -> GeneratorIndex {
    match ty {
        WhittakerType::Order(t) => 2 * t.r() as GeneratorIndex,
        WhittakerType::Pair(t) => t.n() as GeneratorIndex,
    }
}

/// Index past which every generator of the target subalgebra both kills
/// `v` and has vanishing target value.
pub fn verification_horizon(v: &UniversalVector, target: &WhittakerType) -> GeneratorIndex {
    let level = v.max_level().unwrap_or(0) as GeneratorIndex;
    (type_top(v.ty()) + level).max(target_top(target)) + 1
}

fn target_conditions(
    target: &WhittakerType,
    horizon: GeneratorIndex,
) -> Vec<(GeneratorIndex, Rational)> {
    let ks: Vec<GeneratorIndex> = match target {
        WhittakerType::Order(t) => (t.r() as GeneratorIndex..=horizon).collect(),
        WhittakerType::Pair(t) => std::iter::once(1)
            .chain(t.n() as GeneratorIndex..=horizon)
            .collect(),
    };
    ks.into_iter()
        .map(|k| (k, target.value(k).expect("subalgebra index")))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalCheck {
    pub check: String,
    pub residual_zero: bool,
    pub first_failure: Option<UniversalTermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalReport {
    pub passed: bool,
    /// Largest generator index checked explicitly.
    pub horizon: GeneratorIndex,
    pub checks: Vec<UniversalCheck>,
}

/// Checks `L_k v = ψ'(L_k) v` for every generator of the target subalgebra.
/// Generators beyond the horizon act by zero on `v` for grading reasons and
/// have zero target value.
pub fn verify_universal(v: &UniversalVector, target: &WhittakerType) -> UniversalReport {
    let horizon = verification_horizon(v, target);
    let module = UniversalModule::shared(v.ty(), v.central_charge());
    let conditions = target_conditions(target, horizon);
    let checks = par::map(&conditions, |(k, eigen)| {
        let residual = module.act(*k, v).sub(&v.scaled(eigen));
        UniversalCheck {
            check: format!("L_{k}"),
            residual_zero: residual.is_zero(),
            first_failure: residual.terms().into_iter().next().map(
                |(pseudo_partition, coefficient)| UniversalTermJson {
                    pseudo_partition,
                    coefficient,
                },
            ),
        }
    });
    UniversalReport {
        passed: checks.iter().all(|c| c.residual_zero),
        horizon,
        checks,
    }
}

/// A finite set of basis monomials spanning a search space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ansatz {
    pub description: String,
    pub words: Vec<Vec<GeneratorIndex>>,
}

impl Ansatz {
    /// Monomials in `letters` with between `min_length` and `max_length`
    /// letters.
    pub fn monomials(letters: &[GeneratorIndex], min_length: usize, max_length: usize) -> Self {
        Ansatz {
            description: format!(
                "monomials in {letters:?} with {min_length}..={max_length} letters"
            ),
            words: multisets(letters, min_length..=max_length),
        }
    }

    pub fn filtered(self, description: &str, keep: impl Fn(&[GeneratorIndex]) -> bool) -> Self {
        Ansatz {
            description: format!("{}, {description}", self.description),
            words: self.words.into_iter().filter(|w| keep(w)).collect(),
        }
    }

    /// Level-0 ansatz without `|w⟩` or `L_0`, and without `L_1` for the
    /// pair type: every allowed positive letter, lengths `1..=max_length`.
    pub fn nontrivial_level0(ty: &WhittakerType, max_length: usize) -> Self {
        let v = Variant::of(ty);
        let letters: Vec<GeneratorIndex> = (1..v.order() as GeneratorIndex)
            .filter(|&i| v.allows(i))
            .collect();
        Self::monomials(&letters, 1, max_length)
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub ansatz_description: String,
    pub ansatz_size: usize,
    pub basis: Vec<UniversalVector>,
}

impl SearchResult {
    pub fn nullspace_dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn to_json(&self) -> SearchJson {
        SearchJson {
            ansatz_description: self.ansatz_description.clone(),
            ansatz_size: self.ansatz_size,
            nullspace_dimension: self.basis.len(),
            basis: self.basis.iter().map(UniversalVector::to_json).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchJson {
    pub ansatz_description: String,
    pub ansatz_size: usize,
    pub nullspace_dimension: usize,
    pub basis: Vec<UniversalVectorJson>,
}

/// Exact solution space of the Whittaker conditions of type `target` on the
/// span of the ansatz monomials in `W_ty`.
pub fn search_whittaker(
    ty: &WhittakerType,
    c: &Rational,
    ansatz: &Ansatz,
    target: &WhittakerType,
) -> Result<SearchResult> {
    let variant = Variant::of(ty);
    let columns: Vec<UniversalVector> = ansatz
        .words
        .iter()
        .map(|w| {
            PseudoPartition::new(variant, w.clone())
                .map(|p| UniversalVector::basis(ty.clone(), c.clone(), p.word()))
        })
        .collect::<Result<_>>()?;
    let level = columns
        .iter()
        .filter_map(UniversalVector::max_level)
        .max()
        .unwrap_or(0) as GeneratorIndex;
    let horizon = (type_top(ty) + level).max(target_top(target)) + 1;
    let conditions = target_conditions(target, horizon);
    let module = UniversalModule::shared(ty, c);
    let images: Vec<Vec<(GeneratorIndex, Terms)>> = par::map(&columns, |col| {
        conditions
            .iter()
            .map(|(k, eigen)| (*k, module.act(*k, col).sub(&col.scaled(eigen)).terms))
            .collect()
    });
    let row_labels: BTreeSet<(GeneratorIndex, Word)> = images
        .iter()
        .flat_map(|img| {
            img.iter()
                .flat_map(|(k, t)| t.keys().map(move |w| (*k, w.clone())))
        })
        .collect();
    let row_index: HashMap<&(GeneratorIndex, Word), usize> =
        row_labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut m = Matrix::zeros(row_labels.len(), columns.len());
    for (j, img) in images.iter().enumerate() {
        for (k, terms) in img {
            for (w, x) in terms {
                m[(row_index[&(*k, w.clone())], j)] = x.clone();
            }
        }
    }
    let basis = m
        .nullspace()
        .into_iter()
        .map(|coeffs| {
            coeffs.iter().zip(&columns).fold(
                UniversalVector::zero(ty.clone(), c.clone()),
                |acc, (x, col)| acc.add(&col.scaled(x)),
            )
        })
        .collect();
    Ok(SearchResult {
        ansatz_description: ansatz.description.clone(),
        ansatz_size: columns.len(),
        basis,
    })
}

/// Rank of a family of vectors in a common module.
pub fn rank_of(vectors: &[UniversalVector]) -> usize {
    let words: BTreeSet<&Word> = vectors.iter().flat_map(|v| v.terms.keys()).collect();
    let rows = words
        .iter()
        .map(|w| {
            vectors
                .iter()
                .map(|v| v.terms.get(*w).cloned().unwrap_or_else(Rational::zero))
                .collect()
        })
        .collect::<Vec<Vec<Rational>>>();
    if rows.is_empty() {
        return 0;
    }
    Matrix::from_rows(rows).rank()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseResult {
    pub clause: String,
    pub passed: bool,
    pub detail: String,
}

/// Applies `L_{λ-}` to `v`.
fn apply_minus(
    module: &UniversalModule,
    lambda: &PseudoPartition,
    v: &UniversalVector,
) -> UniversalVector {
    module.act_word(lambda.minus().letters(), v)
}

/// Checks the commutator bounds for `L_m` against `L_λ|w⟩`: every clause
/// whose hypothesis on `m` holds is evaluated exactly.
pub fn check_lemma_bounds(
    m: GeneratorIndex,
    lambda: &PseudoPartition,
    psi: &WhittakerTypeR,
    c: &Rational,
) -> Vec<ClauseResult> {
    let ty = WhittakerType::Order(psi.clone());
    let module = UniversalModule::shared(&ty, c);
    let (r, s) = (psi.r() as GeneratorIndex, psi.rank() as GeneratorIndex);
    let size = lambda.level() as GeneratorIndex;
    let length = lambda.length();
    let mut out = Vec::new();
    if m < r {
        return out;
    }
    let plus = UniversalVector::basis(ty.clone(), c.clone(), lambda.plus().word());
    let full = UniversalVector::basis(ty.clone(), c.clone(), lambda.word());
    // [L_m, L_{λ+}]|w⟩
    let x = module
        .act(m, &plus)
        .sub(&plus.scaled(&psi.value(m).expect("subalgebra index")));
    // [L_m, L_{λ-}] L_{λ+}|w⟩
    let y = module
        .act(m, &full)
        .sub(&apply_minus(&module, lambda, &module.act(m, &plus)));
    let mut push = |clause: &str, passed: bool, detail: String| {
        out.push(ClauseResult {
            clause: clause.into(),
            passed,
            detail,
        })
    };
    if m > s {
        push("plus_vanishing", x.is_zero(), format!("{x:?}"));
    } else {
        let ok = x.max_length().is_none_or(|l| l < length);
        push(
            "plus_length_drop",
            ok,
            format!("max length {:?} vs {length}", x.max_length()),
        );
    }
    if m > s + size {
        push("minus_vanishing", y.is_zero(), format!("{y:?}"));
    } else if m > s {
        let bound = (size + s - m) as usize;
        let ok = y.max_level().is_none_or(|l| l <= bound);
        push(
            "minus_level_bound",
            ok,
            format!("max level {:?} vs bound {bound}", y.max_level()),
        );
    } else {
        let ok = y.max_level().is_none_or(|l| l < size as usize);
        push(
            "minus_level_drop",
            ok,
            format!("max level {:?} vs {size}", y.max_level()),
        );
    }
    if let Some(&first) = lambda.letters().iter().rev().find(|&&i| i < 0) {
        let k = -first;
        if m == k + s {
            let count = lambda.count(-k) as i64;
            let mut reduced = lambda.letters().to_vec();
            let pos = reduced
                .iter()
                .position(|&i| i == -k)
                .expect("letter present");
            reduced.remove(pos);
            let expected = Rational::from(count) * psi.mu_at(s as u32) * Rational::from(2 * k + s);
            let got = y.coefficient(&reduced);
            push(
                "leading_term",
                got == expected,
                format!("coefficient {got} vs {expected}"),
            );
            let top = (size - k) as usize;
            let offending = y.terms().into_iter().find(|(p, _)| {
                p.letters() != reduced.as_slice()
                    && !(p.level() < top || (p.level() <= top && p.length() < length))
            });
            push(
                "leading_remainder",
                offending.is_none(),
                format!("{offending:?}"),
            );
        }
    }
    out
}

pub const LEMMA_CLAUSES: [&str; 7] = [
    "plus_vanishing",
    "plus_length_drop",
    "minus_vanishing",
    "minus_level_bound",
    "minus_level_drop",
    "leading_term",
    "leading_remainder",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseSummary {
    pub clause: String,
    pub samples: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaSuiteReport {
    pub seed: u64,
    pub passed: bool,
    pub clauses: Vec<ClauseSummary>,
}

#[derive(Clone, Debug)]
pub struct LemmaSample {
    pub m: GeneratorIndex,
    pub lambda: PseudoPartition,
    pub psi: WhittakerTypeR,
    pub c: Rational,
}

fn random_rational(rng: &mut ChaCha8Rng, nonzero: bool) -> Rational {
    loop {
        let x = Rational::new(rng.gen_range(-5..=5), rng.gen_range(1..=3))
            .expect("positive denominator");
        if !nonzero || !x.is_zero() {
            return x;
        }
    }
}

/// A random type of order `r <= 3` with random rank, and a pseudo-partition
/// with `|λ| <= 8`, `#λ <= 5`.
fn random_setting(rng: &mut ChaCha8Rng) -> (WhittakerTypeR, Rational, PseudoPartition) {
    let r = rng.gen_range(1..=3u32);
    let s = rng.gen_range(r..=2 * r);
    let mu = (r..=2 * r)
        .map(|k| match k.cmp(&s) {
            Ordering::Less => random_rational(rng, false),
            Ordering::Equal => random_rational(rng, true),
            Ordering::Greater => Rational::zero(),
        })
        .collect();
    let psi = WhittakerTypeR::new(r, mu).expect("valid random type");
    let c = random_rational(rng, false);
    let level = rng.gen_range(0..=8);
    let parts = enumerate_partitions(level);
    let minus = parts.choose(rng).expect("nonempty");
    let length = rng.gen_range(0..=5);
    let mut letters: Vec<GeneratorIndex> = minus
        .parts()
        .iter()
        .map(|&p| -(p as GeneratorIndex))
        .collect();
    letters.extend((0..length).map(|_| rng.gen_range(0..r as GeneratorIndex)));
    let lambda = PseudoPartition::new(Variant::OrderR { r }, letters).expect("allowed letters");
    (psi, c, lambda)
}

/// Draws a sample whose hypotheses make `clause` applicable.
pub fn sample_for_clause(clause: &str, rng: &mut ChaCha8Rng) -> LemmaSample {
    loop {
        let (psi, c, lambda) = random_setting(rng);
        let (r, s) = (psi.r() as GeneratorIndex, psi.rank() as GeneratorIndex);
        let size = lambda.level() as GeneratorIndex;
        let smallest_k = lambda.letters().iter().rev().find(|&&i| i < 0).map(|&i| -i);
        let m = match clause {
            "plus_vanishing" => Some(rng.gen_range(s + 1..=s + 6)),
            "plus_length_drop" | "minus_level_drop" => Some(rng.gen_range(r..=s)),
            "minus_vanishing" => Some(rng.gen_range(s + size + 1..=s + size + 4)),
            "minus_level_bound" => (size > 0).then(|| rng.gen_range(s + 1..=s + size)),
            "leading_term" | "leading_remainder" => smallest_k.map(|k| k + s),
            other => panic!("unknown clause {other}"),
        };
        if let Some(m) = m {
            return LemmaSample { m, lambda, psi, c };
        }
    }
}

/// Runs `samples` random applicable instances of every clause.
pub fn lemma_suite(seed: u64, samples: usize) -> LemmaSuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(&str, LemmaSample)> = LEMMA_CLAUSES
        .iter()
        .flat_map(|&clause| (0..samples).map(move |_| clause).collect::<Vec<_>>())
        .map(|clause| (clause, sample_for_clause(clause, &mut rng)))
        .collect();
    let outcomes = par::map(&jobs, |(clause, s)| {
        let results = check_lemma_bounds(s.m, &s.lambda, &s.psi, &s.c);
        let hit = results.into_iter().find(|res| res.clause == *clause);
        match hit {
            Some(res) if res.passed => None,
            Some(res) => Some(format!(
                "m = {}, λ = {:?}, ψ = {:?}: {}",
                s.m, s.lambda, s.psi, res.detail
            )),
            None => Some(format!(
                "clause not evaluated for m = {}, λ = {:?}",
                s.m, s.lambda
            )),
        }
    });
    let clauses: Vec<ClauseSummary> = LEMMA_CLAUSES
        .iter()
        .map(|&clause| {
            let failures: Vec<&String> = jobs
                .iter()
                .zip(&outcomes)
                .filter(|((c, _), _)| *c == clause)
                .filter_map(|(_, o)| o.as_ref())
                .collect();
            ClauseSummary {
                clause: clause.into(),
                samples,
                failures: failures.len(),
                first_failure: failures.first().map(|s| s.to_string()),
            }
        })
        .collect();
    LemmaSuiteReport {
        seed,
        passed: clauses.iter().all(|c| c.failures == 0),
        clauses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;
    use proptest::prelude::*;

    fn pair(n: u32, nu1: Rational, nun: Rational) -> WhittakerType1N {
        WhittakerType1N::new(n, nu1, nun).unwrap()
    }

    fn order(r: u32, mu: &[(i64, i64)]) -> WhittakerTypeR {
        WhittakerTypeR::new(r, mu.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    fn vec_of(
        ty: &WhittakerType,
        c: &Rational,
        terms: &[(&[GeneratorIndex], Rational)],
    ) -> UniversalVector {
        UniversalVector::from_monomials(
            ty.clone(),
            c.clone(),
            terms.iter().map(|(w, k)| (w.to_vec(), k.clone())),
        )
    }

    #[test]
    fn pseudo_partition_statistics() {
        let v = Variant::OrderR { r: 3 };
        let p = PseudoPartition::new(v, vec![2, -3, 0, -1, -1, 2]).unwrap();
        assert_eq!(p.letters(), &[-3, -1, -1, 0, 2, 2]);
        assert_eq!((p.level(), p.length(), p.l_lambda()), (5, 3, 0));
        assert_eq!(p.minus().letters(), &[-3, -1, -1]);
        assert_eq!(PseudoPartition::new(v, vec![-2]).unwrap().l_lambda(), 3);
        assert!(PseudoPartition::new(v, vec![3]).is_err());
        assert!(PseudoPartition::new(Variant::Pair1N { n: 4 }, vec![1]).is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<PseudoPartition>(&json).unwrap(), p);
        let a = PseudoPartition::new(v, vec![-2]).unwrap();
        let b = PseudoPartition::new(v, vec![0, 1]).unwrap();
        assert!(b < a);
    }

    #[test]
    fn action_examples() {
        let (nu1, nu4) = (q(3, 2), q(-2, 5));
        let ty = WhittakerType::Pair(pair(4, nu1.clone(), nu4.clone()));
        let c = q(7, 3);
        let l2 = vec_of(&ty, &c, &[(&[2], q(1, 1))]);
        assert_eq!(act_universal(4, &l2), l2.scaled(&nu4));
        let expect = vec_of(&ty, &c, &[(&[3], q(-1, 1)), (&[2], nu1.clone())]);
        assert_eq!(act_universal(1, &l2), expect);
        let w = UniversalVector::vacuum(ty.clone(), c.clone());
        assert_eq!(act_universal(1, &w), w.scaled(&nu1));
        assert_eq!(act_universal(7, &w), UniversalVector::zero(ty, c));
    }

    #[test]
    fn dot_action() {
        let psi = order(2, &[(3, 1), (0, 1), (0, 1)]);
        let ty = WhittakerType::Order(psi);
        let c = q(1, 2);
        let w = UniversalVector::vacuum(ty.clone(), c.clone());
        assert!(dot_act(2, &w).unwrap().is_zero());
        assert_eq!(
            dot_act(1, &w),
            Err(Error::IndexOutsideSubalgebra { m: 1, order: 2 })
        );
        // [L_2, L_1]|w⟩ = L_3|w⟩ = 0 for this type
        let l1 = vec_of(&ty, &c, &[(&[1], q(1, 1))]);
        assert!(dot_act(2, &l1).unwrap().is_zero());
        let psi = order(2, &[(3, 1), (5, 1), (0, 1)]);
        let ty = WhittakerType::Order(psi);
        let l1 = vec_of(&ty, &c, &[(&[1], q(1, 1))]);
        assert_eq!(
            dot_act(2, &l1).unwrap(),
            UniversalVector::vacuum(ty, c).scaled(&q(5, 1))
        );
    }

    #[test]
    fn nilpotency() {
        let psi = order(2, &[(3, 1), (5, 1), (-1, 2)]);
        let ty = WhittakerType::Order(psi);
        let c = q(1, 2);
        let w = UniversalVector::vacuum(ty.clone(), c.clone());
        assert_eq!(nilpotency_index(2, &w).unwrap(), 1);
        // [L_3, L_{-1}] = 4 L_2 lands in the subalgebra
        let v = vec_of(&ty, &c, &[(&[-1], q(1, 1))]);
        assert_eq!(nilpotency_index(3, &v).unwrap(), 2);
        let v = vec_of(
            &ty,
            &c,
            &[(&[-2, -1, 0, 1], q(1, 1)), (&[-3, 1, 1], q(2, 1))],
        );
        for m in 2..=7 {
            let k = nilpotency_index(m, &v).unwrap();
            assert!(k <= nilpotency_bound(m, &v).unwrap(), "m = {m}");
        }
    }

    #[test]
    fn subspaces() {
        let c = q(2, 1);
        let s4 = order(2, &[(3, 1), (5, 1), (-1, 2)]);
        let only = whittaker_subspace_level0(&s4, &c, 2, 5).unwrap();
        assert_eq!(
            only,
            vec![UniversalVector::vacuum(
                WhittakerType::Order(s4.clone()),
                c.clone()
            )]
        );
        assert!(matches!(
            whittaker_subspace_level0(&s4, &c, 3, 5),
            Err(Error::NotClassified { .. })
        ));
        let s3 = order(2, &[(3, 1), (5, 1), (0, 1)]);
        assert_eq!(whittaker_subspace_level0(&s3, &c, 3, 4).unwrap().len(), 5);
        let s2 = order(2, &[(3, 1), (0, 1), (0, 1)]);
        let vs = whittaker_subspace_level0(&s2, &c, 2, 3).unwrap();
        assert_eq!(vs.len(), 4);
        let target = WhittakerType::Order(subspace_type(&s2, 2).unwrap());
        assert!(vs.iter().all(|v| verify_universal(v, &target).passed));
    }

    #[test]
    fn family_values() {
        let c = q(0, 1);
        let nu = q(-3, 1);
        let p4 = pair(4, q(2, 5), nu.clone());
        let v = family_w_l_2(&p4, &c, 1, &q(1, 1)).unwrap();
        assert_eq!(v.coefficient(&[2]), q(1, 1));
        assert_eq!(v.coefficient(&[3, 3]), q(1, 12));
        assert_eq!(
            family_w_l_2(&p4, &c, 0, &q(2, 1)).unwrap(),
            UniversalVector::vacuum(WhittakerType::Pair(p4.clone()), c.clone()).scaled(&q(2, 1))
        );
        let p5 = pair(5, q(1, 1), nu.clone());
        let v = family_w_l_2_n(&p5, &c, 1, &q(1, 1)).unwrap();
        assert_eq!(v.coefficient(&[4, 4]), q(1, 9));
        let u = family_w_1_l_n(&p5, &c, 3, &q(1, 1)).unwrap();
        assert_eq!(u, v);
        assert_eq!(family_w_1_l_n(&p5, &c, 2, &q(1, 1)).unwrap().len(), 3);
        assert!(family_w_1_l_n(&p5, &c, 4, &q(1, 1)).is_err());
        let e = example_n5(ExampleN5::W2_2, &p5, &c).unwrap();
        assert_eq!(e.coefficient(&[4]), q(-1, 3));
        let e = example_n5(ExampleN5::W11_23, &p5, &c).unwrap();
        assert_eq!(e.coefficient(&[3, 4, 4, 4]), q(5, 243));
    }

    #[test]
    fn lemma_examples() {
        let psi = order(2, &[(3, 1), (5, 1), (-1, 2)]);
        let c = q(1, 3);
        let v = Variant::OrderR { r: 2 };
        let lam = PseudoPartition::new(v, vec![-1]).unwrap();
        let res = check_lemma_bounds(5, &lam, &psi, &c);
        assert!(res.iter().all(|r| r.passed), "{res:?}");
        assert!(res.iter().any(|r| r.clause == "leading_term"));
        let plus_only = PseudoPartition::new(v, vec![0, 1, 1]).unwrap();
        let res = check_lemma_bounds(5, &plus_only, &psi, &c);
        assert!(res.iter().any(|r| r.clause == "plus_vanishing" && r.passed));
        let lam = PseudoPartition::new(v, vec![-2, -1, 1]).unwrap();
        let res = check_lemma_bounds(8, &lam, &psi, &c);
        assert!(res
            .iter()
            .any(|r| r.clause == "minus_vanishing" && r.passed));
    }

    #[test]
    fn small_searches() {
        let c = q(1, 1);
        let p3 = WhittakerType::Pair(pair(3, q(1, 1), q(2, 1)));
        let res = search_whittaker(&p3, &c, &Ansatz::nontrivial_level0(&p3, 5), &p3).unwrap();
        assert_eq!(res.nullspace_dimension(), 0);
        let vacuum = Ansatz {
            description: "vacuum".into(),
            words: vec![vec![]],
        };
        let res = search_whittaker(&p3, &c, &vacuum, &p3).unwrap();
        assert_eq!(res.basis, vec![UniversalVector::vacuum(p3, c)]);
    }

    fn arb_letters(variant: Variant) -> impl Strategy<Value = Vec<GeneratorIndex>> {
        let top = variant.order() as GeneratorIndex;
        (
            proptest::sample::select(
                enumerate_partitions(4)
                    .into_iter()
                    .chain(enumerate_partitions(3))
                    .chain(enumerate_partitions(2))
                    .collect::<Vec<_>>(),
            ),
            proptest::collection::vec(0..top, 0..=3),
        )
            .prop_map(move |(minus, plus)| {
                let mut w: Vec<GeneratorIndex> = minus
                    .parts()
                    .iter()
                    .map(|&p| -(p as GeneratorIndex))
                    .collect();
                w.extend(plus.into_iter().filter(|&i| variant.allows(i)));
                w
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn universal_representation_property(
            which in 0..2usize,
            words in proptest::collection::vec(
                prop_oneof![arb_letters(Variant::OrderR { r: 2 }), arb_letters(Variant::Pair1N { n: 4 })],
                1..=3,
            ),
            a in -4..=4i32,
            b in -4..=4i32,
        ) {
            let ty = if which == 0 {
                WhittakerType::Order(order(2, &[(3, 1), (-2, 3), (5, 2)]))
            } else {
                WhittakerType::Pair(pair(4, q(2, 3), q(-7, 2)))
            };
            let variant = Variant::of(&ty);
            let c = q(5, 7);
            let terms: Vec<(Vec<GeneratorIndex>, Rational)> = words
                .into_iter()
                .filter(|w| w.iter().all(|&i| variant.allows(i)))
                .enumerate()
                .map(|(i, w)| (w, q(i as i64 + 1, 2)))
                .collect();
            let v = UniversalVector::from_monomials(ty.clone(), c.clone(), terms);
            let lhs = act_universal(a, &act_universal(b, &v)).sub(&act_universal(b, &act_universal(a, &v)));
            let mut rhs = act_universal(a + b, &v).scaled(&Rational::from(a - b));
            if a + b == 0 {
                rhs = rhs.add(&v.scaled(&crate::virasoro::central_term(a, &c)));
            }
            prop_assert_eq!(lhs, rhs);
        }
    }
}
