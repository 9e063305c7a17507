//! Level-truncated forms on `V_{c,Δ}`: Gaiotto and BMT states, raising
//! indices to module vectors, and exact Whittaker-condition checks.
//!
//! A [`DualForm`] stores its values on one of two monomial bases. On the
//! decreasing side the coefficient of `λ` is `f(L_{-λ_1} ... L_{-λ_k}|Δ⟩)`
//! with `λ_1 >= ... >= λ_k`; on the increasing side it is the value on the
//! reversed monomial `L_{-λ_k} ... L_{-λ_1}|Δ⟩`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::linalg::Matrix;
use crate::par;
use crate::shapovalov::solve;
use crate::verma::{enumerate_partitions, Partition, VermaContext, VermaModule, VermaVector};
use crate::virasoro::GeneratorIndex;

/// Character of `span{L_r, L_{r+1}, ...}`: `L_k ↦ μ_k` for `r <= k <= 2r`,
/// zero above `2r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TypeRSpec", into = "TypeRSpec")]
pub struct WhittakerTypeR {
    r: u32,
    mu: Vec<Rational>,
    rank: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TypeRSpec {
    r: u32,
    mu: Vec<Rational>,
}

impl WhittakerTypeR {
    /// `mu` lists `μ_r, ..., μ_{2r}`.
    pub fn new(r: u32, mu: Vec<Rational>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidType("the order r must be at least 1".into()));
        }
        if mu.len() != r as usize + 1 {
            return Err(Error::InvalidType(format!(
                "order {r} needs {} values μ_{r}..μ_{}, got {}",
                r + 1,
                2 * r,
                mu.len()
            )));
        }
        let Some(top) = mu.iter().rposition(|x| !x.is_zero()) else {
            return Err(Error::InvalidType("all μ values vanish".into()));
        };
        Ok(WhittakerTypeR {
            r,
            rank: r + top as u32,
            mu,
        })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn mu(&self) -> &[Rational] {
        &self.mu
    }

    /// Largest `s` with `μ_s != 0`.
    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// `ψ(L_k)`, or `None` when `L_k` lies outside the subalgebra.
    pub fn value(&self, k: GeneratorIndex) -> Option<Rational> {
        let r = self.r as GeneratorIndex;
        if k < r {
            None
        } else if k <= 2 * r {
            Some(self.mu[(k - r) as usize].clone())
        } else {
            Some(Rational::zero())
        }
    }

    /// `μ_k`, zero outside `r..=2r`.
    pub fn mu_at(&self, k: u32) -> Rational {
        if k < self.r {
            Rational::zero()
        } else {
            self.value(k as GeneratorIndex)
                .unwrap_or_else(Rational::zero)
        }
    }
}

impl TryFrom<TypeRSpec> for WhittakerTypeR {
    type Error = Error;
    fn try_from(s: TypeRSpec) -> Result<Self> {
        WhittakerTypeR::new(s.r, s.mu)
    }
}

impl From<WhittakerTypeR> for TypeRSpec {
    fn from(t: WhittakerTypeR) -> Self {
        TypeRSpec { r: t.r, mu: t.mu }
    }
}

/// Character of `span{L_1, L_n, L_{n+1}, ...}`: `L_1 ↦ ν_1`, `L_n ↦ ν_n`,
/// higher generators to zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Type1NSpec", into = "Type1NSpec")]
pub struct WhittakerType1N {
    n: u32,
    nu1: Rational,
    nun: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Type1NSpec {
    n: u32,
    nu1: Rational,
    nun: Rational,
}

impl WhittakerType1N {
    pub fn new(n: u32, nu1: Rational, nun: Rational) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidType(format!("n must be at least 3, got {n}")));
        }
        if nu1.is_zero() || nun.is_zero() {
            return Err(Error::InvalidType("ν_1 and ν_n must be nonzero".into()));
        }
        Ok(WhittakerType1N { n, nu1, nun })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nu1(&self) -> &Rational {
        &self.nu1
    }

    pub fn nun(&self) -> &Rational {
        &self.nun
    }

    pub fn value(&self, k: GeneratorIndex) -> Option<Rational> {
        let n = self.n as GeneratorIndex;
        match k {
            1 => Some(self.nu1.clone()),
            k if k == n => Some(self.nun.clone()),
            k if k > n => Some(Rational::zero()),
            _ => None,
        }
    }
}

impl TryFrom<Type1NSpec> for WhittakerType1N {
    type Error = Error;
    fn try_from(s: Type1NSpec) -> Result<Self> {
        WhittakerType1N::new(s.n, s.nu1, s.nun)
    }
}

impl From<WhittakerType1N> for Type1NSpec {
    fn from(t: WhittakerType1N) -> Self {
        Type1NSpec {
            n: t.n,
            nu1: t.nu1,
            nun: t.nun,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WhittakerType {
    Order(WhittakerTypeR),
    Pair(WhittakerType1N),
}

impl WhittakerType {
    pub fn value(&self, k: GeneratorIndex) -> Option<Rational> {
        match self {
            WhittakerType::Order(t) => t.value(k),
            WhittakerType::Pair(t) => t.value(k),
        }
    }

    /// Generators checked against a cutoff-`N` object, with the expected
    /// eigenvalue of each. Indices above `N` are listed only where they carry
    /// an eigenvalue; their checks are vacuous.
    pub fn conditions(&self, cutoff: usize) -> Vec<(GeneratorIndex, Rational)> {
        let top = cutoff as GeneratorIndex;
        let ks: Vec<GeneratorIndex> = match self {
            WhittakerType::Order(t) => {
                let r = t.r as GeneratorIndex;
                (r..=top.max(2 * r)).collect()
            }
            WhittakerType::Pair(t) => {
                let n = t.n as GeneratorIndex;
                std::iter::once(1).chain(n..=top.max(n)).collect()
            }
        };
        ks.into_iter()
            .map(|k| (k, self.value(k).expect("subalgebra index")))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisSide {
    Decreasing,
    Increasing,
}

/// A form restricted to levels `0..=cutoff`, stored by its values on one
/// monomial basis. Zero coefficients are not stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DualForm {
    context: VermaContext,
    cutoff: usize,
    side: BasisSide,
    coefficients: BTreeMap<Partition, Rational>,
}

impl DualForm {
    pub fn zero(context: VermaContext, cutoff: usize, side: BasisSide) -> Self {
        DualForm {
            context,
            cutoff,
            side,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        context: VermaContext,
        cutoff: usize,
        side: BasisSide,
        terms: impl IntoIterator<Item = (Partition, Rational)>,
    ) -> Result<Self> {
        let mut f = Self::zero(context, cutoff, side);
        for (p, k) in terms {
            if p.level() > cutoff {
                return Err(Error::CutoffExceeded {
                    level: p.level(),
                    cutoff,
                });
            }
            f.add_term(p, k);
        }
        Ok(f)
    }

    /// The form dual to one basis monomial.
    pub fn dual_basis(
        context: VermaContext,
        cutoff: usize,
        side: BasisSide,
        p: Partition,
    ) -> Result<Self> {
        Self::from_terms(context, cutoff, side, [(p, Rational::one())])
    }

    fn add_term(&mut self, p: Partition, k: Rational) {
        if k.is_zero() {
            return;
        }
        let slot = self
            .coefficients
            .entry(p.clone())
            .or_insert_with(Rational::zero);
        *slot += k;
        if slot.is_zero() {
            self.coefficients.remove(&p);
        }
    }

    pub fn context(&self) -> &VermaContext {
        &self.context
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn side(&self) -> BasisSide {
        self.side
    }

    pub fn terms(&self) -> &BTreeMap<Partition, Rational> {
        &self.coefficients
    }

    pub fn coefficient(&self, p: &Partition) -> Rational {
        self.coefficients
            .get(p)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Coefficients at `level` in the order of [`enumerate_partitions`].
    pub fn level_coordinates(&self, level: usize) -> Vec<Rational> {
        enumerate_partitions(level)
            .iter()
            .map(|p| self.coefficient(p))
            .collect()
    }

    pub fn scaled(&self, k: &Rational) -> DualForm {
        let mut out = Self::zero(self.context.clone(), self.cutoff, self.side);
        for (p, v) in &self.coefficients {
            out.add_term(p.clone(), v * k);
        }
        out
    }

    pub fn add(&self, other: &DualForm) -> Result<DualForm> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (p, v) in &other.coefficients {
            out.add_term(p.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DualForm) -> Result<DualForm> {
        self.add(&other.scaled(&-Rational::one()))
    }

    fn compatible(&self, other: &DualForm) -> Result<()> {
        if self.context != other.context || self.side != other.side || self.cutoff != other.cutoff {
            return Err(Error::ContextMismatch {
                left: format!("{:?} {:?} cutoff {}", self.context, self.side, self.cutoff),
                right: format!(
                    "{:?} {:?} cutoff {}",
                    other.context, other.side, other.cutoff
                ),
            });
        }
        Ok(())
    }

    /// Restriction to levels `0..=cutoff`.
    pub fn restricted(&self, cutoff: usize) -> DualForm {
        let cutoff = cutoff.min(self.cutoff);
        DualForm {
            context: self.context.clone(),
            cutoff,
            side: self.side,
            coefficients: self
                .coefficients
                .iter()
                .filter(|(p, _)| p.level() <= cutoff)
                .map(|(p, k)| (p.clone(), k.clone()))
                .collect(),
        }
    }

    /// The same form expressed on the other basis side.
    pub fn to_side(&self, side: BasisSide) -> DualForm {
        if side == self.side {
            return self.clone();
        }
        let module = VermaModule::shared(&self.context);
        let levels: Vec<Vec<(Partition, Rational)>> = par::map_range(0..self.cutoff + 1, |level| {
            let basis = enumerate_partitions(level);
            let m = module.basis_change(level);
            let coords = self.level_coordinates(level);
            let converted = match side {
                // Value on the increasing monomial u = M e.
                BasisSide::Increasing => m.mul_vec(&coords),
                BasisSide::Decreasing => m.solve(&coords).expect("unimodular basis change"),
            };
            basis.into_iter().zip(converted).collect()
        });
        let mut out = Self::zero(self.context.clone(), self.cutoff, side);
        for (p, k) in levels.into_iter().flatten() {
            out.add_term(p, k);
        }
        out
    }

    pub fn to_json(&self) -> DualFormJson {
        let levels = (0..=self.cutoff)
            .map(|level| LevelJson {
                level,
                terms: enumerate_partitions(level)
                    .into_iter()
                    .filter_map(|p| {
                        let k = self.coefficients.get(&p)?.clone();
                        Some(TermJson {
                            exponents: exponents_of(&p, self.side),
                            coefficient: k,
                        })
                    })
                    .collect(),
            })
            .collect();
        DualFormJson {
            c: self.context.c.clone(),
            delta: self.context.delta.clone(),
            basis_side: self.side,
            cutoff: self.cutoff,
            levels,
        }
    }

    pub fn from_json(json: &DualFormJson) -> Result<Self> {
        let context = VermaContext::new(json.c.clone(), json.delta.clone());
        let mut terms = Vec::new();
        for level in &json.levels {
            for t in &level.terms {
                let p = partition_of(&t.exponents, json.basis_side);
                if p.level() != level.level {
                    return Err(Error::InvalidArgument(format!(
                        "exponents {:?} have level {}, listed under level {}",
                        t.exponents,
                        p.level(),
                        level.level
                    )));
                }
                terms.push((p, t.coefficient.clone()));
            }
        }
        Self::from_terms(context, json.cutoff, json.basis_side, terms)
    }
}

/// Multiplicities `[n_k, ..., n_1]` on the decreasing side and
/// `[n_1, ..., n_k]` on the increasing side, `k` the largest part.
pub fn exponents_of(p: &Partition, side: BasisSide) -> Vec<u32> {
    let mut m = p.multiplicities();
    if side == BasisSide::Decreasing {
        m.reverse();
    }
    m
}

pub fn partition_of(exponents: &[u32], side: BasisSide) -> Partition {
    let mut m = exponents.to_vec();
    if side == BasisSide::Decreasing {
        m.reverse();
    }
    Partition::from_multiplicities(&m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualFormJson {
    pub c: Rational,
    pub delta: Rational,
    pub basis_side: BasisSide,
    pub cutoff: usize,
    pub levels: Vec<LevelJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelJson {
    pub level: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub coefficient: Rational,
}

/// Pairs `v` with `f`. On the increasing side the vector is re-expanded on
/// the increasing monomials first.
pub fn eval_form(f: &DualForm, v: &VermaVector) -> Result<Rational> {
    if v.context() != f.context() {
        return Err(Error::ContextMismatch {
            left: format!("{:?}", f.context()),
            right: format!("{:?}", v.context()),
        });
    }
    if let Some(level) = v.max_level().filter(|&l| l > f.cutoff) {
        return Err(Error::CutoffExceeded {
            level,
            cutoff: f.cutoff,
        });
    }
    let top = v.max_level().unwrap_or(0);
    match f.side {
        BasisSide::Decreasing => Ok(v.terms().iter().map(|(p, k)| k * f.coefficient(p)).sum()),
        BasisSide::Increasing => {
            let module = VermaModule::shared(f.context());
            let mut total = Rational::zero();
            for level in 0..=top {
                let a = v.level_coordinates(level);
                if a.iter().all(Rational::is_zero) {
                    continue;
                }
                let b = module
                    .basis_change(level)
                    .transpose()
                    .solve(&a)
                    .expect("unimodular basis change");
                total += b
                    .iter()
                    .zip(f.level_coordinates(level))
                    .map(|(x, y)| x * &y)
                    .sum::<Rational>();
            }
            Ok(total)
        }
    }
}

/// `(L_m f)(v) = f(L_{-m} v)`, restricted to the levels where it is fully
/// determined. For `m` above the cutoff the result is the zero form of
/// cutoff 0.
pub fn act_on_form(m: GeneratorIndex, f: &DualForm) -> DualForm {
    let raise = m.max(0) as usize;
    if raise > f.cutoff {
        return DualForm::zero(f.context.clone(), 0, f.side);
    }
    let cutoff = f.cutoff - raise;
    let module = VermaModule::shared(&f.context);
    let canonical = f.to_side(BasisSide::Decreasing);
    let labels: Vec<Partition> = (0..=cutoff).flat_map(enumerate_partitions).collect();
    let values = par::map(&labels, |p| {
        let v = match f.side {
            BasisSide::Decreasing => module.act_basis(-m, p),
            BasisSide::Increasing => module.act(-m, &module.increasing_basis_vector(p)),
        };
        v.terms()
            .iter()
            .map(|(q, k)| k * canonical.coefficient(q))
            .sum::<Rational>()
    });
    let mut out = DualForm::zero(f.context.clone(), cutoff, f.side);
    for (p, k) in labels.into_iter().zip(values) {
        out.add_term(p, k);
    }
    out
}

/// Partitions of every level up to `cutoff`.
fn partitions_up_to(cutoff: usize) -> impl Iterator<Item = Partition> {
    (0..=cutoff).flat_map(enumerate_partitions)
}

/// The basic Gaiotto form with fixed multiplicities `(n_{r-1}, ..., n_1)` of
/// the parts below `r`: coefficient `μ_s^{n_s} ... μ_r^{n_r}` on partitions
/// whose parts are all at most `s`.
pub fn gaiotto_basic_form(
    psi: &WhittakerTypeR,
    exponents: &[u32],
    cutoff: usize,
    ctx: &VermaContext,
) -> Result<DualForm> {
    let r = psi.r();
    if exponents.len() != r as usize - 1 {
        return Err(Error::InvalidArgument(format!(
            "order {r} takes {} exponents (n_{{r-1}}, ..., n_1), got {}",
            r - 1,
            exponents.len()
        )));
    }
    let s = psi.rank();
    let terms = partitions_up_to(cutoff).filter_map(|p| {
        if p.largest_part() > s {
            return None;
        }
        let below_r_matches = (1..r).all(|j| p.multiplicity(j) == exponents[(r - 1 - j) as usize]);
        if !below_r_matches {
            return None;
        }
        let k: Rational = (r..=s)
            .map(|j| psi.mu_at(j).pow(p.multiplicity(j)))
            .product();
        Some((p, k))
    });
    DualForm::from_terms(
        ctx.clone(),
        cutoff,
        BasisSide::Decreasing,
        terms.collect::<Vec<_>>(),
    )
}

/// `Σ_A A · f^{A}` over basic Gaiotto forms, keyed by `(n_{r-1}, ..., n_1)`.
pub fn gaiotto_form(
    psi: &WhittakerTypeR,
    coefficients: &BTreeMap<Vec<u32>, Rational>,
    cutoff: usize,
    ctx: &VermaContext,
) -> Result<DualForm> {
    let mut out = DualForm::zero(ctx.clone(), cutoff, BasisSide::Decreasing);
    for (exponents, a) in coefficients {
        out = out.add(&gaiotto_basic_form(psi, exponents, cutoff, ctx)?.scaled(a))?;
    }
    Ok(out)
}

/// `Σ_B B · f^{B}` with the basic BMT form carrying `ν_1^{m_1} ν_n^{m_n}` on
/// the increasing monomial with multiplicities `(m_1, B-key, m_n)`.
pub fn bmt_form(
    psi: &WhittakerType1N,
    coefficients: &BTreeMap<Vec<u32>, Rational>,
    cutoff: usize,
    ctx: &VermaContext,
) -> Result<DualForm> {
    let n = psi.n();
    if let Some(bad) = coefficients.keys().find(|k| k.len() != n as usize - 2) {
        return Err(Error::InvalidArgument(format!(
            "BMT keys for n = {n} are (m_2, ..., m_{}), got {bad:?}",
            n - 1
        )));
    }
    let mut terms = Vec::new();
    for p in partitions_up_to(cutoff) {
        if p.largest_part() > n {
            continue;
        }
        let key: Vec<u32> = (2..n).map(|j| p.multiplicity(j)).collect();
        let Some(b) = coefficients.get(&key) else {
            continue;
        };
        let k = b * &psi.nu1().pow(p.multiplicity(1)) * psi.nun().pow(p.multiplicity(n));
        terms.push((p, k));
    }
    DualForm::from_terms(ctx.clone(), cutoff, BasisSide::Increasing, terms)
}

/// `B_{m_2..m_{n-1}} = λ_2^{m_2} ... λ_{n-1}^{m_{n-1}}` for tuples of level
/// at most `cutoff`, zero values dropped.
pub fn bmt_special_coefficients(
    psi: &WhittakerType1N,
    lambdas: &[Rational],
    cutoff: usize,
) -> Result<BTreeMap<Vec<u32>, Rational>> {
    let n = psi.n();
    if lambdas.len() != n as usize - 2 {
        return Err(Error::InvalidArgument(format!(
            "n = {n} takes {} parameters λ_2..λ_{}, got {}",
            n - 2,
            n - 1,
            lambdas.len()
        )));
    }
    let mut out = BTreeMap::new();
    for p in partitions_up_to(cutoff) {
        if p.parts().iter().any(|&x| x < 2 || x >= n) {
            continue;
        }
        let key: Vec<u32> = (2..n).map(|j| p.multiplicity(j)).collect();
        let k: Rational = key.iter().zip(lambdas).map(|(&m, l)| l.pow(m)).product();
        if !k.is_zero() {
            out.insert(key, k);
        }
    }
    Ok(out)
}

pub fn bmt_special_form(
    psi: &WhittakerType1N,
    lambdas: &[Rational],
    cutoff: usize,
    ctx: &VermaContext,
) -> Result<DualForm> {
    bmt_form(
        psi,
        &bmt_special_coefficients(psi, lambdas, cutoff)?,
        cutoff,
        ctx,
    )
}

/// The vector `w`, truncated at the cutoff, with `⟨L_{-λ}Δ, w⟩ = f(L_{-λ}Δ)`
/// for every `|λ| <= cutoff`: one Gram solve per level.
pub fn raise_indices(f: &DualForm) -> Result<VermaVector> {
    let canonical = f.to_side(BasisSide::Decreasing);
    let module = VermaModule::shared(f.context());
    let levels = par::map_range(0..f.cutoff + 1, |level| {
        let rhs = canonical.level_coordinates(level);
        if rhs.iter().all(Rational::is_zero) {
            return Ok(Vec::new());
        }
        let b = solve(&module.gram(level), &rhs)?;
        Ok(enumerate_partitions(level)
            .into_iter()
            .zip(b)
            .collect::<Vec<_>>())
    });
    let mut w = VermaVector::zero(f.context().clone());
    for level in levels {
        for (p, k) in level? {
            w.add_term(p, k);
        }
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureTerm {
    pub level: usize,
    pub partition: Partition,
    pub residual: Rational,
}

/// Outcome of one generator's check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    /// Number of levels on which the check is complete.
    pub complete_levels: usize,
    pub residual_zero: bool,
    pub first_failure: Option<FailureTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl VerificationReport {
    fn from_checks(checks: Vec<CheckReport>) -> Self {
        VerificationReport {
            passed: checks.iter().all(|c| c.residual_zero),
            checks,
        }
    }

    pub fn first_failure(&self) -> Option<&CheckReport> {
        self.checks.iter().find(|c| !c.residual_zero)
    }
}

/// Compares two coefficient lookups on every partition of levels
/// `0..complete_levels`.
fn compare_levels(
    check: String,
    complete_levels: usize,
    lhs: impl Fn(&Partition) -> Rational,
    rhs: impl Fn(&Partition) -> Rational,
) -> CheckReport {
    let first_failure = partitions_up_to(complete_levels.saturating_sub(1))
        .take_while(|_| complete_levels > 0)
        .find_map(|p| {
            let residual = lhs(&p) - rhs(&p);
            (!residual.is_zero()).then(|| FailureTerm {
                level: p.level(),
                partition: p,
                residual,
            })
        });
    CheckReport {
        check,
        complete_levels,
        residual_zero: first_failure.is_none(),
        first_failure,
    }
}

fn complete_levels(cutoff: usize, k: GeneratorIndex) -> usize {
    (cutoff as i64 - k.max(0) as i64 + 1).max(0) as usize
}

/// `L_k f = ψ(L_k) f` on every level where both sides are determined.
pub fn verify_whittaker_form(f: &DualForm, ty: &WhittakerType) -> VerificationReport {
    let conditions = ty.conditions(f.cutoff());
    let checks = par::map(&conditions, |(k, eigen)| {
        let levels = complete_levels(f.cutoff(), *k);
        let image = act_on_form(*k, f);
        compare_levels(
            format!("L_{k}"),
            levels,
            |p| image.coefficient(p),
            |p| eigen * &f.coefficient(p),
        )
    });
    VerificationReport::from_checks(checks)
}

/// `(L_k - ψ(L_k)) w = 0` on levels `ℓ` with `ℓ + k <= cutoff`, for a vector
/// known exactly up to `cutoff`.
pub fn verify_whittaker_state(
    w: &VermaVector,
    cutoff: usize,
    ty: &WhittakerType,
) -> VerificationReport {
    let module = VermaModule::shared(w.context());
    let conditions = ty.conditions(cutoff);
    let checks = par::map(&conditions, |(k, eigen)| {
        let image = module.act(*k, &w.truncated(cutoff));
        compare_levels(
            format!("L_{k}"),
            complete_levels(cutoff, *k),
            |p| image.coefficient(p),
            |p| eigen * &w.coefficient(p),
        )
    });
    VerificationReport::from_checks(checks)
}

/// `∂/∂μ_l` of `Π_{j=r}^{s} μ_j^{n_j}` at partition `p`, zero unless every
/// part lies in `[r, s]`.
fn basic_coefficient_derivative(psi: &WhittakerTypeR, p: &Partition, l: u32) -> Rational {
    let (r, s) = (psi.r(), psi.rank());
    if p.parts().iter().any(|&x| x < r || x > s) {
        return Rational::zero();
    }
    let n_l = p.multiplicity(l);
    if n_l == 0 {
        return Rational::zero();
    }
    let rest: Rational = (r..=s)
        .filter(|&j| j != l)
        .map(|j| psi.mu_at(j).pow(p.multiplicity(j)))
        .product();
    Rational::from(n_l as i64) * psi.mu_at(l).pow(n_l - 1) * rest
}

/// Checks `L_0` and `L_i` (`1 <= i < r`) on the basic Gaiotto form with all
/// lower exponents zero against their expressions as first-order
/// differential operators in the `μ`'s.
pub fn check_l0_li_on_basic(
    psi: &WhittakerTypeR,
    cutoff: usize,
    ctx: &VermaContext,
) -> Result<VerificationReport> {
    let exponents = vec![0; psi.r() as usize - 1];
    let f = gaiotto_basic_form(psi, &exponents, cutoff, ctx)?;
    let (r, s) = (psi.r(), psi.rank());
    let mut checks = Vec::new();
    let l0 = act_on_form(0, &f);
    checks.push(compare_levels(
        "L_0".into(),
        cutoff + 1,
        |p| l0.coefficient(p),
        |p| {
            let weighted: Rational = (r..=s)
                .map(|l| {
                    Rational::from(l as i64)
                        * psi.mu_at(l)
                        * basic_coefficient_derivative(psi, p, l)
                })
                .sum();
            &ctx.delta * &f.coefficient(p) + weighted
        },
    ));
    for i in 1..r {
        let li = act_on_form(i as GeneratorIndex, &f);
        checks.push(compare_levels(
            format!("L_{i}"),
            complete_levels(cutoff, i as GeneratorIndex),
            |p| li.coefficient(p),
            |p| {
                (r..=s.saturating_sub(i))
                    .map(|l| {
                        Rational::from(l as i64 - i as i64)
                            * psi.mu_at(i + l)
                            * basic_coefficient_derivative(psi, p, l)
                    })
                    .sum()
            },
        ));
    }
    Ok(VerificationReport::from_checks(checks))
}

/// Number of exponent tuples `(n_{r-1}, ..., n_1)` with `Σ i n_i <= cutoff`.
pub fn admissible_tuple_count(r: u32, cutoff: usize) -> usize {
    partitions_up_to(cutoff)
        .filter(|p| p.largest_part() < r)
        .count()
}

/// Dimension of the space of cutoff-`N` forms (arbitrary coefficients on
/// every level) satisfying all complete Whittaker conditions of type `ψ_r`,
/// computed as an exact nullity.
pub fn whittaker_form_solution_dimension(
    psi: &WhittakerTypeR,
    cutoff: usize,
    ctx: &VermaContext,
) -> usize {
    let module = VermaModule::shared(ctx);
    let labels: Vec<Partition> = partitions_up_to(cutoff).collect();
    let column: HashMap<&Partition, usize> =
        labels.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let r = psi.r() as GeneratorIndex;
    let conditions: Vec<(GeneratorIndex, Partition)> = (r..=cutoff as GeneratorIndex)
        .flat_map(|k| partitions_up_to(cutoff - k as usize).map(move |p| (k, p)))
        .collect();
    let rows = par::map(&conditions, |(k, p)| {
        let mut row = vec![Rational::zero(); labels.len()];
        for (q, x) in module.act_basis(-k, p).terms() {
            row[column[q]] += x;
        }
        row[column[p]] -= psi.value(*k).expect("subalgebra index");
        row
    });
    if rows.is_empty() {
        return labels.len();
    }
    labels.len() - Matrix::from_rows(rows).rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    fn ctx() -> VermaContext {
        VermaContext::new(q(11, 3), q(2, 7))
    }

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec())
    }

    fn type_r(r: u32, mu: &[(i64, i64)]) -> WhittakerTypeR {
        WhittakerTypeR::new(r, mu.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    #[test]
    fn type_validation() {
        assert_eq!(type_r(2, &[(2, 1), (3, 1), (0, 1)]).rank(), 3);
        assert!(WhittakerTypeR::new(1, vec![q(0, 1), q(0, 1)]).is_err());
        assert!(WhittakerTypeR::new(2, vec![q(1, 1)]).is_err());
        assert!(WhittakerType1N::new(2, q(1, 1), q(1, 1)).is_err());
        assert!(WhittakerType1N::new(4, q(0, 1), q(1, 1)).is_err());
        let t = WhittakerType::Order(type_r(1, &[(3, 2), (5, 1)]));
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"kind":"order","r":1,"mu":["3/2","5"]}"#);
        assert_eq!(serde_json::from_str::<WhittakerType>(&json).unwrap(), t);
    }

    #[test]
    fn eval_examples() {
        let ctx = ctx();
        let m = VermaModule::shared(&ctx);
        let f1 = DualForm::dual_basis(ctx.clone(), 3, BasisSide::Decreasing, p(&[1])).unwrap();
        assert_eq!(
            eval_form(&f1, &VermaVector::basis(ctx.clone(), p(&[1]))).unwrap(),
            q(1, 1)
        );
        let f2 = DualForm::dual_basis(ctx.clone(), 3, BasisSide::Decreasing, p(&[2])).unwrap();
        assert_eq!(
            eval_form(&f2, &VermaVector::basis(ctx.clone(), p(&[1, 1]))).unwrap(),
            q(0, 1)
        );
        // L_{-1}L_{-2} = L_{-2}L_{-1} + L_{-3}
        let v = m.act_word(&[-1, -2], &VermaVector::highest_weight(ctx.clone()));
        let f3 = DualForm::from_terms(
            ctx.clone(),
            3,
            BasisSide::Decreasing,
            [
                (p(&[2, 1]), q(5, 1)),
                (p(&[3]), q(-2, 1)),
                (p(&[1, 1, 1]), q(7, 1)),
            ],
        )
        .unwrap();
        assert_eq!(eval_form(&f3, &v).unwrap(), q(3, 1));
        let deep = VermaVector::basis(ctx.clone(), p(&[4]));
        assert_eq!(
            eval_form(&f3, &deep),
            Err(Error::CutoffExceeded {
                level: 4,
                cutoff: 3
            })
        );
    }

    #[test]
    fn eval_is_side_independent() {
        let ctx = ctx();
        let m = VermaModule::shared(&ctx);
        let f = DualForm::from_terms(
            ctx.clone(),
            4,
            BasisSide::Increasing,
            partitions_up_to(4)
                .enumerate()
                .map(|(i, p)| (p, q(i as i64 * 3 - 7, i as i64 + 1))),
        )
        .unwrap();
        let g = f.to_side(BasisSide::Decreasing);
        assert_eq!(g.to_side(BasisSide::Increasing), f);
        for part in partitions_up_to(4) {
            let v = m
                .act_word(&[-1, -2], &VermaVector::basis(ctx.clone(), part.clone()))
                .truncated(4);
            let u = m.increasing_basis_vector(&part);
            assert_eq!(eval_form(&f, &v).unwrap(), eval_form(&g, &v).unwrap());
            assert_eq!(eval_form(&f, &u).unwrap(), f.coefficient(&part));
            assert_eq!(
                eval_form(&g, &VermaVector::basis(ctx.clone(), part.clone())).unwrap(),
                g.coefficient(&part)
            );
        }
    }

    #[test]
    fn action_on_forms() {
        let ctx = ctx();
        let f1 = DualForm::dual_basis(ctx.clone(), 5, BasisSide::Decreasing, p(&[1])).unwrap();
        assert_eq!(act_on_form(0, &f1), f1.scaled(&(&ctx.delta + q(1, 1))));
        let big = act_on_form(6, &f1);
        assert_eq!((big.cutoff(), big.is_zero()), (0, true));
        assert_eq!(act_on_form(2, &f1).cutoff(), 3);
        assert_eq!(act_on_form(-2, &f1).cutoff(), 5);

        let psi = type_r(1, &[(3, 2), (5, 1)]);
        let g = gaiotto_basic_form(&psi, &[], 5, &ctx).unwrap();
        let l1 = act_on_form(1, &g);
        assert_eq!(
            l1.coefficient(&Partition::empty()),
            q(3, 2) * g.coefficient(&Partition::empty())
        );
        // both sides of the module action agree
        let gi = g.to_side(BasisSide::Increasing);
        for k in -2..=3 {
            assert_eq!(
                act_on_form(k, &gi).to_side(BasisSide::Decreasing),
                act_on_form(k, &g),
                "k = {k}"
            );
        }
    }

    #[test]
    fn gaiotto_coefficients() {
        let ctx = ctx();
        let psi1 = type_r(1, &[(3, 2), (5, 1)]);
        let f = gaiotto_basic_form(&psi1, &[], 4, &ctx).unwrap();
        assert_eq!(f.coefficient(&Partition::empty()), q(1, 1));
        assert_eq!(f.coefficient(&p(&[2, 1])), q(15, 2));
        assert_eq!(f.coefficient(&p(&[3])), q(0, 1));
        let psi2 = type_r(2, &[(2, 1), (-1, 3), (7, 1)]);
        let f = gaiotto_basic_form(&psi2, &[1], 6, &ctx).unwrap();
        assert_eq!(f.coefficient(&p(&[4, 1])), q(7, 1));
        assert_eq!(f.coefficient(&p(&[4])), q(0, 1));
        assert_eq!(f.coefficient(&p(&[3, 2, 1])), q(-2, 3));
        assert!(gaiotto_basic_form(&psi2, &[], 3, &ctx).is_err());

        let single = BTreeMap::from([(vec![], q(1, 1))]);
        assert_eq!(
            gaiotto_form(&psi1, &single, 4, &ctx).unwrap(),
            gaiotto_basic_form(&psi1, &[], 4, &ctx).unwrap()
        );
        assert!(gaiotto_form(&psi1, &BTreeMap::new(), 4, &ctx)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn bmt_coefficients() {
        let ctx = ctx();
        let psi3 = WhittakerType1N::new(3, q(1, 1), q(2, 1)).unwrap();
        let f = bmt_form(&psi3, &BTreeMap::from([(vec![0], q(1, 1))]), 6, &ctx).unwrap();
        assert_eq!(f.side(), BasisSide::Increasing);
        assert_eq!(f.coefficient(&p(&[3, 1, 1])), q(2, 1));
        assert_eq!(f.coefficient(&p(&[3, 3])), q(4, 1));
        assert_eq!(f.coefficient(&p(&[2, 1])), q(0, 1));
        assert!(bmt_form(&psi3, &BTreeMap::new(), 6, &ctx)
            .unwrap()
            .is_zero());

        let psi4 = WhittakerType1N::new(4, q(2, 5), q(-3, 1)).unwrap();
        let f = bmt_form(&psi4, &BTreeMap::from([(vec![1, 0], q(1, 1))]), 6, &ctx).unwrap();
        assert_eq!(f.coefficient(&p(&[2])), q(1, 1));

        let zeros = bmt_special_coefficients(&psi4, &[q(0, 1), q(0, 1)], 6).unwrap();
        assert_eq!(zeros, BTreeMap::from([(vec![0, 0], q(1, 1))]));
        let only = bmt_special_coefficients(&psi3, &[q(9, 1)], 6).unwrap();
        assert_eq!(
            only.keys().cloned().collect::<Vec<_>>(),
            (0..=3).map(|m| vec![m]).collect::<Vec<_>>()
        );
        let b = bmt_special_coefficients(&psi4, &[q(1, 1), q(0, 1)], 4).unwrap();
        assert_eq!(b, (0..=2).map(|m| (vec![m, 0], q(1, 1))).collect());
    }

    #[test]
    fn raising_indices() {
        let ctx = ctx();
        let psi = type_r(1, &[(3, 2), (0, 1)]);
        let f = gaiotto_basic_form(&psi, &[], 4, &ctx).unwrap();
        let w = raise_indices(&f).unwrap();
        assert_eq!(w.coefficient(&Partition::empty()), q(1, 1));
        assert_eq!(w.coefficient(&p(&[1])), q(21, 8));
        let m = VermaModule::shared(&ctx);
        for lambda in partitions_up_to(4) {
            assert_eq!(m.pairing_with_basis(&lambda, &w), f.coefficient(&lambda));
        }
        assert!(
            raise_indices(&DualForm::zero(ctx, 4, BasisSide::Decreasing))
                .unwrap()
                .is_zero()
        );
    }

    #[test]
    fn verification_of_forms_and_states() {
        let ctx = ctx();
        let psi = type_r(2, &[(2, 1), (-1, 3), (7, 1)]);
        let a = BTreeMap::from([(vec![0], q(1, 1)), (vec![1], q(-3, 2)), (vec![2], q(4, 1))]);
        let f = gaiotto_form(&psi, &a, 5, &ctx).unwrap();
        let ty = WhittakerType::Order(psi.clone());
        let report = verify_whittaker_form(&f, &ty);
        assert!(report.passed, "{report:?}");
        let w = raise_indices(&f).unwrap();
        assert!(verify_whittaker_state(&w, 5, &ty).passed);

        let psi1 = type_r(1, &[(3, 2), (5, 1)]);
        let single = DualForm::dual_basis(ctx.clone(), 4, BasisSide::Decreasing, p(&[1])).unwrap();
        let report = verify_whittaker_form(&single, &WhittakerType::Order(psi1));
        assert!(!report.passed);
        let l2 = report.checks.iter().find(|c| c.check == "L_2").unwrap();
        assert_eq!(l2.first_failure.as_ref().unwrap().level, 1);

        let bmt = WhittakerType1N::new(4, q(2, 5), q(-3, 1)).unwrap();
        let b = BTreeMap::from([(vec![0, 0], q(1, 1)), (vec![1, 2], q(-5, 7))]);
        let f = bmt_form(&bmt, &b, 5, &ctx).unwrap();
        assert!(verify_whittaker_form(&f, &WhittakerType::Pair(bmt)).passed);
    }

    #[test]
    fn zeroth_and_lower_modes() {
        let ctx = ctx();
        let r1 = check_l0_li_on_basic(&type_r(1, &[(3, 2), (5, 1)]), 4, &ctx).unwrap();
        assert!(r1.passed);
        assert_eq!(r1.checks.len(), 1);
        let r2 = check_l0_li_on_basic(&type_r(2, &[(2, 1), (-1, 3), (7, 1)]), 5, &ctx).unwrap();
        assert!(r2.passed, "{r2:?}");
        assert_eq!(r2.checks.len(), 2);
    }

    #[test]
    fn lower_mode_formula_misses_parts_below_r() {
        // f(L_{-1}L_{-2}|Δ⟩) = f(L_{-3}|Δ⟩) = μ_3, while every derivative term vanishes on [2]
        let ctx = ctx();
        let psi = type_r(3, &[(5, 4), (-2, 1), (3, 7), (1, 2)]);
        let report = check_l0_li_on_basic(&psi, 5, &ctx).unwrap();
        assert!(!report.passed);
        assert!(report.checks[0].residual_zero);
        let first = report.first_failure().unwrap();
        assert_eq!(first.check, "L_1");
        let term = first.first_failure.as_ref().unwrap();
        assert_eq!(
            (term.level, term.partition.clone(), term.residual.clone()),
            (2, p(&[2]), q(5, 4))
        );
        let f = gaiotto_basic_form(&psi, &[0, 0], 5, &ctx).unwrap();
        assert_eq!(act_on_form(1, &f).coefficient(&p(&[2])), q(5, 4));
    }

    #[test]
    fn converse_dimension() {
        let ctx = ctx();
        assert_eq!(
            whittaker_form_solution_dimension(&type_r(1, &[(3, 2), (5, 1)]), 3, &ctx),
            1
        );
        assert_eq!(admissible_tuple_count(1, 4), 1);
        assert_eq!(admissible_tuple_count(2, 4), 5);
        assert_eq!(admissible_tuple_count(3, 4), 9);
    }

    #[test]
    fn json_round_trip() {
        let ctx = ctx();
        let psi = type_r(2, &[(2, 1), (-1, 3), (7, 1)]);
        let f = gaiotto_basic_form(&psi, &[1], 4, &ctx).unwrap();
        let json = f.to_json();
        assert_eq!(json.levels.len(), 5);
        assert_eq!(DualForm::from_json(&json).unwrap(), f);
        let g = f.to_side(BasisSide::Increasing);
        assert_eq!(DualForm::from_json(&g.to_json()).unwrap(), g);
        assert_eq!(
            exponents_of(&p(&[3, 1, 1]), BasisSide::Decreasing),
            vec![1, 0, 2]
        );
        assert_eq!(
            exponents_of(&p(&[3, 1, 1]), BasisSide::Increasing),
            vec![2, 0, 1]
        );
    }
}
