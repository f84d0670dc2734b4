//! Core types for arithmetical semigroups: a table of primes graded by degree
//! or by norm, elements as sorted factorizations over that table, and the
//! Mobius / divisor / duality calculus on them.
//!
//! Everything here is exact. Degrees and integer norms live in `u64`, values
//! of arithmetical functions in `BigRational`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use smallvec::SmallVec;
use thiserror::Error;

/// Dense index of a prime inside its table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimeId(pub u32);

/// How the semigroup is graded: by integer degree (additive, with element
/// counts per degree) or by integer norm (multiplicative).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    Degree,
    Norm,
}

/// A prime of the semigroup. `size` is its degree or norm according to the
/// table's grading; `norm` is the exact integer norm when the backend has one
/// (graph backends do not: their norms are powers of an irrational radius).
#[derive(Clone, Debug)]
pub struct Prime {
    pub id: PrimeId,
    pub size: u64,
    pub norm: Option<u64>,
    pub label: String,
}

/// The prime table of a semigroup, sorted by `(size, backend order)` with ids
/// equal to positions. Backends guarantee the table is complete up to its
/// stated horizon.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    grading: Grading,
    primes: Vec<Prime>,
}

impl PrimeTable {
    /// Build a table from `(size, norm, label)` rows already in canonical
    /// order. Panics if sizes decrease: that would corrupt every minimum
    /// computation downstream.
    pub fn new(grading: Grading, rows: Vec<(u64, Option<u64>, String)>) -> Self {
        let mut primes = Vec::with_capacity(rows.len());
        for (i, (size, norm, label)) in rows.into_iter().enumerate() {
            if let Some(prev) = primes.last() {
                let prev: &Prime = prev;
                assert!(prev.size <= size, "prime table rows must be size-sorted");
            }
            primes.push(Prime {
                id: PrimeId(i as u32),
                size,
                norm,
                label,
            });
        }
        Self { grading, primes }
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn prime(&self, id: PrimeId) -> &Prime {
        &self.primes[id.0 as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Prime> {
        self.primes.iter()
    }

    /// Ids of all primes with `size <= bound`, i.e. a prefix of the table.
    pub fn ids_with_size_at_most(&self, bound: u64) -> impl Iterator<Item = PrimeId> + '_ {
        self.primes
            .iter()
            .take_while(move |p| p.size <= bound)
            .map(|p| p.id)
    }
}

pub type Factors = SmallVec<[(PrimeId, u32); 6]>;

/// An element of the semigroup: a sorted list of `(prime, multiplicity)`
/// pairs. The empty list is the identity. `size` caches the degree (sum) or
/// norm (product) under the owning table's grading.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Element {
    factors: Factors,
    size: u64,
}

impl Element {
    pub fn identity(table: &PrimeTable) -> Self {
        Self {
            factors: Factors::new(),
            size: match table.grading() {
                Grading::Degree => 0,
                Grading::Norm => 1,
            },
        }
    }

    /// Build an element from factor pairs. Pairs must be sorted by id with no
    /// repeats and positive multiplicities.
    pub fn from_factors(
        table: &PrimeTable,
        factors: impl IntoIterator<Item = (PrimeId, u32)>,
    ) -> Result<Self, CoreError> {
        let mut v = Factors::new();
        for (id, m) in factors {
            if id.0 as usize >= table.len() {
                return Err(CoreError::UnknownPrime(id.0));
            }
            if m == 0 {
                return Err(CoreError::ZeroMultiplicity);
            }
            if let Some(&(prev, _)) = v.last() {
                if prev >= id {
                    return Err(CoreError::FactorsNotSorted);
                }
            }
            v.push((id, m));
        }
        let size = element_size(table, &v)?;
        Ok(Self { factors: v, size })
    }

    pub fn factors(&self) -> &[(PrimeId, u32)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Degree or norm of the element under the table's grading.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// Total number of prime factors counted with multiplicity.
    pub fn big_omega(&self) -> u64 {
        self.factors.iter().map(|&(_, m)| m as u64).sum()
    }

    /// Exact integer norm, when every prime in the table carries one.
    pub fn norm(&self, table: &PrimeTable) -> Result<u64, CoreError> {
        let mut acc: u128 = 1;
        for &(id, m) in &self.factors {
            let p = table.prime(id);
            let n = p
                .norm
                .ok_or_else(|| CoreError::NormUnavailable(p.label.clone()))?;
            for _ in 0..m {
                acc = acc.checked_mul(n as u128).ok_or(CoreError::NormOverflow)?;
                if acc > u64::MAX as u128 {
                    return Err(CoreError::NormOverflow);
                }
            }
        }
        Ok(acc as u64)
    }

    pub fn display(&self, table: &PrimeTable) -> String {
        if self.is_identity() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for &(id, m) in &self.factors {
            let label = &table.prime(id).label;
            if m == 1 {
                parts.push(format!("({label})"));
            } else {
                parts.push(format!("({label})^{m}"));
            }
        }
        parts.join("*")
    }
}

fn element_size(table: &PrimeTable, factors: &Factors) -> Result<u64, CoreError> {
    match table.grading() {
        Grading::Degree => {
            let mut s: u64 = 0;
            for &(id, m) in factors {
                s = s
                    .checked_add(
                        table
                            .prime(id)
                            .size
                            .checked_mul(m as u64)
                            .ok_or(CoreError::NormOverflow)?,
                    )
                    .ok_or(CoreError::NormOverflow)?;
            }
            Ok(s)
        }
        Grading::Norm => {
            let mut acc: u128 = 1;
            for &(id, m) in factors {
                let n = table.prime(id).size as u128;
                for _ in 0..m {
                    acc = acc.checked_mul(n).ok_or(CoreError::NormOverflow)?;
                    if acc > u64::MAX as u128 {
                        return Err(CoreError::NormOverflow);
                    }
                }
            }
            Ok(acc as u64)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("the identity has no prime factors")]
    IdentityHasNoPrimeFactors,
    #[error("factor list must be sorted by prime id without repeats")]
    FactorsNotSorted,
    #[error("factor multiplicities must be positive")]
    ZeroMultiplicity,
    #[error("prime id {0} is not in the table")]
    UnknownPrime(u32),
    #[error("prime {0} has no exact integer norm")]
    NormUnavailable(String),
    #[error("norm or degree does not fit in 64 bits")]
    NormOverflow,
    #[error("duality weight must vanish at the identity size")]
    WeightNotZeroAtIdentity,
    #[error("duality weight must vanish at infinity")]
    WeightNotZeroAtInfinity,
}

/// A set of primes with a membership predicate, an optional exact density
/// among all primes, and a human description.
#[derive(Clone)]
pub struct PrimeSet {
    pub description: String,
    pub known_density: Option<BigRational>,
    pred: Arc<dyn Fn(&Prime) -> bool + Send + Sync>,
}

impl fmt::Debug for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrimeSet")
            .field("description", &self.description)
            .field("known_density", &self.known_density)
            .finish()
    }
}

impl PrimeSet {
    pub fn new(
        description: impl Into<String>,
        known_density: Option<BigRational>,
        pred: impl Fn(&Prime) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            description: description.into(),
            known_density,
            pred: Arc::new(pred),
        }
    }

    pub fn all() -> Self {
        Self::new("all primes", Some(BigRational::one()), |_| true)
    }

    pub fn none() -> Self {
        Self::new("no primes", Some(BigRational::zero()), |_| false)
    }

    pub fn from_ids(description: impl Into<String>, ids: std::collections::BTreeSet<u32>) -> Self {
        Self::new(description, None, move |p| ids.contains(&p.id.0))
    }

    pub fn contains(&self, p: &Prime) -> bool {
        (self.pred)(p)
    }
}

/// Hint about where an arithmetical function is supported, used to skip work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportHint {
    All,
    DistinguishedOnly,
    IdentityOnly,
}

/// An arithmetical function with exact rational values.
#[derive(Clone)]
pub struct ArithFn {
    pub description: String,
    pub support_hint: SupportHint,
    /// True when the function takes the value 1 at the identity.
    pub normalized_at_identity: bool,
    eval: Arc<dyn Fn(&PrimeTable, &Element) -> Result<BigRational, CoreError> + Send + Sync>,
}

impl fmt::Debug for ArithFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArithFn")
            .field("description", &self.description)
            .field("support_hint", &self.support_hint)
            .finish()
    }
}

impl ArithFn {
    pub fn new(
        description: impl Into<String>,
        support_hint: SupportHint,
        normalized_at_identity: bool,
        eval: impl Fn(&PrimeTable, &Element) -> Result<BigRational, CoreError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            description: description.into(),
            support_hint,
            normalized_at_identity,
            eval: Arc::new(eval),
        }
    }

    pub fn evaluate(&self, table: &PrimeTable, g: &Element) -> Result<BigRational, CoreError> {
        (self.eval)(table, g)
    }

    /// The convolution identity: 1 at the identity, 0 elsewhere.
    pub fn convolution_identity() -> Self {
        Self::new("identity", SupportHint::IdentityOnly, true, |_, g| {
            Ok(if g.is_identity() {
                BigRational::one()
            } else {
                BigRational::zero()
            })
        })
    }

    /// The constant function 1.
    pub fn one() -> Self {
        Self::new("one", SupportHint::All, true, |_, _| Ok(BigRational::one()))
    }

    /// The Mobius function as an `ArithFn`.
    pub fn mobius_fn() -> Self {
        Self::new("mobius", SupportHint::All, true, |_, g| {
            Ok(BigRational::from_integer(BigInt::from(mobius(g))))
        })
    }

    /// Power-decay function supported on the distinguished set of `set`:
    /// `a(g) = norm(g)^-alpha` for distinguished `g != e`, `a(e) = 1`, and 0
    /// elsewhere. Exactness restricts `alpha` to positive integers.
    pub fn power_decay(alpha: u32, set: PrimeSet) -> Self {
        let desc = format!(
            "power-decay alpha={alpha} on distinguished({})",
            set.description
        );
        Self::new(
            desc,
            SupportHint::DistinguishedOnly,
            true,
            move |table, g| {
                if g.is_identity() {
                    return Ok(BigRational::one());
                }
                if !is_distinguished(table, g, &set) {
                    return Ok(BigRational::zero());
                }
                let n = g.norm(table)?;
                Ok(BigRational::new(BigInt::one(), BigInt::from(n).pow(alpha)))
            },
        )
    }

    /// Finite-support function given by an explicit table (plus 1 at the
    /// identity when `normalized` is set).
    pub fn from_table(
        description: impl Into<String>,
        map: std::collections::HashMap<Element, BigRational>,
        normalized: bool,
    ) -> Self {
        Self::new(description, SupportHint::All, normalized, move |_, g| {
            if let Some(v) = map.get(g) {
                return Ok(v.clone());
            }
            Ok(if normalized && g.is_identity() {
                BigRational::one()
            } else {
                BigRational::zero()
            })
        })
    }
}

/// Generalized Mobius function: `(-1)^k` on products of `k` distinct primes,
/// 0 on anything divisible by a square, 1 at the identity.
pub fn mobius(g: &Element) -> i64 {
    for &(_, m) in g.factors() {
        if m > 1 {
            return 0;
        }
    }
    if g.omega() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Number of divisors of `g`.
pub fn divisor_count(g: &Element) -> u64 {
    g.factors().iter().map(|&(_, m)| m as u64 + 1).product()
}

/// Iterator over all divisor pairs `(h, g/h)` of `g`, in lexicographic order
/// of the multiplicity vector of `h` (last coordinate fastest).
pub struct Divisors<'a> {
    table: &'a PrimeTable,
    base: &'a Element,
    current: Vec<u32>,
    done: bool,
}

pub fn divisors<'a>(table: &'a PrimeTable, g: &'a Element) -> Divisors<'a> {
    Divisors {
        table,
        base: g,
        current: vec![0; g.omega()],
        done: false,
    }
}

impl<'a> Iterator for Divisors<'a> {
    type Item = (Element, Element);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut h = Factors::new();
        let mut co = Factors::new();
        for (i, &(id, m)) in self.base.factors().iter().enumerate() {
            let a = self.current[i];
            if a > 0 {
                h.push((id, a));
            }
            if a < m {
                co.push((id, m - a));
            }
        }
        let out = (
            Element {
                size: element_size(self.table, &h).expect("divisor size fits"),
                factors: h,
            },
            Element {
                size: element_size(self.table, &co).expect("cofactor size fits"),
                factors: co,
            },
        );
        // Odometer step, last coordinate fastest.
        self.done = true;
        for i in (0..self.current.len()).rev() {
            if self.current[i] < self.base.factors()[i].1 {
                self.current[i] += 1;
                for c in &mut self.current[i + 1..] {
                    *c = 0;
                }
                self.done = false;
                break;
            }
        }
        Some(out)
    }
}

/// Dirichlet convolution `(f1 * f2)(g) = sum over h | g of f1(h) f2(g/h)`.
pub fn dirichlet_convolve(
    table: &PrimeTable,
    f1: &ArithFn,
    f2: &ArithFn,
    g: &Element,
) -> Result<BigRational, CoreError> {
    let mut acc = BigRational::zero();
    for (h, co) in divisors(table, g) {
        let a = f1.evaluate(table, &h)?;
        if a.is_zero() {
            continue;
        }
        let b = f2.evaluate(table, &co)?;
        if b.is_zero() {
            continue;
        }
        acc += a * b;
    }
    Ok(acc)
}

/// Minimal prime size in `g` together with the primes attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremePrimeData {
    /// Minimal (or maximal) prime degree or norm among the factors.
    pub size: u64,
    /// Ids of the primes attaining it, in table order.
    pub attaining: Vec<PrimeId>,
    /// How many of the attaining primes lie in the queried set, when one was
    /// supplied.
    pub in_set: Option<u64>,
}

/// Data of the minimal prime factor. Errors on the identity, which has none.
pub fn min_prime_data(table: &PrimeTable, g: &Element) -> Result<ExtremePrimeData, CoreError> {
    if g.is_identity() {
        return Err(CoreError::IdentityHasNoPrimeFactors);
    }
    // Factors are sorted by id and ids are sorted by size, so the minimal
    // size sits at the front and its attainers form a prefix run.
    let min_size = table.prime(g.factors()[0].0).size;
    let attaining: Vec<PrimeId> = g
        .factors()
        .iter()
        .map(|&(id, _)| id)
        .take_while(|&id| table.prime(id).size == min_size)
        .collect();
    Ok(ExtremePrimeData {
        size: min_size,
        attaining,
        in_set: None,
    })
}

/// Data of the maximal prime factor; with a set, also the count `Q_S(g)` of
/// attaining primes inside it. For the identity the maximum is 0 (degree
/// grading) or 1 (norm grading) with an empty attaining list, matching the
/// conventions of the partial-sum lemmas.
pub fn max_prime_data(table: &PrimeTable, g: &Element, set: Option<&PrimeSet>) -> ExtremePrimeData {
    if g.is_identity() {
        return ExtremePrimeData {
            size: identity_size(table),
            attaining: Vec::new(),
            in_set: set.map(|_| 0),
        };
    }
    let max_size = table.prime(g.factors().last().unwrap().0).size;
    let attaining: Vec<PrimeId> = g
        .factors()
        .iter()
        .rev()
        .map(|&(id, _)| id)
        .take_while(|&id| table.prime(id).size == max_size)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let in_set = set.map(|s| {
        attaining
            .iter()
            .filter(|&&id| s.contains(table.prime(id)))
            .count() as u64
    });
    ExtremePrimeData {
        size: max_size,
        attaining,
        in_set,
    }
}

fn identity_size(table: &PrimeTable) -> u64 {
    match table.grading() {
        Grading::Degree => 0,
        Grading::Norm => 1,
    }
}

/// Whether `g` lies in the distinguished set of `set`: either the identity,
/// or an element whose minimal-size prime factor is unique (as a prime;
/// multiplicity does not disqualify) and belongs to the set.
pub fn is_distinguished(table: &PrimeTable, g: &Element, set: &PrimeSet) -> bool {
    if g.is_identity() {
        return true;
    }
    let first = g.factors()[0].0;
    if g.factors().len() > 1 {
        let second = g.factors()[1].0;
        if table.prime(second).size == table.prime(first).size {
            return false;
        }
    }
    set.contains(table.prime(first))
}

/// Weight function for the duality identity, evaluated at prime sizes. The
/// identity's minimal size is taken to be infinite.
#[derive(Clone)]
pub struct DualityFn {
    pub description: String,
    eval: Arc<dyn Fn(SizeArg) -> BigRational + Send + Sync>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeArg {
    Finite(u64),
    Infinite,
}

impl fmt::Debug for DualityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DualityFn")
            .field("description", &self.description)
            .finish()
    }
}

impl DualityFn {
    pub fn new(
        description: impl Into<String>,
        eval: impl Fn(SizeArg) -> BigRational + Send + Sync + 'static,
    ) -> Self {
        Self {
            description: description.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn evaluate(&self, at: SizeArg) -> BigRational {
        (self.eval)(at)
    }

    /// f(k) = k, the simplest admissible weight.
    pub fn linear() -> Self {
        Self::new("f(k)=k", |at| match at {
            SizeArg::Finite(k) => BigRational::from_integer(BigInt::from(k)),
            SizeArg::Infinite => BigRational::zero(),
        })
    }

    /// Indicator of sizes strictly above a threshold.
    pub fn indicator_above(t: u64) -> Self {
        Self::new(format!("f(k)=[k>{t}]"), move |at| match at {
            SizeArg::Finite(k) if k > t => BigRational::one(),
            _ => BigRational::zero(),
        })
    }

    /// f(k) = 1/k away from the identity size.
    pub fn reciprocal(identity_size: u64) -> Self {
        Self::new("f(k)=1/k", move |at| match at {
            SizeArg::Finite(k) if k > identity_size => {
                BigRational::new(BigInt::one(), BigInt::from(k))
            }
            _ => BigRational::zero(),
        })
    }
}

/// The duality residual
/// `sum over h | g of mu(h) [h distinguished] f(min size of h)  +  Q_S(g) f(max size of g)`.
/// The duality lemma says this is exactly zero for every `g`; callers treat a
/// nonzero value as a contract violation.
///
/// Rejects weights that fail the admissibility conditions `f(identity) = 0`
/// and `f(infinity) = 0` (degree grading: f(0) = 0; norm grading: f(1) = 0).
pub fn duality_residual(
    table: &PrimeTable,
    g: &Element,
    set: &PrimeSet,
    f: &DualityFn,
) -> Result<BigRational, CoreError> {
    if !f.evaluate(SizeArg::Finite(identity_size(table))).is_zero() {
        return Err(CoreError::WeightNotZeroAtIdentity);
    }
    if !f.evaluate(SizeArg::Infinite).is_zero() {
        return Err(CoreError::WeightNotZeroAtInfinity);
    }

    // Only squarefree divisors contribute: mu kills the rest. Squarefree
    // divisors are subsets of the distinct primes of g; with ids sorted by
    // size, the minimal prime of the subset is its first chosen element and
    // distinguishability is a tie check against the next one.
    let k = g.omega();
    let primes: Vec<PrimeId> = g.factors().iter().map(|&(id, _)| id).collect();
    let sizes: Vec<u64> = primes.iter().map(|&id| table.prime(id).size).collect();
    let member: Vec<bool> = primes
        .iter()
        .map(|&id| set.contains(table.prime(id)))
        .collect();

    let mut lhs = BigRational::zero();
    // The empty subset is the identity: distinguished, min size infinite,
    // f(infinite) = 0, so it contributes nothing and the loop starts at 1.
    for mask in 1u64..(1u64 << k) {
        let first = mask.trailing_zeros() as usize;
        if !member[first] {
            continue;
        }
        let rest = mask & (mask - 1);
        if rest != 0 {
            let second = rest.trailing_zeros() as usize;
            if sizes[second] == sizes[first] {
                continue; // tied minimum: not distinguishable
            }
        }
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        let val = f.evaluate(SizeArg::Finite(sizes[first]));
        if !val.is_zero() {
            lhs += BigRational::from_integer(BigInt::from(sign)) * val;
        }
    }

    let maxd = max_prime_data(table, g, Some(set));
    let q = maxd.in_set.unwrap_or(0);
    let at = if g.is_identity() {
        SizeArg::Finite(identity_size(table))
    } else {
        SizeArg::Finite(maxd.size)
    };
    let rhs = BigRational::from_integer(BigInt::from(q)) * f.evaluate(at);
    Ok(lhs + rhs)
}

/// Euler phi: `norm(g) * prod over distinct P | g of (1 - 1/norm(P))`, exact.
/// Requires integer norms; phi of the identity is 1.
pub fn euler_phi(table: &PrimeTable, g: &Element) -> Result<BigRational, CoreError> {
    let mut acc = BigInt::one();
    for &(id, m) in g.factors() {
        let p = table.prime(id);
        let n = p
            .norm
            .ok_or_else(|| CoreError::NormUnavailable(p.label.clone()))?;
        let n = BigInt::from(n);
        acc *= (&n - 1) * n.pow(m - 1);
    }
    Ok(BigRational::from_integer(acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Degree-graded toy table mirroring monic polynomials over F2 up to
    /// degree 3: x, x+1, x^2+x+1, and the two cubic irreducibles.
    fn f2_table() -> PrimeTable {
        PrimeTable::new(
            Grading::Degree,
            vec![
                (1, Some(2), "x".into()),
                (1, Some(2), "x+1".into()),
                (2, Some(4), "x^2+x+1".into()),
                (3, Some(8), "x^3+x+1".into()),
                (3, Some(8), "x^3+x^2+1".into()),
            ],
        )
    }

    fn elem(table: &PrimeTable, f: &[(u32, u32)]) -> Element {
        Element::from_factors(table, f.iter().map(|&(i, m)| (PrimeId(i), m))).unwrap()
    }

    #[test]
    fn mobius_basic_values() {
        let t = f2_table();
        assert_eq!(mobius(&Element::identity(&t)), 1);
        assert_eq!(mobius(&elem(&t, &[(0, 1)])), -1);
        assert_eq!(mobius(&elem(&t, &[(0, 1), (1, 1)])), 1);
        assert_eq!(mobius(&elem(&t, &[(0, 2)])), 0);
        assert_eq!(mobius(&elem(&t, &[(0, 1), (1, 1), (2, 1)])), -1);
    }

    #[test]
    fn divisors_count_and_order() {
        let t = f2_table();
        // x^2 * (x^2+x+1): multiplicities (2,1) -> 6 divisors.
        let g = elem(&t, &[(0, 2), (2, 1)]);
        let all: Vec<_> = divisors(&t, &g).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(divisor_count(&g), 6);
        // Lexicographic multiplicity vectors: (0,0),(0,1),(1,0),(1,1),(2,0),(2,1).
        let degs: Vec<u64> = all.iter().map(|(h, _)| h.size()).collect();
        assert_eq!(degs, vec![0, 2, 1, 3, 2, 4]);
        for (h, co) in &all {
            assert_eq!(h.size() + co.size(), g.size());
        }
    }

    #[test]
    fn convolution_with_identity_is_mobius() {
        let t = f2_table();
        let mu = ArithFn::mobius_fn();
        let e = ArithFn::convolution_identity();
        for g in [
            Element::identity(&t),
            elem(&t, &[(0, 1)]),
            elem(&t, &[(0, 2), (2, 1)]),
            elem(&t, &[(0, 1), (1, 1), (3, 2)]),
        ] {
            let conv = dirichlet_convolve(&t, &mu, &e, &g).unwrap();
            assert_eq!(conv, BigRational::from_integer(BigInt::from(mobius(&g))));
        }
    }

    #[test]
    fn convolution_mobius_with_one_detects_identity() {
        let t = f2_table();
        let mu = ArithFn::mobius_fn();
        let one = ArithFn::one();
        let id = Element::identity(&t);
        assert_eq!(
            dirichlet_convolve(&t, &mu, &one, &id).unwrap(),
            BigRational::one()
        );
        for g in [elem(&t, &[(0, 1)]), elem(&t, &[(0, 2), (2, 1)])] {
            assert!(dirichlet_convolve(&t, &mu, &one, &g).unwrap().is_zero());
        }
    }

    #[test]
    fn min_max_prime_data_on_x2_times_quadratic() {
        let t = f2_table();
        let g = elem(&t, &[(0, 2), (2, 1)]);
        let min = min_prime_data(&t, &g).unwrap();
        assert_eq!(min.size, 1);
        assert_eq!(min.attaining, vec![PrimeId(0)]);
        let max = max_prime_data(&t, &g, Some(&PrimeSet::all()));
        assert_eq!(max.size, 2);
        assert_eq!(max.attaining, vec![PrimeId(2)]);
        assert_eq!(max.in_set, Some(1));
        assert!(min_prime_data(&t, &Element::identity(&t)).is_err());
    }

    #[test]
    fn distinguishability_requires_unique_minimum() {
        let t = f2_table();
        let all = PrimeSet::all();
        // x(x+1): two linear factors tie.
        assert!(!is_distinguished(&t, &elem(&t, &[(0, 1), (1, 1)]), &all));
        // x^2(x^2+x+1): unique minimal prime x.
        assert!(is_distinguished(&t, &elem(&t, &[(0, 2), (2, 1)]), &all));
        // Identity is always distinguished.
        assert!(is_distinguished(&t, &Element::identity(&t), &all));
        // Membership matters: min prime x not in {x+1}.
        let only_x1 = PrimeSet::from_ids("x+1 only", [1u32].into_iter().collect());
        assert!(!is_distinguished(
            &t,
            &elem(&t, &[(0, 1), (2, 1)]),
            &only_x1
        ));
    }

    #[test]
    fn duality_residual_vanishes_on_hand_example() {
        // g = x^2 (x^2+x+1), S = all primes, f(n) = n.
        let t = f2_table();
        let g = elem(&t, &[(0, 2), (2, 1)]);
        let r = duality_residual(&t, &g, &PrimeSet::all(), &DualityFn::linear()).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn duality_residual_vanishes_exhaustively_on_toy_table() {
        let t = f2_table();
        let sets = [
            PrimeSet::all(),
            PrimeSet::none(),
            PrimeSet::from_ids("x and cubic", [0u32, 3].into_iter().collect()),
        ];
        let fs = [
            DualityFn::linear(),
            DualityFn::indicator_above(1),
            DualityFn::reciprocal(0),
        ];
        // All elements of degree <= 6 over the toy table.
        let mut count = 0;
        for a in 0..=6u32 {
            for b in 0..=6u32 {
                for c in 0..=3u32 {
                    for d in 0..=2u32 {
                        for e in 0..=2u32 {
                            let deg = a + b + 2 * c + 3 * d + 3 * e;
                            if deg > 6 {
                                continue;
                            }
                            let mut f = Vec::new();
                            for (i, m) in [a, b, c, d, e].iter().enumerate() {
                                if *m > 0 {
                                    f.push((i as u32, *m));
                                }
                            }
                            let g = elem(&t, &f);
                            for s in &sets {
                                for w in &fs {
                                    let r = duality_residual(&t, &g, s, w).unwrap();
                                    assert!(
                                        r.is_zero(),
                                        "g={:?} s={} f={}",
                                        g,
                                        s.description,
                                        w.description
                                    );
                                    count += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(count > 500);
    }

    #[test]
    fn duality_rejects_inadmissible_weights() {
        let t = f2_table();
        let g = elem(&t, &[(0, 1)]);
        let bad_zero = DualityFn::new("f(0)=1", |at| match at {
            SizeArg::Finite(_) => BigRational::one(),
            SizeArg::Infinite => BigRational::zero(),
        });
        assert_eq!(
            duality_residual(&t, &g, &PrimeSet::all(), &bad_zero),
            Err(CoreError::WeightNotZeroAtIdentity)
        );
        let bad_inf = DualityFn::new("f(inf)=1", |at| match at {
            SizeArg::Finite(_) => BigRational::zero(),
            SizeArg::Infinite => BigRational::one(),
        });
        assert_eq!(
            duality_residual(&t, &g, &PrimeSet::all(), &bad_inf),
            Err(CoreError::WeightNotZeroAtInfinity)
        );
    }

    #[test]
    fn euler_phi_values() {
        let t = f2_table();
        // phi(x(x+1)) = 4 * (1/2) * (1/2) = 1.
        let g = elem(&t, &[(0, 1), (1, 1)]);
        assert_eq!(euler_phi(&t, &g).unwrap(), BigRational::one());
        // phi(x^2) = 4 * 1/2 = 2.
        let g = elem(&t, &[(0, 2)]);
        assert_eq!(
            euler_phi(&t, &g).unwrap(),
            BigRational::from_integer(BigInt::from(2))
        );
        assert_eq!(
            euler_phi(&t, &Element::identity(&t)).unwrap(),
            BigRational::one()
        );
    }

    #[test]
    fn power_decay_arith_fn() {
        let t = f2_table();
        let a = ArithFn::power_decay(1, PrimeSet::all());
        let id = Element::identity(&t);
        assert_eq!(a.evaluate(&t, &id).unwrap(), BigRational::one());
        // x^2(x^2+x+1) is distinguished with norm 16.
        let g = elem(&t, &[(0, 2), (2, 1)]);
        assert_eq!(
            a.evaluate(&t, &g).unwrap(),
            BigRational::new(BigInt::one(), BigInt::from(16))
        );
        // x(x+1) is not distinguished.
        let g = elem(&t, &[(0, 1), (1, 1)]);
        assert!(a.evaluate(&t, &g).unwrap().is_zero());
    }

    #[test]
    fn norm_and_size_bookkeeping() {
        let t = f2_table();
        let g = elem(&t, &[(0, 2), (2, 1)]);
        assert_eq!(g.size(), 4);
        assert_eq!(g.norm(&t).unwrap(), 16);
        assert_eq!(g.display(&t), "(x)^2*(x^2+x+1)");
        let norm_table = PrimeTable::new(
            Grading::Norm,
            vec![(2, Some(2), "2".into()), (3, Some(3), "3".into())],
        );
        let n6 = Element::from_factors(&norm_table, [(PrimeId(0), 1), (PrimeId(1), 1)]).unwrap();
        assert_eq!(n6.size(), 6);
        assert_eq!(Element::identity(&norm_table).size(), 1);
    }
}
