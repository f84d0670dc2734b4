//! Integral ideals of the Gaussian integers as a norm-graded semigroup. The
//! prime ideals are tagged split, inert, or ramified; split pairs share a
//! norm, which makes distinguishability genuinely restrictive here. Every
//! ideal is principal, so ideals are handled through canonical generators
//! `a+bi` with `a > 0`, `b >= 0`.

use std::collections::HashMap;

use num_integer::Roots;
use smallvec::SmallVec;
use thiserror::Error;

use crate::backend::Backend;
use crate::ints::Sieve;
use crate::semigroup::{CoreError, Element, Factors, Grading, PrimeId, PrimeSet, PrimeTable};

#[derive(Debug, Error)]
pub enum GaussError {
    #[error("norm limit {0} must lie in 2..={max}", max = crate::ints::MAX_SIEVE_LIMIT)]
    BadLimit(u64),
    #[error("the zero element has no factorization")]
    Zero,
    #[error("norm {0} is outside the factorable range 1..={1}")]
    OutOfRange(u64, u64),
    #[error("a prime ideal of norm {0} exceeds the table limit {1}")]
    FactorOutsideTable(u64, u64),
    #[error(transparent)]
    Int(#[from] crate::ints::IntError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// How a rational prime behaves in the Gaussian integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitKind {
    /// `p = 1 mod 4`: two conjugate ideals of norm `p`.
    Split,
    /// `p = 3 mod 4`: the ideal `(p)` of norm `p^2`.
    Inert,
    /// `p = 2`: the ideal `(1+i)` of norm 2.
    Ramified,
}

/// Selector for prime-ideal sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdealClass {
    Split,
    Inert,
    Ramified,
    /// Split ideals whose rational prime is `1 mod 8`.
    SplitAboveOneMod8,
}

/// The semigroup of nonzero integral ideals of `Z[i]` with prime ideals of
/// norm up to a limit.
pub struct GaussianBackend {
    sieve: Sieve,
    table: PrimeTable,
    gens: Vec<(u64, u64)>,
    kinds: Vec<SplitKind>,
    rational: Vec<u64>,
    split_ids: HashMap<u64, (PrimeId, PrimeId)>,
    inert_ids: HashMap<u64, PrimeId>,
    ramified_id: PrimeId,
}

fn generator_label(a: u64, b: u64) -> String {
    match b {
        0 => format!("{a}"),
        1 => format!("{a}+i"),
        _ => format!("{a}+{b}i"),
    }
}

/// Writes `p = a^2 + b^2` for a prime `p = 1 mod 4`, returning `a < b`.
fn two_square_decomposition(p: u64) -> (u64, u64) {
    let mut a = 1u64;
    while 2 * a * a < p {
        let b2 = p - a * a;
        let b = b2.sqrt();
        if b * b == b2 {
            return (a, b);
        }
        a += 1;
    }
    unreachable!("every prime p = 1 mod 4 is a sum of two squares");
}

impl GaussianBackend {
    pub fn new(limit: u64) -> Result<Self, GaussError> {
        let sieve = Sieve::new(limit).map_err(|_| GaussError::BadLimit(limit))?;
        // rows: (norm, generator, kind, rational prime), sorted by norm with
        // the lexicographically smaller generator of a split pair first.
        let mut rows: Vec<(u64, (u64, u64), SplitKind, u64)> = Vec::new();
        for p in sieve.primes() {
            match p % 4 {
                2 => rows.push((2, (1, 1), SplitKind::Ramified, 2)),
                1 => {
                    let (a, b) = two_square_decomposition(p);
                    rows.push((p, (a, b), SplitKind::Split, p));
                    rows.push((p, (b, a), SplitKind::Split, p));
                }
                3 => {
                    if p * p <= limit {
                        rows.push((p * p, (p, 0), SplitKind::Inert, p));
                    }
                }
                _ => unreachable!("p = 0 mod 4 is not prime"),
            }
        }
        rows.sort_by_key(|&(norm, gen, _, _)| (norm, gen));

        let table_rows = rows
            .iter()
            .map(|&(norm, (a, b), _, _)| (norm, Some(norm), generator_label(a, b)))
            .collect();
        let table = PrimeTable::new(Grading::Norm, table_rows);

        let gens: Vec<(u64, u64)> = rows.iter().map(|r| r.1).collect();
        let kinds: Vec<SplitKind> = rows.iter().map(|r| r.2).collect();
        let rational: Vec<u64> = rows.iter().map(|r| r.3).collect();
        let mut split_ids = HashMap::new();
        let mut inert_ids = HashMap::new();
        let mut ramified_id = PrimeId(0);
        for (i, &(_, _, kind, p)) in rows.iter().enumerate() {
            let id = PrimeId(i as u32);
            match kind {
                SplitKind::Ramified => ramified_id = id,
                SplitKind::Inert => {
                    inert_ids.insert(p, id);
                }
                SplitKind::Split => {
                    // The first of the pair lands here first.
                    split_ids
                        .entry(p)
                        .and_modify(|pair: &mut (PrimeId, PrimeId)| pair.1 = id)
                        .or_insert((id, id));
                }
            }
        }
        Ok(Self {
            sieve,
            table,
            gens,
            kinds,
            rational,
            split_ids,
            inert_ids,
            ramified_id,
        })
    }

    pub fn limit(&self) -> u64 {
        self.sieve.limit()
    }

    /// Canonical generator of a prime ideal.
    pub fn generator(&self, id: PrimeId) -> (u64, u64) {
        self.gens[id.0 as usize]
    }

    pub fn kind(&self, id: PrimeId) -> SplitKind {
        self.kinds[id.0 as usize]
    }

    /// The rational prime below a prime ideal.
    pub fn rational_prime(&self, id: PrimeId) -> u64 {
        self.rational[id.0 as usize]
    }

    /// Factors the Gaussian integer `a+bi` (as an ideal, i.e. up to units).
    pub fn factor_gaussian(&self, a: i64, b: i64) -> Result<Element, GaussError> {
        if a == 0 && b == 0 {
            return Err(GaussError::Zero);
        }
        let norm_wide = (a as i128) * (a as i128) + (b as i128) * (b as i128);
        let max = self.limit().saturating_mul(self.limit());
        if norm_wide > max as i128 {
            return Err(GaussError::OutOfRange(
                u64::try_from(norm_wide).unwrap_or(u64::MAX),
                max,
            ));
        }
        let norm = norm_wide as u64;
        let rational_factors = self.factor_norm(norm)?;

        let mut factors: Factors = SmallVec::new();
        let (mut wa, mut wb) = (a as i128, b as i128);
        for (p, e) in rational_factors {
            match p % 4 {
                2 => factors.push((self.ramified_id, e)),
                3 => {
                    // A sum of two squares has even valuation at p = 3 mod 4.
                    debug_assert!(e % 2 == 0);
                    let id = *self
                        .inert_ids
                        .get(&p)
                        .ok_or(GaussError::FactorOutsideTable(p * p, self.limit()))?;
                    factors.push((id, e / 2));
                }
                1 => {
                    let &(id_first, id_second) = self
                        .split_ids
                        .get(&p)
                        .ok_or(GaussError::FactorOutsideTable(p, self.limit()))?;
                    // Count divisions by the first generator; the conjugate
                    // ideal takes the remaining exponent.
                    let (ga, gb) = self.gens[id_first.0 as usize];
                    let (ga, gb, pw) = (ga as i128, gb as i128, p as i128);
                    let mut k = 0u32;
                    while k < e {
                        let re = wa * ga + wb * gb;
                        let im = wb * ga - wa * gb;
                        if re % pw == 0 && im % pw == 0 {
                            wa = re / pw;
                            wb = im / pw;
                            k += 1;
                        } else {
                            break;
                        }
                    }
                    if k > 0 {
                        factors.push((id_first, k));
                    }
                    if e - k > 0 {
                        factors.push((id_second, e - k));
                    }
                }
                _ => unreachable!(),
            }
        }
        factors.sort_unstable_by_key(|&(id, _)| id.0);
        Ok(Element::from_factors(&self.table, factors.iter().copied())?)
    }

    fn factor_norm(&self, norm: u64) -> Result<Vec<(u64, u32)>, GaussError> {
        if norm <= self.limit() {
            return Ok(self.sieve.factor(norm));
        }
        let mut out = Vec::new();
        let mut rest = norm;
        for p in 2..=self.limit() {
            if !self.sieve.is_prime(p) {
                continue;
            }
            if p * p > rest || rest <= self.limit() {
                break;
            }
            let mut mult = 0u32;
            while rest % p == 0 {
                rest /= p;
                mult += 1;
            }
            if mult > 0 {
                out.push((p, mult));
            }
        }
        if rest > self.limit() {
            return Err(GaussError::FactorOutsideTable(rest, self.limit()));
        }
        if rest > 1 {
            for (p, e) in self.sieve.factor(rest) {
                out.push((p, e));
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Prime ideals of a given splitting behavior. Densities are not
    /// asserted; they are left for empirical estimation.
    pub fn split_type_prime_set(&self, class: IdealClass) -> PrimeSet {
        let kinds = self.kinds.clone();
        let rational = self.rational.clone();
        let description = match class {
            IdealClass::Split => "split prime ideals",
            IdealClass::Inert => "inert prime ideals",
            IdealClass::Ramified => "the ramified prime ideal",
            IdealClass::SplitAboveOneMod8 => "split prime ideals above p = 1 mod 8",
        };
        PrimeSet::new(description, None, move |p| {
            let i = p.id.0 as usize;
            match class {
                IdealClass::Split => kinds[i] == SplitKind::Split,
                IdealClass::Inert => kinds[i] == SplitKind::Inert,
                IdealClass::Ramified => kinds[i] == SplitKind::Ramified,
                IdealClass::SplitAboveOneMod8 => {
                    kinds[i] == SplitKind::Split && rational[i] % 8 == 1
                }
            }
        })
    }

    /// Number of ideals of each norm `0..=max` by direct enumeration of
    /// canonical generators (`a >= 1`, `b >= 0`); serves as the oracle for
    /// the bucket stream.
    pub fn lattice_ideal_counts(max: u64) -> Vec<u64> {
        let mut counts = vec![0u64; max as usize + 1];
        let mut a = 1u64;
        while a * a <= max {
            let mut b = 0u64;
            while a * a + b * b <= max {
                counts[(a * a + b * b) as usize] += 1;
                b += 1;
            }
            a += 1;
        }
        counts
    }
}

impl Backend for GaussianBackend {
    fn name(&self) -> String {
        "gaussian".to_string()
    }

    fn table(&self) -> &PrimeTable {
        &self.table
    }

    fn known_growth_constant(&self) -> Option<f64> {
        // Ideal counts follow the Gauss circle problem on the first
        // quadrant: N(x) ~ (pi/4) x.
        Some(std::f64::consts::FRAC_PI_4)
    }

    fn for_each_in_bucket(&self, key: u64, visit: &mut dyn FnMut(&Element)) {
        if key == 0 || key > self.limit() {
            return;
        }
        if key == 1 {
            visit(&Element::identity(&self.table));
            return;
        }
        // Ideals of norm `key`, built by distributing each rational prime's
        // exponent over the ideals above it.
        let rational_factors = self.sieve.factor(key);
        let mut slots: Vec<Vec<Factors>> = Vec::with_capacity(rational_factors.len());
        for &(p, e) in &rational_factors {
            match p % 4 {
                2 => slots.push(vec![SmallVec::from_slice(&[(self.ramified_id, e)])]),
                3 => {
                    if e % 2 != 0 {
                        return; // no ideal has this norm
                    }
                    let id = self.inert_ids[&p];
                    slots.push(vec![SmallVec::from_slice(&[(id, e / 2)])]);
                }
                1 => {
                    let (id_first, id_second) = self.split_ids[&p];
                    let mut options = Vec::with_capacity(e as usize + 1);
                    for k in 0..=e {
                        let mut f: Factors = SmallVec::new();
                        if k > 0 {
                            f.push((id_first, k));
                        }
                        if e - k > 0 {
                            f.push((id_second, e - k));
                        }
                        options.push(f);
                    }
                    slots.push(options);
                }
                _ => unreachable!(),
            }
        }
        let mut choice = vec![0usize; slots.len()];
        loop {
            let mut factors: Factors = SmallVec::new();
            for (slot, &c) in slots.iter().zip(&choice) {
                factors.extend(slot[c].iter().copied());
            }
            factors.sort_unstable_by_key(|&(id, _)| id.0);
            let g = Element::from_factors(&self.table, factors.iter().copied())
                .expect("distributed exponents form a valid factorization");
            visit(&g);
            // Odometer over the per-prime options.
            let mut pos = slots.len();
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < slots[pos].len() {
                    break;
                }
                choice[pos] = 0;
            }
        }
    }

    fn bucket_limit(&self) -> u64 {
        self.limit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::is_distinguished;

    #[test]
    fn table_matches_splitting_behavior() {
        let backend = GaussianBackend::new(100).unwrap();
        let t = &backend.table;
        assert_eq!(t.prime(backend.ramified_id).size, 2);
        assert_eq!(t.prime(backend.ramified_id).label, "1+i");

        let (p5a, p5b) = backend.split_ids[&5];
        assert_eq!(t.prime(p5a).label, "1+2i");
        assert_eq!(t.prime(p5b).label, "2+i");
        assert_eq!(t.prime(p5a).size, 5);

        let p3 = backend.inert_ids[&3];
        assert_eq!(t.prime(p3).size, 9);
        assert_eq!(t.prime(p3).label, "3");

        // Split primes p = 1 mod 4 up to 100 give two ideals each.
        let split_count = backend
            .kinds
            .iter()
            .filter(|&&k| k == SplitKind::Split)
            .count();
        let expected: usize = [5u64, 13, 17, 29, 37, 41, 53, 61, 73, 89, 97].len() * 2;
        assert_eq!(split_count, expected);
        // Inert primes appear only when p^2 fits: 3 and 7.
        let inert: Vec<u64> = backend.inert_ids.keys().copied().collect();
        let mut inert = inert;
        inert.sort_unstable();
        assert_eq!(inert, [3, 7]);
    }

    #[test]
    fn bucket_counts_match_the_lattice_oracle() {
        let backend = GaussianBackend::new(1000).unwrap();
        let oracle = GaussianBackend::lattice_ideal_counts(1000);
        for n in 1..=1000u64 {
            let mut count = 0u64;
            backend.for_each_in_bucket(n, &mut |g| {
                assert_eq!(g.norm(&backend.table).unwrap(), n);
                count += 1;
            });
            assert_eq!(count, oracle[n as usize], "norm {n}");
        }
        // Spot values: norm 5 has the two split ideals, norm 9 only (3).
        assert_eq!(oracle[5], 2);
        assert_eq!(oracle[9], 1);
        assert_eq!(oracle[2], 1);
        assert_eq!(oracle[25], 3);
    }

    #[test]
    fn factoring_generators_matches_hand_examples() {
        let backend = GaussianBackend::new(1000).unwrap();
        let g = backend.factor_gaussian(1, 1).unwrap();
        assert_eq!(g.factors(), [(backend.ramified_id, 1)]);

        // 5 = (2+i)(2-i) = -i (1+2i)(2+i): both split ideals above 5.
        let g = backend.factor_gaussian(5, 0).unwrap();
        let (a, b) = backend.split_ids[&5];
        assert_eq!(g.factors(), [(a, 1), (b, 1)]);

        // (2+i)^2 = 3+4i is the square of one split ideal.
        let g = backend.factor_gaussian(3, 4).unwrap();
        assert_eq!(g.factors().len(), 1);
        assert_eq!(g.factors()[0].1, 2);
        assert_eq!(g.norm(&backend.table).unwrap(), 25);

        // Units and the zero element.
        assert!(backend.factor_gaussian(1, 0).unwrap().is_identity());
        assert!(backend.factor_gaussian(0, 1).unwrap().is_identity());
        assert!(matches!(
            backend.factor_gaussian(0, 0),
            Err(GaussError::Zero)
        ));

        // 13 = 1 mod 4: the ideals above it are split.
        let split = backend.split_type_prime_set(IdealClass::Split);
        let g = backend.factor_gaussian(13, 0).unwrap();
        for &(id, _) in g.factors() {
            assert!(split.contains(backend.table.prime(id)));
        }
    }

    #[test]
    fn conjugate_products_are_not_distinguished() {
        let backend = GaussianBackend::new(1000).unwrap();
        let all = PrimeSet::all();
        // (5) = P * conj(P): two minimal primes of equal norm tie.
        let g = backend.factor_gaussian(5, 0).unwrap();
        assert!(!is_distinguished(&backend.table, &g, &all));
        // P^2 has a unique minimal prime.
        let g = backend.factor_gaussian(3, 4).unwrap();
        assert!(is_distinguished(&backend.table, &g, &all));
        // The inert ideal (3) is a prime, hence distinguished.
        let g = backend.factor_gaussian(3, 0).unwrap();
        assert!(is_distinguished(&backend.table, &g, &all));
    }

    #[test]
    fn split_type_sets_partition_the_table() {
        let backend = GaussianBackend::new(500).unwrap();
        let split = backend.split_type_prime_set(IdealClass::Split);
        let inert = backend.split_type_prime_set(IdealClass::Inert);
        let ramified = backend.split_type_prime_set(IdealClass::Ramified);
        let narrow = backend.split_type_prime_set(IdealClass::SplitAboveOneMod8);
        for p in backend.table.iter() {
            let memberships = [split.contains(p), inert.contains(p), ramified.contains(p)];
            assert_eq!(memberships.iter().filter(|&&m| m).count(), 1);
            if narrow.contains(p) {
                assert!(split.contains(p));
                assert_eq!(backend.rational_prime(p.id) % 8, 1);
            }
        }
    }

    #[test]
    fn factoring_rejects_primes_beyond_the_table() {
        let backend = GaussianBackend::new(100).unwrap();
        // 101 = 1 mod 4 is prime with norm 101 > 100.
        assert!(matches!(
            backend.factor_gaussian(10, 1),
            Err(GaussError::FactorOutsideTable(101, 100))
        ));
        // Norm beyond limit^2 is rejected outright.
        assert!(matches!(
            backend.factor_gaussian(101, 0),
            Err(GaussError::OutOfRange(..))
        ));
    }
}
