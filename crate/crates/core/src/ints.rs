//! Positive integers under multiplication as a norm-graded semigroup: the
//! primes are the rational primes up to a sieve limit and the norm of an
//! integer is the integer itself. One element per norm value, streamed by
//! walking a smallest-prime-factor sieve.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use smallvec::SmallVec;
use thiserror::Error;

use crate::backend::Backend;
use crate::semigroup::{CoreError, Element, Factors, Grading, PrimeId, PrimeSet, PrimeTable};

/// Hard cap on the sieve limit (memory guard: 4 bytes per integer).
pub const MAX_SIEVE_LIMIT: u64 = 50_000_000;

#[derive(Debug, Error)]
pub enum IntError {
    #[error("sieve limit {0} must lie in 2..={MAX_SIEVE_LIMIT}")]
    BadLimit(u64),
    #[error("{0} is outside the factorable range 1..={1}")]
    OutOfRange(u64, u64),
    #[error("prime factor {0} exceeds the table limit {1}")]
    FactorOutsideTable(u64, u64),
    #[error("modulus {0} and residue {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Smallest-prime-factor sieve over `0..=limit`.
pub struct Sieve {
    limit: u64,
    spf: Vec<u32>,
}

impl Sieve {
    pub fn new(limit: u64) -> Result<Self, IntError> {
        if !(2..=MAX_SIEVE_LIMIT).contains(&limit) {
            return Err(IntError::BadLimit(limit));
        }
        let mut spf = vec![0u32; (limit + 1) as usize];
        let mut i = 2u64;
        while i * i <= limit {
            if spf[i as usize] == 0 {
                let mut j = i * i;
                while j <= limit {
                    if spf[j as usize] == 0 {
                        spf[j as usize] = i as u32;
                    }
                    j += i;
                }
            }
            i += 1;
        }
        Ok(Self { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf[n as usize] == 0
    }

    /// Smallest prime factor of `n` (which must be `2..=limit`).
    pub fn smallest_factor(&self, n: u64) -> u64 {
        debug_assert!((2..=self.limit).contains(&n));
        match self.spf[n as usize] {
            0 => n,
            p => p as u64,
        }
    }

    /// Prime factorization of `1..=limit`, primes ascending.
    pub fn factor(&self, n: u64) -> Vec<(u64, u32)> {
        assert!((1..=self.limit).contains(&n));
        let mut out = Vec::new();
        let mut rest = n;
        while rest > 1 {
            let p = self.smallest_factor(rest);
            let mut mult = 0u32;
            while rest % p == 0 {
                rest /= p;
                mult += 1;
            }
            out.push((p, mult));
        }
        out
    }

    /// All primes up to the limit, ascending.
    pub fn primes(&self) -> Vec<u64> {
        (2..=self.limit).filter(|&n| self.is_prime(n)).collect()
    }
}

/// Euler's totient by trial division; fine for the modulus sizes used in
/// residue-class sets.
pub fn euler_phi_u64(n: u64) -> u64 {
    assert!(n >= 1);
    let mut phi = n;
    let mut rest = n;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            while rest % p == 0 {
                rest /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if rest > 1 {
        phi -= phi / rest;
    }
    phi
}

/// The semigroup of positive integers with primes tabulated up to a limit.
pub struct IntBackend {
    sieve: Sieve,
    table: PrimeTable,
    values: Vec<u64>,
}

impl IntBackend {
    pub fn new(limit: u64) -> Result<Self, IntError> {
        let sieve = Sieve::new(limit)?;
        let values = sieve.primes();
        let rows = values
            .iter()
            .map(|&p| (p, Some(p), p.to_string()))
            .collect();
        let table = PrimeTable::new(Grading::Norm, rows);
        Ok(Self {
            sieve,
            table,
            values,
        })
    }

    pub fn limit(&self) -> u64 {
        self.sieve.limit()
    }

    pub fn sieve(&self) -> &Sieve {
        &self.sieve
    }

    fn id_of(&self, p: u64) -> PrimeId {
        let idx = self
            .values
            .binary_search(&p)
            .expect("prime is inside the table");
        PrimeId(idx as u32)
    }

    /// Factors `1..=limit^2` into an element; every prime factor must lie
    /// inside the table.
    pub fn factor_integer(&self, n: u64) -> Result<Element, IntError> {
        let limit = self.limit();
        let max = limit.saturating_mul(limit);
        if n == 0 || n > max {
            return Err(IntError::OutOfRange(n, max));
        }
        let mut factors: Factors = SmallVec::new();
        let mut rest = n;
        // Strip primes found by trial division until the sieve can take over.
        if rest > limit {
            for &p in &self.values {
                if p * p > rest || rest <= limit {
                    break;
                }
                let mut mult = 0u32;
                while rest % p == 0 {
                    rest /= p;
                    mult += 1;
                }
                if mult > 0 {
                    factors.push((self.id_of(p), mult));
                }
            }
            if rest > limit {
                // No factor of rest is <= its square root, so rest is prime.
                return Err(IntError::FactorOutsideTable(rest, limit));
            }
        }
        while rest > 1 {
            let p = self.sieve.smallest_factor(rest);
            let mut mult = 0u32;
            while rest % p == 0 {
                rest /= p;
                mult += 1;
            }
            factors.push((self.id_of(p), mult));
        }
        factors.sort_unstable_by_key(|&(id, _)| id.0);
        Ok(Element::from_factors(&self.table, factors.iter().copied())?)
    }

    /// Primes congruent to `l` modulo `k`; its density among all primes is
    /// `1/phi(k)`.
    pub fn residue_prime_set(&self, k: u64, l: u64) -> Result<PrimeSet, IntError> {
        if k == 0 {
            return Err(IntError::BadLimit(0));
        }
        if num_integer::gcd(k, l) != 1 {
            return Err(IntError::NotCoprime(k, l));
        }
        let phi = euler_phi_u64(k);
        let density = BigRational::new(BigInt::one(), BigInt::from(phi));
        let residue = l % k;
        let description = format!("primes congruent to {residue} mod {k}");
        Ok(PrimeSet::new(description, Some(density), move |p| {
            p.size % k == residue
        }))
    }
}

impl Backend for IntBackend {
    fn name(&self) -> String {
        "int".to_string()
    }

    fn table(&self) -> &PrimeTable {
        &self.table
    }

    fn known_growth_constant(&self) -> Option<f64> {
        // The element count up to x is exactly the floor of x.
        Some(1.0)
    }

    fn for_each_in_bucket(&self, key: u64, visit: &mut dyn FnMut(&Element)) {
        if key == 0 || key > self.limit() {
            return;
        }
        if key == 1 {
            visit(&Element::identity(&self.table));
            return;
        }
        let g = self
            .factor_integer(key)
            .expect("values inside the sieve always factor");
        visit(&g);
    }

    fn bucket_limit(&self) -> u64 {
        self.limit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::{is_distinguished, mobius};

    #[test]
    fn sieve_agrees_with_trial_division() {
        let sieve = Sieve::new(10_000).unwrap();
        for n in 2..=10_000u64 {
            let by_trial = (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(sieve.is_prime(n), by_trial, "n = {n}");
        }
        assert!(matches!(Sieve::new(1), Err(IntError::BadLimit(1))));
    }

    #[test]
    fn factoring_matches_hand_examples() {
        let backend = IntBackend::new(1000).unwrap();
        assert!(backend.factor_integer(1).unwrap().is_identity());
        let g = backend.factor_integer(12).unwrap();
        assert_eq!(g.display(&backend.table), "(2)^2*(3)");
        assert_eq!(g.norm(&backend.table).unwrap(), 12);
        let g = backend.factor_integer(997).unwrap();
        assert_eq!(g.factors().len(), 1);
        assert_eq!(g.size(), 997);
        // 988027 = 991 * 997 exceeds the sieve but factors over the table.
        let g = backend.factor_integer(988_027).unwrap();
        assert_eq!(g.display(&backend.table), "(991)*(997)");
        assert!(matches!(
            backend.factor_integer(1009),
            Err(IntError::FactorOutsideTable(1009, 1000))
        ));
        assert!(matches!(
            backend.factor_integer(0),
            Err(IntError::OutOfRange(0, _))
        ));
        assert!(matches!(
            backend.factor_integer(1_000_001),
            Err(IntError::OutOfRange(..))
        ));
    }

    #[test]
    fn every_integer_is_distinguished_for_the_full_prime_set() {
        // Distinct rational primes have distinct norms, so the minimal prime
        // of any n >= 2 is unique.
        let backend = IntBackend::new(10_000).unwrap();
        let all = PrimeSet::all();
        for n in 1..=10_000u64 {
            let g = backend.factor_integer(n).unwrap();
            assert!(is_distinguished(&backend.table, &g, &all), "n = {n}");
        }
    }

    #[test]
    fn residue_sets_carry_reciprocal_totient_density() {
        let backend = IntBackend::new(1000).unwrap();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let s41 = backend.residue_prime_set(4, 1).unwrap();
        assert_eq!(s41.known_density, Some(half.clone()));
        let s32 = backend.residue_prime_set(3, 2).unwrap();
        assert_eq!(s32.known_density, Some(half));
        let all = backend.residue_prime_set(1, 0).unwrap();
        assert_eq!(all.known_density, Some(BigRational::one()));

        let p13 = backend.table.prime(backend.id_of(13));
        let p7 = backend.table.prime(backend.id_of(7));
        assert!(s41.contains(p13));
        assert!(!s41.contains(p7));
        assert!(all.contains(p7));
        assert!(matches!(
            backend.residue_prime_set(4, 2),
            Err(IntError::NotCoprime(4, 2))
        ));
    }

    #[test]
    fn semigroup_mobius_matches_the_classical_one() {
        let backend = IntBackend::new(10_000).unwrap();
        let mut mertens: i64 = 0;
        for n in 1..=10_000u64 {
            let g = backend.factor_integer(n).unwrap();
            assert_eq!(mobius(&g), crate::numutil::int_mobius(n), "n = {n}");
            if n <= 100 {
                mertens += mobius(&g);
                if n == 100 {
                    assert_eq!(mertens, 1); // the classical value of M(100)
                }
            }
        }
    }

    #[test]
    fn buckets_stream_one_element_per_norm() {
        let backend = IntBackend::new(100).unwrap();
        for n in 1..=100u64 {
            let mut seen = Vec::new();
            backend.for_each_in_bucket(n, &mut |g| seen.push(g.clone()));
            assert_eq!(seen.len(), 1);
            assert_eq!(seen[0].size(), n);
            assert_eq!(seen[0].norm(&backend.table).unwrap(), n);
        }
        assert_eq!(backend.name(), "int");
        assert_eq!(backend.grading(), Grading::Norm);
    }

    #[test]
    fn totient_by_trial_division_is_correct() {
        let brute = |n: u64| (1..=n).filter(|&a| num_integer::gcd(a, n) == 1).count() as u64;
        for n in 1..=200 {
            assert_eq!(euler_phi_u64(n), brute(n), "n = {n}");
        }
    }
}
