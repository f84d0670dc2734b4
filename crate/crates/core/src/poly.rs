//! Monic polynomials over a small finite field as a degree-graded semigroup:
//! the primes are the monic irreducibles and a degree-`n` element has norm
//! `q^n`. Field sizes 2, 3, 4, 5, 7, 8, 9 are supported through precomputed
//! arithmetic tables.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use smallvec::SmallVec;
use thiserror::Error;

use crate::backend::{for_each_element_of_degree, Backend};
use crate::semigroup::{Element, Factors, Grading, PrimeId, PrimeSet, PrimeTable};

/// Largest degree an irreducible table will be built for.
pub const DEFAULT_DEGREE_LIMIT: u32 = 20;

/// Cap on the number of candidate polynomials an enumeration may visit.
const ENUMERATION_WORK_GUARD: u128 = 1 << 28;

/// Largest exponent accepted when parsing `x^k`.
const PARSE_EXPONENT_LIMIT: u32 = 255;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("unsupported field size {0}; supported sizes are 2, 3, 4, 5, 7, 8, 9")]
    UnsupportedField(u64),
    #[error("requested degree {requested} exceeds the limit {limit}")]
    DegreeLimit { requested: u32, limit: u32 },
    #[error("enumerating {0} polynomials exceeds the built-in work cap")]
    WorkGuard(u128),
    #[error("expected a monic polynomial, got {0}")]
    NotMonic(String),
    #[error("cannot parse polynomial from {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("coefficient {0} is not an element code of a field with {1} elements")]
    BadCoefficient(u64, u64),
    #[error("residue and modulus are not coprime")]
    NotCoprime,
    #[error("residue must be nonzero with degree below the modulus degree")]
    BadResidue,
    #[error("factor {0} of degree {1} lies outside the prime table (max degree {2})")]
    FactorOutsideTable(String, u32, u32),
    #[error(transparent)]
    Core(#[from] crate::semigroup::CoreError),
}

/// Arithmetic tables for a field with `q <= 9` elements. Elements are codes
/// `0..q`. For prime `q` the code is the residue itself; for `q = p^k` the
/// code's base-`p` digits, lowest first, are the coordinates with respect to
/// the generator `t`, where `t` satisfies `t^2+t+1 = 0` (4 elements),
/// `t^3+t+1 = 0` (8 elements), or `t^2+1 = 0` (9 elements).
#[derive(Clone)]
pub struct FqField {
    q: u8,
    p: u8,
    add: [[u8; 9]; 9],
    mul: [[u8; 9]; 9],
    neg: [u8; 9],
    inv: [u8; 9],
}

impl FqField {
    pub fn new(q: u64) -> Result<Self, PolyError> {
        let (p, k, modulus): (u8, usize, &[u8]) = match q {
            2 => (2, 1, &[]),
            3 => (3, 1, &[]),
            4 => (2, 2, &[1, 1, 1]),
            5 => (5, 1, &[]),
            7 => (7, 1, &[]),
            8 => (2, 3, &[1, 1, 0, 1]),
            9 => (3, 2, &[1, 0, 1]),
            _ => return Err(PolyError::UnsupportedField(q)),
        };
        let q = q as u8;
        let mut add = [[0u8; 9]; 9];
        let mut mul = [[0u8; 9]; 9];
        let mut neg = [0u8; 9];
        let mut inv = [0u8; 9];
        for a in 0..q {
            let da = base_p_digits(a, p, k);
            let mut neg_digits = [0u8; 3];
            for (i, &d) in da.iter().enumerate() {
                neg_digits[i] = (p - d) % p;
            }
            neg[a as usize] = code_from_digits(&neg_digits[..k], p);
            for b in 0..q {
                let db = base_p_digits(b, p, k);
                let mut sum = [0u8; 3];
                for i in 0..k {
                    sum[i] = (da[i] + db[i]) % p;
                }
                add[a as usize][b as usize] = code_from_digits(&sum[..k], p);
                // Multiply as polynomials in t, then reduce by the modulus.
                let mut prod = [0u8; 5];
                for i in 0..k {
                    for j in 0..k {
                        prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
                    }
                }
                for top in (k..2 * k - 1).rev() {
                    let c = prod[top];
                    if c == 0 {
                        continue;
                    }
                    prod[top] = 0;
                    for (i, &m) in modulus.iter().enumerate().take(k) {
                        let sub = (c * m) % p;
                        prod[top - k + i] = (prod[top - k + i] + p - sub) % p;
                    }
                }
                mul[a as usize][b as usize] = code_from_digits(&prod[..k], p);
            }
        }
        for a in 1..q {
            let b = (1..q)
                .find(|&b| mul[a as usize][b as usize] == 1)
                .expect("every nonzero element of a field is invertible");
            inv[a as usize] = b;
        }
        Ok(Self {
            q,
            p,
            add,
            mul,
            neg,
            inv,
        })
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn characteristic(&self) -> u8 {
        self.p
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize][b as usize]
    }

    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg[b as usize])
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize][b as usize]
    }

    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "zero has no multiplicative inverse");
        self.inv[a as usize]
    }
}

fn base_p_digits(code: u8, p: u8, k: usize) -> [u8; 3] {
    let mut out = [0u8; 3];
    let mut rest = code;
    for d in out.iter_mut().take(k) {
        *d = rest % p;
        rest /= p;
    }
    out
}

fn code_from_digits(digits: &[u8], p: u8) -> u8 {
    let mut code = 0u8;
    for &d in digits.iter().rev() {
        code = code * p + d;
    }
    code
}

/// A polynomial over the field, stored as little-endian coefficient codes
/// with no trailing zeros; the zero polynomial has no coefficients. The
/// derived ordering compares coefficient vectors and is only used for
/// indexing; enumeration order is (degree, then lexicographic on the printed
/// coefficient sequence).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqPoly {
    coeffs: Vec<u8>,
}

impl FqPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    pub fn x() -> Self {
        Self { coeffs: vec![0, 1] }
    }

    fn normalized(mut coeffs: Vec<u8>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_coeffs(field: &FqField, coeffs: &[u64]) -> Result<Self, PolyError> {
        let mut out = Vec::with_capacity(coeffs.len());
        for &c in coeffs {
            if c >= field.q() as u64 {
                return Err(PolyError::BadCoefficient(c, field.q() as u64));
            }
            out.push(c as u8);
        }
        Ok(Self::normalized(out))
    }

    /// Little-endian coefficient codes, highest nonzero last.
    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn add(&self, field: &FqField, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u8; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *slot = field.add(a, b);
        }
        Self::normalized(out)
    }

    pub fn sub(&self, field: &FqField, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u8; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *slot = field.sub(a, b);
        }
        Self::normalized(out)
    }

    pub fn mul(&self, field: &FqField, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0u8; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        Self::normalized(out)
    }

    pub fn scale(&self, field: &FqField, c: u8) -> Self {
        Self::normalized(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    /// Quotient and remainder; panics if the divisor is zero.
    pub fn divmod(&self, field: &FqField, den: &Self) -> (Self, Self) {
        assert!(!den.is_zero(), "division by the zero polynomial");
        if self.coeffs.len() < den.coeffs.len() {
            return (Self::zero(), self.clone());
        }
        let dlead_inv = field.inv(*den.coeffs.last().unwrap());
        let dn = den.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        let qn = rem.len() - den.coeffs.len();
        let mut quo = vec![0u8; qn + 1];
        for i in (0..=qn).rev() {
            let lead = rem[i + dn];
            if lead == 0 {
                continue;
            }
            let c = field.mul(lead, dlead_inv);
            quo[i] = c;
            for (j, &dc) in den.coeffs.iter().enumerate() {
                rem[i + j] = field.sub(rem[i + j], field.mul(c, dc));
            }
        }
        rem.truncate(dn);
        (Self::normalized(quo), Self::normalized(rem))
    }

    pub fn rem(&self, field: &FqField, den: &Self) -> Self {
        self.divmod(field, den).1
    }

    /// Greatest common divisor, normalized monic (zero if both inputs are
    /// zero).
    pub fn gcd(&self, field: &FqField, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(field, &b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let linv = field.inv(*a.coeffs.last().unwrap());
        a.scale(field, linv)
    }

    pub fn eval(&self, field: &FqField, x: u8) -> u8 {
        let mut acc = 0u8;
        for &c in self.coeffs.iter().rev() {
            acc = field.add(field.mul(acc, x), c);
        }
        acc
    }

    /// Parses either a coefficient list `"c0,c1,...,cn"` or readable text
    /// like `"x^3+2x+1"` (with optional `-` terms and `*` before `x`).
    pub fn parse(field: &FqField, s: &str) -> Result<Self, PolyError> {
        if s.contains(',') {
            let mut coeffs = Vec::new();
            for part in s.split(',') {
                let c: u64 = part.trim().parse().map_err(|_| PolyError::Parse {
                    input: s.to_string(),
                    reason: format!("bad coefficient {:?}", part.trim()),
                })?;
                coeffs.push(c);
            }
            Self::from_coeffs(field, &coeffs)
        } else {
            Self::parse_text(field, s)
        }
    }

    fn parse_text(field: &FqField, s: &str) -> Result<Self, PolyError> {
        let err = |reason: &str| PolyError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty input"));
        }
        let bytes = compact.as_bytes();
        let mut acc: Vec<u8> = Vec::new();
        let mut i = 0;
        let mut first = true;
        while i < bytes.len() {
            let mut negate = false;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                negate = bytes[i] == b'-';
                i += 1;
            } else if !first {
                return Err(err("terms must be joined by + or -"));
            }
            first = false;
            let digit_start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coeff_text = &compact[digit_start..i];
            if i < bytes.len() && bytes[i] == b'*' {
                i += 1;
            }
            let mut power = 0u32;
            if i < bytes.len() && bytes[i] == b'x' {
                i += 1;
                power = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let exp_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    power = compact[exp_start..i]
                        .parse()
                        .map_err(|_| err("missing or oversized exponent"))?;
                    if power > PARSE_EXPONENT_LIMIT {
                        return Err(err("exponent too large"));
                    }
                }
            }
            let coeff: u64 = if coeff_text.is_empty() {
                if power == 0 {
                    return Err(err("term has neither coefficient nor variable"));
                }
                1
            } else {
                coeff_text
                    .parse()
                    .map_err(|_| err("coefficient out of range"))?
            };
            if coeff >= field.q() as u64 {
                return Err(PolyError::BadCoefficient(coeff, field.q() as u64));
            }
            let mut c = coeff as u8;
            if negate {
                c = field.neg(c);
            }
            if acc.len() <= power as usize {
                acc.resize(power as usize + 1, 0);
            }
            acc[power as usize] = field.add(acc[power as usize], c);
        }
        Ok(Self::normalized(acc))
    }

    /// Comma-separated coefficient codes, constant term first.
    pub fn coeff_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{c}").unwrap();
        }
        out
    }
}

impl fmt::Display for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut wrote = false;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if wrote {
                f.write_str("+")?;
            }
            wrote = true;
            match (c, k) {
                (_, 0) => write!(f, "{c}")?,
                (1, 1) => f.write_str("x")?,
                (1, _) => write!(f, "x^{k}")?,
                (_, 1) => write!(f, "{c}x")?,
                (_, _) => write!(f, "{c}x^{k}")?,
            }
        }
        Ok(())
    }
}

fn eval_coeffs(field: &FqField, coeffs: &[u8], x: u8) -> u8 {
    let mut acc = 0u8;
    for &c in coeffs.iter().rev() {
        acc = field.add(field.mul(acc, x), c);
    }
    acc
}

/// All monic irreducibles of degree `1..=max_degree`, ordered by degree and
/// then lexicographically on the coefficient sequence `c0, c1, ...`. Works
/// by trial division: a candidate passes a root test (no linear factor) and
/// division by every known irreducible of at most half its degree.
pub fn enumerate_irreducibles(field: &FqField, max_degree: u32) -> Result<Vec<FqPoly>, PolyError> {
    if max_degree > DEFAULT_DEGREE_LIMIT {
        return Err(PolyError::DegreeLimit {
            requested: max_degree,
            limit: DEFAULT_DEGREE_LIMIT,
        });
    }
    let q = field.q() as u128;
    let mut work = 0u128;
    let mut power = 1u128;
    for _ in 1..=max_degree {
        power *= q;
        work += power;
    }
    if work > ENUMERATION_WORK_GUARD {
        return Err(PolyError::WorkGuard(work));
    }

    let q = field.q() as u64;
    let mut irreducibles: Vec<FqPoly> = Vec::new();
    for n in 1..=max_degree as usize {
        // place[j] makes c0 the most significant digit, so increasing index
        // walks the coefficient sequences in lexicographic order.
        let mut place = vec![1u64; n];
        for j in (0..n - 1).rev() {
            place[j] = place[j + 1] * q;
        }
        let total = q.pow(n as u32);
        'candidate: for idx in 0..total {
            let mut coeffs = vec![0u8; n + 1];
            coeffs[n] = 1;
            for j in 0..n {
                coeffs[j] = ((idx / place[j]) % q) as u8;
            }
            if n >= 2 {
                if coeffs[0] == 0 {
                    continue; // divisible by x
                }
                for a in 0..field.q() {
                    if eval_coeffs(field, &coeffs, a) == 0 {
                        continue 'candidate; // has the linear factor x - a
                    }
                }
            }
            let candidate = FqPoly { coeffs };
            for p in &irreducibles {
                let d = p.coeffs.len() - 1;
                if 2 * d > n {
                    break; // sorted by degree; nothing smaller remains
                }
                if d >= 2 && candidate.rem(field, p).is_zero() {
                    continue 'candidate;
                }
            }
            irreducibles.push(candidate);
        }
    }
    Ok(irreducibles)
}

/// The semigroup of monic polynomials over a field of `q` elements, with
/// primes enumerated up to a fixed degree.
pub struct PolyBackend {
    field: FqField,
    table: PrimeTable,
    polys: Vec<FqPoly>,
    index: HashMap<FqPoly, PrimeId>,
    max_degree: u32,
}

impl PolyBackend {
    pub fn new(q: u64, max_degree: u32) -> Result<Self, PolyError> {
        let field = FqField::new(q)?;
        let polys = enumerate_irreducibles(&field, max_degree)?;
        let mut rows = Vec::with_capacity(polys.len());
        for p in &polys {
            let deg = (p.coeffs.len() - 1) as u32;
            let norm = q
                .checked_pow(deg)
                .expect("q <= 9 and degree <= 20 keep q^deg inside u64");
            rows.push((deg as u64, Some(norm), p.to_string()));
        }
        let table = PrimeTable::new(Grading::Degree, rows);
        let index = polys
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), PrimeId(i as u32)))
            .collect();
        Ok(Self {
            field,
            table,
            polys,
            index,
            max_degree,
        })
    }

    pub fn field(&self) -> &FqField {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.q() as u64
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn prime_poly(&self, id: PrimeId) -> &FqPoly {
        &self.polys[id.0 as usize]
    }

    pub fn prime_id_of(&self, p: &FqPoly) -> Option<PrimeId> {
        self.index.get(p).copied()
    }

    /// Number of irreducibles of each degree, index 0 to the table's max.
    pub fn prime_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.max_degree as usize + 1];
        for p in self.table.iter() {
            counts[p.size as usize] += 1;
        }
        counts
    }

    /// Factors a monic polynomial into an element of the semigroup by trial
    /// division against the prime table; fails if some irreducible factor
    /// has degree beyond the table.
    pub fn factor(&self, f: &FqPoly) -> Result<Element, PolyError> {
        if !f.is_monic() {
            return Err(PolyError::NotMonic(f.to_string()));
        }
        let mut rem = f.clone();
        let mut factors: Factors = SmallVec::new();
        for (i, p) in self.polys.iter().enumerate() {
            let rdeg = rem.coeffs.len() - 1;
            if rdeg == 0 {
                break;
            }
            let pdeg = p.coeffs.len() - 1;
            if 2 * pdeg > rdeg {
                break; // any remaining factor would have been found already
            }
            let mut mult = 0u32;
            loop {
                let (quo, r) = rem.divmod(&self.field, p);
                if r.is_zero() {
                    rem = quo;
                    mult += 1;
                } else {
                    break;
                }
            }
            if mult > 0 {
                factors.push((PrimeId(i as u32), mult));
            }
        }
        if rem.coeffs.len() > 1 {
            // What is left is irreducible: it survived every prime of at
            // most half its degree.
            match self.index.get(&rem) {
                Some(&id) => factors.push((id, 1)),
                None => {
                    return Err(PolyError::FactorOutsideTable(
                        rem.to_string(),
                        (rem.coeffs.len() - 1) as u32,
                        self.max_degree,
                    ))
                }
            }
        }
        Ok(Element::from_factors(&self.table, factors.iter().copied())?)
    }

    /// Multiplies an element's prime factors back into a polynomial.
    pub fn element_to_poly(&self, g: &Element) -> FqPoly {
        let mut acc = FqPoly::one();
        for &(id, mult) in g.factors() {
            let p = &self.polys[id.0 as usize];
            for _ in 0..mult {
                acc = acc.mul(&self.field, p);
            }
        }
        acc
    }

    /// Number of units in the residue ring modulo a monic polynomial:
    /// the product of `|P|^m - |P|^(m-1)` over its prime powers.
    pub fn unit_count_mod(&self, modulus: &FqPoly) -> Result<u64, PolyError> {
        let g = self.factor(modulus)?;
        let mut phi: u128 = 1;
        for &(id, mult) in g.factors() {
            let norm = self.table.prime(id).norm.expect("poly norms are set") as u128;
            phi *= norm.pow(mult - 1) * (norm - 1);
        }
        Ok(u64::try_from(phi).expect("modulus degree <= 20 keeps phi inside u64"))
    }

    /// The set of irreducibles congruent to `residue` modulo a monic
    /// `modulus`, coprime to it; its density among all primes is the
    /// reciprocal of the unit count of the residue ring.
    pub fn residue_class_prime_set(
        &self,
        modulus: &FqPoly,
        residue: &FqPoly,
    ) -> Result<PrimeSet, PolyError> {
        if !modulus.is_monic() || modulus.coeffs.len() < 2 {
            return Err(PolyError::NotMonic(modulus.to_string()));
        }
        if residue.is_zero() || residue.coeffs.len() >= modulus.coeffs.len() {
            return Err(PolyError::BadResidue);
        }
        if !modulus.gcd(&self.field, residue).is_one() {
            return Err(PolyError::NotCoprime);
        }
        let phi = self.unit_count_mod(modulus)?;
        let mut ids = BTreeSet::new();
        for (i, p) in self.polys.iter().enumerate() {
            if p.rem(&self.field, modulus) == *residue {
                ids.insert(i as u32);
            }
        }
        let density = BigRational::new(BigInt::one(), BigInt::from(phi));
        let description = format!(
            "irreducibles congruent to {} mod {} over F{}",
            residue,
            modulus,
            self.field.q()
        );
        Ok(PrimeSet::new(description, Some(density), move |p| {
            ids.contains(&p.id.0)
        }))
    }
}

impl Backend for PolyBackend {
    fn name(&self) -> String {
        format!("poly-f{}", self.q())
    }

    fn table(&self) -> &PrimeTable {
        &self.table
    }

    fn norm_base(&self) -> Option<u64> {
        Some(self.q())
    }

    fn known_growth_constant(&self) -> Option<f64> {
        // There are exactly q^n monic polynomials of degree n.
        Some(1.0)
    }

    fn for_each_in_bucket(&self, key: u64, visit: &mut dyn FnMut(&Element)) {
        for_each_element_of_degree(&self.table, key, visit);
    }

    fn bucket_limit(&self) -> u64 {
        self.max_degree as u64
    }
}
