//! Small numeric helpers shared across the crate: conversions from exact
//! rationals to floats that survive huge operands, compensated float
//! accumulation, and an exact rational accumulator with a denominator budget.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Approximate a big integer as `mantissa * 2^exp` with `mantissa` holding at
/// most 53 significant bits, so the pair always fits a double.
fn big_to_mantissa_exp(x: &BigInt) -> (f64, i64) {
    let bits = x.bits();
    if bits <= 53 {
        return (x.to_f64().unwrap_or(0.0), 0);
    }
    let shift = bits - 53;
    let m = (x >> shift).to_f64().unwrap_or(0.0);
    (m, shift as i64)
}

/// Convert an exact rational to the nearest-ish double. Unlike a naive
/// `numer.to_f64() / denom.to_f64()` this stays finite for operands far
/// beyond the double range (the result is off by at most a few ulp).
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let (mn, en) = big_to_mantissa_exp(r.numer());
    let (md, ed) = big_to_mantissa_exp(r.denom());
    let mut v = mn / md;
    let mut e = en - ed;
    // Apply the power-of-two exponent in chunks to avoid intermediate overflow.
    while e > 0 {
        let step = e.min(512);
        v *= f64::powi(2.0, step as i32);
        e -= step;
        if !v.is_finite() {
            return v;
        }
    }
    while e < 0 {
        let step = (-e).min(512);
        v *= f64::powi(2.0, -(step as i32));
        e += step;
        if v == 0.0 {
            return v;
        }
    }
    v
}

/// Neumaier's variant of Kahan summation. Deterministic for a fixed order of
/// additions, which the experiment reducers rely on.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another accumulator in without losing its compensation term.
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Exact rational accumulator that keeps the running value unreduced and only
/// normalizes when the denominator passes a size threshold. Once the reduced
/// denominator itself exceeds the budget the accumulator goes dark: exactness
/// is abandoned for the rest of the run (the caller keeps a float mirror).
/// The shut-off depends only on the sequence of added values, so results are
/// reproducible regardless of thread count.
#[derive(Clone, Debug)]
pub struct BudgetedRatAcc {
    num: BigInt,
    den: BigInt,
    budget_bits: u64,
    alive: bool,
}

impl BudgetedRatAcc {
    pub fn new(budget_bits: u64) -> Self {
        Self {
            num: BigInt::zero(),
            den: BigInt::from(1),
            budget_bits,
            alive: true,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    pub fn add(&mut self, r: &BigRational) {
        if !self.alive {
            return;
        }
        let (rn, rd) = (r.numer(), r.denom());
        if &self.den == rd {
            self.num += rn;
        } else {
            self.num = &self.num * rd + rn * &self.den;
            self.den *= rd;
        }
        if self.den.bits() > 2 * self.budget_bits {
            self.reduce();
            if self.den.bits() > self.budget_bits {
                self.alive = false;
            }
        }
    }

    fn reduce(&mut self) {
        let g = num_integer::Integer::gcd(&self.num, &self.den);
        if !g.is_zero() && *g.magnitude() > num_bigint::BigUint::from(1u8) {
            self.num /= &g;
            self.den /= &g;
        }
        if self.den.sign() == Sign::Minus {
            self.num = -std::mem::take(&mut self.num);
            self.den = -std::mem::take(&mut self.den);
        }
    }

    /// The exact value accumulated so far, or `None` once the budget is blown.
    pub fn value(&self) -> Option<BigRational> {
        if !self.alive {
            return None;
        }
        Some(BigRational::new(self.num.clone(), self.den.clone()))
    }
}

/// Mobius function on ordinary integers, for the small inversion formulas
/// (prime path counts, inverse Euler transforms). `n` must be positive.
pub fn int_mobius(mut n: u64) -> i64 {
    debug_assert!(n > 0);
    let mut factors = 0;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            factors += 1;
        }
        d += 1;
    }
    if n > 1 {
        factors += 1;
    }
    if factors % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Divisors of a small integer in ascending order.
pub fn small_divisors(n: u64) -> Vec<u64> {
    debug_assert!(n > 0);
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            lo.push(d);
            if d != n / d {
                hi.push(n / d);
            }
        }
        d += 1;
    }
    hi.reverse();
    lo.extend(hi);
    lo
}
