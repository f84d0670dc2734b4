//! Truncated power series with exact rational coefficients, the Euler
//! transform connecting prime counts to element counts, and the reciprocal
//! series that encodes degree-wise Mobius sums.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::numutil::{int_mobius, ratio_to_f64, small_divisors};

/// Default truncation order used by the zeta helpers.
pub const DEFAULT_TRUNCATION: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series reciprocal needs a nonzero constant term")]
    ZeroConstantTerm,
    #[error("element counts are not an Euler transform of nonnegative integer prime counts (fails at degree {degree})")]
    InconsistentCounts { degree: usize },
    #[error("count vectors must start with a 1 at degree 0")]
    BadConstantTerm,
}

/// A power series truncated at degree `len() - 1`, coefficients exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<BigRational>,
}

impl PowerSeries {
    pub fn zero(truncation: usize) -> Self {
        Self {
            coeffs: vec![BigRational::zero(); truncation + 1],
        }
    }

    pub fn one(truncation: usize) -> Self {
        let mut s = Self::zero(truncation);
        s.coeffs[0] = BigRational::one();
        s
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::from_coeffs(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    /// Highest retained degree.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, n: usize, v: BigRational) {
        self.coeffs[n] = v;
    }

    pub fn truncate(&self, truncation: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(truncation + 1);
        c.resize(truncation + 1, BigRational::zero());
        Self { coeffs: c }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.truncation().min(other.truncation());
        Self {
            coeffs: (0..=n)
                .map(|i| &self.coeffs[i] + &other.coeffs[i])
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.truncation().min(other.truncation());
        let mut out = vec![BigRational::zero(); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(n - i) {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                out[i + j] += &self.coeffs[i] * &other.coeffs[j];
            }
        }
        Self { coeffs: out }
    }

    /// Multiplicative inverse as a truncated series.
    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        if self.coeffs[0].is_zero() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let n = self.truncation();
        let inv0 = self.coeffs[0].recip();
        let mut out = vec![BigRational::zero(); n + 1];
        out[0] = inv0.clone();
        for k in 1..=n {
            let mut s = BigRational::zero();
            for j in 1..=k {
                if self.coeffs[j].is_zero() {
                    continue;
                }
                s += &self.coeffs[j] * &out[k - j];
            }
            out[k] = -(&inv0 * s);
        }
        Ok(Self { coeffs: out })
    }

    /// Exact evaluation of the truncated polynomial at a rational point.
    pub fn eval(&self, z: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Partial sums of the series at a rational point: index `n` holds the
    /// sum of the first `n + 1` terms.
    pub fn partial_sums_at(&self, z: &BigRational) -> Vec<BigRational> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut acc = BigRational::zero();
        let mut pow = BigRational::one();
        for c in &self.coeffs {
            acc += c * &pow;
            out.push(acc.clone());
            pow *= z;
        }
        out
    }

    /// CSV rows `index,numerator,denominator`, one per coefficient.
    pub fn write_csv(&self, w: &mut dyn std::io::Write) -> std::io::Result<()> {
        writeln!(w, "index,numerator,denominator")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            writeln!(w, "{},{},{}", i, c.numer(), c.denom())?;
        }
        Ok(())
    }
}

/// Prime and element counts of a degree-graded semigroup, indexed by degree
/// starting at 0 (`prime_counts[0]` is always 0, `element_counts[0]` always 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountVectors {
    pub prime_counts: Vec<BigUint>,
    pub element_counts: Vec<BigUint>,
}

impl CountVectors {
    pub fn from_prime_counts(prime_counts: Vec<BigUint>) -> Self {
        let element_counts = euler_transform(&prime_counts);
        Self {
            prime_counts,
            element_counts,
        }
    }
}

/// The Euler transform: from prime counts `p_d` to element counts of the free
/// commutative monoid, i.e. the coefficients of `prod (1 - z^d)^{-p_d}`.
/// Computed through the log-derivative recurrence
/// `n g_n = sum_{k=1..n} L_k g_{n-k}` with `L_k = sum_{d | k} d p_d`.
pub fn euler_transform(prime_counts: &[BigUint]) -> Vec<BigUint> {
    let n = prime_counts.len().saturating_sub(1);
    let mut l = vec![BigUint::zero(); n + 1];
    for k in 1..=n {
        for d in small_divisors(k as u64) {
            let d = d as usize;
            if d < prime_counts.len() {
                l[k] += &prime_counts[d] * BigUint::from(d);
            }
        }
    }
    let mut g = vec![BigUint::zero(); n + 1];
    g[0] = BigUint::one();
    for m in 1..=n {
        let mut s = BigUint::zero();
        for k in 1..=m {
            s += &l[k] * &g[m - k];
        }
        let (q, r) = num_integer::Integer::div_rem(&s, &BigUint::from(m));
        debug_assert!(r.is_zero(), "euler transform recurrence must divide evenly");
        g[m] = q;
    }
    g
}

/// Inverse Euler transform: recover prime counts from element counts,
/// checking that the input really is the element-count sequence of a free
/// commutative monoid (integral, nonnegative prime counts).
pub fn inverse_euler_transform(element_counts: &[BigUint]) -> Result<Vec<BigUint>, SeriesError> {
    if element_counts.is_empty() || !element_counts[0].is_one() {
        return Err(SeriesError::BadConstantTerm);
    }
    let n = element_counts.len() - 1;
    let g: Vec<BigInt> = element_counts
        .iter()
        .map(|c| BigInt::from(c.clone()))
        .collect();
    // First recover L_k = k g_k - sum_{j=1..k-1} L_j g_{k-j}.
    let mut l = vec![BigInt::zero(); n + 1];
    for k in 1..=n {
        let mut s = BigInt::from(k) * &g[k];
        for j in 1..k {
            s -= &l[j] * &g[k - j];
        }
        l[k] = s;
    }
    // Then p_n from L_n = sum_{d | n} d p_d by Mobius inversion.
    let mut p = vec![BigInt::zero(); n + 1];
    for k in 1..=n {
        let mut s = BigInt::zero();
        for d in small_divisors(k as u64) {
            let mu = int_mobius(k as u64 / d);
            if mu != 0 {
                s += BigInt::from(mu) * &l[d as usize];
            }
        }
        let (q, r) = num_integer::Integer::div_rem(&s, &BigInt::from(k));
        if !r.is_zero() || q.is_negative() {
            return Err(SeriesError::InconsistentCounts { degree: k });
        }
        p[k] = q;
    }
    Ok(p.into_iter().map(|x| x.to_biguint().unwrap()).collect())
}

/// The zeta series `prod_d (1 - z^d)^{-p_d}` truncated at `truncation`, as a
/// rational power series (its coefficients are the element counts).
pub fn zeta_from_prime_counts(prime_counts: &[BigUint], truncation: usize) -> PowerSeries {
    let mut p = prime_counts.to_vec();
    p.resize(truncation + 1, BigUint::zero());
    let g = euler_transform(&p);
    PowerSeries::from_coeffs(
        g.into_iter()
            .map(|c| BigRational::from_integer(BigInt::from(c)))
            .collect(),
    )
}

/// Coefficients of `1 / Z`: the degree-wise Mobius sums of the semigroup.
pub fn reciprocal_coefficients(zeta: &PowerSeries) -> Result<PowerSeries, SeriesError> {
    zeta.reciprocal()
}

/// Outcome of the heuristic non-vanishing check at `z = -1/q`.
#[derive(Clone, Debug, PartialEq)]
pub enum Nonvanishing {
    /// Averaged partial sums stabilized away from zero.
    Holds { estimate: f64 },
    /// Averaged partial sums stabilized at (numerically) zero.
    Fails { estimate: f64 },
    /// The window never settled; nothing can be concluded at this truncation.
    Inconclusive { estimate: f64, spread: f64 },
}

/// Heuristic check that the zeta series does not vanish at `z = -1/q`, the
/// standing assumption behind the degree-graded partial-sum theorems. The
/// series is evaluated exactly; if the raw partial sums settle inside the
/// window their limit decides, otherwise the point is on the boundary of
/// convergence and Cesaro averages get a second look. This is a diagnostic,
/// not a proof.
pub fn assumption_check_minus_q_inverse(zeta: &PowerSeries, q: u64, window: usize) -> Nonvanishing {
    assert!(q > 0);
    let z = -BigRational::new(BigInt::one(), BigInt::from(q));
    let partials = zeta.partial_sums_at(&z);
    const SETTLE: f64 = 0.08;

    let (raw_estimate, raw_spread) = window_stats(&partials, window);
    if raw_spread <= SETTLE {
        return verdict(raw_estimate, raw_spread);
    }

    let mut cesaro = Vec::with_capacity(partials.len());
    let mut acc = BigRational::zero();
    for (i, s) in partials.iter().enumerate() {
        acc += s;
        cesaro.push(&acc / BigRational::from_integer(BigInt::from(i as u64 + 1)));
    }
    let (estimate, spread) = window_stats(&cesaro, window);
    if spread <= SETTLE {
        return verdict(estimate, spread);
    }
    Nonvanishing::Inconclusive { estimate, spread }
}

fn window_stats(values: &[BigRational], window: usize) -> (f64, f64) {
    let window = window.max(2).min(values.len());
    let tail = &values[values.len() - window..];
    let mut lo = tail[0].clone();
    let mut hi = tail[0].clone();
    for v in tail.iter() {
        if *v < lo {
            lo = v.clone();
        }
        if *v > hi {
            hi = v.clone();
        }
    }
    (
        ratio_to_f64(tail.last().unwrap()),
        ratio_to_f64(&(&hi - &lo)),
    )
}

fn verdict(estimate: f64, spread: f64) -> Nonvanishing {
    if estimate.abs() > 3.0 * spread + 1e-9 {
        Nonvanishing::Holds { estimate }
    } else {
        Nonvanishing::Fails { estimate }
    }
}

/// Least-squares fit of `count_n ~ c * q^n` on a log scale, with an optional
/// second fit of the residual growth rate. Diagnostic only: everything is in
/// floats.
#[derive(Clone, Debug)]
pub struct GrowthFit {
    pub c: f64,
    pub q: f64,
    /// Fitted exponent of the residual envelope `|count_n - c q^n| ~ C q^(eta n)`,
    /// relative to the fitted `q` (so `eta < 1` is consistent with a power
    /// saving). `None` when the residuals are too small or too few to fit.
    pub eta: Option<f64>,
    pub residuals: Vec<f64>,
    /// Set when the counts matched the geometric law essentially exactly.
    pub degenerate: bool,
}

/// Fit axiom constants from `(degree, count)` samples.
pub fn fit_axiom_constants(samples: &[(u64, f64)]) -> Option<GrowthFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(_, c)| c > 0.0)
        .map(|&(n, c)| (n as f64, c.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    // Fit the leading law on the upper half of the range, where lower-order
    // terms have decayed the most; the residual exponent is then read off the
    // lower half, where the leading-term fit error is negligible in absolute
    // size next to the genuine residual.
    let fit_start = if pts.len() >= 4 { pts.len() / 2 } else { 0 };
    let (slope, intercept) = linear_fit(&pts[fit_start..]);
    let q = slope.exp();
    let c = intercept.exp();
    let residuals: Vec<f64> = samples
        .iter()
        .map(|&(n, cnt)| cnt - c * q.powf(n as f64))
        .collect();
    let lower = samples.len().div_ceil(2);
    let mut scale: Vec<(f64, f64)> = samples
        .iter()
        .zip(&residuals)
        .take(lower)
        .filter(|&(_, r)| r.abs() > 1e-9)
        .map(|(&(n, _), &r)| (n as f64, r.abs().ln()))
        .collect();
    if scale.len() < 3 {
        scale = samples
            .iter()
            .zip(&residuals)
            .filter(|&(_, r)| r.abs() > 1e-9)
            .map(|(&(n, _), &r)| (n as f64, r.abs().ln()))
            .collect();
    }
    let degenerate = scale.len() < 3;
    let eta = if degenerate {
        None
    } else {
        let (rslope, _) = linear_fit(&scale);
        Some(rslope / slope)
    };
    Some(GrowthFit {
        c,
        q,
        eta,
        residuals,
        degenerate,
    })
}

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

/// Convenience: element counts of a degree-graded semigroup as floats.
pub fn counts_to_f64(counts: &[BigUint]) -> Vec<f64> {
    counts
        .iter()
        .map(|c| BigInt::from(c.clone()).to_f64().unwrap_or(f64::INFINITY))
        .collect()
}
