//! Theorem-level experiment drivers: distinguished-set partial sums (plain,
//! convolution-weighted, phi-weighted), duality sweeps and fuzzing, the
//! phi/norm transform identity, maximal-prime equidistribution, the classic
//! partial-sum statistics, and density estimation.
//!
//! Exactness policy: every summand is computed as an exact rational. Exact
//! running totals are kept while a denominator budget lasts; a compensated
//! float mirror accumulates per term in a fixed order so reported numerics
//! are bit-identical regardless of worker count. Graph backends have
//! irrational norms, so their sums are exact coefficient vectors in powers of
//! the zeta radius, evaluated numerically only at report time.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::backend::Backend;
use crate::numutil::{ratio_to_f64, BudgetedRatAcc, NeumaierSum};
use crate::semigroup::{
    dirichlet_convolve, divisors, euler_phi, is_distinguished, max_prime_data, min_prime_data,
    mobius, ArithFn, CoreError, DualityFn, Element, Grading, PrimeSet, SizeArg, SupportHint,
};
use crate::series::fit_axiom_constants;

/// Bits allowed in a running exact denominator before the accumulator
/// abandons exactness for the rest of the run.
pub const EXACT_BUDGET_BITS: u64 = 32_768;

/// Buckets are dispatched to workers in fixed chunks of this many keys and
/// reduced in ascending order.
const BUCKET_CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("arithmetical function {0:?} must take the value 1 at the identity")]
    NotNormalized(String),
    #[error("cutoffs must be a nonempty strictly increasing sequence")]
    BadCutoffs,
    #[error("cutoff {requested} exceeds the backend enumeration limit {limit}")]
    CutoffOutOfRange { requested: u64, limit: u64 },
    #[error("the decay exponent must be a positive integer")]
    ZeroAlpha,
    #[error("phi weighting needs exact integer norms, which backend {0} lacks")]
    PhiUnavailable(String),
    #[error("duality residual {residual} at g={element}, S={set}, f={weight}")]
    DualityViolation {
        element: String,
        set: String,
        weight: String,
        residual: String,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Which divisor of `(mu * a)(g)` the partial sums use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Norm,
    Phi,
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Weight::Norm => "norm",
            Weight::Phi => "phi",
        })
    }
}

/// One cutoff of a partial-sum run.
#[derive(Clone, Debug)]
pub struct SumRow {
    pub cutoff: u64,
    /// Exact running total, while the denominator budget lasted and the
    /// backend has rational norms.
    pub exact: Option<BigRational>,
    /// Graph backends only: coefficient `v` of the sum written as a
    /// polynomial in the radius, `sum = -(c_1 R + c_2 R^2 + ...)`.
    pub radius_coeffs: Option<Vec<BigRational>>,
    /// Compensated float value of the sum.
    pub value: f64,
    pub abs_error: f64,
    pub seconds: f64,
}

/// A full partial-sum experiment: configuration echo, target density, and
/// one row per cutoff.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub backend: String,
    pub set: String,
    pub arith: String,
    pub weight: Weight,
    pub grading: Grading,
    /// Numeric target density, and whether it came from a closed form.
    pub target: f64,
    pub target_known: bool,
    pub rows: Vec<SumRow>,
}

impl ExperimentReport {
    pub fn final_value(&self) -> f64 {
        self.rows.last().map(|r| r.value).unwrap_or(0.0)
    }

    pub fn final_abs_error(&self) -> f64 {
        self.rows.last().map(|r| r.abs_error).unwrap_or(f64::NAN)
    }

    /// CSV per cutoff. `sum_num`/`sum_den` are empty once exactness is gone
    /// (or never existed, as with graph norms); `seconds` stays empty unless
    /// requested, so default output is byte-stable across runs and worker
    /// counts.
    pub fn write_csv(&self, w: &mut dyn Write, timings: bool) -> std::io::Result<()> {
        writeln!(
            w,
            "cutoff,sum_num,sum_den,sum_float,target,abs_error,seconds"
        )?;
        for row in &self.rows {
            let (num, den) = match &row.exact {
                Some(r) => (r.numer().to_string(), r.denom().to_string()),
                None => (String::new(), String::new()),
            };
            let seconds = if timings {
                format!("{:.3}", row.seconds)
            } else {
                String::new()
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                row.cutoff, num, den, row.value, self.target, row.abs_error, seconds
            )?;
        }
        Ok(())
    }
}

/// Power-decay input for the convolution theorem: `a(g) = norm(g)^-alpha` on
/// the distinguished set away from the identity, `a(e) = 1`, zero elsewhere.
/// The exponent must be a positive integer so values stay rational.
pub fn convolution_arith_fn(set: &PrimeSet, alpha: u32) -> Result<ArithFn, ExperimentError> {
    if alpha == 0 {
        return Err(ExperimentError::ZeroAlpha);
    }
    Ok(ArithFn::power_decay(alpha, set.clone()))
}

/// Target density for a set: the closed form when it is known, otherwise the
/// fraction of table primes in the set (flagged as estimated).
pub fn target_density(backend: &dyn Backend, set: &PrimeSet) -> (f64, bool) {
    if let Some(d) = &set.known_density {
        return (ratio_to_f64(d), true);
    }
    let table = backend.table();
    let total = table.len();
    if total == 0 {
        return (0.0, false);
    }
    let inside = table.iter().filter(|p| set.contains(p)).count();
    (inside as f64 / total as f64, false)
}

/// The first bucket the sums range over: degree 1, or norm 2 (norm bucket 1
/// is the identity, which the theorems exclude from the summation range).
fn first_bucket(grading: Grading) -> u64 {
    match grading {
        Grading::Degree => 1,
        Grading::Norm => 2,
    }
}

struct BucketSum {
    exact: BigRational,
    float: NeumaierSum,
}

/// Exact and float sum of `(mu * a)(g) / weight(g)` over distinguished `g`
/// in one bucket. For graph backends the returned exact value is the bare
/// `(mu * a)` bucket total (the radius-power coefficient) and the float
/// applies the numeric radius power.
fn bucket_sum(
    backend: &dyn Backend,
    set: &PrimeSet,
    a: &ArithFn,
    weight: Weight,
    unit: Option<f64>,
    key: u64,
) -> Result<BucketSum, CoreError> {
    let table = backend.table();
    let mu = ArithFn::mobius_fn();
    let identity_shortcut = a.support_hint == SupportHint::IdentityOnly;
    let mut exact = BigRational::zero();
    let mut float = NeumaierSum::new();
    let mut err: Option<CoreError> = None;
    backend.for_each_in_bucket(key, &mut |g| {
        if err.is_some() || !is_distinguished(table, g, set) {
            return;
        }
        let mut run = || -> Result<(), CoreError> {
            let mu_a = if identity_shortcut {
                BigRational::from_integer(BigInt::from(mobius(g)))
            } else {
                dirichlet_convolve(table, &mu, a, g)?
            };
            if mu_a.is_zero() {
                return Ok(());
            }
            match unit {
                Some(r) => {
                    // Irrational norms: keep the coefficient exact, mirror
                    // the term as coefficient * R^degree.
                    float.add(ratio_to_f64(&mu_a) * r.powi(g.size() as i32));
                    exact += mu_a;
                }
                None => {
                    let w = match weight {
                        Weight::Norm => BigRational::from_integer(BigInt::from(g.norm(table)?)),
                        Weight::Phi => euler_phi(table, g)?,
                    };
                    let term = mu_a / w;
                    float.add(ratio_to_f64(&term));
                    exact += term;
                }
            }
            Ok(())
        };
        if let Err(e) = run() {
            err = Some(e);
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(BucketSum { exact, float }),
    }
}

/// Partial sums `-sum over distinguished g in range of (mu*a)(g)/weight(g)`
/// at each cutoff. Degree-graded backends range over `1 <= deg(g) <= n`,
/// norm-graded over `2 <= norm(g) <= x`. The limit of the sequence is the
/// density of the set, which the report carries as the error target.
pub fn alladi_partial_sums(
    backend: &dyn Backend,
    set: &PrimeSet,
    a: &ArithFn,
    cutoffs: &[u64],
    weight: Weight,
) -> Result<ExperimentReport, ExperimentError> {
    if !a.normalized_at_identity {
        return Err(ExperimentError::NotNormalized(a.description.clone()));
    }
    let id = Element::identity(backend.table());
    if a.evaluate(backend.table(), &id)? != BigRational::one() {
        return Err(ExperimentError::NotNormalized(a.description.clone()));
    }
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::BadCutoffs);
    }
    let limit = backend.bucket_limit();
    if let Some(&last) = cutoffs.last() {
        if last > limit {
            return Err(ExperimentError::CutoffOutOfRange {
                requested: last,
                limit,
            });
        }
    }
    let unit = backend.norm_unit_value();
    if weight == Weight::Phi && unit.is_some() {
        return Err(ExperimentError::PhiUnavailable(backend.name()));
    }
    let (target, target_known) = target_density(backend, set);

    let mut rows = Vec::with_capacity(cutoffs.len());
    let mut exact_total = BudgetedRatAcc::new(EXACT_BUDGET_BITS);
    let mut float_total = NeumaierSum::new();
    let mut coeffs: Vec<BigRational> = Vec::new();
    let mut next = first_bucket(backend.grading());
    for &cutoff in cutoffs {
        let started = Instant::now();
        while next <= cutoff {
            let chunk_end = (next + BUCKET_CHUNK as u64 - 1).min(cutoff);
            let keys: Vec<u64> = (next..=chunk_end).collect();
            let results: Vec<Result<BucketSum, CoreError>> = keys
                .par_iter()
                .map(|&k| bucket_sum(backend, set, a, weight, unit, k))
                .collect();
            for r in results {
                let b = r?;
                float_total.merge(&b.float);
                if unit.is_some() {
                    coeffs.push(b.exact);
                } else {
                    exact_total.add(&b.exact);
                }
            }
            next = chunk_end + 1;
        }
        let (exact, radius_coeffs) = if unit.is_some() {
            (None, Some(coeffs.clone()))
        } else {
            (exact_total.value().map(|v| -v), None)
        };
        let value = -float_total.value();
        rows.push(SumRow {
            cutoff,
            exact,
            radius_coeffs,
            value,
            abs_error: (value - target).abs(),
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok(ExperimentReport {
        backend: backend.name(),
        set: set.description.clone(),
        arith: a.description.clone(),
        weight,
        grading: backend.grading(),
        target,
        target_known,
        rows,
    })
}

/// Residual of the phi/norm transform identity at one element: with
/// `b(g) = sum over h | g of (mu*a)(h) norm(h)/phi(h)`, the identity says
/// `(mu*a)(g)/phi(g) = (mu*b)(g)/norm(g)` exactly. Returns the difference.
pub fn b_transform_residual(
    backend: &dyn Backend,
    a: &ArithFn,
    g: &Element,
) -> Result<BigRational, ExperimentError> {
    let table = backend.table();
    let mu = ArithFn::mobius_fn();
    let mu_a_g = dirichlet_convolve(table, &mu, a, g)?;
    let lhs = mu_a_g / euler_phi(table, g)?;

    let mut mu_b_g = BigRational::zero();
    for (h, co) in divisors(table, g) {
        // (mu * b)(g) = sum over h | g of b(h) mu(g/h).
        let m = mobius(&co);
        if m == 0 {
            continue;
        }
        let mut b_h = BigRational::zero();
        for (u, _) in divisors(table, &h) {
            let mu_a_u = dirichlet_convolve(table, &mu, a, &u)?;
            if mu_a_u.is_zero() {
                continue;
            }
            let norm_u = BigRational::from_integer(BigInt::from(u.norm(table)?));
            b_h += mu_a_u * norm_u / euler_phi(table, &u)?;
        }
        mu_b_g += b_h * BigRational::from_integer(BigInt::from(m));
    }
    let rhs = mu_b_g / BigRational::from_integer(BigInt::from(g.norm(table)?));
    Ok(lhs - rhs)
}

/// Outcome of a randomized identity sweep.
#[derive(Clone, Debug)]
pub struct FuzzOutcome {
    pub samples: u64,
    pub failures: u64,
    /// Description of the first failing input, when any failed.
    pub first_failure: Option<String>,
}

impl FuzzOutcome {
    pub fn all_passed(&self) -> bool {
        self.failures == 0
    }
}

/// Collect every element in the buckets `first..=max_bucket`.
fn collect_elements(backend: &dyn Backend, max_bucket: u64) -> Vec<Element> {
    let mut out = Vec::new();
    for key in first_bucket(backend.grading())..=max_bucket.min(backend.bucket_limit()) {
        backend.for_each_in_bucket(key, &mut |g| out.push(g.clone()));
    }
    out
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let num = rng.random_range(-20i64..=20);
    let den = rng.random_range(1i64..=12);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Randomized check of `b_transform_residual == 0`: random elements from the
/// enumeration range and random rational-valued inputs `a` of small support.
pub fn b_transform_fuzz(
    backend: &dyn Backend,
    max_bucket: u64,
    samples: u64,
    seed: u64,
) -> Result<FuzzOutcome, ExperimentError> {
    let pool = collect_elements(backend, max_bucket);
    if pool.is_empty() {
        return Ok(FuzzOutcome {
            samples: 0,
            failures: 0,
            first_failure: None,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = backend.table();
    let mut failures = 0;
    let mut first_failure = None;
    for _ in 0..samples {
        let g = pool[rng.random_range(0..pool.len())].clone();
        // A random function supported on a few random elements plus the
        // identity (value 1 there).
        let mut map = HashMap::new();
        for _ in 0..rng.random_range(0..4u32) {
            let h = pool[rng.random_range(0..pool.len())].clone();
            map.insert(h, random_rational(&mut rng));
        }
        let a = ArithFn::from_table("random finite-support", map, true);
        let residual = b_transform_residual(backend, &a, &g)?;
        if !residual.is_zero() {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some(format!("g={} residual={}", g.display(table), residual));
            }
        }
    }
    Ok(FuzzOutcome {
        samples,
        failures,
        first_failure,
    })
}

/// Exhaustive duality sweep: verifies the duality residual vanishes for
/// every element in range crossed with every given set and weight. Returns
/// the number of triples checked; the first violation aborts with its data.
pub fn duality_sweep(
    backend: &dyn Backend,
    max_bucket: u64,
    sets: &[PrimeSet],
    weights: &[DualityFn],
) -> Result<u64, ExperimentError> {
    let table = backend.table();
    let mut checked = 0u64;
    for key in first_bucket(backend.grading())..=max_bucket.min(backend.bucket_limit()) {
        // Collect, then verify buckets in parallel over elements.
        let mut bucket = Vec::new();
        backend.for_each_in_bucket(key, &mut |g| bucket.push(g.clone()));
        let results: Vec<Result<u64, ExperimentError>> = bucket
            .par_iter()
            .map(|g| {
                let mut n = 0u64;
                for set in sets {
                    for f in weights {
                        let r = crate::semigroup::duality_residual(table, g, set, f)?;
                        if !r.is_zero() {
                            return Err(ExperimentError::DualityViolation {
                                element: g.display(table),
                                set: set.description.clone(),
                                weight: f.description.clone(),
                                residual: r.to_string(),
                            });
                        }
                        n += 1;
                    }
                }
                Ok(n)
            })
            .collect();
        for r in results {
            checked += r?;
        }
    }
    Ok(checked)
}

/// Randomized duality check over `samples` triples `(g, S, f)`: random
/// elements, random prime subsets, and random admissible weights.
pub fn duality_fuzz(
    backend: &dyn Backend,
    max_bucket: u64,
    samples: u64,
    seed: u64,
) -> Result<FuzzOutcome, ExperimentError> {
    let pool = collect_elements(backend, max_bucket);
    if pool.is_empty() {
        return Ok(FuzzOutcome {
            samples: 0,
            failures: 0,
            first_failure: None,
        });
    }
    let table = backend.table();
    let identity_size = match backend.grading() {
        Grading::Degree => 0,
        Grading::Norm => 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut first_failure = None;
    for _ in 0..samples {
        let g = &pool[rng.random_range(0..pool.len())];
        let set = match rng.random_range(0..4u32) {
            0 => PrimeSet::all(),
            1 => PrimeSet::none(),
            _ => {
                // A random subset of the primes that can actually divide
                // elements in range.
                let ids: std::collections::BTreeSet<u32> = table
                    .ids_with_size_at_most(max_bucket)
                    .filter(|_| rng.random_range(0..2u32) == 0)
                    .map(|id| id.0)
                    .collect();
                PrimeSet::from_ids("random subset", ids)
            }
        };
        let f = match rng.random_range(0..3u32) {
            // Linear growth shifted to vanish at the identity size, so the
            // weight stays admissible under both gradings.
            0 => DualityFn::new("f(k)=k-identity", move |at| match at {
                SizeArg::Finite(k) if k > identity_size => {
                    BigRational::from_integer(BigInt::from(k - identity_size))
                }
                _ => BigRational::zero(),
            }),
            1 => DualityFn::indicator_above(rng.random_range(identity_size..identity_size + 5)),
            _ => {
                // Random rational values on sizes, zero at the identity size
                // and at infinity.
                let mut values = HashMap::new();
                for s in identity_size + 1..identity_size + 12 {
                    values.insert(s, random_rational(&mut rng));
                }
                DualityFn::new("random table weight", move |at| match at {
                    SizeArg::Finite(k) => values.get(&k).cloned().unwrap_or_else(BigRational::zero),
                    SizeArg::Infinite => BigRational::zero(),
                })
            }
        };
        let r = crate::semigroup::duality_residual(table, g, &set, &f)?;
        if !r.is_zero() {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some(format!(
                    "g={} S={} f={} residual={}",
                    g.display(table),
                    set.description,
                    f.description,
                    r
                ));
            }
        }
    }
    Ok(FuzzOutcome {
        samples,
        failures,
        first_failure,
    })
}

/// One bucket (degree grading) or cumulative cutoff (norm grading) of the
/// maximal-prime equidistribution statistic.
#[derive(Clone, Debug)]
pub struct EquidistRow {
    pub key: u64,
    /// Exact sum of the number of maximal primes in the set, over the bucket
    /// (degree grading) or all buckets up to the key (norm grading).
    pub q_sum: u128,
    /// `q_sum` over `q^n` (degree) or over `x` (norm).
    pub ratio: f64,
    /// Reference value `c * density` with the fitted growth constant.
    pub fitted_reference: Option<f64>,
    /// Same with the closed-form constant, where the backend has one.
    pub closed_form_reference: Option<f64>,
}

/// Growth samples for constant fitting: per-degree element counts, or
/// cumulative element counts at the given norm cutoffs.
pub fn growth_samples(backend: &dyn Backend, keys: &[u64]) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity(keys.len());
    match backend.grading() {
        Grading::Degree => {
            for &n in keys {
                let mut count = 0u64;
                backend.for_each_in_bucket(n, &mut |_| count += 1);
                out.push((n, count as f64));
            }
        }
        Grading::Norm => {
            let mut cumulative = 0u64;
            let mut next = 1u64;
            for &x in keys {
                while next <= x {
                    backend.for_each_in_bucket(next, &mut |_| cumulative += 1);
                    next += 1;
                }
                out.push((x, cumulative as f64));
            }
        }
    }
    out
}

/// Least-squares constant for the linear growth law `count ~ c * x` of
/// norm-graded backends.
pub fn fit_linear_constant(samples: &[(u64, f64)]) -> Option<f64> {
    let sxx: f64 = samples.iter().map(|&(x, _)| (x as f64) * (x as f64)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = samples.iter().map(|&(x, y)| (x as f64) * y).sum();
    Some(sxy / sxx)
}

/// Exact sums of `Q_S(g)` (the number of maximal-size primes of `g` lying in
/// the set) per degree, or cumulatively per norm cutoff, with numeric
/// reference values for trend inspection. The references multiply the set
/// density by the growth constant: once fitted from element counts, and once
/// from the closed form when the backend knows one.
pub fn equidistribution_check(
    backend: &dyn Backend,
    set: &PrimeSet,
    keys: &[u64],
) -> Result<Vec<EquidistRow>, ExperimentError> {
    if keys.is_empty() || keys.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::BadCutoffs);
    }
    let limit = backend.bucket_limit();
    if let Some(&last) = keys.last() {
        if last > limit {
            return Err(ExperimentError::CutoffOutOfRange {
                requested: last,
                limit,
            });
        }
    }
    let table = backend.table();
    let (density, _) = target_density(backend, set);
    let samples = growth_samples(backend, keys);
    let fitted_c = match backend.grading() {
        Grading::Degree => fit_axiom_constants(&samples).map(|f| f.c),
        Grading::Norm => fit_linear_constant(&samples),
    };
    let closed_c = backend.known_growth_constant();

    let bucket_q_sum = |key: u64| -> u128 {
        let mut sum: u128 = 0;
        backend.for_each_in_bucket(key, &mut |g| {
            if g.is_identity() {
                return;
            }
            sum += max_prime_data(table, g, Some(set)).in_set.unwrap_or(0) as u128;
        });
        sum
    };

    let mut rows = Vec::with_capacity(keys.len());
    match backend.grading() {
        Grading::Degree => {
            let base = backend
                .norm_base()
                .map(|q| q as f64)
                .or_else(|| backend.norm_unit_value().map(|u| 1.0 / u))
                .unwrap_or(f64::NAN);
            for &n in keys {
                let q_sum = bucket_q_sum(n);
                let ratio = q_sum as f64 / base.powi(n as i32);
                rows.push(EquidistRow {
                    key: n,
                    q_sum,
                    ratio,
                    fitted_reference: fitted_c.map(|c| c * density),
                    closed_form_reference: closed_c.map(|c| c * density),
                });
            }
        }
        Grading::Norm => {
            let mut cumulative: u128 = 0;
            let mut next = 2u64;
            for &x in keys {
                while next <= x {
                    cumulative += bucket_q_sum(next);
                    next += 1;
                }
                rows.push(EquidistRow {
                    key: x,
                    q_sum: cumulative,
                    ratio: cumulative as f64 / x as f64,
                    fitted_reference: fitted_c.map(|c| c * density),
                    closed_form_reference: closed_c.map(|c| c * density),
                });
            }
        }
    }
    Ok(rows)
}

/// The four classical partial-sum statistics over elements whose minimal
/// prime size exceeds `rough_bound` ("rough" elements):
/// the signed count at the exact top size, the cumulative signed count, the
/// cumulative norm-weighted sum, and the plain count. The identity qualifies
/// always (its minimal size is infinite).
#[derive(Clone, Debug, PartialEq)]
pub struct SumStatistics {
    /// `C`: sum of mu over rough elements at size exactly the cutoff.
    pub top_signed: BigInt,
    /// `M`: sum of mu over rough elements of size up to the cutoff.
    pub signed: BigInt,
    /// `R`: sum of mu/norm over the same range.
    pub weighted: BigRational,
    /// `Phi`: number of rough elements in range.
    pub count: u64,
}

pub fn partial_sum_statistics(
    backend: &dyn Backend,
    cutoff: u64,
    rough_bound: u64,
) -> Result<SumStatistics, ExperimentError> {
    let limit = backend.bucket_limit();
    if cutoff > limit {
        return Err(ExperimentError::CutoffOutOfRange {
            requested: cutoff,
            limit,
        });
    }
    let table = backend.table();
    let identity_size = match backend.grading() {
        Grading::Degree => 0,
        Grading::Norm => 1,
    };
    let mut top_signed = BigInt::zero();
    let mut signed = BigInt::zero();
    let mut weighted = BigRational::zero();
    let mut count = 0u64;
    let mut err: Option<CoreError> = None;
    for key in identity_size..=cutoff {
        backend.for_each_in_bucket(key, &mut |g| {
            if err.is_some() {
                return;
            }
            if !g.is_identity() {
                let min = match min_prime_data(table, g) {
                    Ok(m) => m,
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                };
                if min.size <= rough_bound {
                    return;
                }
            }
            let m = mobius(g);
            count += 1;
            signed += m;
            if key == cutoff {
                top_signed += m;
            }
            if m != 0 {
                match g.norm(table) {
                    Ok(n) => weighted += BigRational::new(BigInt::from(m), BigInt::from(n)),
                    Err(e) => err = Some(e),
                }
            }
        });
    }
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(SumStatistics {
        top_signed,
        signed,
        weighted,
        count,
    })
}

/// One cutoff of a density estimate.
#[derive(Clone, Debug)]
pub struct DensityRow {
    pub cutoff: u64,
    pub primes_total: u64,
    pub primes_in_set: u64,
    pub ratio: f64,
}

/// Empirical density of a prime set: the fraction of table primes in the set
/// at each size cutoff up to the horizon. The final row is the estimate used
/// when no closed form is known.
pub fn density_estimate(backend: &dyn Backend, set: &PrimeSet, horizon: u64) -> Vec<DensityRow> {
    let mut rows: Vec<DensityRow> = Vec::new();
    let mut total = 0u64;
    let mut inside = 0u64;
    let mut last_size: Option<u64> = None;
    for p in backend.table().iter() {
        if p.size > horizon {
            break;
        }
        if let Some(s) = last_size {
            if s != p.size && total > 0 {
                rows.push(DensityRow {
                    cutoff: s,
                    primes_total: total,
                    primes_in_set: inside,
                    ratio: inside as f64 / total as f64,
                });
            }
        }
        total += 1;
        if set.contains(p) {
            inside += 1;
        }
        last_size = Some(p.size);
    }
    if let Some(s) = last_size {
        if total > 0 {
            rows.push(DensityRow {
                cutoff: s,
                primes_total: total,
                primes_in_set: inside,
                ratio: inside as f64 / total as f64,
            });
        }
    }
    rows
}

/// `log log t`, with the small-argument convention that the value is 0 below
/// `e^e` so summability weights never go negative.
pub fn loglog(t: f64) -> f64 {
    const E_TO_E: f64 = 15.154262241479262;
    if t < E_TO_E {
        0.0
    } else {
        t.ln().ln()
    }
}

/// Empirical check of the convolution summability hypothesis: partial sums
/// of `|a(g)| / norm(g) * loglog(norm(g))` per bucket. The hypothesis holds
/// when the increments decay.
pub fn summability_partials(
    backend: &dyn Backend,
    a: &ArithFn,
    max_bucket: u64,
) -> Result<Vec<f64>, ExperimentError> {
    let table = backend.table();
    let unit = backend.norm_unit_value();
    let mut acc = NeumaierSum::new();
    let mut out = Vec::new();
    let mut err: Option<CoreError> = None;
    for key in first_bucket(backend.grading())..=max_bucket.min(backend.bucket_limit()) {
        backend.for_each_in_bucket(key, &mut |g| {
            if err.is_some() {
                return;
            }
            match a.evaluate(table, g) {
                Ok(v) => {
                    if v.is_zero() {
                        return;
                    }
                    let norm = match unit {
                        Some(r) => r.powi(-(g.size() as i32)),
                        None => match g.norm(table) {
                            Ok(n) => n as f64,
                            Err(e) => {
                                err = Some(e);
                                return;
                            }
                        },
                    };
                    acc.add(ratio_to_f64(&v.abs()) / norm * loglog(norm));
                }
                Err(e) => err = Some(e),
            }
        });
        out.push(acc.value());
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok(out),
    }
}

/// Side-by-side comparison of the plain partial sum (`a` = convolution
/// identity) and the convolution-weighted sum with decay exponent `alpha`,
/// at the same cutoffs. The equivalence theorem behind them says the two
/// converge to the same limit, so their gap at the final cutoff should be
/// comparable to the plain sum's own convergence scale; `passes` checks the
/// gap against twice the plain sum's last increment.
#[derive(Clone, Debug)]
pub struct BridgeReport {
    pub plain: ExperimentReport,
    pub convolution: ExperimentReport,
    pub difference: f64,
    pub plain_last_increment: f64,
    pub passes: bool,
}

pub fn bridge_check(
    backend: &dyn Backend,
    set: &PrimeSet,
    cutoffs: &[u64],
    alpha: u32,
) -> Result<BridgeReport, ExperimentError> {
    if cutoffs.len() < 2 {
        return Err(ExperimentError::BadCutoffs);
    }
    let plain = alladi_partial_sums(
        backend,
        set,
        &ArithFn::convolution_identity(),
        cutoffs,
        Weight::Norm,
    )?;
    let conv_fn = convolution_arith_fn(set, alpha)?;
    let convolution = alladi_partial_sums(backend, set, &conv_fn, cutoffs, Weight::Norm)?;
    let difference = (plain.final_value() - convolution.final_value()).abs();
    let n = plain.rows.len();
    let plain_last_increment = (plain.rows[n - 1].value - plain.rows[n - 2].value).abs();
    let passes = difference < 2.0 * plain_last_increment;
    Ok(BridgeReport {
        plain,
        convolution,
        difference,
        plain_last_increment,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ints::IntBackend;
    use crate::poly::PolyBackend;

    fn f2(max_degree: u32) -> PolyBackend {
        PolyBackend::new(2, max_degree).unwrap()
    }

    #[test]
    fn plain_sum_first_cutoff_over_f2_is_one() {
        let backend = f2(8);
        let report = alladi_partial_sums(
            &backend,
            &PrimeSet::all(),
            &ArithFn::convolution_identity(),
            &[1, 2, 3],
            Weight::Norm,
        )
        .unwrap();
        // Degree 1: -(mu(x)/2 + mu(x+1)/2) = 1.
        assert_eq!(report.rows[0].exact, Some(BigRational::one()));
        assert_eq!(report.rows[0].value, 1.0);
        assert_eq!(report.target, 1.0);
        assert!(report.target_known);
    }

    #[test]
    fn empty_set_gives_zero_sums() {
        let backend = f2(6);
        let report = alladi_partial_sums(
            &backend,
            &PrimeSet::none(),
            &ArithFn::convolution_identity(),
            &[1, 3, 6],
            Weight::Norm,
        )
        .unwrap();
        for row in &report.rows {
            assert_eq!(row.exact, Some(BigRational::zero()));
            assert_eq!(row.value, 0.0);
            assert_eq!(row.abs_error, 0.0);
        }
    }

    #[test]
    fn partial_sums_validate_inputs() {
        let backend = f2(6);
        let all = PrimeSet::all();
        let id = ArithFn::convolution_identity();
        assert!(matches!(
            alladi_partial_sums(&backend, &all, &id, &[], Weight::Norm),
            Err(ExperimentError::BadCutoffs)
        ));
        assert!(matches!(
            alladi_partial_sums(&backend, &all, &id, &[3, 3], Weight::Norm),
            Err(ExperimentError::BadCutoffs)
        ));
        assert!(matches!(
            alladi_partial_sums(&backend, &all, &id, &[1, 99], Weight::Norm),
            Err(ExperimentError::CutoffOutOfRange { requested: 99, .. })
        ));
        let unnormalized = ArithFn::new("zero", SupportHint::All, false, |_, _| {
            Ok(BigRational::zero())
        });
        assert!(matches!(
            alladi_partial_sums(&backend, &all, &unnormalized, &[1], Weight::Norm),
            Err(ExperimentError::NotNormalized(_))
        ));
        assert!(matches!(
            convolution_arith_fn(&all, 0),
            Err(ExperimentError::ZeroAlpha)
        ));
    }

    #[test]
    fn phi_weighted_sum_matches_norm_weighted_limit_direction() {
        // Exactness smoke test: phi weighting stays exact and lands near the
        // same density target.
        let backend = f2(12);
        let set = PrimeSet::all();
        let plain = alladi_partial_sums(
            &backend,
            &set,
            &ArithFn::convolution_identity(),
            &[12],
            Weight::Norm,
        )
        .unwrap();
        let phi = alladi_partial_sums(
            &backend,
            &set,
            &ArithFn::convolution_identity(),
            &[12],
            Weight::Phi,
        )
        .unwrap();
        assert!(plain.rows[0].exact.is_some());
        assert!(phi.rows[0].exact.is_some());
        assert!((plain.final_value() - 1.0).abs() < 0.2);
        assert!((phi.final_value() - 1.0).abs() < 0.2);
    }

    #[test]
    fn b_transform_residual_is_zero_on_hand_inputs() {
        let backend = f2(6);
        let table = backend.table();
        let id = Element::identity(table);
        let a = ArithFn::convolution_identity();
        assert!(b_transform_residual(&backend, &a, &id).unwrap().is_zero());
        let mut x = None;
        backend.for_each_in_bucket(1, &mut |g| {
            if x.is_none() {
                x = Some(g.clone());
            }
        });
        assert!(b_transform_residual(&backend, &a, &x.unwrap())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn b_transform_fuzz_passes_on_both_rational_backends() {
        let poly = f2(6);
        let out = b_transform_fuzz(&poly, 6, 60, 7).unwrap();
        assert!(out.all_passed(), "{:?}", out.first_failure);
        let ints = IntBackend::new(200).unwrap();
        let out = b_transform_fuzz(&ints, 60, 60, 7).unwrap();
        assert!(out.all_passed(), "{:?}", out.first_failure);
    }

    #[test]
    fn duality_sweep_and_fuzz_find_no_violations() {
        let backend = f2(6);
        let sets = [
            PrimeSet::all(),
            PrimeSet::none(),
            backend
                .residue_class_prime_set(
                    &crate::poly::FqPoly::parse(backend.field(), "x").unwrap(),
                    &crate::poly::FqPoly::parse(backend.field(), "1").unwrap(),
                )
                .unwrap(),
        ];
        let weights = [
            DualityFn::linear(),
            DualityFn::indicator_above(1),
            DualityFn::reciprocal(0),
        ];
        let checked = duality_sweep(&backend, 6, &sets, &weights).unwrap();
        assert_eq!(checked, 9 * (2 + 4 + 8 + 16 + 32 + 64) as u64);
        let fuzz = duality_fuzz(&backend, 6, 500, 11).unwrap();
        assert!(fuzz.all_passed(), "{:?}", fuzz.first_failure);
    }

    #[test]
    fn equidistribution_rows_on_f2() {
        let backend = f2(10);
        let rows = equidistribution_check(&backend, &PrimeSet::all(), &[1, 2, 3, 8]).unwrap();
        // Degree 1: both linear elements have their maximal prime in the set.
        assert_eq!(rows[0].q_sum, 2);
        assert_eq!(rows[0].ratio, 1.0);
        assert_eq!(rows[0].closed_form_reference, Some(1.0));
        let empty = equidistribution_check(&backend, &PrimeSet::none(), &[1, 2, 3]).unwrap();
        for r in &empty {
            assert_eq!(r.q_sum, 0);
        }
    }

    #[test]
    fn statistics_match_hand_values() {
        let backend = f2(8);
        // Rough bound at or above the cutoff: only the identity qualifies.
        let s = partial_sum_statistics(&backend, 4, 4).unwrap();
        assert_eq!(s.top_signed, BigInt::zero());
        assert_eq!(s.signed, BigInt::one());
        assert_eq!(s.weighted, BigRational::one());
        assert_eq!(s.count, 1);
        // R(1, 0) = 1 - 1/2 - 1/2 = 0.
        let s = partial_sum_statistics(&backend, 1, 0).unwrap();
        assert!(s.weighted.is_zero());

        // Mertens function via the integer backend: M(100) = 1.
        let ints = IntBackend::new(200).unwrap();
        let s = partial_sum_statistics(&ints, 100, 1).unwrap();
        assert_eq!(s.signed, BigInt::one());
        assert_eq!(s.count, 100);
    }

    #[test]
    fn statistics_are_cumulative_in_the_cutoff() {
        let backend = f2(6);
        let mut total = BigInt::zero();
        for n in 0..=6 {
            let top = partial_sum_statistics(&backend, n, 1).unwrap().top_signed;
            total += top;
        }
        assert_eq!(
            total,
            partial_sum_statistics(&backend, 6, 1).unwrap().signed
        );
    }

    #[test]
    fn density_rows_track_known_densities() {
        let backend = f2(10);
        let rows = density_estimate(&backend, &PrimeSet::all(), 10);
        assert!(rows.iter().all(|r| r.ratio == 1.0));
        let rows = density_estimate(&backend, &PrimeSet::none(), 10);
        assert!(rows.iter().all(|r| r.ratio == 0.0));
        assert_eq!(target_density(&backend, &PrimeSet::all()), (1.0, true));
        let ad_hoc = PrimeSet::new("first id", None, |p| p.id.0 == 0);
        let (d, known) = target_density(&backend, &ad_hoc);
        assert!(!known);
        assert!(d > 0.0 && d < 0.01);
    }

    #[test]
    fn loglog_convention_and_summability() {
        assert_eq!(loglog(2.0), 0.0);
        assert_eq!(loglog(15.0), 0.0);
        assert!(loglog(16.0) > 0.0);
        let backend = f2(10);
        let a = convolution_arith_fn(&PrimeSet::all(), 1).unwrap();
        let partials = summability_partials(&backend, &a, 10).unwrap();
        // Increment decay: late increments smaller than early ones.
        let inc = |i: usize| partials[i] - partials[i - 1];
        assert!(inc(9) < inc(5));
    }

    #[test]
    fn bridge_between_plain_and_convolution_sums() {
        let backend = f2(12);
        let report = bridge_check(&backend, &PrimeSet::all(), &[4, 6, 8, 10, 12], 1).unwrap();
        assert!(report.difference < 0.05, "difference {}", report.difference);
    }

    #[test]
    fn csv_shape_and_determinism() {
        let backend = f2(8);
        let run = || {
            let report = alladi_partial_sums(
                &backend,
                &PrimeSet::all(),
                &ArithFn::convolution_identity(),
                &[2, 4, 6, 8],
                Weight::Norm,
            )
            .unwrap();
            let mut buf = Vec::new();
            report.write_csv(&mut buf, false).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(
            lines.next().unwrap(),
            "cutoff,sum_num,sum_den,sum_float,target,abs_error,seconds"
        );
        assert_eq!(a.lines().count(), 5);
        for line in lines {
            assert_eq!(line.matches(',').count(), 6);
            assert!(line.ends_with(','), "seconds column empty by default");
        }
    }

    #[test]
    fn int_backend_residue_run_heads_toward_density() {
        let ints = IntBackend::new(4000).unwrap();
        let set = ints.residue_prime_set(4, 1).unwrap();
        let report = alladi_partial_sums(
            &ints,
            &set,
            &ArithFn::convolution_identity(),
            &[100, 1000, 4000],
            Weight::Norm,
        )
        .unwrap();
        assert_eq!(report.target, 0.5);
        assert!(report.final_abs_error() < 0.2);
        // Exactness persists at these sizes.
        assert!(report.rows[0].exact.is_some());
    }
}
