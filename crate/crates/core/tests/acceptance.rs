//! The acceptance gate: one test per stated criterion, each printing a
//! single pass/fail line. Tolerances and ranges are pinned here and nowhere
//! else; these tests are the contract the library is built against.

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use alladi_core::backend::Backend;
use alladi_core::experiments::{
    alladi_partial_sums, b_transform_fuzz, convolution_arith_fn, duality_sweep,
    equidistribution_check, Weight,
};
use alladi_core::gaussian::GaussianBackend;
use alladi_core::graph::{
    enumerate_primitive_classes, ihara_zeta_reciprocal, ihara_zeta_series, prime_class_counts,
    radius_and_delta, Graph, GraphBackend,
};
use alladi_core::ints::IntBackend;
use alladi_core::poly::{FqPoly, PolyBackend};
use alladi_core::semigroup::{mobius, ArithFn, DualityFn, PrimeSet, SizeArg};
use alladi_core::series::{euler_transform, zeta_from_prime_counts, PowerSeries};

fn degree_weights() -> Vec<DualityFn> {
    vec![
        DualityFn::linear(),
        DualityFn::indicator_above(0),
        DualityFn::reciprocal(0),
    ]
}

fn norm_weights() -> Vec<DualityFn> {
    vec![
        DualityFn::new("f(k)=k-1", |at| match at {
            SizeArg::Finite(k) if k >= 1 => BigRational::from_integer(BigInt::from(k - 1)),
            _ => BigRational::zero(),
        }),
        DualityFn::indicator_above(1),
        DualityFn::reciprocal(1),
    ]
}

/// Prime counts per size, read off a backend's table, as a dense vector.
fn table_prime_counts(backend: &dyn Backend, max: u64) -> Vec<BigUint> {
    let mut counts = vec![BigUint::zero(); max as usize + 1];
    for p in backend.table().iter() {
        if p.size <= max {
            counts[p.size as usize] += 1u32;
        }
    }
    counts
}

/// Element count per bucket by exhaustive enumeration.
fn bucket_count(backend: &dyn Backend, key: u64) -> u64 {
    let mut n = 0;
    backend.for_each_in_bucket(key, &mut |_| n += 1);
    n
}

/// Brute-force Mobius sum over one bucket.
fn bucket_mobius_sum(backend: &dyn Backend, key: u64) -> BigInt {
    let mut acc = BigInt::zero();
    backend.for_each_in_bucket(key, &mut |g| acc += mobius(g));
    acc
}

#[test]
fn criterion_01_duality_identity_exact() {
    let started = Instant::now();
    let mut total = 0u64;

    // (a) Polynomials: F2 to degree 10, F3 to degree 6.
    let f2 = PolyBackend::new(2, 10).unwrap();
    let modulus = FqPoly::parse(f2.field(), "x^2+x+1").unwrap();
    let residue = FqPoly::parse(f2.field(), "1").unwrap();
    let f2_sets = [
        PrimeSet::all(),
        PrimeSet::none(),
        f2.residue_class_prime_set(&modulus, &residue).unwrap(),
    ];
    total += duality_sweep(&f2, 10, &f2_sets, &degree_weights()).unwrap();

    let f3 = PolyBackend::new(3, 6).unwrap();
    let modulus = FqPoly::parse(f3.field(), "x").unwrap();
    let residue = FqPoly::parse(f3.field(), "2").unwrap();
    let f3_sets = [
        PrimeSet::all(),
        PrimeSet::none(),
        f3.residue_class_prime_set(&modulus, &residue).unwrap(),
    ];
    total += duality_sweep(&f3, 6, &f3_sets, &degree_weights()).unwrap();

    // (b) Integers to 10^4 and Gaussian ideals of norm up to 10^4.
    let ints = IntBackend::new(10_000).unwrap();
    let int_sets = [
        PrimeSet::all(),
        PrimeSet::none(),
        ints.residue_prime_set(4, 1).unwrap(),
    ];
    total += duality_sweep(&ints, 10_000, &int_sets, &norm_weights()).unwrap();

    let gauss = GaussianBackend::new(10_000).unwrap();
    let gauss_sets = [
        PrimeSet::all(),
        PrimeSet::none(),
        gauss.split_type_prime_set(alladi_core::gaussian::IdealClass::Split),
    ];
    total += duality_sweep(&gauss, 10_000, &gauss_sets, &norm_weights()).unwrap();

    // (c) Path classes of K4 and C5 to length 8.
    for name in ["k4", "c5"] {
        let backend = GraphBackend::new(Graph::builtin(name).unwrap(), 8).unwrap();
        let ids: std::collections::BTreeSet<u32> = backend
            .table()
            .iter()
            .filter(|p| p.id.0 % 2 == 0)
            .map(|p| p.id.0)
            .collect();
        let sets = [
            PrimeSet::all(),
            PrimeSet::none(),
            PrimeSet::from_ids("even-id classes", ids),
        ];
        total += duality_sweep(&backend, 8, &sets, &degree_weights()).unwrap();
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "duality sweep took {elapsed:?}, budget is 2 minutes"
    );
    println!(
        "criterion 01 (duality identity): PASS - {total} triples, residual 0, {:.1}s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_02_zeta_reciprocal_matches_mobius_sums() {
    // F2 to degree 10 via the Euler-product zeta.
    let f2 = PolyBackend::new(2, 10).unwrap();
    let zeta = zeta_from_prime_counts(&table_prime_counts(&f2, 10), 10);
    let recip = zeta.reciprocal().unwrap();
    for n in 0..=10u64 {
        let brute = bucket_mobius_sum(&f2, n);
        assert_eq!(
            recip.coeff(n as usize),
            &BigRational::from_integer(brute.clone()),
            "F2 degree {n}"
        );
    }

    // K4 to degree 8 via the determinant form.
    let graph = Graph::builtin("k4").unwrap();
    let backend = GraphBackend::new(graph.clone(), 8).unwrap();
    let h = ihara_zeta_reciprocal(&graph).unwrap();
    for n in 0..=8usize {
        let coeff = h.get(n).cloned().unwrap_or_else(BigInt::zero);
        let brute = bucket_mobius_sum(&backend, n as u64);
        assert_eq!(coeff, brute, "K4 degree {n}");
    }
    println!("criterion 02 (zeta reciprocal vs Mobius sums): PASS - F2 n<=10, K4 n<=8, exact");
}

#[test]
fn criterion_03_euler_transform_round_trip() {
    let f2 = PolyBackend::new(2, 12).unwrap();
    let elements = euler_transform(&table_prime_counts(&f2, 12));
    for n in 0..=12u64 {
        assert_eq!(
            elements[n as usize],
            BigUint::from(bucket_count(&f2, n)),
            "F2 degree {n}"
        );
    }

    for name in ["k4", "c5"] {
        let graph = Graph::builtin(name).unwrap();
        let backend = GraphBackend::new(graph.clone(), 12).unwrap();
        let pi: Vec<BigUint> = prime_class_counts(&graph, 12)
            .unwrap()
            .into_iter()
            .map(BigUint::from)
            .collect();
        let elements = euler_transform(&pi);
        for n in 0..=12u64 {
            assert_eq!(
                elements[n as usize],
                BigUint::from(bucket_count(&backend, n)),
                "{name} degree {n}"
            );
        }
    }
    println!("criterion 03 (Euler transform round trip): PASS - F2, K4, C5 at n<=12, exact");
}

#[test]
fn criterion_04_graph_prime_counting_and_euler_product() {
    let named: Vec<Graph> = ["k4", "k5", "c5", "k33", "petersen"]
        .iter()
        .map(|n| Graph::builtin(n).unwrap())
        .collect();
    let loopy = Graph::parse("0 1\n0 1\n0 0").unwrap();
    let mut graphs = named;
    graphs.push(loopy);

    for graph in &graphs {
        // Exhaustive enumeration against Mobius-inverted walk counts.
        let counts = prime_class_counts(graph, 10).unwrap();
        let classes = enumerate_primitive_classes(graph, 10).unwrap();
        let mut by_len = vec![0u64; 11];
        for c in &classes {
            by_len[c.edges.len()] += 1;
        }
        assert_eq!(
            by_len,
            counts,
            "class counts, graph with {} vertices",
            graph.vertex_count()
        );

        // Determinant series against the truncated Euler product over the
        // enumerated classes.
        let series = ihara_zeta_series(graph, 12).unwrap();
        let mut product = PowerSeries::one(12);
        for class in enumerate_primitive_classes(graph, 12).unwrap() {
            let v = class.length() as usize;
            let mut factor = PowerSeries::zero(12);
            let mut k = 0;
            while k <= 12 {
                factor.set_coeff(k, BigRational::one());
                k += v;
            }
            product = product.mul(&factor);
        }
        for n in 0..=12usize {
            assert_eq!(
                series.coeff(n),
                product.coeff(n),
                "Euler product coefficient {n}"
            );
        }
    }
    println!(
        "criterion 04 (graph prime counting): PASS - 6 graphs, counts to 10, product to z^12, exact"
    );
}

#[test]
fn criterion_05_k4_radius_pinned() {
    let started = Instant::now();
    let report = radius_and_delta(&Graph::builtin("k4").unwrap()).unwrap();
    let elapsed = started.elapsed();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let tol = BigRational::new(BigInt::one(), BigInt::from(2u8).pow(50));
    let err = (&report.radius - &half).abs();
    assert!(err <= tol, "radius {} strays from 1/2", report.radius);
    assert!(elapsed.as_secs_f64() < 1.0, "radius took {elapsed:?}");
    println!(
        "criterion 05 (K4 radius): PASS - R = {} (exact: {}), {:.3}s",
        report.radius_f64,
        report.exact,
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_06_integer_partial_sums_converge() {
    let started = Instant::now();
    let backend = IntBackend::new(1_000_000).unwrap();
    let set = backend.residue_prime_set(4, 1).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let report = pool
        .install(|| {
            alladi_partial_sums(
                &backend,
                &set,
                &ArithFn::convolution_identity(),
                &[1_000, 10_000, 100_000, 1_000_000],
                Weight::Norm,
            )
        })
        .unwrap();
    let elapsed = started.elapsed();
    let err_final = (report.rows[3].value - 0.5).abs();
    let err_first = (report.rows[0].value - 0.5).abs();
    assert!(err_final < 0.05, "final error {err_final}");
    assert!(
        err_final < err_first,
        "error grew: {err_first} -> {err_final}"
    );
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "single-threaded run took {elapsed:?}, budget 5 minutes"
    );
    println!(
        "criterion 06 (integer convergence): PASS - S(1e6) = {:.4}, |err| = {:.4} < 0.05 and < {:.4}, {:.1}s",
        report.rows[3].value,
        err_final,
        err_first,
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_07_polynomial_partial_sums_converge() {
    let started = Instant::now();
    let backend = PolyBackend::new(2, 18).unwrap();
    let modulus = FqPoly::parse(backend.field(), "x^2+x+1").unwrap();
    let residue = FqPoly::parse(backend.field(), "1").unwrap();
    let set = backend.residue_class_prime_set(&modulus, &residue).unwrap();
    let report = alladi_partial_sums(
        &backend,
        &set,
        &ArithFn::convolution_identity(),
        &[8, 12, 18],
        Weight::Norm,
    )
    .unwrap();
    let elapsed = started.elapsed();
    let third = 1.0 / 3.0;
    assert_eq!(report.target, third);
    let err_8 = (report.rows[0].value - third).abs();
    let err_18 = (report.rows[2].value - third).abs();
    assert!(err_18 < err_8, "error did not shrink: {err_8} -> {err_18}");
    assert!(err_18 < 0.05, "final error {err_18}");
    assert!(
        elapsed.as_secs_f64() < 180.0,
        "run took {elapsed:?}, budget 3 minutes"
    );
    println!(
        "criterion 07 (polynomial convergence): PASS - S(18) = {:.4} vs 1/3, errors {:.4} -> {:.4}, {:.1}s",
        report.rows[2].value,
        err_8,
        err_18,
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_08_convolution_bridge() {
    // Integer run of criterion 6.
    let ints = IntBackend::new(1_000_000).unwrap();
    let set = ints.residue_prime_set(4, 1).unwrap();
    let cutoffs = [1_000u64, 10_000, 100_000, 1_000_000];
    let plain = alladi_partial_sums(
        &ints,
        &set,
        &ArithFn::convolution_identity(),
        &cutoffs,
        Weight::Norm,
    )
    .unwrap();
    let conv_fn = convolution_arith_fn(&set, 1).unwrap();
    let conv = alladi_partial_sums(&ints, &set, &conv_fn, &cutoffs, Weight::Norm).unwrap();
    let int_gap = (plain.final_value() - conv.final_value()).abs();
    assert!(int_gap < 0.02, "integer bridge gap {int_gap}");

    // Polynomial run of criterion 7.
    let poly = PolyBackend::new(2, 18).unwrap();
    let modulus = FqPoly::parse(poly.field(), "x^2+x+1").unwrap();
    let residue = FqPoly::parse(poly.field(), "1").unwrap();
    let pset = poly.residue_class_prime_set(&modulus, &residue).unwrap();
    let pcutoffs = [8u64, 12, 18];
    let pplain = alladi_partial_sums(
        &poly,
        &pset,
        &ArithFn::convolution_identity(),
        &pcutoffs,
        Weight::Norm,
    )
    .unwrap();
    let pconv_fn = convolution_arith_fn(&pset, 1).unwrap();
    let pconv = alladi_partial_sums(&poly, &pset, &pconv_fn, &pcutoffs, Weight::Norm).unwrap();
    let poly_gap = (pplain.final_value() - pconv.final_value()).abs();
    assert!(poly_gap < 0.02, "polynomial bridge gap {poly_gap}");

    println!(
        "criterion 08 (convolution bridge): PASS - gaps {:.5} (int), {:.5} (poly), both < 0.02",
        int_gap, poly_gap
    );
}

#[test]
fn criterion_09_phi_weighted_corollary() {
    // Exact transform identity on 10^3 randomized inputs per rational backend.
    let poly = PolyBackend::new(2, 8).unwrap();
    let out = b_transform_fuzz(&poly, 8, 1_000, 0xA11AD).unwrap();
    assert!(out.all_passed(), "poly: {:?}", out.first_failure);
    let ints = IntBackend::new(400).unwrap();
    let out = b_transform_fuzz(&ints, 400, 1_000, 0xA11AD).unwrap();
    assert!(out.all_passed(), "int: {:?}", out.first_failure);
    let gauss = GaussianBackend::new(300).unwrap();
    let out = b_transform_fuzz(&gauss, 300, 1_000, 0xA11AD).unwrap();
    assert!(out.all_passed(), "gaussian: {:?}", out.first_failure);

    // The phi-weighted integer run lands near the same density.
    let big = IntBackend::new(1_000_000).unwrap();
    let set = big.residue_prime_set(4, 1).unwrap();
    let report = alladi_partial_sums(
        &big,
        &set,
        &ArithFn::convolution_identity(),
        &[1_000_000],
        Weight::Phi,
    )
    .unwrap();
    let err = (report.final_value() - 0.5).abs();
    assert!(err < 0.05, "phi-weighted error {err}");
    println!(
        "criterion 09 (phi-weighted corollary): PASS - 3x1000 exact residuals 0, phi run err {:.4} < 0.05",
        err
    );
}

#[test]
fn criterion_10_equidistribution_trend() {
    let backend = PolyBackend::new(2, 14).unwrap();
    let keys: Vec<u64> = (6..=14).collect();
    let rows = equidistribution_check(&backend, &PrimeSet::all(), &keys).unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / mean;
    assert!(spread < 0.10, "relative spread {spread}");
    let fitted = rows[0].fitted_reference.expect("fit exists");
    let rel = (mean - fitted).abs() / fitted;
    assert!(rel < 0.10, "mean {mean} vs fitted reference {fitted}");
    println!(
        "criterion 10 (equidistribution trend): PASS - ratios mean {:.4}, spread {:.2}%, fitted {:.4}",
        mean,
        spread * 100.0,
        fitted
    );
}

#[test]
fn criterion_11_worker_count_determinism() {
    let backend = IntBackend::new(1_000_000).unwrap();
    let set = backend.residue_prime_set(4, 1).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let report = pool
            .install(|| {
                alladi_partial_sums(
                    &backend,
                    &set,
                    &ArithFn::convolution_identity(),
                    &[1_000, 10_000, 100_000, 1_000_000],
                    Weight::Norm,
                )
            })
            .unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf, false).unwrap();
        buf
    };
    let one = run(1);
    let eight = run(8);
    assert_eq!(one, eight, "CSV bytes differ between 1 and 8 workers");
    println!(
        "criterion 11 (worker determinism): PASS - {} CSV bytes identical across 1 and 8 workers",
        one.len()
    );
}
