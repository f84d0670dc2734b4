//! Batch front-end for arithmetical semigroup experiments: configure a
//! backend, run partial-sum and duality computations, and emit CSV plus a
//! human-readable table.
//!
//! Exit codes: 0 on success, 1 when a mathematical contract is violated at
//! runtime, 2 on usage or configuration errors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use alladi_core::backend::Backend;
use alladi_core::experiments::{
    alladi_partial_sums, convolution_arith_fn, density_estimate, duality_fuzz,
    partial_sum_statistics, ExperimentError, Weight,
};
use alladi_core::gaussian::{GaussianBackend, IdealClass};
use alladi_core::graph::{
    ihara_zeta_reciprocal, prime_class_counts, radius_and_delta, Graph, GraphBackend,
};
use alladi_core::ints::IntBackend;
use alladi_core::poly::{FqPoly, PolyBackend};
use alladi_core::semigroup::{ArithFn, Element, Grading, PrimeId, PrimeSet};
use alladi_core::series::{euler_transform, reciprocal_coefficients, zeta_from_prime_counts};

/// A mathematical identity that must hold failed at runtime. Reported with
/// exit code 1, as opposed to configuration mistakes (exit code 2).
#[derive(Debug)]
struct ContractViolation(String);

impl fmt::Display for ContractViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ContractViolation {}

#[derive(Parser)]
#[command(
    name = "alladi",
    about = "Partial-sum and duality experiments over arithmetical semigroups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run partial sums of (mu * a)(g) / weight over distinguished elements.
    Run(CommonArgs),
    /// Check the duality identity on randomized (element, set, weight) triples.
    DualityFuzz(CommonArgs),
    /// Print prime counts, element counts, and zeta reciprocal coefficients.
    Zeta(CommonArgs),
    /// Estimate the density of a prime set against the full prime table.
    Density(CommonArgs),
    /// Print the four classical partial-sum statistics over rough elements.
    Stats(CommonArgs),
}

/// Every option of every subcommand. Unused options are ignored by the
/// subcommands that do not read them; all of them can also be supplied
/// through `--config` as `key=value` lines, with command-line flags winning.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Backend: poly | int | gaussian | graph.
    #[arg(long)]
    backend: Option<String>,
    /// Field size q for the poly backend (prime power, 2..=9).
    #[arg(long)]
    q: Option<u64>,
    /// Number field for the int backend: q (integers) | qi (Gaussian ideals).
    #[arg(long)]
    field: Option<String>,
    /// Built-in graph name: k4 | k5 | c5 | k33 | petersen.
    #[arg(long)]
    graph: Option<String>,
    /// Edge-list file for the graph backend, one "u v" pair per line.
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Prime set: all | none | mod:M,R | split:KIND | ids:1,2,5.
    #[arg(long)]
    set: Option<String>,
    /// Arithmetic function: identity | decay:ALPHA | file:PATH.
    #[arg(long)]
    arith: Option<String>,
    /// Denominator weight: norm | phi.
    #[arg(long)]
    weight: Option<String>,
    /// Largest cutoff; expands to 1..=N (degree grading) or powers of ten
    /// (norm grading). Accepts scientific shorthand like 1e6.
    #[arg(long)]
    cutoff: Option<String>,
    /// Explicit comma-separated cutoff list; overrides --cutoff.
    #[arg(long)]
    cutoffs: Option<String>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread count (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// RNG seed for the fuzz suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count for the fuzz suites.
    #[arg(long)]
    samples: Option<u64>,
    /// Truncation order for zeta tables.
    #[arg(long)]
    order: Option<u64>,
    /// Prime-size horizon for density estimates.
    #[arg(long)]
    horizon: Option<u64>,
    /// Roughness bound for stats: keep elements whose minimal prime size
    /// exceeds this.
    #[arg(long)]
    rough: Option<u64>,
    /// Include per-cutoff wall-clock seconds in the CSV.
    #[arg(long)]
    timings: bool,
    /// Plain-text key=value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Merged view of the configuration file and the command line.
struct Opts {
    map: HashMap<String, String>,
}

impl Opts {
    fn resolve(args: &CommonArgs) -> Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| anyhow!("config line {}: expected key=value", lineno + 1))?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        let mut set = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v);
            }
        };
        set("backend", args.backend.clone());
        set("q", args.q.map(|v| v.to_string()));
        set("field", args.field.clone());
        set("graph", args.graph.clone());
        set(
            "graph-file",
            args.graph_file.as_ref().map(|p| p.display().to_string()),
        );
        set("set", args.set.clone());
        set("arith", args.arith.clone());
        set("weight", args.weight.clone());
        set("cutoff", args.cutoff.clone());
        set("cutoffs", args.cutoffs.clone());
        set("out", args.out.as_ref().map(|p| p.display().to_string()));
        set("workers", args.workers.map(|v| v.to_string()));
        set("seed", args.seed.map(|v| v.to_string()));
        set("samples", args.samples.map(|v| v.to_string()));
        set("order", args.order.map(|v| v.to_string()));
        set("horizon", args.horizon.map(|v| v.to_string()));
        set("rough", args.rough.map(|v| v.to_string()));
        if args.timings {
            map.insert("timings".to_string(), "true".to_string());
        }
        Ok(Self { map })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn str_or(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    fn u64_opt(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|s| parse_count(s).with_context(|| format!("option {key}")))
            .transpose()
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.u64_opt(key)?.unwrap_or(default))
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|s| {
                s.parse::<usize>()
                    .with_context(|| format!("option {key}: not a count: {s}"))
            })
            .transpose()
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(other) => bail!("option {key}: expected true/false, got {other}"),
        }
    }
}

/// Parse a count that may use scientific shorthand ("1e6") or separators
/// ("1_000_000").
fn parse_count(s: &str) -> Result<u64> {
    let cleaned = s.replace('_', "");
    if let Some((mantissa, exponent)) = cleaned.split_once(['e', 'E']) {
        let m: u64 = mantissa.parse().context("mantissa")?;
        let e: u32 = exponent.parse().context("exponent")?;
        return m
            .checked_mul(
                10u64
                    .checked_pow(e)
                    .ok_or_else(|| anyhow!("exponent overflow"))?,
            )
            .ok_or_else(|| anyhow!("count overflow: {s}"));
    }
    cleaned.parse().with_context(|| format!("not a count: {s}"))
}

enum AnyBackend {
    Poly(PolyBackend),
    Int(IntBackend),
    Gauss(GaussianBackend),
    Graph(GraphBackend),
}

impl AnyBackend {
    fn backend(&self) -> &dyn Backend {
        match self {
            AnyBackend::Poly(b) => b,
            AnyBackend::Int(b) => b,
            AnyBackend::Gauss(b) => b,
            AnyBackend::Graph(b) => b,
        }
    }
}

fn load_graph(opts: &Opts) -> Result<Graph> {
    match (opts.get("graph"), opts.get("graph-file")) {
        (Some(name), None) => Ok(Graph::builtin(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            Ok(Graph::parse(&text)?)
        }
        (Some(_), Some(_)) => bail!("give either --graph or --graph-file, not both"),
        (None, None) => bail!("the graph backend needs --graph NAME or --graph-file PATH"),
    }
}

/// Construct the backend sized to enumerate buckets up to `max_bucket`.
fn build_backend(opts: &Opts, max_bucket: u64) -> Result<AnyBackend> {
    let kind = opts.str_or("backend", "");
    match kind.as_str() {
        "poly" => {
            let q = opts.u64_or("q", 2)?;
            let degree = u32::try_from(max_bucket).context("cutoff out of range")?;
            Ok(AnyBackend::Poly(PolyBackend::new(q, degree)?))
        }
        "int" => match opts.str_or("field", "q").as_str() {
            "q" => Ok(AnyBackend::Int(IntBackend::new(max_bucket)?)),
            "qi" => Ok(AnyBackend::Gauss(GaussianBackend::new(max_bucket)?)),
            other => bail!("unknown field {other}; expected q or qi"),
        },
        "gaussian" => Ok(AnyBackend::Gauss(GaussianBackend::new(max_bucket)?)),
        "graph" => {
            let graph = load_graph(opts)?;
            let len = u32::try_from(max_bucket).context("cutoff out of range")?;
            Ok(AnyBackend::Graph(GraphBackend::new(graph, len)?))
        }
        "" => bail!("--backend is required (poly | int | gaussian | graph)"),
        other => bail!("unknown backend {other}; expected poly, int, gaussian, or graph"),
    }
}

fn build_prime_set(spec: &str, backend: &AnyBackend) -> Result<PrimeSet> {
    if spec == "all" {
        return Ok(PrimeSet::all());
    }
    if spec == "none" {
        return Ok(PrimeSet::none());
    }
    if let Some(rest) = spec.strip_prefix("mod:") {
        let (modulus, residue) = rest
            .split_once(',')
            .ok_or_else(|| anyhow!("mod set needs MODULUS,RESIDUE"))?;
        return match backend {
            AnyBackend::Poly(b) => {
                let m = FqPoly::parse(b.field(), modulus)?;
                let r = FqPoly::parse(b.field(), residue)?;
                Ok(b.residue_class_prime_set(&m, &r)?)
            }
            AnyBackend::Int(b) => {
                let k = parse_count(modulus)?;
                let l = parse_count(residue)?;
                Ok(b.residue_prime_set(k, l)?)
            }
            _ => bail!("mod sets exist for the poly and int backends"),
        };
    }
    if let Some(kind) = spec.strip_prefix("split:") {
        let AnyBackend::Gauss(b) = backend else {
            bail!("split sets exist for the Gaussian backend");
        };
        let class = match kind {
            "split" => IdealClass::Split,
            "inert" => IdealClass::Inert,
            "ramified" => IdealClass::Ramified,
            "split1mod8" => IdealClass::SplitAboveOneMod8,
            other => bail!("unknown split kind {other}"),
        };
        return Ok(b.split_type_prime_set(class));
    }
    if let Some(list) = spec.strip_prefix("ids:") {
        let ids: BTreeSet<u32> = list
            .split(',')
            .map(|t| t.trim().parse::<u32>().context("prime id"))
            .collect::<Result<_>>()?;
        return Ok(PrimeSet::from_ids(format!("ids {list}"), ids));
    }
    bail!("unknown prime set {spec}; expected all, none, mod:..., split:..., or ids:...")
}

/// Parse `e` or a product of table prime ids like `3^2*7`.
fn parse_element(backend: &dyn Backend, token: &str) -> Result<Element> {
    let table = backend.table();
    if token == "e" {
        return Ok(Element::identity(table));
    }
    let mut factors: BTreeMap<PrimeId, u32> = BTreeMap::new();
    for part in token.split('*') {
        let (id, mult) = match part.split_once('^') {
            Some((id, m)) => (id, m.parse::<u32>().context("multiplicity")?),
            None => (part, 1),
        };
        let id: u32 = id
            .trim()
            .parse()
            .with_context(|| format!("prime id in {token}"))?;
        *factors.entry(PrimeId(id)).or_insert(0) += mult;
    }
    Ok(Element::from_factors(table, factors)?)
}

fn parse_rational(token: &str) -> Result<BigRational> {
    let (num, den) = match token.split_once('/') {
        Some((n, d)) => (n, d),
        None => (token, "1"),
    };
    let num: BigInt = num
        .parse()
        .with_context(|| format!("numerator in {token}"))?;
    let den: BigInt = den
        .parse()
        .with_context(|| format!("denominator in {token}"))?;
    Ok(BigRational::new(num, den))
}

/// Arithmetic functions: the convolution identity, the power-decay family
/// supported on distinguished elements, or a finite table from a file whose
/// lines read `ELEMENT VALUE` with elements written as prime-id products.
fn build_arith(spec: &str, backend: &AnyBackend, set: &PrimeSet) -> Result<ArithFn> {
    if spec == "identity" {
        return Ok(ArithFn::convolution_identity());
    }
    if let Some(alpha) = spec.strip_prefix("decay:") {
        let alpha: u32 = alpha.parse().context("decay exponent")?;
        return Ok(convolution_arith_fn(set, alpha)?);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let mut map = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(elt), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                bail!("{path}:{}: expected ELEMENT VALUE", lineno + 1);
            };
            let g = parse_element(backend.backend(), elt)
                .with_context(|| format!("{path}:{}", lineno + 1))?;
            map.insert(g, parse_rational(value)?);
        }
        let identity = Element::identity(backend.backend().table());
        match map.get(&identity) {
            None => {
                map.insert(identity, BigRational::one());
            }
            Some(v) if v.is_one() => {}
            Some(v) => bail!("{path}: the identity must carry value 1, found {v}"),
        }
        return Ok(ArithFn::from_table(format!("table from {path}"), map, true));
    }
    bail!("unknown arithmetic function {spec}; expected identity, decay:ALPHA, or file:PATH")
}

fn build_weight(opts: &Opts) -> Result<Weight> {
    match opts.str_or("weight", "norm").as_str() {
        "norm" => Ok(Weight::Norm),
        "phi" => Ok(Weight::Phi),
        other => bail!("unknown weight {other}; expected norm or phi"),
    }
}

/// The cutoff ladder: an explicit list wins; a single cutoff expands to
/// 1..=N under degree grading and to powers of ten under norm grading.
fn build_cutoffs(opts: &Opts, grading: Grading, default_max: u64) -> Result<Vec<u64>> {
    if let Some(list) = opts.get("cutoffs") {
        let cutoffs: Vec<u64> = list
            .split(',')
            .map(|t| parse_count(t.trim()))
            .collect::<Result<_>>()?;
        if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            bail!("--cutoffs must be strictly increasing");
        }
        return Ok(cutoffs);
    }
    let max = opts.u64_or("cutoff", default_max)?;
    match grading {
        Grading::Degree => {
            if max == 0 {
                bail!("--cutoff must be positive");
            }
            Ok((1..=max).collect())
        }
        Grading::Norm => {
            let mut out = Vec::new();
            let mut decade = 10u64;
            while decade < max {
                out.push(decade);
                match decade.checked_mul(10) {
                    Some(next) => decade = next,
                    None => break,
                }
            }
            if out.last() != Some(&max) {
                out.push(max);
            }
            Ok(out)
        }
    }
}

/// Grading implied by the backend choice, known before construction so the
/// cutoff shorthand can be expanded first.
fn implied_grading(opts: &Opts) -> Result<Grading> {
    match opts.str_or("backend", "").as_str() {
        "poly" | "graph" => Ok(Grading::Degree),
        "int" | "gaussian" => Ok(Grading::Norm),
        "" => bail!("--backend is required (poly | int | gaussian | graph)"),
        other => bail!("unknown backend {other}; expected poly, int, gaussian, or graph"),
    }
}

fn default_max(grading: Grading) -> u64 {
    match grading {
        Grading::Degree => 12,
        Grading::Norm => 10_000,
    }
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building worker pool")?;
            Ok(pool.install(f))
        }
    }
}

/// Duality breakdowns are broken mathematics, not broken configuration.
fn classify(e: ExperimentError) -> anyhow::Error {
    match e {
        ExperimentError::DualityViolation { .. } => {
            anyhow::Error::new(ContractViolation(e.to_string()))
        }
        other => anyhow::Error::new(other),
    }
}

fn cmd_run(opts: &Opts) -> Result<()> {
    let grading = implied_grading(opts)?;
    let cutoffs = build_cutoffs(opts, grading, default_max(grading))?;
    let max_bucket = *cutoffs.last().expect("nonempty cutoffs");
    let weight = build_weight(opts)?;
    let workers = opts.usize_opt("workers")?;
    let timings = opts.bool_or("timings", false)?;
    let out = opts.get("out").map(PathBuf::from);

    let backend = build_backend(opts, max_bucket)?;
    let set = build_prime_set(&opts.str_or("set", "all"), &backend)?;
    let arith = build_arith(&opts.str_or("arith", "identity"), &backend, &set)?;

    let report = with_pool(workers, || {
        alladi_partial_sums(backend.backend(), &set, &arith, &cutoffs, weight)
    })?
    .map_err(classify)?;

    println!(
        "backend {}   set {}   arith {}   weight {}",
        report.backend, report.set, report.arith, report.weight
    );
    if report.target_known {
        println!("target density {:.6}", report.target);
    } else {
        println!(
            "target density {:.6} (estimated from the prime table)",
            report.target
        );
    }
    println!("{:>12} {:>16} {:>12}", "cutoff", "partial sum", "abs error");
    for row in &report.rows {
        println!(
            "{:>12} {:>16.8} {:>12.2e}",
            row.cutoff, row.value, row.abs_error
        );
    }

    let mut csv = Vec::new();
    report.write_csv(&mut csv, timings)?;
    match out {
        Some(path) => {
            fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            println!("csv written to {}", path.display());
        }
        None => {
            println!();
            print!("{}", String::from_utf8_lossy(&csv));
        }
    }
    Ok(())
}

fn cmd_duality_fuzz(opts: &Opts) -> Result<()> {
    let grading = implied_grading(opts)?;
    let default = match grading {
        Grading::Degree => 8,
        Grading::Norm => 2_000,
    };
    let max_bucket = opts.u64_or("cutoff", default)?;
    let samples = opts.u64_or("samples", 10_000)?;
    let seed = opts.u64_or("seed", 0)?;
    let backend = build_backend(opts, max_bucket)?;

    let outcome = duality_fuzz(backend.backend(), max_bucket, samples, seed).map_err(classify)?;
    if outcome.all_passed() {
        println!(
            "{} triples on {} (buckets to {max_bucket}, seed {seed}): max |residual| = 0",
            outcome.samples,
            backend.backend().name()
        );
        Ok(())
    } else {
        Err(anyhow::Error::new(ContractViolation(format!(
            "{} of {} triples violated duality; first: {}",
            outcome.failures,
            outcome.samples,
            outcome.first_failure.unwrap_or_default()
        ))))
    }
}

fn cmd_zeta(opts: &Opts) -> Result<()> {
    let grading = implied_grading(opts)?;
    if grading != Grading::Degree {
        bail!("zeta tables are degree-graded; use the poly or graph backend");
    }
    let order = opts.u64_or("order", 12)?;
    let backend = build_backend(opts, order)?;
    let order = order as usize;

    let (prime_counts, header): (Vec<u64>, &str) = match &backend {
        AnyBackend::Poly(b) => (b.prime_counts(), "irreducibles"),
        AnyBackend::Graph(b) => (
            prime_class_counts(b.graph(), order as u32)?,
            "prime classes",
        ),
        _ => unreachable!("degree grading implies poly or graph"),
    };
    let big: Vec<num_bigint::BigUint> = prime_counts
        .iter()
        .map(|&c| num_bigint::BigUint::from(c))
        .collect();
    let elements = euler_transform(&big);
    let zeta = zeta_from_prime_counts(&big, order);
    let recip = reciprocal_coefficients(&zeta)?;

    println!(
        "{:>4} {:>14} {:>16} {:>16}",
        "n", header, "elements", "mu coefficient"
    );
    for n in 0..=order {
        println!(
            "{:>4} {:>14} {:>16} {:>16}",
            n,
            prime_counts.get(n).copied().unwrap_or(0),
            elements[n],
            recip.coeff(n)
        );
    }

    if let AnyBackend::Graph(b) = &backend {
        let report = radius_and_delta(b.graph())?;
        let h = ihara_zeta_reciprocal(b.graph())?;
        let poly: Vec<String> = h.iter().map(|c| c.to_string()).collect();
        println!();
        println!("zeta reciprocal coefficients: [{}]", poly.join(", "));
        println!(
            "radius of convergence R = {:.12}{}",
            report.radius_f64,
            if report.exact { " (exact)" } else { "" }
        );
        println!("length gcd delta = {}", report.delta);
        println!(
            "bracket from degree extremes: [{:.6}, {:.6}]",
            alladi_core::numutil::ratio_to_f64(&report.kotani_lower),
            alladi_core::numutil::ratio_to_f64(&report.kotani_upper)
        );
    }
    Ok(())
}

fn cmd_density(opts: &Opts) -> Result<()> {
    let grading = implied_grading(opts)?;
    let horizon = opts.u64_or("horizon", default_max(grading))?;
    let backend = build_backend(opts, horizon)?;
    let set = build_prime_set(&opts.str_or("set", "all"), &backend)?;
    let rows = density_estimate(backend.backend(), &set, horizon);
    println!("set {}", set.description);
    if let Some(d) = &set.known_density {
        println!(
            "known density {} = {:.6}",
            d,
            alladi_core::numutil::ratio_to_f64(d)
        );
    }
    println!(
        "{:>12} {:>12} {:>12} {:>10}",
        "size", "primes", "in set", "ratio"
    );
    for row in rows {
        println!(
            "{:>12} {:>12} {:>12} {:>10.6}",
            row.cutoff, row.primes_total, row.primes_in_set, row.ratio
        );
    }
    Ok(())
}

fn cmd_stats(opts: &Opts) -> Result<()> {
    let grading = implied_grading(opts)?;
    if opts.str_or("backend", "") == "graph" {
        bail!("stats needs exact norms; the graph backend has irrational ones");
    }
    let identity_size = match grading {
        Grading::Degree => 0,
        Grading::Norm => 1,
    };
    let cutoff = opts.u64_or("cutoff", default_max(grading))?;
    let rough = opts.u64_or("rough", identity_size)?;
    let backend = build_backend(opts, cutoff)?;
    let stats = partial_sum_statistics(backend.backend(), cutoff, rough).map_err(classify)?;
    println!("cutoff {cutoff}, rough bound {rough} (elements whose minimal prime size exceeds it)");
    println!("C (signed count at the cutoff size) = {}", stats.top_signed);
    println!("M (signed count up to the cutoff)   = {}", stats.signed);
    println!(
        "R (mu/norm sum up to the cutoff)    = {} = {:.8}",
        stats.weighted,
        alladi_core::numutil::ratio_to_f64(&stats.weighted)
    );
    println!("Phi (rough element count)           = {}", stats.count);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(&Opts::resolve(&args)?),
        Command::DualityFuzz(args) => cmd_duality_fuzz(&Opts::resolve(&args)?),
        Command::Zeta(args) => cmd_zeta(&Opts::resolve(&args)?),
        Command::Density(args) => cmd_density(&Opts::resolve(&args)?),
        Command::Stats(args) => cmd_stats(&Opts::resolve(&args)?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<ContractViolation>().is_some() {
                eprintln!("contract violation: {e:#}");
                ExitCode::from(1)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        }
    }
}
