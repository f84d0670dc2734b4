//! Primitive closed path classes of a finite graph as a degree-graded
//! semigroup. The primes are rotation classes of closed non-backtracking
//! tailless paths that are not proper powers; inverse classes are distinct.
//! Element degree is total path length; the norm is `R^(-degree)` where `R`
//! is the radius of convergence of the graph zeta function, so norms are
//! kept symbolic (coefficient vectors in powers of `R`) and evaluated
//! numerically only on report.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::backend::{for_each_element_of_degree, Backend};
use crate::numutil::ratio_to_f64;
use crate::semigroup::{Element, Grading, PrimeId, PrimeTable};
use crate::series::{PowerSeries, SeriesError};

/// Largest path-class length an enumeration will attempt.
pub const DEFAULT_CLASS_LENGTH_LIMIT: u32 = 14;

/// Largest vertex count the exact determinant expansion accepts.
pub const MAX_DETERMINANT_VERTICES: usize = 16;

/// Bisection stops when the bracket is narrower than `2^-RADIUS_PRECISION_BITS`.
pub const RADIUS_PRECISION_BITS: u64 = 60;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph has no edges")]
    Empty,
    #[error("graph is not connected")]
    Disconnected,
    #[error("vertex {0} has degree {1}, but every vertex needs degree >= 2")]
    DegreeTooSmall(u32, u64),
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    BadVertex(u32, u32, u32),
    #[error("cannot parse edge list line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unknown built-in graph {0:?} (try k4, k5, c5, k33, petersen)")]
    UnknownBuiltin(String),
    #[error("path length {requested} exceeds the limit {limit}")]
    LengthLimit { requested: u32, limit: u32 },
    #[error("{0} vertices exceed the determinant expansion limit {1}")]
    TooManyVertices(usize, usize),
    #[error("walk counts and class enumeration disagree at length {0}")]
    InconsistentCounts(u32),
    #[error("walk count at length {0} overflows the counting range")]
    CountOverflow(u32),
    #[error("no zeta pole found inside the spectral bracket")]
    BracketFailure,
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Core(#[from] crate::semigroup::CoreError),
}

/// A finite connected undirected multigraph with minimum degree 2. Loops and
/// parallel edges are allowed; a loop adds 2 to its vertex's degree and to
/// the adjacency diagonal. Each undirected edge `k` of `m` total yields the
/// oriented edges `k` and `k + m` (mutual inverses).
#[derive(Clone, Debug)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
    tails: Vec<u32>,
    heads: Vec<u32>,
    out_edges: Vec<Vec<u32>>,
    adjacency: Vec<Vec<u64>>,
    degrees: Vec<u64>,
}

impl Graph {
    pub fn new(vertex_count: usize, edges: Vec<(u32, u32)>) -> Result<Self, GraphError> {
        if edges.is_empty() || vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        for &(u, v) in &edges {
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(GraphError::BadVertex(u, v, vertex_count as u32));
            }
        }
        let m = edges.len();
        let mut tails = Vec::with_capacity(2 * m);
        let mut heads = Vec::with_capacity(2 * m);
        for &(u, v) in &edges {
            tails.push(u);
            heads.push(v);
        }
        for &(u, v) in &edges {
            tails.push(v);
            heads.push(u);
        }
        let mut adjacency = vec![vec![0u64; vertex_count]; vertex_count];
        for &(u, v) in &edges {
            if u == v {
                adjacency[u as usize][u as usize] += 2;
            } else {
                adjacency[u as usize][v as usize] += 1;
                adjacency[v as usize][u as usize] += 1;
            }
        }
        let degrees: Vec<u64> = adjacency.iter().map(|row| row.iter().sum()).collect();
        for (v, &d) in degrees.iter().enumerate() {
            if d < 2 {
                return Err(GraphError::DegreeTooSmall(v as u32, d));
            }
        }
        // Connectivity by breadth-first search over the adjacency matrix.
        let mut seen = vec![false; vertex_count];
        let mut queue = vec![0usize];
        seen[0] = true;
        while let Some(u) = queue.pop() {
            for v in 0..vertex_count {
                if adjacency[u][v] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(GraphError::Disconnected);
        }
        let mut out_edges = vec![Vec::new(); vertex_count];
        for (e, &t) in tails.iter().enumerate() {
            out_edges[t as usize].push(e as u32);
        }
        Ok(Self {
            vertex_count,
            edges,
            tails,
            heads,
            out_edges,
            adjacency,
            degrees,
        })
    }

    /// Parses a plain-text edge list: one `u v` pair per line, 0-based ids,
    /// repeated lines are parallel edges, `u u` is a loop. Blank lines and
    /// `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut max_vertex = 0u32;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse_one = |tok: Option<&str>| -> Result<u32, GraphError> {
                tok.ok_or(GraphError::Parse {
                    line: i + 1,
                    reason: "expected two vertex ids".to_string(),
                })?
                .parse()
                .map_err(|_| GraphError::Parse {
                    line: i + 1,
                    reason: "vertex ids must be nonnegative integers".to_string(),
                })
            };
            let u = parse_one(parts.next())?;
            let v = parse_one(parts.next())?;
            if parts.next().is_some() {
                return Err(GraphError::Parse {
                    line: i + 1,
                    reason: "expected exactly two vertex ids".to_string(),
                });
            }
            max_vertex = max_vertex.max(u).max(v);
            edges.push((u, v));
        }
        if edges.is_empty() {
            return Err(GraphError::Empty);
        }
        Self::new(max_vertex as usize + 1, edges)
    }

    pub fn builtin(name: &str) -> Result<Self, GraphError> {
        let complete = |n: u32| {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            Self::new(n as usize, edges)
        };
        match name {
            "k4" => complete(4),
            "k5" => complete(5),
            "c5" => Self::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]),
            "k33" => {
                let mut edges = Vec::new();
                for u in 0..3 {
                    for v in 3..6 {
                        edges.push((u, v));
                    }
                }
                Self::new(6, edges)
            }
            "petersen" => {
                let mut edges = vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)];
                for i in 0..5 {
                    edges.push((i, i + 5));
                }
                edges.extend([(5, 7), (7, 9), (9, 6), (6, 8), (8, 5)]);
                Self::new(10, edges)
            }
            other => Err(GraphError::UnknownBuiltin(other.to_string())),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn oriented_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn tail(&self, e: u32) -> u32 {
        self.tails[e as usize]
    }

    pub fn head(&self, e: u32) -> u32 {
        self.heads[e as usize]
    }

    pub fn inverse(&self, e: u32) -> u32 {
        let m = self.edges.len() as u32;
        if e < m {
            e + m
        } else {
            e - m
        }
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn adjacency(&self) -> &[Vec<u64>] {
        &self.adjacency
    }

    /// First Betti number `m - vertices + 1`.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() - self.vertex_count + 1
    }
}

/// Exact traces `N_m` of powers of the non-backtracking operator for
/// `m = 1..=horizon` (index 0 unused). `N_m` counts closed non-backtracking
/// tailless walks of length `m` with a marked starting edge.
pub fn closed_walk_counts(g: &Graph, horizon: u32) -> Vec<u128> {
    let n = g.oriented_count();
    let mut w = vec![vec![0u128; n]; n];
    for (e, row) in w.iter_mut().enumerate() {
        let e = e as u32;
        for &f in &g.out_edges[g.head(e) as usize] {
            if f != g.inverse(e) {
                row[f as usize] = 1;
            }
        }
    }
    let mut counts = vec![0u128; horizon as usize + 1];
    let mut power = w.clone();
    for m in 1..=horizon as usize {
        counts[m] = (0..n).map(|i| power[i][i]).sum();
        if m < horizon as usize {
            let mut next = vec![vec![0u128; n]; n];
            for i in 0..n {
                for (k, &pik) in power[i].iter().enumerate() {
                    if pik == 0 {
                        continue;
                    }
                    for (j, &wkj) in w[k].iter().enumerate() {
                        if wkj != 0 {
                            next[i][j] += pik;
                        }
                    }
                }
            }
            power = next;
        }
    }
    counts
}

/// Primitive class counts per length: `pi(v) = (1/v) sum over d | v of
/// mobius(v/d) N_d`, exact. Non-integral or negative intermediate values are
/// reported as internal inconsistencies.
pub fn prime_class_counts(g: &Graph, max_len: u32) -> Result<Vec<u64>, GraphError> {
    let walks = closed_walk_counts(g, max_len);
    let mut out = vec![0u64; max_len as usize + 1];
    for v in 1..=max_len as u64 {
        let mut sum: i128 = 0;
        for d in crate::numutil::small_divisors(v) {
            let n_d = i128::try_from(walks[(v / d) as usize])
                .map_err(|_| GraphError::CountOverflow(v as u32))?;
            sum += crate::numutil::int_mobius(d) as i128 * n_d;
        }
        if sum < 0 || sum % v as i128 != 0 {
            return Err(GraphError::InconsistentCounts(v as u32));
        }
        out[v as usize] =
            u64::try_from(sum / v as i128).map_err(|_| GraphError::CountOverflow(v as u32))?;
    }
    Ok(out)
}

/// A rotation class of a closed non-backtracking tailless path, stored by
/// its rotation-minimal oriented-edge sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathClass {
    pub edges: Vec<u32>,
    pub primitive: bool,
}

impl PathClass {
    pub fn length(&self) -> u32 {
        self.edges.len() as u32
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.edges.iter().map(|e| e.to_string()).collect();
        parts.join(".")
    }
}

fn is_rotation_minimal(seq: &[u32]) -> bool {
    let n = seq.len();
    for shift in 1..n {
        for i in 0..n {
            match seq[(shift + i) % n].cmp(&seq[i]) {
                Ordering::Less => return false,
                Ordering::Greater => break,
                Ordering::Equal => {}
            }
        }
    }
    true
}

fn is_primitive(seq: &[u32]) -> bool {
    let n = seq.len() as u64;
    for d in crate::numutil::small_divisors(n) {
        if d == n {
            continue;
        }
        let d = d as usize;
        if (0..seq.len()).all(|i| seq[i] == seq[i % d]) {
            return false;
        }
    }
    true
}

/// Exhaustively enumerates primitive classes of length `1..=max_len`,
/// returned sorted by (length, canonical sequence).
pub fn enumerate_primitive_classes(g: &Graph, max_len: u32) -> Result<Vec<PathClass>, GraphError> {
    if max_len > DEFAULT_CLASS_LENGTH_LIMIT {
        return Err(GraphError::LengthLimit {
            requested: max_len,
            limit: DEFAULT_CLASS_LENGTH_LIMIT,
        });
    }
    let mut out = Vec::new();
    let mut seq = Vec::with_capacity(max_len as usize);
    for start in 0..g.oriented_count() as u32 {
        seq.push(start);
        extend_walk(g, start, max_len as usize, &mut seq, &mut out);
        seq.pop();
    }
    out.sort_by(|a, b| (a.edges.len(), &a.edges).cmp(&(b.edges.len(), &b.edges)));
    Ok(out)
}

fn extend_walk(
    g: &Graph,
    start: u32,
    max_len: usize,
    seq: &mut Vec<u32>,
    out: &mut Vec<PathClass>,
) {
    let last = *seq.last().unwrap();
    // The walk closes here if it returns to the start vertex without
    // backtracking over the wrap-around (the "tailless" condition).
    if g.head(last) == g.tail(start)
        && last != g.inverse(start)
        && is_rotation_minimal(seq)
        && is_primitive(seq)
    {
        out.push(PathClass {
            edges: seq.clone(),
            primitive: true,
        });
    }
    if seq.len() == max_len {
        return;
    }
    for &next in &g.out_edges[g.head(last) as usize] {
        // The canonical rotation starts at the minimal edge id, so no edge
        // below the start can appear anywhere in the sequence.
        if next < start || next == g.inverse(last) {
            continue;
        }
        seq.push(next);
        extend_walk(g, start, max_len, seq, out);
        seq.pop();
    }
}

// ---- integer polynomial helpers (ascending coefficients) ----

fn ipoly_trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn ipoly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    ipoly_trim(out)
}

fn ipoly_add_assign(a: &mut Vec<BigInt>, b: &[BigInt], negate: bool) {
    if a.len() < b.len() {
        a.resize(b.len(), BigInt::zero());
    }
    for (i, cb) in b.iter().enumerate() {
        if negate {
            a[i] -= cb;
        } else {
            a[i] += cb;
        }
    }
}

/// Coefficients (ascending) of `(1-z^2)^(r-1) det(I - Az + Qz^2)`, the
/// reciprocal of the graph zeta function, by exact expansion of the
/// determinant of the polynomial matrix.
pub fn ihara_zeta_reciprocal(g: &Graph) -> Result<Vec<BigInt>, GraphError> {
    let l = g.vertex_count();
    if l > MAX_DETERMINANT_VERTICES {
        return Err(GraphError::TooManyVertices(l, MAX_DETERMINANT_VERTICES));
    }
    // entry[i][j] = delta - A[i][j] z + delta (deg_i - 1) z^2
    let entry = |i: usize, j: usize| -> Vec<BigInt> {
        let a = BigInt::from(g.adjacency[i][j]);
        if i == j {
            ipoly_trim(vec![BigInt::one(), -a, BigInt::from(g.degrees[i] - 1)])
        } else {
            ipoly_trim(vec![BigInt::zero(), -a])
        }
    };
    // dp[mask] = determinant of the submatrix on rows 0..popcount(mask) and
    // the columns in mask, filled in increasing mask order (every submask
    // precedes its supersets numerically).
    let mut dp: Vec<Vec<BigInt>> = vec![Vec::new(); 1 << l];
    dp[0] = vec![BigInt::one()];
    for mask in 1usize..(1 << l) {
        let row = mask.count_ones() as usize - 1;
        let mut acc: Vec<BigInt> = Vec::new();
        let mut sign_flip = (row % 2) == 1;
        for j in 0..l {
            if mask & (1 << j) == 0 {
                continue;
            }
            let e = entry(row, j);
            if !e.is_empty() {
                let term = ipoly_mul(&e, &dp[mask ^ (1 << j)]);
                // Laplace sign: (-1)^(row + column position inside mask).
                ipoly_add_assign(&mut acc, &term, sign_flip);
            }
            sign_flip = !sign_flip;
        }
        dp[mask] = ipoly_trim(acc);
    }
    let mut det = dp[(1 << l) - 1].clone();
    let one_minus_z2 = vec![BigInt::one(), BigInt::zero(), -BigInt::one()];
    for _ in 1..g.cycle_rank() {
        det = ipoly_mul(&det, &one_minus_z2);
    }
    Ok(det)
}

/// The graph zeta function as a power series to the given order: the exact
/// reciprocal of `ihara_zeta_reciprocal`.
pub fn ihara_zeta_series(g: &Graph, order: usize) -> Result<PowerSeries, GraphError> {
    let h = ihara_zeta_reciprocal(g)?;
    let mut coeffs = vec![BigRational::zero(); order + 1];
    for (i, c) in h.into_iter().enumerate().take(order + 1) {
        coeffs[i] = BigRational::from_integer(c);
    }
    Ok(PowerSeries::from_coeffs(coeffs).reciprocal()?)
}

// ---- rational polynomial helpers for root isolation ----

type QPoly = Vec<BigRational>;

fn qp_trim(mut p: QPoly) -> QPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn qp_eval(p: &QPoly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn qp_derivative(p: &QPoly) -> QPoly {
    if p.len() <= 1 {
        return Vec::new();
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

fn qp_divmod(num: &QPoly, den: &QPoly) -> (QPoly, QPoly) {
    assert!(!den.is_empty());
    if num.len() < den.len() {
        return (Vec::new(), num.clone());
    }
    let mut rem = num.clone();
    let dlead = den.last().unwrap().clone();
    let dn = den.len() - 1;
    let qn = rem.len() - den.len();
    let mut quo = vec![BigRational::zero(); qn + 1];
    for i in (0..=qn).rev() {
        let c = &rem[i + dn] / &dlead;
        if c.is_zero() {
            continue;
        }
        for (j, dc) in den.iter().enumerate() {
            let t = &c * dc;
            rem[i + j] -= t;
        }
        quo[i] = c;
    }
    rem.truncate(dn);
    (qp_trim(quo), qp_trim(rem))
}

/// Scale by the absolute leading coefficient: positive scaling preserves the
/// sign sequence a Sturm chain depends on and keeps coefficients bounded.
fn qp_lead_normalize(p: QPoly) -> QPoly {
    match p.last() {
        None => p,
        Some(lead) => {
            let scale = lead.abs();
            p.into_iter().map(|c| c / &scale).collect()
        }
    }
}

fn qp_gcd(a: &QPoly, b: &QPoly) -> QPoly {
    let mut a = qp_trim(a.clone());
    let mut b = qp_trim(b.clone());
    while !b.is_empty() {
        let (_, r) = qp_divmod(&a, &b);
        a = b;
        b = r;
    }
    // Normalize monic so exact division below is stable.
    match a.last().cloned() {
        None => a,
        Some(lead) => a.into_iter().map(|c| c / &lead).collect(),
    }
}

fn sturm_chain(p: &QPoly) -> Vec<QPoly> {
    let mut chain = vec![qp_lead_normalize(qp_trim(p.clone()))];
    let d = qp_derivative(&chain[0]);
    if !d.is_empty() {
        chain.push(qp_lead_normalize(d));
    }
    while chain.len() >= 2 {
        let (_, r) = qp_divmod(&chain[chain.len() - 2], &chain[chain.len() - 1]);
        if r.is_empty() {
            break;
        }
        let neg: QPoly = r.into_iter().map(|c| -c).collect();
        chain.push(qp_lead_normalize(neg));
    }
    chain
}

fn sign_variations(chain: &[QPoly], x: &BigRational) -> usize {
    let mut count = 0usize;
    let mut prev: Option<bool> = None; // sign as is_positive
    for p in chain {
        let v = qp_eval(p, x);
        if v.is_zero() {
            continue;
        }
        let s = v.is_positive();
        if let Some(ps) = prev {
            if ps != s {
                count += 1;
            }
        }
        prev = Some(s);
    }
    count
}

/// Everything the radius computation reports: the radius itself (exact when
/// it hits a rational root, otherwise a bracket midpoint), the length gcd,
/// and the spectral bounds that bracketed the search.
#[derive(Clone, Debug)]
pub struct RadiusReport {
    pub radius: BigRational,
    pub radius_f64: f64,
    pub exact: bool,
    pub width: BigRational,
    pub delta: u64,
    pub kotani_lower: BigRational,
    pub kotani_upper: BigRational,
}

/// Computes the radius of convergence of the graph zeta (the smallest
/// positive real root of its reciprocal polynomial, which exists by
/// positivity of the series coefficients) and the gcd of all prime class
/// lengths. The root is bracketed by the spectral bounds
/// `1/(max_degree - 1) <= R <= 1/(min_degree - 1)`; multiple roots are
/// handled by running a Sturm chain on the squarefree part.
pub fn radius_and_delta(g: &Graph) -> Result<RadiusReport, GraphError> {
    let h_int = ihara_zeta_reciprocal(g)?;
    let h: QPoly = h_int
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    let d_max = *g.degrees.iter().max().unwrap();
    let d_min = *g.degrees.iter().min().unwrap();
    let lower = BigRational::new(BigInt::one(), BigInt::from(d_max - 1));
    let upper = BigRational::new(BigInt::one(), BigInt::from(d_min - 1));

    // Delta: gcd of lengths with nonzero walk counts. A connected graph of
    // minimum degree 2 contains a cycle within vertex_count steps, so the
    // horizon always sees one.
    let horizon = (2 * g.vertex_count() as u32 + 2).max(2 * DEFAULT_CLASS_LENGTH_LIMIT + 2);
    let walks = closed_walk_counts(g, horizon);
    let mut delta = 0u64;
    for (m, &w) in walks.iter().enumerate().skip(1) {
        if w > 0 {
            delta = num_integer::gcd(delta, m as u64);
        }
    }
    assert!(delta > 0, "a valid graph has closed non-backtracking walks");

    let report = |radius: BigRational, exact: bool, width: BigRational| {
        let radius_f64 = ratio_to_f64(&radius);
        RadiusReport {
            radius,
            radius_f64,
            exact,
            width,
            delta,
            kotani_lower: lower.clone(),
            kotani_upper: upper.clone(),
        }
    };

    if qp_eval(&h, &lower).is_zero() {
        // No pole lies below the spectral lower bound, so this is R.
        return Ok(report(lower.clone(), true, BigRational::zero()));
    }
    if lower == upper {
        // Regular graph: the bracket pins R, and the line above ensures the
        // polynomial indeed vanishes there.
        return Err(GraphError::BracketFailure);
    }

    // Squarefree part, so every root is simple and Sturm counts apply.
    let derivative = qp_derivative(&h);
    let common = qp_gcd(&h, &derivative);
    let squarefree = if common.len() <= 1 {
        h.clone()
    } else {
        qp_divmod(&h, &common).0
    };
    let chain = sturm_chain(&squarefree);
    let roots_in = |a: &BigRational, b: &BigRational| -> usize {
        sign_variations(&chain, a) - sign_variations(&chain, b)
    };
    if roots_in(&lower, &upper) == 0 {
        return Err(GraphError::BracketFailure);
    }
    let precision = BigRational::new(
        BigInt::one(),
        BigInt::from(2u8).pow(RADIUS_PRECISION_BITS as u32),
    );
    let mut a = lower.clone();
    let mut b = upper.clone();
    let two = BigRational::from_integer(BigInt::from(2));
    while &b - &a > precision {
        let mid = (&a + &b) / &two;
        let left = roots_in(&a, &mid);
        if left > 0 {
            if left == 1 && qp_eval(&squarefree, &mid).is_zero() {
                // The single root on the left half sits exactly at mid.
                return Ok(report(mid, true, BigRational::zero()));
            }
            b = mid;
        } else {
            a = mid;
        }
    }
    let width = &b - &a;
    let mid = (&a + &b) / &two;
    Ok(report(mid, false, width))
}

/// The path-class semigroup of a graph, with primes enumerated up to a fixed
/// length.
pub struct GraphBackend {
    graph: Graph,
    table: PrimeTable,
    classes: Vec<PathClass>,
    radius: RadiusReport,
    max_len: u32,
}

impl GraphBackend {
    pub fn new(graph: Graph, max_len: u32) -> Result<Self, GraphError> {
        let classes = enumerate_primitive_classes(&graph, max_len)?;
        // Cross-check the enumeration against Mobius-inverted walk counts;
        // the two computations share no code.
        let counts = prime_class_counts(&graph, max_len)?;
        let mut by_len = vec![0u64; max_len as usize + 1];
        for c in &classes {
            by_len[c.edges.len()] += 1;
        }
        for v in 0..=max_len as usize {
            if by_len[v] != counts[v] {
                return Err(GraphError::InconsistentCounts(v as u32));
            }
        }
        let radius = radius_and_delta(&graph)?;
        let rows = classes
            .iter()
            .map(|c| (c.edges.len() as u64, None, c.label()))
            .collect();
        let table = PrimeTable::new(Grading::Degree, rows);
        Ok(Self {
            graph,
            table,
            classes,
            radius,
            max_len,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn class(&self, id: PrimeId) -> &PathClass {
        &self.classes[id.0 as usize]
    }

    pub fn classes(&self) -> &[PathClass] {
        &self.classes
    }

    pub fn radius(&self) -> &RadiusReport {
        &self.radius
    }

    pub fn delta(&self) -> u64 {
        self.radius.delta
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    /// Symbolic and numeric norm of a prime class: the exponent `v` with
    /// norm `R^(-v)`, and its evaluation at the computed radius.
    pub fn class_norm(&self, id: PrimeId) -> (u64, f64) {
        let v = self.table.prime(id).size;
        (v, self.radius.radius_f64.powi(-(v as i32)))
    }

    /// Same for a general element, whose exponent is its degree.
    pub fn element_norm_parts(&self, g: &Element) -> (u64, f64) {
        (g.size(), self.radius.radius_f64.powi(-(g.size() as i32)))
    }
}

impl Backend for GraphBackend {
    fn name(&self) -> String {
        "graph".to_string()
    }

    fn table(&self) -> &PrimeTable {
        &self.table
    }

    fn norm_unit_value(&self) -> Option<f64> {
        Some(self.radius.radius_f64)
    }

    fn for_each_in_bucket(&self, key: u64, visit: &mut dyn FnMut(&Element)) {
        for_each_element_of_degree(&self.table, key, visit);
    }

    fn bucket_limit(&self) -> u64 {
        self.max_len as u64
    }
}
