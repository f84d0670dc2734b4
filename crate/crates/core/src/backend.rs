//! The backend abstraction: a semigroup whose elements can be streamed bucket
//! by bucket, where a bucket is one degree (degree grading) or one norm value
//! (norm grading). Bucket streams are deterministic, which makes every
//! downstream reduction reproducible.

use crate::semigroup::{Element, Grading, PrimeTable};

/// A concrete arithmetical semigroup.
pub trait Backend: Sync {
    fn name(&self) -> String;

    fn table(&self) -> &PrimeTable;

    fn grading(&self) -> Grading {
        self.table().grading()
    }

    /// For degree-graded backends with exact integer norms: the base `q`
    /// with `norm(g) = q^deg(g)`.
    fn norm_base(&self) -> Option<u64> {
        None
    }

    /// For degree-graded backends without rational norms: the numeric value
    /// `u` such that `norm(g) = u^-deg(g)` (a graph's radius of convergence).
    fn norm_unit_value(&self) -> Option<f64> {
        None
    }

    /// Closed-form growth constant `c` in `count ~ c * q^n` (degree grading)
    /// or `count ~ c * x` (norm grading), where one is known.
    fn known_growth_constant(&self) -> Option<f64> {
        None
    }

    /// Visit every element in the bucket in a fixed order. Buckets are
    /// degrees `0, 1, 2, ...` or norm values `1, 2, 3, ...`.
    fn for_each_in_bucket(&self, key: u64, visit: &mut dyn FnMut(&Element));

    /// Largest bucket key this backend can enumerate.
    fn bucket_limit(&self) -> u64;
}

/// Visit every element of exact degree `n` over a degree-graded table, as
/// multisets of primes. Elements are emitted in lexicographic order of their
/// factor sequence (by prime id, multiplicities ascending). Shared by the
/// polynomial and graph backends.
pub fn for_each_element_of_degree(table: &PrimeTable, n: u64, visit: &mut dyn FnMut(&Element)) {
    debug_assert_eq!(table.grading(), Grading::Degree);
    if n == 0 {
        visit(&Element::identity(table));
        return;
    }
    let mut stack: Vec<(crate::semigroup::PrimeId, u32)> = Vec::new();
    recurse(table, 0, n, &mut stack, visit);
}

fn recurse(
    table: &PrimeTable,
    first: usize,
    remaining: u64,
    stack: &mut Vec<(crate::semigroup::PrimeId, u32)>,
    visit: &mut dyn FnMut(&Element),
) {
    if remaining == 0 {
        let g = Element::from_factors(table, stack.iter().copied())
            .expect("stack is sorted with positive multiplicities");
        visit(&g);
        return;
    }
    for idx in first..table.len() {
        let p = table.prime(crate::semigroup::PrimeId(idx as u32));
        let d = p.size;
        if d > remaining {
            break; // table is size-sorted
        }
        let mut mult = 1u32;
        while (mult as u64) * d <= remaining {
            stack.push((p.id, mult));
            recurse(table, idx + 1, remaining - mult as u64 * d, stack, visit);
            stack.pop();
            mult += 1;
        }
    }
}
