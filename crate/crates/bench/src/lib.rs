//! Shared fixtures for the criterion benchmarks.

use brandt_core::{class_set, BrandtContext, ClassOptions};

/// (g, p) pairs small enough to rebuild inside a measurement loop.
pub const CLASS_CASES: &[(usize, i64)] = &[(1, 101), (2, 7), (2, 11), (2, 23), (3, 5), (3, 7)];

/// (g, p, n) triples for Brandt matrix construction from a warm class set.
pub const BRANDT_CASES: &[(usize, i64, i64)] = &[(1, 101, 2), (2, 11, 2), (2, 11, 3), (2, 23, 2), (3, 7, 2)];

pub fn context(g: usize, p: i64) -> BrandtContext {
    let set = class_set(g, p, &ClassOptions::default()).expect("bench fixture enumerates");
    BrandtContext::new(set).expect("bench fixture is mass-certified")
}
