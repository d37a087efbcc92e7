//! Shared fixtures for the pipeline benchmarks.

use num_complex::Complex64;

use lumpvol_core::poly::PolyTuple;

/// A fixed well-conditioned degree-1 tuple used across benchmarks.
pub fn bench_tuple() -> PolyTuple {
    let c = Complex64::new;
    PolyTuple::new(
        1,
        1,
        vec![vec![c(1.0, 0.0), c(0.3, -0.2)], vec![c(0.1, 0.15), c(0.8, 0.45)]],
    )
    .expect("valid tuple")
}
