//! Fixed inputs shared by the benchmarks.

use monolil_core::harness::{sample_density, DensityName, ExampleDensity};
use monolil_core::rng::stream_rng;
use monolil_core::SortedSample;

/// An Exp(1) sample of size `n` from a fixed stream.
pub fn exp1_sample(n: usize) -> SortedSample {
    let d = ExampleDensity::new(DensityName::Exp1);
    sample_density(&d, n, &mut stream_rng(12345, n as u64)).expect("n >= 1")
}
