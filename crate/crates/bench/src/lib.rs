//! Shared fixtures for the benchmarks.

use solenoidal_core::bibundle::BibundleSpec;
use solenoidal_core::moebius::Mat2;
use solenoidal_core::SplitScalar;

pub fn alpha() -> SplitScalar {
    SplitScalar::from_ints(1, 3, 5, 2)
}

pub fn antidiagonal_spec(level: u32) -> BibundleSpec {
    BibundleSpec::build(2, &alpha(), &Mat2::antidiagonal(2), level).expect("valid fixture")
}
