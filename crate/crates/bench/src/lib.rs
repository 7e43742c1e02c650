//! Benchmark-only crate; the measurements live in the benches directory.
//!
//! - `svd`: full versus truncated factorization cost
//! - `allocators`: the four power allocators on the asymptotic profile
//! - `pipeline`: plan construction and single-trial simulation cost
