//! Fractional-noise optimization laboratory core.
//!
//! Exact fractional Gaussian noise samplers (Cholesky and circulant
//! embedding), an Euler–Maruyama fractional Ornstein–Uhlenbeck simulator,
//! test landscapes with analytic gradients, the fPGD optimizer family and
//! Monte-Carlo statistics (expected suprema, `1/√H` scaling fits, hitting
//! times, box-counting dimension).
//!
//! The crate is `no_std` + `alloc`. The `std` feature (on by default) adds
//! the FFT-backed circulant sampler.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod fou;
pub mod linalg;
pub mod math;
pub mod noise;
pub mod objectives;
pub mod optim;
pub mod quad;
pub mod seed;

pub use error::{Error, Result};
pub use noise::{FbmPath, FgnMethod, FgnSequence, HurstParameter};
pub use seed::SeedStream;
