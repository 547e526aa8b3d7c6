//! Exact fractional-part streams of `log_b a_n`, leading-digit tuple
//! statistics, Weyl exponential-sum probes, and difference-operator
//! classification for fast-growing arithmetic sequences.
//!
//! The crate is organized around one currency: [`fixed::FracValue`], an exact
//! 128-bit residue mod 1 representing `{log_b a_n}`. Generators produce
//! streams of these residues for sequence families like `a^n`, `a^{P(n)}`,
//! `n!`, `p(n)` and iterated products; statistics consume them to count
//! k-tuples of leading digits, measure deviation from the Benford product
//! law, evaluate Weyl sum magnitudes, and estimate how far independence of
//! consecutive leading digits persists.
//!
//! See the `examples/` directory for one runnable program per capability, and
//! the `localbenford` binary for the command-line interface.

pub mod error;
pub mod fixed;
pub mod generators;

pub use error::{Error, Result};
