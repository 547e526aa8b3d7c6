//! Exact fixed-point arithmetic on residues mod 1 and high-precision
//! logarithmic constants with explicit error budgets.

mod consts;
mod frac;
mod real;

pub use consts::{
    ln2, ln_base, ln_biguint, ln_biguint_truncated, ln_rational, log_const, pi, pow_rational,
};
pub use frac::{Frac192, FracValue, FRAC_BITS};
pub use real::{CertifiedOrdering, ErrBound, FixedReal};
