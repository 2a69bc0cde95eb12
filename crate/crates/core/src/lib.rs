//! Finite-truncation operator theory on noncommutative domains `D_f`.
//!
//! A domain is fixed by a positive regular noncommutative polynomial
//! `f = Σ a_α X_α`. From it the crate builds the weighted Fock model
//! (`W_i`, `Λ_i`), Poisson and Cauchy kernels, reproducing kernels on the
//! scalar domain, Pick matrices, characteristic functions and curvature
//! invariants. Every identity that only holds in the infinite model is
//! checked on the interior degrees of a level-`m` truncation, and each
//! report carries the degree it used.
//!
//! ```
//! use ncdomain::symbol::{compute_b, FreeSymbol};
//! use ncdomain::words::Word;
//!
//! let f = FreeSymbol::new(2, [
//!     (Word::new([0]), 1.0),
//!     (Word::new([1]), 1.0),
//!     (Word::new([0, 1]), 1.0),
//! ]).unwrap();
//! let b = compute_b(&f, 2);
//! assert_eq!(b.get(&Word::new([0, 1])), 2.0);
//! ```

pub mod blockop;
pub mod charcurv;
pub mod error;
pub mod fock;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod par;
pub mod poisson;
pub mod symbol;
pub mod tuples;
pub mod words;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};

/// Default cap on the number of Fock basis vectors.
pub const DEFAULT_DIM_CAP: usize = 1 << 20;

/// Basis-size cap, overridable through `NCDOMAIN_DIM_CAP`.
pub fn dim_cap() -> usize {
    std::env::var("NCDOMAIN_DIM_CAP").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_DIM_CAP)
}
