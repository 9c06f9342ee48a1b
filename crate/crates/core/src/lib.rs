//! BIBO stability analysis for linear time-invariant SISO systems whose
//! transfer functions are irrational, with branch points allowed on the
//! imaginary axis.
//!
//! The crate is `no_std` (it needs `alloc`). The pieces are:
//!
//! - [`expr`]: transfer-function expressions over `s` (parse, print, evaluate
//!   on the principal branch, differentiate).
//! - [`asymptotics`]: truncated generalized power series at a point, their
//!   algebra, singularity classification, the closed-loop map and the
//!   time-domain tail map.
//! - [`singularities`]: numeric expansion estimation, argument-principle
//!   counting, branch numbers and the large-`|s|` decay check.
//! - [`stability`]: open/closed-loop verdicts and integral tests on sampled
//!   impulse responses.
//! - [`nyquist`]: punctured-axis argument sweep and the generalized Nyquist
//!   verdict.
//! - [`laplace`]: Bromwich-line inversion used as an independent oracle.
//! - [`analysis`]: the end-to-end pipeline composed from the above.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod analysis;
pub mod asymptotics;
pub mod exponent;
pub mod expr;
pub mod laplace;
pub mod nyquist;
pub mod quad;
pub mod singularities;
pub mod stability;

mod util;

pub use num_complex::Complex64 as C64;

pub use asymptotics::{AsymExpansion, SingularityClass, Term, TimeTerm};
pub use exponent::Exponent;
pub use expr::TransferExpr;

#[cfg(feature = "std")]
mod std_errors {
    use crate::analysis::AnalysisError;
    use crate::asymptotics::AsymError;
    use crate::expr::{BuildError, EvalError, ParseError};
    use crate::laplace::InversionError;
    use crate::nyquist::NyquistError;
    use crate::singularities::{BranchError, CountError, EstimateError, WindingError};
    use crate::stability::{SignalError, StabilityError, TailFitError};

    impl std::error::Error for AnalysisError {}
    impl std::error::Error for AsymError {}
    impl std::error::Error for BranchError {}
    impl std::error::Error for BuildError {}
    impl std::error::Error for CountError {}
    impl std::error::Error for EstimateError {}
    impl std::error::Error for EvalError {}
    impl std::error::Error for InversionError {}
    impl std::error::Error for NyquistError {}
    impl std::error::Error for ParseError {}
    impl std::error::Error for SignalError {}
    impl std::error::Error for StabilityError {}
    impl std::error::Error for TailFitError {}
    impl std::error::Error for WindingError {}
}
