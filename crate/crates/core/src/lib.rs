//! Higher-order derivatives through truncated Taylor arithmetic and exact
//! Faà di Bruno combinatorics, numerical membership tests for the
//! completely / absolutely monotonic classes and their logarithmic
//! variants, and a closed-form classifier for `(1 + a/x)^(x + b)`.

pub mod bruno;
pub mod cli;
pub mod error;
pub mod expr;
pub mod falpha;
pub mod interval;
pub mod jets;
pub mod laplace;
pub mod mono;
pub mod real;

pub use error::{Error, Result};
pub use expr::{eval, make_f, parse, Binding, Expr};
pub use interval::Interval;
pub use jets::Jet;
pub use real::{Real, DEFAULT_PRECISION};
