//! Special functions, quadrature, dense symmetric eigenproblems and
//! multi-index combinatorics.

pub mod gamma;
pub mod linalg;
pub mod multiindex;
pub mod quadrature;

pub use gamma::{ln_beta, ln_factorial, ln_gamma};
pub use linalg::{cluster, eigh, Eigen, SymmetricMatrix};
pub use multiindex::{binomial, enumerate_multiindices, MultiIndex};
pub use quadrature::{make_rule, QuadratureRule, RuleKind};
