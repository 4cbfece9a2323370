//! Z2-graded Grassmann algebras over small finite fields.
//!
//! The crate has five layers:
//! - [`field`]: GF(p^t) arithmetic for odd p, desk-scale sizes;
//! - [`grassmann`]: the truncated Grassmann algebra G_n, the four gradings,
//!   and support statistics;
//! - [`freealg`]: the free Z2-graded algebra on variables y_i, z_j with
//!   commutator expansion, substitution, and evaluation into G_n;
//! - [`canon`]: the normal-form machinery: SS-shaped terms, the SS total
//!   order, generator families, and the rewrite engines for the four ideal
//!   variants, selected at runtime through a strategy registry;
//! - [`checker`]: identity verification (exhaustive and randomized), scalar
//!   witness search, and the dominant-part witness builders.
//!
//! [`selftest`] packages the full verification suite used by the `grassid`
//! CLI and the acceptance tests.

pub mod field;
pub mod freealg;
pub mod grassmann;
pub mod parse;

pub use field::{FieldError, FieldParams, FieldScalar};
pub use freealg::{
    commutator, evaluate, substitute, ElementAssignment, FreeAlgError, FreePolynomial,
    PolyAssignment, Var, Word,
};
pub use grassmann::{
    blade_mul, BladeSupport, GradingSpec, GrassmannAlgebra, GrassmannElement, GrassmannError,
};
pub use parse::{parse_ast, parse_element, parse_polynomial, Ast, ParseError};

pub mod canon;
pub mod checker;
