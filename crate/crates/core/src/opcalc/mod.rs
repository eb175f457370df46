//! Symbolic operational calculus: expressions, `d/ds`, the operator matrix,
//! elimination of fractional powers and lowering to sampled signals.

pub mod expr;
pub mod frac;
pub mod lower;
pub mod matrix;
pub mod parse;
pub mod poly;

pub use expr::{Factor, OpExpr, SignalId, TermKey};
pub use frac::{dds_tagged, FracOpExpr, Tag};
pub use lower::{
    generate_equations, lower, lower_many, lower_product, lower_term, Bindings, Lowered,
};
pub use matrix::{build_p, eliminate, Elimination, OperatorMatrix};
pub use parse::{parse_laurent, parse_param_poly, parse_tag, LaurentPoly};
pub use poly::{rat, rat_int, rat_to_f64, Monomial, ParamPoly, ParamSymbol, Rational};
