//! Exact rationals, sparse multivariate polynomials, polynomial matrices,
//! local Smith normal forms and formal 2-forms.

mod parse;
mod poly;
mod polymatrix;
mod qmatrix;
mod rational;
mod snf;
mod twoform;

use thiserror::Error;

pub use parse::{parse_poly, parse_poly_list};
pub use poly::{mono_degree, same_ctx, Ctx, Mono, Poly, VarContext};
pub use polymatrix::{signed_maximal_minors, PolyMatrix};
pub use qmatrix::QMat;
pub use rational::{
    format_rational, int, is_nonneg_integer, lcm_of_denominators, parse_rational, rat, to_i64, Rational,
};
pub use snf::{snf_dvr, SnfResult};
pub use twoform::{trace_d_wedge_d, OneForm, TwoForm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgError {
    #[error("unknown or mismatched variable: {0}")]
    VariableMismatch(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("series precision x^{truncation} exhausted before all invariant factors were found")]
    PrecisionExhausted { truncation: u32 },
    #[error("singular matrix")]
    Singular,
}
