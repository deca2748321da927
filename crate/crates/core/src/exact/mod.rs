//! Exact tools for small instances: an exhaustive optimal solver used as an
//! oracle, and the mixed-integer quadratic model writer.

mod lp;
mod miqp;
mod oracle;

pub use lp::{format_coef, parse_lp, LpSense, ParsedConstraint, ParsedModel};
pub use miqp::{
    expected_census, export_miqp, Census, Constraint, ConstraintSense, ExportOptions, Family, MiqpModel, VarKind,
    Variable,
};
pub use oracle::{min_route_cost_exact, solve_bruteforce, OracleLimits, SubsetRoutes};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("time budget exhausted after {0} assignments")]
    TimeBudget(u64),
    #[error("no edge has a positive reward, the reward scale is undefined")]
    NoPositiveReward,
    #[error("i/o failure: {0}")]
    IoFailure(String),
    #[error("malformed model file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ExactError>;
