//! Approximation of analytic sets with proper projection by algebraic families.
//!
//! The pipeline: implicitize a holomorphic coefficient map ([`variety`]),
//! build approximants that stay in its Zariski closure, solve the fibers of
//! the resulting systems ([`fibers`]) and check local uniform and chain
//! convergence ([`convergence`]). [`experiment`] ties the stages to JSON
//! configs and reports.

// `!(x <= tol)` is used on purpose: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod experiment;
pub mod expr;
pub mod fibers;
pub mod numfmt;
pub mod poly;
pub mod variety;
