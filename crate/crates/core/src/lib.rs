//! Ranking under implicit bias.
//!
//! Items carry latent utilities, but an evaluator only sees observed utilities,
//! shaded by a multiplicative bias factor for every group the item belongs to.
//! Prefix lower-bound constraints on group representation can recover most or
//! all of the latent utility lost to that bias. This crate provides:
//!
//! * [`model`]: items, groups, bias, discounts and utility evaluation;
//! * [`constraints`]: lower-bound matrices, including the proportional family
//!   and constraints derived from the latent-optimal ranking;
//! * [`solver`]: unconstrained, greedy constrained, and exhaustive rankings;
//! * [`stats`]: distributions and closed-form order statistics;
//! * [`experiments`]: the Monte Carlo comparisons;
//! * [`cli`]: the `fairrank` command-line tool.

// `!(x > 0.0)` style checks are kept on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constraints;
pub mod error;
pub mod experiments;
pub mod model;
pub mod solver;
pub mod stats;

pub use constraints::{check_feasibility, derived_constraints, satisfies, simple_constraints, ConstraintMatrix};
pub use error::{RankError, Result};
pub use model::{
    observed_utilities, prefix_group_counts, ranking_utility, validate_discount, BiasModel, DiscountVector,
    GroupLayout, Instance, Item, Ranking,
};
pub use solver::{rank_constrained, rank_constrained_bruteforce, rank_constrained_greedy, rank_unconstrained};
