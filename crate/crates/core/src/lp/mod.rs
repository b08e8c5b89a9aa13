//! Budgeted allocation LPs, their quantile form and the prices derived from them.

mod builder;
mod plan;
mod quantile;
mod simplex;

pub use builder::{empirical_ladder, MultiItemInstance};
pub use plan::{plan_constants, PairPlan, PricingPlan};
pub use quantile::{
    aggregate, decompose_value, ladder_revenue, mirror_below_reserve, pair_ranges, threshold_vector,
    PairAggregate, PriceLadder, QuantileSolution,
};
pub use simplex::{LpProblem, LpRow, LpSolution, LpTag, PairVar, RowFamily, SlackReport};
