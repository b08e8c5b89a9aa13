//! Auction mechanisms over single-parameter and budgeted multi-item bidders.
//!
//! Ties go to the lowest bidder index, then the lowest item index.

mod budget;
mod env;
mod lottery;
mod posted;
mod vcg;

use serde::{Deserialize, Serialize};

pub use budget::{myerson, myerson_single_item, two_mech_budget, TwoMechChoice, VirtualPrior};
pub use env::{EnvKind, Environment};
pub use lottery::{
    lottery_bidder_choice, lottery_mechanism, lottery_offer, selection_and_thresholds, LotteryMode, LotteryOffer,
    Purchase,
};
pub use posted::{posted_price_mechanism, posted_price_trace};
pub use vcg::{empirical_vcg_lazy, vcg, vcg_lazy, vcg_with_duplicates};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sale {
    pub bidder: usize,
    pub item: usize,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MechanismOutcome {
    /// Sorted indices of bidders that were served.
    pub winners: Vec<usize>,
    /// Payment of every bidder, zero for losers.
    pub payments: Vec<f64>,
    pub revenue: f64,
    /// Sum of the winners' true values.
    pub welfare: f64,
    /// Item-level trades, for multi-item mechanisms.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sales: Vec<Sale>,
}

impl MechanismOutcome {
    /// Single-parameter outcome; welfare and revenue are summed from the inputs.
    pub fn from_winners(winners: Vec<usize>, payments: Vec<f64>, values: &[f64]) -> Self {
        let welfare = winners.iter().map(|&i| values[i]).sum();
        let revenue = payments.iter().sum();
        Self {
            winners,
            payments,
            revenue,
            welfare,
            sales: Vec::new(),
        }
    }

    pub fn empty(bidders: usize) -> Self {
        Self {
            payments: vec![0.0; bidders],
            ..Self::default()
        }
    }
}
