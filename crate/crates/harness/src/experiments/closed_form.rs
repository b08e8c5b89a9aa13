//! Tight identities of the power-law priors, compared with their closed forms.

use alphasr::Dist64;
use anyhow::Result;

use super::reserve_floor;
use crate::config::ExperimentConfig;
use crate::report::Row;

const ALPHAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const TOL: f64 = 1e-6;

pub fn run(_cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for alpha in ALPHAS {
        let d = Dist64::falpha(alpha, 1.0)?;
        let tag = |name: &str| format!("{name}_alpha{alpha}");
        let r = d.reserve_price()?;
        let (i1, i2) = (d.survival_power_integral(1), d.survival_power_integral(2));
        rows.push(Row::close(tag("reserve"), r, 1.0, TOL));
        rows.push(Row::close(tag("reserve_sale_probability"), d.survival(r), reserve_floor(alpha), TOL));
        rows.push(Row::close(tag("square_ratio"), i2 / i1, alpha / (1.0 + alpha), TOL));
        rows.push(Row::close(tag("max_min_ratio"), (2.0 * i1 - i2) / i2, (2.0 + alpha) / alpha, TOL));
        let strong = (alpha / (2.0 - alpha)).powf(1.0 / (1.0 - alpha));
        rows.push(Row::close(tag("strong_virtual_mass"), d.strong_virtual_probability(alpha), strong, TOL));
        // The cut between weak and strong virtual values sits at twice the scale.
        rows.push(Row::close(tag("strong_virtual_cut"), d.virtual_valuation(2.0)? - alpha, 0.0, TOL));
        let welfare = d.revenue_at_price(r) / d.posted_price_welfare(0.0);
        rows.push(Row::close(tag("reserve_welfare_ratio"), welfare, reserve_floor(alpha), TOL));
    }
    Ok(rows)
}
