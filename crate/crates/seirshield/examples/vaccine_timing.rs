//! Earlier vaccine arrival shrinks the cost of holding mortality at the
//! 0.2% cap: compare 1.5 years, 1 year and 6 months under blanket
//! shielding.
//!
//! ```bash
//! cargo run --example vaccine_timing
//! ```

use seirshield::model::germany_baseline;
use seirshield::policy::{safety_policy, PolicyFamily, SearchConfig};
use seirshield::scenario::{apply_scenario, ScenarioSpec, Transform};

fn main() -> anyhow::Result<()> {
    let base = germany_baseline();
    let cfg = SearchConfig {
        population: Some(16),
        generations: 40,
        seed: 5,
        ..SearchConfig::default()
    };

    println!(
        "{:<18} {:>12} {:>14}",
        "vaccine after", "mortality", "loss (% GDP)"
    );
    for days in [546.0, 364.0, 182.0] {
        let spec = ScenarioSpec::new(vec![Transform::VaccineAt { days }]);
        let params = apply_scenario(&base, &spec)?;
        let point = safety_policy(PolicyFamily::Uniform, &params, 0.002, &cfg)?;
        println!(
            "{:<18} {:>11.4}% {:>13.2}%",
            format!("{days} days"),
            100.0 * point.mortality,
            point.econ_loss_pct_gdp
        );
    }
    Ok(())
}
