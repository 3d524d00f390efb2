//! Trace small efficient frontiers for blanket vs age-targeted shielding
//! and print them side by side. Uses a reduced search budget so it runs
//! in about a minute; pass `--release`-grade budgets through the CLI for
//! production sweeps.
//!
//! ```bash
//! cargo run --example frontier_families
//! ```

use seirshield::model::germany_baseline;
use seirshield::policy::{
    default_chi_grid, pareto_filter, sweep_chi, sweep_chi_with_seeds, PolicyFamily, PolicySchedule,
    SearchConfig,
};

fn main() -> anyhow::Result<()> {
    let params = germany_baseline();
    let cfg = SearchConfig {
        population: Some(16),
        generations: 40,
        seed: 7,
        ..SearchConfig::default()
    };
    let grid = default_chi_grid(&params, 6, cfg.dt)?;
    let shown: Vec<String> = grid.iter().map(|c| format!("{c:.3e}")).collect();
    println!("chi grid: [{}]\n", shown.join(", "));

    let uniform = sweep_chi(PolicyFamily::Uniform, &params, &grid, &cfg)?;
    let seeds: Vec<Vec<PolicySchedule>> = uniform.iter().map(|p| vec![p.policy.clone()]).collect();
    let semi = sweep_chi_with_seeds(PolicyFamily::SemiTargeted, &params, &grid, &cfg, &seeds)?;

    println!(
        "{:>12} | {:>10} {:>10} | {:>10} {:>10}",
        "chi", "mort_unif", "gdp%_unif", "mort_semi", "gdp%_semi"
    );
    for i in 0..grid.len() {
        println!(
            "{:>12.1} | {:>10.5} {:>10.2} | {:>10.5} {:>10.2}",
            grid[i],
            uniform[i].mortality,
            uniform[i].econ_loss_pct_gdp,
            semi[i].mortality,
            semi[i].econ_loss_pct_gdp
        );
    }

    let front = pareto_filter(semi);
    println!("\nsemi-targeted Pareto frontier ({} points):", front.len());
    for p in &front {
        println!(
            "  mortality {:.5} -> {:.2}% GDP (senior shielding {:.0} days)",
            p.mortality,
            p.econ_loss_pct_gdp,
            p.policy.senior_days_above(0.5)
        );
    }
    Ok(())
}
