//! Simulate the calibrated German baseline without any shielding and
//! print the headline epidemic and economic outcomes.
//!
//! ```bash
//! cargo run --example simulate_baseline
//! ```

use seirshield::dynamics::integrate;
use seirshield::econ::{loss_pct_gdp, total_economic_loss, total_mortality};
use seirshield::model::{germany_baseline, GroupId};
use seirshield::policy::{PolicyFamily, PolicySchedule};

fn main() -> anyhow::Result<()> {
    let params = germany_baseline();
    let policy = PolicySchedule::zero(PolicyFamily::Uniform, params.horizon, 13);
    let traj = integrate(&params, &policy, 0.25)?;

    println!(
        "unmitigated epidemic, T = {} days, dt = 0.25",
        params.horizon
    );
    println!("  initial R(t):        {:.4}", traj.rt[0]);
    println!(
        "  peak ICU load:       {:.5} of the population",
        traj.max_icu()
    );
    println!(
        "  total mortality:     {:.4}%",
        100.0 * total_mortality(&traj)
    );
    let loss = total_economic_loss(&traj);
    println!(
        "  economic loss:       {loss:.2} income units ({:.2}% of annual GDP)",
        loss_pct_gdp(loss, &params)
    );

    println!("\nshare still uninfected at the end:");
    let terminal_index = traj.times.len() - 2; // last pre-vaccine grid point
    for g in GroupId::ALL {
        let share =
            traj.states[terminal_index].group(g).susceptible / params.groups[g].population_share;
        println!("  {:<7} {:.3}", g.name(), share);
    }
    Ok(())
}
