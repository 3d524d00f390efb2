//! Walk the scenario catalog: apply a few named interventions to the
//! baseline and simulate each one without shielding to see how testing,
//! tracing and distancing move mortality on their own.
//!
//! ```bash
//! cargo run --example scenario_tour
//! ```

use seirshield::dynamics::integrate;
use seirshield::econ::total_mortality;
use seirshield::model::germany_baseline;
use seirshield::policy::{PolicyFamily, PolicySchedule};
use seirshield::scenario::{apply_scenario, lookup, scenario_catalog};

fn main() -> anyhow::Result<()> {
    println!("{} scenarios in the catalog\n", scenario_catalog().len());

    let base = germany_baseline();
    let picks = [
        "baseline",
        "uniform_distancing_30",
        "targeted_distancing_50",
        "testing_0.7",
        "test_and_trace_0.7_0.7",
        "wfh_v1",
        "comprehensive",
        "comprehensive_wfh",
    ];
    println!("{:<24} {:>10} {:>10}", "scenario", "R(0)", "mortality");
    for name in picks {
        let params = apply_scenario(&base, &lookup(name)?)?;
        let policy = PolicySchedule::zero(PolicyFamily::Uniform, params.horizon, 13);
        let traj = integrate(&params, &policy, 0.25)?;
        println!(
            "{:<24} {:>10.3} {:>9.3}%",
            name,
            traj.rt[0],
            100.0 * total_mortality(&traj)
        );
    }
    println!("\n(zero shielding everywhere; the catalog's interventions alone)");
    Ok(())
}
