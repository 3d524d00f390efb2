//! Load parameters from a JSON tree and from a scenario file, the same
//! formats the CLI accepts. Missing config fields fall back to the German
//! baseline; unknown fields are rejected.
//!
//! ```bash
//! cargo run --example custom_config
//! ```

use seirshield::dynamics::integrate;
use seirshield::econ::total_mortality;
use seirshield::model::{params_from_json, GroupId};
use seirshield::policy::{PolicyFamily, PolicySchedule};
use seirshield::scenario::{apply_scenario, ScenarioSpec};

fn main() -> anyhow::Result<()> {
    // a one-year horizon with more pessimistic senior mortality
    let config = r#"{
        "horizon": 364.0,
        "initial_exposed_share": 0.001,
        "groups": {"senior": {"baseline_death_rate": 0.08}}
    }"#;
    let params = params_from_json(config)?;
    println!(
        "horizon {} days, senior death rate {}",
        params.horizon,
        params.groups[GroupId::Senior].baseline_death_rate
    );

    // unknown fields are an error, not a silent no-op
    let err = params_from_json(r#"{"r0": 2.4}"#).unwrap_err();
    println!("unknown field rejected: {err}");

    // scenario files are JSON lists of transforms
    let scenario_text = r#"[
        {"transform": "testing", "args": {"eta_i": 0.8}},
        {"transform": "targeted_distancing", "args": {"factor": 0.5}}
    ]"#;
    let spec: ScenarioSpec = serde_json::from_str(scenario_text)?;
    let tuned = apply_scenario(&params, &spec)?;

    let policy = PolicySchedule::zero(PolicyFamily::Uniform, tuned.horizon, 13);
    for (label, p) in [("config only", &params), ("config + scenario", &tuned)] {
        let traj = integrate(p, &policy, 0.25)?;
        println!("{label}: mortality {:.3}%", 100.0 * total_mortality(&traj));
    }
    Ok(())
}
