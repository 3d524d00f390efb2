//! Deterministic three-group SEIR epidemic simulator coupled to an
//! economic-loss objective, with an optimizer for age-targeted shielding
//! schedules, efficient-frontier sweeps over the life weight, and a
//! catalog of composable intervention scenarios.
//!
//! The crate is organized around value types: build a [`ModelParams`]
//! (start from [`germany_baseline`]), transform it with scenarios, then
//! simulate with [`dynamics::integrate`] or search policies with
//! [`policy::optimize_policy`] and friends. The `examples/` directory has
//! one runnable walk-through per capability; the `seirshield` binary
//! wraps the same entry points as subcommands.

pub mod calibration;
pub mod dynamics;
pub mod econ;
pub mod model;
pub mod policy;
pub mod report;
pub mod scenario;

pub use calibration::{calibrate_beta, effective_rt, implied_ifr, r0, spectral_radius};
pub use dynamics::{
    apply_vaccine_terminal, derivative, force_of_infection, icu_load, integrate, integrate_with,
    IntegrateOptions, Trajectory,
};
pub use econ::{instantaneous_loss, objective, total_economic_loss, total_mortality};
pub use model::{
    germany_baseline, scale_contacts, validate, ContactMatrix, GroupId, GroupParams, ModelParams,
    ModelState,
};
pub use policy::{
    default_chi_grid, evaluate_policy, frontier, optimize_policy, pareto_filter, safety_policy,
    FrontierPoint, PolicyFamily, PolicySchedule, SearchConfig,
};
pub use scenario::{apply_scenario, scenario_catalog, ScenarioSpec, Transform};
