//! Epidemic dynamics: force of infection, laws of motion, fixed-step
//! fourth-order Runge-Kutta integration with the economic loss carried as
//! an augmented coordinate, and the vaccine/cure terminal event.

use crate::calibration;
use crate::model::{Compartments, GroupId, ModelParams, ModelState};
use crate::policy::PolicySchedule;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("step size must be > 0, got {0}")]
    InvalidStep(f64),
    #[error("horizon {horizon} is not an integral number of steps of size {dt}")]
    NonIntegralStep { horizon: f64, dt: f64 },
    #[error("policy horizon {policy} does not match model horizon {params}")]
    HorizonMismatch { policy: f64, params: f64 },
    #[error("time {t} is outside the dynamic regime [0, {horizon})")]
    OutOfRegime { t: f64, horizon: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("cumulative negative-compartment clamp mass {mass:e} exceeds budget {budget:e}")]
    ClampBudget { mass: f64, budget: f64 },
}

/// Aborts integration when accumulated negative-value clamping exceeds
/// this much total population mass.
pub const CLAMP_MASS_BUDGET: f64 = 1e-6;

/// Weight of the soft penalty on ICU load above the configured cap.
pub const ICU_PENALTY_WEIGHT: f64 = 1e6;

/// Per-group time derivative of one compartment block.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompartmentDerivative {
    pub susceptible: f64,
    pub exposed: f64,
    pub infectious: f64,
    pub recovered: f64,
    pub dead: f64,
}

impl CompartmentDerivative {
    pub fn sum(&self) -> f64 {
        self.susceptible + self.exposed + self.infectious + self.recovered + self.dead
    }
}

/// Full right-hand side: compartment derivatives per group plus the
/// instantaneous economic loss rate.
#[derive(Clone, Copy, Debug)]
pub struct StateDerivative {
    pub groups: [CompartmentDerivative; 3],
    pub loss: f64,
}

/// Total ICU load: sum over groups of the ICU share of the infectious.
pub fn icu_load(state: &ModelState, params: &ModelParams) -> f64 {
    GroupId::ALL
        .iter()
        .map(|&g| params.groups[g].icu_share * state.group(g).infectious)
        .sum()
}

/// Congestion-adjusted ICU death rate, clamped so the implied recovery
/// rate never goes negative.
pub(crate) fn death_rate(group: &crate::model::GroupParams, icu_total: f64, lambda: f64) -> f64 {
    (group.baseline_death_rate * (1.0 + lambda * icu_total)).min(group.infectious_exit)
}

fn matching_factor(j: usize, state: &ModelState, levels: &[f64; 3], params: &ModelParams) -> f64 {
    if params.matching_alpha == 2.0 {
        return 1.0;
    }
    let theta_j = params.groups[GroupId::ALL[j]].shielding_leakage;
    let mut bracket = 0.0;
    for gk in GroupId::ALL {
        let k = gk.index();
        let gp = &params.groups[gk];
        let c = state.group(gk);
        let circulating = c.susceptible
            + gp.undetected_exposed * c.exposed
            + gp.undetected_exposed * gp.undetected_infectious * c.infectious
            + (1.0 - gp.immunity_passport) * c.recovered;
        bracket += params.contacts.rho[j][k]
            * (circulating * (1.0 - theta_j * levels[k]) + gp.immunity_passport * c.recovered);
    }
    bracket.powf(params.matching_alpha - 2.0)
}

/// Rate of new exposures per group at the given shielding levels.
pub fn force_of_infection(state: &ModelState, levels: &[f64; 3], params: &ModelParams) -> [f64; 3] {
    let mut out = [0.0; 3];
    for gj in GroupId::ALL {
        let j = gj.index();
        let pj = &params.groups[gj];
        let mut contact_pressure = 0.0;
        for gk in GroupId::ALL {
            let k = gk.index();
            let pk = &params.groups[gk];
            contact_pressure += params.contacts.rho[j][k]
                * pk.undetected_exposed
                * pk.undetected_infectious
                * (1.0 - pk.shielding_leakage * levels[k])
                * state.group(gk).infectious;
        }
        out[j] = matching_factor(j, state, levels, params)
            * params.beta
            * (1.0 - pj.shielding_leakage * levels[j])
            * state.group(gj).susceptible
            * contact_pressure;
    }
    out
}

/// Right-hand side at explicit shielding levels.
pub fn derivative_at_levels(
    state: &ModelState,
    levels: &[f64; 3],
    params: &ModelParams,
) -> StateDerivative {
    let h = icu_load(state, params);
    let force = force_of_infection(state, levels, params);
    let mut groups = [CompartmentDerivative::default(); 3];
    for g in GroupId::ALL {
        let j = g.index();
        let gp = &params.groups[g];
        let c = state.group(g);
        let delta_d = death_rate(gp, h, params.mortality_lambda);
        groups[j] = CompartmentDerivative {
            susceptible: -force[j],
            exposed: force[j] - gp.latent_exit * c.exposed,
            infectious: gp.latent_exit * c.exposed - gp.infectious_exit * c.infectious,
            dead: delta_d * gp.icu_share * c.infectious,
            recovered: (gp.infectious_exit - delta_d) * gp.icu_share * c.infectious
                + gp.infectious_exit * (1.0 - gp.icu_share) * c.infectious,
        };
    }
    let loss = crate::econ::total_loss_rate(state, levels, params);
    StateDerivative { groups, loss }
}

/// Right-hand side with the policy's shielding levels looked up at `t`.
/// Rejects times at or beyond the horizon (no dynamics after the vaccine).
pub fn derivative(
    state: &ModelState,
    t: f64,
    policy: &PolicySchedule,
    params: &ModelParams,
) -> Result<StateDerivative, DynamicsError> {
    if !(0.0..params.horizon).contains(&t) {
        return Err(DynamicsError::OutOfRegime {
            t,
            horizon: params.horizon,
        });
    }
    Ok(derivative_at_levels(state, &policy.levels_at(t), params))
}

/// Vaccine/cure event: every individual alive moves to recovered; the
/// dead stay dead.
pub fn apply_vaccine_terminal(state: &ModelState) -> ModelState {
    let mut out = *state;
    for c in &mut out.groups {
        c.recovered += c.susceptible + c.exposed + c.infectious;
        c.susceptible = 0.0;
        c.exposed = 0.0;
        c.infectious = 0.0;
    }
    out
}

// Augmented state layout: 5 compartments per group, then the accumulated
// loss, then the integral of ICU load above the cap.
pub(crate) const N_VARS: usize = 17;
pub(crate) const LOSS_SLOT: usize = 15;
pub(crate) const EXCESS_SLOT: usize = 16;
pub(crate) type StateVec = [f64; N_VARS];

pub(crate) fn pack(state: &ModelState) -> StateVec {
    let mut v = [0.0; N_VARS];
    for (j, c) in state.groups.iter().enumerate() {
        v[5 * j] = c.susceptible;
        v[5 * j + 1] = c.exposed;
        v[5 * j + 2] = c.infectious;
        v[5 * j + 3] = c.recovered;
        v[5 * j + 4] = c.dead;
    }
    v[LOSS_SLOT] = state.accumulated_loss;
    v
}

pub(crate) fn unpack(v: &StateVec) -> ModelState {
    let mut groups = [Compartments::default(); 3];
    for (j, c) in groups.iter_mut().enumerate() {
        c.susceptible = v[5 * j];
        c.exposed = v[5 * j + 1];
        c.infectious = v[5 * j + 2];
        c.recovered = v[5 * j + 3];
        c.dead = v[5 * j + 4];
    }
    ModelState {
        groups,
        accumulated_loss: v[LOSS_SLOT],
    }
}

fn deriv_vec(v: &StateVec, levels: &[f64; 3], params: &ModelParams) -> StateVec {
    let state = unpack(v);
    let d = derivative_at_levels(&state, levels, params);
    let mut out = [0.0; N_VARS];
    for (j, g) in d.groups.iter().enumerate() {
        out[5 * j] = g.susceptible;
        out[5 * j + 1] = g.exposed;
        out[5 * j + 2] = g.infectious;
        out[5 * j + 3] = g.recovered;
        out[5 * j + 4] = g.dead;
    }
    out[LOSS_SLOT] = d.loss;
    out[EXCESS_SLOT] = match params.icu_cap {
        Some(cap) => (icu_load(&state, params) - cap).max(0.0),
        None => 0.0,
    };
    out
}

/// One classic fourth-order Runge-Kutta step with the shielding levels
/// held fixed (they are piecewise constant within a step).
pub(crate) fn rk4_step(v: &StateVec, levels: &[f64; 3], params: &ModelParams, dt: f64) -> StateVec {
    let k1 = deriv_vec(v, levels, params);
    let mut stage = [0.0; N_VARS];
    for i in 0..N_VARS {
        stage[i] = v[i] + 0.5 * dt * k1[i];
    }
    let k2 = deriv_vec(&stage, levels, params);
    for i in 0..N_VARS {
        stage[i] = v[i] + 0.5 * dt * k2[i];
    }
    let k3 = deriv_vec(&stage, levels, params);
    for i in 0..N_VARS {
        stage[i] = v[i] + dt * k3[i];
    }
    let k4 = deriv_vec(&stage, levels, params);
    let mut out = [0.0; N_VARS];
    for i in 0..N_VARS {
        out[i] = v[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Clamps negative compartment values to zero, returning the clamped mass.
pub(crate) fn clamp_negative(v: &mut StateVec) -> f64 {
    let mut deficit = 0.0;
    for x in v.iter_mut().take(LOSS_SLOT) {
        if *x < 0.0 {
            deficit -= *x;
            *x = 0.0;
        }
    }
    deficit
}

pub(crate) fn vaccine_terminal_vec(v: &mut StateVec) {
    for j in 0..3 {
        v[5 * j + 3] += v[5 * j] + v[5 * j + 1] + v[5 * j + 2];
        v[5 * j] = 0.0;
        v[5 * j + 1] = 0.0;
        v[5 * j + 2] = 0.0;
    }
}

pub(crate) struct StepGrid {
    pub steps: usize,
}

impl StepGrid {
    pub fn new(
        params: &ModelParams,
        policy: &PolicySchedule,
        dt: f64,
    ) -> Result<Self, DynamicsError> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(DynamicsError::InvalidStep(dt));
        }
        if (policy.horizon() - params.horizon).abs() > 1e-9 {
            return Err(DynamicsError::HorizonMismatch {
                policy: policy.horizon(),
                params: params.horizon,
            });
        }
        let ratio = params.horizon / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 || steps < 1.0 {
            return Err(DynamicsError::NonIntegralStep {
                horizon: params.horizon,
                dt,
            });
        }
        Ok(StepGrid {
            steps: steps as usize,
        })
    }
}

/// Simulated trajectory on the fixed step grid, with derived series
/// recorded at each grid point.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModelState>,
    pub policy: PolicySchedule,
    /// Total ICU load H at each grid point.
    pub icu: Vec<f64>,
    /// Effective reproduction number at each grid point (NaN when the
    /// matching elasticity is not 2).
    pub rt: Vec<f64>,
    /// Shielding levels in force at each grid point.
    pub levels: Vec<[f64; 3]>,
    /// Total population mass clamped away from negative values.
    pub clamp_mass: f64,
    /// Integral of ICU load above the configured cap (0 when uncapped).
    pub icu_excess: f64,
}

impl Trajectory {
    pub fn terminal(&self) -> &ModelState {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }

    pub fn max_icu(&self) -> f64 {
        self.icu.iter().fold(0.0_f64, |a, &b| a.max(b))
    }

    /// CSV export, one row per grid point, 17-significant-digit floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.times.len() * 24 * 16);
        out.push('t');
        for g in GroupId::ALL {
            for c in ["S", "E", "I", "R", "D"] {
                out.push(',');
                out.push_str(c);
                out.push('_');
                out.push_str(g.short());
            }
        }
        out.push_str(",H,Rt,L_y,L_m,L_s,loss_cum\n");
        for i in 0..self.times.len() {
            out.push_str(&crate::report::fmt_float(self.times[i]));
            let s = &self.states[i];
            for c in &s.groups {
                for x in [c.susceptible, c.exposed, c.infectious, c.recovered, c.dead] {
                    out.push(',');
                    out.push_str(&crate::report::fmt_float(x));
                }
            }
            for x in [self.icu[i], self.rt[i]] {
                out.push(',');
                out.push_str(&crate::report::fmt_float(x));
            }
            for x in self.levels[i] {
                out.push(',');
                out.push_str(&crate::report::fmt_float(x));
            }
            out.push(',');
            out.push_str(&crate::report::fmt_float(s.accumulated_loss));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Apply the vaccine/cure event to the terminal state. On by default;
    /// long-run epidemiological checks switch it off.
    pub apply_terminal_event: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            apply_terminal_event: true,
        }
    }
}

/// Integrates the model under the given policy from t=0 to the horizon.
pub fn integrate(
    params: &ModelParams,
    policy: &PolicySchedule,
    dt: f64,
) -> Result<Trajectory, DynamicsError> {
    integrate_with(params, policy, dt, IntegrateOptions::default())
}

pub fn integrate_with(
    params: &ModelParams,
    policy: &PolicySchedule,
    dt: f64,
    opts: IntegrateOptions,
) -> Result<Trajectory, DynamicsError> {
    let grid = StepGrid::new(params, policy, dt)?;
    let quadratic = params.matching_alpha == 2.0;
    let mut v = pack(&ModelState::initial(params));
    let mut clamp_mass = 0.0;

    let mut times = Vec::with_capacity(grid.steps + 1);
    let mut states = Vec::with_capacity(grid.steps + 1);
    let mut icu = Vec::with_capacity(grid.steps + 1);
    let mut rt = Vec::with_capacity(grid.steps + 1);
    let mut levels_series = Vec::with_capacity(grid.steps + 1);

    let mut record = |t: f64, v: &StateVec| {
        let state = unpack(v);
        let levels = policy.levels_at(t);
        icu.push(icu_load(&state, params));
        rt.push(if quadratic {
            calibration::effective_rt(&state, &levels, params).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        });
        levels_series.push(levels);
        times.push(t);
        states.push(state);
    };

    record(0.0, &v);
    for step in 0..grid.steps {
        let t = step as f64 * dt;
        let levels = policy.levels_at(t);
        v = rk4_step(&v, &levels, params, dt);
        clamp_mass += clamp_negative(&mut v);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::NonFinite { t: t + dt });
        }
        let last = step + 1 == grid.steps;
        if last && opts.apply_terminal_event {
            vaccine_terminal_vec(&mut v);
        }
        record((step + 1) as f64 * dt, &v);
    }
    if clamp_mass > CLAMP_MASS_BUDGET {
        return Err(DynamicsError::ClampBudget {
            mass: clamp_mass,
            budget: CLAMP_MASS_BUDGET,
        });
    }
    Ok(Trajectory {
        times,
        states,
        policy: policy.clone(),
        icu,
        rt,
        levels: levels_series,
        clamp_mass,
        icu_excess: v[EXCESS_SLOT],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{germany_baseline, GroupId};
    use crate::policy::{PolicyFamily, PolicySchedule};

    fn zero_policy(params: &ModelParams) -> PolicySchedule {
        PolicySchedule::zero(PolicyFamily::Uniform, params.horizon, 13)
    }

    #[test]
    fn no_infectious_means_no_force() {
        let p = germany_baseline();
        let s = ModelState::initial(&p); // exposed only, no infectious
        assert_eq!(force_of_infection(&s, &[0.0; 3], &p), [0.0; 3]);
    }

    #[test]
    fn force_single_group_hand_value() {
        let mut p = germany_baseline();
        p.groups.young.population_share = 1.0;
        p.groups.middle.population_share = 0.0;
        p.groups.senior.population_share = 0.0;
        let mut s = ModelState::disease_free(&p);
        s.groups[0].susceptible = 0.46;
        s.groups[0].infectious = 0.01;
        s.groups[0].recovered = 1.0 - 0.47;
        let f = force_of_infection(&s, &[0.0; 3], &p);
        // one nonzero term: beta * rho_yy * eta_E * eta_I * S * I
        let want = 0.46 * p.beta * 0.75 * 0.9 * 0.01;
        assert!((f[0] - want).abs() < 1e-15, "got {}, want {want}", f[0]);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[2], 0.0);
    }

    #[test]
    fn matching_extends_force_by_bracket() {
        // alpha=3 multiplies each group's force by its congestion bracket,
        // recomputed here directly from the definition.
        let p2 = germany_baseline();
        let mut p3 = p2;
        p3.matching_alpha = 3.0;
        let mut s = ModelState::initial(&p2);
        s.groups[0].infectious = 0.01;
        s.groups[1].infectious = 0.004;
        s.groups[2].recovered = 0.02;
        let levels = [0.2, 0.1, 0.7];
        let f2 = force_of_infection(&s, &levels, &p2);
        let f3 = force_of_infection(&s, &levels, &p3);
        for gj in GroupId::ALL {
            let j = gj.index();
            let theta_j = p2.groups[gj].shielding_leakage;
            let mut bracket = 0.0;
            for gk in GroupId::ALL {
                let k = gk.index();
                let gp = &p2.groups[gk];
                let c = s.group(gk);
                let pool = c.susceptible
                    + gp.undetected_exposed * c.exposed
                    + gp.undetected_exposed * gp.undetected_infectious * c.infectious
                    + (1.0 - gp.immunity_passport) * c.recovered;
                bracket += p2.contacts.rho[j][k]
                    * (pool * (1.0 - theta_j * levels[k]) + gp.immunity_passport * c.recovered);
            }
            assert!((f3[j] - f2[j] * bracket).abs() < 1e-15 * f2[j].max(1.0));
        }
    }

    #[test]
    fn disease_free_derivative_is_zero() {
        let p = germany_baseline();
        let s = ModelState::disease_free(&p);
        let d = derivative_at_levels(&s, &[0.0; 3], &p);
        for g in &d.groups {
            assert_eq!(g.sum(), 0.0);
            assert_eq!(g.susceptible, 0.0);
            assert_eq!(g.dead, 0.0);
        }
        assert_eq!(d.loss, 0.0);
    }

    #[test]
    fn death_rate_unclamped_at_zero_congestion() {
        let mut p = germany_baseline();
        p.mortality_lambda = 0.0;
        for g in GroupId::ALL {
            let gp = &p.groups[g];
            assert_eq!(
                death_rate(gp, 0.5, p.mortality_lambda),
                gp.baseline_death_rate
            );
        }
    }

    #[test]
    fn death_rate_exceeds_baseline_under_congestion() {
        let p = germany_baseline();
        let gp = &p.groups[GroupId::Senior];
        let low = death_rate(gp, 0.0, p.mortality_lambda);
        let high = death_rate(gp, 0.05, p.mortality_lambda);
        assert_eq!(low, gp.baseline_death_rate);
        assert!(high > low);
        assert!(high <= gp.infectious_exit);
    }

    #[test]
    fn infectious_outflow_splits_between_dead_and_recovered() {
        let mut p = germany_baseline();
        p.groups.young.icu_share = 1.0;
        let mut s = ModelState::initial(&p);
        s.groups[0].infectious = 0.05;
        let d = derivative_at_levels(&s, &[0.0; 3], &p);
        let gamma_i = p.groups.young.infectious_exit;
        let outflow = d.groups[0].dead + d.groups[0].recovered;
        assert!((outflow - gamma_i * 0.05).abs() < 1e-12);
    }

    #[test]
    fn derivative_conserves_mass() {
        let p = germany_baseline();
        let mut s = ModelState::initial(&p);
        s.groups[0].infectious = 0.01;
        s.groups[1].infectious = 0.02;
        s.groups[2].infectious = 0.005;
        let d = derivative_at_levels(&s, &[0.3, 0.1, 0.9], &p);
        for g in &d.groups {
            assert!(g.sum().abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_rejects_post_vaccine_times() {
        let p = germany_baseline();
        let s = ModelState::initial(&p);
        let pol = zero_policy(&p);
        assert!(derivative(&s, p.horizon, &pol, &p).is_err());
        assert!(derivative(&s, -0.1, &pol, &p).is_err());
        assert!(derivative(&s, 0.0, &pol, &p).is_ok());
    }

    #[test]
    fn vaccine_terminal_arithmetic() {
        let mut s = ModelState::initial(&germany_baseline());
        s.groups[0] = Compartments {
            susceptible: 0.3,
            exposed: 0.05,
            infectious: 0.05,
            recovered: 0.05,
            dead: 0.01,
        };
        let after = apply_vaccine_terminal(&s);
        assert_eq!(after.groups[0].susceptible, 0.0);
        assert_eq!(after.groups[0].exposed, 0.0);
        assert_eq!(after.groups[0].infectious, 0.0);
        assert!((after.groups[0].recovered - 0.45).abs() < 1e-15);
        assert_eq!(after.groups[0].dead, 0.01);
        // idempotent
        assert_eq!(apply_vaccine_terminal(&after), after);
    }

    #[test]
    fn vaccine_terminal_disease_free() {
        let p = germany_baseline();
        let after = apply_vaccine_terminal(&ModelState::disease_free(&p));
        for g in GroupId::ALL {
            assert_eq!(after.group(g).recovered, p.groups[g].population_share);
            assert_eq!(after.group(g).dead, 0.0);
        }
    }

    #[test]
    fn icu_load_values() {
        let p = germany_baseline();
        let mut s = ModelState::disease_free(&p);
        assert_eq!(icu_load(&s, &p), 0.0);
        for c in &mut s.groups {
            c.infectious = 0.01;
        }
        assert!((icu_load(&s, &p) - 0.00102).abs() < 1e-18);
        let mut q = p;
        for g in GroupId::ALL {
            q.groups.get_mut(g).icu_share = 1.0;
        }
        assert!((icu_load(&s, &q) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn disease_free_trajectory_is_constant() {
        let mut p = germany_baseline();
        p.initial_exposed_share = 0.0;
        let traj = integrate_with(
            &p,
            &zero_policy(&p),
            0.25,
            IntegrateOptions {
                apply_terminal_event: false,
            },
        )
        .unwrap();
        let first = traj.states.first().unwrap();
        let last = traj.terminal();
        for g in 0..3 {
            assert_eq!(first.groups[g], last.groups[g]);
        }
        assert_eq!(last.accumulated_loss, 0.0);
        assert_eq!(traj.clamp_mass, 0.0);
    }

    #[test]
    fn terminal_event_recorded_in_trajectory() {
        let p = germany_baseline();
        let traj = integrate(&p, &zero_policy(&p), 0.25).unwrap();
        let last = traj.terminal();
        for g in GroupId::ALL {
            let c = last.group(g);
            assert_eq!(c.exposed, 0.0);
            assert_eq!(c.infectious, 0.0);
            assert!(
                (c.recovered + c.dead - p.groups[g].population_share).abs() < 1e-9,
                "group {g} does not absorb the living"
            );
        }
        assert_eq!(traj.times.len(), (546.0 / 0.25) as usize + 1);
        assert!(*traj.times.last().unwrap() == 546.0);
    }

    #[test]
    fn conservation_along_baseline() {
        let p = germany_baseline();
        let traj = integrate(&p, &zero_policy(&p), 0.25).unwrap();
        for s in &traj.states {
            for g in GroupId::ALL {
                let dev = (s.group(g).total() - p.groups[g].population_share).abs();
                assert!(dev < 1e-9, "conservation violated by {dev}");
            }
        }
    }

    #[test]
    fn monotone_dead_and_susceptible() {
        let p = germany_baseline();
        let traj = integrate(&p, &zero_policy(&p), 0.25).unwrap();
        for w in traj.states.windows(2) {
            for g in 0..3 {
                assert!(w[1].groups[g].dead >= w[0].groups[g].dead - 1e-12);
                assert!(w[1].groups[g].susceptible <= w[0].groups[g].susceptible + 1e-12);
            }
        }
    }

    #[test]
    fn integrate_rejects_bad_grids() {
        let p = germany_baseline();
        let pol = zero_policy(&p);
        assert!(matches!(
            integrate(&p, &pol, 0.33),
            Err(DynamicsError::NonIntegralStep { .. })
        ));
        assert!(matches!(
            integrate(&p, &pol, 0.0),
            Err(DynamicsError::InvalidStep(_))
        ));
        let short = PolicySchedule::zero(PolicyFamily::Uniform, 364.0, 13);
        assert!(matches!(
            integrate(&p, &short, 0.25),
            Err(DynamicsError::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn csv_header_and_shape() {
        let p = germany_baseline();
        let traj = integrate(&p, &zero_policy(&p), 0.25).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,S_y,E_y,I_y,R_y,D_y,S_m,E_m,I_m,R_m,D_m,S_s,E_s,I_s,R_s,D_s,H,Rt,L_y,L_m,L_s,loss_cum"
        );
        assert_eq!(csv.lines().count(), traj.times.len() + 1);
        let first_row = lines.next().unwrap();
        assert_eq!(first_row.split(',').count(), 22);
    }
}
