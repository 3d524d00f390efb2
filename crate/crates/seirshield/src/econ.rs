//! Economic losses: the instantaneous per-group loss rate and its five
//! components, trajectory totals, mortality, and the weighted planner
//! objective.

use crate::dynamics::{death_rate, icu_load, Trajectory};
use crate::model::{GroupId, ModelParams, ModelState, DAYS_PER_YEAR};
use serde::Serialize;

/// One group's instantaneous loss rate split into its five sources,
/// in income units per day.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct LossBreakdown {
    /// Forgone production of shielded susceptibles.
    pub susceptible_shielding: f64,
    /// Income loss of exposed individuals (shielded or isolated).
    pub exposed: f64,
    /// Income loss of infectious individuals (shielded or isolated).
    pub infectious: f64,
    /// Forgone production of shielded recovereds without an immunity pass.
    pub recovered_shielding: f64,
    /// Discounted remaining employment lost to deaths.
    pub death_productivity: f64,
    pub total: f64,
}

/// Per-group loss rates at the given state and shielding levels. The
/// death term uses the same congestion-clamped death rate as the
/// dynamics.
pub fn instantaneous_loss(
    state: &ModelState,
    levels: &[f64; 3],
    params: &ModelParams,
) -> [LossBreakdown; 3] {
    let h = icu_load(state, params);
    let mut out = [LossBreakdown::default(); 3];
    for g in GroupId::ALL {
        let j = g.index();
        let gp = &params.groups[g];
        let c = state.group(g);
        let level = levels[j];
        let idle = (1.0 - gp.shielded_productivity) * gp.income;
        let delta_d = death_rate(gp, h, params.mortality_lambda);
        let susceptible_shielding = idle * c.susceptible * level;
        let exposed = idle * c.exposed * (1.0 - gp.undetected_exposed * (1.0 - level));
        let infectious = idle
            * c.infectious
            * (1.0 - gp.undetected_exposed * gp.undetected_infectious * (1.0 - level));
        let recovered_shielding = idle * (1.0 - gp.immunity_passport) * c.recovered * level;
        let death_productivity =
            gp.income * gp.remaining_employment * gp.icu_share * delta_d * c.infectious;
        out[j] = LossBreakdown {
            susceptible_shielding,
            exposed,
            infectious,
            recovered_shielding,
            death_productivity,
            total: susceptible_shielding
                + exposed
                + infectious
                + recovered_shielding
                + death_productivity,
        };
    }
    out
}

/// Economy-wide loss rate, the sum over groups. This is the integrand the
/// integrator carries as the accumulated-loss coordinate.
pub fn total_loss_rate(state: &ModelState, levels: &[f64; 3], params: &ModelParams) -> f64 {
    instantaneous_loss(state, levels, params)
        .iter()
        .map(|b| b.total)
        .sum()
}

/// Total economic loss over the horizon, in income units: the
/// accumulated-loss coordinate at the end of the trajectory.
pub fn total_economic_loss(traj: &Trajectory) -> f64 {
    traj.terminal().accumulated_loss
}

/// One year of pre-pandemic production, used to express losses in
/// GDP-year terms for reporting. Never used inside optimization.
pub fn annual_gdp(params: &ModelParams) -> f64 {
    let daily: f64 = GroupId::ALL
        .iter()
        .map(|&g| params.groups[g].income * params.groups[g].population_share)
        .sum();
    daily * DAYS_PER_YEAR
}

/// Loss expressed as a percentage of one year's GDP.
pub fn loss_pct_gdp(loss: f64, params: &ModelParams) -> f64 {
    100.0 * loss / annual_gdp(params)
}

/// Total lives lost: the dead across groups at the end of the horizon,
/// as a fraction of the total population.
pub fn total_mortality(traj: &Trajectory) -> f64 {
    traj.terminal().total_dead()
}

/// Planner objective: economic loss plus `chi` times mortality.
pub fn objective(traj: &Trajectory, chi: f64) -> f64 {
    debug_assert!(chi >= 0.0);
    total_economic_loss(traj) + chi * total_mortality(traj)
}

/// Time integrals of each loss component per group, by the trapezoid rule
/// over the stored grid. Reporting only; the objective uses the
/// integrator's own loss coordinate.
pub fn breakdown_integrals(traj: &Trajectory, params: &ModelParams) -> [LossBreakdown; 3] {
    let mut acc = [LossBreakdown::default(); 3];
    let mut prev: Option<[LossBreakdown; 3]> = None;
    for i in 0..traj.times.len() {
        let cur = instantaneous_loss(&traj.states[i], &traj.levels[i], params);
        if let Some(p) = prev {
            let h = traj.times[i] - traj.times[i - 1];
            for j in 0..3 {
                acc[j].susceptible_shielding +=
                    0.5 * h * (p[j].susceptible_shielding + cur[j].susceptible_shielding);
                acc[j].exposed += 0.5 * h * (p[j].exposed + cur[j].exposed);
                acc[j].infectious += 0.5 * h * (p[j].infectious + cur[j].infectious);
                acc[j].recovered_shielding +=
                    0.5 * h * (p[j].recovered_shielding + cur[j].recovered_shielding);
                acc[j].death_productivity +=
                    0.5 * h * (p[j].death_productivity + cur[j].death_productivity);
                acc[j].total += 0.5 * h * (p[j].total + cur[j].total);
            }
        }
        prev = Some(cur);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, integrate_with, IntegrateOptions};
    use crate::model::{germany_baseline, GroupId};
    use crate::policy::{PolicyFamily, PolicySchedule};

    #[test]
    fn no_shielding_no_disease_no_loss() {
        let p = germany_baseline();
        let s = ModelState::disease_free(&p);
        for b in instantaneous_loss(&s, &[0.0; 3], &p) {
            assert_eq!(b.total, 0.0);
        }
    }

    #[test]
    fn immunity_passport_removes_recovered_term() {
        let p = germany_baseline(); // kappa = 1 everywhere
        let mut s = ModelState::initial(&p);
        for c in &mut s.groups {
            c.recovered = 0.1;
            c.susceptible -= 0.1;
        }
        for b in instantaneous_loss(&s, &[1.0; 3], &p) {
            assert_eq!(b.recovered_shielding, 0.0);
        }
    }

    #[test]
    fn susceptible_term_hand_value() {
        let mut p = germany_baseline();
        p.groups.young.shielded_productivity = 0.3;
        p.groups.young.income = 1.0;
        let mut s = ModelState::disease_free(&p);
        s.groups[0].susceptible = 0.4;
        let b = instantaneous_loss(&s, &[0.5, 0.0, 0.0], &p);
        assert!((b[0].susceptible_shielding - 0.14).abs() < 1e-15);
    }

    #[test]
    fn total_equals_component_sum() {
        let p = germany_baseline();
        let mut s = ModelState::initial(&p);
        s.groups[0].infectious = 0.01;
        s.groups[1].exposed = 0.03;
        s.groups[2].recovered = 0.02;
        for b in instantaneous_loss(&s, &[0.4, 0.9, 0.2], &p) {
            let sum = b.susceptible_shielding
                + b.exposed
                + b.infectious
                + b.recovered_shielding
                + b.death_productivity;
            assert!((b.total - sum).abs() < 1e-12);
            assert!(b.total >= 0.0);
        }
    }

    #[test]
    fn undetected_terms_reduce_to_shielding_share() {
        // with no testing or tracing the exposed/infectious terms carry
        // the shielding level only
        let mut p = germany_baseline();
        for g in GroupId::ALL {
            p.groups.get_mut(g).undetected_exposed = 1.0;
            p.groups.get_mut(g).undetected_infectious = 1.0;
        }
        let mut s = ModelState::initial(&p);
        s.groups[1].exposed = 0.02;
        s.groups[1].infectious = 0.05;
        let levels = [0.0, 0.35, 0.0];
        let b = instantaneous_loss(&s, &levels, &p);
        let idle = 0.7 * p.groups.middle.income;
        assert!((b[1].exposed - idle * 0.02 * 0.35).abs() < 1e-15);
        assert!((b[1].infectious - idle * 0.05 * 0.35).abs() < 1e-15);
    }

    #[test]
    fn full_shielding_loss_closed_form() {
        let mut p = germany_baseline();
        p.initial_exposed_share = 0.0;
        let policy = PolicySchedule::constant(PolicyFamily::Uniform, p.horizon, 13, 1.0).unwrap();
        let traj = integrate_with(
            &p,
            &policy,
            0.25,
            IntegrateOptions {
                apply_terminal_event: false,
            },
        )
        .unwrap();
        let loss = total_economic_loss(&traj);
        let daily: f64 = GroupId::ALL
            .iter()
            .map(|&g| p.groups[g].income * p.groups[g].population_share)
            .sum();
        let want = 0.7 * daily * p.horizon;
        assert!(
            (loss - want).abs() < 1e-9 * want,
            "loss {loss} vs closed form {want}"
        );
        // GDP-years conversion: 0.7 * T / 365
        let gdp_years = loss / annual_gdp(&p);
        assert!((gdp_years - 0.7 * 546.0 / 365.0).abs() < 1e-9);
        assert!((loss_pct_gdp(loss, &p) - 100.0 * 0.7 * 546.0 / 365.0).abs() < 1e-6);
    }

    #[test]
    fn disease_free_zero_policy_zero_objective() {
        let mut p = germany_baseline();
        p.initial_exposed_share = 0.0;
        let policy = PolicySchedule::zero(PolicyFamily::Uniform, p.horizon, 13);
        let traj = integrate(&p, &policy, 0.25).unwrap();
        assert_eq!(total_economic_loss(&traj), 0.0);
        assert_eq!(total_mortality(&traj), 0.0);
        for chi in [0.0, 1.0, 1e6] {
            assert_eq!(objective(&traj, chi), 0.0);
        }
    }

    #[test]
    fn objective_affine_in_chi() {
        let p = germany_baseline();
        let policy = PolicySchedule::zero(PolicyFamily::Uniform, p.horizon, 13);
        let traj = integrate(&p, &policy, 0.25).unwrap();
        assert_eq!(objective(&traj, 0.0), total_economic_loss(&traj));
        let (c1, c2) = (123.0, 4567.0);
        let lhs = objective(&traj, c1) + objective(&traj, c2);
        let rhs = objective(&traj, c1 + c2) + objective(&traj, 0.0);
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn mortality_matches_quadrature_oracle() {
        // D(T) recomputed by trapezoid integration of the death inflow
        // reconstructed from the stored series.
        let p = germany_baseline();
        let policy = PolicySchedule::zero(PolicyFamily::Uniform, p.horizon, 13);
        let traj = integrate_with(
            &p,
            &policy,
            0.25,
            IntegrateOptions {
                apply_terminal_event: false,
            },
        )
        .unwrap();
        let rate = |i: usize| -> f64 {
            let s = &traj.states[i];
            let h = traj.icu[i];
            GroupId::ALL
                .iter()
                .map(|&g| {
                    let gp = &p.groups[g];
                    death_rate(gp, h, p.mortality_lambda) * gp.icu_share * s.group(g).infectious
                })
                .sum()
        };
        let mut integral = 0.0;
        for i in 1..traj.times.len() {
            integral += 0.5 * (traj.times[i] - traj.times[i - 1]) * (rate(i - 1) + rate(i));
        }
        let direct = total_mortality(&traj);
        assert!(
            (integral - direct).abs() < 1e-6,
            "quadrature {integral} vs integrator {direct}"
        );
    }

    #[test]
    fn mortality_nondecreasing_along_trajectory() {
        let p = germany_baseline();
        let policy = PolicySchedule::zero(PolicyFamily::Uniform, p.horizon, 13);
        let traj = integrate(&p, &policy, 0.25).unwrap();
        let mut prev = 0.0;
        for s in &traj.states {
            let d = s.total_dead();
            assert!(d >= prev - 1e-15);
            prev = d;
        }
    }

    #[test]
    fn breakdown_integrals_sum_to_total_loss() {
        let p = germany_baseline();
        let policy =
            PolicySchedule::constant(PolicyFamily::SemiTargeted, p.horizon, 13, 0.4).unwrap();
        let traj = integrate(&p, &policy, 0.25).unwrap();
        let parts = breakdown_integrals(&traj, &p);
        let sum: f64 = parts.iter().map(|b| b.total).sum();
        let direct = total_economic_loss(&traj);
        // trapezoid vs RK4-internal integral agree to quadrature accuracy
        // (the final interval straddles the vaccine event, so the error is
        // O(dt) there)
        assert!((sum - direct).abs() < 1e-3 * direct.max(1.0));
    }
}
