//! Property tests for the model invariants: conservation and
//! monotonicity along trajectories, contact-matrix algebra, loss
//! nonnegativity, force-of-infection monotonicity and the Pareto filter.

use proptest::prelude::*;
use seirshield::dynamics::{force_of_infection, integrate_with, IntegrateOptions};
use seirshield::econ::instantaneous_loss;
use seirshield::model::{
    germany_baseline, scale_contacts, validate, ContactMatrix, GroupId, ModelParams, ModelState,
    ALL_PAIRS, SENIOR_CROSS_PAIRS,
};
use seirshield::policy::{pareto_filter, FrontierPoint, PolicyFamily, PolicySchedule};

const TEST_HORIZON: f64 = 84.0;

fn group_values(lo: f64, hi: f64) -> impl Strategy<Value = [f64; 3]> {
    [lo..hi, lo..hi, lo..hi]
}

prop_compose! {
    fn arb_params()(
        raw_shares in group_values(0.05, 1.0),
        income in group_values(0.0, 2.0),
        delta in group_values(0.0, 15_000.0),
        icu in group_values(0.0, 1.0),
        death in group_values(0.0, 0.2),
        latent in group_values(1.0 / 14.0, 0.5),
        infectious in group_values(1.0 / 14.0, 0.5),
        leakage in group_values(0.05, 0.95),
        xi in group_values(0.0, 1.0),
        eta_i in group_values(0.0, 1.0),
        eta_e in group_values(0.0, 1.0),
        kappa in group_values(0.0, 1.0),
        contacts_raw in [0.0..1.5, 0.0..1.5, 0.0..1.5, 0.0..1.5, 0.0..1.5, 0.0..1.5],
        beta in 0.05..0.6,
        alpha in prop_oneof![Just(2.0), 2.0..2.3],
        lambda in 0.0..2.0,
        cap in proptest::option::of(0.005..0.1),
        e0 in 0.0..0.05,
    ) -> ModelParams {
        let mut p = germany_baseline();
        let total: f64 = raw_shares.iter().sum();
        for (i, g) in GroupId::ALL.into_iter().enumerate() {
            let gp = p.groups.get_mut(g);
            gp.population_share = raw_shares[i] / total;
            gp.income = income[i];
            gp.remaining_employment = delta[i];
            gp.icu_share = icu[i];
            gp.baseline_death_rate = death[i];
            gp.latent_exit = latent[i];
            gp.infectious_exit = infectious[i];
            gp.shielding_leakage = leakage[i];
            gp.shielded_productivity = xi[i];
            gp.undetected_infectious = eta_i[i];
            gp.undetected_exposed = eta_e[i];
            gp.immunity_passport = kappa[i];
        }
        let [yy, ym, ys, mm, ms, ss] = contacts_raw;
        p.contacts = ContactMatrix::new([[yy, ym, ys], [ym, mm, ms], [ys, ms, ss]]).unwrap();
        p.beta = beta;
        p.matching_alpha = alpha;
        p.mortality_lambda = lambda;
        p.icu_cap = cap;
        p.horizon = TEST_HORIZON;
        p.initial_exposed_share = e0;
        p
    }
}

prop_compose! {
    fn arb_policy()(
        family in prop_oneof![
            Just(PolicyFamily::Uniform),
            Just(PolicyFamily::SemiTargeted),
            Just(PolicyFamily::FullyTargeted)
        ],
        knots in 1usize..6,
        raw in proptest::collection::vec(0.0..=1.0f64, 18),
    ) -> PolicySchedule {
        let levels = (0..family.channels())
            .map(|c| raw[c * knots..(c + 1) * knots].to_vec())
            .collect();
        PolicySchedule::new(family, TEST_HORIZON, levels).unwrap()
    }
}

prop_compose! {
    fn arb_state()(
        params in arb_params(),
        fractions in [
            group_values(0.0, 1.0),
            group_values(0.0, 1.0),
            group_values(0.0, 1.0),
            group_values(0.0, 1.0),
        ],
    ) -> (ModelParams, ModelState) {
        // split each group's share across the five compartments
        let mut state = ModelState::disease_free(&params);
        for g in GroupId::ALL {
            let n = params.groups[g].population_share;
            let [a, b, c] = [fractions[0][g.index()], fractions[1][g.index()], fractions[2][g.index()]];
            let d = fractions[3][g.index()];
            let comp = &mut state.groups[g.index()];
            comp.susceptible = n * (1.0 - a);
            comp.exposed = n * a * (1.0 - b);
            comp.infectious = n * a * b * (1.0 - c);
            comp.recovered = n * a * b * c * (1.0 - d);
            comp.dead = n * a * b * c * d;
        }
        (params, state)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_params_validate(params in arb_params()) {
        prop_assert!(validate(&params).is_empty());
    }

    #[test]
    fn conservation_and_monotonicity(params in arb_params(), policy in arb_policy()) {
        let traj = integrate_with(
            &params,
            &policy,
            0.25,
            IntegrateOptions { apply_terminal_event: true },
        ).unwrap();
        for s in &traj.states {
            for g in GroupId::ALL {
                let dev = (s.group(g).total() - params.groups[g].population_share).abs();
                prop_assert!(dev < 1e-9, "conservation violated by {dev}");
            }
        }
        for w in traj.states.windows(2) {
            for g in 0..3 {
                prop_assert!(w[1].groups[g].dead >= w[0].groups[g].dead - 1e-12);
                prop_assert!(
                    w[1].groups[g].susceptible <= w[0].groups[g].susceptible + 1e-12
                );
            }
        }
    }

    #[test]
    fn shielding_weakly_reduces_force((params, state) in arb_state(), bump in 0usize..3) {
        let base: [f64; 3] = [0.2, 0.5, 0.1];
        let mut raised = base;
        raised[bump] = (raised[bump] + 0.4).min(1.0);
        let f0 = force_of_infection(&state, &base, &params);
        let f1 = force_of_infection(&state, &raised, &params);
        for j in 0..3 {
            prop_assert!(f1[j] <= f0[j] + 1e-15 * f0[j].abs());
        }
    }

    #[test]
    fn detection_weakly_reduces_force((params, state) in arb_state(), which in 0usize..3) {
        let mut tested = params;
        {
            let gp = tested.groups.get_mut(GroupId::ALL[which]);
            gp.undetected_infectious *= 0.5;
            gp.undetected_exposed *= 0.7;
        }
        let levels = [0.1, 0.3, 0.6];
        let f0 = force_of_infection(&state, &levels, &params);
        let f1 = force_of_infection(&state, &levels, &tested);
        for j in 0..3 {
            prop_assert!(f1[j] <= f0[j] + 1e-15 * f0[j].abs());
        }
    }

    #[test]
    fn loss_components_nonnegative_and_consistent(
        (params, state) in arb_state(),
        levels in group_values(0.0, 1.0),
    ) {
        for b in instantaneous_loss(&state, &levels, &params) {
            prop_assert!(b.susceptible_shielding >= 0.0);
            prop_assert!(b.exposed >= 0.0);
            prop_assert!(b.infectious >= 0.0);
            prop_assert!(b.recovered_shielding >= 0.0);
            prop_assert!(b.death_productivity >= 0.0);
            let sum = b.susceptible_shielding + b.exposed + b.infectious
                + b.recovered_shielding + b.death_productivity;
            prop_assert!((b.total - sum).abs() <= 1e-12 * sum.max(1.0));
        }
    }

    #[test]
    fn loss_monotone_in_levels_with_passports(
        (mut params, state) in arb_state(),
        levels in group_values(0.0, 0.6),
        bump in 0usize..3,
    ) {
        for g in GroupId::ALL {
            params.groups.get_mut(g).immunity_passport = 1.0;
        }
        let mut raised = levels;
        raised[bump] = (raised[bump] + 0.4).min(1.0);
        let lo = instantaneous_loss(&state, &levels, &params);
        let hi = instantaneous_loss(&state, &raised, &params);
        for j in 0..3 {
            prop_assert!(hi[j].total >= lo[j].total - 1e-12 * lo[j].total.max(1.0));
        }
    }

    #[test]
    fn contact_scaling_symmetric_and_composable(
        contacts_raw in [0.0..1.5, 0.0..1.5, 0.0..1.5, 0.0..1.5, 0.0..1.5, 0.0..1.5],
        a in 0.0..2.0,
        b in 0.0..2.0,
        pick_mask in 0usize..3,
    ) {
        let [yy, ym, ys, mm, ms, ss] = contacts_raw;
        let m = ContactMatrix::new([[yy, ym, ys], [ym, mm, ms], [ys, ms, ss]]).unwrap();
        let mask = match pick_mask {
            0 => ALL_PAIRS,
            1 => SENIOR_CROSS_PAIRS,
            _ => &[(GroupId::Young, GroupId::Middle)],
        };
        let once = scale_contacts(&scale_contacts(&m, mask, a).unwrap(), mask, b).unwrap();
        let product = scale_contacts(&m, mask, a * b).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                prop_assert!(once.rho[j][k] == once.rho[k][j]);
                // a*(b*x) == (a*b)*x is not exact in floats; demand near-ulp
                let diff = (once.rho[j][k] - product.rho[j][k]).abs();
                prop_assert!(diff <= 1e-15 * product.rho[j][k].abs().max(1e-300));
            }
        }
    }

    #[test]
    fn pareto_filter_is_sound(raw in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..40)) {
        let template = germany_baseline();
        let mk = |(m, e): (f64, f64)| FrontierPoint {
            chi: 0.0,
            mortality: m,
            econ_loss: e,
            econ_loss_pct_gdp: e,
            objective: e,
            icu_penalty: 0.0,
            max_icu: 0.0,
            policy: PolicySchedule::zero(PolicyFamily::Uniform, template.horizon, 1),
            evaluations: 0,
            converged: true,
            seed: 0,
        };
        let points: Vec<FrontierPoint> = raw.iter().copied().map(mk).collect();
        let filtered = pareto_filter(points.clone());
        prop_assert!(!filtered.is_empty());
        // strict ordering
        for w in filtered.windows(2) {
            prop_assert!(w[0].mortality > w[1].mortality);
            prop_assert!(w[0].econ_loss < w[1].econ_loss);
        }
        // no survivor is dominated by any input point
        for s in &filtered {
            for p in &points {
                let dominates = p.mortality <= s.mortality
                    && p.econ_loss <= s.econ_loss
                    && (p.mortality < s.mortality || p.econ_loss < s.econ_loss);
                prop_assert!(!dominates);
            }
        }
        // idempotent
        let twice = pareto_filter(filtered.clone());
        prop_assert_eq!(twice.len(), filtered.len());
    }
}

#[test]
fn schedule_zero_beyond_horizon_exact() {
    let s = PolicySchedule::constant(PolicyFamily::FullyTargeted, TEST_HORIZON, 5, 0.8).unwrap();
    assert_eq!(s.levels_at(TEST_HORIZON), [0.0; 3]);
    assert_eq!(s.levels_at(TEST_HORIZON - 1e-9)[0], 0.8);
}

#[test]
fn early_growth_sign_tracks_calibration_target() {
    // with beta calibrated to a target R0 (pre-distancing contacts, no
    // detection), total E+I grows over days 5..30 iff the target exceeds 1
    for (target, expect_growth) in [(0.8, false), (2.4, true)] {
        let mut p = germany_baseline();
        p.contacts = ContactMatrix::germany_pre_distancing();
        for g in GroupId::ALL {
            let gp = p.groups.get_mut(g);
            gp.undetected_infectious = 1.0;
            gp.undetected_exposed = 1.0;
        }
        p.beta = seirshield::calibrate_beta(&p, target).unwrap();
        p.horizon = TEST_HORIZON;
        let policy = PolicySchedule::zero(PolicyFamily::Uniform, p.horizon, 1);
        let traj = integrate_with(
            &p,
            &policy,
            0.25,
            IntegrateOptions {
                apply_terminal_event: false,
            },
        )
        .unwrap();
        let active = |day: f64| {
            let i = (day / 0.25) as usize;
            let s = &traj.states[i];
            GroupId::ALL
                .iter()
                .map(|&g| s.group(g).exposed + s.group(g).infectious)
                .sum::<f64>()
        };
        let rate = (active(30.0) / active(5.0)).ln() / 25.0;
        assert_eq!(
            rate > 0.0,
            expect_growth,
            "target {target}: growth rate {rate}"
        );
    }
}
