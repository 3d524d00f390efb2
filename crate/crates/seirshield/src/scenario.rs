//! Declarative transforms of a baseline parameter set: testing, tracing,
//! group distancing, working from home, treatment, vaccine timing and the
//! health-system robustness variations, plus the named catalog of every
//! analyzed scenario. Transforms never recalibrate the transmission rate;
//! they change conditions, not the virus.

use crate::model::{
    scale_contacts, validate, ContactMatrix, GroupId, ModelParams, ALL_PAIRS, SENIOR_CROSS_PAIRS,
    WITHIN_SENIOR_PAIRS, WORKING_AGE_PAIRS,
};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("scenario produces invalid parameters: {}", .0.join("; "))]
    InvalidResult(Vec<String>),
    #[error("unknown scenario '{0}'")]
    Unknown(String),
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// One parameter transform. Scale factors are reductions expressed as a
/// remaining fraction in [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transform", content = "args", rename_all = "snake_case")]
pub enum Transform {
    /// Set the undetected-infectious probability for all groups.
    Testing { eta_i: f64 },
    /// Set the undetected-exposed probability for all groups.
    Tracing { eta_e: f64 },
    /// Multiply every contact entry by `factor`.
    UniformDistancing { factor: f64 },
    /// Multiply the young-senior and middle-senior contacts by `factor`.
    TargetedDistancing { factor: f64 },
    /// Multiply the within-senior contact entry by `factor`.
    WithinSeniorDistancing { factor: f64 },
    /// Working from home: `pi1` and `pi2` are contact reductions for the
    /// working-age block and its senior cross-contacts (set `pi_is_factor`
    /// to read them as remaining fractions instead); shielded productivity
    /// becomes `xi_new` for all groups.
    Wfh {
        pi1: f64,
        pi2: f64,
        xi_new: f64,
        #[serde(default)]
        pi_is_factor: bool,
    },
    /// Lower the senior baseline death rate by this fraction.
    Treatment { reduction: f64 },
    /// Vaccine and cure arrive after this many days.
    VaccineAt { days: f64 },
    /// Set the ICU-congestion mortality slope.
    SetLambda { lambda: f64 },
    /// Impose a hard ICU-load cap.
    IcuCap { cap: f64 },
    /// Set the immunity-passport share for all groups.
    Immunity { kappa: f64 },
    /// Set the senior baseline death rate directly.
    SeniorMortality { rate: f64 },
    /// Set the young-senior and middle-senior contact entries to an
    /// absolute value.
    SetSeniorContacts { value: f64 },
    /// Replace the whole contact matrix.
    SetContacts { rho: [[f64; 3]; 3] },
}

fn unit(name: &str, x: f64) -> Result<(), ScenarioError> {
    if (0.0..=1.0).contains(&x) && x.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::InvalidTransform(format!(
            "{name} must be in [0, 1], got {x}"
        )))
    }
}

impl Transform {
    fn apply(&self, p: &mut ModelParams) -> Result<(), ScenarioError> {
        let scale = |p: &mut ModelParams, mask, factor: f64| -> Result<(), ScenarioError> {
            unit("factor", factor)?;
            p.contacts = scale_contacts(&p.contacts, mask, factor)
                .map_err(|e| ScenarioError::InvalidTransform(e.to_string()))?;
            Ok(())
        };
        match *self {
            Transform::Testing { eta_i } => {
                unit("eta_i", eta_i)?;
                for g in GroupId::ALL {
                    p.groups.get_mut(g).undetected_infectious = eta_i;
                }
            }
            Transform::Tracing { eta_e } => {
                unit("eta_e", eta_e)?;
                for g in GroupId::ALL {
                    p.groups.get_mut(g).undetected_exposed = eta_e;
                }
            }
            Transform::UniformDistancing { factor } => scale(p, ALL_PAIRS, factor)?,
            Transform::TargetedDistancing { factor } => scale(p, SENIOR_CROSS_PAIRS, factor)?,
            Transform::WithinSeniorDistancing { factor } => scale(p, WITHIN_SENIOR_PAIRS, factor)?,
            Transform::Wfh {
                pi1,
                pi2,
                xi_new,
                pi_is_factor,
            } => {
                unit("pi1", pi1)?;
                unit("pi2", pi2)?;
                unit("xi_new", xi_new)?;
                let (f1, f2) = if pi_is_factor {
                    (pi1, pi2)
                } else {
                    (1.0 - pi1, 1.0 - pi2)
                };
                scale(p, WORKING_AGE_PAIRS, f1)?;
                scale(p, SENIOR_CROSS_PAIRS, f2)?;
                for g in GroupId::ALL {
                    p.groups.get_mut(g).shielded_productivity = xi_new;
                }
            }
            Transform::Treatment { reduction } => {
                unit("reduction", reduction)?;
                p.groups.senior.baseline_death_rate *= 1.0 - reduction;
            }
            Transform::VaccineAt { days } => {
                if days <= 0.0 || !days.is_finite() {
                    return Err(ScenarioError::InvalidTransform(format!(
                        "vaccine arrival must be > 0 days, got {days}"
                    )));
                }
                p.horizon = days;
            }
            Transform::SetLambda { lambda } => {
                if lambda < 0.0 || !lambda.is_finite() {
                    return Err(ScenarioError::InvalidTransform(format!(
                        "lambda must be >= 0, got {lambda}"
                    )));
                }
                p.mortality_lambda = lambda;
            }
            Transform::IcuCap { cap } => {
                if cap <= 0.0 || !cap.is_finite() {
                    return Err(ScenarioError::InvalidTransform(format!(
                        "icu cap must be > 0, got {cap}"
                    )));
                }
                p.icu_cap = Some(cap);
            }
            Transform::Immunity { kappa } => {
                unit("kappa", kappa)?;
                for g in GroupId::ALL {
                    p.groups.get_mut(g).immunity_passport = kappa;
                }
            }
            Transform::SeniorMortality { rate } => {
                if rate < 0.0 || !rate.is_finite() {
                    return Err(ScenarioError::InvalidTransform(format!(
                        "senior mortality must be >= 0, got {rate}"
                    )));
                }
                p.groups.senior.baseline_death_rate = rate;
            }
            Transform::SetSeniorContacts { value } => {
                if value < 0.0 || !value.is_finite() {
                    return Err(ScenarioError::InvalidTransform(format!(
                        "contact value must be >= 0, got {value}"
                    )));
                }
                let mut rho = p.contacts.rho;
                for &(a, b) in SENIOR_CROSS_PAIRS {
                    rho[a.index()][b.index()] = value;
                    rho[b.index()][a.index()] = value;
                }
                p.contacts = ContactMatrix { rho };
            }
            Transform::SetContacts { rho } => {
                p.contacts = ContactMatrix::new(rho)
                    .map_err(|e| ScenarioError::InvalidTransform(e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// An ordered list of transforms; order is significant and preserved.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScenarioSpec {
    pub transforms: Vec<Transform>,
}

impl ScenarioSpec {
    pub fn new(transforms: Vec<Transform>) -> Self {
        ScenarioSpec { transforms }
    }
}

/// Applies the transforms left to right and re-validates the result.
/// The input is untouched.
pub fn apply_scenario(
    base: &ModelParams,
    spec: &ScenarioSpec,
) -> Result<ModelParams, ScenarioError> {
    let mut params = *base;
    for t in &spec.transforms {
        t.apply(&mut params)?;
    }
    let violations = validate(&params);
    if violations.is_empty() {
        Ok(params)
    } else {
        Err(ScenarioError::InvalidResult(violations))
    }
}

/// Every named scenario from the analysis, in presentation order.
pub fn scenario_catalog() -> Vec<(String, ScenarioSpec)> {
    use Transform::*;
    let mut list: Vec<(String, ScenarioSpec)> = Vec::new();
    let mut add = |name: &str, transforms: Vec<Transform>| {
        list.push((name.to_string(), ScenarioSpec::new(transforms)));
    };

    add("baseline", vec![]);
    for pct in [10, 20, 30, 40] {
        add(
            &format!("uniform_distancing_{pct}"),
            vec![UniformDistancing {
                factor: 1.0 - pct as f64 / 100.0,
            }],
        );
    }
    for pct in [10, 30, 50] {
        add(
            &format!("targeted_distancing_{pct}"),
            vec![TargetedDistancing {
                factor: 1.0 - pct as f64 / 100.0,
            }],
        );
    }
    for eta in ["0.9", "0.8", "0.7"] {
        add(
            &format!("testing_{eta}"),
            vec![Testing {
                eta_i: eta.parse().unwrap(),
            }],
        );
    }
    for eta in ["0.9", "0.8", "0.7"] {
        add(
            &format!("tracing_{eta}"),
            vec![Tracing {
                eta_e: eta.parse().unwrap(),
            }],
        );
    }
    for (eta_i, eta_e) in [("0.8", "0.8"), ("0.7", "0.8"), ("0.7", "0.7")] {
        add(
            &format!("test_and_trace_{eta_i}_{eta_e}"),
            vec![
                Testing {
                    eta_i: eta_i.parse().unwrap(),
                },
                Tracing {
                    eta_e: eta_e.parse().unwrap(),
                },
            ],
        );
    }
    add(
        "wfh_v1",
        vec![Wfh {
            pi1: 0.20,
            pi2: 0.05,
            xi_new: 0.4,
            pi_is_factor: false,
        }],
    );
    add(
        "wfh_v2",
        vec![Wfh {
            pi1: 0.30,
            pi2: 0.10,
            xi_new: 0.4,
            pi_is_factor: false,
        }],
    );
    // "contacts with seniors at 0.2" is read as an absolute entry value,
    // not a scale factor; see the catalog documentation.
    add(
        "comprehensive",
        vec![
            Testing { eta_i: 0.7 },
            Tracing { eta_e: 0.8 },
            SetSeniorContacts { value: 0.2 },
        ],
    );
    add(
        "comprehensive_wfh",
        vec![
            Testing { eta_i: 0.7 },
            Tracing { eta_e: 0.8 },
            SetSeniorContacts { value: 0.2 },
            Wfh {
                pi1: 0.20,
                pi2: 0.05,
                xi_new: 0.4,
                pi_is_factor: false,
            },
        ],
    );
    for pct in [30, 50] {
        add(
            &format!("treatment_{pct}"),
            vec![Treatment {
                reduction: pct as f64 / 100.0,
            }],
        );
    }
    for days in [364, 182] {
        add(
            &format!("vaccine_{days}"),
            vec![VaccineAt { days: days as f64 }],
        );
    }
    for lambda in ["0.2", "0.4", "0.8", "1.0"] {
        add(
            &format!("lambda_{lambda}"),
            vec![SetLambda {
                lambda: lambda.parse().unwrap(),
            }],
        );
    }
    for cap in ["0.02", "0.03", "0.04"] {
        add(
            &format!("icu_cap_{cap}"),
            vec![IcuCap {
                cap: cap.parse().unwrap(),
            }],
        );
    }
    // reduced voluntary distancing: rebuild contacts from the
    // pre-pandemic matrix at the given scale
    for scale in ["0.9", "1.0"] {
        let s: f64 = scale.parse().unwrap();
        let rho = scale_contacts(&ContactMatrix::germany_pre_distancing(), ALL_PAIRS, s)
            .expect("catalog contact scale")
            .rho;
        add(&format!("rho_{scale}"), vec![SetContacts { rho }]);
    }
    add("kappa_0", vec![Immunity { kappa: 0.0 }]);
    add(
        "senior_mortality_0.12",
        vec![SeniorMortality { rate: 0.12 }],
    );
    add(
        "gd_uniform40_treatment50",
        vec![
            UniformDistancing { factor: 0.6 },
            Treatment { reduction: 0.5 },
        ],
    );
    add(
        "gd_targeted50_treatment50",
        vec![
            TargetedDistancing { factor: 0.5 },
            Treatment { reduction: 0.5 },
        ],
    );
    list
}

/// Looks a scenario up by catalog name.
pub fn lookup(name: &str) -> Result<ScenarioSpec, ScenarioError> {
    scenario_catalog()
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, s)| s)
        .ok_or_else(|| ScenarioError::Unknown(name.to_string()))
}

/// Loads a scenario file: a JSON list of `{"transform": ..., "args": ...}`
/// entries.
pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, ScenarioError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Resolves a CLI scenario argument: catalog name first, then a file path.
pub fn resolve(arg: &str) -> Result<ScenarioSpec, ScenarioError> {
    match lookup(arg) {
        Ok(s) => Ok(s),
        Err(ScenarioError::Unknown(_)) if Path::new(arg).exists() => load_scenario(Path::new(arg)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::germany_baseline;

    #[test]
    fn empty_spec_is_identity() {
        let base = germany_baseline();
        let out = apply_scenario(&base, &ScenarioSpec::default()).unwrap();
        assert_eq!(out, base);
    }

    #[test]
    fn test_and_trace_sets_both_probabilities() {
        let base = germany_baseline();
        let spec = lookup("test_and_trace_0.8_0.8").unwrap();
        let out = apply_scenario(&base, &spec).unwrap();
        for g in GroupId::ALL {
            assert_eq!(out.groups[g].undetected_infectious, 0.8);
            assert_eq!(out.groups[g].undetected_exposed, 0.8);
        }
    }

    #[test]
    fn comprehensive_matches_published_values() {
        let base = germany_baseline();
        let out = apply_scenario(&base, &lookup("comprehensive_wfh").unwrap()).unwrap();
        for g in GroupId::ALL {
            assert_eq!(out.groups[g].undetected_infectious, 0.7);
            assert_eq!(out.groups[g].undetected_exposed, 0.8);
            assert_eq!(out.groups[g].shielded_productivity, 0.4);
        }
        // seniors' cross contacts pinned to 0.2, then reduced 5% by WFH
        assert!((out.contacts.get(GroupId::Young, GroupId::Senior) - 0.2 * 0.95).abs() < 1e-15);
        // working-age block reduced 20%
        assert!((out.contacts.get(GroupId::Young, GroupId::Young) - 0.75 * 0.8).abs() < 1e-15);
        assert!((out.contacts.get(GroupId::Young, GroupId::Middle) - 0.375 * 0.8).abs() < 1e-15);
        // within-senior untouched
        assert_eq!(out.contacts.get(GroupId::Senior, GroupId::Senior), 0.375);
    }

    #[test]
    fn wfh_factor_switch_flips_interpretation() {
        let base = germany_baseline();
        let reduction = ScenarioSpec::new(vec![Transform::Wfh {
            pi1: 0.2,
            pi2: 0.05,
            xi_new: 0.4,
            pi_is_factor: false,
        }]);
        let factor = ScenarioSpec::new(vec![Transform::Wfh {
            pi1: 0.2,
            pi2: 0.05,
            xi_new: 0.4,
            pi_is_factor: true,
        }]);
        let a = apply_scenario(&base, &reduction).unwrap();
        let b = apply_scenario(&base, &factor).unwrap();
        assert!((a.contacts.get(GroupId::Young, GroupId::Young) - 0.75 * 0.8).abs() < 1e-15);
        assert!((b.contacts.get(GroupId::Young, GroupId::Young) - 0.75 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn treatment_halves_senior_death_rate() {
        let base = germany_baseline();
        let out = apply_scenario(&base, &lookup("treatment_50").unwrap()).unwrap();
        assert!((out.groups.senior.baseline_death_rate - 0.03).abs() < 1e-15);
        let out30 = apply_scenario(&base, &lookup("treatment_30").unwrap()).unwrap();
        assert!((out30.groups.senior.baseline_death_rate - 0.042).abs() < 1e-15);
    }

    #[test]
    fn vaccine_timing_sets_horizon() {
        let base = germany_baseline();
        assert_eq!(
            apply_scenario(&base, &lookup("vaccine_182").unwrap())
                .unwrap()
                .horizon,
            182.0
        );
        assert_eq!(
            apply_scenario(&base, &lookup("vaccine_364").unwrap())
                .unwrap()
                .horizon,
            364.0
        );
    }

    #[test]
    fn rho_scenarios_rebuild_from_pre_distancing() {
        let base = germany_baseline();
        let full = apply_scenario(&base, &lookup("rho_1.0").unwrap()).unwrap();
        assert_eq!(full.contacts, ContactMatrix::germany_pre_distancing());
        let ninety = apply_scenario(&base, &lookup("rho_0.9").unwrap()).unwrap();
        assert!((ninety.contacts.get(GroupId::Young, GroupId::Young) - 0.9).abs() < 1e-15);
        // transmission rate untouched: scenarios change conditions only
        assert_eq!(full.beta, base.beta);
    }

    #[test]
    fn robustness_scenarios() {
        let base = germany_baseline();
        let k0 = apply_scenario(&base, &lookup("kappa_0").unwrap()).unwrap();
        for g in GroupId::ALL {
            assert_eq!(k0.groups[g].immunity_passport, 0.0);
        }
        let sm = apply_scenario(&base, &lookup("senior_mortality_0.12").unwrap()).unwrap();
        assert_eq!(sm.groups.senior.baseline_death_rate, 0.12);
        let lam = apply_scenario(&base, &lookup("lambda_0.2").unwrap()).unwrap();
        assert_eq!(lam.mortality_lambda, 0.2);
        let cap = apply_scenario(&base, &lookup("icu_cap_0.02").unwrap()).unwrap();
        assert_eq!(cap.icu_cap, Some(0.02));
    }

    #[test]
    fn whole_catalog_validates_against_baseline() {
        let base = germany_baseline();
        for (name, spec) in scenario_catalog() {
            let result = apply_scenario(&base, &spec);
            assert!(result.is_ok(), "catalog entry {name} failed: {result:?}");
        }
    }

    #[test]
    fn disjoint_masks_commute_and_shared_masks_multiply() {
        let base = germany_baseline();
        let wfh = Transform::Wfh {
            pi1: 0.2,
            pi2: 0.05,
            xi_new: 0.4,
            pi_is_factor: false,
        };
        let gd = Transform::TargetedDistancing { factor: 0.5 };
        let ab = apply_scenario(&base, &ScenarioSpec::new(vec![wfh.clone(), gd.clone()])).unwrap();
        let ba = apply_scenario(&base, &ScenarioSpec::new(vec![gd, wfh])).unwrap();
        assert_eq!(ab.contacts, ba.contacts);
        // shared senior-cross entries carry the product of both factors
        let expect = 0.300 * 0.95 * 0.5;
        assert!((ab.contacts.get(GroupId::Young, GroupId::Senior) - expect).abs() < 1e-15);
    }

    #[test]
    fn transform_bounds_checked() {
        let base = germany_baseline();
        let bad = ScenarioSpec::new(vec![Transform::UniformDistancing { factor: 1.5 }]);
        assert!(matches!(
            apply_scenario(&base, &bad),
            Err(ScenarioError::InvalidTransform(_))
        ));
        let bad_t = ScenarioSpec::new(vec![Transform::VaccineAt { days: 0.0 }]);
        assert!(apply_scenario(&base, &bad_t).is_err());
    }

    #[test]
    fn unknown_name_is_reported() {
        assert!(matches!(
            lookup("lockdown_9000"),
            Err(ScenarioError::Unknown(_))
        ));
    }

    #[test]
    fn scenario_file_roundtrip() {
        let spec = ScenarioSpec::new(vec![
            Transform::Testing { eta_i: 0.7 },
            Transform::Wfh {
                pi1: 0.2,
                pi2: 0.05,
                xi_new: 0.4,
                pi_is_factor: false,
            },
        ]);
        let text = serde_json::to_string(&spec).unwrap();
        assert!(
            text.starts_with('['),
            "scenario files are bare lists: {text}"
        );
        let back: ScenarioSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let named: ScenarioSpec =
            serde_json::from_str(r#"[{"transform": "testing", "args": {"eta_i": 0.7}}]"#).unwrap();
        assert_eq!(named.transforms.len(), 1);
    }
}
