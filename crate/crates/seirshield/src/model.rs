//! Parameter and state types for the three-group epidemic/economy model:
//! age groups, contact matrix, per-group rates, validation and the
//! calibrated German baseline. Everything here is an immutable value type;
//! all other modules consume these.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Index;
use std::path::Path;
use thiserror::Error;

pub const N_GROUPS: usize = 3;
pub const DAYS_PER_YEAR: f64 = 365.0;

/// The three adult age groups. Ordering is fixed (young=0, middle=1,
/// senior=2) and stable across arrays, CSV columns and JSON output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupId {
    Young,
    Middle,
    Senior,
}

impl GroupId {
    pub const ALL: [GroupId; 3] = [GroupId::Young, GroupId::Middle, GroupId::Senior];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupId::Young => "young",
            GroupId::Middle => "middle",
            GroupId::Senior => "senior",
        }
    }

    /// Single-letter suffix used in CSV headers (`S_y`, `S_m`, `S_s`).
    pub fn short(self) -> &'static str {
        match self {
            GroupId::Young => "y",
            GroupId::Middle => "m",
            GroupId::Senior => "s",
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("contact scale factor must be nonnegative, got {0}")]
    NegativeFactor(f64),
    #[error("contact matrix is not symmetric at ({0},{1})")]
    Asymmetric(usize, usize),
    #[error("contact matrix entry ({0},{1}) is negative")]
    NegativeEntry(usize, usize),
}

/// Symmetric nonnegative matrix of contact rates between groups,
/// a dimensionless multiplier on the transmission rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactMatrix {
    pub rho: [[f64; 3]; 3],
}

impl ContactMatrix {
    pub fn new(rho: [[f64; 3]; 3]) -> Result<Self, ModelError> {
        for j in 0..3 {
            for k in 0..3 {
                if rho[j][k] < 0.0 || !rho[j][k].is_finite() {
                    return Err(ModelError::NegativeEntry(j, k));
                }
                if rho[j][k] != rho[k][j] {
                    return Err(ModelError::Asymmetric(j, k));
                }
            }
        }
        Ok(ContactMatrix { rho })
    }

    /// Pre-pandemic contact rates estimated from UK social-interaction
    /// data; the baseline calibration target is built on this matrix.
    pub fn germany_pre_distancing() -> Self {
        ContactMatrix {
            rho: [[1.0, 0.5, 0.4], [0.5, 0.6, 0.4], [0.4, 0.4, 0.5]],
        }
    }

    pub fn get(&self, j: GroupId, k: GroupId) -> f64 {
        self.rho[j.index()][k.index()]
    }
}

/// All unordered group pairs, i.e. every entry of the matrix.
pub const ALL_PAIRS: &[(GroupId, GroupId)] = &[
    (GroupId::Young, GroupId::Young),
    (GroupId::Young, GroupId::Middle),
    (GroupId::Young, GroupId::Senior),
    (GroupId::Middle, GroupId::Middle),
    (GroupId::Middle, GroupId::Senior),
    (GroupId::Senior, GroupId::Senior),
];

/// Cross-group contacts with seniors: (young, senior) and (middle, senior).
pub const SENIOR_CROSS_PAIRS: &[(GroupId, GroupId)] = &[
    (GroupId::Young, GroupId::Senior),
    (GroupId::Middle, GroupId::Senior),
];

/// Contacts within the senior group only.
pub const WITHIN_SENIOR_PAIRS: &[(GroupId, GroupId)] = &[(GroupId::Senior, GroupId::Senior)];

/// Within- and between-group contacts of the two working-age groups.
pub const WORKING_AGE_PAIRS: &[(GroupId, GroupId)] = &[
    (GroupId::Young, GroupId::Young),
    (GroupId::Middle, GroupId::Middle),
    (GroupId::Young, GroupId::Middle),
];

/// Multiplies the masked entries of `m` by `factor`, leaving the rest
/// unchanged. The mask is symmetrized, so the result stays symmetric.
pub fn scale_contacts(
    m: &ContactMatrix,
    mask: &[(GroupId, GroupId)],
    factor: f64,
) -> Result<ContactMatrix, ModelError> {
    if factor < 0.0 || !factor.is_finite() {
        return Err(ModelError::NegativeFactor(factor));
    }
    let mut hit = [[false; 3]; 3];
    for &(j, k) in mask {
        hit[j.index()][k.index()] = true;
        hit[k.index()][j.index()] = true;
    }
    let mut rho = m.rho;
    for j in 0..3 {
        for k in 0..3 {
            if hit[j][k] {
                rho[j][k] *= factor;
            }
        }
    }
    Ok(ContactMatrix { rho })
}

/// Epidemiological and economic constants for one age group.
///
/// Rates are per day; shares and probabilities are dimensionless.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    /// Fraction of the total adult population in this group.
    pub population_share: f64,
    /// Per-capita daily income relative to the young group.
    pub income: f64,
    /// Discounted remaining employment time lost on death, in days.
    pub remaining_employment: f64,
    /// Fraction of infectious individuals needing intensive care.
    pub icu_share: f64,
    /// Daily death rate of ICU patients at zero congestion.
    pub baseline_death_rate: f64,
    /// Exit rate from the latent (exposed) state.
    pub latent_exit: f64,
    /// Exit rate from the infectious state.
    pub infectious_exit: f64,
    /// Enforcement leakage: shielding at level L reduces interaction by
    /// a factor (1 - leakage * L) only.
    pub shielding_leakage: f64,
    /// Productivity retained while shielded (work from home etc.).
    pub shielded_productivity: f64,
    /// Probability that an infectious individual evades detection and
    /// isolation (testing lever; 1 = no testing).
    pub undetected_infectious: f64,
    /// Probability that an exposed individual evades detection and
    /// isolation (contact-tracing lever; 1 = no tracing).
    pub undetected_exposed: f64,
    /// Share of recovered individuals exempted from shielding.
    pub immunity_passport: f64,
}

/// Per-group parameter table keyed by age group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Groups {
    pub young: GroupParams,
    pub middle: GroupParams,
    pub senior: GroupParams,
}

impl Index<GroupId> for Groups {
    type Output = GroupParams;

    fn index(&self, g: GroupId) -> &GroupParams {
        match g {
            GroupId::Young => &self.young,
            GroupId::Middle => &self.middle,
            GroupId::Senior => &self.senior,
        }
    }
}

impl Groups {
    pub fn get_mut(&mut self, g: GroupId) -> &mut GroupParams {
        match g {
            GroupId::Young => &mut self.young,
            GroupId::Middle => &mut self.middle,
            GroupId::Senior => &mut self.senior,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (GroupId, &GroupParams)> {
        GroupId::ALL.iter().map(move |&g| (g, &self[g]))
    }
}

/// Complete model configuration: group table, contacts, transmission and
/// policy-environment constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub groups: Groups,
    pub contacts: ContactMatrix,
    /// Transmission rate per contact-unit per day.
    pub beta: f64,
    /// Matching elasticity; 2 is the quadratic case where the congestion
    /// factor is identically 1.
    pub matching_alpha: f64,
    /// Slope by which ICU death rates rise with total ICU load.
    pub mortality_lambda: f64,
    /// Optional hard cap on total ICU load (population fraction);
    /// `None` means unconstrained.
    pub icu_cap: Option<f64>,
    /// Days until a vaccine and cure arrive.
    pub horizon: f64,
    /// Fraction of each group initially placed in the exposed state.
    pub initial_exposed_share: f64,
}

pub const GERMANY_TARGET_R0: f64 = 2.4;
/// Voluntary-distancing rescaling applied to the pre-pandemic contact
/// matrix for baseline runs.
pub const GERMANY_CONTACT_SCALE: f64 = 0.75;

/// Calibrated German baseline.
///
/// Population shares, incomes, remaining employment, death rates, the
/// congestion slope and the contact matrix follow the published German
/// parameterization; the transmission rate is calibrated so the basic
/// reproduction number on the pre-distancing contacts equals 2.4.
///
/// `icu_share` (0.002/0.02/0.08), `shielding_leakage` (0.75) and
/// `initial_exposed_share` (0.003) are documented placeholders, not
/// published values; override them in a config file for any quantitative
/// claim that depends on them.
pub fn germany_baseline() -> ModelParams {
    let common =
        |population_share, income, delta_years, icu_share, baseline_death_rate| GroupParams {
            population_share,
            income,
            remaining_employment: delta_years * DAYS_PER_YEAR,
            icu_share,
            baseline_death_rate,
            latent_exit: 1.0 / 6.0,
            infectious_exit: 1.0 / 9.0,
            shielding_leakage: 0.75,
            shielded_productivity: 0.3,
            undetected_infectious: 0.9,
            undetected_exposed: 1.0,
            immunity_passport: 1.0,
        };
    let pre = ContactMatrix::germany_pre_distancing();
    let mut params = ModelParams {
        groups: Groups {
            young: common(0.46, 1.0, 32.43, 0.002, 0.001),
            middle: common(0.28, 1.0, 10.44, 0.02, 0.01),
            senior: common(0.26, 0.085, 2.50, 0.08, 0.06),
        },
        contacts: pre,
        beta: 1.0,
        matching_alpha: 2.0,
        mortality_lambda: 0.6,
        icu_cap: None,
        horizon: 546.0,
        initial_exposed_share: 0.003,
    };
    params.beta = crate::calibration::calibrate_beta(&params, GERMANY_TARGET_R0)
        .expect("baseline calibration");
    params.contacts =
        scale_contacts(&pre, ALL_PAIRS, GERMANY_CONTACT_SCALE).expect("baseline contacts");
    params
}

/// Checks every type invariant and returns one human-readable line per
/// violation; an empty list means the parameters are valid. Never aborts.
pub fn validate(params: &ModelParams) -> Vec<String> {
    let mut v = Vec::new();
    let share_sum: f64 = GroupId::ALL
        .iter()
        .map(|&g| params.groups[g].population_share)
        .sum();
    if (share_sum - 1.0).abs() > 1e-12 {
        v.push(format!("population shares sum to {share_sum}"));
    }
    for (g, gp) in params.groups.iter() {
        let check_unit = |v: &mut Vec<String>, name: &str, x: f64| {
            if !(0.0..=1.0).contains(&x) || !x.is_finite() {
                v.push(format!("{name}[{g}] must be in [0, 1]"));
            }
        };
        check_unit(&mut v, "population_share", gp.population_share);
        check_unit(&mut v, "icu_share", gp.icu_share);
        check_unit(&mut v, "shielded_productivity", gp.shielded_productivity);
        check_unit(&mut v, "undetected_infectious", gp.undetected_infectious);
        check_unit(&mut v, "undetected_exposed", gp.undetected_exposed);
        check_unit(&mut v, "immunity_passport", gp.immunity_passport);
        if gp.income < 0.0 || !gp.income.is_finite() {
            v.push(format!("income[{g}] must be >= 0"));
        }
        if gp.remaining_employment < 0.0 || !gp.remaining_employment.is_finite() {
            v.push(format!("remaining_employment[{g}] must be >= 0"));
        }
        if gp.baseline_death_rate < 0.0 || !gp.baseline_death_rate.is_finite() {
            v.push(format!("baseline_death_rate[{g}] must be >= 0"));
        }
        if gp.latent_exit < 0.0 || !gp.latent_exit.is_finite() {
            v.push(format!("latent_exit[{g}] must be >= 0"));
        }
        if gp.infectious_exit <= 0.0 || !gp.infectious_exit.is_finite() {
            v.push(format!("infectious_exit[{g}] must be > 0"));
        }
        // a baseline death rate above the infectious exit rate is allowed
        // (the senior-mortality robustness check uses one); the runtime
        // clamp keeps the implied recovery rate nonnegative
        if gp.shielding_leakage <= 0.0 || gp.shielding_leakage.is_nan() {
            v.push(format!("shielding_leakage[{g}] must be > 0"));
        }
        if gp.shielding_leakage >= 1.0 || gp.shielding_leakage.is_nan() {
            v.push(format!("shielding_leakage[{g}] must be < 1"));
        }
    }
    for j in 0..3 {
        for k in 0..3 {
            let x = params.contacts.rho[j][k];
            if x < 0.0 || !x.is_finite() {
                v.push(format!("contacts.rho[{j}][{k}] must be >= 0"));
            }
            if k > j && params.contacts.rho[j][k] != params.contacts.rho[k][j] {
                v.push(format!(
                    "contacts.rho[{j}][{k}] must equal contacts.rho[{k}][{j}]"
                ));
            }
        }
    }
    if params.beta <= 0.0 || !params.beta.is_finite() {
        v.push("beta must be > 0".to_string());
    }
    if params.matching_alpha < 2.0 || !params.matching_alpha.is_finite() {
        v.push("matching_alpha must be >= 2".to_string());
    }
    if params.mortality_lambda < 0.0 || !params.mortality_lambda.is_finite() {
        v.push("mortality_lambda must be >= 0".to_string());
    }
    if let Some(cap) = params.icu_cap {
        if cap <= 0.0 || !cap.is_finite() {
            v.push("icu_cap must be > 0".to_string());
        }
    }
    if params.horizon <= 0.0 || !params.horizon.is_finite() {
        v.push("horizon must be > 0".to_string());
    }
    if !(0.0..=0.05).contains(&params.initial_exposed_share) {
        v.push("initial_exposed_share must be in [0, 0.05]".to_string());
    }
    v
}

/// One group's compartment occupancies, as fractions of the total
/// population (so group totals sum to the group's population share).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Compartments {
    pub susceptible: f64,
    pub exposed: f64,
    pub infectious: f64,
    pub recovered: f64,
    pub dead: f64,
}

impl Compartments {
    pub fn total(&self) -> f64 {
        self.susceptible + self.exposed + self.infectious + self.recovered + self.dead
    }
}

/// Full epidemic state plus the economic loss accumulated so far
/// (dimensionless income units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelState {
    pub groups: [Compartments; 3],
    pub accumulated_loss: f64,
}

impl ModelState {
    /// State at t=0: the configured exposed share of each group in E,
    /// the rest susceptible.
    pub fn initial(params: &ModelParams) -> Self {
        let e0 = params.initial_exposed_share;
        let mut groups = [Compartments::default(); 3];
        for g in GroupId::ALL {
            let n = params.groups[g].population_share;
            groups[g.index()] = Compartments {
                susceptible: n * (1.0 - e0),
                exposed: n * e0,
                ..Default::default()
            };
        }
        ModelState {
            groups,
            accumulated_loss: 0.0,
        }
    }

    /// Fully susceptible state (ignores the configured exposed share).
    pub fn disease_free(params: &ModelParams) -> Self {
        let mut groups = [Compartments::default(); 3];
        for g in GroupId::ALL {
            groups[g.index()].susceptible = params.groups[g].population_share;
        }
        ModelState {
            groups,
            accumulated_loss: 0.0,
        }
    }

    pub fn group(&self, g: GroupId) -> &Compartments {
        &self.groups[g.index()]
    }

    pub fn total_dead(&self) -> f64 {
        self.groups.iter().map(|c| c.dead).sum()
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid parameters: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialGroup {
    population_share: Option<f64>,
    income: Option<f64>,
    remaining_employment: Option<f64>,
    icu_share: Option<f64>,
    baseline_death_rate: Option<f64>,
    latent_exit: Option<f64>,
    infectious_exit: Option<f64>,
    shielding_leakage: Option<f64>,
    shielded_productivity: Option<f64>,
    undetected_infectious: Option<f64>,
    undetected_exposed: Option<f64>,
    immunity_passport: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialGroups {
    young: Option<PartialGroup>,
    middle: Option<PartialGroup>,
    senior: Option<PartialGroup>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialContacts {
    rho: [[f64; 3]; 3],
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialParams {
    groups: Option<PartialGroups>,
    contacts: Option<PartialContacts>,
    beta: Option<f64>,
    matching_alpha: Option<f64>,
    mortality_lambda: Option<f64>,
    icu_cap: Option<f64>,
    horizon: Option<f64>,
    initial_exposed_share: Option<f64>,
}

fn merge_group(base: &mut GroupParams, p: PartialGroup) {
    macro_rules! take {
        ($($field:ident),*) => {
            $(if let Some(x) = p.$field { base.$field = x; })*
        };
    }
    take!(
        population_share,
        income,
        remaining_employment,
        icu_share,
        baseline_death_rate,
        latent_exit,
        infectious_exit,
        shielding_leakage,
        shielded_productivity,
        undetected_infectious,
        undetected_exposed,
        immunity_passport
    );
}

/// Parses a JSON parameter tree. Field names mirror [`ModelParams`];
/// missing fields fall back to the German baseline, unknown fields are
/// rejected, and the merged result must pass [`validate`].
pub fn params_from_json(text: &str) -> Result<ModelParams, ConfigError> {
    let partial: PartialParams = serde_json::from_str(text)?;
    let mut params = germany_baseline();
    if let Some(gs) = partial.groups {
        if let Some(g) = gs.young {
            merge_group(&mut params.groups.young, g);
        }
        if let Some(g) = gs.middle {
            merge_group(&mut params.groups.middle, g);
        }
        if let Some(g) = gs.senior {
            merge_group(&mut params.groups.senior, g);
        }
    }
    if let Some(c) = partial.contacts {
        params.contacts = ContactMatrix { rho: c.rho };
    }
    macro_rules! take {
        ($($field:ident),*) => {
            $(if let Some(x) = partial.$field { params.$field = x; })*
        };
    }
    take!(
        beta,
        matching_alpha,
        mortality_lambda,
        horizon,
        initial_exposed_share
    );
    if let Some(cap) = partial.icu_cap {
        params.icu_cap = Some(cap);
    }
    let violations = validate(&params);
    if violations.is_empty() {
        Ok(params)
    } else {
        Err(ConfigError::Invalid(violations))
    }
}

/// Loads a parameter file; see [`params_from_json`].
pub fn load_params(path: &Path) -> Result<ModelParams, ConfigError> {
    params_from_json(&std::fs::read_to_string(path)?)
}
