//! Shielding-policy schedules, the planner objective over one trajectory,
//! a seeded differential-evolution search with coordinate polish, frontier
//! sweeps over the life weight, Pareto filtering, and the mortality-capped
//! (safety-focused) solve.

use crate::dynamics::{
    self, clamp_negative, icu_load, pack, rk4_step, unpack, vaccine_terminal_vec, DynamicsError,
    StepGrid, CLAMP_MASS_BUDGET, ICU_PENALTY_WEIGHT,
};
use crate::econ;
use crate::model::{GroupId, ModelParams, ModelState};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("shielding levels must lie in [0, 1]")]
    LevelOutOfRange,
    #[error("policy needs at least one knot and one channel")]
    EmptySchedule,
    #[error("channel count {got} does not match family ({want})")]
    ChannelMismatch { got: usize, want: usize },
    #[error("channels must share one knot count")]
    RaggedChannels,
    #[error("search dimension {0} exceeds the 256 limit")]
    DimensionOverflow(usize),
    #[error("chi grid must be non-empty and sorted ascending")]
    BadChiGrid,
    #[error("mortality cap {cap} is infeasible: full shielding still yields {floor}")]
    InfeasibleCap { cap: f64, floor: f64 },
    #[error(transparent)]
    Integrate(#[from] DynamicsError),
}

/// Targeting family: how many independent shielding channels a schedule
/// has and which groups share one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyFamily {
    /// One blanket schedule for all groups.
    Uniform,
    /// One schedule for young+middle, one for seniors.
    SemiTargeted,
    /// One schedule per group.
    FullyTargeted,
}

impl PolicyFamily {
    pub const ALL: [PolicyFamily; 3] = [
        PolicyFamily::Uniform,
        PolicyFamily::SemiTargeted,
        PolicyFamily::FullyTargeted,
    ];

    pub fn channels(self) -> usize {
        match self {
            PolicyFamily::Uniform => 1,
            PolicyFamily::SemiTargeted => 2,
            PolicyFamily::FullyTargeted => 3,
        }
    }

    pub fn channel_of(self, g: GroupId) -> usize {
        match self {
            PolicyFamily::Uniform => 0,
            PolicyFamily::SemiTargeted => match g {
                GroupId::Senior => 1,
                _ => 0,
            },
            PolicyFamily::FullyTargeted => g.index(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyFamily::Uniform => "uniform",
            PolicyFamily::SemiTargeted => "semi_targeted",
            PolicyFamily::FullyTargeted => "fully_targeted",
        }
    }
}

impl std::str::FromStr for PolicyFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(PolicyFamily::Uniform),
            "semi" | "semi_targeted" => Ok(PolicyFamily::SemiTargeted),
            "full" | "fully_targeted" => Ok(PolicyFamily::FullyTargeted),
            other => Err(format!("unknown policy family '{other}'")),
        }
    }
}

/// Piecewise-constant shielding schedule: per channel, one level in
/// [0, 1] for each of K equal-length intervals over [0, horizon). Lookups
/// are right-continuous and zero from the horizon onwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct PolicySchedule {
    family: PolicyFamily,
    horizon: f64,
    levels: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawSchedule {
    family: PolicyFamily,
    horizon: f64,
    levels: Vec<Vec<f64>>,
}

impl TryFrom<RawSchedule> for PolicySchedule {
    type Error = PolicyError;

    fn try_from(raw: RawSchedule) -> Result<Self, PolicyError> {
        PolicySchedule::new(raw.family, raw.horizon, raw.levels)
    }
}

impl PolicySchedule {
    pub fn new(
        family: PolicyFamily,
        horizon: f64,
        levels: Vec<Vec<f64>>,
    ) -> Result<Self, PolicyError> {
        if levels.len() != family.channels() {
            return Err(PolicyError::ChannelMismatch {
                got: levels.len(),
                want: family.channels(),
            });
        }
        let knots = levels.first().map(Vec::len).unwrap_or(0);
        if knots == 0 || horizon <= 0.0 || horizon.is_nan() {
            return Err(PolicyError::EmptySchedule);
        }
        for channel in &levels {
            if channel.len() != knots {
                return Err(PolicyError::RaggedChannels);
            }
            if channel.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(PolicyError::LevelOutOfRange);
            }
        }
        Ok(PolicySchedule {
            family,
            horizon,
            levels,
        })
    }

    pub fn zero(family: PolicyFamily, horizon: f64, knots: usize) -> Self {
        PolicySchedule::constant(family, horizon, knots, 0.0).expect("zero schedule")
    }

    pub fn constant(
        family: PolicyFamily,
        horizon: f64,
        knots: usize,
        level: f64,
    ) -> Result<Self, PolicyError> {
        PolicySchedule::new(family, horizon, vec![vec![level; knots]; family.channels()])
    }

    pub fn family(&self) -> PolicyFamily {
        self.family
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn knots(&self) -> usize {
        self.levels[0].len()
    }

    pub fn channel_levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn block_length(&self) -> f64 {
        self.horizon / self.knots() as f64
    }

    pub fn level_for(&self, g: GroupId, t: f64) -> f64 {
        if t < 0.0 || t >= self.horizon {
            return 0.0;
        }
        let k = ((t / self.block_length()) as usize).min(self.knots() - 1);
        self.levels[self.family.channel_of(g)][k]
    }

    pub fn levels_at(&self, t: f64) -> [f64; 3] {
        [
            self.level_for(GroupId::Young, t),
            self.level_for(GroupId::Middle, t),
            self.level_for(GroupId::Senior, t),
        ]
    }

    /// Channel-major flattening, the optimizer's decision vector.
    pub fn flatten(&self) -> Vec<f64> {
        self.levels.iter().flatten().copied().collect()
    }

    pub fn from_flat(
        family: PolicyFamily,
        horizon: f64,
        knots: usize,
        x: &[f64],
    ) -> Result<Self, PolicyError> {
        if x.len() != family.channels() * knots {
            return Err(PolicyError::RaggedChannels);
        }
        let levels = x.chunks(knots).map(<[f64]>::to_vec).collect();
        PolicySchedule::new(family, horizon, levels)
    }

    /// Re-expresses this schedule in another family/grid by sampling each
    /// target block's midpoint, for warm-starting searches. Widening
    /// (uniform into targeted) is exact; narrowing reads the channel of
    /// the target family's representative group.
    pub fn embed(&self, family: PolicyFamily, horizon: f64, knots: usize) -> Vec<f64> {
        let representative = |ch: usize| match family {
            PolicyFamily::Uniform => GroupId::Young,
            PolicyFamily::SemiTargeted => {
                if ch == 0 {
                    GroupId::Young
                } else {
                    GroupId::Senior
                }
            }
            PolicyFamily::FullyTargeted => GroupId::ALL[ch],
        };
        let block = horizon / knots as f64;
        let mut x = Vec::with_capacity(family.channels() * knots);
        for ch in 0..family.channels() {
            let g = representative(ch);
            for k in 0..knots {
                let midpoint = (k as f64 + 0.5) * block;
                x.push(self.level_for(g, midpoint));
            }
        }
        x
    }

    /// Total days on which the senior level exceeds `threshold`.
    pub fn senior_days_above(&self, threshold: f64) -> f64 {
        let ch = self.family.channel_of(GroupId::Senior);
        self.levels[ch].iter().filter(|&&x| x > threshold).count() as f64 * self.block_length()
    }
}

/// Scalars from one policy evaluation.
#[derive(Clone, Copy, Debug)]
pub struct PolicyOutcome {
    /// Total dead at the horizon, fraction of the population.
    pub mortality: f64,
    /// Total economic loss, income units.
    pub econ_loss: f64,
    /// econ_loss + chi * mortality + ICU-cap penalty.
    pub objective: f64,
    /// Soft-penalty contribution from ICU load above the cap.
    pub icu_penalty: f64,
    /// Peak ICU load over the grid.
    pub max_icu: f64,
    pub clamp_mass: f64,
}

/// Integrates one trajectory under `policy` and reduces it to the planner
/// scalars, without storing per-step snapshots. Shares the stepping code
/// with [`dynamics::integrate`], so the scalars match a stored trajectory
/// bit for bit.
pub fn evaluate_policy(
    policy: &PolicySchedule,
    params: &ModelParams,
    chi: f64,
    dt: f64,
) -> Result<PolicyOutcome, PolicyError> {
    let grid = StepGrid::new(params, policy, dt)?;
    let mut v = pack(&ModelState::initial(params));
    let mut clamp_mass = 0.0;
    let mut max_icu = icu_load(&unpack(&v), params);
    for step in 0..grid.steps {
        let t = step as f64 * dt;
        let levels = policy.levels_at(t);
        v = rk4_step(&v, &levels, params, dt);
        clamp_mass += clamp_negative(&mut v);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::NonFinite { t: t + dt }.into());
        }
        if step + 1 == grid.steps {
            vaccine_terminal_vec(&mut v);
        }
        max_icu = max_icu.max(icu_load(&unpack(&v), params));
    }
    if clamp_mass > CLAMP_MASS_BUDGET {
        return Err(DynamicsError::ClampBudget {
            mass: clamp_mass,
            budget: CLAMP_MASS_BUDGET,
        }
        .into());
    }
    let state = unpack(&v);
    let mortality = state.total_dead();
    let econ_loss = state.accumulated_loss;
    let icu_penalty = ICU_PENALTY_WEIGHT * v[dynamics::EXCESS_SLOT];
    Ok(PolicyOutcome {
        mortality,
        econ_loss,
        objective: econ_loss + chi * mortality + icu_penalty,
        icu_penalty,
        max_icu,
        clamp_mass,
    })
}

/// Search budget and reproducibility knobs for the policy optimizer.
#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Equal-length control intervals per channel.
    pub knots: usize,
    /// Integration step for objective evaluations.
    pub dt: f64,
    /// Population size; default 16 x dimension, capped at 96.
    pub population: Option<usize>,
    pub generations: usize,
    pub seed: u64,
    /// Candidate schedules injected into the initial population (possibly
    /// from another family or grid; they are re-expressed as needed).
    pub warm_starts: Vec<PolicySchedule>,
    /// Run the coordinate-descent polish after the evolutionary phase.
    pub polish: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            knots: 13,
            dt: 0.25,
            population: None,
            generations: 400,
            seed: 42,
            warm_starts: Vec::new(),
            polish: true,
        }
    }
}

impl SearchConfig {
    /// Reduced budget for quick runs and CI-scale sweeps.
    pub fn reduced() -> Self {
        SearchConfig {
            population: Some(24),
            generations: 120,
            ..SearchConfig::default()
        }
    }
}

/// One point of an efficient frontier: the optimized policy for a given
/// life weight plus its outcomes and optimizer diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct FrontierPoint {
    pub chi: f64,
    pub mortality: f64,
    pub econ_loss: f64,
    pub econ_loss_pct_gdp: f64,
    pub objective: f64,
    pub icu_penalty: f64,
    pub max_icu: f64,
    pub policy: PolicySchedule,
    pub evaluations: u64,
    pub converged: bool,
    pub seed: u64,
}

const DE_WEIGHT: f64 = 0.7;
const DE_CROSSOVER: f64 = 0.9;
const MAX_DIMENSION: usize = 256;
const POLISH_STEP_START: f64 = 0.1;
const POLISH_STEP_MIN: f64 = 1e-4;

struct Searcher<'a> {
    family: PolicyFamily,
    params: &'a ModelParams,
    chi: f64,
    knots: usize,
    dt: f64,
    evaluations: u64,
}

impl<'a> Searcher<'a> {
    fn objective(&mut self, population: &[Vec<f64>]) -> Result<Vec<f64>, PolicyError> {
        self.evaluations += population.len() as u64;
        population
            .par_iter()
            .map(|x| {
                let schedule =
                    PolicySchedule::from_flat(self.family, self.params.horizon, self.knots, x)?;
                Ok(evaluate_policy(&schedule, self.params, self.chi, self.dt)?.objective)
            })
            .collect()
    }

    fn objective_one(&mut self, x: &[f64]) -> Result<f64, PolicyError> {
        self.evaluations += 1;
        let schedule = PolicySchedule::from_flat(self.family, self.params.horizon, self.knots, x)?;
        Ok(evaluate_policy(&schedule, self.params, self.chi, self.dt)?.objective)
    }
}

/// Minimizes the planner objective over the family's schedule box with
/// seeded differential evolution followed by a coordinate-descent polish.
/// Deterministic for a fixed config: the same seed yields bit-identical
/// results.
pub fn optimize_policy(
    family: PolicyFamily,
    params: &ModelParams,
    chi: f64,
    cfg: &SearchConfig,
) -> Result<FrontierPoint, PolicyError> {
    let dim = family.channels() * cfg.knots;
    if dim > MAX_DIMENSION {
        return Err(PolicyError::DimensionOverflow(dim));
    }
    let pop_size = cfg.population.unwrap_or((16 * dim).min(96)).max(6);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut search = Searcher {
        family,
        params,
        chi,
        knots: cfg.knots,
        dt: cfg.dt,
        evaluations: 0,
    };

    // Initial population: corner policies, warm starts, then random fill.
    let mut population: Vec<Vec<f64>> = Vec::with_capacity(pop_size);
    population.push(vec![0.0; dim]);
    population.push(vec![1.0; dim]);
    for w in &cfg.warm_starts {
        if population.len() == pop_size {
            break;
        }
        population.push(w.embed(family, params.horizon, cfg.knots));
    }
    while population.len() < pop_size {
        population.push((0..dim).map(|_| rng.gen::<f64>()).collect());
    }
    let mut fitness = search.objective(&population)?;

    for _generation in 0..cfg.generations {
        // Trial vectors are drawn sequentially so the random stream does
        // not depend on evaluation scheduling.
        let trials: Vec<Vec<f64>> = (0..pop_size)
            .map(|i| {
                let pick = |rng: &mut ChaCha20Rng, exclude: &[usize]| loop {
                    let c = rng.gen_range(0..pop_size);
                    if !exclude.contains(&c) {
                        return c;
                    }
                };
                let a = pick(&mut rng, &[i]);
                let b = pick(&mut rng, &[i, a]);
                let c = pick(&mut rng, &[i, a, b]);
                let forced = rng.gen_range(0..dim);
                let mut trial = population[i].clone();
                for d in 0..dim {
                    let roll = rng.gen::<f64>();
                    if d == forced || roll < DE_CROSSOVER {
                        let v =
                            population[a][d] + DE_WEIGHT * (population[b][d] - population[c][d]);
                        trial[d] = v.clamp(0.0, 1.0);
                    }
                }
                trial
            })
            .collect();
        let trial_fitness = search.objective(&trials)?;
        for i in 0..pop_size {
            if trial_fitness[i] <= fitness[i] {
                population[i] = trials[i].clone();
                fitness[i] = trial_fitness[i];
            }
        }
    }

    let mut best = 0;
    for i in 1..pop_size {
        if fitness[i] < fitness[best] {
            best = i;
        }
    }
    let mut x = population[best].clone();
    let mut fx = fitness[best];
    let mut converged = false;

    if cfg.polish {
        let mut step = POLISH_STEP_START;
        while step >= POLISH_STEP_MIN {
            loop {
                let mut improved = false;
                for d in 0..dim {
                    for delta in [step, -step] {
                        let candidate = (x[d] + delta).clamp(0.0, 1.0);
                        if candidate == x[d] {
                            continue;
                        }
                        let old = x[d];
                        x[d] = candidate;
                        let fy = search.objective_one(&x)?;
                        if fy < fx {
                            fx = fy;
                            improved = true;
                        } else {
                            x[d] = old;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            step *= 0.5;
        }
        converged = true;
    }

    let policy = PolicySchedule::from_flat(family, params.horizon, cfg.knots, &x)?;
    let outcome = evaluate_policy(&policy, params, chi, cfg.dt)?;
    Ok(FrontierPoint {
        chi,
        mortality: outcome.mortality,
        econ_loss: outcome.econ_loss,
        econ_loss_pct_gdp: econ::loss_pct_gdp(outcome.econ_loss, params),
        objective: outcome.objective,
        icu_penalty: outcome.icu_penalty,
        max_icu: outcome.max_icu,
        policy,
        evaluations: search.evaluations + 1,
        converged,
        seed: cfg.seed,
    })
}

fn derive_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Optimizes once per chi, warm-starting each search with the previous
/// optimum (plus any configured seeds). Returns the raw per-chi points in
/// grid order, before Pareto filtering.
pub fn sweep_chi(
    family: PolicyFamily,
    params: &ModelParams,
    chi_grid: &[f64],
    cfg: &SearchConfig,
) -> Result<Vec<FrontierPoint>, PolicyError> {
    sweep_chi_with_seeds(family, params, chi_grid, cfg, &[])
}

/// [`sweep_chi`] with extra per-chi seed candidates (for example the
/// matching optimum from a narrower family or another scenario). Entries
/// beyond the grid length are ignored; an empty slice means no extra
/// seeds.
pub fn sweep_chi_with_seeds(
    family: PolicyFamily,
    params: &ModelParams,
    chi_grid: &[f64],
    cfg: &SearchConfig,
    per_chi_seeds: &[Vec<PolicySchedule>],
) -> Result<Vec<FrontierPoint>, PolicyError> {
    if chi_grid.is_empty() || chi_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(PolicyError::BadChiGrid);
    }
    let mut points = Vec::with_capacity(chi_grid.len());
    let mut previous: Option<PolicySchedule> = None;
    for (i, &chi) in chi_grid.iter().enumerate() {
        let mut step_cfg = cfg.clone();
        step_cfg.seed = derive_seed(cfg.seed, i);
        if let Some(extra) = per_chi_seeds.get(i) {
            step_cfg.warm_starts.extend_from_slice(extra);
        }
        if let Some(p) = &previous {
            step_cfg.warm_starts.push(p.clone());
        }
        let point = optimize_policy(family, params, chi, &step_cfg)?;
        previous = Some(point.policy.clone());
        points.push(point);
    }
    Ok(points)
}

/// Efficient frontier for one family over a chi grid: the Pareto-filtered
/// sweep, sorted by mortality descending.
pub fn frontier(
    family: PolicyFamily,
    params: &ModelParams,
    chi_grid: &[f64],
    cfg: &SearchConfig,
) -> Result<Vec<FrontierPoint>, PolicyError> {
    Ok(pareto_filter(sweep_chi(family, params, chi_grid, cfg)?))
}

/// Drops every point weakly dominated in (mortality, econ_loss); the
/// survivors come back sorted by mortality descending, so mortality
/// strictly decreases and economic loss strictly increases along the list.
pub fn pareto_filter(mut points: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    points.sort_by(|a, b| {
        (a.mortality, a.econ_loss)
            .partial_cmp(&(b.mortality, b.econ_loss))
            .expect("finite outcomes")
    });
    let mut kept: Vec<FrontierPoint> = Vec::with_capacity(points.len());
    for p in points {
        match kept.last() {
            Some(last) if p.econ_loss >= last.econ_loss => {} // dominated
            _ => kept.push(p),
        }
    }
    kept.reverse();
    kept
}

/// Derives a chi grid whose optimized mortalities span the unmitigated
/// outcome down to at most 0.05% of the population. Probes with the best
/// constant uniform level per chi (a cheap one-dimensional search), so the
/// grid adapts to the configured loss scales deterministically.
pub fn default_chi_grid(params: &ModelParams, n: usize, dt: f64) -> Result<Vec<f64>, PolicyError> {
    assert!(n >= 2, "chi grid needs at least two points");
    let zero = PolicySchedule::zero(PolicyFamily::Uniform, params.horizon, 1);
    let unmitigated = evaluate_policy(&zero, params, 0.0, dt)?.mortality;
    if unmitigated <= 5e-4 {
        // epidemic already below the span floor; fall back to a wide grid
        let (lo, hi) = (1.0, 1e8);
        return Ok(log_spaced(lo, hi, n));
    }
    let high_target = 0.95 * unmitigated.min(0.008);
    let low_target = 5e-4;
    let probe = |chi: f64| -> Result<f64, PolicyError> {
        Ok(best_constant_uniform(params, chi, dt)?.1.mortality)
    };
    let mut lo = 1e-3;
    while probe(lo)? < high_target && lo > 1e-9 {
        lo /= 8.0;
    }
    // walk lo up to the largest probe that still leaves the epidemic
    // unmitigated, so the grid concentrates on the transition
    while lo < 1e12 && probe(lo * 4.0)? >= high_target {
        lo *= 4.0;
    }
    let mut hi = lo;
    while probe(hi)? > low_target && hi < 1e12 {
        hi *= 4.0;
    }
    Ok(log_spaced(lo, hi, n))
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Best constant blanket level by golden-section search over [0, 1].
pub fn best_constant_uniform(
    params: &ModelParams,
    chi: f64,
    dt: f64,
) -> Result<(f64, PolicyOutcome), PolicyError> {
    let eval = |level: f64| -> Result<PolicyOutcome, PolicyError> {
        let p = PolicySchedule::constant(PolicyFamily::Uniform, params.horizon, 1, level)?;
        evaluate_policy(&p, params, chi, dt)
    };
    let inv_phi = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?.objective;
    let mut fd = eval(d)?.objective;
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?.objective;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?.objective;
        }
    }
    let level = 0.5 * (a + b);
    Ok((level, eval(level)?))
}

/// Minimal-economic-loss policy subject to total mortality at most `cap`:
/// bisection on chi until the optimized mortality lands in [0.95 cap, cap],
/// returning the cheapest candidate that satisfies the cap.
pub fn safety_policy(
    family: PolicyFamily,
    params: &ModelParams,
    mortality_cap: f64,
    cfg: &SearchConfig,
) -> Result<FrontierPoint, PolicyError> {
    let full = PolicySchedule::constant(family, params.horizon, cfg.knots, 1.0)?;
    let full_outcome = evaluate_policy(&full, params, 0.0, cfg.dt)?;
    if full_outcome.mortality > mortality_cap {
        return Err(PolicyError::InfeasibleCap {
            cap: mortality_cap,
            floor: full_outcome.mortality,
        });
    }

    let mut iteration = 0usize;
    let mut run = |chi: f64, seeds: &[PolicySchedule]| -> Result<FrontierPoint, PolicyError> {
        let mut step_cfg = cfg.clone();
        step_cfg.seed = derive_seed(cfg.seed, iteration);
        step_cfg.warm_starts.extend_from_slice(seeds);
        iteration += 1;
        optimize_policy(family, params, chi, &step_cfg)
    };

    let unconstrained = run(0.0, &[])?;
    if unconstrained.mortality <= mortality_cap {
        return Ok(unconstrained);
    }

    let mut candidates = vec![unconstrained];
    // warm starts compete directly: a feasible seed (say another family's
    // solve, or a tighter cap's) bounds the result from above
    for w in &cfg.warm_starts {
        let schedule = PolicySchedule::from_flat(
            family,
            params.horizon,
            cfg.knots,
            &w.embed(family, params.horizon, cfg.knots),
        )?;
        let outcome = evaluate_policy(&schedule, params, 0.0, cfg.dt)?;
        candidates.push(FrontierPoint {
            chi: 0.0,
            mortality: outcome.mortality,
            econ_loss: outcome.econ_loss,
            econ_loss_pct_gdp: econ::loss_pct_gdp(outcome.econ_loss, params),
            objective: outcome.objective,
            icu_penalty: outcome.icu_penalty,
            max_icu: outcome.max_icu,
            policy: schedule,
            evaluations: 1,
            converged: false,
            seed: cfg.seed,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, 1e8_f64);
    for _ in 0..25 {
        let mid = 0.5 * (lo + hi);
        let seeds: Vec<PolicySchedule> = candidates
            .last()
            .map(|p| p.policy.clone())
            .into_iter()
            .collect();
        let point = run(mid, &seeds)?;
        let mortality = point.mortality;
        candidates.push(point);
        if mortality > mortality_cap {
            lo = mid;
        } else {
            hi = mid;
            if mortality >= 0.95 * mortality_cap {
                break;
            }
        }
    }

    let feasible = candidates
        .into_iter()
        .filter(|p| p.mortality <= mortality_cap)
        .min_by(|a, b| a.econ_loss.partial_cmp(&b.econ_loss).expect("finite loss"));
    match feasible {
        Some(p) => Ok(p),
        None => {
            // bisection never landed under the cap; fall back to full shielding
            let outcome = evaluate_policy(&full, params, 0.0, cfg.dt)?;
            Ok(FrontierPoint {
                chi: f64::INFINITY,
                mortality: outcome.mortality,
                econ_loss: outcome.econ_loss,
                econ_loss_pct_gdp: econ::loss_pct_gdp(outcome.econ_loss, params),
                objective: outcome.objective,
                icu_penalty: outcome.icu_penalty,
                max_icu: outcome.max_icu,
                policy: full,
                evaluations: 1,
                converged: false,
                seed: cfg.seed,
            })
        }
    }
}
