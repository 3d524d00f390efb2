//! Command front end: config and scenario resolution, run manifests,
//! CSV/JSON emission and the static SVG figures. Every command writes its
//! outputs atomically into one directory together with a manifest that
//! replays the run bit-exactly.

pub mod svg;

use crate::calibration;
use crate::dynamics::{integrate, DynamicsError, Trajectory};
use crate::econ::{self, LossBreakdown};
use crate::model::{self, GroupId, ModelParams};
use crate::policy::{
    self, default_chi_grid, pareto_filter, safety_policy, sweep_chi_with_seeds, FrontierPoint,
    PolicyError, PolicyFamily, PolicySchedule, SearchConfig,
};
use crate::scenario::{self, ScenarioError, ScenarioSpec};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use svg::{line_chart, staircase, ChartSpec, Series};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Integration(String),
    #[error("{0}")]
    Optimization(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Optimization(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<model::ConfigError> for CliError {
    fn from(e: model::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        CliError::Integration(e.to_string())
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        match e {
            PolicyError::Integrate(inner) => CliError::Integration(inner.to_string()),
            other => CliError::Optimization(other.to_string()),
        }
    }
}

impl From<calibration::CalibrationError> for CliError {
    fn from(e: calibration::CalibrationError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Full float precision for file outputs: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes via a temp file and rename so readers never observe a partial
/// file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Options shared by the file-writing commands.
#[derive(Clone, Debug)]
pub struct CommonArgs {
    pub config: Option<PathBuf>,
    pub dt: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub no_svg: bool,
}

/// Optimizer budget knobs shared by `optimize`, `frontier` and `compare`.
#[derive(Clone, Debug)]
pub struct BudgetArgs {
    pub knots: usize,
    pub population: Option<usize>,
    pub generations: usize,
}

impl BudgetArgs {
    fn search_config(&self, dt: f64, seed: u64) -> SearchConfig {
        SearchConfig {
            knots: self.knots,
            dt,
            population: self.population,
            generations: self.generations,
            seed,
            ..SearchConfig::default()
        }
    }
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub timestamp: String,
    pub config_path: Option<String>,
    /// Base parameters after the config merge, before scenario
    /// transforms: feeding these back as `--config` together with the
    /// same flags reproduces the run byte for byte.
    pub resolved_params: ModelParams,
    pub scenarios: Vec<String>,
    pub families: Vec<String>,
    pub seed: u64,
    pub dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safety_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy_file: Option<String>,
    pub knots: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    pub generations: usize,
    pub outputs: Vec<String>,
}

impl RunManifest {
    fn new(command: &str, common: &CommonArgs, params: &ModelParams) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            config_path: common.config.as_ref().map(|p| p.display().to_string()),
            resolved_params: *params,
            scenarios: Vec::new(),
            families: Vec::new(),
            seed: common.seed,
            dt: common.dt,
            chi: None,
            chi_grid: None,
            safety_cap: None,
            policy_file: None,
            knots: 0,
            population: None,
            generations: 0,
            outputs: Vec::new(),
        }
    }
}

fn load_base_params(config: &Option<PathBuf>) -> Result<ModelParams, CliError> {
    match config {
        Some(path) => Ok(model::load_params(path)?),
        None => Ok(model::germany_baseline()),
    }
}

fn resolve_scenario(name: &str) -> Result<ScenarioSpec, CliError> {
    Ok(scenario::resolve(name)?)
}

fn scenario_params(base: &ModelParams, name: &str) -> Result<ModelParams, CliError> {
    Ok(scenario::apply_scenario(base, &resolve_scenario(name)?)?)
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&dir.join("manifest.json"), &text)
}

#[derive(Serialize)]
struct GroupBreakdowns {
    young: LossBreakdown,
    middle: LossBreakdown,
    senior: LossBreakdown,
}

#[derive(Serialize)]
struct RunSummary {
    mortality: f64,
    econ_loss: f64,
    econ_loss_pct_gdp: f64,
    objective: f64,
    chi: f64,
    rt_initial: f64,
    max_icu: f64,
    clamp_mass: f64,
    loss_breakdown_integrals: GroupBreakdowns,
}

fn summarize(traj: &Trajectory, params: &ModelParams, chi: f64) -> RunSummary {
    let econ_loss = econ::total_economic_loss(traj);
    let mortality = econ::total_mortality(traj);
    let parts = econ::breakdown_integrals(traj, params);
    RunSummary {
        mortality,
        econ_loss,
        econ_loss_pct_gdp: econ::loss_pct_gdp(econ_loss, params),
        objective: econ_loss + chi * mortality,
        chi,
        rt_initial: traj.rt[0],
        max_icu: traj.max_icu(),
        clamp_mass: traj.clamp_mass,
        loss_breakdown_integrals: GroupBreakdowns {
            young: parts[0],
            middle: parts[1],
            senior: parts[2],
        },
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&dir.join(name), &text)
}

fn write_trajectory_figures(
    dir: &Path,
    traj: &Trajectory,
    params: &ModelParams,
) -> Result<Vec<String>, CliError> {
    let mut written = Vec::new();

    let uninfected: Vec<Series> = GroupId::ALL
        .iter()
        .map(|&g| {
            let n = params.groups[g].population_share;
            let pts = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(&t, s)| (t, s.group(g).susceptible / n))
                .collect();
            Series::line(g.name(), pts)
        })
        .collect();
    let spec = ChartSpec {
        title: "Share uninfected".into(),
        x_label: "day".into(),
        y_label: "S_j(t) / N_j".into(),
        y_from_zero: true,
        guide_y: None,
    };
    write_atomic(&dir.join("uninfected.svg"), &line_chart(&spec, &uninfected))?;
    written.push("uninfected.svg".into());

    let rt_pts = traj
        .times
        .iter()
        .zip(&traj.rt)
        .map(|(&t, &r)| (t, r))
        .collect();
    let spec = ChartSpec {
        title: "Effective reproduction number".into(),
        x_label: "day".into(),
        y_label: "R(t)".into(),
        y_from_zero: true,
        guide_y: Some(1.0),
    };
    write_atomic(
        &dir.join("rt.svg"),
        &line_chart(&spec, &[Series::line("R(t)", rt_pts)]),
    )?;
    written.push("rt.svg".into());

    let levels: Vec<Series> = GroupId::ALL
        .iter()
        .map(|&g| {
            let values: Vec<f64> = traj.levels.iter().map(|l| l[g.index()]).collect();
            Series::line(format!("L_{}", g.short()), staircase(&traj.times, &values))
        })
        .collect();
    let spec = ChartSpec {
        title: "Shielding levels".into(),
        x_label: "day".into(),
        y_label: "L_j(t)".into(),
        y_from_zero: true,
        guide_y: None,
    };
    write_atomic(&dir.join("policy.svg"), &line_chart(&spec, &levels))?;
    written.push("policy.svg".into());
    Ok(written)
}

fn load_policy_file(path: &Path, params: &ModelParams) -> Result<PolicySchedule, CliError> {
    let text = fs::read_to_string(path)?;
    let schedule: PolicySchedule =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if (schedule.horizon() - params.horizon).abs() > 1e-9 {
        return Err(CliError::Config(format!(
            "policy horizon {} does not match model horizon {}",
            schedule.horizon(),
            params.horizon
        )));
    }
    Ok(schedule)
}

/// `simulate`: one trajectory under a policy file or the zero policy.
/// Writes trajectory.csv, summary.json, the three figures and the
/// manifest.
pub fn cmd_simulate(
    common: &CommonArgs,
    scenario_name: &str,
    policy_file: Option<&Path>,
) -> Result<(), CliError> {
    let base = load_base_params(&common.config)?;
    let params = scenario_params(&base, scenario_name)?;
    let schedule = match policy_file {
        Some(p) => load_policy_file(p, &params)?,
        None => PolicySchedule::zero(PolicyFamily::Uniform, params.horizon, 13),
    };
    let traj = integrate(&params, &schedule, common.dt)?;

    ensure_out_dir(&common.out)?;
    write_atomic(&common.out.join("trajectory.csv"), &traj.to_csv())?;
    write_json(&common.out, "summary.json", &summarize(&traj, &params, 0.0))?;
    let mut outputs = vec!["trajectory.csv".to_string(), "summary.json".to_string()];
    if !common.no_svg {
        outputs.extend(write_trajectory_figures(&common.out, &traj, &params)?);
    }

    let mut manifest = RunManifest::new("simulate", common, &base);
    manifest.scenarios = vec![scenario_name.to_string()];
    manifest.policy_file = policy_file.map(|p| p.display().to_string());
    manifest.outputs = outputs;
    write_manifest(&common.out, &manifest)
}

#[derive(Serialize)]
struct CalibrationReport {
    beta: f64,
    target_r0: f64,
    ngm: [[f64; 3]; 3],
}

/// `calibrate-beta`: prints the calibrated transmission rate and the
/// calibration-context next-generation matrix as JSON on stdout.
pub fn cmd_calibrate_beta(
    config: &Option<PathBuf>,
    scenario_name: &str,
    target_r0: f64,
) -> Result<String, CliError> {
    let base = load_base_params(config)?;
    let params = scenario_params(&base, scenario_name)?;
    let beta = calibration::calibrate_beta(&params, target_r0)?;
    let mut calibrated = params;
    calibrated.beta = beta;
    let report = CalibrationReport {
        beta,
        target_r0,
        ngm: calibration::calibration_ngm(&calibrated).k,
    };
    serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))
}

fn frontier_csv(points: &[FrontierPoint]) -> String {
    let mut out = String::from("chi,mortality,econ_loss,econ_loss_pct_gdp,objective,evals,seed");
    let (channels, knots) = match points.first() {
        Some(p) => (p.policy.family().channels(), p.policy.knots()),
        None => (0, 0),
    };
    for ch in 0..channels {
        for k in 0..knots {
            let _ = write!(out, ",level_{ch}_{k}");
        }
    }
    out.push('\n');
    for p in points {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_float(p.chi),
            fmt_float(p.mortality),
            fmt_float(p.econ_loss),
            fmt_float(p.econ_loss_pct_gdp),
            fmt_float(p.objective),
            p.evaluations,
            p.seed
        );
        for x in p.policy.flatten() {
            out.push(',');
            out.push_str(&fmt_float(x));
        }
        out.push('\n');
    }
    out
}

/// `frontier`: sweeps the chi grid per family (warm-started within each
/// family and across families), writes one Pareto-filtered CSV per family
/// plus a combined SVG, and optionally marks the safety-capped point.
pub fn cmd_frontier(
    common: &CommonArgs,
    scenario_name: &str,
    families: &[PolicyFamily],
    chi: Option<f64>,
    chi_grid_size: usize,
    safety_cap: Option<f64>,
    budget: &BudgetArgs,
) -> Result<(), CliError> {
    if families.is_empty() {
        return Err(CliError::Config("at least one --family is required".into()));
    }
    let base = load_base_params(&common.config)?;
    let params = scenario_params(&base, scenario_name)?;
    let grid = match chi {
        Some(c) => vec![c],
        None => default_chi_grid(&params, chi_grid_size, common.dt)?,
    };

    ensure_out_dir(&common.out)?;
    let cfg = budget.search_config(common.dt, common.seed);
    let mut outputs = Vec::new();
    let mut chart_series = Vec::new();
    let mut previous_sweep: Vec<Vec<PolicySchedule>> = vec![Vec::new(); grid.len()];
    let mut safety_points: Vec<(PolicyFamily, FrontierPoint)> = Vec::new();
    let mut previous_safety: Option<PolicySchedule> = None;

    for &family in families {
        let sweep = sweep_chi_with_seeds(family, &params, &grid, &cfg, &previous_sweep)?;
        previous_sweep = sweep.iter().map(|p| vec![p.policy.clone()]).collect();
        let points = pareto_filter(sweep);
        let csv_name = format!("frontier_{}.csv", family.name());
        write_atomic(&common.out.join(&csv_name), &frontier_csv(&points))?;
        outputs.push(csv_name);
        chart_series.push(Series::line(
            family.name(),
            points
                .iter()
                .map(|p| (p.mortality, p.econ_loss_pct_gdp))
                .collect(),
        ));
        if let Some(cap) = safety_cap {
            let mut safety_cfg = cfg.clone();
            if let Some(p) = &previous_safety {
                safety_cfg.warm_starts.push(p.clone());
            }
            let point = safety_policy(family, &params, cap, &safety_cfg)?;
            previous_safety = Some(point.policy.clone());
            chart_series.push(Series::dots(
                format!("{} cap {cap}", family.name()),
                vec![(point.mortality, point.econ_loss_pct_gdp)],
            ));
            safety_points.push((family, point));
        }
    }

    // one safety file per family: families differ in channel count, so
    // their level columns do not line up in a shared table
    for (family, point) in &safety_points {
        let name = format!("safety_{}.csv", family.name());
        write_atomic(&common.out.join(&name), &frontier_csv(std::slice::from_ref(point)))?;
        outputs.push(name);
    }

    if !common.no_svg {
        let spec = ChartSpec {
            title: format!("Efficient frontier ({scenario_name})"),
            x_label: "population mortality".into(),
            y_label: "economic loss, % of annual GDP".into(),
            y_from_zero: true,
            guide_y: None,
        };
        write_atomic(
            &common.out.join("frontier.svg"),
            &line_chart(&spec, &chart_series),
        )?;
        outputs.push("frontier.svg".into());
    }

    let mut manifest = RunManifest::new("frontier", common, &base);
    manifest.scenarios = vec![scenario_name.to_string()];
    manifest.families = families.iter().map(|f| f.name().to_string()).collect();
    manifest.chi = chi;
    manifest.chi_grid = Some(grid);
    manifest.safety_cap = safety_cap;
    manifest.knots = budget.knots;
    manifest.population = budget.population;
    manifest.generations = budget.generations;
    manifest.outputs = outputs;
    write_manifest(&common.out, &manifest)
}

/// `optimize`: one policy search at a fixed chi or under a mortality cap;
/// writes policy.json plus the simulate-style outputs for the optimum.
pub fn cmd_optimize(
    common: &CommonArgs,
    scenario_name: &str,
    family: PolicyFamily,
    chi: Option<f64>,
    safety_cap: Option<f64>,
    budget: &BudgetArgs,
) -> Result<(), CliError> {
    let base = load_base_params(&common.config)?;
    let params = scenario_params(&base, scenario_name)?;
    let cfg = budget.search_config(common.dt, common.seed);
    let point = match (chi, safety_cap) {
        (Some(c), None) => policy::optimize_policy(family, &params, c, &cfg)?,
        (None, Some(cap)) => safety_policy(family, &params, cap, &cfg)?,
        _ => {
            return Err(CliError::Config(
                "optimize needs exactly one of --chi or --safety-cap".into(),
            ))
        }
    };

    ensure_out_dir(&common.out)?;
    write_json(&common.out, "policy.json", &point.policy)?;
    write_json(&common.out, "frontier_point.json", &point)?;
    let traj = integrate(&params, &point.policy, common.dt)?;
    write_atomic(&common.out.join("trajectory.csv"), &traj.to_csv())?;
    write_json(
        &common.out,
        "summary.json",
        &summarize(&traj, &params, point.chi),
    )?;
    let mut outputs = vec![
        "policy.json".to_string(),
        "frontier_point.json".to_string(),
        "trajectory.csv".to_string(),
        "summary.json".to_string(),
    ];
    if !common.no_svg {
        outputs.extend(write_trajectory_figures(&common.out, &traj, &params)?);
    }

    let mut manifest = RunManifest::new("optimize", common, &base);
    manifest.scenarios = vec![scenario_name.to_string()];
    manifest.families = vec![family.name().to_string()];
    manifest.chi = chi;
    manifest.safety_cap = safety_cap;
    manifest.knots = budget.knots;
    manifest.population = budget.population;
    manifest.generations = budget.generations;
    manifest.outputs = outputs;
    write_manifest(&common.out, &manifest)
}

#[derive(Serialize)]
struct CompareRow {
    scenario: String,
    mortality: f64,
    econ_loss: f64,
    econ_loss_pct_gdp: f64,
    max_icu: f64,
    senior_shielding_days: f64,
}

/// `compare`: optimizes each scenario at the same chi or safety cap and
/// tabulates the outcomes.
pub fn cmd_compare(
    common: &CommonArgs,
    scenarios: &[String],
    family: PolicyFamily,
    chi: Option<f64>,
    safety_cap: Option<f64>,
    budget: &BudgetArgs,
) -> Result<(), CliError> {
    if scenarios.is_empty() {
        return Err(CliError::Config(
            "at least one --scenario is required".into(),
        ));
    }
    let base = load_base_params(&common.config)?;
    let cfg = budget.search_config(common.dt, common.seed);
    let mut rows = Vec::new();
    for name in scenarios {
        let params = scenario_params(&base, name)?;
        let point = match (chi, safety_cap) {
            (Some(c), None) => policy::optimize_policy(family, &params, c, &cfg)?,
            (None, Some(cap)) => safety_policy(family, &params, cap, &cfg)?,
            _ => {
                return Err(CliError::Config(
                    "compare needs exactly one of --chi or --safety-cap".into(),
                ))
            }
        };
        rows.push(CompareRow {
            scenario: name.clone(),
            mortality: point.mortality,
            econ_loss: point.econ_loss,
            econ_loss_pct_gdp: point.econ_loss_pct_gdp,
            max_icu: point.max_icu,
            senior_shielding_days: point.policy.senior_days_above(0.5),
        });
    }

    ensure_out_dir(&common.out)?;
    let mut csv = String::from(
        "scenario,mortality,econ_loss,econ_loss_pct_gdp,max_icu,senior_shielding_days\n",
    );
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.scenario,
            fmt_float(r.mortality),
            fmt_float(r.econ_loss),
            fmt_float(r.econ_loss_pct_gdp),
            fmt_float(r.max_icu),
            fmt_float(r.senior_shielding_days)
        );
    }
    write_atomic(&common.out.join("comparison.csv"), &csv)?;
    write_json(&common.out, "comparison.json", &rows)?;

    let mut manifest = RunManifest::new("compare", common, &base);
    manifest.scenarios = scenarios.to_vec();
    manifest.families = vec![family.name().to_string()];
    manifest.chi = chi;
    manifest.safety_cap = safety_cap;
    manifest.knots = budget.knots;
    manifest.population = budget.population;
    manifest.generations = budget.generations;
    manifest.outputs = vec!["comparison.csv".into(), "comparison.json".into()];
    write_manifest(&common.out, &manifest)
}

/// `catalog`: the scenario names, one per line.
pub fn cmd_catalog() -> String {
    scenario::scenario_catalog()
        .into_iter()
        .map(|(name, _)| name)
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_significant_digits() {
        assert_eq!(fmt_float(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_float(546.0), "5.4600000000000000e2");
        let x = 0.1 + 0.2;
        let parsed: f64 = fmt_float(x).parse().unwrap();
        assert_eq!(parsed.to_bits(), x.to_bits());
    }

    #[test]
    fn catalog_text_lists_names() {
        let text = cmd_catalog();
        assert!(text.lines().any(|l| l == "baseline"));
        assert!(text.lines().any(|l| l == "treatment_50"));
        assert!(text.lines().any(|l| l == "comprehensive_wfh"));
    }

    #[test]
    fn calibrate_report_matches_library() {
        let out = cmd_calibrate_beta(&None, "rho_1.0", 2.4).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let beta = v["beta"].as_f64().unwrap();
        assert_eq!(beta, crate::model::germany_baseline().beta);
    }
}
