use clap::{Args, Parser, Subcommand};
use seirshield::policy::PolicyFamily;
use seirshield::report::{self, BudgetArgs, CommonArgs};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "seirshield",
    version,
    about = "Age-structured epidemic simulation, shielding-policy optimization and scenario comparison"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Parameter file (JSON); defaults to the German baseline
    #[arg(long)]
    config: Option<PathBuf>,
    /// Integration step in days
    #[arg(long, default_value_t = 0.25)]
    dt: f64,
    /// Random seed for the policy search
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Skip SVG figure emission
    #[arg(long)]
    no_svg: bool,
}

impl CommonFlags {
    fn to_args(&self) -> CommonArgs {
        CommonArgs {
            config: self.config.clone(),
            dt: self.dt,
            seed: self.seed,
            out: self.out.clone(),
            no_svg: self.no_svg,
        }
    }
}

#[derive(Args, Clone)]
struct BudgetFlags {
    /// Control intervals per policy channel
    #[arg(long, default_value_t = 13)]
    knots: usize,
    /// Optimizer population size (default: 16 x dimension, capped at 96)
    #[arg(long)]
    population: Option<usize>,
    /// Optimizer generations
    #[arg(long, default_value_t = 400)]
    generations: usize,
}

impl BudgetFlags {
    fn to_args(&self) -> BudgetArgs {
        BudgetArgs {
            knots: self.knots,
            population: self.population,
            generations: self.generations,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory under a policy file or the zero policy
    Simulate {
        #[command(flatten)]
        common: CommonFlags,
        /// Catalog scenario name or scenario file path
        #[arg(long, default_value = "baseline")]
        scenario: String,
        /// Policy schedule JSON; omitted means no shielding
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Calibrate the transmission rate to a target reproduction number
    CalibrateBeta {
        /// Parameter file (JSON); defaults to the German baseline
        #[arg(long)]
        config: Option<PathBuf>,
        /// Scenario applied before calibration (e.g. rho_1.0 for the
        /// pre-distancing contact matrix)
        #[arg(long, default_value = "baseline")]
        scenario: String,
        /// Target basic reproduction number
        #[arg(long, default_value_t = 2.4)]
        target: f64,
    },
    /// Optimize one shielding policy at a fixed life weight or cap
    Optimize {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, default_value = "baseline")]
        scenario: String,
        /// Targeting family: uniform, semi or full
        #[arg(long, default_value = "semi")]
        family: PolicyFamily,
        /// Life weight (income units per unit mortality fraction)
        #[arg(long)]
        chi: Option<f64>,
        /// Mortality cap as a population fraction (e.g. 0.002)
        #[arg(long)]
        safety_cap: Option<f64>,
        #[command(flatten)]
        budget: BudgetFlags,
    },
    /// Trace efficient frontiers over the life weight
    Frontier {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, default_value = "baseline")]
        scenario: String,
        /// Targeting families to sweep, in order (repeatable)
        #[arg(long = "family", default_values = ["uniform", "semi"])]
        families: Vec<PolicyFamily>,
        /// Single life weight instead of a full grid
        #[arg(long)]
        chi: Option<f64>,
        /// Number of grid points when no --chi is given
        #[arg(long, default_value_t = 24)]
        chi_grid: usize,
        /// Also solve and mark the safety-capped point per family
        #[arg(long)]
        safety_cap: Option<f64>,
        #[command(flatten)]
        budget: BudgetFlags,
    },
    /// Compare scenarios at one life weight or safety cap
    Compare {
        #[command(flatten)]
        common: CommonFlags,
        /// Scenarios to compare (repeatable)
        #[arg(long = "scenario", required = true)]
        scenarios: Vec<String>,
        #[arg(long, default_value = "semi")]
        family: PolicyFamily,
        #[arg(long)]
        chi: Option<f64>,
        #[arg(long)]
        safety_cap: Option<f64>,
        #[command(flatten)]
        budget: BudgetFlags,
    },
    /// List the named scenarios
    Catalog,
}

fn run(cli: Cli) -> Result<(), report::CliError> {
    match cli.command {
        Command::Simulate {
            common,
            scenario,
            policy,
        } => report::cmd_simulate(&common.to_args(), &scenario, policy.as_deref()),
        Command::CalibrateBeta {
            config,
            scenario,
            target,
        } => {
            let text = report::cmd_calibrate_beta(&config, &scenario, target)?;
            println!("{text}");
            Ok(())
        }
        Command::Optimize {
            common,
            scenario,
            family,
            chi,
            safety_cap,
            budget,
        } => report::cmd_optimize(
            &common.to_args(),
            &scenario,
            family,
            chi,
            safety_cap,
            &budget.to_args(),
        ),
        Command::Frontier {
            common,
            scenario,
            families,
            chi,
            chi_grid,
            safety_cap,
            budget,
        } => report::cmd_frontier(
            &common.to_args(),
            &scenario,
            &families,
            chi,
            chi_grid,
            safety_cap,
            &budget.to_args(),
        ),
        Command::Compare {
            common,
            scenarios,
            family,
            chi,
            safety_cap,
            budget,
        } => report::cmd_compare(
            &common.to_args(),
            &scenarios,
            family,
            chi,
            safety_cap,
            &budget.to_args(),
        ),
        Command::Catalog => {
            println!("{}", report::cmd_catalog());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
