use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use icomm_core::config::{Config, ConfigError};
use icomm_core::coordination::check_admissible;
use icomm_core::executor::{
    consensus_report, initial_values, simulate, total_cost, verify_connectivity_over_time, Horizon, SimOptions,
};
use icomm_core::gen::{generate, GenError, GenOptions};
use icomm_core::{report, MotionPlan, Network, PlanOptions, Planner};
use serde_json::json;

#[derive(Parser)]
#[command(name = "icomm", version, about = "Plan and simulate intermittent rendezvous schedules for robot teams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration and report every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build the motion plans and print k_p, k_s, slots and costs.
    Plan(PlanArgs),
    /// Plan, execute asynchronously and verify connectivity over time.
    Simulate {
        #[command(flatten)]
        plan: PlanArgs,
        /// Suffix cycles to execute after the prefix.
        #[arg(long, default_value_t = 10)]
        cycles: usize,
        /// Average values at meetings, starting from seeded random values.
        #[arg(long)]
        consensus: bool,
        /// Seed for the initial consensus values.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a random valid configuration.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        robots: usize,
        #[arg(long, default_value_t = 5)]
        teams: usize,
        #[arg(long, default_value_t = 20)]
        locations: usize,
        #[arg(long, default_value_t = 3)]
        max_team_size: usize,
        #[arg(long)]
        max_comm_points: Option<usize>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Let every robot use every communication point.
    #[arg(long)]
    relax_footnote1: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Csv => "csv",
        }
    }
}

enum Failure {
    /// Invalid input or a failed check.
    Domain(anyhow::Error),
    /// Unreadable, unwritable or malformed files.
    Io(anyhow::Error),
}

impl Failure {
    fn domain(e: impl Into<anyhow::Error>) -> Self {
        Failure::Domain(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn load(path: &Path) -> Result<Network, Failure> {
    let config = Config::load(path).map_err(|e| match e {
        ConfigError::Io { .. } | ConfigError::Parse(_) => Failure::Io(e.into()),
    })?;
    Network::from_config(&config).map_err(|d| Failure::Domain(anyhow!("{d}")))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::write(dir.join(name), contents)
        .with_context(|| format!("cannot write {}", dir.join(name).display()))
        .map_err(Failure::Io)
}

fn prepare(dir: &Option<PathBuf>) -> Result<Option<&Path>, Failure> {
    match dir {
        None => Ok(None),
        Some(d) => {
            fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display())).map_err(Failure::Io)?;
            Ok(Some(d.as_path()))
        }
    }
}

fn plan(args: &PlanArgs) -> Result<(Network, Planner, MotionPlan), Failure> {
    let net = load(&args.config)?;
    for warning in net.foreign_passages() {
        eprintln!("warning: {warning}");
    }
    let options = PlanOptions { relax_footnote1: args.relax_footnote1 };
    let planner = Planner::new(&net, options).map_err(Failure::domain)?;
    let plan = planner.plan().map_err(Failure::domain)?;
    Ok((net, planner, plan))
}

fn manifest(command: &str, args: &PlanArgs, extra: serde_json::Value) -> String {
    let mut m = json!({
        "command": command,
        "config": args.config.display().to_string(),
        "relax_footnote1": args.relax_footnote1,
        "format": args.format.name(),
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (m.as_object_mut(), extra) {
        obj.extend(more);
    }
    serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n"
}

fn cmd_validate(config: &Path) -> Outcome {
    let net = load(config)?;
    println!(
        "valid: {} locations, {} robots, {} teams, team graph max degree {}",
        net.graph().len(),
        net.num_robots(),
        net.num_teams(),
        net.team_graph().max_degree()
    );
    for warning in net.foreign_passages() {
        println!("warning: {warning}");
    }
    Ok(())
}

fn plan_summary(plan: &MotionPlan, planner: &Planner) -> String {
    let cycle_cost: f64 = plan.robot_costs(planner.wts()).map(|c| c.iter().map(|(_, s)| s).sum()).unwrap_or(f64::NAN);
    format!(
        "k_p={} k_s={} slots={} of {} cycle-cost={}\n",
        plan.k_p,
        plan.k_s,
        plan.slots_used(),
        plan.slots.slot_count,
        report::num(cycle_cost)
    )
}

fn cmd_plan(args: &PlanArgs) -> Outcome {
    let (_, planner, plan) = plan(args)?;
    let admissible = check_admissible(&plan, planner.wts());
    print!("{}", plan_summary(&plan, &planner));
    print!("{}", report::admissibility_text(&admissible));
    if let Some(dir) = prepare(&args.out)? {
        write(dir, "plan.json", &report::plan_json(&plan))?;
        match args.format {
            Format::Text => write(dir, "plan.txt", &report::plan_text(&plan, planner.wts()))?,
            Format::Csv => write(dir, "plan.csv", &report::plan_csv(&plan))?,
        }
        write(dir, "manifest.json", &manifest("plan", args, json!({})))?;
    }
    if admissible.is_clean() {
        Ok(())
    } else {
        Err(Failure::Domain(anyhow!("plan is not admissible")))
    }
}

fn cmd_simulate(args: &PlanArgs, cycles: usize, consensus: bool, seed: u64) -> Outcome {
    let (net, planner, plan) = plan(args)?;
    let mut options = SimOptions { horizon: Horizon::Cycles(cycles), consensus: None };
    if consensus {
        options = options.with_consensus(initial_values(net.num_robots(), seed));
    }
    let trace = simulate(&plan, &net, &options).map_err(Failure::domain)?;
    let connectivity = verify_connectivity_over_time(&trace, &net);
    let spreads = consensus.then(|| consensus_report(&trace));
    let cost = total_cost(&trace);
    print!("{}", plan_summary(&plan, &planner));
    let summary = report::summary_text(&trace, &connectivity, spreads.as_ref(), &cost);
    print!("{summary}");
    if let Some(dir) = prepare(&args.out)? {
        write(dir, "plan.json", &report::plan_json(&plan))?;
        match args.format {
            Format::Text => write(dir, "trace.txt", &report::trace_text(&trace))?,
            Format::Csv => write(dir, "trace.csv", &report::trace_csv(&trace))?,
        }
        write(dir, "waits.csv", &report::waits_csv(&trace))?;
        if consensus {
            write(dir, "consensus.csv", &report::consensus_csv(&trace))?;
        }
        write(dir, "summary.txt", &summary)?;
        let extra = json!({ "cycles": cycles, "consensus": consensus, "seed": seed });
        write(dir, "manifest.json", &manifest("simulate", args, extra))?;
    }
    if connectivity.is_clean() {
        Ok(())
    } else {
        Err(Failure::Domain(anyhow!("some team missed a meeting")))
    }
}

fn cmd_gen(seed: u64, options: &GenOptions, out: Option<&Path>) -> Outcome {
    let config = generate(seed, options).map_err(|e| match e {
        GenError::SizeInfeasible(_) | GenError::Exhausted(_) => Failure::domain(e),
    })?;
    let text = config.to_json() + "\n";
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::Io)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate { config } => cmd_validate(config),
        Command::Plan(args) => cmd_plan(args),
        Command::Simulate { plan, cycles, consensus, seed } => cmd_simulate(plan, *cycles, *consensus, *seed),
        Command::Gen { seed, robots, teams, locations, max_team_size, max_comm_points, out } => {
            let mut options = GenOptions::new(*robots, *teams, *locations);
            options.max_team_size = *max_team_size;
            options.max_comm_points = *max_comm_points;
            cmd_gen(*seed, &options, out.as_deref())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("{e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("{e:#}");
            ExitCode::from(2)
        }
    }
}
