use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use conflict_fair::approx::{
    component_ef1, mms_approx_poly, path_ef1, randomized_allocation_with, trial_rng, ApproxError,
};
use conflict_fair::criteria::{alpha_mms, fairness_report, is_ef1, nash_welfare, prop_ratio};
use conflict_fair::exact::{construct_alpha_mms, mms_allocation_exact, mms_profile, mnw_exact, ExactError};
use conflict_fair::format::{parse_allocation, parse_instance, write_allocation, write_instance, FormatError};
use conflict_fair::generators::{gen_instances, GenConfig, GenError, GraphModel};
use conflict_fair::harness::{run_experiment, write_outputs, ExperimentConfig, HarnessError};
use conflict_fair::value::{format_rational, int, Rational};
use conflict_fair::{Allocation, Instance, SearchBudget};

#[derive(Parser)]
#[command(name = "conflict-fair", version, about = "Fair allocation of indivisible items under a conflict graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances into a directory.
    Gen {
        #[arg(long, value_parser = parse_model)]
        model: GraphModel,
        /// Number of instances with n ≤ largest component size to produce.
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long, default_value_t = 40)]
        m_cap: usize,
    },
    /// Evaluate an allocation against an instance.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
        #[arg(long, value_enum)]
        criterion: Option<Criterion>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Compute an allocation.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// For `random`: number of seeded trials to average.
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run the experiment pipeline from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args, Clone, Copy)]
struct BudgetArgs {
    #[arg(long, default_value_t = 20_000_000)]
    budget_nodes: u64,
    #[arg(long, default_value_t = 60.0)]
    budget_secs: f64,
}

impl BudgetArgs {
    fn budget(self) -> SearchBudget {
        SearchBudget::new(self.budget_nodes, Duration::from_secs_f64(self.budget_secs.max(0.001)))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    Ef1,
    Prop,
    Mms,
    Nw,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    MmsExact,
    Mnw,
    MnwEf1,
    MmsApprox,
    Random,
    PathEf1,
    ComponentEf1,
    Construct,
}

fn parse_model(s: &str) -> Result<GraphModel, GenError> {
    s.parse()
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::Budget(_) => CliError::Budget(e.to_string()),
            ExactError::Infeasible | ExactError::NoEf1Allocation => CliError::Infeasible(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ApproxError> for CliError {
    fn from(e: ApproxError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Gen(g) => g.into(),
            HarnessError::Json(j) => CliError::Input(j.to_string()),
            HarnessError::Io(io) => CliError::Io(io.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn rat(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn bundles(a: &Allocation) -> Value {
    serde_json::from_str(&write_allocation(a)).expect("allocation JSON")
}

fn gen(
    model: GraphModel,
    count: usize,
    seed: u64,
    out: &Path,
    n: (usize, usize),
    m_cap: usize,
) -> Result<Value, CliError> {
    let config = GenConfig { n_min: n.0, n_max: n.1, m_cap, ..GenConfig::new(model, count, seed) };
    let instances = gen_instances(&config)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(e.to_string()))?;
    let mut manifest = String::new();
    for g in &instances {
        write(&out.join(format!("{}.json", g.id)), &write_instance(&g.instance))?;
        let line = json!({
            "id": g.id,
            "seed": g.seed,
            "n": g.n,
            "m": g.m,
            "params": g.params,
            "counts_toward_quota": g.counts_toward_quota,
        });
        manifest.push_str(&line.to_string());
        manifest.push('\n');
    }
    write(&out.join("manifest.jsonl"), &manifest)?;
    Ok(json!({ "written": instances.len(), "out": out.display().to_string() }))
}

fn check(
    inst: &Instance,
    alloc: &Allocation,
    criterion: Option<Criterion>,
    budget: SearchBudget,
) -> Result<Value, CliError> {
    if alloc.n_agents() != inst.n_agents() {
        return Err(CliError::Input(format!(
            "allocation has {} bundles but the instance has {} agents",
            alloc.n_agents(),
            inst.n_agents()
        )));
    }
    if alloc.bundles().iter().flatten().any(|&j| j >= inst.n_items()) {
        return Err(CliError::Input("allocation names an item outside the instance".into()));
    }
    let mut out = json!({
        "feasible": inst.is_feasible(alloc),
        "complete": alloc.is_complete(inst.n_items()),
    });
    let needs_mu = matches!(criterion, None | Some(Criterion::Mms));
    let mu = if needs_mu { Some(mms_profile(inst, budget)?.mu) } else { None };
    let nw = |a: &Allocation| {
        let w = nash_welfare(inst, a);
        json!({ "positive_agents": w.count_positive, "product": rat(&w.product) })
    };
    match criterion {
        Some(Criterion::Ef1) => out["ef1"] = json!(is_ef1(inst, alloc)),
        Some(Criterion::Prop) => out["prop_ratio"] = rat(&prop_ratio(inst, alloc)),
        Some(Criterion::Nw) => out["nash_welfare"] = nw(alloc),
        Some(Criterion::Mms) => {
            let mu = mu.as_deref().expect("computed above");
            out["mms_ratio"] = rat(&alpha_mms(inst, alloc, mu));
            out["mms"] = mu.iter().map(rat).collect();
        }
        None => {
            let r = fairness_report(inst, alloc, mu.as_deref());
            out["ef1"] = json!(r.ef1);
            out["prop_ratio"] = rat(&r.prop_ratio);
            out["nash_welfare"] = nw(alloc);
            out["mms_ratio"] = r.mms_ratio.as_ref().map(rat).unwrap_or(Value::Null);
            out["mms"] = mu.unwrap_or_default().iter().map(rat).collect();
        }
    }
    Ok(out)
}

fn solve(inst: &Instance, method: Method, seed: u64, trials: u64, budget: SearchBudget) -> Result<Value, CliError> {
    let out = match method {
        Method::MmsExact => {
            let prof = mms_profile(inst, budget)?;
            let (ratio, alloc) = mms_allocation_exact(inst, &prof, budget, None)?;
            json!({
                "allocation": bundles(&alloc),
                "mms": prof.mu.iter().map(rat).collect::<Vec<_>>(),
                "mms_ratio": rat(&ratio),
            })
        }
        Method::Mnw | Method::MnwEf1 => {
            let alloc = mnw_exact(inst, method == Method::MnwEf1, budget)?;
            let w = nash_welfare(inst, &alloc);
            json!({
                "allocation": bundles(&alloc),
                "positive_agents": w.count_positive,
                "product": rat(&w.product),
                "ef1": is_ef1(inst, &alloc),
            })
        }
        Method::MmsApprox => {
            let r = mms_approx_poly(inst)?;
            json!({
                "allocation": bundles(&r.allocation),
                "alpha": rat(&r.alpha),
                "step": format!("{:?}", r.step),
            })
        }
        Method::Construct => {
            let prof = mms_profile(inst, budget)?;
            let c = construct_alpha_mms(inst, &prof, budget)?;
            json!({
                "allocation": bundles(&c.allocation),
                "alpha": rat(&c.alpha),
                "achieved": rat(&c.achieved),
                "case": format!("{:?}", c.case),
            })
        }
        Method::PathEf1 => json!({ "allocation": bundles(&path_ef1(inst)?) }),
        Method::ComponentEf1 => json!({ "allocation": bundles(&component_ef1(inst)?) }),
        Method::Random => {
            let trials = trials.max(1);
            let mut first = None;
            let mut sum = Rational::from_integer(0.into());
            for t in 0..trials {
                let (alloc, _) = randomized_allocation_with(inst, &mut trial_rng(seed, t))?;
                sum += prop_ratio(inst, &alloc);
                first.get_or_insert(alloc);
            }
            let alloc = first.expect("at least one trial");
            json!({
                "allocation": bundles(&alloc),
                "trials": trials,
                "mean_prop_ratio": rat(&(sum / int(trials as i64))),
            })
        }
    };
    Ok(out)
}

fn experiment(config: &Path, out: &Path) -> Result<Value, CliError> {
    let config: ExperimentConfig =
        serde_json::from_str(&read(config)?).map_err(|e| CliError::Input(format!("config: {e}")))?;
    let run = run_experiment(&config)?;
    let summary = write_outputs(out, &run)?;
    let timed_out = run.records.iter().filter(|r| r.timed_out()).count();
    Ok(json!({
        "records": run.records.len(),
        "timed_out": timed_out,
        "summary_rows": summary.rows.len(),
        "out": out.display().to_string(),
    }))
}

fn run(cli: Cli) -> Result<Value, CliError> {
    match cli.command {
        Command::Gen { model, count, seed, out, n_min, n_max, m_cap } => {
            gen(model, count, seed, &out, (n_min, n_max), m_cap)
        }
        Command::Check { instance, allocation, criterion, budget } => {
            let inst = parse_instance(&read(&instance)?)?;
            let alloc = parse_allocation(&read(&allocation)?)?;
            check(&inst, &alloc, criterion, budget.budget())
        }
        Command::Solve { instance, method, seed, trials, budget } => {
            solve(&parse_instance(&read(&instance)?)?, method, seed, trials, budget.budget())
        }
        Command::Experiment { config, out } => experiment(&config, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
