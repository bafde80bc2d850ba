//! Experiment pipeline: generate instances, run every oracle and procedure
//! on each, and aggregate the per-instance records.

mod summary;

pub use summary::{summarize, write_histogram, write_summary_csv, Histogram, ModelSummary, Summary};

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{randomized_allocation_with, trial_rng};
use crate::budget::SearchBudget;
use crate::criteria::{alpha_mms, is_ef1, nash_welfare, prop_ratio};
use crate::exact::{ef1_exists, mms_allocation_exact, mms_profile, mnw_exact, ExactError, MmsProfile};
use crate::generators::{gen_instances, GenConfig, GenError, Generated, GraphModel};
use crate::model::{GraphStats, Instance};
use crate::value::{int, serde_rational, to_f64, Rational};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Experiment settings, read from a JSON file by the command-line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub models: Vec<GraphModel>,
    /// Quota per model: accepted instances with `n ≤ CC(G)`.
    pub per_model: usize,
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub m_cap: usize,
    pub value_points: u64,
    pub trials: u64,
    pub budget_nodes: u64,
    pub budget_secs: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            models: GraphModel::ALL.to_vec(),
            per_model: 200,
            seed: 2024,
            n_min: 2,
            n_max: 6,
            m_cap: 14,
            value_points: 1000,
            trials: 1000,
            budget_nodes: 20_000_000,
            budget_secs: 60.0,
        }
    }
}

impl ExperimentConfig {
    pub fn budget(&self) -> SearchBudget {
        SearchBudget::new(self.budget_nodes, Duration::from_secs_f64(self.budget_secs.max(0.001)))
    }

    /// Generator settings for one model. Each model gets its own seed.
    pub fn gen_config(&self, model: GraphModel) -> GenConfig {
        let offset = GraphModel::ALL.iter().position(|&m| m == model).unwrap_or(0) as u64;
        GenConfig {
            model,
            target_count: self.per_model,
            seed: self.seed.wrapping_mul(31).wrapping_add(offset),
            n_min: self.n_min,
            n_max: self.n_max,
            m_cap: self.m_cap,
            value_points: self.value_points,
        }
    }
}

/// Results for one instance. Rationals are serialized as `"p/q"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub instance_id: String,
    pub model: GraphModel,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub largest_component: usize,
    pub ef1_exists: Option<bool>,
    pub mms_exists: Option<bool>,
    pub free_mms_exists: Option<bool>,
    #[serde(with = "serde_rational::option")]
    pub random_alpha_mms: Option<Rational>,
    #[serde(with = "serde_rational::option")]
    pub random_alpha_prop: Option<Rational>,
    #[serde(with = "serde_rational::option")]
    pub free_random_alpha_mms: Option<Rational>,
    #[serde(with = "serde_rational::option")]
    pub free_random_alpha_prop: Option<Rational>,
    pub mnw_is_ef1: Option<bool>,
    #[serde(with = "serde_rational::option")]
    pub mnw_alpha_mms: Option<Rational>,
    pub free_mnw_is_ef1: Option<bool>,
    #[serde(with = "serde_rational::option")]
    pub free_mnw_alpha_mms: Option<Rational>,
    /// `1 − (P_ef1/P)^(1/k)` over the `k` positive agents, or 1 when enforcing
    /// EF1 lowers the number of positive agents.
    pub mnw_ef1_nw_drop: Option<f64>,
    pub mms_timeout: bool,
    pub ef1_timeout: bool,
    pub mnw_timeout: bool,
    pub free_mms_timeout: bool,
    pub free_mnw_timeout: bool,
}

impl ExperimentRecord {
    /// Any exact search on the conflict instance ran out of budget.
    pub fn timed_out(&self) -> bool {
        self.mms_timeout || self.ef1_timeout || self.mnw_timeout || self.free_mms_timeout || self.free_mnw_timeout
    }
}

/// Wall-clock seconds per stage, kept apart from the records so that those
/// stay byte-identical across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub instance_id: String,
    pub mms: f64,
    pub ef1: f64,
    pub random: f64,
    pub mnw: f64,
    pub total: f64,
}

/// Output of [`run_experiment`]: records and timings in instance order.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub records: Vec<ExperimentRecord>,
    pub timings: Vec<Timing>,
}

/// Generates the instances of every configured model and evaluates them in
/// parallel. Output order is the generation order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun, HarnessError> {
    let mut all: Vec<(GraphModel, Generated)> = Vec::new();
    for &model in &config.models {
        for g in gen_instances(&config.gen_config(model))? {
            all.push((model, g));
        }
    }
    let results: Vec<(ExperimentRecord, Timing)> =
        all.par_iter().map(|(model, g)| evaluate(*model, g, config.trials, config.budget())).collect();
    let (records, timings) = results.into_iter().unzip();
    Ok(ExperimentRun { records, timings })
}

enum Searched<T> {
    Done(T),
    Timeout,
    Failed,
}

fn searched<T>(r: Result<T, ExactError>) -> Searched<T> {
    match r {
        Ok(v) => Searched::Done(v),
        Err(ExactError::Budget(_)) => Searched::Timeout,
        Err(_) => Searched::Failed,
    }
}

/// Mean α-MMS and α-PROP of the randomized allocation over `trials` seeded trials.
fn random_means(
    inst: &Instance,
    mu: Option<&[Rational]>,
    seed: u64,
    trials: u64,
) -> (Option<Rational>, Option<Rational>) {
    if trials == 0 {
        return (None, None);
    }
    let mut sum_mms = Rational::zero();
    let mut sum_prop = Rational::zero();
    for t in 0..trials {
        let Ok((alloc, _)) = randomized_allocation_with(inst, &mut trial_rng(seed, t)) else {
            return (None, None);
        };
        if let Some(mu) = mu {
            sum_mms += alpha_mms(inst, &alloc, mu);
        }
        sum_prop += prop_ratio(inst, &alloc);
    }
    let k = int(trials as i64);
    (mu.map(|_| sum_mms / &k), Some(sum_prop / k))
}

/// MMS existence: search for an allocation reaching every positive share.
fn mms_exists(inst: &Instance, prof: &MmsProfile, budget: SearchBudget) -> Searched<bool> {
    match searched(mms_allocation_exact(inst, prof, budget, Some(&Rational::one()))) {
        Searched::Done((r, _)) => Searched::Done(r >= Rational::one()),
        Searched::Timeout => Searched::Timeout,
        Searched::Failed => Searched::Failed,
    }
}

struct MnwOutcome {
    is_ef1: Option<bool>,
    alpha: Option<Rational>,
    drop: Option<f64>,
    timeout: bool,
}

fn mnw_outcome(inst: &Instance, mu: Option<&[Rational]>, budget: SearchBudget) -> MnwOutcome {
    let plain = match searched(mnw_exact(inst, false, budget)) {
        Searched::Done(a) => a,
        Searched::Timeout => return MnwOutcome { is_ef1: None, alpha: None, drop: None, timeout: true },
        Searched::Failed => return MnwOutcome { is_ef1: None, alpha: None, drop: None, timeout: false },
    };
    let alpha = mu.map(|mu| alpha_mms(inst, &plain, mu));
    let best = nash_welfare(inst, &plain);
    // A maximizer that is already EF1 is also the constrained optimum.
    if is_ef1(inst, &plain) {
        return MnwOutcome { is_ef1: Some(true), alpha, drop: Some(0.0), timeout: false };
    }
    let (is_ef1, drop, timeout) = match mnw_exact(inst, true, budget) {
        Ok(e) => {
            let w = nash_welfare(inst, &e);
            let drop = if w.count_positive == best.count_positive && best.count_positive > 0 {
                let r = to_f64(&(&w.product / &best.product));
                1.0 - r.powf(1.0 / best.count_positive as f64)
            } else if w.count_positive == best.count_positive {
                0.0
            } else {
                1.0
            };
            // Another maximizer may be EF1 even though the one found is not.
            (Some(w == best), Some(drop), false)
        }
        Err(ExactError::NoEf1Allocation) => (Some(false), None, false),
        Err(ExactError::Budget(_)) => (None, None, true),
        Err(_) => (None, None, false),
    };
    MnwOutcome { is_ef1, alpha, drop, timeout }
}

/// Runs every oracle and procedure on one generated instance.
pub fn evaluate(model: GraphModel, g: &Generated, trials: u64, budget: SearchBudget) -> (ExperimentRecord, Timing) {
    let start = Instant::now();
    let inst = &g.instance;
    let free = inst.without_conflicts();
    let stats = GraphStats::of(inst.graph());

    let t = Instant::now();
    let (prof, mut mms_timeout) = match searched(mms_profile(inst, budget)) {
        Searched::Done(p) => (Some(p), false),
        Searched::Timeout => (None, true),
        Searched::Failed => (None, false),
    };
    let mms_exists_flag = match prof.as_ref().map(|p| mms_exists(inst, p, budget)) {
        Some(Searched::Done(b)) => Some(b),
        Some(Searched::Timeout) => {
            mms_timeout = true;
            None
        }
        _ => None,
    };
    let (free_prof, mut free_mms_timeout) = match searched(mms_profile(&free, budget)) {
        Searched::Done(p) => (Some(p), false),
        Searched::Timeout => (None, true),
        Searched::Failed => (None, false),
    };
    let free_mms_exists = match free_prof.as_ref().map(|p| mms_exists(&free, p, budget)) {
        Some(Searched::Done(b)) => Some(b),
        Some(Searched::Timeout) => {
            free_mms_timeout = true;
            None
        }
        _ => None,
    };
    let t_mms = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (ef1, ef1_timeout) = match searched(ef1_exists(inst, budget)) {
        Searched::Done(a) => (Some(a.is_some()), false),
        Searched::Timeout => (None, true),
        Searched::Failed => (None, false),
    };
    let t_ef1 = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mu = prof.as_ref().map(|p| p.mu.as_slice());
    let free_mu = free_prof.as_ref().map(|p| p.mu.as_slice());
    let (random_alpha_mms, random_alpha_prop) = random_means(inst, mu, g.seed, trials);
    let (free_random_alpha_mms, free_random_alpha_prop) = random_means(&free, free_mu, g.seed, trials);
    let t_random = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mnw = mnw_outcome(inst, mu, budget);
    let free_mnw = mnw_outcome(&free, free_mu, budget);
    let t_mnw = t.elapsed().as_secs_f64();

    let record = ExperimentRecord {
        instance_id: g.id.clone(),
        model,
        seed: g.seed,
        n: g.n,
        m: g.m,
        edges: inst.edges().len(),
        max_degree: stats.max_degree,
        largest_component: stats.largest_component,
        ef1_exists: ef1,
        mms_exists: mms_exists_flag,
        free_mms_exists,
        random_alpha_mms,
        random_alpha_prop,
        free_random_alpha_mms,
        free_random_alpha_prop,
        mnw_is_ef1: mnw.is_ef1,
        mnw_alpha_mms: mnw.alpha,
        free_mnw_is_ef1: free_mnw.is_ef1,
        free_mnw_alpha_mms: free_mnw.alpha,
        mnw_ef1_nw_drop: mnw.drop,
        mms_timeout,
        ef1_timeout,
        mnw_timeout: mnw.timeout,
        free_mms_timeout,
        free_mnw_timeout: free_mnw.timeout,
    };
    let timing = Timing {
        instance_id: g.id.clone(),
        mms: t_mms,
        ef1: t_ef1,
        random: t_random,
        mnw: t_mnw,
        total: start.elapsed().as_secs_f64(),
    };
    (record, timing)
}

/// One JSON object per line.
pub fn write_records<W: Write>(mut out: W, records: &[ExperimentRecord]) -> Result<(), HarnessError> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(text: &str) -> Result<Vec<ExperimentRecord>, HarnessError> {
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| serde_json::from_str(l).map_err(HarnessError::from)).collect()
}

pub fn write_timings<W: Write>(mut out: W, timings: &[Timing]) -> Result<(), HarnessError> {
    writeln!(out, "instance_id,mms_secs,ef1_secs,random_secs,mnw_secs,total_secs")?;
    for t in timings {
        writeln!(out, "{},{:.6},{:.6},{:.6},{:.6},{:.6}", t.instance_id, t.mms, t.ef1, t.random, t.mnw, t.total)?;
    }
    Ok(())
}

/// Writes `records.jsonl`, `timings.csv`, `summary.csv` and one
/// `hist_*.csv` per histogram into `dir`.
pub fn write_outputs(dir: &Path, run: &ExperimentRun) -> Result<Summary, HarnessError> {
    std::fs::create_dir_all(dir)?;
    write_records(std::fs::File::create(dir.join("records.jsonl"))?, &run.records)?;
    write_timings(std::fs::File::create(dir.join("timings.csv"))?, &run.timings)?;
    let summary = summarize(&run.records);
    write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?, &summary)?;
    for (name, h) in summary.histograms() {
        write_histogram(std::fs::File::create(dir.join(format!("hist_{name}.csv")))?, h)?;
    }
    Ok(summary)
}
