//! Python bindings. Values cross the boundary as exact rational strings
//! (`"10/17"`), which `fractions.Fraction` accepts directly.

use std::path::PathBuf;

use fair::approx::{self, ApproxError};
use fair::criteria;
use fair::exact::{self, ExactError};
use fair::format::{self, FormatError};
use fair::generators::{self, GenConfig, GraphModel};
use fair::harness::{self, ExperimentConfig, HarnessError};
use fair::value::{format_rational, parse_rational};
use fair::{Allocation, ModelError, Rational, SearchBudget};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(conflict_fair, BudgetExhausted, PyException);
create_exception!(conflict_fair, Infeasible, PyException);
create_exception!(conflict_fair, NoEf1Allocation, PyException);

fn exact_err(e: ExactError) -> PyErr {
    match e {
        ExactError::Infeasible => Infeasible::new_err(e.to_string()),
        ExactError::NoEf1Allocation => NoEf1Allocation::new_err(e.to_string()),
        ExactError::Budget(_) => BudgetExhausted::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn approx_err(e: ApproxError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn model_err(e: ModelError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn format_err(e: FormatError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn harness_err(e: HarnessError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat(r: &Rational) -> String {
    format_rational(r)
}

fn budget(max_nodes: u64, time_limit: f64) -> SearchBudget {
    SearchBudget::new(max_nodes, std::time::Duration::from_secs_f64(time_limit))
}

fn alloc(bundles: Vec<Vec<usize>>) -> PyResult<Allocation> {
    Allocation::new(bundles).map_err(model_err)
}

/// An allocation instance: agents' additive valuations and a conflict graph
/// on the items.
#[pyclass(frozen, module = "conflict_fair")]
struct Instance {
    inner: fair::Instance,
}

#[pymethods]
impl Instance {
    /// Values may be ints or rational strings such as `"3/2"`.
    #[new]
    #[pyo3(signature = (valuations, edges=Vec::new()))]
    fn new(valuations: Vec<Vec<Bound<'_, PyAny>>>, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let mut vals = Vec::with_capacity(valuations.len());
        for row in valuations {
            let mut out = Vec::with_capacity(row.len());
            for v in row {
                let r = if let Ok(i) = v.extract::<i64>() {
                    Rational::from_integer(i.into())
                } else {
                    let s: String = v.str()?.extract()?;
                    parse_rational(&s).map_err(|e| PyValueError::new_err(e.to_string()))?
                };
                out.push(r);
            }
            vals.push(out);
        }
        let inner = fair::Instance::new(vals, &edges).map_err(model_err)?;
        Ok(Instance { inner })
    }

    /// Parse the JSON instance format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Instance { inner: format::parse_instance(text).map_err(format_err)? })
    }

    fn to_json(&self) -> String {
        format::write_instance(&self.inner)
    }

    #[getter]
    fn n_agents(&self) -> usize {
        self.inner.n_agents()
    }

    #[getter]
    fn n_items(&self) -> usize {
        self.inner.n_items()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.inner.graph().max_degree()
    }

    #[getter]
    fn valuations(&self) -> Vec<Vec<String>> {
        self.inner.valuations().iter().map(|row| row.iter().map(rat).collect()).collect()
    }

    fn bundle_value(&self, agent: usize, bundle: Vec<usize>) -> PyResult<String> {
        if agent >= self.inner.n_agents() || bundle.iter().any(|&j| j >= self.inner.n_items()) {
            return Err(PyValueError::new_err("agent or item out of range"));
        }
        Ok(rat(&self.inner.bundle_value(agent, &bundle)))
    }

    fn is_feasible(&self, bundles: Vec<Vec<usize>>) -> PyResult<bool> {
        Ok(self.inner.is_feasible(&alloc(bundles)?))
    }

    fn without_conflicts(&self) -> Self {
        Instance { inner: self.inner.without_conflicts() }
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n_agents={}, n_items={}, edges={})",
            self.inner.n_agents(),
            self.inner.n_items(),
            self.inner.edges().len()
        )
    }
}

#[pyfunction]
fn is_ef1(inst: &Instance, bundles: Vec<Vec<usize>>) -> PyResult<bool> {
    Ok(criteria::is_ef1(&inst.inner, &alloc(bundles)?))
}

#[pyfunction]
fn prop_ratio(inst: &Instance, bundles: Vec<Vec<usize>>) -> PyResult<String> {
    Ok(rat(&criteria::prop_ratio(&inst.inner, &alloc(bundles)?)))
}

/// `(number of agents with positive value, product of their values)`.
#[pyfunction]
fn nash_welfare(inst: &Instance, bundles: Vec<Vec<usize>>) -> PyResult<(usize, String)> {
    let w = criteria::nash_welfare(&inst.inner, &alloc(bundles)?);
    Ok((w.count_positive, rat(&w.product)))
}

#[pyfunction]
#[pyo3(signature = (inst, max_nodes=u64::MAX, time_limit=3600.0))]
fn mms_profile(inst: &Instance, max_nodes: u64, time_limit: f64) -> PyResult<Vec<String>> {
    let p = exact::mms_profile(&inst.inner, budget(max_nodes, time_limit)).map_err(exact_err)?;
    if p.infeasible {
        return Err(Infeasible::new_err("no feasible allocation exists"));
    }
    Ok(p.mu.iter().map(rat).collect())
}

#[pyfunction]
#[pyo3(signature = (inst, require_ef1=false, max_nodes=u64::MAX, time_limit=3600.0))]
fn mnw_exact(inst: &Instance, require_ef1: bool, max_nodes: u64, time_limit: f64) -> PyResult<Vec<Vec<usize>>> {
    exact::mnw_exact(&inst.inner, require_ef1, budget(max_nodes, time_limit))
        .map(Allocation::into_bundles)
        .map_err(exact_err)
}

/// An EF1 allocation if one exists, else `None`.
#[pyfunction]
#[pyo3(signature = (inst, max_nodes=u64::MAX, time_limit=3600.0))]
fn ef1_exists(inst: &Instance, max_nodes: u64, time_limit: f64) -> PyResult<Option<Vec<Vec<usize>>>> {
    exact::ef1_exists(&inst.inner, budget(max_nodes, time_limit))
        .map(|a| a.map(Allocation::into_bundles))
        .map_err(exact_err)
}

/// `(guaranteed fraction, bundles)` from the polynomial-time approximation.
#[pyfunction]
fn mms_approx_poly(inst: &Instance) -> PyResult<(String, Vec<Vec<usize>>)> {
    let r = approx::mms_approx_poly(&inst.inner).map_err(approx_err)?;
    Ok((rat(&r.alpha), r.allocation.into_bundles()))
}

/// `(guaranteed fraction, achieved fraction, bundles)` from the exact construction.
#[pyfunction]
#[pyo3(signature = (inst, max_nodes=u64::MAX, time_limit=3600.0))]
fn construct_alpha_mms(
    inst: &Instance,
    max_nodes: u64,
    time_limit: f64,
) -> PyResult<(String, String, Vec<Vec<usize>>)> {
    let b = budget(max_nodes, time_limit);
    let mms = exact::mms_profile(&inst.inner, b).map_err(exact_err)?;
    let c = exact::construct_alpha_mms(&inst.inner, &mms, b).map_err(exact_err)?;
    Ok((rat(&c.alpha), rat(&c.achieved), c.allocation.into_bundles()))
}

#[pyfunction]
fn randomized_allocation(inst: &Instance, seed: u64) -> PyResult<Vec<Vec<usize>>> {
    approx::randomized_allocation(&inst.inner, seed).map(|(a, _)| a.into_bundles()).map_err(approx_err)
}

#[pyfunction]
fn path_ef1(inst: &Instance) -> PyResult<Vec<Vec<usize>>> {
    approx::path_ef1(&inst.inner).map(Allocation::into_bundles).map_err(approx_err)
}

#[pyfunction]
fn component_ef1(inst: &Instance) -> PyResult<Vec<Vec<usize>>> {
    approx::component_ef1(&inst.inner).map(Allocation::into_bundles).map_err(approx_err)
}

/// Generated instances as `(id, instance)` pairs. `model` is `"er"`, `"ba"` or `"ws"`.
#[pyfunction]
#[pyo3(signature = (model, count, seed, n_min=None, n_max=None, m_cap=None))]
fn gen_instances(
    model: &str,
    count: usize,
    seed: u64,
    n_min: Option<usize>,
    n_max: Option<usize>,
    m_cap: Option<usize>,
) -> PyResult<Vec<(String, Instance)>> {
    let model: GraphModel = model.parse().map_err(|e: generators::GenError| PyValueError::new_err(e.to_string()))?;
    let mut cfg = GenConfig::new(model, count, seed);
    cfg.n_min = n_min.unwrap_or(cfg.n_min);
    cfg.n_max = n_max.unwrap_or(cfg.n_max);
    cfg.m_cap = m_cap.unwrap_or(cfg.m_cap);
    let gens = generators::gen_instances(&cfg).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(gens.into_iter().map(|g| (g.id, Instance { inner: g.instance })).collect())
}

/// Run an experiment from a JSON config (missing keys take defaults). Writes
/// the output files when `out_dir` is given and returns the records as JSON
/// lines.
#[pyfunction]
#[pyo3(signature = (config="{}", out_dir=None))]
fn run_experiment(py: Python<'_>, config: &str, out_dir: Option<PathBuf>) -> PyResult<String> {
    let cfg: ExperimentConfig = serde_json::from_str(config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let run = py.detach(|| harness::run_experiment(&cfg)).map_err(harness_err)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir)?;
        harness::write_outputs(&dir, &run).map_err(harness_err)?;
    }
    let mut buf = Vec::new();
    harness::write_records(&mut buf, &run.records).map_err(harness_err)?;
    Ok(String::from_utf8(buf).expect("records are UTF-8"))
}

#[pymodule]
fn conflict_fair(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add("BudgetExhausted", m.py().get_type::<BudgetExhausted>())?;
    m.add("Infeasible", m.py().get_type::<Infeasible>())?;
    m.add("NoEf1Allocation", m.py().get_type::<NoEf1Allocation>())?;
    m.add_function(wrap_pyfunction!(is_ef1, m)?)?;
    m.add_function(wrap_pyfunction!(prop_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(nash_welfare, m)?)?;
    m.add_function(wrap_pyfunction!(mms_profile, m)?)?;
    m.add_function(wrap_pyfunction!(mnw_exact, m)?)?;
    m.add_function(wrap_pyfunction!(ef1_exists, m)?)?;
    m.add_function(wrap_pyfunction!(mms_approx_poly, m)?)?;
    m.add_function(wrap_pyfunction!(construct_alpha_mms, m)?)?;
    m.add_function(wrap_pyfunction!(randomized_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(path_ef1, m)?)?;
    m.add_function(wrap_pyfunction!(component_ef1, m)?)?;
    m.add_function(wrap_pyfunction!(gen_instances, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
