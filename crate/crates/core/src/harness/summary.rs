use std::collections::BTreeMap;
use std::io::Write;

use num_traits::One;

use super::{ExperimentRecord, HarnessError};
use crate::value::{ratio, to_f64, Rational};

/// Ratio histogram with bins of width 0.05 over `[0.5, 1)`, plus an
/// underflow bin (`< 0.5`) and an overflow bin (`≥ 1`, MMS attained).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    /// Lower edges of the regular bins, ascending.
    pub bin_edges: Vec<Rational>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Default for Histogram {
    fn default() -> Self {
        Histogram {
            bin_edges: (10..20).map(|k| ratio(k, 20)).collect(),
            counts: vec![0; 10],
            underflow: 0,
            overflow: 0,
        }
    }
}

impl Histogram {
    pub fn add(&mut self, x: &Rational) {
        if *x >= Rational::one() {
            self.overflow += 1;
        } else if *x < self.bin_edges[0] {
            self.underflow += 1;
        } else {
            let k = self.bin_edges.iter().rposition(|e| e <= x).unwrap_or(0);
            self.counts[k] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

/// Aggregates for one group of records (one model, or all of them).
///
/// Means and percentages are `None` when no record contributes. MMS-based
/// fields skip records with any timeout flag.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelSummary {
    pub label: String,
    pub instances: usize,
    pub timed_out: usize,
    pub avg_n: Option<f64>,
    pub avg_m: Option<f64>,
    pub avg_edges: Option<f64>,
    pub avg_max_degree: Option<f64>,
    pub avg_largest_component: Option<f64>,
    pub ef1_pct: Option<f64>,
    pub mms_pct: Option<f64>,
    pub free_mms_pct: Option<f64>,
    pub random_alpha_mms: Option<f64>,
    pub random_alpha_prop: Option<f64>,
    pub free_random_alpha_mms: Option<f64>,
    pub free_random_alpha_prop: Option<f64>,
    pub mnw_ef1_pct: Option<f64>,
    pub mnw_alpha_mms: Option<f64>,
    pub mnw_mms_pct: Option<f64>,
    pub free_mnw_ef1_pct: Option<f64>,
    pub free_mnw_alpha_mms: Option<f64>,
    pub free_mnw_mms_pct: Option<f64>,
    pub mnw_nw_drop: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    /// One row per model in first-seen order, then an `all` row when there
    /// are records.
    pub rows: Vec<ModelSummary>,
    pub random_mms: Histogram,
    pub free_random_mms: Histogram,
    pub mnw_mms: Histogram,
    pub free_mnw_mms: Histogram,
}

impl Summary {
    /// Histograms with their file stems.
    pub fn histograms(&self) -> [(&'static str, &Histogram); 4] {
        [
            ("random_alpha_mms", &self.random_mms),
            ("free_random_alpha_mms", &self.free_random_mms),
            ("mnw_alpha_mms", &self.mnw_mms),
            ("free_mnw_alpha_mms", &self.free_mnw_mms),
        ]
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    (k > 0).then(|| s / k as f64)
}

fn pct(xs: impl Iterator<Item = bool>) -> Option<f64> {
    mean(xs.map(|b| if b { 100.0 } else { 0.0 }))
}

fn group(label: String, rs: &[&ExperimentRecord]) -> ModelSummary {
    let ok: Vec<&&ExperimentRecord> = rs.iter().filter(|r| !r.timed_out()).collect();
    let avg = |f: fn(&ExperimentRecord) -> usize| mean(rs.iter().map(|r| f(r) as f64));
    let rat = |f: fn(&ExperimentRecord) -> &Option<Rational>| mean(ok.iter().filter_map(|r| f(r).as_ref().map(to_f64)));
    let reach = |f: fn(&ExperimentRecord) -> &Option<Rational>| {
        pct(ok.iter().filter_map(|r| f(r).as_ref().map(|a| *a >= Rational::one())))
    };
    ModelSummary {
        label,
        instances: rs.len(),
        timed_out: rs.len() - ok.len(),
        avg_n: avg(|r| r.n),
        avg_m: avg(|r| r.m),
        avg_edges: avg(|r| r.edges),
        avg_max_degree: avg(|r| r.max_degree),
        avg_largest_component: avg(|r| r.largest_component),
        ef1_pct: pct(rs.iter().filter_map(|r| r.ef1_exists)),
        mms_pct: pct(ok.iter().filter_map(|r| r.mms_exists)),
        free_mms_pct: pct(ok.iter().filter_map(|r| r.free_mms_exists)),
        random_alpha_mms: rat(|r| &r.random_alpha_mms),
        random_alpha_prop: mean(rs.iter().filter_map(|r| r.random_alpha_prop.as_ref().map(to_f64))),
        free_random_alpha_mms: rat(|r| &r.free_random_alpha_mms),
        free_random_alpha_prop: mean(rs.iter().filter_map(|r| r.free_random_alpha_prop.as_ref().map(to_f64))),
        mnw_ef1_pct: pct(rs.iter().filter_map(|r| r.mnw_is_ef1)),
        mnw_alpha_mms: rat(|r| &r.mnw_alpha_mms),
        mnw_mms_pct: reach(|r| &r.mnw_alpha_mms),
        free_mnw_ef1_pct: pct(rs.iter().filter_map(|r| r.free_mnw_is_ef1)),
        free_mnw_alpha_mms: rat(|r| &r.free_mnw_alpha_mms),
        free_mnw_mms_pct: reach(|r| &r.free_mnw_alpha_mms),
        mnw_nw_drop: mean(rs.iter().filter_map(|r| r.mnw_ef1_nw_drop)),
    }
}

/// Per-model and overall aggregates plus the four α-MMS histograms.
/// Depends on nothing but the records.
pub fn summarize(records: &[ExperimentRecord]) -> Summary {
    let mut by_model: BTreeMap<usize, (String, Vec<&ExperimentRecord>)> = BTreeMap::new();
    let mut first_seen: Vec<String> = Vec::new();
    for r in records {
        let label = r.model.short_name().to_string();
        let pos = first_seen.iter().position(|l| *l == label).unwrap_or_else(|| {
            first_seen.push(label.clone());
            first_seen.len() - 1
        });
        by_model.entry(pos).or_insert_with(|| (label, Vec::new())).1.push(r);
    }
    let mut rows: Vec<ModelSummary> = by_model.into_values().map(|(l, rs)| group(l, &rs)).collect();
    if !records.is_empty() {
        let all: Vec<&ExperimentRecord> = records.iter().collect();
        rows.push(group("all".to_string(), &all));
    }
    let mut s = Summary { rows, ..Summary::default() };
    for r in records.iter().filter(|r| !r.timed_out()) {
        let pairs = [
            (&r.random_alpha_mms, &mut s.random_mms),
            (&r.free_random_alpha_mms, &mut s.free_random_mms),
            (&r.mnw_alpha_mms, &mut s.mnw_mms),
            (&r.free_mnw_alpha_mms, &mut s.free_mnw_mms),
        ];
        for (v, h) in pairs {
            if let Some(v) = v {
                h.add(v);
            }
        }
    }
    s
}

const SUMMARY_HEADER: &str = "model,instances,timed_out,avg_n,avg_m,avg_edges,avg_max_degree,avg_largest_component,\
ef1_pct,mms_pct,free_mms_pct,random_alpha_mms,random_alpha_prop,free_random_alpha_mms,free_random_alpha_prop,\
mnw_ef1_pct,mnw_alpha_mms,mnw_mms_pct,free_mnw_ef1_pct,free_mnw_alpha_mms,free_mnw_mms_pct,mnw_nw_drop";

/// Comma-separated table, one row per [`ModelSummary`]. Missing values are
/// left empty.
pub fn write_summary_csv<W: Write>(mut out: W, s: &Summary) -> Result<(), HarnessError> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    let f = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
    for r in &s.rows {
        let cells = [
            r.avg_n,
            r.avg_m,
            r.avg_edges,
            r.avg_max_degree,
            r.avg_largest_component,
            r.ef1_pct,
            r.mms_pct,
            r.free_mms_pct,
            r.random_alpha_mms,
            r.random_alpha_prop,
            r.free_random_alpha_mms,
            r.free_random_alpha_prop,
            r.mnw_ef1_pct,
            r.mnw_alpha_mms,
            r.mnw_mms_pct,
            r.free_mnw_ef1_pct,
            r.free_mnw_alpha_mms,
            r.free_mnw_mms_pct,
            r.mnw_nw_drop,
        ]
        .map(f);
        writeln!(out, "{},{},{},{}", r.label, r.instances, r.timed_out, cells.join(","))?;
    }
    Ok(())
}

/// `bin_edge,count` lines: the underflow bin under edge `0`, the regular
/// bins under their lower edges, the overflow bin under edge `1`.
pub fn write_histogram<W: Write>(mut out: W, h: &Histogram) -> Result<(), HarnessError> {
    writeln!(out, "bin_edge,count")?;
    writeln!(out, "0,{}", h.underflow)?;
    for (e, c) in h.bin_edges.iter().zip(&h.counts) {
        writeln!(out, "{},{}", to_f64(e), c)?;
    }
    writeln!(out, "1,{}", h.overflow)?;
    Ok(())
}
