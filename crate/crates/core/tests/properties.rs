mod common;

use conflict_fair::approx::{
    bag_filling, component_ef1, path_ef1, randomized_allocation, reduce_high_value, BagFillingInput, FillOrder,
};
use conflict_fair::criteria::{decycle, envy_graph, is_ef1};
use conflict_fair::exact::{mms_exact, mms_profile, mnw_exact};
use conflict_fair::format::{parse_allocation, parse_instance, write_allocation, write_instance};
use conflict_fair::generators::{gen_graph, gen_instances, gen_valuations, GenConfig, GraphModel, GraphParams};
use conflict_fair::graphtools::greedy_coloring;
use conflict_fair::harness::{summarize, ExperimentConfig};
use conflict_fair::value::{int, ratio, Rational};
use conflict_fair::{Allocation, GraphStats, Instance, SearchBudget};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn budget() -> SearchBudget {
    SearchBudget::unlimited()
}

/// Random instance with `Δ < n` (when `bounded`) from a seed.
fn instance(seed: u64, n: usize, m: usize, p: f64, hi: i64, bounded: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = if bounded { n } else { m + 1 };
    let edges = random_graph(&mut rng, m, p, cap);
    Instance::from_integers(&random_values(&mut rng, n, m, hi), &edges).unwrap()
}

fn sorted_bundles(a: &Allocation) -> Vec<Vec<usize>> {
    let mut b = a.bundles().to_vec();
    b.sort();
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mms_matches_enumeration(seed: u64, n in 1usize..=3, m in 1usize..=8, p in 0.0f64..0.6) {
        let inst = instance(seed, n, m, p, 12, false);
        for i in 0..n {
            let exact = mms_exact(&inst, i, budget()).ok().map(|r| r.0);
            prop_assert_eq!(exact, brute_mms(&inst, i));
        }
    }

    #[test]
    fn mms_is_scale_free(seed: u64, n in 1usize..=4, m in 2usize..=9, a in 1i64..40, b in 1i64..40) {
        let inst = instance(seed, n, m, 0.3, 20, true);
        let prof = mms_profile(&inst, budget()).unwrap();
        let c = ratio(a, b);
        let scaled = mms_profile(&inst.scale_valuations(&vec![c.clone(); n]).unwrap(), budget()).unwrap();
        for i in 0..n {
            prop_assert_eq!(&scaled.mu[i], &(&prof.mu[i] * &c));
        }
    }

    #[test]
    fn normalized_shares_at_most_one(seed: u64, n in 1usize..=4, m in 2usize..=10) {
        let inst = instance(seed, n, m, 0.3, 20, true).normalized(&int(n as i64));
        let prof = mms_profile(&inst, budget()).unwrap();
        prop_assert!(!prof.infeasible);
        prop_assert!(prof.mu.iter().all(|m| *m <= int(1)));
    }

    #[test]
    fn reduction_leaves_enough_value(seed: u64, n in 2usize..=4, m in 2usize..=9) {
        let inst = instance(seed, n, m, 0.3, 20, true);
        let prof = mms_profile(&inst, budget()).unwrap();
        let red = reduce_high_value(&inst, &ratio(1, 2));
        let unmatched = n - red.matched.len();
        for i in 0..n {
            prop_assert!(inst.bundle_value(i, &red.items) >= int(unmatched as i64) * &prof.mu[i]);
        }
        let mut rest: Vec<usize> = red.agents.iter().chain(&red.dropped).copied().collect();
        rest.sort();
        if let (false, Ok(sub)) = (red.items.is_empty(), inst.restrict(&rest, &red.items)) {
            if rest.len() > sub.graph().max_degree() {
                let sub_prof = mms_profile(&sub, budget()).unwrap();
                for (k, &i) in rest.iter().enumerate() {
                    prop_assert!(sub_prof.mu[k] >= prof.mu[i]);
                }
            }
        }
    }

    #[test]
    fn bag_filling_bundles(seed: u64, n in 1usize..=4, m in 1usize..=14, p in 0.0f64..0.5, div in 1i64..6) {
        let inst = instance(seed, n, m, p, 9, false);
        let sources = greedy_coloring(inst.graph()).classes();
        let agents: Vec<usize> = (0..n).collect();
        let limits: Vec<Rational> = agents
            .iter()
            .map(|&i| (inst.total_value(i) / int(div)).max(int(1)))
            .collect();
        let input = BagFillingInput { agents: agents.clone(), sources: sources.clone(), limits: limits.clone(), protected: None, order: FillOrder::Ascending };
        let out = bag_filling(&inst, &input);
        prop_assert!(out.touched.len() <= sources.len().min(agents.len()));
        for (i, b) in &out.assignments {
            prop_assert!(inst.bundle_value(*i, b) >= limits[*i]);
            prop_assert!(sources.iter().any(|s| b.iter().all(|j| s.contains(j))));
        }
        let mut seen: Vec<usize> = out.assignments.iter().flat_map(|(_, b)| b.clone()).chain(out.leftovers.iter().flatten().copied()).collect();
        seen.sort();
        prop_assert_eq!(seen, (0..m).collect::<Vec<_>>());
    }

    #[test]
    fn randomized_allocation_is_feasible_and_repeatable(seed: u64, trial: u64, n in 2usize..=6, m in 1usize..=16) {
        let inst = instance(seed, n, m, 0.4, 9, true);
        let (a, trace) = randomized_allocation(&inst, trial).unwrap();
        prop_assert!(inst.is_feasible(&a) && a.is_complete(m));
        let (b, again) = randomized_allocation(&inst, trial).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(trace, again);
    }

    #[test]
    fn path_ef1_is_ef1(seed: u64, n in 3usize..=6, m in 1usize..=14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = random_paths(&mut rng, m);
        let vals: Vec<Vec<i64>> = random_values(&mut rng, n, m, 1);
        let inst = Instance::from_integers(&vals, &edges).unwrap();
        let a = path_ef1(&inst).unwrap();
        prop_assert!(inst.is_feasible(&a) && a.is_complete(m));
        prop_assert!(is_ef1(&inst, &a));
    }

    #[test]
    fn component_ef1_is_ef1(seed: u64, n in 1usize..=6, m in 1usize..=14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = random_components(&mut rng, m, n);
        let inst = Instance::from_integers(&random_values(&mut rng, n, m, 10), &edges).unwrap();
        let a = component_ef1(&inst).unwrap();
        prop_assert!(inst.is_feasible(&a) && a.is_complete(m));
        prop_assert!(is_ef1(&inst, &a));
    }

    #[test]
    fn decycle_keeps_bundles_and_removes_cycles(seed: u64, n in 1usize..=5, m in 1usize..=10) {
        let inst = instance(seed, n, m, 0.0, 9, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let owner: Vec<usize> = (0..m).map(|_| rand::Rng::random_range(&mut rng, 0..n)).collect();
        let a = alloc_of(&owner, n);
        let d = decycle(&inst, &a);
        prop_assert!(envy_graph(&inst, &d).is_acyclic());
        prop_assert_eq!(sorted_bundles(&a), sorted_bundles(&d));
        for i in 0..n {
            prop_assert!(inst.bundle_value(i, d.bundle(i)) >= inst.bundle_value(i, a.bundle(i)));
        }
    }

    #[test]
    fn format_round_trips(seed: u64, n in 1usize..=5, m in 1usize..=10, den in 1i64..5) {
        let inst = instance(seed, n, m, 0.3, 30, false);
        let inst = inst.scale_valuations(&vec![ratio(1, den); n]).unwrap();
        prop_assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst.clone());
        let owner: Vec<usize> = (0..m).map(|j| j % n).collect();
        let a = alloc_of(&owner, n);
        prop_assert_eq!(parse_allocation(&write_allocation(&a)).unwrap(), a);
    }

    #[test]
    fn generated_graphs_are_simple(seed: u64, m in 3usize..=20, pick in 0usize..3, x in 0.0f64..1.0, k in 1usize..6) {
        let params = match pick {
            0 => GraphParams::ErdosRenyi { p: x },
            1 => GraphParams::BarabasiAlbert { k: k.min(m) },
            _ => GraphParams::WattsStrogatz { d: 2, beta: x },
        };
        let edges = gen_graph(m, &params, seed).unwrap();
        prop_assert!(edges.iter().all(|&(a, b)| a < b && b < m));
        prop_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(edges.clone(), gen_graph(m, &params, seed).unwrap());
    }

    #[test]
    fn generated_values_split_the_points(seed: u64, n in 1usize..=6, m in 1usize..=14) {
        let v = gen_valuations(n, m, 1000, seed);
        for row in &v {
            prop_assert!(row.iter().all(|&x| x >= 0));
            let total: i64 = row.iter().sum();
            prop_assert!((total - 1000).abs() <= (m as i64 + 1) / 2);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// No single move or swap between two agents is feasible and
    /// Pareto-improving for an exact Nash optimum.
    #[test]
    fn mnw_is_locally_pareto_optimal(seed: u64, n in 2usize..=3, m in 2usize..=7) {
        let inst = instance(seed, n, m, 0.3, 9, true);
        let a = mnw_exact(&inst, false, budget()).unwrap();
        let owner: Vec<usize> = a.owners(m).into_iter().map(Option::unwrap).collect();
        let value = |o: &[usize]| -> Vec<Rational> {
            let b = alloc_of(o, n);
            (0..n).map(|i| inst.bundle_value(i, b.bundle(i))).collect()
        };
        let base = value(&owner);
        let improves = |o: &[usize]| {
            if !inst.is_feasible(&alloc_of(o, n)) {
                return false;
            }
            let v = value(o);
            v.iter().zip(&base).all(|(x, y)| x >= y) && v != base
        };
        for j in 0..m {
            for i in 0..n {
                let mut o = owner.clone();
                o[j] = i;
                prop_assert!(!improves(&o), "moving item {} to agent {} improves", j, i);
            }
            for k in j + 1..m {
                let mut o = owner.clone();
                o.swap(j, k);
                prop_assert!(!improves(&o), "swapping items {} and {} improves", j, k);
            }
        }
    }

    #[test]
    fn generated_instances_respect_the_rules(seed: u64, pick in 0usize..3) {
        let model = GraphModel::ALL[pick];
        let cfg = GenConfig { n_max: 5, m_cap: 12, ..GenConfig::new(model, 4, seed) };
        let out = gen_instances(&cfg).unwrap();
        prop_assert_eq!(out.iter().filter(|g| g.counts_toward_quota).count(), 4);
        for g in &out {
            let stats = GraphStats::of(g.instance.graph());
            prop_assert!(stats.max_degree < g.n);
            prop_assert_eq!(g.counts_toward_quota, g.n <= stats.largest_component);
            prop_assert!(g.m >= 2 * g.n && g.m <= (4 * g.n).min(12).max(2 * g.n));
            if model == GraphModel::ErdosRenyi {
                prop_assert!(!g.instance.edges().is_empty());
            }
        }
        prop_assert_eq!(out, gen_instances(&cfg).unwrap());
    }
}

#[test]
fn histogram_totals_match_included_records() {
    let cfg = ExperimentConfig { per_model: 4, n_max: 4, m_cap: 9, trials: 3, ..ExperimentConfig::default() };
    let run = conflict_fair::harness::run_experiment(&cfg).unwrap();
    let s = summarize(&run.records);
    let included = run.records.iter().filter(|r| !r.timed_out());
    let with = included.clone().filter(|r| r.random_alpha_mms.is_some()).count() as u64;
    let mnw = included.filter(|r| r.mnw_alpha_mms.is_some()).count() as u64;
    assert_eq!(s.random_mms.total(), with);
    assert_eq!(s.mnw_mms.total(), mnw);
    let all = s.rows.last().unwrap();
    let avg_m = run.records.iter().map(|r| r.m as f64).sum::<f64>() / run.records.len() as f64;
    assert!((all.avg_m.unwrap() - avg_m).abs() < 1e-12);
}
