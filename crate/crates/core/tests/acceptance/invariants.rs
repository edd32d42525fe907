//! Every module's invariants as proptest properties.

use std::collections::BTreeMap;

use fkd_core::approx::{fptas, guesses, scale_profits, Epsilon, ExactMethod};
use fkd_core::convex::{
    check_stage_properties, convex_profiles, parse_ordering, solve_convex, validate_convex_ordering, ConvexDp,
    StageStructure,
};
use fkd_core::cw::{check_expression_matches, cw_profiles, dp_node, parse_k_expression, CwDp, Node};
use fkd_core::gen::{self, Rng};
use fkd_core::oracle::{brute_force_optimum, brute_force_profiles};
use fkd_core::tin::{
    clique_tree_of_chordal, elimination_decomposition, make_nice, parse_tree_decomposition, solve_tin, validate_td,
    NiceKind, TinDp, TreeDecomposition,
};
use fkd_core::{
    connected_components, edgeless_profiles, parse_instance, profile_of, validate_coloring, ConflictInstance, Limits,
    PartialKColoring, Profile, ProfileSet, SolveReport,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rayon::prelude::*;

use crate::oracles::{self, Set, Table};

type Outcome = Result<(), String>;

fn check<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn limits() -> Limits {
    Limits::default()
}

fn fail(msg: impl Into<String>) -> TestCaseError {
    TestCaseError::fail(msg.into())
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| fail(e.to_string()))
}

/// A random graph with `n <= max_n`, `k <= max_k`.
fn graph(seed: u64, max_n: usize, max_k: usize, max_profit: u64) -> ConflictInstance {
    let mut rng = Rng::new(seed);
    let n = rng.index(max_n + 1);
    let k = 1 + rng.index(max_k);
    let p = rng.below(101) as u32;
    gen::gen_random_graph(n, k, p, max_profit, rng.next_u64())
}

fn convex_instance(seed: u64, max_a: usize, max_b: usize, max_k: usize, max_profit: u64) -> (ConflictInstance, usize) {
    let mut rng = Rng::new(seed);
    let na = 1 + rng.index(max_a);
    let nb = rng.index(max_b + 1);
    let k = 1 + rng.index(max_k);
    (gen::gen_convex_bipartite(na, nb, k, max_profit, rng.next_u64()).0, na)
}

fn shuffle(rng: &mut Rng, xs: &mut [usize]) {
    for i in (1..xs.len()).rev() {
        xs.swap(i, rng.index(i + 1));
    }
}

/// A proper coloring: random colors, then conflicts dropped.
fn random_coloring(rng: &mut Rng, inst: &ConflictInstance) -> Vec<usize> {
    let mut colors: Vec<usize> = (0..inst.n()).map(|_| rng.index(inst.k() + 1)).collect();
    for &(u, v) in inst.edges() {
        if colors[u] != 0 && colors[u] == colors[v] {
            colors[v] = 0;
        }
    }
    colors
}

fn profile_sets(k: usize, count: usize) -> impl Strategy<Value = Vec<Vec<Vec<u64>>>> {
    prop::collection::vec(prop::collection::vec(prop::collection::vec(0u64..15, k), 1..8), count)
}

fn to_set(k: usize, rows: &[Vec<u64>]) -> ProfileSet {
    ProfileSet::from_profiles(k, rows.iter().map(|r| Profile::from_slice(r)), usize::MAX).unwrap()
}

// ---------------------------------------------------------------- model

fn model_round_trip(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let inst = graph(seed, 12, 3, 1000);
        prop_assert_eq!(ok(parse_instance(&inst.to_text()))?, inst);
        Ok(())
    })
}

fn model_permutation_invariance(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let inst = graph(seed, 10, 3, 20);
        let mut rng = Rng::new(seed ^ 0x5555);
        let colors = random_coloring(&mut rng, &inst);
        let mut perm: Vec<usize> = (0..inst.n()).collect();
        shuffle(&mut rng, &mut perm);
        let edges: Vec<(usize, usize)> = inst.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let mut profits = vec![vec![0; inst.n()]; inst.k()];
        let mut moved = vec![0; inst.n()];
        for v in 0..inst.n() {
            for (j, row) in profits.iter_mut().enumerate() {
                row[perm[v]] = inst.profit(j, v);
            }
            moved[perm[v]] = colors[v];
        }
        let other = ok(ConflictInstance::new(inst.n(), profits, &edges))?;
        let c = PartialKColoring::from_assignment(&colors, inst.k());
        let d = PartialKColoring::from_assignment(&moved, inst.k());
        ok(validate_coloring(&inst, &c))?;
        ok(validate_coloring(&other, &d))?;
        prop_assert_eq!(profile_of(&inst, &c), profile_of(&other, &d));
        Ok(())
    })
}

fn model_empty_coloring(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let inst = graph(seed, 12, 4, 50);
        prop_assert!(profile_of(&inst, &PartialKColoring::empty(inst.k())).is_zero());
        Ok(())
    })
}

fn model_components(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let inst = graph(seed, 12, 2, 9);
        let parts = connected_components(&inst);
        let mut seen = vec![false; inst.n()];
        for c in &parts.components {
            for &v in &c.vertices {
                prop_assert!(!std::mem::replace(&mut seen[v], true), "vertex {} twice", v);
            }
            prop_assert_eq!(connected_components(&c.instance).len(), 1);
        }
        prop_assert!(seen.iter().all(|&s| s));

        let bare = ok(ConflictInstance::edgeless(inst.profit_matrix().to_vec()))?;
        let mut merged = ProfileSet::zero(inst.k());
        for c in &connected_components(&bare).components {
            let items: Vec<Profile> = (0..c.instance.n()).map(|v| c.instance.item(v)).collect();
            merged = ok(merged.merge(&ok(edgeless_profiles(inst.k(), &items, usize::MAX))?, usize::MAX))?;
        }
        let items: Vec<Profile> = (0..inst.n()).map(|v| inst.item(v)).collect();
        prop_assert_eq!(merged, ok(edgeless_profiles(inst.k(), &items, usize::MAX))?);
        Ok(())
    })
}

// -------------------------------------------------------------- profile

fn profile_edgeless_oracle(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let mut rng = Rng::new(seed);
        let n = rng.index(9);
        let k = 1 + rng.index(3);
        let inst = ok(ConflictInstance::edgeless(
            (0..k).map(|_| (0..n).map(|_| rng.below(11)).collect()).collect(),
        ))?;
        let items: Vec<Profile> = (0..n).map(|v| inst.item(v)).collect();
        let set = ok(edgeless_profiles(k, &items, usize::MAX))?;
        prop_assert_eq!(oracles::set_of(&set), oracles::all_profiles(&inst));
        Ok(())
    })
}

fn profile_merge_algebra(cases: u32) -> Outcome {
    let strategy = (1usize..=3).prop_flat_map(|k| (Just(k), profile_sets(k, 3)));
    check(cases, strategy, |(k, sets)| {
        let (a, b, c) = (to_set(k, &sets[0]), to_set(k, &sets[1]), to_set(k, &sets[2]));
        let m = |x: &ProfileSet, y: &ProfileSet| x.merge(y, usize::MAX).unwrap();
        prop_assert_eq!(m(&a, &b), m(&b, &a));
        prop_assert_eq!(m(&m(&a, &b), &c), m(&a, &m(&b, &c)));
        prop_assert_eq!(m(&a, &ProfileSet::zero(k)), a);
        Ok(())
    })
}

fn profile_merge_best(cases: u32) -> Outcome {
    let strategy = (1usize..=3).prop_flat_map(|k| (Just(k), profile_sets(k, 2)));
    check(cases, strategy, |(k, sets)| {
        let mut a = to_set(k, &sets[0]);
        let mut b = to_set(k, &sets[1]);
        a.insert(Profile::zero(k), usize::MAX).unwrap();
        b.insert(Profile::zero(k), usize::MAX).unwrap();
        let best = a.merge(&b, usize::MAX).unwrap().best_satisfaction().unwrap();
        prop_assert!(best >= a.best_satisfaction().unwrap().max(b.best_satisfaction().unwrap()));
        Ok(())
    })
}

fn profile_prune_keeps_best(cases: u32) -> Outcome {
    let strategy = (1usize..=4).prop_flat_map(|k| (Just(k), profile_sets(k, 1)));
    check(cases, strategy, |(k, sets)| {
        let s = to_set(k, &sets[0]);
        let pruned = s.dominance_prune();
        prop_assert_eq!(pruned.best_satisfaction().unwrap(), s.best_satisfaction().unwrap());
        for q in pruned.iter() {
            prop_assert!(s.contains(q));
            prop_assert!(!s.iter().any(|r| r != q && r.dominates(q)));
        }
        Ok(())
    })
}

fn profile_members_bounded(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, na) = convex_instance(seed, 4, 4, 2, 12);
        let totals = inst.total_profits();
        let co = ok(validate_convex_ordering(&inst, &(0..na).collect::<Vec<_>>(), &(na..inst.n()).collect::<Vec<_>>()))?;
        for set in [ok(convex_profiles(&inst, Some(&co), &limits()))?, ok(brute_force_profiles(&inst, &limits()))?] {
            prop_assert!(set.iter().all(|q| totals.dominates(q)));
        }
        Ok(())
    })
}

// --------------------------------------------------------------- oracle

fn oracle_witness_valid(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let inst = graph(seed, 8, 2, 9);
        let sol = ok(brute_force_optimum(&inst, &limits()))?;
        ok(validate_coloring(&inst, &sol.witness))?;
        prop_assert_eq!(profile_of(&inst, &sol.witness), sol.profile.clone());
        prop_assert_eq!(sol.optimum, oracles::optimum(&inst));
        Ok(())
    })
}

fn oracle_matches_mis(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let inst = graph(seed, 10, 1, 30);
        let best = ok(brute_force_profiles(&inst, &limits()))?.iter().map(|q| q.as_slice()[0]).max().unwrap();
        prop_assert_eq!(best, oracles::mis(&inst, inst.profits(0)));
        Ok(())
    })
}

fn oracle_edge_monotone(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let inst = graph(seed, 7, 2, 6);
        let n = inst.n();
        let missing: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| !inst.has_edge(u, v)).collect();
        if missing.is_empty() {
            return Ok(());
        }
        let extra = missing[Rng::new(seed).index(missing.len())];
        let mut edges = inst.edges().to_vec();
        edges.push(extra);
        let denser = ok(ConflictInstance::new(n, inst.profit_matrix().to_vec(), &edges))?;
        let small = ok(brute_force_profiles(&denser, &limits()))?;
        let big = ok(brute_force_profiles(&inst, &limits()))?;
        prop_assert!(small.iter().all(|q| big.contains(q)));
        Ok(())
    })
}

// --------------------------------------------------------------- convex

/// Guess -> profiles over colorings of the stage graph, where a guess
/// records the last `A` position used by each agent.
fn stage_oracle(inst: &ConflictInstance, dp: &ConvexDp, j: usize) -> Table {
    let st = dp.structure();
    let mut vs: Vec<usize> = (1..=st.u[j]).map(|i| dp.a_vertex(i)).collect();
    let na = vs.len();
    vs.extend((1..=st.v[j]).map(|h| dp.b_vertex(h)));
    let mut out = Table::new();
    oracles::each_coloring(
        vs.len(),
        inst.k(),
        &|a, b| inst.has_edge(vs[a], vs[b]),
        &|l, a| inst.profit(l, vs[a]),
        &mut |colors, q| {
            let mut g = vec![0u64; inst.k()];
            for (x, &c) in colors[..na].iter().enumerate() {
                if c > 0 {
                    g[c - 1] = g[c - 1].max(x as u64 + 1);
                }
            }
            out.entry(g).or_default().insert(q.to_vec());
        },
    );
    out
}

/// Connected components with at least one edge, each with the restricted
/// identity ordering.
fn convex_components(inst: &ConflictInstance, na: usize) -> Vec<(ConflictInstance, fkd_core::convex::ConvexOrdering)> {
    connected_components(inst)
        .components
        .into_iter()
        .filter(|c| c.vertices.len() > 1)
        .map(|c| {
            let a: Vec<usize> = (0..c.vertices.len()).filter(|&x| c.vertices[x] < na).collect();
            let b: Vec<usize> = (0..c.vertices.len()).filter(|&x| c.vertices[x] >= na).collect();
            let co = validate_convex_ordering(&c.instance, &a, &b).expect("restriction stays convex");
            (c.instance, co)
        })
        .collect()
}

fn convex_stage_tables(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, na) = convex_instance(seed, 5, 5, 2, 5);
        for (comp, co) in convex_components(&inst, na) {
            let dp = ok(ConvexDp::run(&comp, &co, &limits()))?;
            for j in 0..dp.structure().stages() {
                let got: Table = dp
                    .stage(j)
                    .iter()
                    .map(|(g, s)| (g.iter().map(|&x| x as u64).collect(), oracles::set_of(s)))
                    .collect();
                prop_assert_eq!(&got, &stage_oracle(&comp, &dp, j), "stage {}", j);
                for g in dp.stage(j).keys() {
                    let nonzero: Vec<usize> = g.iter().copied().filter(|&x| x != 0).collect();
                    let mut dedup = nonzero.clone();
                    dedup.sort_unstable();
                    dedup.dedup();
                    prop_assert_eq!(nonzero.len(), dedup.len(), "guess {:?}", g);
                }
            }
        }
        Ok(())
    })
}

fn convex_full_set(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, na) = convex_instance(seed, 5, 5, 2, 5);
        let co = ok(validate_convex_ordering(&inst, &(0..na).collect::<Vec<_>>(), &(na..inst.n()).collect::<Vec<_>>()))?;
        prop_assert_eq!(
            oracles::set_of(&ok(convex_profiles(&inst, Some(&co), &limits()))?),
            oracles::all_profiles(&inst)
        );
        Ok(())
    })
}

fn convex_stage_properties(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, na) = convex_instance(seed, 13, 14, 1, 1);
        for (comp, co) in convex_components(&inst, na) {
            let dp = ok(ConvexDp::run(&comp, &co, &limits()))?;
            ok(check_stage_properties(dp.structure(), co.a_order().len()))?;
        }
        // raw endpoint tables
        let mut rng = Rng::new(seed);
        let s = 1 + rng.index(13);
        let rows: Vec<(usize, usize, usize)> = (0..1 + rng.index(14))
            .map(|h| {
                let lo = 1 + rng.index(s);
                (h, lo, lo + rng.index(s - lo + 1))
            })
            .collect();
        let st = StageStructure::from_endpoints(&rows);
        let top = rows.iter().map(|r| r.2).max().unwrap();
        ok(check_stage_properties(&st, top))?;
        Ok(())
    })
}

fn convex_k1_is_mis(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let mut rng = Rng::new(seed);
        let na = 1 + rng.index(7);
        let nb = rng.index(15 - na);
        let (inst, co) = gen::gen_convex_bipartite(na, nb, 1, 20, rng.next_u64());
        let sol = ok(solve_convex(&inst, Some(&co), &limits()))?;
        prop_assert_eq!(sol.optimum, oracles::mis(&inst, inst.profits(0)));
        ok(validate_coloring(&inst, &sol.witness))?;
        Ok(())
    })
}

// ------------------------------------------------------------------- cw

fn cw_case(seed: u64) -> (ConflictInstance, fkd_core::cw::CliqueExpression) {
    let mut rng = Rng::new(seed);
    let leaves = 1 + rng.index(6);
    let labels = 1 + rng.index(3);
    let k = 1 + rng.index(2);
    gen::gen_cw_instance(leaves, labels, k, 5, rng.next_u64())
}

fn cw_node_tables(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, expr) = cw_case(seed);
        let dp = ok(CwDp::run(&inst, &expr, &limits()))?;
        for node in 0..expr.nodes().len() {
            prop_assert_eq!(oracles::cw_table(dp.table(node)), oracles::cw_node(&inst, &expr, node), "node {}", node);
        }
        Ok(())
    })
}

fn cw_root_complete(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, expr) = cw_case(seed);
        prop_assert_eq!(oracles::set_of(&ok(cw_profiles(&inst, &expr, &limits()))?), oracles::all_profiles(&inst));
        Ok(())
    })
}

fn cw_label_hygiene(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, expr) = cw_case(seed);
        let dp = ok(CwDp::run(&inst, &expr, &limits()))?;
        for (idx, node) in expr.nodes().iter().enumerate() {
            for key in dp.table(idx).keys() {
                match *node {
                    Node::Eta { i, j, .. } => {
                        let both = (1u32 << i) | (1 << j);
                        prop_assert!(key.iter().all(|&l| l & both != both));
                    }
                    Node::Rho { i, .. } => prop_assert!(key.iter().all(|&l| l & (1 << i) == 0)),
                    _ => {}
                }
            }
        }
        Ok(())
    })
}

fn cw_union_symmetric(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, expr) = cw_case(seed);
        let dp = ok(CwDp::run(&inst, &expr, &limits()))?;
        for (idx, node) in expr.nodes().iter().enumerate() {
            if let Node::Union(l, r) = *node {
                let mut work = 0;
                let swapped = ok(dp_node(&inst, Node::Union(r, l), &[dp.table(r), dp.table(l)], &limits(), &mut work))?;
                prop_assert_eq!(&swapped, dp.table(idx));
            }
        }
        Ok(())
    })
}

// ------------------------------------------------------------------ tin

fn random_decomposition(seed: u64, max_n: usize) -> (ConflictInstance, TreeDecomposition) {
    let inst = graph(seed, max_n, 2, 5);
    let mut order: Vec<usize> = (0..inst.n()).collect();
    shuffle(&mut Rng::new(seed ^ 0xabcd), &mut order);
    let td = elimination_decomposition(&inst, &order).expect("order is a permutation");
    (inst, td)
}

fn tin_node_tables(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, td) = random_decomposition(seed, 8);
        ok(validate_td(&inst, &td, &limits()))?;
        let nice = make_nice(&td);
        ok(nice.check())?;
        let dp = ok(TinDp::run(&inst, nice, &limits()))?;
        for t in 0..dp.nice().nodes().len() {
            prop_assert_eq!(oracles::tin_table(dp.table(t)), oracles::tin_node(&inst, dp.nice(), t), "node {}", t);
        }
        Ok(())
    })
}

fn tin_single_bag(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let inst = graph(seed, 8, 2, 9);
        let td = ok(TreeDecomposition::new(inst.n(), vec![(0..inst.n()).collect()], vec![]))?;
        prop_assert_eq!(ok(solve_tin(&inst, &td, &limits()))?.optimum, oracles::optimum(&inst));
        Ok(())
    })
}

fn tin_chordal(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let mut rng = Rng::new(seed);
        let n = 1 + rng.index(10);
        let width = rng.index(4.min(n));
        let (inst, _) = ok(gen::gen_partial_ktree(n, width, 1 + rng.index(2), 6, 0, rng.next_u64()))?;
        let td = ok(clique_tree_of_chordal(&inst))?;
        prop_assert_eq!(ok(validate_td(&inst, &td, &limits()))?.independence, 1);
        let sol = ok(solve_tin(&inst, &td, &limits()))?;
        prop_assert_eq!(sol.optimum, oracles::optimum(&inst));
        Ok(())
    })
}

fn tin_join_correction(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, td) = random_decomposition(seed, 9);
        let dp = ok(TinDp::run(&inst, make_nice(&td), &limits()))?;
        for (t, node) in dp.nice().nodes().iter().enumerate() {
            if node.kind != NiceKind::Join {
                continue;
            }
            for (c, set) in dp.table(t) {
                let mut w = vec![0u64; inst.k()];
                for (x, &col) in c.iter().enumerate() {
                    if col > 0 {
                        w[col as usize - 1] += inst.profit(col as usize - 1, node.bag[x]);
                    }
                }
                let w = Profile::from_slice(&w);
                prop_assert!(set.iter().all(|q| q.dominates(&w)));
            }
        }
        Ok(())
    })
}

// --------------------------------------------------------------- approx

fn approx_case(seed: u64) -> (ConflictInstance, u64, Epsilon) {
    let mut rng = Rng::new(seed);
    let (inst, _) = convex_instance(rng.next_u64(), 4, 4, 2, 60);
    let den = 2 + rng.below(30);
    let eps = Epsilon::new(1 + rng.below(den - 1), den).unwrap();
    let opt = oracles::optimum(&inst);
    (inst, opt, eps)
}

fn approx_guarantee(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, opt, eps) = approx_case(seed);
        let out = ok(fptas(&inst, eps, ExactMethod::Convex(None), &limits()))?;
        ok(validate_coloring(&inst, &out.witness))?;
        prop_assert_eq!(profile_of(&inst, &out.witness).satisfaction_level(), out.value);
        prop_assert!(eps.accepts(out.value, opt), "value {} opt {} eps {}", out.value, opt, eps);
        Ok(())
    })
}

fn approx_call_bound(cases: u32) -> Outcome {
    check(cases, (any::<u64>(), 0u64..1_000_000), |(seed, q)| {
        let bound = (64 - q.leading_zeros()) as usize + 1;
        prop_assert!(guesses(q).len() <= bound);
        let (inst, _, eps) = approx_case(seed);
        let out = ok(fptas(&inst, eps, ExactMethod::Convex(None), &limits()))?;
        let q = inst.max_total_profit();
        prop_assert!(out.calls <= (64 - q.leading_zeros()) as usize + 1);
        Ok(())
    })
}

fn approx_tiny_epsilon_exact(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let (inst, opt, _) = approx_case(seed);
        // K = 1 for every guess once ε·Q < 2n
        let den = 2 * inst.n().max(1) as u64 * inst.max_total_profit().max(1) + 1;
        let eps = ok(Epsilon::new(1, den))?;
        prop_assert_eq!(eps.scale_factor(inst.max_total_profit(), inst.n()), 1);
        prop_assert_eq!(ok(scale_profits(&inst, 1))?.instance, inst.clone());
        prop_assert_eq!(ok(fptas(&inst, eps, ExactMethod::Convex(None), &limits()))?.value, opt);
        Ok(())
    })
}

// ---------------------------------------------------------- generators

fn gen_outputs_validate(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let mut rng = Rng::new(seed);
        let (na, nb, k) = (rng.index(7), rng.index(7), 1 + rng.index(3));
        let (inst, co) = gen::gen_convex_bipartite(na, nb, k, 9, seed);
        prop_assert_eq!(ok(parse_instance(&inst.to_text()))?, inst.clone());
        let (a, b) = ok(parse_ordering(&co.to_text()))?;
        prop_assert_eq!(ok(validate_convex_ordering(&inst, &a, &b))?, co);

        let n = 1 + rng.index(12);
        let width = rng.index(n.min(4));
        let (inst, td) = ok(gen::gen_partial_ktree(n, width, k, 9, rng.below(101) as u32, seed))?;
        prop_assert_eq!(ok(parse_instance(&inst.to_text()))?, inst.clone());
        let td2 = ok(parse_tree_decomposition(&td.to_text()))?;
        prop_assert_eq!(&td2, &td);
        prop_assert!(ok(validate_td(&inst, &td2, &limits()))?.width <= width);

        let (inst, expr) = gen::gen_cw_instance(1 + rng.index(10), 1 + rng.index(4), k, 9, seed);
        prop_assert_eq!(ok(parse_instance(&inst.to_text()))?, inst.clone());
        let expr2 = ok(parse_k_expression(&expr.to_text()))?;
        prop_assert_eq!(&expr2, &expr);
        ok(check_expression_matches(&expr2, &inst))?;
        Ok(())
    })
}

fn report_json_schema(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let inst = graph(seed, 7, 3, 9);
        let sol = ok(brute_force_optimum(&inst, &limits()))?;
        let v: serde_json::Value = ok(serde_json::from_str(&SolveReport::new(&sol, "brute").to_json()))?;
        prop_assert_eq!(v["optimum"].as_u64(), Some(sol.optimum));
        let profile = v["profile"].as_array().ok_or_else(|| fail("profile"))?;
        prop_assert_eq!(profile.len(), inst.k());
        prop_assert!(profile.iter().all(|x| x.is_u64()));
        let witness = v["witness"].as_array().ok_or_else(|| fail("witness"))?;
        prop_assert_eq!(witness.len(), inst.k());
        for class in witness {
            let ids = class.as_array().ok_or_else(|| fail("class"))?;
            prop_assert!(ids.iter().all(|x| x.as_u64().is_some_and(|id| id >= 1 && id as usize <= inst.n())));
        }
        prop_assert!(v["method"].is_string());
        for key in ["elapsed-ms", "dp-cells", "profiles-stored"] {
            prop_assert!(v["stats"][key].is_u64(), "{}", key);
        }
        Ok(())
    })
}

fn gen_deterministic(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |seed| {
        let text = |s: u64| {
            let mut out = gen::gen_convex_bipartite(4, 5, 2, 9, s).0.to_text();
            out += &gen::gen_random_graph(6, 2, 40, 9, s).to_text();
            let (inst, td) = gen::gen_partial_ktree(7, 2, 2, 9, 30, s).unwrap();
            out += &inst.to_text();
            out += &td.to_text();
            out += &gen::gen_cw_instance(6, 3, 2, 9, s).1.to_text();
            out
        };
        prop_assert_eq!(text(seed), text(seed));
        Ok(())
    })
}

type Property = fn(u32) -> Outcome;

pub fn all() -> Vec<(&'static str, Property)> {
    vec![
        ("model: serialization round-trips", model_round_trip),
        ("model: profile invariant under relabeling", model_permutation_invariance),
        ("model: empty coloring has zero profile", model_empty_coloring),
        ("model: components partition, edgeless merge", model_components),
        ("profile: edgeless equals enumeration", profile_edgeless_oracle),
        ("profile: merge algebra", profile_merge_algebra),
        ("profile: merge never lowers the best", profile_merge_best),
        ("profile: pruning keeps the best", profile_prune_keeps_best),
        ("profile: members bounded by totals", profile_members_bounded),
        ("oracle: witnesses valid", oracle_witness_valid),
        ("oracle: k = 1 matches independent set", oracle_matches_mis),
        ("oracle: extra edge shrinks the set", oracle_edge_monotone),
        ("convex: stage tables sound and complete, keys distinct", convex_stage_tables),
        ("convex: full set equals enumeration", convex_full_set),
        ("convex: stage layout properties", convex_stage_properties),
        ("convex: k = 1 matches independent set", convex_k1_is_mis),
        ("cw: node tables match enumeration", cw_node_tables),
        ("cw: root set complete", cw_root_complete),
        ("cw: eta and rho key hygiene", cw_label_hygiene),
        ("cw: union symmetric", cw_union_symmetric),
        ("tin: node tables match enumeration", tin_node_tables),
        ("tin: single bag matches oracle", tin_single_bag),
        ("tin: chordal clique trees", tin_chordal),
        ("tin: join correction", tin_join_correction),
        ("approx: guarantee", approx_guarantee),
        ("approx: solver-call bound", approx_call_bound),
        ("approx: tiny epsilon is exact", approx_tiny_epsilon_exact),
        ("gen: outputs parse and validate", gen_outputs_validate),
        ("report: JSON schema", report_json_schema),
        ("gen: seeded output is reproducible", gen_deterministic),
    ]
}

pub fn run_all(cases: u32) -> Vec<(&'static str, Outcome)> {
    all().into_par_iter().map(|(name, p)| (name, p(cases))).collect()
}

#[allow(dead_code)]
fn _unused(_: BTreeMap<(), ()>, _: Set) {}
