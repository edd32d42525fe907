//! Enumeration oracles written independently of the library's own oracle.

use std::collections::{BTreeMap, BTreeSet};

use fkd_core::cw::{evaluate_subexpression, CliqueExpression, CwTable};
use fkd_core::tin::{NiceTreeDecomposition, TinTable};
use fkd_core::{ConflictInstance, ProfileSet};

pub type Set = BTreeSet<Vec<u64>>;

pub fn set_of(s: &ProfileSet) -> Set {
    s.iter().map(|q| q.as_slice().to_vec()).collect()
}

/// Calls `f(colors, profile)` for every proper partial coloring of the
/// graph on `0..n` with adjacency `adj`, colors in `0..=k`.
pub fn each_coloring(
    n: usize,
    k: usize,
    adj: &dyn Fn(usize, usize) -> bool,
    profit: &dyn Fn(usize, usize) -> u64,
    f: &mut dyn FnMut(&[usize], &[u64]),
) {
    let mut colors = vec![0usize; n];
    loop {
        let ok = (0..n).all(|v| colors[v] == 0 || (0..v).all(|u| colors[u] != colors[v] || !adj(u, v)));
        if ok {
            let mut q = vec![0u64; k];
            for v in 0..n {
                if colors[v] > 0 {
                    q[colors[v] - 1] += profit(colors[v] - 1, v);
                }
            }
            f(&colors, &q);
        }
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if colors[i] < k {
                colors[i] += 1;
                break;
            }
            colors[i] = 0;
            i += 1;
        }
    }
}

pub fn all_profiles(inst: &ConflictInstance) -> Set {
    let mut out = Set::new();
    each_coloring(
        inst.n(),
        inst.k(),
        &|u, v| inst.has_edge(u, v),
        &|j, v| inst.profit(j, v),
        &mut |_, q| {
            out.insert(q.to_vec());
        },
    );
    out
}

pub fn optimum(inst: &ConflictInstance) -> u64 {
    all_profiles(inst).iter().map(|q| *q.iter().min().unwrap()).max().unwrap()
}

/// Maximum weight independent set by include/exclude recursion.
pub fn mis(inst: &ConflictInstance, weights: &[u64]) -> u64 {
    fn go(inst: &ConflictInstance, w: &[u64], v: usize, taken: &mut Vec<usize>) -> u64 {
        if v == inst.n() {
            return 0;
        }
        let skip = go(inst, w, v + 1, taken);
        if taken.iter().any(|&u| inst.has_edge(u, v)) {
            return skip;
        }
        taken.push(v);
        let take = w[v] + go(inst, w, v + 1, taken);
        taken.pop();
        skip.max(take)
    }
    go(inst, weights, 0, &mut Vec::new())
}

/// Key -> profiles, for comparing DP tables with oracle tables.
pub type Table = BTreeMap<Vec<u64>, Set>;

pub fn cw_table(t: &CwTable) -> Table {
    t.iter().map(|(k, s)| (k.iter().map(|&x| x as u64).collect(), set_of(s))).collect()
}

pub fn tin_table(t: &TinTable) -> Table {
    t.iter().map(|(k, s)| (k.iter().map(|&x| x as u64).collect(), set_of(s))).collect()
}

/// Label profile -> profiles, over colorings of the graph the
/// subexpression at `node` builds.
pub fn cw_node(inst: &ConflictInstance, expr: &CliqueExpression, node: usize) -> Table {
    let g = evaluate_subexpression(expr, node);
    let vs = g.vertices();
    let mut out = Table::new();
    each_coloring(
        vs.len(),
        inst.k(),
        &|a, b| {
            let (x, y) = (vs[a].min(vs[b]), vs[a].max(vs[b]));
            g.edges.contains(&(x, y))
        },
        &|j, a| inst.profit(j, vs[a]),
        &mut |colors, q| {
            let mut key = vec![0u64; inst.k()];
            for (a, &c) in colors.iter().enumerate() {
                if c > 0 {
                    key[c - 1] |= 1 << g.labels[&vs[a]];
                }
            }
            out.entry(key).or_default().insert(q.to_vec());
        },
    );
    out
}

/// Bag coloring -> profiles, over colorings of the graph induced by the
/// bags below `t`.
pub fn tin_node(inst: &ConflictInstance, nice: &NiceTreeDecomposition, t: usize) -> Table {
    let vs = nice.subtree_vertices(t);
    let bag = &nice.nodes()[t].bag;
    let mut out = Table::new();
    each_coloring(
        vs.len(),
        inst.k(),
        &|a, b| inst.has_edge(vs[a], vs[b]),
        &|j, a| inst.profit(j, vs[a]),
        &mut |colors, q| {
            let key = bag.iter().map(|v| colors[vs.binary_search(v).unwrap()] as u64).collect();
            out.entry(key).or_default().insert(q.to_vec());
        },
    );
    out
}
