//! Convex bipartite conflict graphs.
//!
//! A bipartite graph `(A ∪ B, E)` is convex when `A` can be ordered as
//! `a_1, ..., a_s` so that every `N(b)` is an interval `a_{b-} ..= a_{b+}`.
//! The solver sweeps the distinct right endpoints `u_1 < ... < u_r`. At stage
//! `j` it knows, for every guess `(i_1, ..., i_k)` of the largest `A`-index
//! held by each agent, the set of profiles of colorings of
//! `G_j = G[{a_1..a_{u_j}} ∪ {b : b+ <= u_j}]` consistent with that guess.
//!
//! Inside a stage the new vertices are handled by a second guess
//! `(m_1, ..., m_k)` of the smallest new `B`-index per agent. With both
//! guesses fixed, the remaining new vertices can be assigned ignoring edges
//! once their profits are zeroed where an assignment would conflict.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use pq_tree::PQTree;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::model::{connected_components, ConflictInstance, PartialKColoring};
use crate::profile::{edgeless_assignment, edgeless_profiles, Profile, ProfileSet};
use crate::report::{Solution, SolveStats};
use crate::Limits;

/// A per-agent index tuple. Position 0 means "none" for `A`-guesses; for
/// `B`-guesses the value `t + 1` stands for "none".
pub type Guess = SmallVec<[usize; 4]>;

/// One stage's table: guess -> profile set. Only nonempty cells are kept.
pub type StageTable = FxHashMap<Guess, ProfileSet>;

/// An `A`-ordering together with the interval endpoints it induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexOrdering {
    a_order: Vec<usize>,
    b: Vec<usize>,
    endpoints: Vec<Option<(usize, usize)>>,
}

impl ConvexOrdering {
    /// `A` vertex ids in order.
    pub fn a_order(&self) -> &[usize] {
        &self.a_order
    }

    /// `B` vertex ids, ascending.
    pub fn b(&self) -> &[usize] {
        &self.b
    }

    /// `(b-, b+)` as 1-based positions in the `A`-order, aligned with
    /// [`ConvexOrdering::b`]; `None` for isolated `b`.
    pub fn endpoints(&self) -> &[Option<(usize, usize)>] {
        &self.endpoints
    }

    pub fn endpoint_of(&self, b: usize) -> Option<(usize, usize)> {
        let i = self.b.binary_search(&b).ok()?;
        self.endpoints[i]
    }

    /// Ordering file text: `A: <ids>` then `B: <ids>`, 1-based.
    pub fn to_text(&self) -> String {
        let ids = |xs: &[usize]| xs.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(" ");
        let mut out = format!("A: {}\n", ids(&self.a_order));
        out.push_str(&format!("B: {}\n", ids(&self.b)));
        out
    }

    /// Restricts the ordering to a vertex subset, renaming through
    /// `local` (global id -> local id, `usize::MAX` when absent).
    fn restrict(&self, local: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let keep = |xs: &[usize]| {
            xs.iter()
                .filter(|&&v| local[v] != usize::MAX)
                .map(|&v| local[v])
                .collect::<Vec<_>>()
        };
        (keep(&self.a_order), keep(&self.b))
    }
}

impl fmt::Display for ConvexOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses an ordering file into 0-based `(A-order, B)` lists.
pub fn parse_ordering(text: &str) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut a = None;
    let mut b = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let (tag, rest) = line
            .split_once(':')
            .ok_or_else(|| Error::syntax(line_no, "expected `A:` or `B:`"))?;
        let ids = rest
            .split_whitespace()
            .map(|tok| match tok.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::syntax(line_no, format!("bad vertex id `{tok}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let slot = match tag.trim() {
            "A" => &mut a,
            "B" => &mut b,
            other => return Err(Error::syntax(line_no, format!("unknown side `{other}`"))),
        };
        if slot.is_some() {
            return Err(Error::syntax(line_no, format!("side {} given twice", tag.trim())));
        }
        *slot = Some(ids);
    }
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::syntax(0, "ordering needs both an `A:` and a `B:` line")),
    }
}

/// Checks that `(a_order, b)` is a bipartition of `inst` under which every
/// `B`-neighborhood is an interval, and computes the endpoints.
pub fn validate_convex_ordering(inst: &ConflictInstance, a_order: &[usize], b: &[usize]) -> Result<ConvexOrdering> {
    let n = inst.n();
    // 0 = unseen, 1 = A, 2 = B
    let mut side = vec![0u8; n];
    let mut pos = vec![0usize; n];
    for (i, &v) in a_order.iter().enumerate() {
        if v >= n {
            return Err(Error::VertexOutOfRange { id: v + 1, n });
        }
        if side[v] != 0 {
            return Err(Error::InvalidInstance(format!("vertex {} listed twice", v + 1)));
        }
        side[v] = 1;
        pos[v] = i + 1;
    }
    for &v in b {
        if v >= n {
            return Err(Error::VertexOutOfRange { id: v + 1, n });
        }
        if side[v] != 0 {
            return Err(Error::InvalidInstance(format!("vertex {} listed twice", v + 1)));
        }
        side[v] = 2;
    }
    if let Some(v) = side.iter().position(|&s| s == 0) {
        return Err(Error::InvalidInstance(format!("vertex {} is in neither A nor B", v + 1)));
    }
    for &(u, v) in inst.edges() {
        if side[u] == side[v] {
            let name = if side[u] == 1 { "A" } else { "B" };
            return Err(Error::NotConvex(format!("edge {{{}, {}}} lies inside {name}", u + 1, v + 1)));
        }
    }
    let mut sorted_b = b.to_vec();
    sorted_b.sort_unstable();
    let mut endpoints = Vec::with_capacity(sorted_b.len());
    for &v in &sorted_b {
        let mut ps: Vec<usize> = inst.neighbors(v).iter().map(|&w| pos[w]).collect();
        if ps.is_empty() {
            endpoints.push(None);
            continue;
        }
        ps.sort_unstable();
        if let Some(w) = ps.windows(2).find(|w| w[1] != w[0] + 1) {
            return Err(Error::NotConvex(format!(
                "neighborhood of {} is not an interval: misses position {} between {} and {}",
                v + 1,
                w[0] + 1,
                w[0],
                w[1]
            )));
        }
        endpoints.push(Some((ps[0], ps[ps.len() - 1])));
    }
    Ok(ConvexOrdering {
        a_order: a_order.to_vec(),
        b: sorted_b,
        endpoints,
    })
}

/// A 2-coloring of `inst`, with the smallest vertex of each component on
/// side `A`. `None` when the graph has an odd cycle.
pub fn bipartition(inst: &ConflictInstance) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = inst.n();
    let mut color = vec![u8::MAX; n];
    for start in 0..n {
        if color[start] != u8::MAX {
            continue;
        }
        color[start] = 0;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in inst.neighbors(v) {
                if color[w] == u8::MAX {
                    color[w] = 1 - color[v];
                    stack.push(w);
                } else if color[w] == color[v] {
                    return None;
                }
            }
        }
    }
    let a = (0..n).filter(|&v| color[v] == 0).collect();
    let b = (0..n).filter(|&v| color[v] == 1).collect();
    Some((a, b))
}

/// Searches for an `A`-order with the consecutive-ones property for the
/// `B x A` biadjacency matrix, using a PQ-tree.
pub fn find_convex_ordering(inst: &ConflictInstance, a: &[usize], b: &[usize]) -> Result<Option<ConvexOrdering>> {
    let mut on_a = vec![false; inst.n()];
    for &v in a {
        if v >= inst.n() {
            return Err(Error::VertexOutOfRange { id: v + 1, n: inst.n() });
        }
        on_a[v] = true;
    }
    for &(u, v) in inst.edges() {
        if on_a[u] == on_a[v] {
            return Err(Error::NotConvex(format!(
                "edge {{{}, {}}} does not cross the bipartition",
                u + 1,
                v + 1
            )));
        }
    }
    let order = if a.len() <= 1 {
        a.to_vec()
    } else {
        let mut tree = match PQTree::from_leaves(a) {
            Ok(t) => t,
            Err(_) => return Err(Error::InvalidInstance("duplicate vertex in A".into())),
        };
        for &v in b {
            let row = inst.neighbors(v);
            if row.len() < 2 {
                continue;
            }
            tree = match tree.reduction(row) {
                Ok(t) => t,
                Err(_) => return Ok(None),
            };
        }
        tree.frontier()
    };
    match validate_convex_ordering(inst, &order, b) {
        Ok(co) => Ok(Some(co)),
        Err(Error::NotConvex(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Finds a convex ordering of the whole instance, trying both sides of
/// every component as `A`.
pub fn recognize_convex(inst: &ConflictInstance) -> Result<ConvexOrdering> {
    let Some((side_a, _)) = bipartition(inst) else {
        return Err(Error::NotConvex("graph is not bipartite".into()));
    };
    let mut in_a = vec![false; inst.n()];
    for v in side_a {
        in_a[v] = true;
    }
    let parts = connected_components(inst);
    let mut a_order = Vec::new();
    let mut b_all = Vec::new();
    for comp in &parts.components {
        let local = &comp.instance;
        let first: Vec<usize> = (0..local.n()).filter(|&v| in_a[comp.vertices[v]]).collect();
        let second: Vec<usize> = (0..local.n()).filter(|&v| !in_a[comp.vertices[v]]).collect();
        let found = match find_convex_ordering(local, &first, &second)? {
            Some(co) => Some(co),
            None => find_convex_ordering(local, &second, &first)?,
        };
        let Some(co) = found else {
            return Err(Error::NotConvex(format!(
                "consecutive-ones test failed on the component of vertex {} for both sides",
                comp.vertices[0] + 1
            )));
        };
        a_order.extend(co.a_order.iter().map(|&v| comp.vertices[v]));
        b_all.extend(co.b.iter().map(|&v| comp.vertices[v]));
    }
    validate_convex_ordering(inst, &a_order, &b_all)
}

/// The stage layout of a connected convex bipartite graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageStructure {
    /// `B` vertex ids sorted by `(b+, b-, id)`.
    pub b_order: Vec<usize>,
    /// Left endpoints aligned with `b_order` (1-based `A` positions).
    pub b_minus: Vec<usize>,
    /// Right endpoints aligned with `b_order`.
    pub b_plus: Vec<usize>,
    /// Distinct right endpoints `u_1 < ... < u_r`.
    pub u: Vec<usize>,
    /// `v_j = |{b : b+ <= u_j}|`.
    pub v: Vec<usize>,
}

impl StageStructure {
    /// Sorts `(id, b-, b+)` rows and derives `u` and `v`.
    pub fn from_endpoints(rows: &[(usize, usize, usize)]) -> Self {
        let mut rows = rows.to_vec();
        rows.sort_by_key(|&(id, lo, hi)| (hi, lo, id));
        let mut u: Vec<usize> = Vec::new();
        let mut v: Vec<usize> = Vec::new();
        for (idx, &(_, _, hi)) in rows.iter().enumerate() {
            if u.last() == Some(&hi) {
                *v.last_mut().expect("paired with u") = idx + 1;
            } else {
                u.push(hi);
                v.push(idx + 1);
            }
        }
        StageStructure {
            b_order: rows.iter().map(|r| r.0).collect(),
            b_minus: rows.iter().map(|r| r.1).collect(),
            b_plus: rows.iter().map(|r| r.2).collect(),
            u,
            v,
        }
    }

    pub fn stages(&self) -> usize {
        self.u.len()
    }

    /// `b_h` (1-based `h`) is adjacent to `a_i` (1-based `i`).
    pub fn adjacent(&self, i: usize, h: usize) -> bool {
        self.b_minus[h - 1] <= i && i <= self.b_plus[h - 1]
    }
}

/// Stage layout of an ordering; isolated `B` vertices are skipped.
pub fn stage_structure(co: &ConvexOrdering) -> StageStructure {
    let rows: Vec<(usize, usize, usize)> = co
        .b
        .iter()
        .zip(&co.endpoints)
        .filter_map(|(&id, e)| e.map(|(lo, hi)| (id, lo, hi)))
        .collect();
    StageStructure::from_endpoints(&rows)
}

/// Checks the structural facts the stage recurrence relies on: strictly
/// growing `A_j` and `B_j`, and nested neighborhoods among the vertices new
/// at each stage. Returns a description of the first failure.
pub fn check_stage_properties(st: &StageStructure, s: usize) -> std::result::Result<(), String> {
    let t = st.b_order.len();
    for j in 1..st.stages() {
        if st.u[j] <= st.u[j - 1] || st.v[j] <= st.v[j - 1] {
            return Err(format!("stage {} does not grow", j + 1));
        }
    }
    if st.u.last().copied().unwrap_or(0) != s && t > 0 {
        return Err(format!("last u is {:?}, expected {s}", st.u.last()));
    }
    for j in 0..st.stages() {
        let (u0, v0) = if j == 0 { (0, 0) } else { (st.u[j - 1], st.v[j - 1]) };
        let (u1, v1) = (st.u[j], st.v[j]);
        let nb_a = |i: usize| -> BTreeSet<usize> { (1..=v1).filter(|&h| st.adjacent(i, h)).collect() };
        for i in u0 + 1..=u1 {
            let n_i = nb_a(i);
            if n_i.iter().any(|&h| h <= v0) {
                return Err(format!("a_{i} sees an older B vertex"));
            }
            if i < u1 && !n_i.is_subset(&nb_a(i + 1)) {
                return Err(format!("N(a_{i}) not inside N(a_{})", i + 1));
            }
        }
        let nb_b = |h: usize| -> BTreeSet<usize> { (1..=u1).filter(|&i| st.adjacent(i, h)).collect() };
        for h in v0 + 1..v1 {
            if !nb_b(h + 1).is_subset(&nb_b(h)) {
                return Err(format!("N(b_{}) not inside N(b_{h})", h + 1));
            }
        }
    }
    Ok(())
}

/// All tuples in `{0..=hi}^k` whose nonzero entries are pairwise distinct.
fn a_guesses(k: usize, hi: usize) -> Vec<Guess> {
    let mut out = Vec::new();
    let mut cur: Guess = SmallVec::from_elem(0, k);
    loop {
        if distinct_nonzero(&cur, usize::MAX) {
            out.push(cur.clone());
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return out;
            }
            if cur[pos] < hi {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
            pos += 1;
        }
    }
}

/// Entries other than 0 and `none` are pairwise distinct.
fn distinct_nonzero(g: &[usize], none: usize) -> bool {
    for x in 0..g.len() {
        if g[x] == 0 || g[x] == none {
            continue;
        }
        if g[x + 1..].contains(&g[x]) {
            return false;
        }
    }
    true
}

/// Per-agent profit vector of vertex `v` after zeroing the agents in `off`.
fn masked_item(inst: &ConflictInstance, v: usize, off: impl Fn(usize) -> bool) -> Profile {
    (0..inst.k())
        .map(|l| if off(l) { 0 } else { inst.profit(l, v) })
        .collect()
}

/// Items of the edgeless subproblem, with the vertex each item stands for.
struct Subproblem {
    vertices: Vec<usize>,
    items: Vec<Profile>,
}

/// The dynamic program on one connected convex bipartite graph, with all
/// stage tables retained.
pub struct ConvexDp<'a> {
    inst: &'a ConflictInstance,
    limits: Limits,
    /// `a[i - 1]` is the vertex at `A`-position `i`.
    a: Vec<usize>,
    st: StageStructure,
    tables: Vec<StageTable>,
    work: u64,
}

impl<'a> ConvexDp<'a> {
    /// Runs every stage. `inst` must be connected with at least two vertices
    /// and `co` must be a valid ordering of it.
    pub fn run(inst: &'a ConflictInstance, co: &ConvexOrdering, limits: &Limits) -> Result<Self> {
        if inst.n() < 2 || co.a_order.is_empty() || co.b.is_empty() {
            return Err(Error::InvalidInstance(
                "the stage recurrence needs a connected graph on at least two vertices".into(),
            ));
        }
        if co.endpoints.iter().any(Option::is_none) {
            return Err(Error::InvalidInstance("isolated B vertex in a connected component".into()));
        }
        let st = stage_structure(co);
        if st.u.last() != Some(&co.a_order.len()) {
            return Err(Error::InvalidInstance("graph is not connected".into()));
        }
        let mut dp = ConvexDp {
            inst,
            limits: *limits,
            a: co.a_order.clone(),
            st,
            tables: Vec::new(),
            work: 0,
        };
        for j in 0..dp.st.stages() {
            let guesses = a_guesses(inst.k(), dp.st.u[j]);
            let cells: Vec<Result<Option<(Guess, ProfileSet, u64)>>> = guesses
                .into_par_iter()
                .map(|g| {
                    let (set, work) = if j == 0 { dp.first_cell(&g)? } else { dp.cell(j, &g)? };
                    Ok((!set.is_empty()).then_some((g, set, work)))
                })
                .collect();
            let mut table = StageTable::default();
            for cell in cells {
                if let Some((g, set, work)) = cell? {
                    dp.work += work;
                    table.insert(g, set);
                }
            }
            dp.tables.push(table);
        }
        Ok(dp)
    }

    pub fn structure(&self) -> &StageStructure {
        &self.st
    }

    /// Vertex at 1-based `A`-position `i`.
    pub fn a_vertex(&self, i: usize) -> usize {
        self.a[i - 1]
    }

    /// Vertex at 1-based `B`-position `h`.
    pub fn b_vertex(&self, h: usize) -> usize {
        self.st.b_order[h - 1]
    }

    /// Table of stage `j` (0-based).
    pub fn stage(&self, j: usize) -> &StageTable {
        &self.tables[j]
    }

    /// Union of the final stage's cells: every profile of `inst`.
    pub fn profiles(&self) -> Result<ProfileSet> {
        let mut out = ProfileSet::empty(self.inst.k());
        for set in self.tables.last().expect("at least one stage").values() {
            out.union_with(set, self.limits.profile_cap)?;
        }
        Ok(out)
    }

    pub fn stats(&self) -> SolveStats {
        SolveStats {
            elapsed_ms: 0,
            dp_cells: self.tables.iter().map(|t| t.len() as u64).sum(),
            profiles_stored: self.tables.iter().flat_map(|t| t.values()).map(|s| s.len() as u64).sum(),
            work: self.work,
        }
    }

    fn profit_at_a(&self, g: &[usize], above: usize) -> Profile {
        (0..g.len())
            .map(|l| if g[l] > above { self.inst.profit(l, self.a_vertex(g[l])) } else { 0 })
            .collect()
    }

    fn first_subproblem(&self, g: &[usize]) -> Subproblem {
        let (u1, v1) = (self.st.u[0], self.st.v[0]);
        let mut sub = Subproblem {
            vertices: Vec::new(),
            items: Vec::new(),
        };
        for x in 1..=u1 {
            if g.contains(&x) {
                continue;
            }
            sub.vertices.push(self.a_vertex(x));
            sub.items.push(masked_item(self.inst, self.a_vertex(x), |l| g[l] == 0 || x > g[l]));
        }
        for h in 1..=v1 {
            sub.vertices.push(self.b_vertex(h));
            sub.items.push(masked_item(self.inst, self.b_vertex(h), |l| {
                g[l] > 0 && self.st.adjacent(g[l], h)
            }));
        }
        sub
    }

    fn first_cell(&self, g: &[usize]) -> Result<(ProfileSet, u64)> {
        let sub = self.first_subproblem(g);
        let set = edgeless_profiles(self.inst.k(), &sub.items, self.limits.profile_cap)?;
        let work = (sub.items.len() as u64) * set.len() as u64;
        Ok((set.shift(&self.profit_at_a(g, 0))?, work))
    }

    /// Previous-stage keys compatible with `g`: entries at most `u_{j-1}`
    /// are kept, larger ones range freely over `0..=u_{j-1}`.
    fn predecessors(&self, j: usize, g: &[usize]) -> Vec<Guess> {
        let prev_u = self.st.u[j - 1];
        let mut out: Vec<Guess> = vec![SmallVec::new()];
        for &x in g {
            let options: Vec<usize> = if x <= prev_u { vec![x] } else { (0..=prev_u).collect() };
            out = out
                .into_iter()
                .flat_map(|p| {
                    options.iter().map(move |&o| {
                        let mut q = p.clone();
                        q.push(o);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// `B`-guesses compatible with `g` at stage `j`; `t + 1` means none.
    fn b_guesses(&self, j: usize, g: &[usize]) -> Vec<Guess> {
        let none = self.st.b_order.len() + 1;
        let (v0, v1) = (self.st.v[j - 1], self.st.v[j]);
        let mut out: Vec<Guess> = vec![SmallVec::new()];
        for &x in g {
            let mut options: Vec<usize> = (v0 + 1..=v1).filter(|&h| x == 0 || !self.st.adjacent(x, h)).collect();
            options.push(none);
            out = out
                .into_iter()
                .flat_map(|p| {
                    options.iter().map(move |&o| {
                        let mut q = p.clone();
                        q.push(o);
                        q
                    })
                })
                .filter(|q| distinct_nonzero(q, none))
                .collect();
        }
        out
    }

    fn subproblem(&self, j: usize, g: &[usize], m: &[usize]) -> Subproblem {
        let none = self.st.b_order.len() + 1;
        let (u0, u1) = (self.st.u[j - 1], self.st.u[j]);
        let (v0, v1) = (self.st.v[j - 1], self.st.v[j]);
        let mut sub = Subproblem {
            vertices: Vec::new(),
            items: Vec::new(),
        };
        for x in u0 + 1..=u1 {
            if g.contains(&x) {
                continue;
            }
            sub.vertices.push(self.a_vertex(x));
            sub.items.push(masked_item(self.inst, self.a_vertex(x), |l| {
                x > g[l].max(u0) || (m[l] != none && self.st.adjacent(x, m[l]))
            }));
        }
        for h in v0 + 1..=v1 {
            if m.contains(&h) {
                continue;
            }
            sub.vertices.push(self.b_vertex(h));
            sub.items.push(masked_item(self.inst, self.b_vertex(h), |l| {
                h < m[l] || (g[l] > 0 && self.st.adjacent(g[l], h))
            }));
        }
        sub
    }

    fn profit_at_b(&self, m: &[usize]) -> Profile {
        let none = self.st.b_order.len() + 1;
        (0..m.len())
            .map(|l| if m[l] != none { self.inst.profit(l, self.b_vertex(m[l])) } else { 0 })
            .collect()
    }

    fn cell(&self, j: usize, g: &[usize]) -> Result<(ProfileSet, u64)> {
        let k = self.inst.k();
        let cap = self.limits.profile_cap;
        let mut before = ProfileSet::empty(k);
        for tau in self.predecessors(j, g) {
            if let Some(set) = self.tables[j - 1].get(&tau) {
                before.union_with(set, cap)?;
            }
        }
        if before.is_empty() {
            return Ok((before, 0));
        }
        let mut work = 0u64;
        let mut fresh = ProfileSet::empty(k);
        for m in self.b_guesses(j, g) {
            let sub = self.subproblem(j, g, &m);
            let set = edgeless_profiles(k, &sub.items, cap)?;
            work += (sub.items.len() as u64) * set.len() as u64;
            fresh.union_with(&set.shift(&self.profit_at_b(&m))?, cap)?;
        }
        work += (before.len() as u64) * fresh.len() as u64;
        let merged = before.merge(&fresh, cap)?;
        Ok((merged.shift(&self.profit_at_a(g, self.st.u[j - 1]))?, work))
    }

    /// A coloring of `inst` with profile `target`, or `None` if no such
    /// coloring exists. Walks the retained tables from the last stage back.
    pub fn witness(&self, target: &Profile) -> Result<Option<PartialKColoring>> {
        let k = self.inst.k();
        let cap = self.limits.profile_cap;
        let last = self.tables.len() - 1;
        let Some(mut g) = self.tables[last]
            .iter()
            .filter(|(_, set)| set.contains(target))
            .map(|(g, _)| g.clone())
            .min()
        else {
            return Ok(None);
        };
        let mut assignment = vec![0usize; self.inst.n()];
        let mut want = target.clone();
        for j in (1..=last).rev() {
            let u0 = self.st.u[j - 1];
            for l in 0..k {
                if g[l] > u0 {
                    assignment[self.a_vertex(g[l])] = l + 1;
                }
            }
            let rest = want
                .checked_sub(&self.profit_at_a(&g, u0))
                .expect("cell members include the A-side profit");
            let taus: Vec<Guess> = self
                .predecessors(j, &g)
                .into_iter()
                .filter(|tau| self.tables[j - 1].contains_key(tau))
                .collect();
            let mut found = None;
            'search: for m in self.b_guesses(j, &g) {
                let Some(rest_m) = rest.checked_sub(&self.profit_at_b(&m)) else {
                    continue;
                };
                let sub = self.subproblem(j, &g, &m);
                let fresh = edgeless_profiles(k, &sub.items, cap)?;
                for q2 in fresh.iter() {
                    let Some(q1) = rest_m.checked_sub(q2) else {
                        continue;
                    };
                    if let Some(tau) = taus.iter().find(|tau| self.tables[j - 1][*tau].contains(&q1)) {
                        found = Some((m, sub, q2.clone(), tau.clone(), q1));
                        break 'search;
                    }
                }
            }
            let (m, sub, q2, tau, q1) = found.expect("every cell member decomposes");
            let none = self.st.b_order.len() + 1;
            for l in 0..k {
                if m[l] != none {
                    assignment[self.b_vertex(m[l])] = l + 1;
                }
            }
            let local = edgeless_assignment(k, &sub.items, &q2, cap)?.expect("member of the edgeless set");
            for (idx, &c) in local.iter().enumerate() {
                if c > 0 {
                    assignment[sub.vertices[idx]] = c;
                }
            }
            g = tau;
            want = q1;
        }
        for l in 0..k {
            if g[l] > 0 {
                assignment[self.a_vertex(g[l])] = l + 1;
            }
        }
        let rest = want
            .checked_sub(&self.profit_at_a(&g, 0))
            .expect("cell members include the A-side profit");
        let sub = self.first_subproblem(&g);
        let local = edgeless_assignment(k, &sub.items, &rest, cap)?.expect("member of the edgeless set");
        for (idx, &c) in local.iter().enumerate() {
            if c > 0 {
                assignment[sub.vertices[idx]] = c;
            }
        }
        Ok(Some(PartialKColoring::from_assignment(&assignment, k)))
    }
}

/// Every profile of a connected convex bipartite graph on at least two
/// vertices.
pub fn solve_connected_convex(inst: &ConflictInstance, co: &ConvexOrdering, limits: &Limits) -> Result<ProfileSet> {
    ConvexDp::run(inst, co, limits)?.profiles()
}

enum Part<'a> {
    Edgeless(&'a ConflictInstance),
    Staged(Box<ConvexDp<'a>>),
}

impl Part<'_> {
    fn profiles(&self, limits: &Limits) -> Result<ProfileSet> {
        match self {
            Part::Edgeless(inst) => {
                let items: Vec<Profile> = (0..inst.n()).map(|v| inst.item(v)).collect();
                edgeless_profiles(inst.k(), &items, limits.profile_cap)
            }
            Part::Staged(dp) => dp.profiles(),
        }
    }

    fn witness(&self, target: &Profile, limits: &Limits) -> Result<PartialKColoring> {
        match self {
            Part::Edgeless(inst) => {
                let items: Vec<Profile> = (0..inst.n()).map(|v| inst.item(v)).collect();
                let assignment = edgeless_assignment(inst.k(), &items, target, limits.profile_cap)?
                    .expect("target taken from this set");
                Ok(PartialKColoring::from_assignment(&assignment, inst.k()))
            }
            Part::Staged(dp) => Ok(dp.witness(target)?.expect("target taken from this set")),
        }
    }
}

/// Result of the component-wise convex solver before the optimum is chosen.
struct Components<'a> {
    parts: Vec<(Vec<usize>, Part<'a>)>,
    sets: Vec<ProfileSet>,
    stats: SolveStats,
}

fn run_components<'a>(
    parts: &'a crate::model::ComponentPartition,
    co: &ConvexOrdering,
    n: usize,
    limits: &Limits,
) -> Result<Components<'a>> {
    let mut out = Components {
        parts: Vec::new(),
        sets: Vec::new(),
        stats: SolveStats::default(),
    };
    let mut local = vec![usize::MAX; n];
    for comp in &parts.components {
        let part = if comp.instance.is_edgeless() {
            Part::Edgeless(&comp.instance)
        } else {
            for (i, &v) in comp.vertices.iter().enumerate() {
                local[v] = i;
            }
            let (a, b) = co.restrict(&local);
            for &v in &comp.vertices {
                local[v] = usize::MAX;
            }
            let sub = validate_convex_ordering(&comp.instance, &a, &b)?;
            let dp = ConvexDp::run(&comp.instance, &sub, limits)?;
            out.stats.absorb(&dp.stats());
            Part::Staged(Box::new(dp))
        };
        let set = part.profiles(limits)?;
        out.sets.push(set);
        out.parts.push((comp.vertices.clone(), part));
    }
    Ok(out)
}

fn resolve_ordering(inst: &ConflictInstance, ordering: Option<&ConvexOrdering>) -> Result<ConvexOrdering> {
    match ordering {
        Some(co) => validate_convex_ordering(inst, &co.a_order, &co.b),
        None => recognize_convex(inst),
    }
}

/// Every profile of a convex bipartite instance, merged over components.
pub fn convex_profiles(
    inst: &ConflictInstance,
    ordering: Option<&ConvexOrdering>,
    limits: &Limits,
) -> Result<ProfileSet> {
    let co = resolve_ordering(inst, ordering)?;
    let parts = connected_components(inst);
    let run = run_components(&parts, &co, inst.n(), limits)?;
    let mut total = ProfileSet::zero(inst.k());
    for set in &run.sets {
        total = total.merge(set, limits.profile_cap)?;
    }
    Ok(total)
}

/// Optimum and witness for a convex bipartite instance. When `ordering` is
/// `None` one is found by recognition.
pub fn solve_convex(inst: &ConflictInstance, ordering: Option<&ConvexOrdering>, limits: &Limits) -> Result<Solution> {
    let start = Instant::now();
    let co = resolve_ordering(inst, ordering)?;
    let parts = connected_components(inst);
    let run = run_components(&parts, &co, inst.n(), limits)?;
    let mut stats = run.stats;

    // prefix[i] = merge of the first i component sets
    let mut prefix = vec![ProfileSet::zero(inst.k())];
    for set in &run.sets {
        let next = prefix.last().expect("nonempty").merge(set, limits.profile_cap)?;
        stats.work += (prefix.last().expect("nonempty").len() * set.len()) as u64;
        prefix.push(next);
    }
    let total = prefix.last().expect("nonempty");
    let profile = total.best_profile()?.clone();

    let mut witness = PartialKColoring::empty(inst.k());
    let mut want = profile.clone();
    for i in (0..run.sets.len()).rev() {
        let piece = run.sets[i]
            .sorted()
            .into_iter()
            .find(|q| want.checked_sub(q).is_some_and(|r| prefix[i].contains(&r)))
            .expect("merged member decomposes");
        let (vertices, part) = &run.parts[i];
        witness = witness.union(&part.witness(&piece, limits)?.relabel(vertices));
        want = want.checked_sub(&piece).expect("checked above");
    }
    stats.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(Solution {
        optimum: profile.satisfaction_level(),
        profile,
        witness,
        stats,
    })
}
