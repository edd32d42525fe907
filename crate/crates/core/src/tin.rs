//! Graphs given by a tree decomposition of small independence number.
//!
//! The recurrence runs on a nice decomposition. At node `t` with bag `B_t`
//! and every partial k-coloring `c` of `G[B_t]` it stores the profiles of
//! colorings of `G[V_t]` that agree with `c` on the bag, where `V_t` is the
//! union of the bags below `t`. A bag whose independent sets have at most ℓ
//! vertices carries at most `O(n^{kℓ})` such colorings.

use std::fmt;
use std::time::Instant;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::model::{ConflictInstance, PartialKColoring};
use crate::profile::{Profile, ProfileSet};
use crate::report::{Solution, SolveStats};
use crate::Limits;

/// Default search-node budget for one bag's independence number.
pub const DEFAULT_ALPHA_NODE_CAP: u64 = 10_000_000;

/// Bags on a tree. Vertices and bag indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    n: usize,
    bags: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Builds a decomposition, checking only that the bag graph is a tree
    /// and vertex ids are below `n`.
    pub fn new(n: usize, bags: Vec<Vec<usize>>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if bags.is_empty() {
            return Err(Error::InvalidDecomposition("a decomposition needs at least one bag".into()));
        }
        let mut bags = bags;
        for (i, bag) in bags.iter_mut().enumerate() {
            bag.sort_unstable();
            if bag.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidDecomposition(format!("bag {} repeats a vertex", i + 1)));
            }
            if let Some(&v) = bag.iter().find(|&&v| v >= n) {
                return Err(Error::VertexOutOfRange { id: v + 1, n });
            }
        }
        let mut parent: Vec<usize> = (0..bags.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(x, y) in &edges {
            if x >= bags.len() || y >= bags.len() {
                return Err(Error::InvalidDecomposition(format!(
                    "tree edge {} {} names a missing bag",
                    x + 1,
                    y + 1
                )));
            }
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            if rx == ry {
                return Err(Error::InvalidDecomposition(format!(
                    "tree edge {} {} closes a cycle",
                    x + 1,
                    y + 1
                )));
            }
            parent[rx] = ry;
        }
        if edges.len() + 1 != bags.len() {
            return Err(Error::InvalidDecomposition("disconnected tree".into()));
        }
        Ok(TreeDecomposition { n, bags, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Largest bag size minus one (0 for a single empty bag).
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    /// Adjacency lists of the tree.
    pub fn tree_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(x, y) in &self.edges {
            adj[x].push(y);
            adj[y].push(x);
        }
        adj
    }

    /// `.td` text, 1-based.
    pub fn to_text(&self) -> String {
        let max_bag = self.bags.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = format!("s td {} {} {}\n", self.bags.len(), max_bag, self.n);
        for (i, bag) in self.bags.iter().enumerate() {
            out.push_str(&format!("b {}", i + 1));
            for v in bag {
                out.push_str(&format!(" {}", v + 1));
            }
            out.push('\n');
        }
        for &(x, y) in &self.edges {
            out.push_str(&format!("{} {}\n", x + 1, y + 1));
        }
        out
    }
}

impl fmt::Display for TreeDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses the `.td` format: `s td <bags> <max bag size> <n>`, then
/// `b <id> <vertices>` lines and `<id> <id>` tree edges.
pub fn parse_tree_decomposition(text: &str) -> Result<TreeDecomposition> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut bags: Vec<Option<Vec<usize>>> = Vec::new();
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() || toks[0] == "c" {
            continue;
        }
        let num = |t: &str| -> Result<usize> {
            t.parse::<usize>()
                .map_err(|_| Error::syntax(line_no, format!("expected a number, got `{t}`")))
        };
        match toks[0] {
            "s" => {
                if header.is_some() {
                    return Err(Error::syntax(line_no, "second `s` line"));
                }
                if toks.len() != 5 || toks[1] != "td" {
                    return Err(Error::syntax(line_no, "expected `s td <bags> <max bag size> <n>`"));
                }
                let h = (num(toks[2])?, num(toks[3])?, num(toks[4])?);
                bags = vec![None; h.0];
                header = Some(h);
            }
            "b" => {
                let (_, max_bag, n) = header.ok_or_else(|| Error::syntax(line_no, "bag before the `s` line"))?;
                if toks.len() < 2 {
                    return Err(Error::syntax(line_no, "expected `b <id> <vertices>`"));
                }
                let id = num(toks[1])?;
                if id == 0 || id > bags.len() {
                    return Err(Error::syntax(line_no, format!("bag id {id} out of range")));
                }
                if bags[id - 1].is_some() {
                    return Err(Error::InvalidDecomposition(format!("duplicate bag id {id}")));
                }
                let mut bag = Vec::with_capacity(toks.len() - 2);
                for t in &toks[2..] {
                    let v = num(t)?;
                    if v == 0 || v > n {
                        return Err(Error::VertexOutOfRange { id: v, n });
                    }
                    bag.push(v - 1);
                }
                if bag.len() > max_bag {
                    return Err(Error::syntax(
                        line_no,
                        format!("bag {id} has {} vertices, more than the declared {max_bag}", bag.len()),
                    ));
                }
                bags[id - 1] = Some(bag);
            }
            _ => {
                if header.is_none() {
                    return Err(Error::syntax(line_no, "tree edge before the `s` line"));
                }
                if toks.len() != 2 {
                    return Err(Error::syntax(line_no, "expected `<bag id> <bag id>`"));
                }
                let (x, y) = (num(toks[0])?, num(toks[1])?);
                if x == 0 || y == 0 || x > bags.len() || y > bags.len() {
                    return Err(Error::syntax(line_no, format!("tree edge {x} {y} names a missing bag")));
                }
                edges.push((x - 1, y - 1));
            }
        }
    }
    let (_, _, n) = header.ok_or_else(|| Error::syntax(0, "missing `s td` line"))?;
    let bags = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| Error::InvalidDecomposition(format!("bag {} is never listed", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    TreeDecomposition::new(n, bags, edges)
}

/// Independence number of `G[bag]` by branch and bound, visiting at most
/// `cap` search nodes.
pub fn bag_independence(inst: &ConflictInstance, bag: &[usize], cap: u64) -> Option<usize> {
    let m = bag.len();
    let adj: Vec<Vec<bool>> = bag
        .iter()
        .map(|&x| bag.iter().map(|&y| inst.has_edge(x, y)).collect())
        .collect();
    struct Search<'a> {
        adj: &'a [Vec<bool>],
        best: usize,
        nodes: u64,
        cap: u64,
    }
    impl Search<'_> {
        fn go(&mut self, chosen: usize, cand: &[usize]) -> bool {
            self.nodes += 1;
            if self.nodes > self.cap {
                return false;
            }
            if cand.is_empty() {
                self.best = self.best.max(chosen);
                return true;
            }
            if chosen + cand.len() <= self.best {
                return true;
            }
            // Branch on the candidate with the most candidate neighbors.
            let (pivot, deg) = cand
                .iter()
                .map(|&x| (x, cand.iter().filter(|&&y| self.adj[x][y]).count()))
                .max_by_key(|&(x, d)| (d, std::cmp::Reverse(x)))
                .expect("nonempty");
            if deg == 0 {
                self.best = self.best.max(chosen + cand.len());
                return true;
            }
            let with: Vec<usize> = cand.iter().copied().filter(|&y| y != pivot && !self.adj[pivot][y]).collect();
            if !self.go(chosen + 1, &with) {
                return false;
            }
            let without: Vec<usize> = cand.iter().copied().filter(|&y| y != pivot).collect();
            self.go(chosen, &without)
        }
    }
    let mut s = Search {
        adj: &adj,
        best: 0,
        nodes: 0,
        cap,
    };
    let all: Vec<usize> = (0..m).collect();
    s.go(0, &all).then_some(s.best)
}

/// Width and independence number of a checked decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TdInfo {
    pub width: usize,
    pub independence: usize,
}

/// Checks the three decomposition conditions against `inst` and computes
/// the largest independent set inside any bag.
pub fn validate_td(inst: &ConflictInstance, td: &TreeDecomposition, limits: &Limits) -> Result<TdInfo> {
    if td.n != inst.n() {
        return Err(Error::InvalidDecomposition(format!(
            "decomposition is for {} vertices, instance has {}",
            td.n,
            inst.n()
        )));
    }
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); inst.n()];
    for (i, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            holders[v].push(i);
        }
    }
    if let Some(v) = (0..inst.n()).find(|&v| holders[v].is_empty()) {
        return Err(Error::InvalidDecomposition(format!("vertex {} is in no bag", v + 1)));
    }
    for &(u, v) in inst.edges() {
        if !holders[u].iter().any(|&b| td.bags[b].binary_search(&v).is_ok()) {
            return Err(Error::InvalidDecomposition(format!(
                "edge {{{}, {}}} is in no bag",
                u + 1,
                v + 1
            )));
        }
    }
    let adj = td.tree_neighbors();
    let mut mark = vec![usize::MAX; td.bags.len()];
    for v in 0..inst.n() {
        for &b in &holders[v] {
            mark[b] = v;
        }
        let mut seen = 1;
        let mut stack = vec![holders[v][0]];
        let mut visited = vec![holders[v][0]];
        mark[holders[v][0]] = usize::MAX - 1;
        while let Some(b) = stack.pop() {
            for &c in &adj[b] {
                if mark[c] == v {
                    mark[c] = usize::MAX - 1;
                    seen += 1;
                    stack.push(c);
                    visited.push(c);
                }
            }
        }
        for &b in &holders[v] {
            mark[b] = usize::MAX;
        }
        if seen != holders[v].len() {
            return Err(Error::InvalidDecomposition(format!(
                "the bags holding vertex {} do not form a subtree",
                v + 1
            )));
        }
    }
    let mut independence = 0;
    for (i, bag) in td.bags.iter().enumerate() {
        let alpha = bag_independence(inst, bag, limits.alpha_node_cap).ok_or(Error::AlphaCapExceeded {
            bag: i + 1,
            cap: limits.alpha_node_cap,
        })?;
        independence = independence.max(alpha);
    }
    Ok(TdInfo {
        width: td.width(),
        independence,
    })
}

/// A tree decomposition from an elimination order: eliminating `v` makes
/// its remaining neighbors a clique, and `{v} ∪ N(v)` becomes a bag.
pub fn elimination_decomposition(inst: &ConflictInstance, order: &[usize]) -> Result<TreeDecomposition> {
    let n = inst.n();
    if order.len() != n || {
        let mut seen = vec![false; n];
        order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true))
    } {
        return Err(Error::InvalidInstance("elimination order is not a permutation".into()));
    }
    if n == 0 {
        return TreeDecomposition::new(0, vec![Vec::new()], Vec::new());
    }
    let mut rank = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let mut nbrs: Vec<std::collections::BTreeSet<usize>> =
        (0..n).map(|v| inst.neighbors(v).iter().copied().collect()).collect();
    let mut bags = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n - 1);
    for (i, &v) in order.iter().enumerate() {
        let later: Vec<usize> = nbrs[v].iter().copied().filter(|&w| rank[w] > i).collect();
        for (x, &a) in later.iter().enumerate() {
            for &b in &later[x + 1..] {
                nbrs[a].insert(b);
                nbrs[b].insert(a);
            }
        }
        let mut bag = later.clone();
        bag.push(v);
        bags.push(bag);
        if i + 1 < n {
            let parent = later.iter().map(|&w| rank[w]).min().unwrap_or(n - 1);
            edges.push((i, parent));
        }
    }
    TreeDecomposition::new(n, bags, edges)
}

/// Clique tree of a chordal graph: maximal cliques joined by a maximum
/// weight spanning tree on intersection sizes.
pub fn clique_tree_of_chordal(inst: &ConflictInstance) -> Result<TreeDecomposition> {
    let n = inst.n();
    if n == 0 {
        return TreeDecomposition::new(0, vec![Vec::new()], Vec::new());
    }
    // maximum cardinality search
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !visited[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("unvisited vertex left");
        visited[v] = true;
        order.push(v);
        for &w in inst.neighbors(v) {
            if !visited[w] {
                weight[w] += 1;
            }
        }
    }
    let mut rank = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    // earlier[v]: neighbors visited before v; reversed visit order must be
    // a perfect elimination order
    let earlier: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut e: Vec<usize> = inst.neighbors(v).iter().copied().filter(|&w| rank[w] < rank[v]).collect();
            e.sort_by_key(|&w| rank[w]);
            e
        })
        .collect();
    for e in &earlier {
        if let Some((&p, rest)) = e.split_last() {
            if rest.iter().any(|&w| !inst.has_edge(w, p)) {
                return Err(Error::NotChordal);
            }
        }
    }
    let mut candidates: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut c = earlier[v].clone();
            c.push(v);
            c.sort_unstable();
            c
        })
        .collect();
    candidates.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for c in candidates {
        let inside = cliques
            .iter()
            .any(|big| c.iter().all(|v| big.binary_search(v).is_ok()));
        if !inside {
            cliques.push(c);
        }
    }
    let m = cliques.len();
    let mut pairs = Vec::new();
    for x in 0..m {
        for y in x + 1..m {
            let shared = cliques[x].iter().filter(|v| cliques[y].binary_search(v).is_ok()).count();
            pairs.push((shared, x, y));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut edges = Vec::with_capacity(m.saturating_sub(1));
    for (_, x, y) in pairs {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        if rx != ry {
            parent[rx] = ry;
            edges.push((x, y));
        }
    }
    TreeDecomposition::new(n, cliques, edges)
}

/// Node kinds of a nice decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NiceKind {
    Leaf,
    Introduce(usize),
    Forget(usize),
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceNode {
    pub kind: NiceKind,
    /// Sorted bag.
    pub bag: Vec<usize>,
    pub children: SmallVec<[usize; 2]>,
}

/// A rooted nice decomposition in post-order; the root is the last node
/// and has an empty bag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    nodes: Vec<NiceNode>,
}

impl NiceTreeDecomposition {
    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Vertices in the bags of the subtree below `node`, sorted.
    pub fn subtree_vertices(&self, node: usize) -> Vec<usize> {
        let mut out = std::collections::BTreeSet::new();
        let mut stack = vec![node];
        while let Some(t) = stack.pop() {
            out.extend(self.nodes[t].bag.iter().copied());
            stack.extend(self.nodes[t].children.iter().copied());
        }
        out.into_iter().collect()
    }

    /// Checks the bag relation of every node kind. Returns the first
    /// failure.
    pub fn check(&self) -> std::result::Result<(), String> {
        for (i, node) in self.nodes.iter().enumerate() {
            if node.children.iter().any(|&c| c >= i) {
                return Err(format!("node {i} is not in post-order"));
            }
            let child_bag = |x: usize| &self.nodes[node.children[x]].bag;
            let ok = match node.kind {
                NiceKind::Leaf => node.children.is_empty() && node.bag.is_empty(),
                NiceKind::Introduce(v) => {
                    node.children.len() == 1 && !child_bag(0).contains(&v) && {
                        let mut b = child_bag(0).clone();
                        b.push(v);
                        b.sort_unstable();
                        b == node.bag
                    }
                }
                NiceKind::Forget(v) => {
                    node.children.len() == 1 && child_bag(0).contains(&v) && {
                        let b: Vec<usize> = child_bag(0).iter().copied().filter(|&w| w != v).collect();
                        b == node.bag
                    }
                }
                NiceKind::Join => node.children.len() == 2 && child_bag(0) == &node.bag && child_bag(1) == &node.bag,
            };
            if !ok {
                return Err(format!("node {i} ({:?}) breaks its bag relation", node.kind));
            }
        }
        if !self.nodes[self.root()].bag.is_empty() {
            return Err("root bag is not empty".into());
        }
        Ok(())
    }

    /// The underlying plain decomposition (every node becomes a bag).
    pub fn to_decomposition(&self, n: usize) -> Result<TreeDecomposition> {
        let bags = self.nodes.iter().map(|x| x.bag.clone()).collect();
        let edges = self
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(i, x)| x.children.iter().map(move |&c| (c, i)))
            .collect();
        TreeDecomposition::new(n, bags, edges)
    }
}

/// Converts a decomposition into nice form, rooted at its last bag, with a
/// chain of forgets up to an empty root.
pub fn make_nice(td: &TreeDecomposition) -> NiceTreeDecomposition {
    let adj = td.tree_neighbors();
    let root = td.bags.len() - 1;
    // iterative post-order over the bag tree
    let mut parent = vec![usize::MAX; td.bags.len()];
    let mut order = Vec::with_capacity(td.bags.len());
    let mut stack = vec![root];
    parent[root] = root;
    while let Some(t) = stack.pop() {
        order.push(t);
        for &c in &adj[t] {
            if parent[c] == usize::MAX {
                parent[c] = t;
                stack.push(c);
            }
        }
    }
    let mut nodes: Vec<NiceNode> = Vec::new();
    let push = |nodes: &mut Vec<NiceNode>, kind: NiceKind, bag: Vec<usize>, children: &[usize]| {
        nodes.push(NiceNode {
            kind,
            bag,
            children: SmallVec::from_slice(children),
        });
        nodes.len() - 1
    };
    // Moves a subtree whose top bag is `from` up to bag `to`.
    let morph = |nodes: &mut Vec<NiceNode>, mut top: usize, to: &[usize]| {
        let from = nodes[top].bag.clone();
        let mut bag = from.clone();
        for &v in from.iter().filter(|v| to.binary_search(v).is_err()) {
            bag.retain(|&w| w != v);
            top = push(nodes, NiceKind::Forget(v), bag.clone(), &[top]);
        }
        for &v in to.iter().filter(|v| from.binary_search(v).is_err()) {
            let at = bag.partition_point(|&w| w < v);
            bag.insert(at, v);
            top = push(nodes, NiceKind::Introduce(v), bag.clone(), &[top]);
        }
        top
    };
    let mut top_of = vec![usize::MAX; td.bags.len()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); td.bags.len()];
    for &t in &order {
        if t != root {
            children[parent[t]].push(t);
        }
    }
    for &t in order.iter().rev() {
        let bag = &td.bags[t];
        let mut branches: Vec<usize> = children[t].iter().map(|&c| morph(&mut nodes, top_of[c], bag)).collect();
        if branches.is_empty() {
            let leaf = push(&mut nodes, NiceKind::Leaf, Vec::new(), &[]);
            branches.push(morph(&mut nodes, leaf, bag));
        }
        let mut top = branches[0];
        for &b in &branches[1..] {
            top = push(&mut nodes, NiceKind::Join, bag.clone(), &[top, b]);
        }
        top_of[t] = top;
    }
    morph(&mut nodes, top_of[root], &[]);
    NiceTreeDecomposition { nodes }
}

/// Colors `0..=k` per bag vertex, aligned with the sorted bag.
pub type BagColoring = SmallVec<[u8; 8]>;

/// One node's table; absent keys stand for the empty set.
pub type TinTable = FxHashMap<BagColoring, ProfileSet>;

/// Every assignment of `0..=k` to the bag whose color classes are
/// independent, in mixed-radix order (first bag vertex most significant).
pub fn enumerate_bag_colorings(inst: &ConflictInstance, bag: &[usize]) -> Vec<BagColoring> {
    fn go(inst: &ConflictInstance, bag: &[usize], cur: &mut BagColoring, out: &mut Vec<BagColoring>) {
        let i = cur.len();
        if i == bag.len() {
            out.push(cur.clone());
            return;
        }
        for c in 0..=inst.k() as u8 {
            if c > 0 && (0..i).any(|x| cur[x] == c && inst.has_edge(bag[x], bag[i])) {
                continue;
            }
            cur.push(c);
            go(inst, bag, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(inst, bag, &mut SmallVec::new(), &mut out);
    out
}

/// `w(c)`: profit of the bag vertices under their colors.
fn bag_weight(inst: &ConflictInstance, bag: &[usize], c: &[u8]) -> Profile {
    let mut w = Profile::zero(inst.k());
    for (i, &x) in c.iter().enumerate() {
        if x > 0 {
            w.as_mut_slice()[x as usize - 1] += inst.profit(x as usize - 1, bag[i]);
        }
    }
    w
}

fn insert_or_union(table: &mut TinTable, key: BagColoring, set: ProfileSet, cap: usize) -> Result<()> {
    match table.entry(key) {
        std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().union_with(&set, cap),
        std::collections::hash_map::Entry::Vacant(e) => {
            e.insert(set);
            Ok(())
        }
    }
}

/// The table of one nice node from its children's tables. Colorings absent
/// from a child table have no extensions and are skipped.
pub fn tin_dp_node(
    inst: &ConflictInstance,
    node: &NiceNode,
    child_bags: &[&[usize]],
    children: &[&TinTable],
    limits: &Limits,
    work: &mut u64,
) -> Result<TinTable> {
    let k = inst.k();
    let cap = limits.profile_cap;
    let mut out = TinTable::default();
    match node.kind {
        NiceKind::Leaf => {
            out.insert(SmallVec::new(), ProfileSet::zero(k));
        }
        NiceKind::Introduce(v) => {
            let at = node.bag.binary_search(&v).expect("introduced vertex is in the bag");
            let below = child_bags[0];
            for (c, set) in children[0] {
                for x in 0..=k as u8 {
                    if x > 0 && (0..below.len()).any(|i| c[i] == x && inst.has_edge(below[i], v)) {
                        continue;
                    }
                    let mut key = c.clone();
                    key.insert(at, x);
                    let value = if x == 0 {
                        set.clone()
                    } else {
                        set.shift(&Profile::unit(k, x as usize - 1, inst.profit(x as usize - 1, v)))?
                    };
                    out.insert(key, value);
                }
            }
        }
        NiceKind::Forget(v) => {
            let at = child_bags[0].binary_search(&v).expect("forgotten vertex is in the child bag");
            for (c, set) in children[0] {
                let mut key = c.clone();
                key.remove(at);
                insert_or_union(&mut out, key, set.clone(), cap)?;
            }
        }
        NiceKind::Join => {
            let (left, right) = (children[0], children[1]);
            for (c, s1) in left {
                let Some(s2) = right.get(c) else {
                    continue;
                };
                let w = bag_weight(inst, &node.bag, c);
                let trimmed = s1.unshift(&w).expect("every member includes the bag weight");
                *work += (trimmed.len() * s2.len()) as u64;
                out.insert(c.clone(), trimmed.merge(s2, cap)?);
            }
        }
    }
    Ok(out)
}

/// Tables for every node of a nice decomposition, kept for witness
/// extraction.
pub struct TinDp<'a> {
    inst: &'a ConflictInstance,
    nice: NiceTreeDecomposition,
    tables: Vec<TinTable>,
    work: u64,
}

impl<'a> TinDp<'a> {
    /// Runs the recurrence on a nice decomposition of `inst`.
    pub fn run(inst: &'a ConflictInstance, nice: NiceTreeDecomposition, limits: &Limits) -> Result<Self> {
        let mut tables: Vec<TinTable> = Vec::with_capacity(nice.nodes.len());
        let mut work = 0;
        for node in &nice.nodes {
            let child_bags: SmallVec<[&[usize]; 2]> =
                node.children.iter().map(|&c| nice.nodes[c].bag.as_slice()).collect();
            let table = {
                let children: SmallVec<[&TinTable; 2]> = node.children.iter().map(|&c| &tables[c]).collect();
                tin_dp_node(inst, node, &child_bags, &children, limits, &mut work)?
            };
            tables.push(table);
        }
        let dp = TinDp {
            inst,
            nice,
            tables,
            work,
        };
        Ok(dp)
    }

    pub fn nice(&self) -> &NiceTreeDecomposition {
        &self.nice
    }

    pub fn table(&self, node: usize) -> &TinTable {
        &self.tables[node]
    }

    /// The root's single cell: every profile of `inst`.
    pub fn profiles(&self) -> ProfileSet {
        self.tables[self.nice.root()]
            .get(&BagColoring::new())
            .cloned()
            .expect("the empty coloring always extends")
    }

    pub fn stats(&self) -> SolveStats {
        SolveStats {
            elapsed_ms: 0,
            dp_cells: self.tables.iter().map(|t| t.len() as u64).sum(),
            profiles_stored: self.tables.iter().flat_map(|t| t.values()).map(|s| s.len() as u64).sum(),
            work: self.work,
        }
    }

    /// A coloring with profile `target`, by walking back from the root.
    pub fn witness(&self, target: &Profile) -> Option<PartialKColoring> {
        let k = self.inst.k();
        let root = self.nice.root();
        if !self.tables[root].get(&BagColoring::new())?.contains(target) {
            return None;
        }
        let mut assignment = vec![0usize; self.inst.n()];
        let mut todo = vec![(root, BagColoring::new(), target.clone())];
        while let Some((t, c, want)) = todo.pop() {
            let node = &self.nice.nodes[t];
            match node.kind {
                NiceKind::Leaf => {}
                NiceKind::Introduce(v) => {
                    let at = node.bag.binary_search(&v).expect("in bag");
                    let x = c[at] as usize;
                    let mut key = c.clone();
                    key.remove(at);
                    let rest = if x > 0 {
                        assignment[v] = x;
                        want.checked_sub(&Profile::unit(k, x - 1, self.inst.profit(x - 1, v)))
                            .expect("member includes the introduced profit")
                    } else {
                        want
                    };
                    todo.push((node.children[0], key, rest));
                }
                NiceKind::Forget(v) => {
                    let child = node.children[0];
                    let at = self.nice.nodes[child].bag.binary_search(&v).expect("in child bag");
                    let key = (0..=k as u8)
                        .map(|x| {
                            let mut key = c.clone();
                            key.insert(at, x);
                            key
                        })
                        .find(|key| self.tables[child].get(key).is_some_and(|s| s.contains(&want)))
                        .expect("forgotten cell members have a source");
                    todo.push((child, key, want));
                }
                NiceKind::Join => {
                    let (l, r) = (node.children[0], node.children[1]);
                    let w = bag_weight(self.inst, &node.bag, &c);
                    let s1 = &self.tables[l][&c];
                    let s2 = &self.tables[r][&c];
                    let (q1, q2) = s1
                        .sorted()
                        .into_iter()
                        .find_map(|q1| {
                            let q2 = want.checked_sub(&q1.checked_sub(&w)?)?;
                            s2.contains(&q2).then_some((q1, q2))
                        })
                        .expect("join cell members decompose");
                    todo.push((l, c.clone(), q1));
                    todo.push((r, c, q2));
                }
            }
        }
        Some(PartialKColoring::from_assignment(&assignment, k))
    }
}

/// Every profile of `inst`, computed along a decomposition.
pub fn tin_profiles(inst: &ConflictInstance, td: &TreeDecomposition, limits: &Limits) -> Result<ProfileSet> {
    validate_td(inst, td, limits)?;
    Ok(TinDp::run(inst, make_nice(td), limits)?.profiles())
}

/// Optimum and witness along a tree decomposition, which is checked first.
pub fn solve_tin(inst: &ConflictInstance, td: &TreeDecomposition, limits: &Limits) -> Result<Solution> {
    let start = Instant::now();
    validate_td(inst, td, limits)?;
    let dp = TinDp::run(inst, make_nice(td), limits)?;
    let all = dp.profiles();
    let profile = all.best_profile()?.clone();
    let witness = dp.witness(&profile).expect("profile taken from the root");
    let mut stats = dp.stats();
    stats.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(Solution {
        optimum: profile.satisfaction_level(),
        profile,
        witness,
        stats,
    })
}
