//! Problem data model: conflict instances, partial k-colorings, the text
//! instance format and connected-component decomposition.
//!
//! Vertices are 0-based inside the library. Files and every user-facing
//! report use 1-based ids.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::profile::Profile;

/// A conflict graph together with `k` nonnegative integer profit functions.
///
/// Immutable once constructed; every constructor enforces the invariants
/// (no self-loops, no duplicate edges, endpoints in range, `k >= 1`,
/// per-agent profit totals fit in a `u64`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictInstance {
    n: usize,
    k: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    profits: Vec<Vec<u64>>,
    totals: Vec<u64>,
}

impl ConflictInstance {
    /// Builds an instance from 0-based edges and a `k x n` profit matrix
    /// (`profits[j][v]` is the profit of vertex `v` for agent `j`).
    pub fn new(n: usize, profits: Vec<Vec<u64>>, edges: &[(usize, usize)]) -> Result<Self> {
        let k = profits.len();
        if k == 0 {
            return Err(Error::InvalidInstance("k must be at least 1".into()));
        }
        for row in &profits {
            if row.len() != n {
                return Err(Error::CountMismatch {
                    what: "profits per agent",
                    declared: n,
                    found: row.len(),
                });
            }
        }
        let mut totals = Vec::with_capacity(k);
        for (j, row) in profits.iter().enumerate() {
            let total = row
                .iter()
                .try_fold(0u64, |acc, &p| acc.checked_add(p))
                .ok_or(Error::ProfitOverflow { agent: j + 1 })?;
            totals.push(total);
        }

        let mut seen = HashSet::with_capacity(edges.len());
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for x in [a, b] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { id: x + 1, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop { line: 0, v: a + 1 });
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge {
                    line: 0,
                    u: e.0 + 1,
                    v: e.1 + 1,
                });
            }
            canonical.push(e);
        }
        canonical.sort_unstable();

        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &canonical {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        Ok(ConflictInstance {
            n,
            k,
            edges: canonical,
            adjacency,
            profits,
            totals,
        })
    }

    /// An instance without edges.
    pub fn edgeless(profits: Vec<Vec<u64>>) -> Result<Self> {
        let n = profits.first().map_or(0, Vec::len);
        Self::new(n, profits, &[])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Edges as 0-based pairs `(u, v)` with `u < v`, sorted ascending.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn is_edgeless(&self) -> bool {
        self.edges.is_empty()
    }

    /// Profit of vertex `v` for agent `agent` (both 0-based).
    pub fn profit(&self, agent: usize, v: usize) -> u64 {
        self.profits[agent][v]
    }

    pub fn profits(&self, agent: usize) -> &[u64] {
        &self.profits[agent]
    }

    pub fn profit_matrix(&self) -> &[Vec<u64>] {
        &self.profits
    }

    /// The profit vector of a single vertex across all agents.
    pub fn item(&self, v: usize) -> Profile {
        Profile::from_iter(self.profits.iter().map(|row| row[v]))
    }

    /// `p_j(V)` for every agent.
    pub fn total_profits(&self) -> Profile {
        Profile::from_slice(&self.totals)
    }

    /// `Q`: the largest per-agent total profit, 0 for the empty instance.
    pub fn max_total_profit(&self) -> u64 {
        self.totals.iter().copied().max().unwrap_or(0)
    }

    /// Same graph, different profits.
    pub fn with_profits(&self, profits: Vec<Vec<u64>>) -> Result<Self> {
        Self::new(self.n, profits, &self.edges)
    }

    /// The subinstance induced by `vertices`; local id `i` is `vertices[i]`.
    pub fn induced(&self, vertices: &[usize]) -> ConflictInstance {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adjacency[v] {
                let j = local[w];
                if j != usize::MAX && i < j {
                    edges.push((i, j));
                }
            }
        }
        let profits = self
            .profits
            .iter()
            .map(|row| vertices.iter().map(|&v| row[v]).collect())
            .collect();
        ConflictInstance::new(vertices.len(), profits, &edges)
            .expect("induced subinstance of a valid instance is valid")
    }

    /// Serializes to the instance text format (edges ascending).
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ConflictInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p fkd {} {} {}", self.n, self.edges.len(), self.k)?;
        for (j, row) in self.profits.iter().enumerate() {
            write!(f, "w {}", j + 1)?;
            for p in row {
                write!(f, " {p}")?;
            }
            writeln!(f)?;
        }
        for &(u, v) in &self.edges {
            writeln!(f, "e {} {}", u + 1, v + 1)?;
        }
        Ok(())
    }
}

impl FromStr for ConflictInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_instance(s)
    }
}

fn parse_count(token: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let token = token.ok_or_else(|| Error::syntax(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::syntax(line, format!("invalid {what} `{token}`")))
}

fn parse_profit(token: &str, line: usize, agent: usize) -> Result<u64> {
    let value: i128 = token
        .parse()
        .map_err(|_| Error::syntax(line, format!("invalid profit `{token}`")))?;
    if value < 0 {
        return Err(Error::NegativeProfit {
            line,
            value: token.to_string(),
        });
    }
    u64::try_from(value).map_err(|_| Error::ProfitOverflow { agent })
}

/// Parses the text instance format:
///
/// ```text
/// c comment
/// p fkd <n> <m> <k>
/// w <j> <p_j(v_1)> ... <p_j(v_n)>     (k lines, j = 1..k in order)
/// e <u> <v>                           (m lines, 1 <= u < v <= n)
/// ```
///
/// Blank lines are ignored. When `n = 0` the weight lines may be omitted.
pub fn parse_instance(text: &str) -> Result<ConflictInstance> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut profits: Vec<Vec<u64>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut seen = HashSet::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let mut tokens = raw.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        match tag {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(Error::syntax(line, "duplicate header"));
                }
                if tokens.next() != Some("fkd") {
                    return Err(Error::syntax(line, "expected `p fkd <n> <m> <k>`"));
                }
                let n = parse_count(tokens.next(), line, "vertex count")?;
                let m = parse_count(tokens.next(), line, "edge count")?;
                let k = parse_count(tokens.next(), line, "agent count")?;
                if k == 0 {
                    return Err(Error::syntax(line, "agent count must be at least 1"));
                }
                if tokens.next().is_some() {
                    return Err(Error::syntax(line, "trailing tokens after header"));
                }
                header = Some((n, m, k));
            }
            "w" => {
                let (n, _, k) = header.ok_or_else(|| Error::syntax(line, "weight line before header"))?;
                let j = parse_count(tokens.next(), line, "agent index")?;
                if j != profits.len() + 1 || j > k {
                    return Err(Error::syntax(
                        line,
                        format!("expected weight line for agent {}, found {j}", profits.len() + 1),
                    ));
                }
                let row = tokens
                    .map(|t| parse_profit(t, line, j))
                    .collect::<Result<Vec<u64>>>()?;
                if row.len() != n {
                    return Err(Error::CountMismatch {
                        what: "weights on a `w` line",
                        declared: n,
                        found: row.len(),
                    });
                }
                profits.push(row);
            }
            "e" => {
                let (n, _, _) = header.ok_or_else(|| Error::syntax(line, "edge line before header"))?;
                let u = parse_count(tokens.next(), line, "edge endpoint")?;
                let v = parse_count(tokens.next(), line, "edge endpoint")?;
                if tokens.next().is_some() {
                    return Err(Error::syntax(line, "trailing tokens after edge"));
                }
                for id in [u, v] {
                    if id == 0 || id > n {
                        return Err(Error::VertexOutOfRange { id, n });
                    }
                }
                if u == v {
                    return Err(Error::SelfLoop { line, v: u });
                }
                let e = (u.min(v) - 1, u.max(v) - 1);
                if !seen.insert(e) {
                    return Err(Error::DuplicateEdge {
                        line,
                        u: e.0 + 1,
                        v: e.1 + 1,
                    });
                }
                edges.push(e);
            }
            other => {
                return Err(Error::syntax(line, format!("unknown line type `{other}`")));
            }
        }
    }

    let (n, m, k) = header.ok_or_else(|| Error::syntax(last_line + 1, "missing `p fkd` header"))?;
    if profits.is_empty() && n == 0 {
        profits = vec![Vec::new(); k];
    }
    if profits.len() != k {
        return Err(Error::CountMismatch {
            what: "weight lines",
            declared: k,
            found: profits.len(),
        });
    }
    if edges.len() != m {
        return Err(Error::CountMismatch {
            what: "edges",
            declared: m,
            found: edges.len(),
        });
    }
    ConflictInstance::new(n, profits, &edges)
}

/// `k` pairwise disjoint independent sets, stored 0-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialKColoring {
    classes: Vec<Vec<usize>>,
}

impl PartialKColoring {
    pub fn new(classes: Vec<Vec<usize>>) -> Self {
        let classes = classes
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        PartialKColoring { classes }
    }

    pub fn empty(k: usize) -> Self {
        PartialKColoring {
            classes: vec![Vec::new(); k],
        }
    }

    /// Builds a coloring from per-vertex values in `0..=k` (0 = unassigned).
    pub fn from_assignment(assignment: &[usize], k: usize) -> Self {
        let mut classes = vec![Vec::new(); k];
        for (v, &c) in assignment.iter().enumerate() {
            if c > 0 {
                classes[c - 1].push(v);
            }
        }
        PartialKColoring { classes }
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class(&self, j: usize) -> &[usize] {
        &self.classes[j]
    }

    pub fn is_empty(&self) -> bool {
        self.classes.iter().all(Vec::is_empty)
    }

    /// Classes with 1-based vertex ids.
    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.classes
            .iter()
            .map(|c| c.iter().map(|v| v + 1).collect())
            .collect()
    }

    /// Renames vertices through `map` (local id -> global id).
    pub fn relabel(&self, map: &[usize]) -> Self {
        Self::new(
            self.classes
                .iter()
                .map(|c| c.iter().map(|&v| map[v]).collect())
                .collect(),
        )
    }

    /// Class-wise union of two colorings of disjoint vertex sets.
    pub fn union(&self, other: &Self) -> Self {
        Self::new(
            self.classes
                .iter()
                .zip(&other.classes)
                .map(|(a, b)| a.iter().chain(b).copied().collect())
                .collect(),
        )
    }
}

/// Checks that `coloring` is a partial k-coloring of `inst`.
///
/// Reports the first violation found: vertex ids out of range, then a vertex
/// shared by two classes, then an edge inside a class.
pub fn validate_coloring(inst: &ConflictInstance, coloring: &PartialKColoring) -> Result<()> {
    if coloring.k() != inst.k() {
        return Err(Error::CountMismatch {
            what: "color classes",
            declared: inst.k(),
            found: coloring.k(),
        });
    }
    for class in coloring.classes() {
        for &v in class {
            if v >= inst.n() {
                return Err(Error::VertexOutOfRange { id: v + 1, n: inst.n() });
            }
        }
    }
    let mut owner = vec![usize::MAX; inst.n()];
    for (j, class) in coloring.classes().iter().enumerate() {
        for &v in class {
            if owner[v] != usize::MAX {
                return Err(Error::InvalidColoring(format!(
                    "vertex {} in two classes ({} and {})",
                    v + 1,
                    owner[v] + 1,
                    j + 1
                )));
            }
            owner[v] = j;
        }
    }
    for &(u, v) in inst.edges() {
        if owner[u] != usize::MAX && owner[u] == owner[v] {
            return Err(Error::InvalidColoring(format!(
                "edge {{{}, {}}} inside class {}",
                u + 1,
                v + 1,
                owner[u] + 1
            )));
        }
    }
    Ok(())
}

/// `(p_1(X_1), ..., p_k(X_k))`.
pub fn profile_of(inst: &ConflictInstance, coloring: &PartialKColoring) -> Profile {
    Profile::from_iter(
        coloring
            .classes()
            .iter()
            .enumerate()
            .map(|(j, class)| class.iter().map(|&v| inst.profit(j, v)).sum()),
    )
}

/// One connected component with its induced subinstance.
#[derive(Debug, Clone)]
pub struct Component {
    /// Global vertex ids, ascending; local id `i` is `vertices[i]`.
    pub vertices: Vec<usize>,
    pub instance: ConflictInstance,
}

impl Component {
    pub fn to_global(&self, local: usize) -> usize {
        self.vertices[local]
    }
}

#[derive(Debug, Clone)]
pub struct ComponentPartition {
    pub components: Vec<Component>,
    /// `location[v] = (component index, local id)`.
    location: Vec<(usize, usize)>,
}

impl ComponentPartition {
    pub fn to_local(&self, v: usize) -> (usize, usize) {
        self.location[v]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Splits an instance into connected components, ordered by smallest vertex.
pub fn connected_components(inst: &ConflictInstance) -> ComponentPartition {
    let n = inst.n();
    let mut comp = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut head = 0;
        while head < members.len() {
            let v = members[head];
            head += 1;
            for &w in inst.neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    let mut location = vec![(0, 0); n];
    for (c, members) in groups.iter().enumerate() {
        for (i, &v) in members.iter().enumerate() {
            location[v] = (c, i);
        }
    }
    let components = groups
        .into_iter()
        .map(|vertices| Component {
            instance: inst.induced(&vertices),
            vertices,
        })
        .collect();
    ComponentPartition {
        components,
        location,
    }
}
