//! Graphs given by a clique-width expression.
//!
//! An ℓ-expression builds a labeled graph from single labeled vertices by
//! disjoint union `(u e f)`, joining two labels `(eta i j e)` and relabeling
//! `(rho i j e)`. For every subexpression the solver tabulates, per *label
//! profile* (the set of labels occurring in each agent's class), the
//! profiles reachable by partial k-colorings with that label profile.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Instant;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::model::{ConflictInstance, PartialKColoring};
use crate::profile::{Profile, ProfileSet};
use crate::report::{Solution, SolveStats};
use crate::Limits;

/// Largest label budget the bitmask keys can hold.
pub const MAX_LABELS: usize = 32;

/// One operation. Labels are 0-based here, 1-based in text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Vertex { label: usize, id: usize },
    Union(usize, usize),
    Eta { i: usize, j: usize, child: usize },
    Rho { i: usize, j: usize, child: usize },
}

/// An expression stored in post-order: children precede their parent and
/// the root is the last node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueExpression {
    nodes: Vec<Node>,
    labels: usize,
}

impl CliqueExpression {
    /// Builds an expression from post-ordered nodes, checking labels,
    /// child indices and vertex-id uniqueness.
    pub fn new(nodes: Vec<Node>, labels: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidExpression("empty expression".into()));
        }
        if labels > MAX_LABELS {
            return Err(Error::InvalidExpression(format!("at most {MAX_LABELS} labels are supported")));
        }
        let check_label = |l: usize| {
            if l >= labels {
                Err(Error::InvalidExpression(format!("label {} exceeds budget {labels}", l + 1)))
            } else {
                Ok(())
            }
        };
        let mut used = vec![false; nodes.len()];
        let mut ids = BTreeSet::new();
        for (idx, node) in nodes.iter().enumerate() {
            let children: SmallVec<[usize; 2]> = match *node {
                Node::Vertex { label, id } => {
                    check_label(label)?;
                    if !ids.insert(id) {
                        return Err(Error::InvalidExpression(format!("vertex {} appears twice", id + 1)));
                    }
                    SmallVec::new()
                }
                Node::Union(l, r) => SmallVec::from_slice(&[l, r]),
                Node::Eta { i, j, child } | Node::Rho { i, j, child } => {
                    check_label(i)?;
                    check_label(j)?;
                    if i == j {
                        return Err(Error::InvalidExpression(format!("operation on equal labels {}", i + 1)));
                    }
                    SmallVec::from_slice(&[child])
                }
            };
            for c in children {
                if c >= idx || used[c] {
                    return Err(Error::InvalidExpression(format!("node {idx} has a bad child {c}")));
                }
                used[c] = true;
            }
        }
        if used[..nodes.len() - 1].iter().any(|u| !u) {
            return Err(Error::InvalidExpression("expression is not a single tree".into()));
        }
        Ok(CliqueExpression { nodes, labels })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> Node {
        self.nodes[idx]
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// The label budget ℓ.
    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Vertex { .. })).count()
    }

    /// Text form with a `cw <ℓ>` header.
    pub fn to_text(&self) -> String {
        let mut parts: Vec<String> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let s = match *node {
                Node::Vertex { label, id } => format!("(v {} {})", label + 1, id + 1),
                Node::Union(l, r) => format!("(u {} {})", parts[l], parts[r]),
                Node::Eta { i, j, child } => format!("(eta {} {} {})", i + 1, j + 1, parts[child]),
                Node::Rho { i, j, child } => format!("(rho {} {} {})", i + 1, j + 1, parts[child]),
            };
            parts.push(s);
        }
        format!("cw {}\n{}\n", self.labels, parts.pop().expect("nonempty"))
    }
}

impl fmt::Display for CliqueExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug)]
enum Token {
    Open(usize),
    Close(usize),
    Atom(usize, String),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut atom = String::new();
        let flush = |atom: &mut String, out: &mut Vec<Token>| {
            if !atom.is_empty() {
                out.push(Token::Atom(line_no, std::mem::take(atom)));
            }
        };
        for ch in line.chars() {
            match ch {
                '(' => {
                    flush(&mut atom, &mut out);
                    out.push(Token::Open(line_no));
                }
                ')' => {
                    flush(&mut atom, &mut out);
                    out.push(Token::Close(line_no));
                }
                c if c.is_whitespace() => flush(&mut atom, &mut out),
                c => atom.push(c),
            }
        }
        flush(&mut atom, &mut out);
    }
    out
}

struct Frame {
    line: usize,
    head: String,
    args: Vec<usize>,
    children: Vec<usize>,
}

/// Parses the S-expression grammar, with an optional leading `cw <ℓ>`
/// header. Without a header ℓ is the largest label used.
pub fn parse_k_expression(text: &str) -> Result<CliqueExpression> {
    let mut body = String::new();
    let mut declared = None;
    let mut seen_content = false;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with("c ") || trimmed == "c" {
            body.push('\n');
            continue;
        }
        if !seen_content && trimmed.starts_with("cw") {
            let mut it = trimmed.split_whitespace();
            it.next();
            let value = it
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .filter(|&l| l >= 1)
                .ok_or_else(|| Error::syntax(idx + 1, "expected `cw <labels>`"))?;
            if it.next().is_some() {
                return Err(Error::syntax(idx + 1, "trailing text after `cw <labels>`"));
            }
            declared = Some(value);
            body.push('\n');
            continue;
        }
        if !trimmed.is_empty() {
            seen_content = true;
        }
        body.push_str(line);
        body.push('\n');
    }

    let tokens = tokenize(&body);
    let mut nodes: Vec<Node> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut root = None;
    let mut max_label = 0usize;
    let mut iter = tokens.into_iter().peekable();
    while let Some(tok) = iter.next() {
        match tok {
            Token::Open(line) => {
                if root.is_some() {
                    return Err(Error::syntax(line, "text after the complete expression"));
                }
                let head = match iter.next() {
                    Some(Token::Atom(_, h)) => h,
                    _ => return Err(Error::syntax(line, "expected an operation name after `(`")),
                };
                let arity = match head.as_str() {
                    "v" | "eta" | "rho" => 2,
                    "u" => 0,
                    other => return Err(Error::syntax(line, format!("unknown operation `{other}`"))),
                };
                let mut args = Vec::with_capacity(arity);
                for _ in 0..arity {
                    match iter.next() {
                        Some(Token::Atom(l, a)) => match a.parse::<usize>() {
                            Ok(x) if x >= 1 => args.push(x),
                            _ => return Err(Error::syntax(l, format!("expected a positive integer, got `{a}`"))),
                        },
                        _ => return Err(Error::syntax(line, format!("`{head}` needs {arity} numbers"))),
                    }
                }
                stack.push(Frame {
                    line,
                    head,
                    args,
                    children: Vec::new(),
                });
            }
            Token::Close(line) => {
                let frame = stack.pop().ok_or_else(|| Error::syntax(line, "unbalanced `)`"))?;
                let want = match frame.head.as_str() {
                    "v" => 0,
                    "u" => 2,
                    _ => 1,
                };
                if frame.children.len() != want {
                    return Err(Error::syntax(
                        frame.line,
                        format!("`{}` takes {want} subexpressions, found {}", frame.head, frame.children.len()),
                    ));
                }
                let node = match frame.head.as_str() {
                    "v" => {
                        max_label = max_label.max(frame.args[0]);
                        Node::Vertex {
                            label: frame.args[0] - 1,
                            id: frame.args[1] - 1,
                        }
                    }
                    "u" => Node::Union(frame.children[0], frame.children[1]),
                    op => {
                        let (i, j) = (frame.args[0], frame.args[1]);
                        if i == j {
                            return Err(Error::InvalidExpression(format!(
                                "line {}: `{op}` needs two different labels, got {i} twice",
                                frame.line
                            )));
                        }
                        max_label = max_label.max(i).max(j);
                        if op == "eta" {
                            Node::Eta {
                                i: i - 1,
                                j: j - 1,
                                child: frame.children[0],
                            }
                        } else {
                            Node::Rho {
                                i: i - 1,
                                j: j - 1,
                                child: frame.children[0],
                            }
                        }
                    }
                };
                nodes.push(node);
                let idx = nodes.len() - 1;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(idx),
                    None => root = Some(idx),
                }
            }
            Token::Atom(line, a) => return Err(Error::syntax(line, format!("unexpected `{a}`"))),
        }
    }
    if let Some(frame) = stack.last() {
        return Err(Error::syntax(frame.line, "unclosed `(`"));
    }
    if root.is_none() {
        return Err(Error::syntax(0, "no expression found"));
    }
    let labels = match declared {
        Some(l) if l < max_label => {
            return Err(Error::InvalidExpression(format!("label {max_label} exceeds declared budget {l}")))
        }
        Some(l) => l,
        None => max_label,
    };
    CliqueExpression::new(nodes, labels)
}

/// The graph an expression (or subexpression) builds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    /// Vertex id -> final label (0-based).
    pub labels: BTreeMap<usize, usize>,
    /// Edges `(u, v)` with `u < v`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl LabeledGraph {
    pub fn vertices(&self) -> Vec<usize> {
        self.labels.keys().copied().collect()
    }
}

/// Evaluates the subexpression rooted at `node`.
pub fn evaluate_subexpression(expr: &CliqueExpression, node: usize) -> LabeledGraph {
    // Nodes of the subtree form a contiguous post-order range ending at `node`.
    let mut start = node;
    let mut pending = 1usize;
    while pending > 0 {
        pending -= 1;
        match expr.nodes[start] {
            Node::Vertex { .. } => {}
            Node::Union(..) => pending += 2,
            Node::Eta { .. } | Node::Rho { .. } => pending += 1,
        }
        if pending > 0 {
            start -= 1;
        }
    }
    let mut parts: Vec<Option<Vec<(usize, usize)>>> = vec![None; node + 1];
    let mut edges = BTreeSet::new();
    for idx in start..=node {
        let built = match expr.nodes[idx] {
            Node::Vertex { label, id } => vec![(id, label)],
            Node::Union(l, r) => {
                let mut a = parts[l].take().expect("child evaluated");
                a.extend(parts[r].take().expect("child evaluated"));
                a
            }
            Node::Eta { i, j, child } => {
                let part = parts[child].take().expect("child evaluated");
                for &(x, lx) in &part {
                    if lx != i {
                        continue;
                    }
                    for &(y, ly) in &part {
                        if ly == j {
                            edges.insert((x.min(y), x.max(y)));
                        }
                    }
                }
                part
            }
            Node::Rho { i, j, child } => {
                let mut part = parts[child].take().expect("child evaluated");
                for entry in &mut part {
                    if entry.1 == i {
                        entry.1 = j;
                    }
                }
                part
            }
        };
        parts[idx] = Some(built);
    }
    LabeledGraph {
        labels: parts[node].take().expect("root evaluated").into_iter().collect(),
        edges,
    }
}

/// Evaluates the whole expression.
pub fn evaluate_expression(expr: &CliqueExpression) -> LabeledGraph {
    evaluate_subexpression(expr, expr.root())
}

/// Checks that the expression builds exactly the graph of `inst` (labels
/// are ignored).
pub fn check_expression_matches(expr: &CliqueExpression, inst: &ConflictInstance) -> Result<()> {
    let g = evaluate_expression(expr);
    if let Some(&v) = g.labels.keys().find(|&&v| v >= inst.n()) {
        return Err(Error::ExpressionMismatch(format!("unknown vertex {}", v + 1)));
    }
    if let Some(v) = (0..inst.n()).find(|v| !g.labels.contains_key(v)) {
        return Err(Error::ExpressionMismatch(format!("vertex {} is missing from the expression", v + 1)));
    }
    let wanted: BTreeSet<(usize, usize)> = inst.edges().iter().copied().collect();
    if let Some(&(u, v)) = g.edges.difference(&wanted).next() {
        return Err(Error::ExpressionMismatch(format!("extra edge {{{}, {}}}", u + 1, v + 1)));
    }
    if let Some(&(u, v)) = wanted.difference(&g.edges).next() {
        return Err(Error::ExpressionMismatch(format!("missing edge {{{}, {}}}", u + 1, v + 1)));
    }
    Ok(())
}

/// Per-agent label sets as bitmasks.
pub type LabelProfile = SmallVec<[u32; 4]>;

/// One node's table; absent keys stand for the empty set.
pub type CwTable = FxHashMap<LabelProfile, ProfileSet>;

fn union_key(a: &LabelProfile, b: &LabelProfile) -> LabelProfile {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

/// The table of a single node from its children's tables. `work` collects
/// the number of vector additions performed.
pub fn dp_node(
    inst: &ConflictInstance,
    node: Node,
    children: &[&CwTable],
    limits: &Limits,
    work: &mut u64,
) -> Result<CwTable> {
    let k = inst.k();
    let cap = limits.profile_cap;
    let mut out = CwTable::default();
    match node {
        Node::Vertex { label, id } => {
            out.insert(SmallVec::from_elem(0, k), ProfileSet::zero(k));
            for j in 0..k {
                let mut key: LabelProfile = SmallVec::from_elem(0, k);
                key[j] = 1 << label;
                out.insert(key, ProfileSet::singleton(Profile::unit(k, j, inst.profit(j, id))));
            }
        }
        Node::Union(..) => {
            let (left, right) = (children[0], children[1]);
            for (k1, s1) in left {
                for (k2, s2) in right {
                    *work += (s1.len() * s2.len()) as u64;
                    let merged = s1.merge(s2, cap)?;
                    match out.entry(union_key(k1, k2)) {
                        std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().union_with(&merged, cap)?,
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(merged);
                        }
                    }
                }
            }
        }
        Node::Eta { i, j, .. } => {
            let both = (1u32 << i) | (1u32 << j);
            for (key, set) in children[0] {
                if key.iter().all(|&l| l & both != both) {
                    out.insert(key.clone(), set.clone());
                }
            }
        }
        Node::Rho { i, j, .. } => {
            for (key, set) in children[0] {
                let moved: LabelProfile = key
                    .iter()
                    .map(|&l| if l & (1 << i) != 0 { (l & !(1 << i)) | (1 << j) } else { l })
                    .collect();
                match out.entry(moved) {
                    std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().union_with(set, cap)?,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(set.clone());
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The table computed at every node, retained for witness extraction.
pub struct CwDp<'a> {
    inst: &'a ConflictInstance,
    expr: &'a CliqueExpression,
    limits: Limits,
    tables: Vec<CwTable>,
    work: u64,
}

impl<'a> CwDp<'a> {
    /// Runs the recurrence bottom-up. The expression must build `inst`.
    pub fn run(inst: &'a ConflictInstance, expr: &'a CliqueExpression, limits: &Limits) -> Result<Self> {
        check_expression_matches(expr, inst)?;
        let mut tables: Vec<CwTable> = Vec::with_capacity(expr.nodes.len());
        let mut work = 0;
        for &node in &expr.nodes {
            let table = {
                let children: SmallVec<[&CwTable; 2]> = match node {
                    Node::Vertex { .. } => SmallVec::new(),
                    Node::Union(l, r) => SmallVec::from_slice(&[&tables[l], &tables[r]]),
                    Node::Eta { child, .. } | Node::Rho { child, .. } => SmallVec::from_slice(&[&tables[child]]),
                };
                dp_node(inst, node, &children, limits, &mut work)?
            };
            tables.push(table);
        }
        let dp = CwDp {
            inst,
            expr,
            limits: *limits,
            tables,
            work,
        };
        Ok(dp)
    }

    pub fn table(&self, node: usize) -> &CwTable {
        &self.tables[node]
    }

    /// Union of the root's cells.
    pub fn profiles(&self) -> Result<ProfileSet> {
        let mut out = ProfileSet::empty(self.inst.k());
        for set in self.tables[self.expr.root()].values() {
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

    /// A coloring with profile `target`, found by walking back from the
    /// root through the retained tables.
    pub fn witness(&self, target: &Profile) -> Option<PartialKColoring> {
        let root = self.expr.root();
        let key = self.tables[root]
            .iter()
            .filter(|(_, s)| s.contains(target))
            .map(|(k, _)| k.clone())
            .min()?;
        let mut assignment = vec![0usize; self.inst.n()];
        let mut todo = vec![(root, key, target.clone())];
        while let Some((idx, key, want)) = todo.pop() {
            match self.expr.nodes[idx] {
                Node::Vertex { id, .. } => {
                    if let Some(j) = key.iter().position(|&l| l != 0) {
                        assignment[id] = j + 1;
                    }
                }
                Node::Union(l, r) => {
                    let mut found = None;
                    'pairs: for (k1, s1) in &self.tables[l] {
                        for (k2, s2) in &self.tables[r] {
                            if union_key(k1, k2) != key {
                                continue;
                            }
                            for q1 in s1.iter() {
                                if let Some(q2) = want.checked_sub(q1).filter(|q2| s2.contains(q2)) {
                                    found = Some((k1.clone(), q1.clone(), k2.clone(), q2));
                                    break 'pairs;
                                }
                            }
                        }
                    }
                    let (k1, q1, k2, q2) = found.expect("union cell members decompose");
                    todo.push((l, k1, q1));
                    todo.push((r, k2, q2));
                }
                Node::Eta { child, .. } => todo.push((child, key, want)),
                Node::Rho { i, j, child } => {
                    let source = self.tables[child]
                        .iter()
                        .filter(|(k, s)| {
                            s.contains(&want)
                                && k.iter().zip(&key).all(|(&src, &dst)| {
                                    let moved = if src & (1 << i) != 0 { (src & !(1 << i)) | (1 << j) } else { src };
                                    moved == dst
                                })
                        })
                        .map(|(k, _)| k.clone())
                        .min()
                        .expect("relabeled cell members have a source");
                    todo.push((child, source, want));
                }
            }
        }
        Some(PartialKColoring::from_assignment(&assignment, self.inst.k()))
    }
}

/// Every profile of `inst`, computed along `expr`.
pub fn cw_profiles(inst: &ConflictInstance, expr: &CliqueExpression, limits: &Limits) -> Result<ProfileSet> {
    CwDp::run(inst, expr, limits)?.profiles()
}

/// Optimum and witness along a clique-width expression.
pub fn solve_cliquewidth(inst: &ConflictInstance, expr: &CliqueExpression, limits: &Limits) -> Result<Solution> {
    let start = Instant::now();
    let dp = CwDp::run(inst, expr, limits)?;
    let all = dp.profiles()?;
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
