//! Seeded instance generators.
//!
//! Every generator draws from one SplitMix64 stream seeded with the given
//! `u64` (the state starts at the seed). A draw below `n` is
//! `(x * n) >> 64` on the 128-bit product of the next output `x` and `n`.
//! Profits are drawn last, agent by agent and vertex by vertex, each
//! uniform in `0..=max_profit`.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::convex::{validate_convex_ordering, ConvexOrdering};
use crate::cw::{evaluate_expression, CliqueExpression, Node};
use crate::error::{Error, Result};
use crate::model::ConflictInstance;
use crate::tin::TreeDecomposition;

/// The generators' random stream.
pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// True with probability `percent / 100`.
    pub fn percent(&mut self, percent: u32) -> bool {
        self.below(100) < percent as u64
    }
}

fn draw_profits(rng: &mut Rng, k: usize, n: usize, max_profit: u64) -> Vec<Vec<u64>> {
    (0..k)
        .map(|_| (0..n).map(|_| rng.below(max_profit.saturating_add(1).max(1))).collect())
        .collect()
}

/// `G(n, p)` with `p = edge_percent / 100`, pairs drawn in lexicographic
/// order.
pub fn gen_random_graph(n: usize, k: usize, edge_percent: u32, max_profit: u64, seed: u64) -> ConflictInstance {
    let mut rng = Rng::new(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.percent(edge_percent) {
                edges.push((u, v));
            }
        }
    }
    let profits = draw_profits(&mut rng, k, n, max_profit);
    ConflictInstance::new(n, profits, &edges).expect("generated graph is simple")
}

/// Convex bipartite graph with `A = 0..na` in order and `B = na..na+nb`.
/// Each `b` draws `lo` below `na` and then `hi` in `lo..na`, and is
/// adjacent to positions `lo..=hi`. With `na = 0` every `b` is isolated.
pub fn gen_convex_bipartite(
    na: usize,
    nb: usize,
    k: usize,
    max_profit: u64,
    seed: u64,
) -> (ConflictInstance, ConvexOrdering) {
    let mut rng = Rng::new(seed);
    let mut edges = Vec::new();
    for b in 0..nb {
        if na == 0 {
            break;
        }
        let lo = rng.index(na);
        let hi = lo + rng.index(na - lo);
        edges.extend((lo..=hi).map(|a| (a, na + b)));
    }
    let n = na + nb;
    let profits = draw_profits(&mut rng, k, n, max_profit);
    let inst = ConflictInstance::new(n, profits, &edges).expect("generated graph is simple");
    let a: Vec<usize> = (0..na).collect();
    let b: Vec<usize> = (na..n).collect();
    let co = validate_convex_ordering(&inst, &a, &b).expect("intervals are convex by construction");
    (inst, co)
}

/// A random partial k-tree of width `width` with its natural
/// decomposition. Starts from the clique on `0..=width`; each later vertex
/// picks a bag, drops one of its vertices, and attaches to the rest. Each
/// edge is then deleted with probability `delete_percent / 100`.
pub fn gen_partial_ktree(
    n: usize,
    width: usize,
    k: usize,
    max_profit: u64,
    delete_percent: u32,
    seed: u64,
) -> Result<(ConflictInstance, TreeDecomposition)> {
    if width >= n {
        return Err(Error::InvalidInstance(format!("width {width} needs more than {n} vertices")));
    }
    let mut rng = Rng::new(seed);
    let mut edges = Vec::new();
    for u in 0..=width {
        for v in u + 1..=width {
            edges.push((u, v));
        }
    }
    let mut bags: Vec<Vec<usize>> = vec![(0..=width).collect()];
    let mut tree = Vec::new();
    for v in width + 1..n {
        let at = rng.index(bags.len());
        let drop = rng.index(width + 1);
        let mut bag: Vec<usize> = bags[at].iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &u)| u).collect();
        edges.extend(bag.iter().map(|&u| (u, v)));
        bag.push(v);
        tree.push((at, bags.len()));
        bags.push(bag);
    }
    edges.retain(|_| !rng.percent(delete_percent));
    let profits = draw_profits(&mut rng, k, n, max_profit);
    let inst = ConflictInstance::new(n, profits, &edges)?;
    let td = TreeDecomposition::new(n, bags, tree)?;
    Ok((inst, td))
}

fn offset(node: Node, by: usize) -> Node {
    match node {
        Node::Vertex { .. } => node,
        Node::Union(l, r) => Node::Union(l + by, r + by),
        Node::Eta { i, j, child } => Node::Eta { i, j, child: child + by },
        Node::Rho { i, j, child } => Node::Rho { i, j, child: child + by },
    }
}

/// A random expression on vertices `0..leaves` with labels below `labels`,
/// and the instance it builds.
///
/// Leaves get uniform labels. Then, while more than one subexpression is
/// left, each step draws below 10: 0..4 wraps a random subexpression in
/// `eta`, 4..6 in `rho` (both need two labels), anything else unions two
/// random subexpressions. A final `eta` is applied with even odds.
pub fn gen_cw_instance(
    leaves: usize,
    labels: usize,
    k: usize,
    max_profit: u64,
    seed: u64,
) -> (ConflictInstance, CliqueExpression) {
    assert!(leaves > 0 && labels > 0, "need a leaf and a label");
    let mut rng = Rng::new(seed);
    let mut forest: Vec<Vec<Node>> = (0..leaves)
        .map(|id| {
            vec![Node::Vertex {
                label: rng.index(labels),
                id,
            }]
        })
        .collect();
    let pair = |rng: &mut Rng| {
        let i = rng.index(labels);
        let j = (i + 1 + rng.index(labels - 1)) % labels;
        (i, j)
    };
    let wrap = |tree: &mut Vec<Node>, op: fn(usize, usize, usize) -> Node, (i, j): (usize, usize)| {
        let child = tree.len() - 1;
        tree.push(op(i, j, child));
    };
    let eta: fn(usize, usize, usize) -> Node = |i, j, child| Node::Eta { i, j, child };
    let rho: fn(usize, usize, usize) -> Node = |i, j, child| Node::Rho { i, j, child };
    while forest.len() > 1 {
        let step = rng.below(10);
        if step < 6 && labels >= 2 {
            let t = rng.index(forest.len());
            let ij = pair(&mut rng);
            wrap(&mut forest[t], if step < 4 { eta } else { rho }, ij);
        } else if step >= 6 {
            let a = rng.index(forest.len());
            let left = forest.swap_remove(a);
            let b = rng.index(forest.len());
            let right = forest.swap_remove(b);
            let by = left.len();
            let mut merged = left;
            merged.extend(right.into_iter().map(|x| offset(x, by)));
            let (l, r) = (by - 1, merged.len() - 1);
            merged.push(Node::Union(l, r));
            forest.push(merged);
        }
    }
    let mut tree = forest.pop().expect("one tree left");
    if labels >= 2 && rng.below(2) == 0 {
        let ij = pair(&mut rng);
        wrap(&mut tree, eta, ij);
    }
    let expr = CliqueExpression::new(tree, labels).expect("generated expression is well formed");
    let graph = evaluate_expression(&expr);
    let edges: Vec<(usize, usize)> = graph.edges.iter().copied().collect();
    let profits = draw_profits(&mut rng, k, leaves, max_profit);
    let inst = ConflictInstance::new(leaves, profits, &edges).expect("expression builds a simple graph");
    (inst, expr)
}

/// An expression for any graph along a vertex order. Label 1 holds
/// vertices with no later neighbors; every other vertex keeps a private
/// label until its last neighbor arrives. Uses `2 + max live vertices`
/// labels at most.
pub fn linear_expression(inst: &ConflictInstance, order: &[usize]) -> Result<CliqueExpression> {
    let n = inst.n();
    if n == 0 {
        return Err(Error::InvalidExpression("empty graph has no expression".into()));
    }
    let mut rank = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || rank[v] != usize::MAX {
            return Err(Error::InvalidInstance("vertex order is not a permutation".into()));
        }
        rank[v] = i;
    }
    if order.len() != n {
        return Err(Error::InvalidInstance("vertex order is not a permutation".into()));
    }
    let last_neighbor: Vec<usize> = (0..n)
        .map(|v| inst.neighbors(v).iter().map(|&w| rank[w]).max().unwrap_or(0))
        .collect();
    const DEAD: usize = 0;
    let mut label_of = vec![DEAD; n];
    let mut free: Vec<usize> = Vec::new();
    let mut next_label = 1;
    let mut nodes: Vec<Node> = Vec::new();
    let mut used_labels = 1;
    for (i, &v) in order.iter().enumerate() {
        let x = free.pop().unwrap_or_else(|| {
            next_label += 1;
            next_label - 1
        });
        used_labels = used_labels.max(x + 1);
        label_of[v] = x;
        nodes.push(Node::Vertex { label: x, id: v });
        if i > 0 {
            let leaf = nodes.len() - 1;
            nodes.push(Node::Union(leaf - 1, leaf));
        }
        let mut earlier: Vec<usize> = inst.neighbors(v).iter().copied().filter(|&w| rank[w] < i).collect();
        earlier.sort_by_key(|&w| rank[w]);
        for w in earlier {
            let child = nodes.len() - 1;
            nodes.push(Node::Eta {
                i: x,
                j: label_of[w],
                child,
            });
        }
        // retire v and any neighbor whose last neighbor was v
        let mut done: Vec<usize> = inst
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| rank[w] < i && last_neighbor[w] == i)
            .collect();
        if last_neighbor[v] <= i {
            done.push(v);
        }
        done.sort_by_key(|&w| rank[w]);
        for w in done {
            let child = nodes.len() - 1;
            nodes.push(Node::Rho {
                i: label_of[w],
                j: DEAD,
                child,
            });
            free.push(label_of[w]);
            label_of[w] = DEAD;
        }
    }
    // A one-vertex expression with a private label still needs the budget
    // to cover it.
    CliqueExpression::new(nodes, used_labels.max(2))
}
