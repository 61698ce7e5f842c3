//! Observability graphs and the graph statistics the learners and bounds need.
//!
//! An edge `j -> i` means that playing component `j` reveals the loss of
//! component `i`. Every node carries an explicit self-loop, so the observation
//! probability of `i` is a single sum over its in-edges.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};

/// Largest graph for which [`ObservabilityGraph::independence_number_exact`] runs.
pub const EXACT_ALPHA_LIMIT: usize = 30;

/// Directed graph over `d` components with a self-loop at every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservabilityGraph {
    d: usize,
    /// Sorted targets per node, self-loop included.
    out_edges: Vec<Vec<usize>>,
    /// Sorted sources per node, self-loop excluded.
    in_edges: Vec<Vec<usize>>,
}

impl ObservabilityGraph {
    /// Builds a graph from cross edges `(from, to)`. Self-loops are added for
    /// every node; duplicates and explicit loops in `edges` are absorbed.
    pub fn new(d: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if d == 0 {
            return Err(usage("graph must have at least one node"));
        }
        let mut adj = vec![vec![false; d]; d];
        for (j, i) in edges {
            if j >= d || i >= d {
                return Err(usage(format!("edge ({j} -> {i}) out of range for d = {d}")));
            }
            adj[j][i] = true;
        }
        for (i, row) in adj.iter_mut().enumerate() {
            row[i] = true;
        }
        Ok(Self::from_matrix(adj))
    }

    fn from_matrix(adj: Vec<Vec<bool>>) -> Self {
        let d = adj.len();
        let mut out_edges = vec![Vec::new(); d];
        let mut in_edges = vec![Vec::new(); d];
        for j in 0..d {
            for i in 0..d {
                if adj[j][i] {
                    out_edges[j].push(i);
                    if i != j {
                        in_edges[i].push(j);
                    }
                }
            }
        }
        let g = Self {
            d,
            out_edges,
            in_edges,
        };
        debug_assert!(g.has_all_self_loops());
        g
    }

    /// Self-loops only: the bandit / semi-bandit observation system.
    pub fn empty(d: usize) -> Result<Self> {
        Self::new(d, std::iter::empty())
    }

    /// Every ordered pair: full information.
    pub fn complete(d: usize) -> Result<Self> {
        Self::new(d, (0..d).flat_map(|j| (0..d).map(move |i| (j, i))))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Targets of `j`, including `j` itself.
    pub fn out_neighbors(&self, j: usize) -> &[usize] {
        &self.out_edges[j]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out_edges[from].binary_search(&to).is_ok()
    }

    /// Number of cross edges (self-loops not counted).
    pub fn cross_edge_count(&self) -> usize {
        self.in_edges.iter().map(Vec::len).sum()
    }

    pub fn has_all_self_loops(&self) -> bool {
        (0..self.d).all(|i| self.has_edge(i, i))
    }

    /// In-neighborhood of `i`: every `j != i` with `j -> i`.
    pub fn in_neighborhood(&self, i: usize) -> Result<&[usize]> {
        self.in_edges
            .get(i)
            .map(Vec::as_slice)
            .ok_or_else(|| usage(format!("node {i} out of range for d = {}", self.d)))
    }

    /// `o_i = p_i + sum of p_j over the in-neighborhood of i`: the probability
    /// that `i` is observed when the played node is drawn from `p`.
    pub fn observation_probabilities(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.d {
            return Err(usage(format!(
                "probability vector has length {}, graph has {} nodes",
                p.len(),
                self.d
            )));
        }
        Ok(self.observation_probabilities_unchecked(p))
    }

    pub(crate) fn observation_probabilities_unchecked(&self, p: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|i| {
                // Observed from everywhere: exactly 1 rather than a rounded sum.
                if self.in_edges[i].len() + 1 == self.d {
                    return 1.0;
                }
                let o = p[i] + self.in_edges[i].iter().map(|&j| p[j]).sum::<f64>();
                o.min(1.0)
            })
            .collect()
    }

    /// Undirected neighbor masks, self-loops dropped. Only valid for `d <= 64`.
    fn undirected_masks(&self) -> Vec<u64> {
        debug_assert!(self.d <= 64);
        let mut masks = vec![0u64; self.d];
        for (i, sources) in self.in_edges.iter().enumerate() {
            for &j in sources {
                masks[i] |= 1 << j;
                masks[j] |= 1 << i;
            }
        }
        masks
    }

    fn undirected_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.d];
        for (i, sources) in self.in_edges.iter().enumerate() {
            for &j in sources {
                nb[i].push(j);
                nb[j].push(i);
            }
        }
        for list in &mut nb {
            list.sort_unstable();
            list.dedup();
        }
        nb
    }

    /// Size of a maximum independent set of the underlying undirected graph,
    /// by bitmask branch and bound. Limited to [`EXACT_ALPHA_LIMIT`] nodes.
    pub fn independence_number_exact(&self) -> Result<usize> {
        if self.d > EXACT_ALPHA_LIMIT {
            return Err(Error::Capability(format!(
                "exact independence number is limited to d <= {EXACT_ALPHA_LIMIT} (got {}); \
                 use independence_number_greedy",
                self.d
            )));
        }
        let masks = self.undirected_masks();
        let all = if self.d == 64 {
            u64::MAX
        } else {
            (1u64 << self.d) - 1
        };
        let mut best = 0;
        max_independent(&masks, all, 0, &mut best);
        Ok(best as usize)
    }

    /// Exact α when `d` is within the limit, otherwise `None`.
    pub fn independence_number_if_small(&self) -> Option<usize> {
        self.independence_number_exact().ok()
    }

    /// Maximal independent set size from the min-degree greedy rule: take the
    /// surviving node with the fewest surviving in+out edges (lowest id on
    /// ties), delete its closed neighborhood, repeat. A lower bound on α.
    pub fn independence_number_greedy(&self) -> usize {
        let nb = self.undirected_neighbors();
        let mut alive = vec![true; self.d];
        // Directed degree: a bidirected pair counts twice.
        let mut degree: Vec<usize> = (0..self.d)
            .map(|i| self.in_edges[i].len() + self.out_edges[i].len() - 1)
            .collect();
        let mut size = 0;
        while let Some(v) = (0..self.d)
            .filter(|&i| alive[i])
            .min_by_key(|&i| (degree[i], i))
        {
            size += 1;
            let mut removed = vec![v];
            removed.extend(nb[v].iter().copied().filter(|&u| alive[u]));
            for &u in &removed {
                alive[u] = false;
            }
            for &u in &removed {
                for &j in &self.in_edges[u] {
                    if alive[j] {
                        degree[j] -= 1;
                    }
                }
                for &i in &self.out_edges[u] {
                    if i != u && alive[i] {
                        degree[i] -= 1;
                    }
                }
            }
        }
        size
    }

    /// Greedy max-coverage dominating set (lowest id on ties). Self-loops
    /// count, so a member dominates itself.
    pub fn greedy_dominating_set(&self) -> Vec<usize> {
        let mut covered = vec![false; self.d];
        let mut remaining = self.d;
        let mut set = Vec::new();
        while remaining > 0 {
            let (best, gain) = (0..self.d)
                .map(|j| {
                    let gain = self.out_edges[j].iter().filter(|&&i| !covered[i]).count();
                    (j, gain)
                })
                .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            debug_assert!(gain > 0);
            for &i in &self.out_edges[best] {
                if !covered[i] {
                    covered[i] = true;
                    remaining -= 1;
                }
            }
            set.push(best);
        }
        debug_assert!(self.dominates(&set));
        set
    }

    /// Whether every node has an in-edge (or self-loop) from some member of `set`.
    pub fn dominates(&self, set: &[usize]) -> bool {
        let mut covered = vec![false; self.d];
        for &j in set {
            for &i in &self.out_edges[j] {
                covered[i] = true;
            }
        }
        covered.into_iter().all(|c| c)
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            alpha_exact: self.independence_number_if_small(),
            alpha_greedy: self.independence_number_greedy(),
            dominating_set: self.greedy_dominating_set(),
        }
    }

    /// Serializes in the text format read by [`parse_graphs`]; self-loops are
    /// left implicit.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.d);
        for (j, targets) in self.out_edges.iter().enumerate() {
            for &i in targets {
                if i != j {
                    let _ = writeln!(s, "{j} {i}");
                }
            }
        }
        s
    }
}

fn max_independent(masks: &[u64], cand: u64, size: u32, best: &mut u32) {
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + cand.count_ones() <= *best {
        return;
    }
    // Branch on the candidate with the most candidate neighbors.
    let mut pick = 0;
    let mut pick_deg = 0;
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let deg = (masks[v] & cand).count_ones();
        if deg <= 1 {
            // A node of degree <= 1 is always in some maximum independent set.
            max_independent(masks, cand & !masks[v] & !(1 << v), size + 1, best);
            return;
        }
        if deg > pick_deg {
            pick = v;
            pick_deg = deg;
        }
    }
    max_independent(masks, cand & !masks[pick] & !(1 << pick), size + 1, best);
    max_independent(masks, cand & !(1 << pick), size, best);
}

/// Summary statistics of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub alpha_exact: Option<usize>,
    pub alpha_greedy: usize,
    pub dominating_set: Vec<usize>,
}

/// Both sides of the weighted in-neighborhood inequality
/// `sum_i p_i / (p_i/m + P_i/m + c) <= 2 m α log(1 + (m ceil(d²/c) + d)/α) + 2m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphInequalitySides {
    pub lhs: f64,
    pub rhs: f64,
    pub alpha: usize,
    /// False when α came from the greedy heuristic (d above the exact limit).
    pub alpha_exact: bool,
}

impl GraphInequalitySides {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// `ceil(d² / c)` with `c` clamped below at 1e-12.
pub(crate) fn ceil_d2_over(d: usize, c: f64) -> f64 {
    let c = c.max(1e-12);
    ((d * d) as f64 / c).ceil()
}

pub(crate) fn graph_inequality_rhs(alpha: usize, d: usize, m: usize, c: f64) -> f64 {
    let a = alpha as f64;
    let m = m as f64;
    2.0 * m * a * (1.0 + (m * ceil_d2_over(d, c) + d as f64) / a).ln() + 2.0 * m
}

/// Evaluates both sides of the graph inequality for weights `p` (entries in
/// `[0,1]`, total at most `m`) and constant `c > 0`.
pub fn graph_inequality_sides(
    g: &ObservabilityGraph,
    p: &[f64],
    m: usize,
    c: f64,
) -> Result<GraphInequalitySides> {
    let d = g.dim();
    if p.len() != d {
        return Err(usage(format!(
            "weight vector has length {}, expected {d}",
            p.len()
        )));
    }
    if m == 0 {
        return Err(usage("m must be positive"));
    }
    if !(c > 0.0) {
        return Err(usage(format!("c must be positive, got {c}")));
    }
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(usage("weights must lie in [0, 1]"));
    }
    let total: f64 = p.iter().sum();
    if total > m as f64 + 1e-9 {
        return Err(usage(format!("weights sum to {total}, exceeding m = {m}")));
    }
    let mf = m as f64;
    let lhs = (0..d)
        .map(|i| {
            let in_mass: f64 = g.in_edges[i].iter().map(|&j| p[j]).sum();
            p[i] / (p[i] / mf + in_mass / mf + c)
        })
        .sum();
    let (alpha, alpha_exact) = match g.independence_number_if_small() {
        Some(a) => (a, true),
        None => (g.independence_number_greedy(), false),
    };
    Ok(GraphInequalitySides {
        lhs,
        rhs: graph_inequality_rhs(alpha, d, m, c),
        alpha,
        alpha_exact,
    })
}

/// Parses one or more graphs. Each block starts with a line holding `d`,
/// followed by `j i` edge lines; blocks are separated by blank lines and `#`
/// starts a comment.
pub fn parse_graphs(text: &str, origin: &Path) -> Result<Vec<ObservabilityGraph>> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut graphs = Vec::new();
    let mut current: Option<(usize, Vec<(usize, usize)>)> = None;
    let mut flush = |cur: &mut Option<(usize, Vec<(usize, usize)>)>| -> Result<()> {
        if let Some((d, edges)) = cur.take() {
            graphs.push(ObservabilityGraph::new(d, edges)?);
        }
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if raw.trim().is_empty() {
                flush(&mut current)?;
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match (&mut current, fields.as_slice()) {
            (None, [d]) => {
                let d: usize = d
                    .parse()
                    .map_err(|e| parse_err(lineno, format!("bad node count: {e}")))?;
                if d == 0 {
                    return Err(parse_err(lineno, "node count must be positive".into()));
                }
                current = Some((d, Vec::new()));
            }
            (None, _) => {
                return Err(parse_err(lineno, "expected node count".into()));
            }
            (Some((d, edges)), [j, i]) => {
                let j: usize = j
                    .parse()
                    .map_err(|e| parse_err(lineno, format!("bad source: {e}")))?;
                let i: usize = i
                    .parse()
                    .map_err(|e| parse_err(lineno, format!("bad target: {e}")))?;
                if j >= *d || i >= *d {
                    return Err(parse_err(lineno, format!("edge {j} {i} out of range")));
                }
                edges.push((j, i));
            }
            (Some(_), _) => {
                return Err(parse_err(lineno, "expected `j i` edge".into()));
            }
        }
    }
    flush(&mut current)?;
    if graphs.is_empty() {
        return Err(parse_err(0, "no graph found".into()));
    }
    Ok(graphs)
}

pub fn read_graphs(path: &Path) -> Result<Vec<ObservabilityGraph>> {
    let text = std::fs::read_to_string(path)?;
    parse_graphs(&text, path)
}
