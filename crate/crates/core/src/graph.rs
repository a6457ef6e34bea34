//! Weighted undirected graphs: the problem instances.
//!
//! Instance file format: the first non-comment line holds the vertex count
//! `N`; every further non-empty line is `i j w` with 0-based vertex indices
//! and a non-negative decimal weight. `#` starts a comment.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// An undirected edge `{i, j}` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub w: T,
}

/// Vertices `0..N` and non-negatively weighted undirected edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedGraph<T> {
    vertex_count: usize,
    edges: Vec<Edge<T>>,
}

impl<T: Real> WeightedGraph<T> {
    /// Validates and builds a graph. Endpoints may be given in either
    /// order; they are stored with `i < j`.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut g = Self::empty(vertex_count)?;
        let mut seen = HashSet::new();
        for (a, b, w) in edges {
            let e = check_edge(vertex_count, a, b, w).map_err(Error::InvalidGraph)?;
            if !seen.insert((e.i, e.j)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.i, e.j)));
            }
            g.edges.push(e);
        }
        Ok(g)
    }

    /// Graph on `vertex_count ≥ 1` vertices with no edges.
    pub fn empty(vertex_count: usize) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph("vertex count must be positive".into()));
        }
        Ok(Self {
            vertex_count,
            edges: Vec::new(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// `W = ½ Σ w_ij`.
    pub fn total_weight(&self) -> T {
        self.edges.iter().map(|e| e.w).fold(T::zero(), |a, b| a + b) * T::lit(0.5)
    }

    /// Per-vertex neighbour lists `(neighbour, weight)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.i].push((e.j, e.w));
            adj[e.j].push((e.i, e.w));
        }
        adj
    }

    /// Sum of incident weights at every vertex.
    pub fn weighted_degrees(&self) -> Vec<T> {
        let mut deg = vec![T::zero(); self.vertex_count];
        for e in &self.edges {
            deg[e.i] += e.w;
            deg[e.j] += e.w;
        }
        deg
    }

    /// True when the vertex set splits into two sides with every edge of
    /// positive weight crossing.
    pub fn is_bipartite(&self) -> bool {
        self.two_coloring().is_some()
    }

    /// A proper 2-colouring of the positive-weight edges, if one exists.
    pub fn two_coloring(&self) -> Option<Vec<bool>> {
        let adj = self.adjacency();
        let mut color: Vec<Option<bool>> = vec![None; self.vertex_count];
        for start in 0..self.vertex_count {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(false);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                let cv = color[v].unwrap();
                for &(u, w) in &adj[v] {
                    if w <= T::zero() {
                        continue;
                    }
                    match color[u] {
                        None => {
                            color[u] = Some(!cv);
                            stack.push(u);
                        }
                        Some(cu) if cu == cv => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.unwrap_or(false)).collect())
    }

    /// Same graph with edges sorted by `(i, j)`.
    pub fn canonical(&self) -> Self {
        let mut out = self.clone();
        out.edges.sort_by_key(|e| (e.i, e.j));
        out
    }

    /// Places `other` after `self`, relabelling its vertices.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let shift = self.vertex_count;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Edge {
            i: e.i + shift,
            j: e.j + shift,
            w: e.w,
        }));
        Self {
            vertex_count: self.vertex_count + other.vertex_count,
            edges,
        }
    }

    /// Serializes in the instance-file format; `parse_instance` inverts it.
    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.vertex_count);
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.i, e.j, e.w);
        }
        out
    }

    /// Converts weights to another precision.
    pub fn cast<U: Real>(&self) -> WeightedGraph<U> {
        WeightedGraph {
            vertex_count: self.vertex_count,
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    i: e.i,
                    j: e.j,
                    w: U::lit(e.w.as_f64()),
                })
                .collect(),
        }
    }
}

fn check_edge<T: Real>(n: usize, a: usize, b: usize, w: T) -> std::result::Result<Edge<T>, String> {
    if a == b {
        return Err(format!("self-loop at vertex {a}"));
    }
    if a >= n || b >= n {
        return Err(format!("vertex index out of range in ({a}, {b}) for N = {n}"));
    }
    if !w.is_finite() {
        return Err(format!("non-finite weight {w}"));
    }
    if w < T::zero() {
        return Err(format!("negative weight {w}"));
    }
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    Ok(Edge { i, j, w })
}

/// Parses an instance file. Errors carry the 1-based line number.
pub fn parse_instance<T: Real>(text: &str) -> Result<WeightedGraph<T>> {
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (first, header) = lines.next().ok_or_else(|| perr(1, "missing vertex count".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| perr(first, format!("bad vertex count {header:?}")))?;
    if n == 0 {
        return Err(perr(first, "vertex count must be positive".into()));
    }

    let mut graph = WeightedGraph::empty(n).map_err(|e| perr(first, e.to_string()))?;
    let mut seen = HashSet::new();
    for (line, content) in lines {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(perr(line, format!("expected \"i j w\", got {content:?}")));
        }
        let a: usize = fields[0]
            .parse()
            .map_err(|_| perr(line, format!("bad vertex index {:?}", fields[0])))?;
        let b: usize = fields[1]
            .parse()
            .map_err(|_| perr(line, format!("bad vertex index {:?}", fields[1])))?;
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| perr(line, format!("bad weight {:?}", fields[2])))?;
        let e = check_edge(n, a, b, T::lit(w)).map_err(|m| perr(line, m))?;
        if !seen.insert((e.i, e.j)) {
            return Err(perr(line, format!("duplicate edge ({}, {})", e.i, e.j)));
        }
        graph.edges.push(e);
    }
    Ok(graph)
}

/// Instance generators.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    SingleEdge { w: f64 },
    Cycle { n: usize, w: f64 },
    Complete { n: usize, w: f64 },
    Random { n: usize, p: f64, w_max: f64, seed: u64 },
}

impl GraphSpec {
    pub fn generate<T: Real>(&self) -> Result<WeightedGraph<T>> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match *self {
            GraphSpec::SingleEdge { w } => {
                if !(w >= 0.0 && w.is_finite()) {
                    return bad("weight must be finite and non-negative");
                }
                WeightedGraph::new(2, [(0, 1, T::lit(w))])
            }
            GraphSpec::Cycle { n, w } => {
                if n == 0 || !(w >= 0.0 && w.is_finite()) {
                    return bad("cycle needs n >= 1 and finite w >= 0");
                }
                let edges: Vec<_> = match n {
                    1 => vec![],
                    2 => vec![(0, 1, T::lit(w))],
                    _ => (0..n).map(|k| (k, (k + 1) % n, T::lit(w))).collect(),
                };
                WeightedGraph::new(n, edges)
            }
            GraphSpec::Complete { n, w } => {
                if n == 0 || !(w >= 0.0 && w.is_finite()) {
                    return bad("complete graph needs n >= 1 and finite w >= 0");
                }
                let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, T::lit(w))));
                WeightedGraph::new(n, edges)
            }
            GraphSpec::Random { n, p, w_max, seed } => {
                if n == 0 || !(0.0..=1.0).contains(&p) || !(w_max > 0.0 && w_max.is_finite()) {
                    return bad("random graph needs n >= 1, 0 <= p <= 1, w_max > 0");
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        if rng.random::<f64>() < p {
                            // uniform on (0, w_max]
                            let u: f64 = rng.random();
                            edges.push((i, j, T::lit(w_max * (1.0 - u))));
                        }
                    }
                }
                WeightedGraph::new(n, edges)
            }
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    /// `single_edge:W`, `cycle:N:W`, `complete:N:W`, `random:N:P:WMAX:SEED`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("bad generator spec {s:?}"));
        let f = |k: usize| parts.get(k).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad());
        let u = |k: usize| parts.get(k).ok_or_else(bad)?.parse::<usize>().map_err(|_| bad());
        let spec = match parts[0] {
            "single_edge" if parts.len() == 2 => GraphSpec::SingleEdge { w: f(1)? },
            "cycle" if parts.len() == 3 => GraphSpec::Cycle { n: u(1)?, w: f(2)? },
            "complete" if parts.len() == 3 => GraphSpec::Complete { n: u(1)?, w: f(2)? },
            "random" if parts.len() == 5 => GraphSpec::Random {
                n: u(1)?,
                p: f(2)?,
                w_max: f(3)?,
                seed: parts[4].parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}
