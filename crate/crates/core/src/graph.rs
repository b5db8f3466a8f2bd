//! Communication topologies: generators, rewiring, and shortest-path
//! statistics.
//!
//! Nodes are 0-based. `neighbors(i)` is the set of agents whose actions node
//! `i` observes; every generator here builds undirected graphs, so the
//! relation is symmetric unless a graph is loaded from explicit directed edges.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    neighbors: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { n, neighbors: vec![BTreeSet::new(); n] }
    }

    /// Builds a graph from edge pairs. Undirected graphs insert both directions;
    /// a directed pair `(j, i)` means `i` observes `j`.
    pub fn from_edges(n: usize, edges: &[[usize; 2]], directed: bool) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &[a, b] in edges {
            if a >= n || b >= n {
                return Err(Error::domain(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            if a == b {
                return Err(Error::domain(format!("self-loop at node {a}")));
            }
            g.neighbors[b].insert(a);
            if !directed {
                g.neighbors[a].insert(b);
            }
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.neighbors[i].insert(j);
                }
            }
        }
        g
    }

    /// Node 0 is the hub.
    pub fn star(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("star needs at least 2 nodes"));
        }
        let edges: Vec<_> = (1..n).map(|j| [0, j]).collect();
        Graph::from_edges(n, &edges, false)
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain("ring needs at least 3 nodes"));
        }
        let edges: Vec<_> = (0..n).map(|i| [i, (i + 1) % n]).collect();
        Graph::from_edges(n, &edges, false)
    }

    pub fn path(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("path needs at least 2 nodes"));
        }
        let edges: Vec<_> = (1..n).map(|i| [i - 1, i]).collect();
        Graph::from_edges(n, &edges, false)
    }

    /// Places `n` nodes uniformly in a `side x side` square and joins every
    /// pair closer than `radius`. The result may be disconnected.
    pub fn random_geometric<R: Rng + ?Sized>(
        n: usize,
        side: f64,
        radius: f64,
        rng: &mut R,
    ) -> Result<(Graph, Vec<Point>)> {
        if n < 2 {
            return Err(Error::domain("geometric graph needs at least 2 nodes"));
        }
        if !(radius > 0.0) || !(side > 0.0) {
            return Err(Error::domain("radius and side must be positive"));
        }
        let positions: Vec<Point> = (0..n)
            .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
            .collect();
        Ok((Graph::geometric_from_positions(&positions, radius), positions))
    }

    pub fn geometric_from_positions(positions: &[Point], radius: f64) -> Graph {
        let n = positions.len();
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                let d = (positions[i][0] - positions[j][0]).hypot(positions[i][1] - positions[j][1]);
                if d < radius {
                    g.neighbors[i].insert(j);
                    g.neighbors[j].insert(i);
                }
            }
        }
        g
    }

    /// Watts-Strogatz style rewiring of an undirected graph: every edge
    /// `(u, v)` with `u < v` is, with probability `p`, replaced by `(u, w)` for
    /// a uniformly drawn `w` that is neither `u` nor already adjacent to `u`.
    /// Edges are visited in lexicographic order of the source graph.
    pub fn small_world_rewire<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> Result<Graph> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("rewire probability {p} outside [0, 1]")));
        }
        if !self.is_undirected() {
            return Err(Error::domain("rewiring requires an undirected graph"));
        }
        let mut g = self.clone();
        for [u, v] in self.undirected_edges() {
            if rng.random::<f64>() >= p {
                continue;
            }
            let candidates: Vec<usize> =
                (0..g.n).filter(|&w| w != u && !g.neighbors[u].contains(&w)).collect();
            let Some(&w) = candidates.choose(rng) else { continue };
            g.neighbors[u].remove(&v);
            g.neighbors[v].remove(&u);
            g.neighbors[u].insert(w);
            g.neighbors[w].insert(u);
        }
        Ok(g)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, i: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.neighbors[i].iter().copied()
    }

    pub fn has_neighbor(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].contains(&j)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn is_undirected(&self) -> bool {
        (0..self.n).all(|i| self.neighbors[i].iter().all(|&j| self.neighbors[j].contains(&i)))
    }

    /// Each undirected edge once as `[u, v]` with `u < v`.
    pub fn undirected_edges(&self) -> Vec<[usize; 2]> {
        let mut edges = Vec::new();
        for u in 0..self.n {
            for &v in self.neighbors[u].range(u + 1..) {
                edges.push([u, v]);
            }
        }
        edges
    }

    /// Directed observation links as `[j, i]`: `i` observes `j`.
    pub fn directed_edges(&self) -> Vec<[usize; 2]> {
        (0..self.n)
            .flat_map(|i| self.neighbors[i].iter().map(move |&j| [j, i]))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// BFS distances along information flow: `dist[j]` counts hops for
    /// information held at `source` to reach `j`.
    fn hops_from(&self, source: usize) -> Vec<Option<usize>> {
        // out-links of node k are the nodes that observe k
        let mut observers = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for &j in &self.neighbors[i] {
                observers[j].push(i);
            }
        }
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(k) = queue.pop_front() {
            let d = dist[k].unwrap();
            for &w in &observers[k] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        // forward reachability from 0 plus reachability into 0
        let forward = self.hops_from(0);
        if forward.iter().any(Option::is_none) {
            return false;
        }
        let mut reached = vec![false; self.n];
        reached[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(k) = queue.pop_front() {
            for &j in &self.neighbors[k] {
                if !reached[j] {
                    reached[j] = true;
                    queue.push_back(j);
                }
            }
        }
        reached.into_iter().all(|r| r)
    }

    /// Longest and mean shortest-path length over ordered pairs of distinct
    /// nodes.
    pub fn diameter_and_mean_path(&self) -> Result<(usize, f64)> {
        if self.n < 2 {
            return Err(Error::domain("path statistics need at least 2 nodes"));
        }
        let mut diameter = 0;
        let mut total = 0usize;
        for s in 0..self.n {
            for (t, d) in self.hops_from(s).into_iter().enumerate() {
                if t == s {
                    continue;
                }
                let d = d.ok_or_else(|| Error::domain("graph is not strongly connected"))?;
                diameter = diameter.max(d);
                total += d;
            }
        }
        let pairs = self.n * (self.n - 1);
        Ok((diameter, total as f64 / pairs as f64))
    }
}

/// On-disk graph layout: `{n, edges: [[i, j], ...], positions: [[x, y], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub positions: Vec<Point>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub directed: bool,
}

impl GraphFile {
    pub fn from_graph(g: &Graph, positions: Option<&[Point]>) -> Self {
        let directed = !g.is_undirected();
        GraphFile {
            n: g.num_nodes(),
            edges: if directed { g.directed_edges() } else { g.undirected_edges() },
            positions: positions.map(<[Point]>::to_vec).unwrap_or_default(),
            directed,
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        if !self.positions.is_empty() && self.positions.len() != self.n {
            return Err(Error::domain("positions length differs from n"));
        }
        Graph::from_edges(self.n, &self.edges, self.directed)
    }
}
