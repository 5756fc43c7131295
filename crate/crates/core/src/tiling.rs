//! Combinatorial `{3,q}` triangle tilings grown ring by ring from a centre
//! vertex.
//!
//! Ring `d` is kept as a cycle in cyclic order. Each boundary edge
//! `(v_i, v_{i+1})` closes a triangle with a new "apex" vertex `w_i` in ring
//! `d + 1`; a boundary vertex with `r` missing edges additionally gets `r - 2`
//! fresh outer neighbours between `w_{i-1}` and `w_i`. Spherical cases
//! (`q < 6`) close up with a single apex or no further ring.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};

/// Hard limit on generated vertices.
pub const MAX_VERTICES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Spherical,
    Euclidean,
    Hyperbolic,
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Curvature::Spherical => "Spherical",
            Curvature::Euclidean => "Euclidean",
            Curvature::Hyperbolic => "Hyperbolic",
        })
    }
}

/// `{p,q}` is hyperbolic iff `(p-2)(q-2) > 4`, Euclidean iff it equals 4.
pub fn classify(p: usize, q: usize) -> Result<Curvature> {
    if p < 3 || q < 3 {
        return Err(QetError::InvalidParameter(format!(
            "{{{p},{q}}} is not a tiling: p and q must be at least 3"
        )));
    }
    Ok(match ((p - 2) * (q - 2)).cmp(&4) {
        std::cmp::Ordering::Greater => Curvature::Hyperbolic,
        std::cmp::Ordering::Equal => Curvature::Euclidean,
        std::cmp::Ordering::Less => Curvature::Spherical,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingSpec {
    pub p: usize,
    pub q: usize,
    pub depth: usize,
}

impl TilingSpec {
    pub fn new(p: usize, q: usize, depth: usize) -> Result<Self> {
        classify(p, q)?;
        if p != 3 {
            return Err(QetError::InvalidParameter(format!(
                "only triangle tilings (p = 3) are supported, got p = {p}"
            )));
        }
        Ok(Self { p, q, depth })
    }
}

/// Undirected graph of a tiling patch, vertex 0 at the centre.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingGraph {
    pub spec: TilingSpec,
    ring: Vec<usize>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl TilingGraph {
    fn with_center(spec: TilingSpec) -> Self {
        Self {
            spec,
            ring: vec![0],
            adjacency: vec![BTreeSet::new()],
        }
    }

    fn add_vertex(&mut self, ring: usize) -> Result<usize> {
        if self.ring.len() >= MAX_VERTICES {
            return Err(QetError::CapacityExceeded {
                requested: self.ring.len() + 1,
                limit: MAX_VERTICES,
            });
        }
        self.ring.push(ring);
        self.adjacency.push(BTreeSet::new());
        Ok(self.ring.len() - 1)
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        self.adjacency[a].insert(b);
        self.adjacency[b].insert(a);
    }

    pub fn n_vertices(&self) -> usize {
        self.ring.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn ring_of(&self, v: usize) -> usize {
        self.ring[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().copied()
    }

    pub fn max_ring(&self) -> usize {
        self.ring.iter().copied().max().unwrap_or(0)
    }

    /// Sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_edges());
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.range(u + 1..).map(|&v| (u, v)));
        }
        out
    }

    /// Builds a graph from an edge list, assigning rings by BFS from vertex 0.
    pub fn from_edges(spec: TilingSpec, edges: &[(usize, usize)]) -> Result<Self> {
        let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(1);
        let mut adjacency = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(QetError::Parse(format!("self loop at vertex {u}")));
            }
            adjacency[u].insert(v);
            adjacency[v].insert(u);
        }
        let ring = bfs_rings(&adjacency)?;
        Ok(Self {
            spec,
            ring,
            adjacency,
        })
    }
}

fn bfs_rings(adjacency: &[BTreeSet<usize>]) -> Result<Vec<usize>> {
    let mut ring = vec![usize::MAX; adjacency.len()];
    ring[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if ring[v] == usize::MAX {
                ring[v] = ring[u] + 1;
                queue.push_back(v);
            }
        }
    }
    if ring.contains(&usize::MAX) {
        return Err(QetError::Parse("edge list is not connected".into()));
    }
    Ok(ring)
}

/// Grows the tiling to `spec.depth` rings around vertex 0.
pub fn generate(spec: TilingSpec) -> Result<TilingGraph> {
    let spec = TilingSpec::new(spec.p, spec.q, spec.depth)?;
    let q = spec.q;
    let mut g = TilingGraph::with_center(spec);
    if spec.depth == 0 {
        return Ok(g);
    }
    let mut boundary = Vec::with_capacity(q);
    for _ in 0..q {
        let v = g.add_vertex(1)?;
        g.add_edge(0, v);
        boundary.push(v);
    }
    close_cycle(&mut g, &boundary);

    for d in 1..spec.depth {
        let missing: Vec<isize> = boundary
            .iter()
            .map(|&v| q as isize - g.degree(v) as isize)
            .collect();
        if missing.iter().all(|&r| r == 0) {
            break;
        }
        if missing.iter().all(|&r| r == 1) {
            let apex = g.add_vertex(d + 1)?;
            for &v in &boundary {
                g.add_edge(v, apex);
            }
            break;
        }
        if missing.iter().any(|&r| r < 2) {
            return Err(QetError::InvalidParameter(format!(
                "{{3,{q}}} does not close up regularly at ring {d}"
            )));
        }
        let m = boundary.len();
        // w closes the triangle over boundary edge (i, i+1)
        let mut next = Vec::new();
        for i in 0..m {
            for _ in 0..missing[i] - 2 {
                let f = g.add_vertex(d + 1)?;
                g.add_edge(boundary[i], f);
                next.push(f);
            }
            let w = g.add_vertex(d + 1)?;
            g.add_edge(boundary[i], w);
            g.add_edge(boundary[(i + 1) % m], w);
            next.push(w);
        }
        close_cycle(&mut g, &next);
        boundary = next;
    }
    Ok(g)
}

fn close_cycle(g: &mut TilingGraph, cycle: &[usize]) {
    if cycle.len() < 2 {
        return;
    }
    for i in 0..cycle.len() {
        g.add_edge(cycle[i], cycle[(i + 1) % cycle.len()]);
    }
}

/// Vertex count of every ring, centre first.
pub fn ring_sizes(graph: &TilingGraph) -> Vec<usize> {
    let mut counts = vec![0; graph.max_ring() + 1];
    for v in 0..graph.n_vertices() {
        counts[graph.ring_of(v)] += 1;
    }
    counts
}

/// `ring,count` CSV with a header line.
pub fn ring_sizes_csv(graph: &TilingGraph) -> String {
    let mut out = String::from("ring,count\n");
    for (d, c) in ring_sizes(graph).iter().enumerate() {
        out.push_str(&format!("{d},{c}\n"));
    }
    out
}

/// A full-degree vertex and its neighbours, relabelled hub `0`, leaves
/// `1..=q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarCut {
    pub q: usize,
    pub hub: usize,
    pub neighbors: Vec<usize>,
}

pub fn unit_star(graph: &TilingGraph, center: usize) -> Result<StarCut> {
    if center >= graph.n_vertices() {
        return Err(QetError::InvalidParameter(format!("no vertex {center}")));
    }
    let q = graph.spec.q;
    // Outer-ring vertices always lack edges, so full degree means interior.
    if graph.degree(center) != q {
        return Err(QetError::BoundaryVertex(center));
    }
    Ok(StarCut {
        q,
        hub: center,
        neighbors: graph.neighbors(center).collect(),
    })
}

/// One `u v` line per edge, `u < v`, sorted.
pub fn export_edges(graph: &TilingGraph) -> String {
    let mut out = String::new();
    for (u, v) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => Ok((u, v)),
                _ => Err(QetError::Parse(format!("bad edge line {line:?}"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(q: usize, depth: usize) -> TilingGraph {
        generate(TilingSpec::new(3, q, depth).unwrap()).unwrap()
    }

    #[test]
    fn classification() {
        assert_eq!(classify(3, 6).unwrap(), Curvature::Euclidean);
        assert_eq!(classify(3, 7).unwrap(), Curvature::Hyperbolic);
        assert_eq!(classify(3, 5).unwrap(), Curvature::Spherical);
        assert_eq!(classify(4, 4).unwrap(), Curvature::Euclidean);
        assert!(classify(2, 7).is_err());
    }

    #[test]
    fn unit_cells() {
        let g = gen(6, 1);
        assert_eq!((g.n_vertices(), g.n_edges()), (7, 12));
        let g = gen(7, 1);
        assert_eq!((g.n_vertices(), g.n_edges()), (8, 14));
        assert_eq!(ring_sizes(&gen(7, 0)), vec![1]);
    }

    #[test]
    fn platonic_closures() {
        // tetrahedron, octahedron, icosahedron
        assert_eq!((gen(3, 5).n_vertices(), gen(3, 5).n_edges()), (4, 6));
        assert_eq!((gen(4, 5).n_vertices(), gen(4, 5).n_edges()), (6, 12));
        assert_eq!((gen(5, 5).n_vertices(), gen(5, 5).n_edges()), (12, 30));
        for q in 3..6 {
            let g = gen(q, 5);
            assert!((0..g.n_vertices()).all(|v| g.degree(v) == q));
        }
    }

    #[test]
    fn only_triangles() {
        assert!(TilingSpec::new(4, 5, 2).is_err());
    }

    #[test]
    fn stars() {
        let g = gen(10, 2);
        let star = unit_star(&g, 0).unwrap();
        assert_eq!(star.q, 10);
        assert_eq!(star.neighbors.len(), 10);
        let last = g.n_vertices() - 1;
        assert_eq!(unit_star(&g, last), Err(QetError::BoundaryVertex(last)));
        assert_eq!(unit_star(&gen(6, 1), 0).unwrap().q, 6);
    }

    #[test]
    fn edge_export() {
        let g = gen(6, 1);
        let text = export_edges(&g);
        assert_eq!(text.lines().count(), 12);
        assert_eq!(text, export_edges(&gen(6, 1)));
        let back = TilingGraph::from_edges(g.spec, &parse_edges(&text).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(parse_edges("1 x").is_err());
    }
}
