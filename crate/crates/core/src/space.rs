//! Finite metric spaces as weighted graphs with exact shortest-path
//! distances, deterministic geodesics, and arclength-parametrized curves.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Index of a vertex inside its owning [`MetricSpace`].
///
/// Ordering follows construction order (the order of the vertex list the
/// space was built from), which is what every deterministic tie-break in
/// the toolkit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

/// Dense symmetric matrix of shortest-path lengths.
#[derive(Debug, Clone)]
pub struct DistMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistMatrix {
    #[inline]
    pub fn get(&self, u: VertexId, v: VertexId) -> f64 {
        self.data[u.0 * self.n + v.0]
    }

    #[inline]
    pub fn row(&self, u: VertexId) -> &[f64] {
        &self.data[u.0 * self.n..(u.0 + 1) * self.n]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(0.0, f64::max)
    }
}

/// Description of a graph to build: named vertices with optional model
/// coordinates, and positive-length edges.
#[derive(Debug, Clone, Default)]
pub struct GraphSpec {
    pub vertices: Vec<(String, Option<[f64; 2]>)>,
    pub edges: Vec<(String, String, f64)>,
}

impl GraphSpec {
    pub fn vertex(&mut self, id: impl Into<String>, coords: Option<[f64; 2]>) {
        self.vertices.push((id.into(), coords));
    }

    pub fn edge(&mut self, u: impl Into<String>, v: impl Into<String>, len: f64) {
        self.edges.push((u.into(), v.into(), len));
    }
}

/// A finite weighted graph together with its exact path metric.
///
/// Immutable after construction; all queries are pure reads and safe to
/// share across threads.
#[derive(Debug, Clone)]
pub struct MetricSpace {
    names: Vec<String>,
    index: HashMap<String, usize>,
    coords: Vec<Option<[f64; 2]>>,
    edges: Vec<Edge>,
    /// Per vertex: (neighbor, edge id), sorted by neighbor index.
    adj: Vec<Vec<(usize, usize)>>,
    dist: DistMatrix,
}

/// Builds the space and its all-pairs distance matrix.
///
/// Distances are exact shortest-path sums in f64; the matrix is
/// symmetrized by mirroring the upper triangle so `dist(u,v) == dist(v,u)`
/// bit-for-bit. Rejects non-positive edge lengths (naming the edge) and
/// disconnected graphs (naming a vertex pair with no path).
pub fn build_space(spec: &GraphSpec) -> Result<MetricSpace> {
    if spec.vertices.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut names = Vec::with_capacity(spec.vertices.len());
    let mut coords = Vec::with_capacity(spec.vertices.len());
    let mut index = HashMap::with_capacity(spec.vertices.len());
    for (name, c) in &spec.vertices {
        if index.insert(name.clone(), names.len()).is_some() {
            return Err(Error::DuplicateVertex { id: name.clone() });
        }
        names.push(name.clone());
        coords.push(*c);
    }

    let mut edges = Vec::with_capacity(spec.edges.len());
    let mut adj = vec![Vec::new(); names.len()];
    for (u, v, len) in &spec.edges {
        let ui = *index.get(u).ok_or_else(|| Error::UnknownVertex { name: u.clone() })?;
        let vi = *index.get(v).ok_or_else(|| Error::UnknownVertex { name: v.clone() })?;
        if ui == vi {
            return Err(Error::SelfLoop { v: u.clone() });
        }
        if !(*len > 0.0) {
            return Err(Error::NonPositiveEdge {
                u: u.clone(),
                v: v.clone(),
                len: *len,
            });
        }
        let e = edges.len();
        edges.push(Edge { u: ui, v: vi, len: *len });
        adj[ui].push((vi, e));
        adj[vi].push((ui, e));
    }
    for a in &mut adj {
        a.sort_unstable();
    }

    let n = names.len();
    let weights: Vec<f64> = edges.iter().map(|e| e.len).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| dijkstra(&adj, &edges, &weights, s))
        .collect();

    let mut data = vec![0.0; n * n];
    for (s, row) in rows.iter().enumerate() {
        data[s * n..(s + 1) * n].copy_from_slice(row);
    }
    // Mirror the upper triangle: summation order along a reversed path can
    // differ in the last ulp.
    for i in 0..n {
        for j in (i + 1)..n {
            let d = data[i * n + j];
            if d.is_infinite() {
                return Err(Error::Disconnected {
                    u: names[i].clone(),
                    v: names[j].clone(),
                });
            }
            data[j * n + i] = d;
        }
    }

    Ok(MetricSpace {
        names,
        index,
        coords,
        edges,
        adj,
        dist: DistMatrix { n, data },
    })
}

/// Binary-heap Dijkstra from one source over the given edge weights.
/// Heap keys are the raw bits of the (nonnegative) distances, which
/// order identically to the floats and compare cheaply.
pub(crate) fn dijkstra(
    adj: &[Vec<(usize, usize)>],
    edges: &[Edge],
    weights: &[f64],
    source: usize,
) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((0, source as u32)));
    while let Some(Reverse((dbits, u))) = heap.pop() {
        let u = u as usize;
        let d = f64::from_bits(dbits);
        if d > dist[u] {
            continue;
        }
        for &(v, e) in &adj[u] {
            debug_assert!(edges[e].u == u || edges[e].v == u);
            let nd = d + weights[e];
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd.to_bits(), v as u32)));
            }
        }
    }
    dist
}

impl MetricSpace {
    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.names.len()).map(VertexId)
    }

    /// Looks a vertex up by its external id.
    pub fn vertex(&self, name: &str) -> Result<VertexId> {
        self.index
            .get(name)
            .map(|&i| VertexId(i))
            .ok_or_else(|| Error::UnknownVertex { name: name.into() })
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn coords(&self, v: VertexId) -> Option<[f64; 2]> {
        self.coords[v.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        self.adj[v.0].iter().map(|&(w, e)| (VertexId(w), e))
    }

    #[inline]
    pub fn dist(&self, u: VertexId, v: VertexId) -> f64 {
        self.dist.get(u, v)
    }

    pub fn dist_matrix(&self) -> &DistMatrix {
        &self.dist
    }

    pub fn max_edge_len(&self) -> f64 {
        self.edges.iter().map(|e| e.len).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        self.dist.max()
    }

    /// Runs Dijkstra with caller-supplied per-edge weights (one per edge,
    /// aligned with [`MetricSpace::edges`]). Used by the conformal
    /// deformation, which rescales edges but keeps the topology.
    pub fn sssp_with_weights(&self, source: VertexId, weights: &[f64]) -> Vec<f64> {
        dijkstra(&self.adj, &self.edges, weights, source.0)
    }

    /// All-pairs shortest paths over caller-supplied edge weights,
    /// parallel over sources, mirrored like the base matrix.
    pub fn apsp_with_weights(&self, weights: &[f64]) -> DistMatrix {
        let n = self.names.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|s| dijkstra(&self.adj, &self.edges, weights, s))
            .collect();
        let mut data = vec![0.0; n * n];
        for (s, row) in rows.iter().enumerate() {
            data[s * n..(s + 1) * n].copy_from_slice(row);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                data[j * n + i] = data[i * n + j];
            }
        }
        DistMatrix { n, data }
    }

    /// A copy with every edge length and distance entry multiplied by
    /// `kappa`. Shortest paths keep their structure under uniform
    /// scaling, so the matrix is scaled in place; for power-of-two
    /// factors this is bit-exact against re-running the search.
    pub fn scaled(&self, kappa: f64) -> MetricSpace {
        let mut out = self.clone();
        for e in &mut out.edges {
            e.len *= kappa;
        }
        for d in &mut out.dist.data {
            *d *= kappa;
        }
        out
    }

    /// Multi-source Dijkstra with per-source starting offsets; returns for
    /// every vertex `min over sources s of (offset[s] + dist_w(s, x))`.
    pub fn multi_source_with_offsets(
        &self,
        sources: &[(VertexId, f64)],
        weights: &[f64],
    ) -> Vec<f64> {
        let n = self.names.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::new();
        for &(s, off) in sources {
            if off < dist[s.0] {
                dist[s.0] = off;
                heap.push(Reverse((off.to_bits(), s.0 as u32)));
            }
        }
        while let Some(Reverse((dbits, u))) = heap.pop() {
            let u = u as usize;
            let d = f64::from_bits(dbits);
            if d > dist[u] {
                continue;
            }
            for &(v, e) in &self.adj[u] {
                let nd = d + weights[e];
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((nd.to_bits(), v as u32)));
                }
            }
        }
        dist
    }

    /// Shortest curve joining `u` to `v` in the base metric.
    ///
    /// Ties between equally short paths break to the lexicographically
    /// smallest vertex path (vertex order = construction order).
    pub fn geodesic(&self, u: VertexId, v: VertexId) -> Curve {
        self.geodesic_with(u, v, None)
    }

    /// Same as [`MetricSpace::geodesic`] but over alternative edge weights
    /// (plus the matching all-pairs matrix for those weights).
    pub fn geodesic_deformed(
        &self,
        u: VertexId,
        v: VertexId,
        weights: &[f64],
        dist: &DistMatrix,
    ) -> Curve {
        self.geodesic_with(u, v, Some((weights, dist)))
    }

    fn geodesic_with(
        &self,
        u: VertexId,
        v: VertexId,
        deformed: Option<(&[f64], &DistMatrix)>,
    ) -> Curve {
        let weight = |e: usize| match deformed {
            Some((w, _)) => w[e],
            None => self.edges[e].len,
        };
        let dist: &DistMatrix = match deformed {
            Some((_, d)) => d,
            None => &self.dist,
        };
        let target = dist.get(u, v);
        let tol = 1e-9 * (1.0 + target);
        let mut path = vec![u];
        let mut edge_ids = Vec::new();
        let mut acc = 0.0;
        let mut cur = u;
        let mut guard = 0usize;
        while cur != v {
            // Greedy forward walk on the shortest-path DAG: among neighbors
            // that keep the total tight, take the smallest index. This
            // yields the lexicographically smallest shortest vertex path.
            let mut best: Option<(usize, usize)> = None;
            let mut fallback: (f64, usize, usize) = (f64::INFINITY, usize::MAX, usize::MAX);
            for &(w, e) in &self.adj[cur.0] {
                let through = acc + weight(e) + dist.get(VertexId(w), v);
                if through <= target + tol {
                    let better = match best {
                        None => true,
                        Some((bw, be)) => (w, weight(e), e) < (bw, weight(be), be),
                    };
                    if better {
                        best = Some((w, e));
                    }
                }
                if (through, w, e) < fallback {
                    fallback = (through, w, e);
                }
            }
            // The fallback only fires if float drift pushed every candidate
            // past the tolerance; it stays on a near-shortest path.
            let (w, e) = best.unwrap_or((fallback.1, fallback.2));
            acc += weight(e);
            edge_ids.push(e);
            path.push(VertexId(w));
            cur = VertexId(w);
            guard += 1;
            assert!(
                guard <= self.names.len() * 2,
                "geodesic reconstruction did not terminate"
            );
        }
        Curve::from_steps_fn(path, edge_ids, weight)
    }
}

/// How a scan chooses vertex pairs.
#[derive(Debug, Clone)]
pub enum PairSampler {
    /// Every unordered pair of distinct vertices.
    All,
    /// `count` seeded uniform draws of distinct pairs.
    Seeded { count: usize, seed: u64 },
    /// A caller-supplied pair list (used verbatim).
    Explicit(Vec<(VertexId, VertexId)>),
}

pub fn sample_pairs(space: &MetricSpace, sampler: &PairSampler) -> Vec<(VertexId, VertexId)> {
    let n = space.vertex_count();
    match sampler {
        PairSampler::All => {
            let mut out = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in (i + 1)..n {
                    out.push((VertexId(i), VertexId(j)));
                }
            }
            out
        }
        PairSampler::Seeded { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = Vec::with_capacity(*count);
            while out.len() < *count {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b {
                    out.push((VertexId(a), VertexId(b)));
                }
            }
            out
        }
        PairSampler::Explicit(pairs) => pairs.clone(),
    }
}

/// Exhaustive triangle-inequality check; returns the worst violation if
/// any triple exceeds the tolerance `1e-9 * (1 + max dist)`.
pub fn worst_triangle_violation(space: &MetricSpace) -> Option<(VertexId, VertexId, VertexId, f64)> {
    let n = space.vertex_count();
    let scale = space.dist.max();
    let tol = 1e-9 * (1.0 + scale);
    let mut worst: Option<(VertexId, VertexId, VertexId, f64)> = None;
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                let excess = space.dist.data[u * n + w]
                    - (space.dist.data[u * n + v] + space.dist.data[v * n + w]);
                if excess > tol && excess > worst.map_or(f64::NEG_INFINITY, |t| t.3) {
                    worst = Some((VertexId(u), VertexId(v), VertexId(w), excess));
                }
            }
        }
    }
    worst
}

/// A vertex path with strictly increasing arclength prefix sums.
///
/// Consecutive vertices are joined by an existing edge of the owning
/// space; `cum_length[0] = 0` and the last entry is the total length in
/// whatever weights the curve was built with.
#[derive(Debug, Clone)]
pub struct Curve {
    vertices: Vec<VertexId>,
    edge_ids: Vec<usize>,
    cum: Vec<f64>,
}

impl Curve {
    /// Builds a curve from an explicit vertex path, resolving each step to
    /// the shortest edge joining the pair (smallest edge id on ties).
    pub fn from_vertex_path(space: &MetricSpace, path: Vec<VertexId>) -> Result<Curve> {
        assert!(!path.is_empty(), "curve needs at least one vertex");
        let mut edge_ids = Vec::with_capacity(path.len().saturating_sub(1));
        for pair in path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mut best: Option<usize> = None;
            for &(w, e) in &space.adj[a.0] {
                if w == b.0 {
                    let better = match best {
                        None => true,
                        Some(be) => {
                            (space.edges[e].len, e) < (space.edges[be].len, be)
                        }
                    };
                    if better {
                        best = Some(e);
                    }
                }
            }
            let e = best.ok_or_else(|| Error::NotAdjacent {
                u: space.name(a).into(),
                v: space.name(b).into(),
            })?;
            edge_ids.push(e);
        }
        let weights: Vec<f64> = space.edges.iter().map(|e| e.len).collect();
        Ok(Curve::from_steps(path, edge_ids, &weights))
    }

    fn from_steps(vertices: Vec<VertexId>, edge_ids: Vec<usize>, weights: &[f64]) -> Curve {
        Curve::from_steps_fn(vertices, edge_ids, |e| weights[e])
    }

    fn from_steps_fn(
        vertices: Vec<VertexId>,
        edge_ids: Vec<usize>,
        weight: impl Fn(usize) -> f64,
    ) -> Curve {
        let mut cum = Vec::with_capacity(vertices.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for &e in &edge_ids {
            acc += weight(e);
            cum.push(acc);
        }
        Curve {
            vertices,
            edge_ids,
            cum,
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_ids
    }

    pub fn cum_length(&self) -> &[f64] {
        &self.cum
    }

    pub fn total_length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }

    /// Length of the same vertex path measured in other edge weights.
    pub fn length_in(&self, weights: &[f64]) -> f64 {
        self.edge_ids.iter().map(|&e| weights[e]).sum()
    }

    /// Prefix sums of the path in other edge weights (same shape as
    /// `cum_length`).
    pub fn cum_in(&self, weights: &[f64]) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.vertices.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for &e in &self.edge_ids {
            acc += weights[e];
            cum.push(acc);
        }
        cum
    }

    /// Joins two curves sharing an endpoint vertex.
    pub fn concat(&self, other: &Curve, weights: &[f64]) -> Result<Curve> {
        if self.end() != other.start() {
            return Err(Error::DisjointCurves);
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        let mut edge_ids = self.edge_ids.clone();
        edge_ids.extend_from_slice(&other.edge_ids);
        Ok(Curve::from_steps(vertices, edge_ids, weights))
    }

    /// Truncates the curve at the first vertex satisfying `stop`; returns
    /// the prefix (at least the first vertex).
    pub fn take_until(&self, weights: &[f64], stop: impl Fn(VertexId) -> bool) -> Curve {
        let mut cut = self.vertices.len() - 1;
        for (i, &v) in self.vertices.iter().enumerate() {
            if stop(v) {
                cut = i;
                break;
            }
        }
        Curve::from_steps(
            self.vertices[..=cut].to_vec(),
            self.edge_ids[..cut].to_vec(),
            weights,
        )
    }

    pub fn reversed(&self, weights: &[f64]) -> Curve {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut edge_ids = self.edge_ids.clone();
        edge_ids.reverse();
        Curve::from_steps(vertices, edge_ids, weights)
    }
}

/// Samples the curve at arclengths `i*q` for `0 <= i <= floor(L/q)`, each
/// snapped to the nearest vertex along the curve by arclength; the final
/// endpoint is appended when `floor(L/q)*q` falls short of it. Reported
/// arclength is the snapped vertex's prefix sum.
pub fn sample_along(curve: &Curve, q: f64) -> Vec<(VertexId, f64)> {
    assert!(q > 0.0, "sampling step must be positive");
    let total = curve.total_length();
    // Guard against L/q = N computing as N - ulp when q = L/N.
    let steps = ((total / q) * (1.0 + 1e-12) + 1e-12).floor() as usize;
    let mut out = Vec::with_capacity(steps + 2);
    for i in 0..=steps {
        let target = i as f64 * q;
        out.push(snap(curve, target));
    }
    let end = (curve.end(), total);
    if out.last().map(|&(v, s)| (v, s)) != Some(end) {
        out.push(end);
    }
    out
}

fn snap(curve: &Curve, target: f64) -> (VertexId, f64) {
    let cum = &curve.cum;
    let k = match cum.binary_search_by(|c| c.total_cmp(&target)) {
        Ok(k) => k,
        Err(k) => {
            if k == 0 {
                0
            } else if k >= cum.len() {
                cum.len() - 1
            } else {
                // Nearest of the two bracketing vertices; ties go down.
                if target - cum[k - 1] <= cum[k] - target {
                    k - 1
                } else {
                    k
                }
            }
        }
    };
    (curve.vertices[k], cum[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_a_o_b() -> MetricSpace {
        let mut spec = GraphSpec::default();
        spec.vertex("a", None);
        spec.vertex("o", None);
        spec.vertex("b", None);
        spec.edge("a", "o", 2.0);
        spec.edge("o", "b", 2.0);
        build_space(&spec).unwrap()
    }

    #[test]
    fn path_metric() {
        let s = path_a_o_b();
        let (a, b) = (s.vertex("a").unwrap(), s.vertex("b").unwrap());
        assert_eq!(s.dist(a, b), 4.0);
    }

    #[test]
    fn single_vertex_degenerate() {
        let mut spec = GraphSpec::default();
        spec.vertex("only", None);
        let s = build_space(&spec).unwrap();
        let v = s.vertex("only").unwrap();
        assert_eq!(s.dist(v, v), 0.0);
        assert_eq!(s.vertex_count(), 1);
    }

    #[test]
    fn rejects_disconnected() {
        let mut spec = GraphSpec::default();
        spec.vertex("a", None);
        spec.vertex("b", None);
        let err = build_space(&spec).unwrap_err();
        assert!(matches!(err, Error::Disconnected { .. }), "{err}");
    }

    #[test]
    fn rejects_nonpositive_edge() {
        let mut spec = GraphSpec::default();
        spec.vertex("a", None);
        spec.vertex("b", None);
        spec.edge("a", "b", 0.0);
        let err = build_space(&spec).unwrap_err();
        match err {
            Error::NonPositiveEdge { u, v, len } => {
                assert_eq!((u.as_str(), v.as_str(), len), ("a", "b", 0.0));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn geodesic_trivial_and_unique() {
        let s = path_a_o_b();
        let (a, b) = (s.vertex("a").unwrap(), s.vertex("b").unwrap());
        let g = s.geodesic(a, a);
        assert_eq!(g.vertices(), &[a]);
        assert_eq!(g.total_length(), 0.0);
        let g = s.geodesic(a, b);
        let names: Vec<_> = g.vertices().iter().map(|&v| s.name(v)).collect();
        assert_eq!(names, ["a", "o", "b"]);
        assert_eq!(g.total_length(), s.dist(a, b));
    }

    #[test]
    fn four_cycle_geodesic_lex_tie() {
        // Unit 4-cycle 0-1-2-3-0: both 0->1->2 and 0->3->2 have length 2;
        // lexicographic tie-break must pick [0, 1, 2].
        let mut spec = GraphSpec::default();
        for v in ["0", "1", "2", "3"] {
            spec.vertex(v, None);
        }
        spec.edge("0", "1", 1.0);
        spec.edge("1", "2", 1.0);
        spec.edge("2", "3", 1.0);
        spec.edge("3", "0", 1.0);
        let s = build_space(&spec).unwrap();
        let g = s.geodesic(s.vertex("0").unwrap(), s.vertex("2").unwrap());
        let names: Vec<_> = g.vertices().iter().map(|&v| s.name(v)).collect();
        assert_eq!(names, ["0", "1", "2"]);
    }

    #[test]
    fn sample_unit_path() {
        // Length-4 unit-edge path sampled at q=1: the five path vertices.
        let mut spec = GraphSpec::default();
        for i in 0..5 {
            spec.vertex(format!("v{i}"), None);
        }
        for i in 0..4 {
            spec.edge(format!("v{i}"), format!("v{}", i + 1), 1.0);
        }
        let s = build_space(&spec).unwrap();
        let g = s.geodesic(s.vertex("v0").unwrap(), s.vertex("v4").unwrap());
        let samples = sample_along(&g, 1.0);
        assert_eq!(samples.len(), 5);
        for (i, &(v, len)) in samples.iter().enumerate() {
            assert_eq!(s.name(v), format!("v{i}"));
            assert_eq!(len, i as f64);
        }
        // q > L: endpoints only.
        let samples = sample_along(&g, 10.0);
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].0, g.start());
        assert_eq!(samples[1].0, g.end());
    }

    #[test]
    fn sample_fractional_curve() {
        // Length 3.5 over edges 1,1,1,0.5; q = 3.5/3 gives 4 samples with
        // snap displacement at most half the local edge length.
        let mut spec = GraphSpec::default();
        for i in 0..5 {
            spec.vertex(format!("v{i}"), None);
        }
        spec.edge("v0", "v1", 1.0);
        spec.edge("v1", "v2", 1.0);
        spec.edge("v2", "v3", 1.0);
        spec.edge("v3", "v4", 0.5);
        let s = build_space(&spec).unwrap();
        let g = s.geodesic(s.vertex("v0").unwrap(), s.vertex("v4").unwrap());
        let q = 3.5 / 3.0;
        let samples = sample_along(&g, q);
        assert_eq!(samples.len(), 4);
        for (i, &(_, at)) in samples.iter().enumerate() {
            let target = (i as f64 * q).min(3.5);
            assert!((at - target).abs() <= 0.5 + 1e-12);
        }
        assert_eq!(samples.last().unwrap().1, 3.5);
    }

    #[test]
    fn triangle_inequality_exhaustive_small() {
        let s = path_a_o_b();
        assert!(worst_triangle_violation(&s).is_none());
    }
}
