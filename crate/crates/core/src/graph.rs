//! Weighted digraphs in compressed sparse row form, and cycles on them.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::sum::compensated_sum;

/// Default vertex-count guard for brute-force cycle enumeration.
pub const DEFAULT_ENUMERATION_GUARD: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    NoVertices,
    VertexOutOfRange { vertex: usize, n: usize },
    SelfLoop { vertex: usize },
    DuplicateArc { tail: usize, head: usize },
    InvalidWeight { tail: usize, head: usize, weight: f64 },
    MissingArc { tail: usize, head: usize },
    RepeatedVertex { vertex: usize },
    CycleTooShort { len: usize },
    TooLargeToEnumerate { n: usize, max_n: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoVertices => write!(f, "graph must have at least one vertex"),
            Self::VertexOutOfRange { vertex, n } => {
                write!(f, "vertex {vertex} out of range for n = {n}")
            }
            Self::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            Self::DuplicateArc { tail, head } => write!(f, "duplicate arc {tail} -> {head}"),
            Self::InvalidWeight { tail, head, weight } => {
                write!(f, "arc {tail} -> {head} has invalid weight {weight}")
            }
            Self::MissingArc { tail, head } => write!(f, "no arc {tail} -> {head}"),
            Self::RepeatedVertex { vertex } => write!(f, "vertex {vertex} repeated in cycle"),
            Self::CycleTooShort { len } => write!(f, "cycle needs at least 2 vertices, got {len}"),
            Self::TooLargeToEnumerate { n, max_n } => {
                write!(f, "refusing to enumerate cycles of a {n}-vertex graph (guard {max_n})")
            }
        }
    }
}

impl core::error::Error for GraphError {}

/// How the arcs of a graph were produced. Only affects serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Directed,
    /// Every edge was expanded to two opposing arcs of equal weight.
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: u32,
    pub head: u32,
    pub weight: f64,
}

impl Arc {
    pub fn new(tail: u32, head: u32, weight: f64) -> Self {
        Self { tail, head, weight }
    }
}

/// Directed graph with nonnegative arc weights.
///
/// Out-arcs of each vertex are stored contiguously, in the order they were
/// supplied. No self-loops, no parallel arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    offsets: Vec<usize>,
    heads: Vec<u32>,
    weights: Vec<f64>,
    heads_sorted: bool,
    orientation: Orientation,
}

impl WeightedDigraph {
    /// Build from an arc list, validating every invariant.
    pub fn from_arcs<I>(n: usize, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = Arc>,
    {
        let arcs: Vec<Arc> = arcs.into_iter().collect();
        Self::build(n, &arcs, Orientation::Directed)
    }

    /// Build from undirected edges; each becomes two opposing arcs.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = Arc>,
    {
        let mut arcs = Vec::new();
        for e in edges {
            arcs.push(e);
            arcs.push(Arc::new(e.head, e.tail, e.weight));
        }
        Self::build(n, &arcs, Orientation::Undirected)
    }

    fn build(n: usize, arcs: &[Arc], orientation: Orientation) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut offsets = vec![0usize; n + 1];
        for a in arcs {
            let (t, h) = (a.tail as usize, a.head as usize);
            for v in [t, h] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            if t == h {
                return Err(GraphError::SelfLoop { vertex: t });
            }
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err(GraphError::InvalidWeight { tail: t, head: h, weight: a.weight });
            }
            offsets[t + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut heads = vec![0u32; arcs.len()];
        let mut weights = vec![0.0f64; arcs.len()];
        for a in arcs {
            let slot = &mut fill[a.tail as usize];
            heads[*slot] = a.head;
            weights[*slot] = a.weight;
            *slot += 1;
        }
        // Stamp pass: stamp[h] == t + 1 means t -> h was already seen.
        let mut stamp = vec![0usize; n];
        for t in 0..n {
            for &h in &heads[offsets[t]..offsets[t + 1]] {
                if stamp[h as usize] == t + 1 {
                    return Err(GraphError::DuplicateArc { tail: t, head: h as usize });
                }
                stamp[h as usize] = t + 1;
            }
        }
        Ok(Self::from_csr(n, offsets, heads, weights, orientation))
    }

    fn from_csr(
        n: usize,
        offsets: Vec<usize>,
        heads: Vec<u32>,
        weights: Vec<f64>,
        orientation: Orientation,
    ) -> Self {
        let heads_sorted =
            (0..n).all(|t| heads[offsets[t]..offsets[t + 1]].windows(2).all(|w| w[0] < w[1]));
        Self { n, offsets, heads, weights, heads_sorted, orientation }
    }

    /// Complete digraph on `n` vertices; `weight(tail, head)` is called once
    /// per arc in row-major order (tails ascending, heads ascending).
    pub fn complete_directed(n: usize, mut weight: impl FnMut(u32, u32) -> f64) -> Self {
        let m = n * n.saturating_sub(1);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut heads = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        offsets.push(0);
        for t in 0..n as u32 {
            for h in 0..n as u32 {
                if h != t {
                    heads.push(h);
                    weights.push(weight(t, h));
                }
            }
            offsets.push(heads.len());
        }
        Self::from_csr(n, offsets, heads, weights, Orientation::Directed)
    }

    /// Complete undirected graph; `weight(i, j)` is called once per edge
    /// `i < j` in row-major order and shared by both arcs.
    pub fn complete_undirected(n: usize, mut weight: impl FnMut(u32, u32) -> f64) -> Self {
        let mut table = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = weight(i as u32, j as u32);
                table[i * n + j] = w;
                table[j * n + i] = w;
            }
        }
        let mut g = Self::complete_directed(n, |t, h| table[t as usize * n + h as usize]);
        g.orientation = Orientation::Undirected;
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.heads.len()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    #[inline]
    pub fn out_heads(&self, v: usize) -> &[u32] {
        &self.heads[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn out_weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn out_arcs(&self, v: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.out_heads(v).iter().copied().zip(self.out_weights(v).iter().copied())
    }

    /// All arcs, tails ascending and in input order within a tail.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        (0..self.n).flat_map(move |t| {
            self.out_arcs(t).map(move |(h, w)| Arc::new(t as u32, h, w))
        })
    }

    /// Weight of arc `tail -> head`, if present.
    pub fn weight(&self, tail: usize, head: usize) -> Option<f64> {
        if tail >= self.n {
            return None;
        }
        let heads = self.out_heads(tail);
        let pos = if self.heads_sorted {
            heads.binary_search(&(head as u32)).ok()
        } else {
            heads.iter().position(|&h| h as usize == head)
        }?;
        Some(self.out_weights(tail)[pos])
    }

    /// Same graph with every weight mapped through `f`.
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut g = self.clone();
        for w in &mut g.weights {
            *w = f(*w);
        }
        g
    }
}

/// A directed simple cycle together with its traversed arc weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    /// Distinct vertices, rotated so the smallest id comes first.
    pub vertices: Vec<u32>,
    /// `weights[i]` is the weight of the arc leaving `vertices[i]`.
    pub weights: Vec<f64>,
    pub total_weight: f64,
    /// Mean weight scaled by the host graph's vertex count.
    pub cbar: f64,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.total_weight / self.len() as f64
    }

    fn from_parts(n: usize, vertices: Vec<u32>, weights: Vec<f64>) -> Self {
        let total_weight = compensated_sum(weights.iter().copied());
        let cbar = n as f64 * total_weight / vertices.len() as f64;
        Self { vertices, weights, total_weight, cbar }
    }
}

/// Build a cycle through `vs` (closing arc from the last vertex back to the first).
pub fn cycle_from_vertices(g: &WeightedDigraph, vs: &[u32]) -> Result<Cycle, GraphError> {
    let k = vs.len();
    if k < 2 {
        return Err(GraphError::CycleTooShort { len: k });
    }
    let mut seen = vec![false; g.n()];
    for &v in vs {
        let v = v as usize;
        if v >= g.n() {
            return Err(GraphError::VertexOutOfRange { vertex: v, n: g.n() });
        }
        if seen[v] {
            return Err(GraphError::RepeatedVertex { vertex: v });
        }
        seen[v] = true;
    }
    let start = (0..k).min_by_key(|&i| vs[i]).unwrap_or(0);
    let vertices: Vec<u32> = (0..k).map(|i| vs[(start + i) % k]).collect();
    let mut weights = Vec::with_capacity(k);
    for i in 0..k {
        let (t, h) = (vertices[i] as usize, vertices[(i + 1) % k] as usize);
        weights.push(g.weight(t, h).ok_or(GraphError::MissingArc { tail: t, head: h })?);
    }
    Ok(Cycle::from_parts(g.n(), vertices, weights))
}

/// Call `visit(vertices, weights)` once per directed simple cycle.
///
/// Each cycle is reported in canonical rotation (smallest vertex first).
/// Refuses graphs with more than `max_n` vertices.
pub fn for_each_simple_cycle<F>(g: &WeightedDigraph, max_n: usize, mut visit: F) -> Result<(), GraphError>
where
    F: FnMut(&[u32], &[f64]),
{
    let n = g.n();
    if n > max_n {
        return Err(GraphError::TooLargeToEnumerate { n, max_n });
    }
    let mut on_path = vec![false; n];
    let mut path: Vec<u32> = Vec::with_capacity(n);
    let mut path_w: Vec<f64> = Vec::with_capacity(n);
    // Stack of (vertex, next out-arc position).
    let mut stack: Vec<(usize, usize)> = Vec::with_capacity(n);
    for s in 0..n {
        path.push(s as u32);
        on_path[s] = true;
        stack.push((s, 0));
        while let Some(top) = stack.last_mut() {
            let (u, pos) = *top;
            let heads = g.out_heads(u);
            if pos == heads.len() {
                stack.pop();
                on_path[u] = false;
                path.pop();
                path_w.pop();
                continue;
            }
            top.1 += 1;
            let v = heads[pos] as usize;
            let w = g.out_weights(u)[pos];
            if v == s {
                if path.len() >= 2 {
                    path_w.push(w);
                    visit(&path, &path_w);
                    path_w.pop();
                }
            } else if v > s && !on_path[v] {
                on_path[v] = true;
                path.push(v as u32);
                path_w.push(w);
                stack.push((v, 0));
            }
        }
    }
    Ok(())
}

/// Every directed simple cycle, each exactly once, in canonical rotation.
pub fn enumerate_simple_cycles(g: &WeightedDigraph, max_n: usize) -> Result<Vec<Cycle>, GraphError> {
    let mut out = Vec::new();
    for_each_simple_cycle(g, max_n, |vs, ws| {
        out.push(Cycle::from_parts(g.n(), vs.to_vec(), ws.to_vec()));
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn falling(n: usize, k: usize) -> usize {
        (0..k).map(|i| n - i).product()
    }

    #[test]
    fn two_cycle_arithmetic() {
        let g = WeightedDigraph::from_arcs(2, [Arc::new(0, 1, 1.0), Arc::new(1, 0, 3.0)]).unwrap();
        let c = cycle_from_vertices(&g, &[1, 0]).unwrap();
        assert_eq!(c.vertices, [0, 1]);
        assert_eq!(c.len(), 2);
        assert_eq!(c.total_weight, 4.0);
        assert_eq!(c.cbar, 4.0);
    }

    #[test]
    fn zero_weights_give_zero_cbar() {
        let g = WeightedDigraph::complete_directed(4, |_, _| 0.0);
        assert_eq!(cycle_from_vertices(&g, &[2, 0, 3]).unwrap().cbar, 0.0);
    }

    #[test]
    fn rejects_bad_arcs() {
        assert_eq!(
            WeightedDigraph::from_arcs(3, [Arc::new(0, 0, 1.0)]),
            Err(GraphError::SelfLoop { vertex: 0 })
        );
        assert_eq!(
            WeightedDigraph::from_arcs(3, [Arc::new(0, 1, 1.0), Arc::new(0, 1, 2.0)]),
            Err(GraphError::DuplicateArc { tail: 0, head: 1 })
        );
        assert!(matches!(
            WeightedDigraph::from_arcs(3, [Arc::new(0, 1, -1.0)]),
            Err(GraphError::InvalidWeight { .. })
        ));
        assert!(matches!(
            WeightedDigraph::from_arcs(3, [Arc::new(0, 5, 1.0)]),
            Err(GraphError::VertexOutOfRange { vertex: 5, n: 3 })
        ));
    }

    #[test]
    fn cycle_errors() {
        let g = WeightedDigraph::from_arcs(3, [Arc::new(0, 1, 1.0), Arc::new(1, 0, 1.0)]).unwrap();
        assert_eq!(cycle_from_vertices(&g, &[0]), Err(GraphError::CycleTooShort { len: 1 }));
        assert_eq!(cycle_from_vertices(&g, &[0, 1, 0]), Err(GraphError::RepeatedVertex { vertex: 0 }));
        assert_eq!(
            cycle_from_vertices(&g, &[0, 1, 2]),
            Err(GraphError::MissingArc { tail: 1, head: 2 })
        );
    }

    #[test]
    fn out_arcs_keep_input_order() {
        let g = WeightedDigraph::from_arcs(
            3,
            [Arc::new(0, 2, 1.0), Arc::new(1, 0, 2.0), Arc::new(0, 1, 3.0)],
        )
        .unwrap();
        assert_eq!(g.out_heads(0), [2, 1]);
        assert_eq!(g.weight(0, 1), Some(3.0));
        assert_eq!(g.weight(1, 2), None);
    }

    #[test]
    fn complete_digraph_cycle_counts() {
        for n in 2..=7 {
            let g = WeightedDigraph::complete_directed(n, |_, _| 1.0);
            let expected: usize = (2..=n).map(|k| falling(n, k) / k).sum();
            let cycles = enumerate_simple_cycles(&g, 9).unwrap();
            assert_eq!(cycles.len(), expected, "n = {n}");
            for c in &cycles {
                assert_eq!(c.vertices[0], *c.vertices.iter().min().unwrap());
            }
        }
        let g3 = WeightedDigraph::complete_directed(3, |_, _| 1.0);
        assert_eq!(enumerate_simple_cycles(&g3, 9).unwrap().len(), 5);
        let g4 = WeightedDigraph::complete_directed(4, |_, _| 1.0);
        assert_eq!(enumerate_simple_cycles(&g4, 9).unwrap().len(), 20);
    }

    #[test]
    fn enumeration_guard_and_empty_graph() {
        let g = WeightedDigraph::complete_directed(10, |_, _| 1.0);
        assert!(matches!(enumerate_simple_cycles(&g, 9), Err(GraphError::TooLargeToEnumerate { .. })));
        let empty = WeightedDigraph::from_arcs(4, []).unwrap();
        assert!(enumerate_simple_cycles(&empty, 9).unwrap().is_empty());
    }

    #[test]
    fn undirected_edges_expand_symmetrically() {
        let g = WeightedDigraph::from_edges(3, [Arc::new(0, 2, 0.5)]).unwrap();
        assert_eq!(g.arc_count(), 2);
        assert_eq!(g.weight(2, 0), Some(0.5));
        assert_eq!(g.orientation(), Orientation::Undirected);
    }
}
