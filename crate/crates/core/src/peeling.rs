//! Round-synchronous parallel peeling and a sequential k-core oracle.

use serde::Serialize;

use crate::hypergraph::{EdgeId, Hypergraph, VertexId};

/// One peeling round.
///
/// `surviving_deg_ge_k_count` is taken at the *start* of the round, so the
/// fraction of high-degree vertices before the round is
/// `surviving_deg_ge_k_count / vertices_before()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    /// 1-based.
    pub index: usize,
    pub removed_vertices: Vec<VertexId>,
    pub removed_edges: Vec<EdgeId>,
    pub surviving_vertex_count: usize,
    pub surviving_edge_count: usize,
    pub surviving_deg_ge_k_count: usize,
}

impl RoundRecord {
    pub fn vertices_before(&self) -> usize {
        self.surviving_vertex_count + self.removed_vertices.len()
    }

    pub fn edges_before(&self) -> usize {
        self.surviving_edge_count + self.removed_edges.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeelingTrace {
    pub k: usize,
    pub r: usize,
    pub n: usize,
    pub m: usize,
    pub rounds: Vec<RoundRecord>,
    pub core_vertices: Vec<VertexId>,
    pub core_edges: Vec<EdgeId>,
}

impl PeelingTrace {
    /// Number of rounds that removed at least one vertex.
    pub fn s(&self) -> usize {
        self.rounds.len()
    }

    /// Alive flags of the vertices after `min(i, s)` rounds.
    pub fn alive_after(&self, i: usize) -> Vec<bool> {
        let mut alive = vec![true; self.n];
        for round in self.rounds.iter().take(i) {
            for &v in &round.removed_vertices {
                alive[v as usize] = false;
            }
        }
        alive
    }

    /// Surviving vertices and edges after `min(i, s)` rounds; `i = 0` is the
    /// whole hypergraph.
    pub fn graph_after_rounds(&self, i: usize) -> (Vec<VertexId>, Vec<EdgeId>) {
        let alive = self.alive_after(i);
        let mut edge_alive = vec![true; self.m];
        for round in self.rounds.iter().take(i) {
            for &e in &round.removed_edges {
                edge_alive[e as usize] = false;
            }
        }
        let vertices = (0..self.n as VertexId)
            .filter(|&v| alive[v as usize])
            .collect();
        let edges = (0..self.m as EdgeId)
            .filter(|&e| edge_alive[e as usize])
            .collect();
        (vertices, edges)
    }
}

/// Runs parallel peeling to the k-core.
///
/// Each round removes every vertex whose degree is below `k` at the start of
/// the round, together with all edges incident to them. Degree-0 vertices are
/// removed like any other low-degree vertex. Stops before the first round that
/// would remove nothing.
pub fn parallel_peel(h: &Hypergraph, k: usize) -> PeelingTrace {
    let n = h.n();
    let m = h.num_edges();
    let mut degree = h.degrees();
    let mut vertex_alive = vec![true; n];
    let mut edge_alive = vec![true; m];
    let mut alive_vertices = n;
    let mut alive_edges = m;

    let mut frontier: Vec<VertexId> = if k == 0 {
        Vec::new()
    } else {
        (0..n as VertexId)
            .filter(|&v| degree[v as usize] < k)
            .collect()
    };
    let mut rounds = Vec::new();

    while !frontier.is_empty() {
        let deg_ge_k = alive_vertices - frontier.len();
        for &v in &frontier {
            vertex_alive[v as usize] = false;
        }
        let mut removed_edges = Vec::new();
        let mut next = Vec::new();
        for &v in &frontier {
            for &e in h.incident(v) {
                if !edge_alive[e as usize] {
                    continue;
                }
                edge_alive[e as usize] = false;
                removed_edges.push(e);
                for &u in h.edge(e) {
                    if vertex_alive[u as usize] {
                        degree[u as usize] -= 1;
                        if degree[u as usize] == k - 1 {
                            next.push(u);
                        }
                    }
                }
            }
        }
        removed_edges.sort_unstable();
        next.sort_unstable();

        alive_vertices -= frontier.len();
        alive_edges -= removed_edges.len();
        rounds.push(RoundRecord {
            index: rounds.len() + 1,
            removed_vertices: std::mem::replace(&mut frontier, next),
            removed_edges,
            surviving_vertex_count: alive_vertices,
            surviving_edge_count: alive_edges,
            surviving_deg_ge_k_count: deg_ge_k,
        });
    }

    PeelingTrace {
        k,
        r: h.r(),
        n,
        m,
        rounds,
        core_vertices: (0..n as VertexId)
            .filter(|&v| vertex_alive[v as usize])
            .collect(),
        core_edges: (0..m as EdgeId)
            .filter(|&e| edge_alive[e as usize])
            .collect(),
    }
}

/// k-core by removing one minimum-degree vertex at a time (bucket queue).
///
/// Returns sorted core vertices and core edge indices. Independent of
/// [`parallel_peel`]; the two must always agree.
pub fn sequential_kcore(h: &Hypergraph, k: usize) -> (Vec<VertexId>, Vec<EdgeId>) {
    let n = h.n();
    let m = h.num_edges();
    let mut degree = h.degrees();
    let mut vertex_alive = vec![true; n];
    let mut edge_alive = vec![true; m];

    // buckets[d] holds vertices that had degree d < k when pushed; stale
    // entries are skipped on pop
    let mut buckets: Vec<Vec<VertexId>> = vec![Vec::new(); k];
    for v in 0..n {
        if degree[v] < k {
            buckets[degree[v]].push(v as VertexId);
        }
    }
    let mut lowest = 0usize;

    loop {
        while lowest < k && buckets[lowest].is_empty() {
            lowest += 1;
        }
        if lowest >= k {
            break;
        }
        let v = buckets[lowest].pop().unwrap() as usize;
        if !vertex_alive[v] || degree[v] != lowest {
            continue;
        }
        vertex_alive[v] = false;
        for &e in h.incident(v as VertexId) {
            if !edge_alive[e as usize] {
                continue;
            }
            edge_alive[e as usize] = false;
            for &u in h.edge(e) {
                let u = u as usize;
                if vertex_alive[u] {
                    degree[u] -= 1;
                    if degree[u] < k {
                        buckets[degree[u]].push(u as VertexId);
                        lowest = lowest.min(degree[u]);
                    }
                }
            }
        }
    }

    (
        (0..n as VertexId)
            .filter(|&v| vertex_alive[v as usize])
            .collect(),
        (0..m as EdgeId)
            .filter(|&e| edge_alive[e as usize])
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path() -> Hypergraph {
        Hypergraph::new(2, 3, [[0, 1], [1, 2]]).unwrap()
    }

    fn complete_graph(n: u32) -> Hypergraph {
        let edges: Vec<[u32; 2]> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| [a, b]))
            .collect();
        Hypergraph::new(2, n as usize, edges).unwrap()
    }

    #[test]
    fn triangle_is_its_own_2_core() {
        let t = parallel_peel(&complete_graph(3), 2);
        assert_eq!(t.s(), 0);
        assert_eq!(t.core_vertices, vec![0, 1, 2]);
        assert_eq!(t.core_edges, vec![0, 1, 2]);
    }

    #[test]
    fn path_peels_in_two_rounds() {
        let t = parallel_peel(&path(), 2);
        assert_eq!(t.s(), 2);
        assert_eq!(t.rounds[0].removed_vertices, vec![0, 2]);
        assert_eq!(t.rounds[0].removed_edges, vec![0, 1]);
        assert_eq!(t.rounds[1].removed_vertices, vec![1]);
        assert!(t.rounds[1].removed_edges.is_empty());
        assert!(t.core_vertices.is_empty());
        assert!(t.core_edges.is_empty());
    }

    #[test]
    fn single_hyperedge_peels_at_once() {
        let h = Hypergraph::new(3, 3, [[0, 1, 2]]).unwrap();
        let t = parallel_peel(&h, 2);
        assert_eq!(t.s(), 1);
        assert_eq!(t.rounds[0].removed_vertices, vec![0, 1, 2]);
        assert_eq!(t.rounds[0].removed_edges, vec![0]);
        assert!(t.core_vertices.is_empty());
    }

    #[test]
    fn empty_hypergraph() {
        let t = parallel_peel(&Hypergraph::empty(2, 0).unwrap(), 2);
        assert_eq!(t.s(), 0);
        assert!(t.core_vertices.is_empty());
    }

    #[test]
    fn isolated_vertices_go_in_round_one() {
        let t = parallel_peel(&Hypergraph::empty(3, 4).unwrap(), 1);
        assert_eq!(t.s(), 1);
        assert_eq!(t.rounds[0].removed_vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sequential_examples() {
        assert_eq!(sequential_kcore(&complete_graph(3), 2).0, vec![0, 1, 2]);
        assert_eq!(sequential_kcore(&path(), 2), (vec![], vec![]));
        let k4 = sequential_kcore(&complete_graph(4), 3);
        assert_eq!(k4.0, vec![0, 1, 2, 3]);
        assert_eq!(k4.1.len(), 6);
    }

    #[test]
    fn graph_after_rounds_on_path() {
        let t = parallel_peel(&path(), 2);
        assert_eq!(t.graph_after_rounds(0), (vec![0, 1, 2], vec![0, 1]));
        assert_eq!(t.graph_after_rounds(1), (vec![1], vec![]));
        assert_eq!(t.graph_after_rounds(99), (vec![], vec![]));
    }

    #[test]
    fn round_counts_on_path() {
        let t = parallel_peel(&path(), 2);
        let r = &t.rounds[0];
        assert_eq!(r.vertices_before(), 3);
        assert_eq!(r.edges_before(), 2);
        assert_eq!(r.surviving_deg_ge_k_count, 1);
        assert_eq!(r.surviving_vertex_count, 1);
        assert_eq!(r.surviving_edge_count, 0);
    }

    pub(crate) fn arb_hypergraph() -> impl Strategy<Value = Hypergraph> {
        (2usize..=4, 0usize..=24).prop_flat_map(|(r, n)| {
            let edge = proptest::collection::btree_set(0..n.max(1) as u32, r);
            let edges = if n >= r {
                proptest::collection::vec(edge, 0..=3 * n).boxed()
            } else {
                Just(Vec::new()).boxed()
            };
            edges.prop_map(move |mut es| {
                es.sort();
                es.dedup();
                let es: Vec<Vec<u32>> = es.into_iter().map(|e| e.into_iter().collect()).collect();
                Hypergraph::new(r, n, es).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn parallel_matches_sequential(h in arb_hypergraph(), k in 1usize..=4) {
            let t = parallel_peel(&h, k);
            let (cv, ce) = sequential_kcore(&h, k);
            prop_assert_eq!(&t.core_vertices, &cv);
            prop_assert_eq!(&t.core_edges, &ce);
        }

        #[test]
        fn trace_invariants(h in arb_hypergraph(), k in 1usize..=4) {
            let t = parallel_peel(&h, k);
            prop_assert!(t.s() <= h.n());

            // removed sets and the core partition the vertices
            let mut seen = vec![0u8; h.n()];
            for r in &t.rounds {
                prop_assert!(!r.removed_vertices.is_empty());
                for &v in &r.removed_vertices { seen[v as usize] += 1; }
            }
            for &v in &t.core_vertices { seen[v as usize] += 1; }
            prop_assert!(seen.iter().all(|&c| c == 1));

            // surviving counts monotone
            for w in t.rounds.windows(2) {
                prop_assert!(w[1].surviving_vertex_count <= w[0].surviving_vertex_count);
                prop_assert!(w[1].surviving_edge_count <= w[0].surviving_edge_count);
            }

            // edges go in the first round one of their vertices goes
            let mut round_of_vertex = vec![usize::MAX; h.n()];
            for r in &t.rounds {
                for &v in &r.removed_vertices { round_of_vertex[v as usize] = r.index; }
            }
            for r in &t.rounds {
                for &e in &r.removed_edges {
                    let first = h.edge(e).iter().map(|&v| round_of_vertex[v as usize]).min().unwrap();
                    prop_assert_eq!(first, r.index);
                }
            }

            // core degree
            let core: std::collections::HashSet<u32> = t.core_edges.iter().copied().collect();
            for &v in &t.core_vertices {
                let d = h.incident(v).iter().filter(|e| core.contains(e)).count();
                prop_assert!(d >= k);
            }
        }

        #[test]
        fn peeling_the_core_is_a_no_op(h in arb_hypergraph(), k in 1usize..=4) {
            let t = parallel_peel(&h, k);
            let (core, map) = h.induced_subgraph(&t.core_vertices).unwrap();
            prop_assert_eq!(core.num_edges(), t.core_edges.len());
            let again = parallel_peel(&core, k);
            prop_assert_eq!(again.s(), 0);
            let back: Vec<u32> = again.core_vertices.iter().map(|&v| map[v as usize]).collect();
            prop_assert_eq!(back, t.core_vertices);
        }

        #[test]
        fn removed_vertices_had_low_degree(h in arb_hypergraph(), k in 1usize..=4) {
            let t = parallel_peel(&h, k);
            for (i, r) in t.rounds.iter().enumerate() {
                let (alive, edges) = t.graph_after_rounds(i);
                let mut deg = vec![0usize; h.n()];
                for &e in &edges {
                    for &v in h.edge(e) { deg[v as usize] += 1; }
                }
                let low: Vec<u32> = alive.iter().copied().filter(|&v| deg[v as usize] < k).collect();
                prop_assert_eq!(&low, &r.removed_vertices);
                let high = alive.len() - low.len();
                prop_assert_eq!(high, r.surviving_deg_ge_k_count);
                prop_assert!(k * high <= h.r() * edges.len());
            }
        }
    }
}
