//! Static r-uniform hypergraphs with a CSR incidence index.
//!
//! Edges are stored flat (`m * r` vertex ids), each edge sorted internally and
//! the edge list sorted lexicographically, so two hypergraphs with the same
//! edge set compare equal and edge indices are canonical.

use std::cmp::Ordering;

use num_rational::Ratio;

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type EdgeId = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    r: usize,
    n: usize,
    edges: Vec<VertexId>,
    offsets: Vec<usize>,
    incidence: Vec<EdgeId>,
}

impl Hypergraph {
    /// Builds a simple r-uniform hypergraph on vertices `0..n`.
    ///
    /// Vertices inside each edge may be given in any order. Repeated vertices,
    /// out-of-range ids and duplicate edges are rejected with distinct errors.
    pub fn new<I, E>(r: usize, n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[VertexId]>,
    {
        if r < 2 {
            return Err(Error::InvalidUniformity(r));
        }
        let mut flat = Vec::new();
        for (i, e) in edges.into_iter().enumerate() {
            let e = e.as_ref();
            if e.len() != r {
                return Err(Error::WrongArity {
                    edge: i,
                    expected: r,
                    found: e.len(),
                });
            }
            flat.extend_from_slice(e);
        }
        Self::from_flat(r, n, flat)
    }

    /// Same as [`Hypergraph::new`] but takes edges already concatenated into
    /// one buffer of length `m * r`.
    pub fn from_flat(r: usize, n: usize, mut flat: Vec<VertexId>) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidUniformity(r));
        }
        if n > VertexId::MAX as usize {
            return Err(Error::IdOverflow {
                what: "vertices",
                count: n,
            });
        }
        if flat.len() % r != 0 {
            return Err(Error::WrongArity {
                edge: flat.len() / r,
                expected: r,
                found: flat.len() % r,
            });
        }
        let m = flat.len() / r;
        if m > EdgeId::MAX as usize {
            return Err(Error::IdOverflow {
                what: "edges",
                count: m,
            });
        }

        for (i, e) in flat.chunks_exact_mut(r).enumerate() {
            e.sort_unstable();
            for w in e.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::RepeatedVertex {
                        edge: i,
                        vertex: w[0],
                    });
                }
            }
            let last = e[r - 1];
            if last as usize >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: last as u64,
                    n,
                });
            }
        }

        let edges = if is_sorted_edges(&flat, r) {
            flat
        } else {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_unstable_by(|&a, &b| flat[a * r..(a + 1) * r].cmp(&flat[b * r..(b + 1) * r]));
            let mut sorted = Vec::with_capacity(flat.len());
            for e in order {
                sorted.extend_from_slice(&flat[e * r..(e + 1) * r]);
            }
            sorted
        };
        if let Some(dup) = edges
            .chunks_exact(r)
            .zip(edges.chunks_exact(r).skip(1))
            .find(|(a, b)| a == b)
        {
            return Err(Error::DuplicateEdge {
                edge: dup.0.to_vec(),
            });
        }

        let mut offsets = vec![0usize; n + 1];
        for &v in &edges {
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut incidence = vec![0 as EdgeId; edges.len()];
        for (e, verts) in edges.chunks_exact(r).enumerate() {
            for &v in verts {
                incidence[fill[v as usize]] = e as EdgeId;
                fill[v as usize] += 1;
            }
        }

        Ok(Self {
            r,
            n,
            edges,
            offsets,
            incidence,
        })
    }

    /// Hypergraph with `n` vertices and no edges.
    pub fn empty(r: usize, n: usize) -> Result<Self> {
        Self::from_flat(r, n, Vec::new())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len() / self.r
    }

    /// Sorted vertex ids of edge `e`. Panics if `e` is out of range.
    pub fn edge(&self, e: EdgeId) -> &[VertexId] {
        let e = e as usize;
        &self.edges[e * self.r..(e + 1) * self.r]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[VertexId]> + '_ {
        self.edges.chunks_exact(self.r)
    }

    /// Incident edge indices of `v`, in increasing order. Panics if `v` is out of range.
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        let v = v as usize;
        &self.incidence[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> Result<usize> {
        if v as usize >= self.n {
            return Err(Error::VertexOutOfRange {
                vertex: v as u64,
                n: self.n,
            });
        }
        Ok(self.incident(v).len())
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Exact average degree `r * m / n`; zero for the empty vertex set.
    pub fn average_degree(&self) -> Ratio<u64> {
        if self.n == 0 {
            return Ratio::from_integer(0);
        }
        Ratio::new((self.r * self.num_edges()) as u64, self.n as u64)
    }

    /// Sub-hypergraph induced by `vertices` (any order, duplicates ignored).
    ///
    /// The result is relabeled onto `0..|S|`; the returned map sends a new id
    /// to the original id.
    pub fn induced_subgraph(&self, vertices: &[VertexId]) -> Result<(Hypergraph, Vec<VertexId>)> {
        let mut keep: Vec<VertexId> = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&v) = keep.last() {
            if v as usize >= self.n {
                return Err(Error::VertexOutOfRange {
                    vertex: v as u64,
                    n: self.n,
                });
            }
        }
        let mut relabel = vec![VertexId::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            relabel[v as usize] = i as VertexId;
        }
        let mut flat = Vec::new();
        for e in self.edges() {
            if e.iter().all(|&v| relabel[v as usize] != VertexId::MAX) {
                flat.extend(e.iter().map(|&v| relabel[v as usize]));
            }
        }
        // relabeling is monotone, so edges stay sorted and distinct
        let sub = Hypergraph::from_flat(self.r, keep.len(), flat)?;
        Ok((sub, keep))
    }

    /// Connected components as sorted vertex blocks, ordered by smallest member.
    /// Isolated vertices form singleton blocks.
    pub fn connected_components(&self) -> Vec<Vec<VertexId>> {
        let mut sets = DisjointSets::new(self.n);
        for e in self.edges() {
            for w in e.windows(2) {
                sets.union(w[0] as usize, w[1] as usize);
            }
        }
        let mut block_of = vec![usize::MAX; self.n];
        let mut blocks: Vec<Vec<VertexId>> = Vec::new();
        for v in 0..self.n {
            let root = sets.find(v);
            if block_of[root] == usize::MAX {
                block_of[root] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[block_of[root]].push(v as VertexId);
        }
        blocks
    }

    /// Sizes of the components of the sub-hypergraph induced by the vertices
    /// with `keep[v] == true`. Unordered.
    pub fn induced_component_sizes(&self, keep: &[bool]) -> Vec<usize> {
        assert_eq!(keep.len(), self.n);
        let mut sets = DisjointSets::new(self.n);
        for e in self.edges() {
            if e.iter().all(|&v| keep[v as usize]) {
                for w in e.windows(2) {
                    sets.union(w[0] as usize, w[1] as usize);
                }
            }
        }
        let mut sizes = vec![0usize; self.n];
        for v in (0..self.n).filter(|&v| keep[v]) {
            sizes[sets.find(v)] += 1;
        }
        sizes.retain(|&s| s > 0);
        sizes
    }
}

fn is_sorted_edges(flat: &[VertexId], r: usize) -> bool {
    flat.chunks_exact(r)
        .zip(flat.chunks_exact(r).skip(1))
        .all(|(a, b)| a.cmp(b) != Ordering::Greater)
}

/// Union-find with path halving and union by size.
#[derive(Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}
