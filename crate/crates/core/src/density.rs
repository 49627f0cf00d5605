//! Exhaustive checks on small dense subgraphs and on per-round contraction.
//!
//! "Subgraph on a vertex set" always means the induced one: the edges of `H`
//! lying entirely inside the set.

use std::cmp::Ordering;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hypergraph::{EdgeId, Hypergraph, VertexId};
use crate::peeling::PeelingTrace;
use crate::random::binomial;

pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// How many candidate edges a vertex set of size `s` is taken to hold in the
/// first-moment bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSpace {
    /// `s^r`, the over-count used in the textbook bound.
    Power,
    /// `C(s, r)`, the true number of r-subsets.
    Exact,
}

/// `ln C(n, k)` via log-gamma; `-inf` when `k > n`.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    if k < 0.0 || k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// `ln( C(n, s) * C(M, t) * p^t )` with `p = c / n^(r-1)` and `M` from `space`.
pub fn ln_expected_count_bound(
    n: usize,
    s: usize,
    t: usize,
    c: f64,
    r: usize,
    space: EdgeSpace,
) -> Result<f64> {
    if s == 0 || s > n {
        return Err(Error::Domain(format!("need 1 <= s <= n, got s={s}, n={n}")));
    }
    if r < 2 {
        return Err(Error::InvalidUniformity(r));
    }
    let p = c / (n as f64).powi(r as i32 - 1);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} not in [0, 1]")));
    }
    let slots = match space {
        EdgeSpace::Power => (s as f64).powi(r as i32),
        EdgeSpace::Exact => ln_binomial(s as f64, r as f64).exp().round(),
    };
    let mut ln = ln_binomial(n as f64, s as f64) + ln_binomial(slots, t as f64);
    if t > 0 {
        ln += t as f64 * p.ln();
    }
    Ok(ln)
}

/// First-moment upper bound on the expected number of `s`-vertex sets inducing
/// at least `t` edges in `H_r(n, c/n^(r-1))`. May exceed 1.
pub fn expected_count_bound(n: usize, s: usize, t: usize, c: f64, r: usize, space: EdgeSpace) -> Result<f64> {
    Ok(ln_expected_count_bound(n, s, t, c, r, space)?.exp())
}

/// Depth-first walk over vertex subsets in increasing-id order, tracking the
/// induced edge count incrementally.
struct SubsetWalker<'a> {
    h: &'a Hypergraph,
    /// edges grouped by their largest vertex
    by_max: Vec<Vec<EdgeId>>,
}

impl<'a> SubsetWalker<'a> {
    fn new(h: &'a Hypergraph) -> Self {
        let mut by_max = vec![Vec::new(); h.n()];
        for (e, verts) in h.edges().enumerate() {
            by_max[*verts.last().unwrap() as usize].push(e as EdgeId);
        }
        Self { h, by_max }
    }

    /// Visits every subset whose smallest vertex is `first` and size is at
    /// most `max_size`.
    fn walk_from<F: FnMut(&[VertexId], usize)>(&self, first: VertexId, max_size: usize, visit: &mut F) {
        let mut in_set = vec![false; self.h.n()];
        let mut chosen = Vec::with_capacity(max_size);
        in_set[first as usize] = true;
        chosen.push(first);
        self.rec(&mut chosen, &mut in_set, 0, max_size, visit);
    }

    fn rec<F: FnMut(&[VertexId], usize)>(
        &self,
        chosen: &mut Vec<VertexId>,
        in_set: &mut [bool],
        edges: usize,
        max_size: usize,
        visit: &mut F,
    ) {
        visit(chosen, edges);
        if chosen.len() == max_size {
            return;
        }
        let next = *chosen.last().unwrap() as usize + 1;
        for v in next..self.h.n() {
            let added = self.by_max[v]
                .iter()
                .filter(|&&e| {
                    let verts = self.h.edge(e);
                    verts[..verts.len() - 1].iter().all(|&u| in_set[u as usize])
                })
                .count();
            in_set[v] = true;
            chosen.push(v as VertexId);
            self.rec(chosen, in_set, edges + added, max_size, visit);
            chosen.pop();
            in_set[v] = false;
        }
    }
}

fn subsets_up_to(n: usize, max_size: usize) -> u128 {
    (1..=max_size)
        .map(|i| binomial(n as u64, i as u64).unwrap_or(u128::MAX))
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// Exact number of `s`-vertex subsets of `h` inducing at least `t` edges.
pub fn count_dense_subgraphs(h: &Hypergraph, s: usize, t: usize, budget: u128) -> Result<u128> {
    Ok(count_dense_subgraphs_many(h, &[(s, t)], budget)?[0])
}

/// [`count_dense_subgraphs`] for several `(s, t)` queries in one pass.
pub fn count_dense_subgraphs_many(h: &Hypergraph, queries: &[(usize, usize)], budget: u128) -> Result<Vec<u128>> {
    let max_s = queries.iter().map(|q| q.0).max().unwrap_or(0);
    for &(s, _) in queries {
        let required = binomial(h.n() as u64, s as u64).unwrap_or(u128::MAX);
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
    }
    if max_s == 0 {
        // the empty set induces no edges
        return Ok(queries.iter().map(|&(_, t)| u128::from(t == 0)).collect());
    }
    let walker = SubsetWalker::new(h);
    let counts = (0..h.n() as VertexId)
        .into_par_iter()
        .map(|first| {
            let mut local = vec![0u128; queries.len()];
            walker.walk_from(first, max_s, &mut |set, edges| {
                for (q, &(s, t)) in queries.iter().enumerate() {
                    if set.len() == s && edges >= t {
                        local[q] += 1;
                    }
                }
            });
            local
        })
        .reduce(
            || vec![0u128; queries.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensestSubset {
    pub witness: Vec<VertexId>,
    /// `r * (induced edges) / |witness|`
    pub avg_degree: Ratio<u64>,
}

impl DensestSubset {
    fn none() -> Self {
        Self {
            witness: Vec::new(),
            avg_degree: Ratio::from_integer(0),
        }
    }

    /// Denser first, then smaller, then lexicographically smaller.
    fn preferred_over(&self, other: &Self) -> bool {
        if other.witness.is_empty() {
            return !self.witness.is_empty();
        }
        match self.avg_degree.cmp(&other.avg_degree) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (self.witness.len(), &self.witness) < (other.witness.len(), &other.witness),
        }
    }

    fn better(a: Self, b: Self) -> Self {
        if b.preferred_over(&a) {
            b
        } else {
            a
        }
    }
}

fn avg_degree(r: usize, edges: usize, size: usize) -> Ratio<u64> {
    Ratio::new((r * edges) as u64, size as u64)
}

/// Densest non-empty vertex subset of size at most `max_size`, by exhaustive
/// enumeration. Ties go to the smallest subset, then the lexicographically
/// first. Returns an empty witness with average degree 0 when `n = 0` or
/// `max_size = 0`.
pub fn max_density_subgraph_bruteforce(h: &Hypergraph, max_size: usize, budget: u128) -> Result<DensestSubset> {
    if max_size > h.n() {
        return Err(Error::InvalidParameter(format!(
            "max_size {max_size} exceeds n = {}",
            h.n()
        )));
    }
    let required = subsets_up_to(h.n(), max_size);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    if max_size == 0 {
        return Ok(DensestSubset::none());
    }
    let walker = SubsetWalker::new(h);
    let r = h.r();
    Ok((0..h.n() as VertexId)
        .into_par_iter()
        .map(|first| {
            let mut best = DensestSubset::none();
            walker.walk_from(first, max_size, &mut |set, edges| {
                let d = avg_degree(r, edges, set.len());
                let strictly = best.witness.is_empty() || d > best.avg_degree;
                let tie_smaller = d == best.avg_degree && set.len() < best.witness.len();
                // within one walk subsets of equal size arrive in lex order
                if strictly || tie_smaller {
                    best = DensestSubset {
                        witness: set.to_vec(),
                        avg_degree: d,
                    };
                }
            });
            best
        })
        .reduce(DensestSubset::none, DensestSubset::better))
}

/// Densest subset restricted to connected vertex sets, enumerated with the
/// ESU extension-set scheme on the 2-section graph. Every densest subset has
/// a connected densest part, so the maximum density equals that of
/// [`max_density_subgraph_bruteforce`]; the witness may differ on ties.
/// Cost is proportional to the number of connected subsets, so it reaches
/// much larger sparse graphs.
pub fn max_density_connected(h: &Hypergraph, max_size: usize) -> DensestSubset {
    let n = h.n();
    let mut neighbors: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for e in h.edges() {
        for &a in e {
            for &b in e {
                if a != b {
                    neighbors[a as usize].push(b);
                }
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }

    struct Esu<'a> {
        h: &'a Hypergraph,
        neighbors: &'a [Vec<VertexId>],
        in_set: Vec<bool>,
        /// number of set members adjacent to or equal to the vertex
        touched: Vec<u32>,
        chosen: Vec<VertexId>,
        max_size: usize,
        best: DensestSubset,
    }

    impl Esu<'_> {
        fn add(&mut self, v: VertexId) -> usize {
            let added = self
                .h
                .incident(v)
                .iter()
                .filter(|&&e| self.h.edge(e).iter().all(|&u| u == v || self.in_set[u as usize]))
                .count();
            self.in_set[v as usize] = true;
            self.touched[v as usize] += 1;
            for &u in &self.neighbors[v as usize] {
                self.touched[u as usize] += 1;
            }
            self.chosen.push(v);
            added
        }

        fn remove(&mut self, v: VertexId) {
            self.in_set[v as usize] = false;
            self.touched[v as usize] -= 1;
            for &u in &self.neighbors[v as usize] {
                self.touched[u as usize] -= 1;
            }
            self.chosen.pop();
        }

        fn extend(&mut self, mut ext: Vec<VertexId>, root: VertexId, edges: usize) {
            let d = avg_degree(self.h.r(), edges, self.chosen.len());
            let mut sorted = self.chosen.clone();
            sorted.sort_unstable();
            let cand = DensestSubset {
                witness: sorted,
                avg_degree: d,
            };
            if cand.preferred_over(&self.best) {
                self.best = cand;
            }
            if self.chosen.len() == self.max_size {
                return;
            }
            while let Some(w) = ext.pop() {
                // exclusive neighbours of w: above the root, not in or next to the set
                let fresh: Vec<VertexId> = self.neighbors[w as usize]
                    .iter()
                    .copied()
                    .filter(|&u| u > root && self.touched[u as usize] == 0)
                    .collect();
                let added = self.add(w);
                let mut next_ext = ext.clone();
                next_ext.extend(fresh);
                self.extend(next_ext, root, edges + added);
                self.remove(w);
            }
        }
    }

    let mut esu = Esu {
        h,
        neighbors: &neighbors,
        in_set: vec![false; n],
        touched: vec![0; n],
        chosen: Vec::new(),
        max_size,
        best: DensestSubset::none(),
    };
    if max_size == 0 {
        return esu.best;
    }
    for v in 0..n as VertexId {
        esu.add(v);
        let ext: Vec<VertexId> = neighbors[v as usize].iter().copied().filter(|&u| u > v).collect();
        esu.extend(ext, v, 0);
        esu.remove(v);
    }
    esu.best
}

/// Recomputes `r * (induced edges) / |subset|` from scratch.
pub fn subset_avg_degree(h: &Hypergraph, subset: &[VertexId]) -> Result<Ratio<u64>> {
    let (sub, keep) = h.induced_subgraph(subset)?;
    if keep.is_empty() {
        return Ok(Ratio::from_integer(0));
    }
    Ok(sub.average_degree())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub s: usize,
    pub t: usize,
    pub exact_count: u128,
    /// First-moment bound with the `s^r` edge space; needs a density `c`.
    pub bound: Option<f64>,
    /// Same bound with the `C(s, r)` edge space.
    pub bound_exact_space: Option<f64>,
    pub max_avg_degree: Ratio<u64>,
    pub max_avg_degree_f64: f64,
    pub witness: Vec<VertexId>,
}

pub fn density_report(
    h: &Hypergraph,
    s: usize,
    t: usize,
    max_size: usize,
    c: Option<f64>,
    budget: u128,
) -> Result<DensityReport> {
    let exact_count = count_dense_subgraphs(h, s, t, budget)?;
    let densest = max_density_subgraph_bruteforce(h, max_size, budget)?;
    let bound = |space| {
        c.map(|c| expected_count_bound(h.n(), s, t, c, h.r(), space))
            .transpose()
    };
    Ok(DensityReport {
        s,
        t,
        exact_count,
        bound: bound(EdgeSpace::Power)?,
        bound_exact_space: bound(EdgeSpace::Exact)?,
        max_avg_degree_f64: *densest.avg_degree.numer() as f64 / *densest.avg_degree.denom() as f64,
        max_avg_degree: densest.avg_degree,
        witness: densest.witness,
    })
}

/// Upper bound `r / (k (r - 1)) + eps / k` on the surviving fraction per
/// round when every subgraph has average degree below `r / (r - 1) + eps`.
pub fn contraction_factor(r: usize, k: usize, eps: f64) -> f64 {
    let (r, k) = (r as f64, k as f64);
    r / (k * (r - 1.0)) + eps / k
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContractionEntry {
    /// Round about to run; `s + 1` for the terminal check on the core.
    pub round: usize,
    pub vertex_count_before: usize,
    pub edge_count_before: usize,
    pub deg_ge_k_count: usize,
    pub rho: Ratio<u64>,
    pub survivor_count_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `k * deg_ge_k > r * edges`
    Markov,
    /// `survivors > deg_ge_k`
    Survivor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub round: usize,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionReport {
    pub r: usize,
    pub k: usize,
    pub entries: Vec<ContractionEntry>,
    pub violations: Vec<Violation>,
    /// Largest `rho` over entries, 0 if there are none.
    pub max_rho: f64,
}

/// Checks, before every round and once more on the final core, that
/// `k * #{deg >= k} <= r * #edges` and that no vertex of degree `< k`
/// survives. Both always hold for a correct peeler; violations are collected
/// rather than raised. States with no vertices are skipped.
pub fn contraction_check(trace: &PeelingTrace) -> ContractionReport {
    let (r, k) = (trace.r, trace.k);
    let mut entries: Vec<ContractionEntry> = trace
        .rounds
        .iter()
        .map(|round| ContractionEntry {
            round: round.index,
            vertex_count_before: round.vertices_before(),
            edge_count_before: round.edges_before(),
            deg_ge_k_count: round.surviving_deg_ge_k_count,
            rho: Ratio::new(
                round.surviving_deg_ge_k_count as u64,
                round.vertices_before() as u64,
            ),
            survivor_count_after: round.surviving_vertex_count,
        })
        .collect();
    let core = trace.core_vertices.len();
    if core > 0 {
        entries.push(ContractionEntry {
            round: trace.s() + 1,
            vertex_count_before: core,
            edge_count_before: trace.core_edges.len(),
            deg_ge_k_count: core,
            rho: Ratio::from_integer(1),
            survivor_count_after: core,
        });
    }

    let mut violations = Vec::new();
    for e in &entries {
        if k * e.deg_ge_k_count > r * e.edge_count_before {
            violations.push(Violation {
                round: e.round,
                kind: ViolationKind::Markov,
            });
        }
        if e.survivor_count_after > e.deg_ge_k_count {
            violations.push(Violation {
                round: e.round,
                kind: ViolationKind::Survivor,
            });
        }
    }
    let max_rho = entries
        .iter()
        .map(|e| *e.rho.numer() as f64 / *e.rho.denom() as f64)
        .fold(0.0, f64::max);
    ContractionReport {
        r,
        k,
        entries,
        violations,
        max_rho,
    }
}
