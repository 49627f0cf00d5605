//! Sampling of the binomial random hypergraph `H_r(n, p)`, `p = c / n^(r-1)`.
//!
//! Each of the `C(n, r)` possible edges is identified by its colexicographic
//! rank. A geometric skip sampler draws the set of present ranks exactly,
//! without visiting absent ones, and each drawn rank is unranked into an edge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VertexId};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The splitmix64 output function: add `0x9E3779B97F4A7C15`, then
/// xor-shift-multiply with `0xBF58476D1CE4E5B9` (shift 30),
/// `0x94D049BB133111EB` (shift 27), and a final xor-shift by 31.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` under `master`: `splitmix64(master ^ splitmix64(index))`.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// `C(n, k)` in 128-bit arithmetic, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    if let Some(v) = binomial_direct(n, k) {
        return Some(v);
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by i + 1; cancel the common factor first
        // so the product only overflows when the result does
        let d = i as u128 + 1;
        let g = gcd(acc, d);
        acc = (acc / g).checked_mul((n - i) as u128 / (d / g))?;
    }
    Some(acc)
}

/// Falling factorial over `k!` when the falling factorial itself fits.
fn binomial_direct(n: u64, k: u64) -> Option<u128> {
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num = num.checked_mul((n - i) as u128)?;
        den = den.checked_mul(i as u128 + 1)?;
    }
    Some(num / den)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn factorial_f64(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// The `rank`-th `r`-subset of `[0, n)` in colexicographic order, sorted ascending.
pub fn unrank_subset(rank: u128, r: usize, n: u64) -> Result<Vec<VertexId>> {
    let total = binomial(n, r as u64).ok_or(Error::Capacity { n, r })?;
    if rank >= total {
        return Err(Error::RankOutOfRange { rank, n, r });
    }
    let mut out = vec![0 as VertexId; r];
    unrank_into(rank, n, &mut out);
    Ok(out)
}

/// Unranks without range checks; `rank < C(n, out.len())` must hold.
fn unrank_into(mut rank: u128, n: u64, out: &mut [VertexId]) {
    let mut upper = n; // exclusive bound on the next element
    for j in (1..=out.len()).rev() {
        let a = if j == 1 {
            rank as u64
        } else {
            let jf = j as u64;
            let est = ((rank as f64) * factorial_f64(j)).powf(1.0 / j as f64) + (j as f64 - 1.0) / 2.0;
            let mut a = (est as u64).clamp(jf - 1, upper - 1);
            while a + 1 < upper && binomial(a + 1, jf).unwrap() <= rank {
                a += 1;
            }
            while binomial(a, jf).unwrap() > rank {
                a -= 1;
            }
            a
        };
        rank -= binomial(a, j as u64).unwrap();
        out[j - 1] = a as VertexId;
        upper = a;
    }
}

/// Colexicographic rank `sum_j C(s[j], j + 1)` of a sorted subset of `[0, n)`.
pub fn rank_subset(subset: &[VertexId], n: u64) -> Result<u128> {
    let valid = subset.windows(2).all(|w| w[0] < w[1])
        && subset.last().map_or(true, |&v| (v as u64) < n);
    if !valid {
        return Err(Error::InvalidSubset {
            subset: subset.to_vec(),
            n,
        });
    }
    let mut rank: u128 = 0;
    for (j, &v) in subset.iter().enumerate() {
        rank += binomial(v as u64, j as u64 + 1).ok_or(Error::Capacity {
            n,
            r: subset.len(),
        })?;
    }
    Ok(rank)
}

/// Exact Bernoulli process over indices `0..total` by geometric gap jumps.
///
/// The gap before the next success is `floor(ln U / ln(1 - p))` with `U`
/// uniform on `(0, 1]`, i.e. `P(G = g) = (1 - p)^g p`.
#[derive(Debug)]
pub struct SkipSampler<'a, R: Rng> {
    rng: &'a mut R,
    total: u128,
    next: u128,
    p: f64,
    log_q: f64,
}

impl<'a, R: Rng> SkipSampler<'a, R> {
    pub fn new(total: u128, p: f64, rng: &'a mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("probability {p} not in [0, 1]")));
        }
        Ok(Self {
            rng,
            total,
            next: 0,
            p,
            log_q: (-p).ln_1p(),
        })
    }
}

impl<R: Rng> Iterator for SkipSampler<'_, R> {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        if self.next >= self.total || self.p == 0.0 {
            return None;
        }
        if self.p < 1.0 {
            let u = 1.0 - self.rng.random::<f64>();
            let gap = (u.ln() / self.log_q).floor();
            if gap >= (self.total - self.next) as f64 {
                self.next = self.total;
                return None;
            }
            self.next += gap as u128;
            if self.next >= self.total {
                return None;
            }
        }
        let hit = self.next;
        self.next += 1;
        Some(hit)
    }
}

/// Indices in `0..total` of the successes among `total` independent
/// Bernoulli(`p`) trials, in increasing order.
pub fn skip_sample<R: Rng>(total: u128, p: f64, rng: &mut R) -> Result<Vec<u128>> {
    Ok(SkipSampler::new(total, p, rng)?.collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub r: usize,
    pub k: usize,
    pub c: f64,
    pub n: usize,
    pub seed: u64,
}

impl ModelParams {
    /// Edge probability `c / n^(r-1)`.
    pub fn p(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.c / (self.n as f64).powi(self.r as i32 - 1)
    }

    /// Checks the generator's preconditions (`r >= 2`, `c >= 0`, `p <= 1`).
    pub fn validate(&self) -> Result<()> {
        if self.r < 2 {
            return Err(Error::InvalidUniformity(self.r));
        }
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidParameter(format!("c = {} must be >= 0", self.c)));
        }
        let p = self.p();
        if p > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "p = c/n^(r-1) = {p} exceeds 1"
            )));
        }
        Ok(())
    }

    /// Additionally requires `k >= 2`, `c > 0` and `(k, r) != (2, 2)`.
    pub fn validate_for_peeling(&self) -> Result<()> {
        self.validate()?;
        if self.k < 2 || (self.k == 2 && self.r == 2) {
            return Err(Error::InvalidParameter(format!(
                "(r, k) = ({}, {}) is outside k >= 2, (k, r) != (2, 2)",
                self.r, self.k
            )));
        }
        if !(self.c > 0.0) {
            return Err(Error::InvalidParameter("c must be positive".into()));
        }
        Ok(())
    }
}

/// Samples `H_r(n, p)` from `params.seed`; `params.k` is ignored.
pub fn sample_binomial_hypergraph(params: &ModelParams) -> Result<Hypergraph> {
    let mut rng = rng_from_seed(params.seed);
    sample_with_rng(params, &mut rng)
}

pub fn sample_with_rng<R: Rng>(params: &ModelParams, rng: &mut R) -> Result<Hypergraph> {
    params.validate()?;
    let (r, n) = (params.r, params.n as u64);
    let total = binomial(n, r as u64).ok_or(Error::Capacity { n, r })?;
    if n > VertexId::MAX as u64 {
        return Err(Error::IdOverflow {
            what: "vertices",
            count: params.n,
        });
    }

    // Index i is mapped to rank total-1-i and every vertex v of the unranked
    // colex subset to n-1-v. Decreasing colex rank under that reflection is
    // increasing lexicographic order, so edges come out already sorted.
    let mut flat = Vec::new();
    let mut edge = vec![0 as VertexId; r];
    for i in SkipSampler::new(total, params.p(), rng)? {
        unrank_into(total - 1 - i, n, &mut edge);
        flat.extend(edge.iter().rev().map(|&v| (n - 1) as VertexId - v));
    }
    Hypergraph::from_flat(r, params.n, flat)
}
