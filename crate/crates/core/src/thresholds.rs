//! k-core emergence thresholds and round-count coefficients.
//!
//! The analytic threshold comes from minimizing
//! `f(x) = x / P(Po(x) >= k - 1)^(r - 1)`; the minimum value is the critical
//! expected vertex degree, and `c = lambda * (r - 1)!` converts it to the
//! `p = c / n^(r-1)` parametrization. The empirical route bisects on `c` with
//! simulated sample-and-peel runs and is used to validate that conversion.
//!
//! All logarithms are natural.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::peeling::parallel_peel;
use crate::random::{mix_seed, sample_binomial_hypergraph, ModelParams};

const GRID_POINTS: usize = 1000;
const GRID_LO: f64 = 1e-3;
const GRID_HI: f64 = 50.0;

/// Relative agreement required between analytic and empirical thresholds.
pub const MAPPING_TOLERANCE: f64 = 0.05;

/// Fraction of `n` above which a median core counts as non-empty.
pub const SUPERCRITICAL_CORE_FRACTION: f64 = 0.01;

/// `P(Poisson(x) >= j)`.
///
/// Sums whichever tail is smaller: the upper tail directly when `j > x`,
/// otherwise `1 - P(X <= j - 1)`. Terms are generated by recurrence from a
/// log-space anchor at the boundary index, so nothing underflows before it
/// stops mattering.
pub fn poisson_tail(x: f64, j: u32) -> f64 {
    if j == 0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 0.0;
    }
    let log_pmf = |i: u32| -x + i as f64 * x.ln() - ln_gamma(i as f64 + 1.0);
    if j as f64 > x {
        let mut term = log_pmf(j).exp();
        let mut sum = 0.0;
        let mut i = j;
        while term > sum * 1e-17 {
            sum += term;
            i += 1;
            term *= x / i as f64;
        }
        sum.min(1.0)
    } else {
        let mut term = log_pmf(j - 1).exp();
        let mut sum = 0.0;
        let mut i = j - 1;
        loop {
            sum += term;
            if i == 0 {
                break;
            }
            term *= i as f64 / x;
            i -= 1;
        }
        (1.0 - sum).max(0.0)
    }
}

/// `x / P(Po(x) >= k - 1)^(r - 1)`; infinite where the tail vanishes.
pub fn threshold_objective(x: f64, r: usize, k: usize) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("objective needs x > 0, got {x}")));
    }
    if k == 0 || r < 2 {
        return Err(Error::Domain(format!("objective needs r >= 2, k >= 1, got r={r}, k={k}")));
    }
    let tail = poisson_tail(x, (k - 1) as u32);
    if tail == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(x / tail.powi(r as i32 - 1))
}

fn check_rk(r: usize, k: usize) -> Result<()> {
    if r < 2 || k < 2 || (r == 2 && k == 2) {
        return Err(Error::Domain(format!(
            "(r, k) = ({r}, {k}) must satisfy r, k >= 2 and (k, r) != (2, 2)"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coefficients {
    /// `1 / ln((r-1)(k-1))`
    pub a: f64,
    /// `1 / ln(k(r-1)/r)`
    pub a_star: f64,
}

pub fn coefficients(r: usize, k: usize) -> Result<Coefficients> {
    check_rk(r, k)?;
    let (r, k) = (r as f64, k as f64);
    Ok(Coefficients {
        a: 1.0 / ((r - 1.0) * (k - 1.0)).ln(),
        a_star: 1.0 / (k * (r - 1.0) / r).ln(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticThreshold {
    pub x_star: f64,
    /// Critical expected vertex degree, `f(x_star)`.
    pub lambda_star: f64,
    /// `lambda_star * (r - 1)!`.
    pub c_analytic: f64,
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// Minimizes the threshold objective: a log-spaced grid scan on
/// `[1e-3, 50]` brackets the minimum, then golden-section search narrows the
/// bracket to width `tol`.
pub fn compute_threshold_analytic(r: usize, k: usize, tol: f64) -> Result<AnalyticThreshold> {
    check_rk(r, k)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let f = |x: f64| threshold_objective(x, r, k);

    let ratio = (GRID_HI / GRID_LO).ln() / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| GRID_LO * (ratio * i as f64).exp())
        .collect();
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x)?;
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    if best == 0 || best == GRID_POINTS - 1 {
        return Err(Error::Bracket(format!(
            "grid minimum of the objective for (r, k) = ({r}, {k}) lies on the boundary x = {}",
            grid[best]
        )));
    }

    let (mut lo, mut hi) = (grid[best - 1], grid[best + 1]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let x_star = 0.5 * (lo + hi);
    let lambda_star = f(x_star)?;
    Ok(AnalyticThreshold {
        x_star,
        lambda_star,
        c_analytic: lambda_star * factorial(r - 1),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalConfig {
    pub n: usize,
    pub trials: usize,
    /// Stop when the bracket width is at most `tol * c`.
    pub tol: f64,
    pub seed: u64,
    /// Defaults to `[0.1, 16 * k * r!]`.
    pub bracket: Option<(f64, f64)>,
}

impl Default for EmpiricalConfig {
    fn default() -> Self {
        Self {
            n: 100_000,
            trials: 9,
            tol: 0.01,
            seed: 0,
            bracket: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseProbe {
    pub c: f64,
    pub core_sizes: Vec<usize>,
    pub median_core: usize,
    pub supercritical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalThreshold {
    pub c: f64,
    pub lo: f64,
    pub hi: f64,
    pub probes: Vec<PhaseProbe>,
}

/// Samples `trials` instances at density `c` and peels each to its k-core.
///
/// Trial `t` uses seed `mix_seed(seed, t)` whatever `c` is, so probes at
/// different densities share their random streams.
pub fn probe_phase(r: usize, k: usize, c: f64, n: usize, trials: usize, seed: u64) -> Result<PhaseProbe> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let mut core_sizes = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let params = ModelParams {
                r,
                k,
                c,
                n,
                seed: mix_seed(seed, t),
            };
            let h = sample_binomial_hypergraph(&params)?;
            Ok(parallel_peel(&h, k).core_vertices.len())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = core_sizes.clone();
    sorted.sort_unstable();
    let median_core = sorted[trials / 2];
    core_sizes.shrink_to_fit();
    Ok(PhaseProbe {
        c,
        core_sizes,
        median_core,
        supercritical: median_core as f64 > SUPERCRITICAL_CORE_FRACTION * n as f64,
    })
}

/// Bisects on `c` until the bracket separating empty from non-empty median
/// cores is narrower than `tol * c`. Midpoints are geometric so a wide
/// default bracket costs only a few extra probes.
pub fn compute_threshold_empirical(r: usize, k: usize, cfg: &EmpiricalConfig) -> Result<EmpiricalThreshold> {
    check_rk(r, k)?;
    if !(cfg.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let (mut lo, mut hi) = cfg
        .bracket
        .unwrap_or((0.1, 16.0 * k as f64 * factorial(r)));
    if !(0.0 < lo && lo < hi) {
        return Err(Error::InvalidParameter(format!("bad bracket [{lo}, {hi}]")));
    }
    let mut probes = Vec::new();
    let low = probe_phase(r, k, lo, cfg.n, cfg.trials, cfg.seed)?;
    let high = probe_phase(r, k, hi, cfg.n, cfg.trials, cfg.seed)?;
    if low.supercritical || !high.supercritical {
        return Err(Error::Bracket(format!(
            "bracket [{lo}, {hi}] does not separate phases (median cores {} and {})",
            low.median_core, high.median_core
        )));
    }
    probes.push(low);
    probes.push(high);

    while hi - lo > cfg.tol * 0.5 * (lo + hi) {
        let mid = (lo * hi).sqrt();
        let probe = probe_phase(r, k, mid, cfg.n, cfg.trials, cfg.seed)?;
        if probe.supercritical {
            hi = mid;
        } else {
            lo = mid;
        }
        probes.push(probe);
    }
    Ok(EmpiricalThreshold {
        c: 0.5 * (lo + hi),
        lo,
        hi,
        probes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mapping {
    /// `c = lambda * (r - 1)!`
    Factorial,
    /// `c = lambda`
    Unmapped,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MappingCheck {
    pub mapping: Mapping,
    /// `None` when neither mapping matches within [`MAPPING_TOLERANCE`].
    pub validated: Option<bool>,
    pub c: f64,
}

/// Decides which normalization the empirical threshold supports.
pub fn check_mapping(analytic: &AnalyticThreshold, c_empirical: f64) -> MappingCheck {
    let close = |target: f64| ((c_empirical - target) / target).abs() <= MAPPING_TOLERANCE;
    if close(analytic.c_analytic) {
        MappingCheck {
            mapping: Mapping::Factorial,
            validated: Some(true),
            c: analytic.c_analytic,
        }
    } else if close(analytic.lambda_star) {
        MappingCheck {
            mapping: Mapping::Unmapped,
            validated: Some(true),
            c: analytic.lambda_star,
        }
    } else {
        MappingCheck {
            mapping: Mapping::Factorial,
            validated: Some(false),
            c: analytic.c_analytic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Analytic,
    Empirical,
    Both,
}

/// Everything the `threshold` command reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub r: usize,
    pub k: usize,
    pub x_star: Option<f64>,
    pub lambda_star: Option<f64>,
    pub c_analytic: Option<f64>,
    pub c_empirical: Option<f64>,
    pub c_empirical_interval: Option<(f64, f64)>,
    pub a: f64,
    pub a_star: f64,
    pub mapping: Mapping,
    /// `Some(true)` once the empirical route confirmed the mapping.
    pub mapping_validated: Option<bool>,
    pub warning: Option<String>,
}

pub fn compute_threshold(
    r: usize,
    k: usize,
    method: Method,
    tol: f64,
    empirical: &EmpiricalConfig,
) -> Result<ThresholdResult> {
    let coeffs = coefficients(r, k)?;
    let analytic = match method {
        Method::Analytic | Method::Both => Some(compute_threshold_analytic(r, k, tol)?),
        Method::Empirical => None,
    };
    let emp = match method {
        Method::Empirical | Method::Both => Some(compute_threshold_empirical(r, k, empirical)?),
        Method::Analytic => None,
    };

    let mut result = ThresholdResult {
        r,
        k,
        x_star: analytic.map(|a| a.x_star),
        lambda_star: analytic.map(|a| a.lambda_star),
        c_analytic: analytic.map(|a| a.c_analytic),
        c_empirical: emp.as_ref().map(|e| e.c),
        c_empirical_interval: emp.as_ref().map(|e| (e.lo, e.hi)),
        a: coeffs.a,
        a_star: coeffs.a_star,
        mapping: Mapping::Factorial,
        mapping_validated: None,
        warning: None,
    };
    match (analytic, emp) {
        (Some(a), Some(e)) => {
            let check = check_mapping(&a, e.c);
            result.mapping = check.mapping;
            result.mapping_validated = check.validated;
            result.c_analytic = Some(check.c);
            if check.validated != Some(true) {
                result.warning = Some(format!(
                    "empirical threshold {:.4} matches neither lambda*(r-1)! = {:.4} nor lambda = {:.4}",
                    e.c, a.c_analytic, a.lambda_star
                ));
            }
        }
        (Some(_), None) => {
            result.warning =
                Some("c_analytic uses the unvalidated (r-1)! mapping; run with --method both".into());
        }
        _ => {}
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{DiscreteCDF, Poisson};

    #[test]
    fn tail_closed_forms() {
        assert_eq!(poisson_tail(3.7, 0), 1.0);
        assert_eq!(poisson_tail(0.0, 0), 1.0);
        assert_eq!(poisson_tail(0.0, 3), 0.0);
        assert!((poisson_tail(1.0, 1) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((poisson_tail(1.0, 1) - 0.632_120_559).abs() < 1e-9);
        assert!((poisson_tail(2.0, 2) - (1.0 - 3.0 * (-2f64).exp())).abs() < 1e-15);
        assert!((poisson_tail(2.0, 2) - 0.593_994_150).abs() < 1e-9);
    }

    #[test]
    fn tail_against_incomplete_gamma() {
        // statrs goes through the regularized incomplete gamma function
        for xi in 0..=100 {
            let x = 0.05 + xi as f64 * 0.5;
            let po = Poisson::new(x).unwrap();
            for j in 1..=50u32 {
                let expected = po.sf(j as u64 - 1);
                let got = poisson_tail(x, j);
                assert!(
                    (got - expected).abs() <= 1e-12,
                    "x={x} j={j}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn tail_monotonicity_and_pmf_differences() {
        for xi in 1..40 {
            let x = xi as f64 * 1.25;
            for j in 0..50u32 {
                let d = poisson_tail(x, j) - poisson_tail(x, j + 1);
                let pmf = (-x + j as f64 * x.ln() - ln_gamma(j as f64 + 1.0)).exp();
                assert!(d >= -1e-15);
                assert!((d - pmf).abs() < 1e-12);
                assert!(poisson_tail(x + 0.5, j) >= poisson_tail(x, j) - 1e-15);
            }
        }
    }

    #[test]
    fn objective_values() {
        let v = threshold_objective(1.0, 2, 2).unwrap();
        assert!((v - 1.0 / (1.0 - (-1f64).exp())).abs() < 1e-12);
        assert!((v - 1.58198).abs() < 1e-5);
        // r = k = 2: x / (1 - e^-x) decreases to 1 as x -> 0
        let small = threshold_objective(1e-6, 2, 2).unwrap();
        assert!((small - 1.0).abs() < 1e-6);
        assert!(threshold_objective(1e-3, 2, 2).unwrap() < threshold_objective(1e-2, 2, 2).unwrap());
        assert!(threshold_objective(0.0, 2, 3).is_err());
        assert!(threshold_objective(-1.0, 2, 3).is_err());
        assert!(threshold_objective(1e-300, 2, 9).unwrap().is_infinite());
    }

    fn grid_min(r: usize, k: usize) -> (f64, f64) {
        // dense uniform scan on (0, 20]
        (1..=200_000)
            .map(|i| i as f64 * 1e-4)
            .map(|x| (x, threshold_objective(x, r, k).unwrap()))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    #[test]
    fn objective_minimum_matches_dense_grid() {
        let (x_grid, f_grid) = grid_min(2, 3);
        let t = compute_threshold_analytic(2, 3, 1e-9).unwrap();
        assert!((t.lambda_star - f_grid).abs() < 1e-3);
        assert!((t.x_star - x_grid).abs() < 1e-3);
        assert!(t.lambda_star <= f_grid + 1e-12);
    }

    #[test]
    fn analytic_thresholds() {
        let t = compute_threshold_analytic(2, 3, 1e-9).unwrap();
        assert!((t.x_star - 1.793_282_123).abs() < 1e-6);
        assert!((t.lambda_star - 3.350_918_872).abs() < 1e-8);
        assert!((t.c_analytic - 3.3510).abs() < 1e-4);

        let t = compute_threshold_analytic(3, 2, 1e-9).unwrap();
        assert!((t.x_star - 1.256_431_209).abs() < 1e-6);
        assert!(((2.0 * t.x_star).ln_1p() - t.x_star).abs() < 1e-8);
        assert!((t.lambda_star - 2.455_407_482).abs() < 1e-8);
        assert!((t.c_analytic - 4.910_814_965).abs() < 1e-7);

        let t = compute_threshold_analytic(3, 3, 1e-9).unwrap();
        assert!((t.lambda_star - 4.658_489_819).abs() < 1e-8);
    }

    #[test]
    fn golden_section_agrees_with_grid_bracket() {
        for r in 2..=5 {
            for k in 2..=5 {
                if r == 2 && k == 2 {
                    continue;
                }
                let tol = 1e-6;
                let t = compute_threshold_analytic(r, k, tol).unwrap();
                let (x_grid, f_grid) = grid_min(r, k);
                assert!((t.x_star - x_grid).abs() <= 10.0 * tol + 1e-4, "r={r} k={k}");
                assert!(t.lambda_star <= f_grid + 1e-9);
            }
        }
    }

    #[test]
    fn analytic_rejects_excluded_cases() {
        assert!(matches!(compute_threshold_analytic(2, 2, 1e-6), Err(Error::Domain(_))));
        assert!(compute_threshold_analytic(1, 3, 1e-6).is_err());
        assert!(compute_threshold_analytic(3, 2, 0.0).is_err());
    }

    #[test]
    fn coefficient_values() {
        let c = coefficients(3, 2).unwrap();
        assert!((c.a - 1.442_695_041).abs() < 1e-9);
        assert!((c.a_star - 3.476_059_497).abs() < 1e-9);
        let c = coefficients(2, 3).unwrap();
        assert!((c.a - 1.442_695_041).abs() < 1e-9);
        assert!((c.a_star - 2.466_303_462).abs() < 1e-9);
        assert!(coefficients(2, 2).is_err());
    }

    #[test]
    fn a_never_exceeds_a_star() {
        for r in 2..=10 {
            for k in 2..=10 {
                if r == 2 && k == 2 {
                    continue;
                }
                let c = coefficients(r, k).unwrap();
                assert!(c.a > 0.0 && c.a_star > 0.0);
                assert!(c.a <= c.a_star + 1e-12, "r={r} k={k}");
            }
        }
    }

    #[test]
    fn mapping_decision() {
        let a = compute_threshold_analytic(3, 2, 1e-9).unwrap();
        assert_eq!(check_mapping(&a, 4.95).mapping, Mapping::Factorial);
        let un = check_mapping(&a, 2.47);
        assert_eq!(un.mapping, Mapping::Unmapped);
        assert_eq!(un.validated, Some(true));
        assert_eq!(check_mapping(&a, 3.5).validated, Some(false));
    }

    #[test]
    fn empirical_bisection_small_scale() {
        let cfg = EmpiricalConfig {
            n: 20_000,
            trials: 5,
            tol: 0.02,
            seed: 5,
            bracket: None,
        };
        let e = compute_threshold_empirical(2, 3, &cfg).unwrap();
        assert!(e.hi - e.lo <= 0.02 * e.c + 1e-12);
        assert!((e.c - 3.351).abs() / 3.351 < 0.08, "c = {}", e.c);
    }

    #[test]
    fn empirical_rejects_bad_bracket() {
        let cfg = EmpiricalConfig {
            n: 5_000,
            trials: 3,
            tol: 0.05,
            seed: 1,
            bracket: Some((5.0, 6.0)),
        };
        assert!(matches!(compute_threshold_empirical(2, 3, &cfg), Err(Error::Bracket(_))));
    }
}
