//! Seeded sweeps over `n`, CSV output, and growth-law fits of the round count.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::peeling::parallel_peel;
use crate::random::{mix_seed, sample_binomial_hypergraph, ModelParams};

pub const CSV_HEADER: [&str; 10] = [
    "r",
    "k",
    "c",
    "n",
    "trial",
    "seed",
    "rounds",
    "core_vertices",
    "core_edges",
    "max_component_after_I",
];
pub const CSV_FOOTER: &str = "#done";

pub const DEFAULT_I_PROBE: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub r: usize,
    pub k: usize,
    pub c: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub points: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub i_probe: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 10 || self.n_max < self.n_min {
            return Err(Error::InvalidParameter(format!(
                "need 10 <= n_min <= n_max, got [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        if self.points < 3 {
            return Err(Error::InvalidParameter("need at least 3 grid points".into()));
        }
        if self.trials < 1 {
            return Err(Error::InvalidParameter("need at least 1 trial".into()));
        }
        Ok(())
    }

    /// Geometric grid from `n_min` to `n_max`, rounded and deduplicated.
    /// Powers of two map to powers of two.
    pub fn n_grid(&self) -> Vec<usize> {
        let ratio = self.n_max as f64 / self.n_min as f64;
        let mut grid: Vec<usize> = (0..self.points)
            .map(|i| {
                let e = i as f64 / (self.points - 1) as f64;
                (self.n_min as f64 * ratio.powf(e)).round() as usize
            })
            .collect();
        grid.dedup();
        grid
    }
}

/// Seed of trial `trial` at size `n`: `mix_seed(mix_seed(master, n), trial)`.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    mix_seed(mix_seed(master, n as u64), trial as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub r: usize,
    pub k: usize,
    pub c: f64,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub rounds: usize,
    pub core_vertices: usize,
    pub core_edges: usize,
    pub max_component_after_i: usize,
    /// Vertices removed per round. Not written to CSV.
    pub rounds_removed_counts: Vec<usize>,
}

/// Sample, peel, and measure one instance.
pub fn run_trial(params: &ModelParams, trial: usize, i_probe: usize) -> Result<TrialRecord> {
    let h = sample_binomial_hypergraph(params)?;
    let trace = parallel_peel(&h, params.k);
    let alive = trace.alive_after(i_probe);
    let max_component = h.induced_component_sizes(&alive).into_iter().max().unwrap_or(0);
    Ok(TrialRecord {
        r: params.r,
        k: params.k,
        c: params.c,
        n: params.n,
        trial,
        seed: params.seed,
        rounds: trace.s(),
        core_vertices: trace.core_vertices.len(),
        core_edges: trace.core_edges.len(),
        max_component_after_i: max_component,
        rounds_removed_counts: trace.rounds.iter().map(|r| r.removed_vertices.len()).collect(),
    })
}

/// Runs every `(n, trial)` pair of the sweep. Output is ordered by
/// `(n, trial)` and identical to a serial run.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = config
        .n_grid()
        .into_iter()
        .flat_map(|n| (0..config.trials).map(move |t| (n, t)))
        .collect();
    jobs.into_par_iter()
        .map(|(n, trial)| {
            let params = ModelParams {
                r: config.r,
                k: config.k,
                c: config.c,
                n,
                seed: trial_seed(config.master_seed, n, trial),
            };
            run_trial(&params, trial, config.i_probe)
        })
        .collect()
}

pub fn write_csv<W: Write>(w: W, records: &[TrialRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(CSV_HEADER)?;
    for rec in records {
        writer.write_record([
            rec.r.to_string(),
            rec.k.to_string(),
            rec.c.to_string(),
            rec.n.to_string(),
            rec.trial.to_string(),
            rec.seed.to_string(),
            rec.rounds.to_string(),
            rec.core_vertices.to_string(),
            rec.core_edges.to_string(),
            rec.max_component_after_i.to_string(),
        ])?;
    }
    writer.flush()?;
    let mut inner = writer
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    writeln!(inner, "{CSV_FOOTER}")?;
    inner.flush()?;
    Ok(())
}

/// Runs the sweep and writes it to `path`. The `#done` footer is written last,
/// so a file without it is from an interrupted run.
pub fn sweep<P: AsRef<Path>>(config: &SweepConfig, path: P) -> Result<Vec<TrialRecord>> {
    let records = run_sweep(config)?;
    write_csv(BufWriter::new(File::create(path)?), &records)?;
    Ok(records)
}

/// Parses a sweep CSV. Files missing the `#done` footer are rejected.
pub fn read_csv<R: Read>(mut reader: R) -> Result<Vec<TrialRecord>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    if text.lines().rev().find(|l| !l.trim().is_empty()).map(str::trim) != Some(CSV_FOOTER) {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: "missing `#done` footer; the sweep did not finish".into(),
        });
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |j: usize| -> Result<&str> {
            row.get(j).ok_or_else(|| Error::Parse {
                line,
                msg: format!("missing column {}", CSV_HEADER[j]),
            })
        };
        let int = |j: usize| -> Result<u64> {
            field(j)?.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad integer in column {}", CSV_HEADER[j]),
            })
        };
        out.push(TrialRecord {
            r: int(0)? as usize,
            k: int(1)? as usize,
            c: field(2)?.parse().map_err(|_| Error::Parse {
                line,
                msg: "bad float in column c".into(),
            })?,
            n: int(3)? as usize,
            trial: int(4)? as usize,
            seed: int(5)?,
            rounds: int(6)? as usize,
            core_vertices: int(7)? as usize,
            core_edges: int(8)? as usize,
            max_component_after_i: int(9)? as usize,
            rounds_removed_counts: Vec::new(),
        });
    }
    Ok(out)
}

pub fn read_csv_file<P: AsRef<Path>>(path: P) -> Result<Vec<TrialRecord>> {
    read_csv(File::open(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `s = slope * ln ln n + intercept`
    Loglog,
    /// `s = slope * ln n + intercept`
    Log,
}

impl GrowthModel {
    pub fn regressor(self, n: usize) -> f64 {
        match self {
            GrowthModel::Loglog => (n as f64).ln().ln(),
            GrowthModel::Log => (n as f64).ln(),
        }
    }
}

/// Mean round count at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub n: usize,
    pub trials: usize,
    pub mean_rounds: f64,
    /// Standard error of the mean; 0 with a single trial.
    pub std_err: f64,
}

/// Per-`n` means of the round count, in increasing `n`.
pub fn growth_points(records: &[TrialRecord]) -> Vec<GrowthPoint> {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let s: Vec<f64> = records
                .iter()
                .filter(|r| r.n == n)
                .map(|r| r.rounds as f64)
                .collect();
            let m = s.len() as f64;
            let mean = s.iter().sum::<f64>() / m;
            let std_err = if s.len() > 1 {
                let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
                (var / m).sqrt()
            } else {
                0.0
            };
            GrowthPoint {
                n,
                trials: s.len(),
                mean_rounds: mean,
                std_err,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub model: GrowthModel,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Pearson correlation of regressor and mean rounds; 0 if the means are constant.
    pub correlation: f64,
    pub points: Vec<GrowthPoint>,
}

/// Least-squares fit of mean round count against `ln ln n` or `ln n`.
pub fn fit_growth(records: &[TrialRecord], model: GrowthModel) -> Result<FitResult> {
    fit_growth_points(growth_points(records), model)
}

pub fn fit_growth_points(points: Vec<GrowthPoint>, model: GrowthModel) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 distinct n, got {}",
            points.len()
        )));
    }
    if model == GrowthModel::Loglog {
        if let Some(p) = points.iter().find(|p| p.n < 16) {
            return Err(Error::DegenerateFit(format!(
                "loglog fit needs n >= 16, got n = {}",
                p.n
            )));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| model.regressor(p.n)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_rounds).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("regressor has zero variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let correlation = if syy > 0.0 { sxy / (sxx * syy).sqrt() } else { 0.0 };
    Ok(FitResult {
        model,
        slope,
        intercept,
        residual_rms,
        correlation,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentRow {
    pub n: usize,
    pub bound: f64,
    pub largest: usize,
    pub fraction_within: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentCheck {
    pub pass: bool,
    pub c_const: f64,
    pub rows: Vec<ComponentRow>,
}

/// Fraction of trials required within the bound at every `n`.
pub const COMPONENT_PASS_FRACTION: f64 = 0.95;

/// Passes iff at every `n`, at least 95% of trials have
/// `max_component_after_I <= c_const * ln n`.
pub fn component_growth_check(records: &[TrialRecord], c_const: f64) -> ComponentCheck {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let rows: Vec<ComponentRow> = ns
        .into_iter()
        .map(|n| {
            let bound = c_const * (n as f64).ln();
            let at_n: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
            let within = at_n
                .iter()
                .filter(|r| r.max_component_after_i as f64 <= bound)
                .count();
            ComponentRow {
                n,
                bound,
                largest: at_n.iter().map(|r| r.max_component_after_i).max().unwrap_or(0),
                fraction_within: within as f64 / at_n.len() as f64,
            }
        })
        .collect();
    ComponentCheck {
        pass: rows.iter().all(|r| r.fraction_within >= COMPONENT_PASS_FRACTION),
        c_const,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(ns: &[usize], f: impl Fn(f64) -> f64) -> Vec<GrowthPoint> {
        ns.iter()
            .map(|&n| GrowthPoint {
                n,
                trials: 1,
                mean_rounds: f(n as f64),
                std_err: 0.0,
            })
            .collect()
    }

    fn record(n: usize, rounds: usize, comp: usize) -> TrialRecord {
        TrialRecord {
            r: 3,
            k: 2,
            c: 1.0,
            n,
            trial: 0,
            seed: 0,
            rounds,
            core_vertices: 0,
            core_edges: 0,
            max_component_after_i: comp,
            rounds_removed_counts: Vec::new(),
        }
    }

    #[test]
    fn fit_recovers_exact_loglog() {
        let pts = synthetic(&[1 << 12, 1 << 16, 1 << 20], |n| 2.0 * n.ln().ln() + 1.0);
        let fit = fit_growth_points(pts, GrowthModel::Loglog).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
        assert!((fit.intercept - 1.0).abs() < 1e-9);
        assert!(fit.residual_rms < 1e-9);
        assert!((fit.correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_exact_log() {
        let pts = synthetic(&[100, 1000, 10_000, 100_000], |n| 0.5 * n.ln());
        let fit = fit_growth_points(pts, GrowthModel::Log).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_degenerate_designs() {
        let two = synthetic(&[100, 1000], |n| n.ln());
        assert!(matches!(fit_growth_points(two, GrowthModel::Log), Err(Error::DegenerateFit(_))));
        let small = synthetic(&[10, 100, 1000], |n| n.ln());
        assert!(fit_growth_points(small, GrowthModel::Loglog).is_err());
        let same = synthetic(&[100, 100, 100], |n| n.ln());
        assert!(fit_growth_points(same, GrowthModel::Log).is_err());
    }

    #[test]
    fn means_and_standard_errors() {
        let recs = vec![record(100, 2, 0), record(100, 4, 0), record(200, 3, 0)];
        let pts = growth_points(&recs);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].mean_rounds, 3.0);
        assert!((pts[0].std_err - 1.0).abs() < 1e-12);
        assert_eq!(pts[1].std_err, 0.0);
    }

    #[test]
    fn component_check_cases() {
        let zeros: Vec<TrialRecord> = [100, 1000, 10_000].iter().map(|&n| record(n, 1, 0)).collect();
        assert!(component_growth_check(&zeros, 0.1).pass);
        let giant: Vec<TrialRecord> = [100, 1000, 10_000].iter().map(|&n| record(n, 1, n)).collect();
        assert!(!component_growth_check(&giant, 10.0).pass);
    }

    #[test]
    fn grid_is_geometric() {
        let cfg = SweepConfig {
            r: 3,
            k: 2,
            c: 1.0,
            n_min: 1 << 12,
            n_max: 1 << 22,
            points: 11,
            trials: 1,
            master_seed: 0,
            i_probe: 30,
        };
        let grid = cfg.n_grid();
        assert_eq!(grid, (12..=22).map(|e| 1usize << e).collect::<Vec<_>>());
    }

    #[test]
    fn trial_edge_cases() {
        let empty = ModelParams { r: 3, k: 2, c: 0.0, n: 50, seed: 1 };
        let rec = run_trial(&empty, 0, 30).unwrap();
        assert_eq!(rec.rounds, 1);
        assert_eq!(rec.core_vertices, 0);
        assert_eq!(rec.max_component_after_i, 0);
        assert_eq!(rec.rounds_removed_counts, vec![50]);

        let full = ModelParams { r: 2, k: 2, c: 5.0, n: 5, seed: 1 };
        let rec = run_trial(&full, 0, 30).unwrap();
        assert_eq!(rec.rounds, 0);
        assert_eq!(rec.core_vertices, 5);
        assert_eq!(rec.core_edges, 10);
        assert_eq!(rec.max_component_after_i, 5);

        let p = ModelParams { r: 3, k: 2, c: 3.0, n: 3000, seed: 9 };
        assert_eq!(run_trial(&p, 4, 30).unwrap(), run_trial(&p, 4, 30).unwrap());
    }
}
