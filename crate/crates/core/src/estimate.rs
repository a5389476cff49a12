//! Exponent estimation: per-cell bucket means of the log contact coordinates, OLS
//! slopes on `log log n`, tuple bootstrap, power-family fits of inverse-temperature
//! vectors, and the γ / collapse sweeps.
//!
//! All reductions run in a fixed order (tuples sorted by key, rows in input order)
//! and every bootstrap draw owns its own ChaCha stream, so results do not depend on
//! how many worker threads evaluate them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{accumulation_scale, ContactTriple, Scale};
use crate::row::{gap_profile, observables, softmax, RowMeta, ScoreRow};
use crate::synth::ScoreFamily;

/// Rows whose `log10 Λ` exceeds this are treated as exact-tie configurations.
pub const DEFAULT_TIE_THRESHOLD: f64 = 5.0;
pub const DEFAULT_BOOTSTRAP: usize = 200;
pub const DEFAULT_GAMMA_GRID: [f64; 8] = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0];
/// The six-point grid shared by the gap-counting and β-vector fits.
pub const SIX_POINT_GRID: [usize; 6] = [64, 128, 256, 512, 768, 1024];

/// Metadata field that participates in the bootstrap unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TupleField {
    Layer,
    Head,
    SeqId,
    QueryPos,
}

impl std::str::FromStr for TupleField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "layer" => Ok(TupleField::Layer),
            "head" => Ok(TupleField::Head),
            "seq_id" | "seq" | "seed" => Ok(TupleField::SeqId),
            "query_pos" => Ok(TupleField::QueryPos),
            other => Err(Error::config(format!("unknown tuple field {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum KeyPart {
    Int(u64),
    Str(String),
}

/// One experimental condition with its context-length grid and bootstrap unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: String,
    pub n_grid: Vec<usize>,
    pub tuple_key: Vec<TupleField>,
}

impl Cell {
    pub fn new(id: impl Into<String>, n_grid: Vec<usize>, tuple_key: Vec<TupleField>) -> Result<Self> {
        let cell = Self { id: id.into(), n_grid, tuple_key };
        if cell.n_grid.len() < 2 {
            return Err(Error::config(format!("cell {} needs at least two grid points", cell.id)));
        }
        if cell.n_grid.iter().any(|&n| n < 2) || cell.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(format!("cell {} grid must be strictly ascending with n >= 2", cell.id)));
        }
        Ok(cell)
    }

    fn key_of(&self, meta: &RowMeta) -> Vec<KeyPart> {
        self.tuple_key
            .iter()
            .map(|f| match f {
                TupleField::Layer => KeyPart::Int(meta.layer.into()),
                TupleField::Head => KeyPart::Int(meta.head.into()),
                TupleField::SeqId => KeyPart::Str(meta.seq_id.clone()),
                TupleField::QueryPos => KeyPart::Int(meta.query_pos as u64),
            })
            .collect()
    }
}

/// How bucket means enter the slope fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Ordinary least squares over buckets.
    #[default]
    Plain,
    /// Weighted least squares with the bucket's surviving row count as weight.
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    Lambda,
    Alpha,
    Delta,
}

impl Coordinate {
    pub const ALL: [Coordinate; 3] = [Coordinate::Lambda, Coordinate::Alpha, Coordinate::Delta];
}

/// True when the row is dropped from the bucket means.
pub fn is_excluded(triple: &ContactTriple, tie_threshold: f64) -> bool {
    match triple.lambda {
        Scale::Finite(l) => l.log10() > tie_threshold,
        Scale::Infinite | Scale::Degenerate => true,
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    sum_log_lambda: f64,
    sum_log_alpha: f64,
    sum_log_delta: f64,
    count: usize,
    ties: usize,
}

impl Acc {
    fn add_scaled(&mut self, other: &Acc, k: usize) {
        let kf = k as f64;
        self.sum_log_lambda += kf * other.sum_log_lambda;
        self.sum_log_alpha += kf * other.sum_log_alpha;
        self.sum_log_delta += kf * other.sum_log_delta;
        self.count += k * other.count;
        self.ties += k * other.ties;
    }
}

/// Per-tuple, per-grid-point sums for one cell.
struct CellTable {
    grid: Vec<usize>,
    tuples: Vec<Vec<Acc>>,
}

impl CellTable {
    fn build(cell: &Cell, triples: &[(RowMeta, ContactTriple)], tie_threshold: f64) -> Self {
        let mut by_key: BTreeMap<Vec<KeyPart>, Vec<Acc>> = BTreeMap::new();
        for (meta, triple) in triples {
            if meta.cell_id != cell.id {
                continue;
            }
            let Ok(slot) = cell.n_grid.binary_search(&meta.n) else {
                continue;
            };
            let accs = by_key.entry(cell.key_of(meta)).or_insert_with(|| vec![Acc::default(); cell.n_grid.len()]);
            let acc = &mut accs[slot];
            match triple.finite() {
                Some((l, a, d)) if !is_excluded(triple, tie_threshold) => {
                    acc.sum_log_lambda += l.ln();
                    acc.sum_log_alpha += a.ln();
                    acc.sum_log_delta += d.ln();
                    acc.count += 1;
                }
                _ => acc.ties += 1,
            }
        }
        Self { grid: cell.n_grid.clone(), tuples: by_key.into_values().collect() }
    }

    fn series(&self, multiplicity: &[usize]) -> BucketSeries {
        let points = self
            .grid
            .iter()
            .enumerate()
            .map(|(slot, &n)| {
                let mut acc = Acc::default();
                for (t, &k) in self.tuples.iter().zip(multiplicity) {
                    if k > 0 {
                        acc.add_scaled(&t[slot], k);
                    }
                }
                let mean = |s: f64| (acc.count > 0).then(|| s / acc.count as f64);
                BucketPoint {
                    n,
                    count: acc.count,
                    tie_count: acc.ties,
                    mean_log_lambda: mean(acc.sum_log_lambda),
                    mean_log_alpha: mean(acc.sum_log_alpha),
                    mean_log_delta: mean(acc.sum_log_delta),
                }
            })
            .collect();
        BucketSeries { points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketPoint {
    pub n: usize,
    /// Surviving (non-tied) rows.
    pub count: usize,
    /// Rows excluded as ties (exact or above the threshold).
    pub tie_count: usize,
    pub mean_log_lambda: Option<f64>,
    pub mean_log_alpha: Option<f64>,
    pub mean_log_delta: Option<f64>,
}

impl BucketPoint {
    pub fn mean(&self, coord: Coordinate) -> Option<f64> {
        match coord {
            Coordinate::Lambda => self.mean_log_lambda,
            Coordinate::Alpha => self.mean_log_alpha,
            Coordinate::Delta => self.mean_log_delta,
        }
    }
}

/// Bucket means over a cell's grid. Grid points without survivors keep their counts
/// but carry no means and are listed by [`BucketSeries::omitted`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSeries {
    pub points: Vec<BucketPoint>,
}

impl BucketSeries {
    /// Grid points dropped from the fit because every row there was excluded.
    pub fn omitted(&self) -> Vec<usize> {
        self.points.iter().filter(|p| p.count == 0).map(|p| p.n).collect()
    }

    pub fn total_rows(&self) -> usize {
        self.points.iter().map(|p| p.count + p.tie_count).sum()
    }

    pub fn tie_fraction(&self) -> f64 {
        let ties: usize = self.points.iter().map(|p| p.tie_count).sum();
        match self.total_rows() {
            0 => 0.0,
            total => ties as f64 / total as f64,
        }
    }

    pub fn fit(&self, coord: Coordinate, weighting: Weighting) -> Result<ExponentFit> {
        let pts: Vec<(f64, f64, f64)> = self
            .points
            .iter()
            .filter_map(|p| {
                let y = p.mean(coord)?;
                let w = match weighting {
                    Weighting::Plain => 1.0,
                    Weighting::Count => p.count as f64,
                };
                Some(((p.n as f64).ln().ln(), y, w))
            })
            .collect();
        weighted_ols(&pts)
    }
}

pub fn bucket_series(cell: &Cell, triples: &[(RowMeta, ContactTriple)]) -> BucketSeries {
    bucket_series_with(cell, triples, DEFAULT_TIE_THRESHOLD)
}

pub fn bucket_series_with(cell: &Cell, triples: &[(RowMeta, ContactTriple)], tie_threshold: f64) -> BucketSeries {
    let table = CellTable::build(cell, triples, tie_threshold);
    table.series(&vec![1; table.tuples.len()])
}

/// A least-squares slope `ξ̂` on `log log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; 0 when only two points are available.
    pub stderr: f64,
    pub n_points: usize,
}

/// Weighted least squares of `y` on `x` over `(x, y, w)` triples.
pub fn weighted_ols(points: &[(f64, f64, f64)]) -> Result<ExponentFit> {
    let pts: Vec<_> = points.iter().copied().filter(|&(_, _, w)| w > 0.0).collect();
    if pts.len() < 2 {
        return Err(Error::estimation(format!("need at least 2 fit points, got {}", pts.len())));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::estimation("fit points share a single abscissa"));
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let k = pts.len();
    let stderr = if k > 2 {
        let ssr: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
        (ssr / (k as f64 - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ExponentFit { slope, intercept, stderr, n_points: k })
}

/// OLS of `y` on `log log n` over `(n, y)` points.
pub fn ols_loglog(points: &[(usize, f64)]) -> Result<ExponentFit> {
    if let Some(&(n, _)) = points.iter().find(|&&(n, _)| n < 2) {
        return Err(Error::estimation(format!("log log n undefined at n = {n}")));
    }
    let pts: Vec<_> = points.iter().map(|&(n, y)| ((n as f64).ln().ln(), y, 1.0)).collect();
    weighted_ols(&pts)
}

/// `ξ̂_Λ - (ξ̂_α - ξ̂_Δ + 1)`.
pub fn decomposition_residual(lambda: &ExponentFit, alpha: &ExponentFit, delta: &ExponentFit) -> f64 {
    lambda.slope - (alpha.slope - delta.slope + 1.0)
}

/// Linear-interpolation (type 7) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let h = (len - 1) as f64 * q.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(len - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// `(Q3 - Q1) / 2` with type-7 quartiles.
pub fn half_iqr(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    0.5 * (quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25))
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Random stream for one bootstrap draw: ChaCha8 keyed by `seed`, stream = draw index.
pub fn draw_rng(seed: u64, draw: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Xi(Coordinate),
    TieFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub half_iqr: f64,
    pub point_estimate: f64,
    /// Draws that produced a statistic (a draw can lose all rows at too many grid points).
    pub valid_draws: usize,
}

impl BootstrapResult {
    /// Half-IQR relative to the point estimate (0 when both vanish).
    pub fn relative_half_iqr(&self) -> f64 {
        if self.half_iqr == 0.0 {
            0.0
        } else {
            self.half_iqr / self.point_estimate.abs()
        }
    }
}

fn evaluate(series: &BucketSeries, statistic: Statistic, weighting: Weighting) -> Option<f64> {
    match statistic {
        Statistic::Xi(coord) => series.fit(coord, weighting).ok().map(|f| f.slope),
        Statistic::TieFraction => (series.total_rows() > 0).then(|| series.tie_fraction()),
    }
}

/// Options shared by the aggregation entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateOptions {
    pub tie_threshold: f64,
    pub weighting: Weighting,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        Self { tie_threshold: DEFAULT_TIE_THRESHOLD, weighting: Weighting::Plain }
    }
}

/// Tuple bootstrap: resample the cell's tuples with replacement, recompute the bucket
/// means from the rows of the drawn tuples (a tuple drawn k times counts k times),
/// refit, and report half the IQR of the `b` replicate statistics.
pub fn bootstrap_halfiqr(
    cell: &Cell,
    triples: &[(RowMeta, ContactTriple)],
    statistic: Statistic,
    opts: AggregateOptions,
    b: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if b == 0 {
        return Err(Error::estimation("bootstrap needs B >= 1"));
    }
    let table = CellTable::build(cell, triples, opts.tie_threshold);
    let t = table.tuples.len();
    if t == 0 {
        return Err(Error::estimation(format!("cell {} has no rows on its grid", cell.id)));
    }
    let point = evaluate(&table.series(&vec![1; t]), statistic, opts.weighting)
        .ok_or_else(|| Error::estimation(format!("cell {}: statistic undefined on the full sample", cell.id)))?;

    let replicates: Vec<Option<f64>> = (0..b)
        .into_par_iter()
        .map(|draw| {
            let mut rng = draw_rng(seed, draw);
            let mut multiplicity = vec![0usize; t];
            for _ in 0..t {
                multiplicity[rng.random_range(0..t)] += 1;
            }
            evaluate(&table.series(&multiplicity), statistic, opts.weighting)
        })
        .collect();
    let values: Vec<f64> = replicates.into_iter().flatten().collect();
    if values.is_empty() {
        return Err(Error::estimation(format!("cell {}: no bootstrap draw produced a fit", cell.id)));
    }
    Ok(BootstrapResult { b, seed, half_iqr: half_iqr(&values), point_estimate: point, valid_draws: values.len() })
}

/// An inverse-temperature vector indexed by context length, `values[n - 1] = β_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCurve {
    pub values: Vec<f64>,
}

impl BetaCurve {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self { values: (1..=len).map(f).collect() }
    }

    pub fn get(&self, n: usize) -> Result<f64> {
        n.checked_sub(1)
            .and_then(|i| self.values.get(i).copied())
            .ok_or_else(|| Error::estimation(format!("beta vector has no entry for n = {n}")))
    }

    fn domain_values(&self, domain: &[usize]) -> Result<Vec<(f64, f64)>> {
        if domain.is_empty() {
            return Err(Error::estimation("empty fit domain"));
        }
        domain.iter().map(|&n| Ok(((n as f64).ln(), self.get(n)?))).collect()
    }
}

/// `n ∈ [lo, hi]` as a fit domain.
pub fn domain_range(lo: usize, hi: usize) -> Vec<usize> {
    (lo..=hi).collect()
}

/// `ξ` grid `lo, lo + step, ..., hi`, with values rounded to absorb step drift.
pub fn xi_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let k = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=k).map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9).collect()
}

pub fn default_xi_grid() -> Vec<f64> {
    xi_grid(0.0, 4.0, 0.05)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerGridFit {
    pub xi_star: f64,
    pub a1: f64,
    /// Intercept; 0 for the bias-free fit.
    pub a2: f64,
    /// `(ξ, per-point MSE)` along the grid.
    pub mse_curve: Vec<(f64, f64)>,
}

/// Least-squares `a₁` (and `a₂`) at one `ξ`; returns `(a1, a2, mse)`.
fn power_fit_at(points: &[(f64, f64)], xi: f64, bias_free: bool) -> (f64, f64, f64) {
    let xs: Vec<f64> = points.iter().map(|&(l, _)| l.powf(xi)).collect();
    let k = points.len() as f64;
    let (a1, a2) = if bias_free {
        let sxy: f64 = xs.iter().zip(points).map(|(x, p)| x * p.1).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        (if sxx > 0.0 { sxy / sxx } else { 0.0 }, 0.0)
    } else {
        let mx = xs.iter().sum::<f64>() / k;
        let my = points.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
        // constant regressor (ξ = 0): the intercept alone carries the level
        let a1 = if sxx > 1e-300 { sxy / sxx } else { 0.0 };
        (a1, my - a1 * mx)
    };
    let mse = xs.iter().zip(points).map(|(x, p)| (p.1 - a1 * x - a2).powi(2)).sum::<f64>() / k;
    (a1, a2, mse)
}

/// Grid search over `ξ` for `β_n ≈ a₁ (log n)^ξ (+ a₂)`, in value space.
/// Ties on the grid resolve to the smallest `ξ`.
pub fn power_fit_grid(beta: &BetaCurve, domain: &[usize], grid: &[f64], bias_free: bool) -> Result<PowerGridFit> {
    let points = beta.domain_values(domain)?;
    if grid.is_empty() {
        return Err(Error::estimation("empty xi grid"));
    }
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let mut mse_curve = Vec::with_capacity(grid.len());
    for &xi in grid {
        let (a1, a2, mse) = power_fit_at(&points, xi, bias_free);
        mse_curve.push((xi, mse));
        if best.is_none_or(|b| mse < b.3) {
            best = Some((xi, a1, a2, mse));
        }
    }
    let (xi_star, a1, a2, _) = best.expect("grid is non-empty");
    Ok(PowerGridFit { xi_star, a1, a2, mse_curve })
}

/// Continuous `ξ̂`: OLS slope of `log β_n` on `log log n` at the given points.
pub fn power_fit_ols(beta: &BetaCurve, points: &[usize]) -> Result<ExponentFit> {
    let pts = points
        .iter()
        .map(|&n| {
            let b = beta.get(n)?;
            if b <= 0.0 {
                return Err(Error::estimation(format!("beta_{n} = {b} is not positive")));
            }
            Ok((n, b.ln()))
        })
        .collect::<Result<Vec<_>>>()?;
    ols_loglog(&pts)
}

/// Residual bootstrap of the bias-free fit's per-point MSE at a fixed `ξ`.
pub fn residual_bootstrap_mse(beta: &BetaCurve, xi: f64, domain: &[usize], b: usize, seed: u64) -> Result<BootstrapResult> {
    if b == 0 {
        return Err(Error::estimation("bootstrap needs B >= 1"));
    }
    let points = beta.domain_values(domain)?;
    let (a1, _, mse) = power_fit_at(&points, xi, true);
    let fitted: Vec<f64> = points.iter().map(|&(l, _)| a1 * l.powf(xi)).collect();
    let residuals: Vec<f64> = points.iter().zip(&fitted).map(|(p, f)| p.1 - f).collect();
    let k = points.len();

    let values: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|draw| {
            let mut rng = draw_rng(seed, draw);
            let resampled: Vec<(f64, f64)> = points
                .iter()
                .zip(&fitted)
                .map(|(p, f)| (p.0, f + residuals[rng.random_range(0..k)]))
                .collect();
            power_fit_at(&resampled, xi, true).2
        })
        .collect();
    Ok(BootstrapResult { b, seed, half_iqr: half_iqr(&values), point_estimate: mse, valid_draws: b })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub gamma: f64,
    pub median_p_star: f64,
    /// Fraction of rows with `p* ≤ 1 / log n`.
    pub frac_below_inv_log_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSweep {
    pub rows_used: usize,
    pub rows_excluded: usize,
    pub points: Vec<GammaPoint>,
}

/// `p* = 1/Z` at `β = γΛ` for each γ, per non-tied row (in row order).
pub fn p_star_table(rows: &[ScoreRow], gammas: &[f64]) -> Vec<Option<(usize, Vec<f64>)>> {
    rows.par_iter()
        .map(|row| {
            let profile = gap_profile(row);
            let lambda = accumulation_scale(&profile).finite()?;
            let ps = gammas.iter().map(|g| (-profile.log_partition(g * lambda)).exp()).collect();
            Some((row.len(), ps))
        })
        .collect()
}

/// Median `p*` and the fraction below `1/log n` at `β = γΛ`, tied rows excluded.
pub fn gamma_sweep(rows: &[ScoreRow], gammas: &[f64]) -> Result<GammaSweep> {
    if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::domain(format!("gamma must be finite and >= 0, got {g}")));
    }
    let table: Vec<(usize, Vec<f64>)> = p_star_table(rows, gammas).into_iter().flatten().collect();
    if table.is_empty() {
        return Err(Error::estimation("gamma sweep has no non-tied rows"));
    }
    let points = gammas
        .iter()
        .enumerate()
        .map(|(i, &gamma)| {
            let ps: Vec<f64> = table.iter().map(|(_, p)| p[i]).collect();
            let below = table.iter().filter(|(n, p)| p[i] <= 1.0 / (*n as f64).ln()).count();
            GammaPoint { gamma, median_p_star: median(&ps), frac_below_inv_log_n: below as f64 / table.len() as f64 }
        })
        .collect();
    Ok(GammaSweep { rows_used: table.len(), rows_excluded: rows.len() - table.len(), points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub n: usize,
    pub s: f64,
    pub beta: f64,
    pub lambda: f64,
    pub entropy: f64,
    pub top_two_gap: f64,
    pub rank_gap: f64,
    pub z: f64,
}

/// Observables along `β = sΛ_n` for every `(n, s)`, ordered by `n` then `s`.
pub fn collapse_sweep(family: &dyn ScoreFamily, s_values: &[f64], n_grid: &[usize]) -> Result<Vec<CollapsePoint>> {
    let per_n: Vec<Vec<CollapsePoint>> = n_grid
        .par_iter()
        .map(|&n| {
            let row = family.row(n)?;
            let lambda = accumulation_scale(&gap_profile(&row)).finite().ok_or_else(|| {
                Error::estimation(format!("{} row at n = {n} has no finite accumulation scale", family.name()))
            })?;
            s_values
                .iter()
                .map(|&s| {
                    let beta = s * lambda;
                    let sm = softmax(&row, beta)?;
                    let o = observables(&sm);
                    Ok(CollapsePoint {
                        n,
                        s,
                        beta,
                        lambda,
                        entropy: o.entropy,
                        top_two_gap: o.top_two_gap,
                        rank_gap: o.rank_gap,
                        z: sm.z,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_n.into_iter().flatten().collect())
}
