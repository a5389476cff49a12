//! The JSON analysis report: per-cell exponents with bootstrap intervals, the
//! bucket tables they came from, and a provenance block.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::estimate::{
    bootstrap_halfiqr, bucket_series_with, decomposition_residual, AggregateOptions, BucketPoint, Cell, CollapsePoint,
    Coordinate, ExponentFit, GammaSweep, Statistic, TupleField, Weighting,
};
use crate::gap::ContactTriple;
use crate::io::SCHEMA_VERSION;
use crate::row::RowMeta;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub bootstrap: usize,
    pub eps: f64,
    pub tie_threshold: f64,
    pub weighting: Weighting,
    pub input_sha256: String,
}

/// A slope estimate with its bootstrap half-IQR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n_points: usize,
    pub half_iqr: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub valid_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiePct {
    pub estimate: f64,
    pub half_iqr: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell_id: String,
    pub n_grid: Vec<usize>,
    pub tuple_key: Vec<TupleField>,
    pub rows: usize,
    pub excluded_rows: usize,
    /// Grid points with no surviving rows, left out of every fit.
    pub omitted_n: Vec<usize>,
    pub tie_pct: TiePct,
    pub xi_lambda: XiEstimate,
    pub xi_alpha: XiEstimate,
    pub xi_delta: XiEstimate,
    pub decomposition_residual: f64,
    pub buckets: Vec<BucketPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub cells: Vec<CellReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma_sweep: Option<GammaSweep>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub collapse_sweep: Option<Vec<CollapsePoint>>,
}

impl AnalysisReport {
    pub fn new(provenance: Provenance, cells: Vec<CellReport>) -> Self {
        Self { schema_version: SCHEMA_VERSION, provenance, cells, gamma_sweep: None, collapse_sweep: None }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Bucket means, the three slopes, their tuple-bootstrap half-IQRs, and the tie
/// percentage for one cell.
pub fn fit_cell(
    cell: &Cell,
    triples: &[(RowMeta, ContactTriple)],
    opts: AggregateOptions,
    b: usize,
    seed: u64,
) -> Result<CellReport> {
    let series = bucket_series_with(cell, triples, opts.tie_threshold);
    let fits = [
        series.fit(Coordinate::Lambda, opts.weighting)?,
        series.fit(Coordinate::Alpha, opts.weighting)?,
        series.fit(Coordinate::Delta, opts.weighting)?,
    ];
    let xi = |coord: Coordinate, fit: &ExponentFit| -> Result<XiEstimate> {
        let boot = bootstrap_halfiqr(cell, triples, Statistic::Xi(coord), opts, b, seed)?;
        Ok(XiEstimate {
            estimate: fit.slope,
            stderr: fit.stderr,
            n_points: fit.n_points,
            half_iqr: boot.half_iqr,
            b,
            seed,
            valid_draws: boot.valid_draws,
        })
    };
    let ties = bootstrap_halfiqr(cell, triples, Statistic::TieFraction, opts, b, seed)?;
    Ok(CellReport {
        cell_id: cell.id.clone(),
        n_grid: cell.n_grid.clone(),
        tuple_key: cell.tuple_key.clone(),
        rows: series.total_rows(),
        excluded_rows: series.points.iter().map(|p| p.tie_count).sum(),
        omitted_n: series.omitted(),
        tie_pct: TiePct { estimate: 100.0 * series.tie_fraction(), half_iqr: 100.0 * ties.half_iqr, b, seed },
        decomposition_residual: decomposition_residual(&fits[0], &fits[1], &fits[2]),
        xi_lambda: xi(Coordinate::Lambda, &fits[0])?,
        xi_alpha: xi(Coordinate::Alpha, &fits[1])?,
        xi_delta: xi(Coordinate::Delta, &fits[2])?,
        buckets: series.points,
    })
}
