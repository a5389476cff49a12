//! Score rows, the gap-counting profile, softmax, and the collapse observables.
//!
//! Every quantity here depends on a row only through its competitor gaps
//! `z* - z_j`, so all of them are invariant under a common shift of the scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance of a single attention row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct RowMeta {
    pub cell_id: String,
    pub layer: u32,
    pub head: u32,
    pub seq_id: String,
    pub n: usize,
    pub query_pos: usize,
}

impl RowMeta {
    pub fn new(cell_id: impl Into<String>, layer: u32, head: u32, seq_id: impl Into<String>, n: usize, query_pos: usize) -> Self {
        Self { cell_id: cell_id.into(), layer, head, seq_id: seq_id.into(), n, query_pos }
    }

    /// Short human-readable identifier used in error messages.
    pub fn label(&self) -> String {
        format!(
            "cell={} layer={} head={} seq={} n={} query_pos={}",
            self.cell_id, self.layer, self.head, self.seq_id, self.n, self.query_pos
        )
    }
}

/// One attention row: `n` finite pre-softmax scores plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    scores: Vec<f64>,
    meta: RowMeta,
}

impl ScoreRow {
    /// Validates length and finiteness. `meta.n` must equal `scores.len()`.
    pub fn new(scores: Vec<f64>, meta: RowMeta) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidRow { row: meta.label(), reason: "empty score vector".into() });
        }
        if meta.n != scores.len() {
            return Err(Error::InvalidRow {
                row: meta.label(),
                reason: format!("meta.n = {} but {} scores supplied", meta.n, scores.len()),
            });
        }
        if let Some(j) = scores.iter().position(|z| !z.is_finite()) {
            return Err(Error::InvalidRow {
                row: meta.label(),
                reason: format!("non-finite score {} at index {j}", scores[j]),
            });
        }
        Ok(Self { scores, meta })
    }

    /// Row with anonymous metadata (`n` filled in from the length).
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        let meta = RowMeta { n: scores.len(), ..RowMeta::default() };
        Self::new(scores, meta)
    }

    /// Widens single-precision captures; all arithmetic is done in `f64`.
    pub fn from_f32(scores: &[f32], meta: RowMeta) -> Result<Self> {
        Self::new(scores.iter().map(|&z| f64::from(z)).collect(), meta)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn meta(&self) -> &RowMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn max_score(&self) -> f64 {
        self.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Competitor gaps `z* - z_j` in row order (the winner has gap 0).
    pub fn gaps(&self) -> Vec<f64> {
        let z_star = self.max_score();
        self.scores.iter().map(|&z| z_star - z).collect()
    }

    pub fn into_parts(self) -> (Vec<f64>, RowMeta) {
        (self.scores, self.meta)
    }
}

/// Relative width below which two positive gaps are treated as the same jump point.
pub const GAP_MERGE_REL_TOL: f64 = 1e-12;

/// The discrete carrier of the cumulative gap-counting function `N_n(t)`.
///
/// `gaps` holds the distinct positive competitor gaps in ascending order and
/// `cum_counts[i] = N_n(gaps[i])`. Below the first gap `N_n` equals `n_max`,
/// the number of scores tied at the maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    pub z_star: f64,
    pub gaps: Vec<f64>,
    pub cum_counts: Vec<usize>,
    pub n_max: usize,
    pub n: usize,
}

/// Builds the gap profile with exact tie detection (`tie_abs_tol = 0`).
pub fn gap_profile(row: &ScoreRow) -> GapProfile {
    gap_profile_with_tol(row, 0.0)
}

/// Builds the gap profile, counting any score within `tie_abs_tol` of the maximum as tied.
pub fn gap_profile_with_tol(row: &ScoreRow, tie_abs_tol: f64) -> GapProfile {
    let tie_abs_tol = tie_abs_tol.max(0.0);
    let z_star = row.max_score();
    let mut positive: Vec<f64> = Vec::with_capacity(row.len());
    let mut n_max = 0usize;
    for &z in row.scores() {
        let gap = z_star - z;
        if gap <= tie_abs_tol {
            n_max += 1;
        } else {
            positive.push(gap);
        }
    }
    positive.sort_unstable_by(f64::total_cmp);

    let merge_tol = GAP_MERGE_REL_TOL * z_star.abs().max(1.0);
    let mut gaps = Vec::new();
    let mut cum_counts = Vec::new();
    let mut count = n_max;
    let mut group_start = f64::NAN;
    for g in positive {
        count += 1;
        if !gaps.is_empty() && g - group_start <= merge_tol {
            // extend the current jump; keep its largest member so N(u) is a literal count
            *gaps.last_mut().unwrap() = g;
            *cum_counts.last_mut().unwrap() = count;
        } else {
            group_start = g;
            gaps.push(g);
            cum_counts.push(count);
        }
    }

    GapProfile { z_star, gaps, cum_counts, n_max, n: row.len() }
}

impl GapProfile {
    pub fn is_tied(&self) -> bool {
        self.n_max >= 2
    }

    /// True for a row with no competitors at all (n = 1).
    pub fn is_degenerate(&self) -> bool {
        self.n <= 1
    }

    /// `(u_i, N_n(u_i))` pairs in ascending gap order.
    pub fn levels(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.gaps.iter().copied().zip(self.cum_counts.iter().copied())
    }

    /// `(u_i, multiplicity of the jump at u_i)` pairs.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        let mut prev = self.n_max;
        self.levels().map(move |(u, c)| {
            let m = c - prev;
            prev = c;
            (u, m)
        })
    }

    fn count_at(&self, t: f64) -> usize {
        let idx = self.gaps.partition_point(|&u| u <= t);
        if idx == 0 {
            self.n_max
        } else {
            self.cum_counts[idx - 1]
        }
    }

    /// `log Z(β)` evaluated from the profile, `β ≥ 0`.
    pub fn log_partition(&self, beta: f64) -> f64 {
        let rest: f64 = self.jumps().map(|(u, m)| m as f64 * (-beta * u).exp()).sum();
        let base = self.n_max as f64;
        base.ln() + (rest / base).ln_1p()
    }
}

/// `N_n(t)`: the number of indices whose gap to the maximum is at most `t`.
pub fn counting_function(profile: &GapProfile, t: f64) -> Result<usize> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain(format!("counting function needs t >= 0, got {t}")));
    }
    Ok(profile.count_at(t))
}

/// Softmax distribution and its normalized partition function.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxResult {
    pub probs: Vec<f64>,
    /// `Z = Σ_j exp(-β (z* - z_j)) ≥ 1`.
    pub z: f64,
    /// `log Z`, the rank free energy.
    pub log_z: f64,
}

/// Softmax at inverse temperature `beta`, computed from the max-shifted gaps.
pub fn softmax(row: &ScoreRow, beta: f64) -> Result<SoftmaxResult> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::domain(format!("softmax needs finite beta >= 0, got {beta}")));
    }
    let z_star = row.max_score();
    let winner = row.scores().iter().position(|&z| z == z_star).unwrap_or(0);
    let weights: Vec<f64> = row.scores().iter().map(|&z| (-beta * (z_star - z)).exp()).collect();
    // Z = 1 + rest keeps log Z accurate when Z is close to 1.
    let rest: f64 = weights.iter().enumerate().filter(|&(j, _)| j != winner).map(|(_, w)| w).sum();
    let z = 1.0 + rest;
    let probs = weights.iter().map(|w| w / z).collect();
    Ok(SoftmaxResult { probs, z, log_z: rest.ln_1p() })
}

/// The collapse observables of one softmax row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// Shannon entropy `H`, natural log.
    pub entropy: f64,
    /// Top-two weight gap `D`: largest minus second-largest probability.
    pub top_two_gap: f64,
    /// Rank gap `G`: largest minus smallest probability.
    pub rank_gap: f64,
    /// Largest probability, `1/Z`.
    pub p_star: f64,
    /// Set for single-token rows, where `D` is undefined and reported as 0.
    pub degenerate: bool,
}

pub fn observables(sm: &SoftmaxResult) -> Observables {
    let mut entropy = 0.0;
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for &p in &sm.probs {
        if p > 0.0 {
            entropy -= p * p.ln();
        }
        if p > first {
            second = first;
            first = p;
        } else if p > second {
            second = p;
        }
        min = min.min(p);
    }
    let degenerate = sm.probs.len() < 2;
    Observables {
        entropy,
        top_two_gap: if degenerate { 0.0 } else { first - second },
        rank_gap: if degenerate { 0.0 } else { first - min },
        p_star: first,
        degenerate,
    }
}

/// `β ∫₀^∞ e^{-βt} N_n(t) dt`, integrated exactly piece by piece over the step function.
pub fn partition_by_parts(profile: &GapProfile, beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::domain(format!("partition_by_parts needs finite beta > 0, got {beta}")));
    }
    // Piece [a, b) with constant count N contributes N (e^{-βa} - e^{-βb}).
    let mut total = 0.0;
    let mut left = 0.0;
    let mut count = profile.n_max;
    for (u, c) in profile.levels() {
        let decay = (-beta * left).exp();
        total += count as f64 * decay * -(-beta * (u - left)).exp_m1();
        left = u;
        count = c;
    }
    // final piece [u_K, ∞)
    total += count as f64 * (-beta * left).exp();
    Ok(total)
}
