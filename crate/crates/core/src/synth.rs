//! Deterministic score families with closed-form ground truth, Gram-matrix realization
//! of score matrices as `Q = K` self-attention, and scalar temperature schedules.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::row::{RowMeta, ScoreRow};

/// Equicorrelated configuration: Gram `(r² - Δ) J + Δ I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexConfig {
    pub n: usize,
    pub r_sq: f64,
    pub delta: f64,
}

impl SimplexConfig {
    /// Uses `r² = max(Δ, 1)`; the score level never affects a gap quantity.
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        Self::with_r_sq(n, delta.max(1.0), delta)
    }

    pub fn with_r_sq(n: usize, r_sq: f64, delta: f64) -> Result<Self> {
        let cfg = Self { n, r_sq, delta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config(format!("simplex needs n >= 2, got {}", self.n)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::config(format!("simplex needs finite delta > 0, got {}", self.delta)));
        }
        if !(self.r_sq.is_finite() && self.r_sq >= self.delta) {
            return Err(Error::config(format!("simplex needs r_sq >= delta, got r_sq={} delta={}", self.r_sq, self.delta)));
        }
        Ok(())
    }

    /// Closed-form `Λ = log n / Δ`.
    pub fn lambda(&self) -> f64 {
        (self.n as f64).ln() / self.delta
    }
}

/// Balanced two-level block configuration with blocks of size `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub tau: f64,
    pub r_sq: f64,
}

impl BlockConfig {
    /// Uses `r² = max(τ, 1)`.
    pub fn new(n: usize, m: usize, delta: f64, tau: f64) -> Result<Self> {
        Self::with_r_sq(n, m, delta, tau, tau.max(1.0))
    }

    pub fn with_r_sq(n: usize, m: usize, delta: f64, tau: f64, r_sq: f64) -> Result<Self> {
        let cfg = Self { n, m, delta, tau, r_sq };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { n, m, delta, tau, r_sq } = *self;
        if m < 2 || m > n {
            return Err(Error::config(format!("block size m must satisfy 2 <= m <= n, got m={m} n={n}")));
        }
        if n % m != 0 {
            return Err(Error::config(format!("block size m={m} does not divide n={n}")));
        }
        if ![delta, tau, r_sq].iter().all(|v| v.is_finite()) || !(0.0 < delta && delta < tau && tau <= r_sq) {
            return Err(Error::config(format!(
                "block needs 0 < delta < tau <= r_sq, got delta={delta} tau={tau} r_sq={r_sq}"
            )));
        }
        Ok(())
    }
}

fn family_meta(family: &str, n: usize) -> RowMeta {
    RowMeta::new(family, 0, 0, "synth", n, 0)
}

/// Winner at `r²`, `n - 1` competitors at `r² - Δ`.
pub fn simplex_row(cfg: &SimplexConfig) -> Result<ScoreRow> {
    cfg.validate()?;
    let mut scores = vec![cfg.r_sq - cfg.delta; cfg.n];
    scores[0] = cfg.r_sq;
    ScoreRow::new(scores, family_meta("simplex", cfg.n))
}

/// Row 0 of the block Gram: winner `r²`, `m - 1` at `r² - δ`, `n - m` at `r² - τ`.
pub fn block_row(cfg: &BlockConfig) -> Result<ScoreRow> {
    cfg.validate()?;
    let scores = (0..cfg.n)
        .map(|j| match j {
            0 => cfg.r_sq,
            j if j < cfg.m => cfg.r_sq - cfg.delta,
            _ => cfg.r_sq - cfg.tau,
        })
        .collect();
    ScoreRow::new(scores, family_meta("block", cfg.n))
}

/// `Λ = max(log m / δ, log n / τ)`.
pub fn block_lambda_closed_form(cfg: &BlockConfig) -> f64 {
    let within = (cfg.m as f64).ln() / cfg.delta;
    if cfg.m == cfg.n {
        return within;
    }
    within.max((cfg.n as f64).ln() / cfg.tau)
}

/// Scores `(0, -log2/log n, -log n, ..., -log n)`: bounded contact-count entropy `log 2`.
pub fn finite_contact_row(n: usize) -> Result<ScoreRow> {
    if n < 3 {
        return Err(Error::config(format!("finite-contact row needs n >= 3, got {n}")));
    }
    let log_n = (n as f64).ln();
    let mut scores = vec![-log_n; n];
    scores[0] = 0.0;
    scores[1] = -2f64.ln() / log_n;
    ScoreRow::new(scores, family_meta("finite-contact", n))
}

/// Full simplex Gram matrix.
pub fn simplex_gram(cfg: &SimplexConfig) -> DMatrix<f64> {
    DMatrix::from_fn(cfg.n, cfg.n, |i, j| if i == j { cfg.r_sq } else { cfg.r_sq - cfg.delta })
}

/// Full two-level block Gram `δ I + (τ - δ) B + (r² - τ) J`.
pub fn block_gram(cfg: &BlockConfig) -> DMatrix<f64> {
    DMatrix::from_fn(cfg.n, cfg.n, |i, j| {
        if i == j {
            cfg.r_sq
        } else if i / cfg.m == j / cfg.m {
            cfg.r_sq - cfg.delta
        } else {
            cfg.r_sq - cfg.tau
        }
    })
}

const SYMMETRY_TOL: f64 = 1e-10;
const PSD_REL_TOL: f64 = 1e-8;

/// A factor `B` (`d_qk × n`) with `BᵀB = Σ`.
#[derive(Debug, Clone)]
pub struct GramFactor {
    pub factor: DMatrix<f64>,
}

impl GramFactor {
    pub fn d_qk(&self) -> usize {
        self.factor.nrows()
    }

    /// Shared query/key matrix `Q = K = d_qk^{1/4} B`.
    pub fn query_key(&self) -> DMatrix<f64> {
        &self.factor * (self.d_qk() as f64).powf(0.25)
    }

    /// Scaled dot-product scores `QᵀK / √d_qk`.
    pub fn scores(&self) -> DMatrix<f64> {
        let qk = self.query_key();
        qk.transpose() * &qk / (self.d_qk() as f64).sqrt()
    }

    /// Row `i` of the realized score matrix as a [`ScoreRow`].
    pub fn score_row(&self, i: usize) -> Result<ScoreRow> {
        let scores = self.scores();
        let n = scores.ncols();
        if i >= n {
            return Err(Error::domain(format!("row index {i} out of range for n = {n}")));
        }
        ScoreRow::new(scores.row(i).iter().copied().collect(), RowMeta::new("gram", 0, 0, "synth", n, i))
    }
}

/// Realizes a positive semidefinite `Σ` as `Q = K` self-attention scores in dimension `d_qk`.
///
/// Eigenvalues are clamped at zero; the factor keeps the top `d_qk` eigenpairs and pads
/// with zero rows.
pub fn gram_realize(sigma: &DMatrix<f64>, d_qk: usize) -> Result<GramFactor> {
    let n = sigma.nrows();
    if n == 0 || sigma.ncols() != n {
        return Err(Error::domain(format!("expected a non-empty square matrix, got {}x{}", n, sigma.ncols())));
    }
    if d_qk == 0 {
        return Err(Error::domain("d_qk must be positive"));
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let scale = sigma.amax().max(1.0);
    let asym = (sigma - sigma.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Asymmetric(asym));
    }

    let eig = SymmetricEigen::new((sigma + sigma.transpose()) * 0.5);
    let spectral = eig.eigenvalues.amax();
    let tol = PSD_REL_TOL * spectral.max(f64::MIN_POSITIVE);
    let min = eig.eigenvalues.min();
    if min < -tol {
        return Err(Error::NotPsd { min, tol });
    }
    let rank = eig.eigenvalues.iter().filter(|&&l| l > tol).count();
    if rank > d_qk {
        return Err(Error::Rank { rank, d_qk });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut factor = DMatrix::zeros(d_qk, n);
    for (row, &k) in order.iter().take(d_qk).enumerate() {
        let root = eig.eigenvalues[k].max(0.0).sqrt();
        for j in 0..n {
            factor[(row, j)] = root * eig.eigenvectors[(j, k)];
        }
    }
    Ok(GramFactor { factor })
}

fn check_n_train(n_train: usize) -> Result<()> {
    if n_train < 2 {
        return Err(Error::config(format!("n_train must be >= 2, got {n_train}")));
    }
    Ok(())
}

/// Legacy length multiplier `max(1, log n / log n_train)^ξ`.
pub fn legacy_multiplier(n: usize, n_train: usize, xi: f64) -> Result<f64> {
    check_n_train(n_train)?;
    if n == 0 || !xi.is_finite() {
        return Err(Error::config(format!("legacy multiplier needs n >= 1 and finite xi, got n={n} xi={xi}")));
    }
    let ratio = ((n as f64).ln() / (n_train as f64).ln()).max(1.0);
    Ok(ratio.powf(xi))
}

/// YaRN effective inverse temperature `(1 + 0.1 ln s)²`, `s = max(1, n / n_train)`.
pub fn yarn_beta(n: usize, n_train: usize) -> Result<f64> {
    check_n_train(n_train)?;
    let s = (n as f64 / n_train as f64).max(1.0);
    Ok((1.0 + 0.1 * s.ln()).powi(2))
}

/// Dynamic-NTK base scaling `ρ^{d/(d-2)}`, `ρ = max(1, n_eval / n_train)`.
pub fn dynamic_ntk_scale(n_eval: usize, n_train: usize, d: usize) -> Result<f64> {
    check_n_train(n_train)?;
    if d < 4 || d % 2 != 0 {
        return Err(Error::config(format!("head dimension d must be even and >= 4, got {d}")));
    }
    let rho = (n_eval as f64 / n_train as f64).max(1.0);
    Ok(rho.powf(d as f64 / (d as f64 - 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleSpec {
    LegacyMultiplier { n_train: usize, xi: f64 },
    Yarn { n_train: usize },
    DynamicNtkBase { n_train: usize, d: usize },
}

impl ScheduleSpec {
    pub fn evaluate(&self, n: usize) -> Result<f64> {
        match *self {
            ScheduleSpec::LegacyMultiplier { n_train, xi } => legacy_multiplier(n, n_train, xi),
            ScheduleSpec::Yarn { n_train } => yarn_beta(n, n_train),
            ScheduleSpec::DynamicNtkBase { n_train, d } => dynamic_ntk_scale(n, n_train, d),
        }
    }
}

/// A score family indexed by context length.
pub trait ScoreFamily: Sync {
    fn name(&self) -> &str;
    fn row(&self, n: usize) -> Result<ScoreRow>;
}

/// How a family's gap scales with `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GapLaw {
    /// `scale · (log n)^{1 - ξ}`: a planted exponent for the simplex (Λ ≍ (log n)^ξ).
    Planted { xi: f64, #[serde(default = "one")] scale: f64 },
    Fixed { delta: f64 },
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

/// Simplex rows over an n-grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexFamily {
    #[serde(flatten)]
    pub gap: GapLaw,
    #[serde(default)]
    pub r_sq: Option<f64>,
}

impl SimplexFamily {
    pub fn planted(xi: f64) -> Self {
        Self { gap: GapLaw::Planted { xi, scale: 1.0 }, r_sq: None }
    }

    pub fn fixed(delta: f64) -> Self {
        Self { gap: GapLaw::Fixed { delta }, r_sq: None }
    }

    pub fn config(&self, n: usize) -> Result<SimplexConfig> {
        let delta = match self.gap {
            GapLaw::Planted { xi, scale } => scale * (n as f64).ln().powf(1.0 - xi),
            GapLaw::Fixed { delta } => delta,
        };
        match self.r_sq {
            Some(r_sq) => SimplexConfig::with_r_sq(n, r_sq, delta),
            None => SimplexConfig::new(n, delta),
        }
    }
}

impl ScoreFamily for SimplexFamily {
    fn name(&self) -> &str {
        "simplex"
    }

    fn row(&self, n: usize) -> Result<ScoreRow> {
        simplex_row(&self.config(n)?)
    }
}

/// Block rows over an n-grid.
///
/// With `xi` set, `δ = log m / (log n)^ξ` and `τ = tau_factor · log n / (log n)^ξ`,
/// which puts the contact at the within-block gap whenever `tau_factor > 1`.
/// Otherwise `delta` and `tau` are used as given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockFamily {
    pub m: usize,
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default = "two")]
    pub tau_factor: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub r_sq: Option<f64>,
}

impl BlockFamily {
    pub fn planted(m: usize, xi: f64) -> Self {
        Self { m, xi: Some(xi), tau_factor: 2.0, delta: None, tau: None, r_sq: None }
    }

    pub fn fixed(m: usize, delta: f64, tau: f64) -> Self {
        Self { m, xi: None, tau_factor: 2.0, delta: Some(delta), tau: Some(tau), r_sq: None }
    }

    pub fn config(&self, n: usize) -> Result<BlockConfig> {
        let (delta, tau) = match (self.xi, self.delta, self.tau) {
            (Some(xi), None, None) => {
                let log_n = (n as f64).ln();
                let level = log_n.powf(xi);
                ((self.m as f64).ln() / level, self.tau_factor * log_n / level)
            }
            (None, Some(d), Some(t)) => (d, t),
            _ => return Err(Error::config("block family needs either xi, or both delta and tau")),
        };
        match self.r_sq {
            Some(r_sq) => BlockConfig::with_r_sq(n, self.m, delta, tau, r_sq),
            None => BlockConfig::new(n, self.m, delta, tau),
        }
    }
}

impl ScoreFamily for BlockFamily {
    fn name(&self) -> &str {
        "block"
    }

    fn row(&self, n: usize) -> Result<ScoreRow> {
        block_row(&self.config(n)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FiniteContactFamily;

impl ScoreFamily for FiniteContactFamily {
    fn name(&self) -> &str {
        "finite-contact"
    }

    fn row(&self, n: usize) -> Result<ScoreRow> {
        finite_contact_row(n)
    }
}

/// A family selected by name, as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Simplex(SimplexFamily),
    Block(BlockFamily),
    FiniteContact,
}

impl Family {
    /// Parses a family name and its JSON parameters (ignored for `finite-contact`).
    pub fn from_json(kind: &str, params: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::config(format!("{kind} parameters: {e}"));
        match kind {
            "simplex" => Ok(Family::Simplex(serde_json::from_str(params).map_err(bad)?)),
            "block" => Ok(Family::Block(serde_json::from_str(params).map_err(bad)?)),
            "finite-contact" => Ok(Family::FiniteContact),
            other => Err(Error::config(format!("unknown family {other:?} (simplex | block | finite-contact)"))),
        }
    }
}

impl ScoreFamily for Family {
    fn name(&self) -> &str {
        match self {
            Family::Simplex(f) => f.name(),
            Family::Block(f) => f.name(),
            Family::FiniteContact => "finite-contact",
        }
    }

    fn row(&self, n: usize) -> Result<ScoreRow> {
        match self {
            Family::Simplex(f) => f.row(n),
            Family::Block(f) => f.row(n),
            Family::FiniteContact => finite_contact_row(n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gap::{accumulation_scale, contact_triple, DEFAULT_EPS};
    use crate::row::{observables, softmax};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn simplex_examples() {
        let row = simplex_row(&SimplexConfig::with_r_sq(4, 2.0, 1.0).unwrap()).unwrap();
        assert_eq!(row.scores(), &[2.0, 1.0, 1.0, 1.0]);
        let (l, a, d) = contact_triple(&row, DEFAULT_EPS).unwrap().finite().unwrap();
        assert!(rel(l, 1.3862943611198906) < 1e-15);
        assert_eq!((a, d), (1.0, 1.0));

        let row = simplex_row(&SimplexConfig::new(2, 1.0).unwrap()).unwrap();
        assert!(rel(accumulation_scale(&crate::row::gap_profile(&row)).finite().unwrap(), 2f64.ln()) < 1e-15);

        let n = 1usize << 16;
        let row = SimplexFamily::planted(2.0).row(n).unwrap();
        let l = contact_triple(&row, DEFAULT_EPS).unwrap().lambda.finite().unwrap();
        let expected = (n as f64).ln().powi(2);
        assert!(rel(l, expected) < 1e-12);
        assert!((l - 123.0).abs() < 0.05);
    }

    #[test]
    fn simplex_validation() {
        assert!(SimplexConfig::new(1, 1.0).is_err());
        assert!(SimplexConfig::new(4, 0.0).is_err());
        assert!(SimplexConfig::with_r_sq(4, 0.5, 1.0).is_err());
        assert!(SimplexConfig::new(4, f64::NAN).is_err());
    }

    #[test]
    fn block_examples() {
        let within = BlockConfig::with_r_sq(12, 3, 0.5, 3.0, 4.0).unwrap();
        let across = BlockConfig::new(12, 3, 2.9, 3.0).unwrap();
        let whole = BlockConfig::new(6, 6, 0.7, 1.5).unwrap();
        for cfg in [within, across, whole] {
            let row = block_row(&cfg).unwrap();
            let l = accumulation_scale(&crate::row::gap_profile(&row)).finite().unwrap();
            assert!(rel(l, block_lambda_closed_form(&cfg)) < 1e-12);
        }
        assert!(rel(block_lambda_closed_form(&within), 3f64.ln() / 0.5) < 1e-15);

        let (l, a, d) = contact_triple(&block_row(&across).unwrap(), DEFAULT_EPS).unwrap().finite().unwrap();
        assert!(rel(l, 12f64.ln() / 3.0) < 1e-15);
        assert_eq!((a, d), (1.0, 3.0));

        // m = n: one jump at δ, like a simplex
        let (l, a, d) = contact_triple(&block_row(&whole).unwrap(), DEFAULT_EPS).unwrap().finite().unwrap();
        assert!(rel(l, 6f64.ln() / 0.7) < 1e-14);
        assert!(rel(d, 0.7) < 1e-15);
        assert_eq!(a, 1.0);
    }

    #[test]
    fn block_validation() {
        assert!(matches!(BlockConfig::new(12, 5, 0.5, 3.0), Err(Error::Config(_))));
        assert!(BlockConfig::new(12, 1, 0.5, 3.0).is_err());
        assert!(BlockConfig::new(12, 3, 3.0, 0.5).is_err());
        assert!(BlockConfig::with_r_sq(12, 3, 0.5, 3.0, 2.0).is_err());
    }

    #[test]
    fn finite_contact_at_a_million() {
        let n = 1_000_000;
        let row = finite_contact_row(n).unwrap();
        let t = contact_triple(&row, DEFAULT_EPS).unwrap();
        let log_n = (n as f64).ln();
        let (l, a, d) = t.finite().unwrap();
        assert!(rel(l, log_n) < 1e-14);
        assert!(rel(d, 2f64.ln() / log_n) < 1e-14);
        assert!(rel(a, 2f64.ln() / log_n) < 1e-14);
        assert!(rel(t.contact_entropy().unwrap(), 2f64.ln()) < 1e-14);

        // Direct oracle at β = √(log n): Z = 1 + e^{-β log2/log n} + (n-2) e^{-β log n}.
        let beta = log_n.sqrt();
        let z = 1.0 + (-beta * 2f64.ln() / log_n).exp() + (n as f64 - 2.0) * (-beta * log_n).exp();
        let sm = softmax(&row, beta).unwrap();
        assert!(rel(sm.z, z) < 1e-12);
        assert!((sm.z - 1.8298716917464293).abs() < 1e-9);
        let o = observables(&sm);
        assert!((o.rank_gap - 1.0 / z).abs() < 1e-12);

        let r = log_n / 2.0;
        let p = crate::row::gap_profile(&row);
        assert!((crate::gap::resolved_scale(&p, r).unwrap() - 0.5).abs() < 1e-12);
        assert!(finite_contact_row(2).is_err());
    }

    #[test]
    fn gram_identity_and_families() {
        let f = gram_realize(&DMatrix::identity(3, 3), 3).unwrap();
        assert!((f.scores() - DMatrix::<f64>::identity(3, 3)).amax() <= 1e-12);

        let cfg = SimplexConfig::with_r_sq(4, 2.0, 1.0).unwrap();
        let sigma = simplex_gram(&cfg);
        let f = gram_realize(&sigma, 4).unwrap();
        assert!((f.scores() - &sigma).amax() <= 1e-8);
        let row0 = f.score_row(0).unwrap();
        let expected = simplex_row(&cfg).unwrap();
        for (a, b) in row0.scores().iter().zip(expected.scores()) {
            assert!((a - b).abs() <= 1e-8);
        }

        let cfg = BlockConfig::with_r_sq(12, 3, 0.5, 3.0, 4.0).unwrap();
        let sigma = block_gram(&cfg);
        let f = gram_realize(&sigma, 12).unwrap();
        assert!((f.scores() - &sigma).amax() <= 1e-8);
        assert_eq!(f.factor.nrows(), 12);
    }

    #[test]
    fn gram_errors_and_padding() {
        let mut asym = DMatrix::<f64>::identity(3, 3);
        asym[(0, 1)] = 1e-3;
        assert!(matches!(gram_realize(&asym, 3), Err(Error::Asymmetric(_))));

        let mut neg = DMatrix::<f64>::identity(2, 2);
        neg[(1, 1)] = -1.0;
        assert!(matches!(gram_realize(&neg, 2), Err(Error::NotPsd { .. })));

        assert!(matches!(gram_realize(&DMatrix::identity(4, 4), 3), Err(Error::Rank { rank: 4, d_qk: 3 })));

        // rank-1 matrix in a larger d_qk is padded with zero rows
        let v = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, -1.0]);
        let sigma = &v * v.transpose();
        let f = gram_realize(&sigma, 5).unwrap();
        assert_eq!(f.factor.nrows(), 5);
        assert!((f.scores() - &sigma).amax() <= 1e-12);
        assert!(f.factor.rows(1, 4).amax() <= 1e-7);
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(legacy_multiplier(4096, 4096, 2.0).unwrap(), 1.0);
        assert!(rel(legacy_multiplier(4096 * 4096, 4096, 2.0).unwrap(), 4.0) < 1e-14);
        assert_eq!(legacy_multiplier(1 << 20, 4096, 0.0).unwrap(), 1.0);
        assert_eq!(legacy_multiplier(100, 4096, 3.0).unwrap(), 1.0);

        assert_eq!(yarn_beta(8192, 8192).unwrap(), 1.0);
        assert_eq!(yarn_beta(10, 8192).unwrap(), 1.0);
        // s = e^{10} and s = e, through the ratio form
        let e10 = 10f64.exp();
        assert!(rel((1.0 + 0.1 * e10.ln()).powi(2), 4.0) < 1e-15);
        let n_train = 1000usize;
        let n = (n_train as f64 * std::f64::consts::E).round() as usize;
        let expected = (1.0 + 0.1 * (n as f64 / n_train as f64).ln()).powi(2);
        assert!(rel(yarn_beta(n, n_train).unwrap(), expected) < 1e-15);
        assert!((yarn_beta(n, n_train).unwrap() - 1.21).abs() < 1e-4);

        assert_eq!(dynamic_ntk_scale(100, 8192, 128).unwrap(), 1.0);
        assert!((dynamic_ntk_scale(16384, 8192, 128).unwrap() - 2.022126168973791).abs() < 1e-12);
        assert!(rel(dynamic_ntk_scale(4 * 8192, 8192, 4).unwrap(), 16.0) < 1e-15);
        assert!(dynamic_ntk_scale(10, 8, 5).is_err());
        assert!(dynamic_ntk_scale(10, 8, 2).is_err());
        assert!(yarn_beta(10, 1).is_err());

        let spec: ScheduleSpec = serde_json::from_str(r#"{"kind":"yarn","n_train":8192}"#).unwrap();
        assert_eq!(spec.evaluate(8192).unwrap(), 1.0);
    }

    #[test]
    fn family_parsing() {
        let f = Family::from_json("simplex", r#"{"xi": 2.0}"#).unwrap();
        assert_eq!(f, Family::Simplex(SimplexFamily::planted(2.0)));
        let f = Family::from_json("simplex", r#"{"delta": 0.5}"#).unwrap();
        assert_eq!(f, Family::Simplex(SimplexFamily::fixed(0.5)));
        let f = Family::from_json("block", r#"{"m": 2, "xi": 1.5}"#).unwrap();
        assert_eq!(f, Family::Block(BlockFamily::planted(2, 1.5)));
        assert!(Family::from_json("block", r#"{"m": 2}"#).unwrap().row(8).is_err());
        assert!(Family::from_json("cube", "{}").is_err());
        assert_eq!(Family::from_json("finite-contact", "").unwrap().row(5).unwrap().len(), 5);
    }
}
