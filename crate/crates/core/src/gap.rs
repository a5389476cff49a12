//! Upper-tail accumulation scale, contact point, resolved scales, Laplace envelope and
//! rank boundary, all read off a [`GapProfile`].
//!
//! Because `N_n` is a right-continuous step function with jumps only at the stored
//! gaps, every supremum over `t > 0` reduces to an exact maximum over those gaps.

use crate::error::{Error, Result};
use crate::row::{gap_profile_with_tol, GapProfile, ScoreRow};

/// Default relative slack used when locating the contact gap.
pub const DEFAULT_EPS: f64 = 1e-6;

/// A critical-scale value: finite, infinite (ties at the maximum), or undefined (n = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Finite(f64),
    Infinite,
    Degenerate,
}

impl Scale {
    pub fn finite(self) -> Option<f64> {
        match self {
            Scale::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Scale::Infinite)
    }

    /// `f64` view: `+inf` for [`Scale::Infinite`], NaN for [`Scale::Degenerate`].
    pub fn as_f64(self) -> f64 {
        match self {
            Scale::Finite(v) => v,
            Scale::Infinite => f64::INFINITY,
            Scale::Degenerate => f64::NAN,
        }
    }
}

/// `Λ_n = max_{u ∈ gaps} log N_n(u) / u`, or the tie / degenerate flag.
pub fn accumulation_scale(profile: &GapProfile) -> Scale {
    if profile.is_tied() {
        return Scale::Infinite;
    }
    if profile.gaps.is_empty() {
        return Scale::Degenerate;
    }
    let lambda = profile
        .levels()
        .map(|(u, c)| (c as f64).ln() / u)
        .fold(f64::NEG_INFINITY, f64::max);
    Scale::Finite(lambda)
}

/// The largest contact gap and its accumulation exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPoint {
    /// Contact gap `Δ_n` in score units.
    pub delta: f64,
    /// Contact accumulation exponent `α_n = log N_n(Δ_n) / log n`.
    pub alpha: f64,
    /// `N_n(Δ_n)`.
    pub count: usize,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::domain(format!("eps must lie in [0, 1), got {eps}")));
    }
    Ok(())
}

/// Largest gap `u` with `log N(u)/u ≥ (1 - eps) Λ`. `eps = 0` is the exact contact point.
pub fn contact_point(profile: &GapProfile, eps: f64) -> Result<ContactPoint> {
    check_eps(eps)?;
    let lambda = match accumulation_scale(profile) {
        Scale::Finite(l) => l,
        Scale::Infinite => return Err(Error::Tied { n_max: profile.n_max }),
        Scale::Degenerate => return Err(Error::Degenerate),
    };
    let threshold = (1.0 - eps) * lambda;
    let (delta, count) = profile
        .levels()
        .filter(|&(u, c)| (c as f64).ln() / u >= threshold)
        .last()
        .expect("the maximizing gap always meets the threshold");
    Ok(ContactPoint { delta, alpha: (count as f64).ln() / (profile.n as f64).ln(), count })
}

/// Per-row reading of `(Λ, Δ, α)` plus tie bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactTriple {
    pub lambda: Scale,
    /// Present exactly when `lambda` is finite.
    pub contact: Option<ContactPoint>,
    pub n_max: usize,
    pub n: usize,
}

impl ContactTriple {
    pub fn is_tie(&self) -> bool {
        self.lambda.is_infinite()
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.lambda, Scale::Degenerate)
    }

    pub fn delta(&self) -> Option<f64> {
        self.contact.map(|c| c.delta)
    }

    pub fn alpha(&self) -> Option<f64> {
        self.contact.map(|c| c.alpha)
    }

    /// Contact-count entropy `C = Λ·Δ`.
    pub fn contact_entropy(&self) -> Option<f64> {
        Some(self.lambda.finite()? * self.delta()?)
    }

    /// `(Λ, α, Δ)` for non-tied, non-degenerate rows.
    pub fn finite(&self) -> Option<(f64, f64, f64)> {
        let c = self.contact?;
        Some((self.lambda.finite()?, c.alpha, c.delta))
    }
}

pub fn contact_triple_from_profile(profile: &GapProfile, eps: f64) -> Result<ContactTriple> {
    check_eps(eps)?;
    let lambda = accumulation_scale(profile);
    let contact = match lambda {
        Scale::Finite(_) => Some(contact_point(profile, eps)?),
        _ => None,
    };
    Ok(ContactTriple { lambda, contact, n_max: profile.n_max, n: profile.n })
}

/// Reads the contact triple of one row with exact tie detection.
pub fn contact_triple(row: &ScoreRow, eps: f64) -> Result<ContactTriple> {
    contact_triple_with_tol(row, eps, 0.0)
}

pub fn contact_triple_with_tol(row: &ScoreRow, eps: f64, tie_abs_tol: f64) -> Result<ContactTriple> {
    contact_triple_from_profile(&gap_profile_with_tol(row, tie_abs_tol), eps)
}

fn check_resolution(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::domain(format!("resolution r must be finite and >= 0, got {r}")));
    }
    Ok(())
}

/// `Λ^{(r)} = sup_{t: log N(t) > r} (log N(t) - r)/t`, with `sup ∅ = 0`.
///
/// Returns `+inf` for a tied profile whose tie block alone exceeds the resolution.
pub fn resolved_scale(profile: &GapProfile, r: f64) -> Result<f64> {
    check_resolution(r)?;
    if (profile.n_max as f64).ln() > r {
        return Ok(f64::INFINITY);
    }
    Ok(profile
        .levels()
        .filter_map(|(u, c)| {
            let excess = (c as f64).ln() - r;
            (excess > 0.0).then(|| excess / u)
        })
        .fold(0.0, f64::max))
}

/// `S(β) = max_{t ∈ {0} ∪ gaps} (log N(t) - β t)`.
pub fn laplace_envelope(profile: &GapProfile, beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::domain(format!("laplace_envelope needs finite beta > 0, got {beta}")));
    }
    Ok(profile
        .levels()
        .map(|(u, c)| (c as f64).ln() - beta * u)
        .fold((profile.n_max as f64).ln(), f64::max))
}

const BISECTION_REL_TOL: f64 = 1e-13;

/// `sup{β ≥ 0 : log Z(β) ≥ r}` for `0 ≤ r ≤ log n`.
///
/// `log Z` decreases strictly from `log n` towards `log n_max`, so the boundary is
/// infinite exactly when `r ≤ log n_max`; otherwise it is the unique root, found by
/// bisection.
pub fn rank_boundary(profile: &GapProfile, r: f64) -> Result<Scale> {
    check_resolution(r)?;
    let log_n = (profile.n as f64).ln();
    if r > log_n * (1.0 + 1e-12) {
        return Err(Error::domain(format!("rank boundary needs r <= log n = {log_n}, got {r}")));
    }
    if (profile.n_max as f64).ln() >= r {
        return Ok(Scale::Infinite);
    }
    let mut lo = 0.0;
    let mut hi = accumulation_scale(profile).finite().unwrap_or(0.0) + 1.0;
    while profile.log_partition(hi) >= r {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..4096 {
        let mid = 0.5 * (lo + hi);
        if profile.log_partition(mid) >= r {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_REL_TOL * hi {
            break;
        }
    }
    Ok(Scale::Finite(0.5 * (lo + hi)))
}
