//! Instantaneous SINR of the rate-split sub-messages, with the NOMA and OMA
//! degenerate forms.
//!
//! All SINRs are linear and may be `+inf`: a zero denominator with a positive
//! numerator maps to `+inf`, and a zero numerator maps to 0, so downstream
//! rate maps stay total on `[0, +inf]`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::spatial::DistanceProfile;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SinrError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Scalar network parameters shared by the simulator and the analytical
/// evaluators.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SystemConfig {
    /// BS intensity in points per square meter.
    pub lambda_bs: f64,
    /// Scheduled UEs per cell and resource block.
    pub n_per_cell: usize,
    /// Path loss exponent, must exceed 2.
    pub eta: f64,
    /// Normalized noise power `sigma^2 / P`.
    pub sigma2_norm: f64,
    /// Power split fraction toward sub-message 1.
    pub beta: f64,
    /// Inter-UE decoding order factor: `b_n ~ Bernoulli(q)`.
    pub q: f64,
    /// Link-distance law correction constant (5/4).
    pub b1: f64,
    /// Pair-correlation decay constant (12/5).
    pub b2: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            lambda_bs: 1e-4,
            n_per_cell: 2,
            eta: 4.0,
            sigma2_norm: 0.0,
            beta: 0.5,
            q: 0.0,
            b1: crate::B1,
            b2: crate::B2,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<(), SinrError> {
        let fail = |msg: String| Err(SinrError::InvalidParameter(msg));
        if !(self.lambda_bs > 0.0) || !self.lambda_bs.is_finite() {
            return fail(format!("lambda_bs must be positive, got {}", self.lambda_bs));
        }
        if self.n_per_cell == 0 {
            return fail("n_per_cell must be at least 1".into());
        }
        if !(self.eta > 2.0) {
            return fail(format!("eta must exceed 2, got {}", self.eta));
        }
        if !(self.sigma2_norm >= 0.0) {
            return fail(format!("sigma2_norm must be >= 0, got {}", self.sigma2_norm));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return fail(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return fail(format!("q must lie in [0, 1], got {}", self.q));
        }
        if !(self.b1 > 0.0) || !(self.b2 > 0.0) {
            return fail("model constants b1 and b2 must be positive".into());
        }
        Ok(())
    }
}

/// One small-scale realization: unit-exponential gains plus the per-rank
/// decoding-order bits.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingDraw {
    /// Gains of the typical links, indexed by rank - 1.
    pub h_typical: Vec<f64>,
    /// Gains of the interferer links, aligned with `DistanceProfile::interferer`.
    pub h_interferer: Vec<f64>,
    /// Decoding-order bits `b_n ~ Bernoulli(q)`.
    pub b: Vec<bool>,
}

impl FadingDraw {
    pub fn sample<R: Rng + ?Sized>(
        n_users: usize,
        n_interferers: usize,
        q: f64,
        rng: &mut R,
    ) -> Self {
        let h_typical = (0..n_users).map(|_| Exp1.sample(rng)).collect();
        let h_interferer = (0..n_interferers).map(|_| Exp1.sample(rng)).collect();
        let b = (0..n_users)
            .map(|_| rng.random_range(0.0..1.0) < q)
            .collect();
        Self {
            h_typical,
            h_interferer,
            b,
        }
    }
}

/// SINRs of the two sub-messages of one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrPair {
    pub gamma1: f64,
    pub gamma2: f64,
}

/// `num / den` with the 0/0 -> 0 and x/0 -> +inf conventions.
#[inline]
pub fn ratio_or_infinite(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Sub-message SINR pair from pre-aggregated components: `signal` is the
/// typical link's received power and `other` collects intra-cell plus
/// inter-cell interference plus noise.
#[inline]
pub fn rsma_pair_from_components(signal: f64, other: f64, beta: f64, b_bit: bool) -> SinrPair {
    let self1 = if b_bit { signal * (1.0 - beta) } else { 0.0 };
    let self2 = if b_bit { 0.0 } else { signal * beta };
    SinrPair {
        gamma1: ratio_or_infinite(beta * signal, self1 + other),
        gamma2: ratio_or_infinite((1.0 - beta) * signal, self2 + other),
    }
}

fn interference_components(
    rank: usize,
    profile: &DistanceProfile,
    fading: &FadingDraw,
    cfg: &SystemConfig,
) -> Result<(f64, f64), SinrError> {
    let n = profile.n_users();
    if rank == 0 || rank > n {
        return Err(SinrError::InvalidParameter(format!(
            "rank {rank} outside 1..={n}"
        )));
    }
    if fading.h_typical.len() != n || fading.h_interferer.len() != profile.interferer.len() {
        return Err(SinrError::InvalidParameter(
            "fading draw does not match the distance profile".into(),
        ));
    }
    let signal = fading.h_typical[rank - 1] * profile.ordered_typical[rank - 1].powf(-cfg.eta);
    let mut interference = cfg.sigma2_norm;
    for i in rank..n {
        interference += fading.h_typical[i] * profile.ordered_typical[i].powf(-cfg.eta);
    }
    for (h, d) in fading.h_interferer.iter().zip(&profile.interferer) {
        interference += h * d.powf(-cfg.eta);
    }
    Ok((signal, interference))
}

/// Sub-message SINRs of the rank-n user under rate splitting.
pub fn sinr_rsma(
    rank: usize,
    profile: &DistanceProfile,
    fading: &FadingDraw,
    cfg: &SystemConfig,
) -> Result<SinrPair, SinrError> {
    let (signal, other) = interference_components(rank, profile, fading, cfg)?;
    Ok(rsma_pair_from_components(
        signal,
        other,
        cfg.beta,
        fading.b[rank - 1],
    ))
}

/// SINR of the rank-n user under NOMA.
pub fn sinr_noma(
    rank: usize,
    profile: &DistanceProfile,
    fading: &FadingDraw,
    cfg: &SystemConfig,
) -> Result<f64, SinrError> {
    let (signal, other) = interference_components(rank, profile, fading, cfg)?;
    Ok(ratio_or_infinite(signal, other))
}

/// SINR of the sole user under OMA; requires a single-user profile.
pub fn sinr_oma(
    profile: &DistanceProfile,
    fading: &FadingDraw,
    cfg: &SystemConfig,
) -> Result<f64, SinrError> {
    if profile.n_users() != 1 {
        return Err(SinrError::InvalidParameter(format!(
            "OMA serves exactly one user per resource block, profile has {}",
            profile.n_users()
        )));
    }
    sinr_noma(1, profile, fading, cfg)
}
