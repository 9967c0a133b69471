//! f-divergences between finite distributions, the laws that turn them into
//! moment differences, and two-sided bounds on Kullback-Leibler divergence.
//!
//! All logarithms are natural.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{check_inequality, CheckId, Residual};
use crate::law::{f_pointwise, DiscreteLaw};
use crate::sum::compensated_sum;

/// Probabilities must sum to one within this absolute tolerance.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;
/// Added to every entry by [`FiniteDistribution::with_epsilon_floor`].
pub const EPSILON_FLOOR: f64 = 1e-12;
/// Slack for the `f1 <= kl <= f2` ordering flag, relative to `1 + kl`.
pub const BOUNDS_TOLERANCE: f64 = 1e-10;

/// Strictly positive probabilities summing to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteDistribution {
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(&p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::NonPositiveProbability(p));
        }
        let sum = compensated_sum(probs.iter().copied());
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::MassSumOutOfTolerance {
                sum,
                tolerance: PROBABILITY_SUM_TOLERANCE,
            });
        }
        Ok(Self { probs })
    }

    /// Accepts zero entries by adding [`EPSILON_FLOOR`] to every entry and
    /// renormalizing. Negative or non-finite entries are still rejected.
    pub fn with_epsilon_floor(probs: Vec<f64>) -> Result<Self> {
        if let Some(&p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::NonPositiveProbability(p));
        }
        let floored: Vec<f64> = probs.iter().map(|p| p + EPSILON_FLOOR).collect();
        let total = compensated_sum(floored.iter().copied());
        Self::new(floored.into_iter().map(|p| p / total).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Two distributions on a common index set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionPair {
    p: FiniteDistribution,
    q: FiniteDistribution,
}

impl DistributionPair {
    pub fn new(p: FiniteDistribution, q: FiniteDistribution) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::LengthMismatch(q.len()));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &FiniteDistribution {
        &self.p
    }

    pub fn q(&self) -> &FiniteDistribution {
        &self.q
    }

    /// The pair with roles swapped, `(q, p)`.
    pub fn reversed(&self) -> Self {
        Self {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }

    fn zip(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.p
            .probs
            .iter()
            .copied()
            .zip(self.q.probs.iter().copied())
    }

    /// `½ Σ |p_i − q_i|`
    pub fn total_variation(&self) -> f64 {
        0.5 * compensated_sum(self.zip().map(|(p, q)| (p - q).abs()))
    }
}

/// `Σ q_i f(p_i/q_i)`.
pub fn csiszar(f: impl Fn(f64) -> f64, pair: &DistributionPair) -> Result<f64> {
    let mut terms = Vec::with_capacity(pair.p.len());
    for (p, q) in pair.zip() {
        let v = f(p / q);
        if !v.is_finite() {
            return Err(Error::NonFiniteKernel(p / q));
        }
        terms.push(q * v);
    }
    Ok(compensated_sum(terms))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `Σ p log(p/q)`
    Kl,
    /// `Σ (√p − √q)²`
    Hellinger2,
    /// `Σ (p − q)²/q`
    Chi2,
    /// `Σ √(pq)`
    Bhattacharyya,
    /// `Σ p^α q^{1−α}`
    IAlpha,
    /// `log I_α / (α − 1)`
    Renyi,
    /// `(I_α − 1)/(α − 1)`
    Tsallis,
    /// Relative divergence of type `s`.
    Ks,
}

impl Measure {
    pub const ALL: [Measure; 8] = [
        Measure::Kl,
        Measure::Hellinger2,
        Measure::Chi2,
        Measure::Bhattacharyya,
        Measure::IAlpha,
        Measure::Renyi,
        Measure::Tsallis,
        Measure::Ks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Kl => "kl",
            Measure::Hellinger2 => "hellinger2",
            Measure::Chi2 => "chi2",
            Measure::Bhattacharyya => "bhattacharyya",
            Measure::IAlpha => "ialpha",
            Measure::Renyi => "renyi",
            Measure::Tsallis => "tsallis",
            Measure::Ks => "ks",
        }
    }

    pub fn needs_param(self) -> bool {
        matches!(
            self,
            Measure::IAlpha | Measure::Renyi | Measure::Tsallis | Measure::Ks
        )
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown measure `{s}`")))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn kl(pair: &DistributionPair) -> f64 {
    compensated_sum(pair.zip().map(|(p, q)| p * (p / q).ln()))
}

pub fn hellinger2(pair: &DistributionPair) -> f64 {
    compensated_sum(pair.zip().map(|(p, q)| (p.sqrt() - q.sqrt()).powi(2)))
}

/// `χ²(p, q) = Σ (p − q)²/q`. The reversed divergence is `chi2(&pair.reversed())`.
pub fn chi2(pair: &DistributionPair) -> f64 {
    compensated_sum(pair.zip().map(|(p, q)| (p - q).powi(2) / q))
}

pub fn bhattacharyya(pair: &DistributionPair) -> f64 {
    compensated_sum(pair.zip().map(|(p, q)| (p * q).sqrt()))
}

pub fn i_alpha(pair: &DistributionPair, alpha: f64) -> f64 {
    compensated_sum(pair.zip().map(|(p, q)| p.powf(alpha) * q.powf(1.0 - alpha)))
}

/// `K_s(p‖q) = Σ q_i f_s(p_i/q_i)`, which reduces to `K(q‖p)` at `s = 0` and
/// `K(p‖q)` at `s = 1` and stays accurate near both.
pub fn ks(pair: &DistributionPair, s: f64) -> Result<f64> {
    csiszar(|x| f_pointwise(s, x), pair)
}

/// Evaluates `measure`; `param` is `α` for the α-families and `s` for `ks`.
pub fn divergence(measure: Measure, pair: &DistributionPair, param: Option<f64>) -> Result<f64> {
    let param = || param.ok_or(Error::MissingParam(measure.name()));
    let value = match measure {
        Measure::Kl => kl(pair),
        Measure::Hellinger2 => hellinger2(pair),
        Measure::Chi2 => chi2(pair),
        Measure::Bhattacharyya => bhattacharyya(pair),
        Measure::IAlpha => i_alpha(pair, param()?),
        Measure::Renyi => {
            let alpha = param()?;
            if alpha == 1.0 {
                return Err(Error::AlphaOne);
            }
            i_alpha(pair, alpha).ln() / (alpha - 1.0)
        }
        Measure::Tsallis => {
            let alpha = param()?;
            if alpha == 1.0 {
                return Err(Error::AlphaOne);
            }
            (i_alpha(pair, alpha) - 1.0) / (alpha - 1.0)
        }
        Measure::Ks => ks(pair, param()?)?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(value))
    }
}

/// Laws `A(w, X)` built from a pair: values `X_i` with masses `w_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    /// `A(q, p/q)`: mean one, `EX^s = I_s(p‖q)`, `λ_s = K_s(p‖q)`.
    QOverQRatio,
    /// `A(p, p/q)`
    POverQRatio,
    /// `A(p, √(q/p))`
    SqrtQp,
}

pub fn law_from_pair(kind: LawKind, pair: &DistributionPair) -> Result<DiscreteLaw> {
    let atoms: Vec<(f64, f64)> = pair
        .zip()
        .map(|(p, q)| match kind {
            LawKind::QOverQRatio => (p / q, q),
            LawKind::POverQRatio => (p / q, p),
            LawKind::SqrtQp => ((q / p).sqrt(), p),
        })
        .collect();
    DiscreteLaw::new(&atoms, false)
}

/// `(S_a, P_a)` with `S_a = K_a(p‖q) + K_a(q‖p) − 4H²` and
/// `P_a = K_a(p‖q)K_a(q‖p) − 4H⁴`.
pub fn symmetric_measures(a: f64, pair: &DistributionPair) -> Result<(f64, f64)> {
    let forward = ks(pair, a)?;
    let backward = ks(&pair.reversed(), a)?;
    let h2 = hellinger2(pair);
    Ok((
        forward + backward - 4.0 * h2,
        forward * backward - 4.0 * h2 * h2,
    ))
}

/// Residuals of `K_s(p‖q)K_s(q‖p) >= 4H⁴` and `K_s(p‖q) + K_s(q‖p) >= 4H²`,
/// computed from the divergences directly.
pub fn theorem7_residuals(
    s: f64,
    pair: &DistributionPair,
) -> Result<(Residual<f64>, Residual<f64>)> {
    let forward = ks(pair, s)?;
    let backward = ks(&pair.reversed(), s)?;
    let h2 = hellinger2(pair);
    Ok((
        Residual::difference(forward * backward, 4.0 * h2 * h2),
        Residual::difference(forward + backward, 4.0 * h2),
    ))
}

/// Residuals of `S_{a+b−½} S_{a−b+½} >= (S_a − S_b)²` and the same for `P`.
///
/// On `A(q, p/q)` one has `S_a = τ(a, 1−a)` and `P_a = ξ(a, 1−a)`, so these are
/// the second- and third-order four-parameter checks at
/// `(a+b−½, 3/2−a−b, a−b+½, ½−a+b)`, evaluated with precision escalation.
pub fn theorem8_residuals(
    a: f64,
    b: f64,
    pair: &DistributionPair,
) -> Result<(Residual<f64>, Residual<f64>)> {
    let law = law_from_pair(LawKind::QOverQRatio, pair)?;
    let params = [a + b - 0.5, 1.5 - a - b, a - b + 0.5, 0.5 - a + b];
    let s = check_inequality(CheckId::Theorem1, &law, &params)?;
    let p = check_inequality(CheckId::Theorem3, &law, &params)?;
    Ok((
        Residual {
            residual: s.residual,
            scale: s.scale,
        },
        Residual {
            residual: p.residual,
            scale: p.scale,
        },
    ))
}

/// Kullback-Leibler divergence together with its classical and refined bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KLBoundsReport {
    pub kl: f64,
    pub f1: f64,
    pub f2: f64,
    pub h2: f64,
    /// `χ²(p, q) = Σ (p − q)²/q`
    pub chi2_pq: f64,
    /// `χ²(q‖p) = Σ (q − p)²/p`
    pub chi2_qp: f64,
    pub bhattacharyya: f64,
    /// `H²`
    pub classical_lower: f64,
    /// `log(1 + χ²(p, q))`
    pub classical_upper: f64,
    /// `f1 <= kl <= f2` within [`BOUNDS_TOLERANCE`]`·(1 + kl)`.
    pub ordered: bool,
}

/// Refined two-sided bounds on `K(p‖q)`:
///
/// ```text
/// f1 = −2 log B + 6(1 − B²)² / (1 − B⁴ + χ²(q‖p))
/// f2 = log(1 + χ²) − (32/9)(B√(1 + χ²) − 1)² / χ²,   χ² = χ²(p, q)
/// ```
///
/// Evaluated through `1 − B = H²/2` to avoid cancellation when `p ≈ q`.
/// At `p = q` every quantity is zero.
pub fn kl_bounds(pair: &DistributionPair) -> KLBoundsReport {
    let kl = kl(pair);
    let h2 = hellinger2(pair);
    let chi2_pq = chi2(pair);
    let chi2_qp = chi2(&pair.reversed());
    let one_minus_b = 0.5 * h2;
    let b = 1.0 - one_minus_b;

    let one_minus_b2 = one_minus_b * (1.0 + b);
    let one_minus_b4 = one_minus_b2 * (1.0 + b * b);
    let denom = one_minus_b4 + chi2_qp;
    let correction1 = if denom > 0.0 {
        6.0 * one_minus_b2 * one_minus_b2 / denom
    } else {
        0.0
    };
    let f1 = -2.0 * (-one_minus_b).ln_1p() + correction1;

    let root_minus_one = chi2_pq / ((1.0 + chi2_pq).sqrt() + 1.0);
    let gap = b * root_minus_one - one_minus_b;
    let correction2 = if chi2_pq > 0.0 {
        32.0 / 9.0 * gap * gap / chi2_pq
    } else {
        0.0
    };
    let classical_upper = chi2_pq.ln_1p();
    let f2 = classical_upper - correction2;

    let slack = BOUNDS_TOLERANCE * (1.0 + kl.abs());
    KLBoundsReport {
        kl,
        f1,
        f2,
        h2,
        chi2_pq,
        chi2_qp,
        bhattacharyya: b,
        classical_lower: h2,
        classical_upper,
        ordered: f1 <= kl + slack && kl <= f2 + slack,
    }
}
