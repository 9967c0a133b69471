//! Discrete probability laws on `(0, ∞)` and the moment-difference
//! functional
//!
//! ```text
//! λ_s = (E X^s − (E X)^s) / (s(s − 1))      s ∉ {0, 1}
//! λ_0 = log E X − E log X
//! λ_1 = E X log X − E X log E X
//! ```
//!
//! The generic quotient loses all accuracy as `s` approaches 0 or 1, so
//! orders within [`SINGULAR_WINDOW`] of either point are evaluated from a
//! truncated series in the centred log-moments of the law (see
//! [`LogMomentCache`]). The truncation error is `O(δ⁴)` relative, about
//! `1e-12` at the window edge.

use serde::Serialize;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::sum::{compensated_sum, CompensatedSum};

/// Half-width of the windows around `s = 0` and `s = 1` that use the series path.
pub const SINGULAR_WINDOW: f64 = 1e-3;

/// Largest accepted `|Σ mass − 1|` when a law is built without normalization.
pub const MASS_SUM_TOLERANCE: f64 = 1e-9;

/// After construction masses sum to 1 within this bound.
pub const NORMALIZED_MASS_TOLERANCE: f64 = 1e-12;

/// Negative λ values no larger than this fraction of their magnitude scale are
/// roundoff and get clamped to zero.
pub const CLAMP_RELATIVE: f64 = 1e-14;

/// Log-moment orders kept in the expansions around `s = 0` and `s = 1`. With
/// `|h| <= 1e-3` the first omitted term is below `1e-27 E|ℓ|^9 / 9!`.
pub const SERIES_TERMS: usize = 8;

/// Arithmetic used to evaluate λ and everything built from it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    Double,
    DoubleDouble,
}

impl std::str::FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "double" | "f64" => Ok(Precision::Double),
            "dd" | "double-double" | "double_double" => Ok(Precision::DoubleDouble),
            other => Err(Error::Parse(format!("unknown precision `{other}`"))),
        }
    }
}

/// A finite law with positive atoms and positive masses.
///
/// Duplicate values are allowed; they behave exactly like a single atom
/// carrying the combined mass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
    normalized: bool,
}

impl DiscreteLaw {
    /// Validates `(value, mass)` pairs.
    ///
    /// With `auto_normalize` the masses are divided by their sum. Without it
    /// the sum must already be within [`MASS_SUM_TOLERANCE`] of one; sums that
    /// pass but miss [`NORMALIZED_MASS_TOLERANCE`] are still rescaled, and
    /// [`DiscreteLaw::normalized`] reports it.
    pub fn new(pairs: &[(f64, f64)], auto_normalize: bool) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty);
        }
        for &(value, mass) in pairs {
            if value.is_nan() || value.is_infinite() {
                return Err(Error::NonFinite(value));
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveValue(value));
            }
            if mass.is_nan() || mass.is_infinite() {
                return Err(Error::NonFinite(mass));
            }
            if mass <= 0.0 {
                return Err(Error::NonPositiveMass(mass));
            }
        }

        let sum = compensated_sum(pairs.iter().map(|&(_, m)| m));
        let rescale = if auto_normalize {
            sum != 1.0
        } else {
            if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
                return Err(Error::MassSumOutOfTolerance {
                    sum,
                    tolerance: MASS_SUM_TOLERANCE,
                });
            }
            (sum - 1.0).abs() > NORMALIZED_MASS_TOLERANCE
        };

        let atoms = if rescale {
            pairs.iter().map(|&(v, m)| (v, m / sum)).collect()
        } else {
            pairs.to_vec()
        };
        Ok(Self {
            atoms,
            normalized: rescale,
        })
    }

    /// The law of a constant.
    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(&[(value, 1.0)], false)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Whether masses were rescaled at construction.
    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|&(x, m)| m * x))
    }

    /// True when every atom has the same value, so every λ vanishes.
    pub fn is_degenerate(&self) -> bool {
        let first = self.atoms[0].0;
        self.atoms.iter().all(|&(x, _)| x == first)
    }

    /// Combines atoms with equal values, keeping first-appearance order.
    pub fn merged(&self) -> Self {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.atoms.len());
        for &(x, m) in &self.atoms {
            match out.iter_mut().find(|(v, _)| *v == x) {
                Some(slot) => slot.1 += m,
                None => out.push((x, m)),
            }
        }
        Self {
            atoms: out,
            normalized: self.normalized,
        }
    }

    pub fn log_moments(&self) -> LogMomentCache {
        LogMomentCache::new(self)
    }
}

/// Which evaluation path an order takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Generic,
    NearZero,
    NearOne,
}

/// A real moment order tagged with its evaluation branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderParam {
    s: f64,
    branch: Branch,
}

impl OrderParam {
    pub fn new(s: f64) -> Self {
        // The slack admits decimal edge orders such as 0.999, whose nearest
        // double lies one ulp outside the window.
        let window = SINGULAR_WINDOW * (1.0 + 1e-12);
        let branch = if s.abs() <= window {
            Branch::NearZero
        } else if (s - 1.0).abs() <= window {
            Branch::NearOne
        } else {
            Branch::Generic
        };
        Self { s, branch }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }
}

impl From<f64> for OrderParam {
    fn from(s: f64) -> Self {
        OrderParam::new(s)
    }
}

/// Log-moments that drive the series evaluation of λ near `s = 0` and `s = 1`.
///
/// With `M = ln E X` and `ℓ = ln X − M` (the log of `X / E X`):
/// `centered[k-1] = E[ℓ^k]` and `tilted[k-1] = E[(X / E X) ℓ^k]` for `k = 1..=SERIES_TERMS`.
/// Centring makes the series invariant under rescaling of `X`, which avoids
/// the cancellation between `E (ln X)^k` and `M^k` for laws far from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct LogMomentCache {
    pub mean: f64,
    pub log_mean: f64,
    pub centered: [f64; SERIES_TERMS],
    pub tilted: [f64; SERIES_TERMS],
    /// `E|ℓ|` and `E[(X / E X)|ℓ|]`, magnitude scales for the first-order terms.
    pub abs_centered: f64,
    pub abs_tilted: f64,
}

impl LogMomentCache {
    pub fn new(law: &DiscreteLaw) -> Self {
        let mean = law.mean();
        let log_mean = mean.ln();
        let mut centered = [CompensatedSum::new(); SERIES_TERMS];
        let mut tilted = [CompensatedSum::new(); SERIES_TERMS];
        let mut abs_centered = CompensatedSum::new();
        let mut abs_tilted = CompensatedSum::new();
        for &(x, m) in law.atoms() {
            let l = x.ln() - log_mean;
            let y = x / mean;
            let mut p = 1.0;
            for k in 0..SERIES_TERMS {
                p *= l;
                centered[k].add(m * p);
                tilted[k].add(m * y * p);
            }
            abs_centered.add(m * l.abs());
            abs_tilted.add(m * y * l.abs());
        }
        Self {
            mean,
            log_mean,
            centered: centered.map(|c| c.value()),
            tilted: tilted.map(|c| c.value()),
            abs_centered: abs_centered.value(),
            abs_tilted: abs_tilted.value(),
        }
    }

    /// `(λ_s, scale)` from the expansion around `s = 0`.
    pub fn near_zero(&self, s: f64) -> (f64, f64) {
        let (series, magnitude) = series_terms(&self.centered, self.abs_centered, s);
        let factor = self.mean.powf(s) / (1.0 - s);
        (-factor * series, factor.abs() * magnitude)
    }

    /// `(λ_s, scale)` from the expansion around `s = 1`.
    pub fn near_one(&self, s: f64) -> (f64, f64) {
        let u = s - 1.0;
        let (series, magnitude) = series_terms(&self.tilted, self.abs_tilted, u);
        let factor = self.mean.powf(s) / (1.0 + u);
        (factor * series, factor.abs() * magnitude)
    }
}

/// `Σ_k h^(k-1) m[k-1] / k!` and the sum of its term magnitudes, with
/// `abs_first` standing in for the first term.
fn series_terms(m: &[f64; SERIES_TERMS], abs_first: f64, h: f64) -> (f64, f64) {
    let mut coef = 1.0;
    let mut terms = [0.0; SERIES_TERMS];
    for (k, (t, &mk)) in terms.iter_mut().zip(m).enumerate() {
        *t = coef * mk;
        coef *= h / (k + 2) as f64;
    }
    let magnitude = abs_first + terms[1..].iter().map(|t| t.abs()).sum::<f64>();
    (compensated_sum(terms), magnitude)
}

/// Validated law construction; see [`DiscreteLaw::new`].
pub fn make_law(pairs: &[(f64, f64)], auto_normalize: bool) -> Result<DiscreteLaw> {
    DiscreteLaw::new(pairs, auto_normalize)
}

/// `E X^s` by compensated summation.
pub fn power_moment(law: &DiscreteLaw, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::NonFinite(s));
    }
    let value = compensated_sum(law.atoms().iter().map(|&(x, m)| m * x.powf(s)));
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { order: s })
    }
}

/// λ_s of `law` in double precision.
pub fn lambda(law: &DiscreteLaw, s: impl Into<OrderParam>) -> Result<f64> {
    lambda_with_scale(law, s.into()).map(|(v, _)| v)
}

/// λ_s in the requested precision, rounded to `f64`.
pub fn lambda_with(law: &DiscreteLaw, s: f64, precision: Precision) -> Result<f64> {
    match precision {
        Precision::Double => lambda(law, s),
        Precision::DoubleDouble => lambda_dd(law, s).map(DoubleDouble::to_f64),
    }
}

/// λ_s together with the magnitude of the quantities whose difference forms it.
pub(crate) fn lambda_with_scale(law: &DiscreteLaw, order: OrderParam) -> Result<(f64, f64)> {
    let s = order.s();
    if !s.is_finite() {
        return Err(Error::NonFinite(s));
    }
    let (value, scale) = match order.branch() {
        Branch::NearZero => law.log_moments().near_zero(s),
        Branch::NearOne => law.log_moments().near_one(s),
        Branch::Generic => {
            let moment = power_moment(law, s)?;
            let mean_pow = law.mean().powf(s);
            if !mean_pow.is_finite() {
                return Err(Error::Overflow { order: s });
            }
            let denom = s * (s - 1.0);
            (
                (moment - mean_pow) / denom,
                (moment.abs() + mean_pow.abs()) / denom.abs(),
            )
        }
    };
    if !value.is_finite() {
        return Err(Error::Overflow { order: s });
    }
    Ok((clamp(value, scale), scale))
}

fn clamp(value: f64, scale: f64) -> f64 {
    if value < 0.0 && value >= -CLAMP_RELATIVE * scale {
        0.0
    } else {
        value
    }
}

/// A law prepared for repeated double-double evaluation of λ.
#[derive(Clone, Debug)]
pub struct DdLaw {
    masses: Vec<DoubleDouble>,
    values: Vec<DoubleDouble>,
    log_values: Vec<DoubleDouble>,
    mean: DoubleDouble,
    log_mean: DoubleDouble,
}

impl DdLaw {
    /// Masses are renormalized in double-double: a float mass sum that is
    /// off by one ulp would otherwise shift λ_s by about `ulp / |s|` near
    /// `s = 0`.
    pub fn new(law: &DiscreteLaw) -> Self {
        let total = law.atoms().iter().fold(DoubleDouble::ZERO, |acc, &(_, m)| {
            acc + DoubleDouble::from_f64(m)
        });
        let masses: Vec<DoubleDouble> = law
            .atoms()
            .iter()
            .map(|&(_, m)| DoubleDouble::from_f64(m) / total)
            .collect();
        let values: Vec<DoubleDouble> = law.atoms().iter().map(|&(x, _)| x.into()).collect();
        let log_values = values.iter().map(|x| x.ln()).collect();
        let mean = masses
            .iter()
            .zip(&values)
            .fold(DoubleDouble::ZERO, |acc, (&m, &x)| acc + m * x);
        Self {
            masses,
            values,
            log_values,
            mean,
            log_mean: mean.ln(),
        }
    }

    pub fn mean(&self) -> DoubleDouble {
        self.mean
    }

    /// `E X^s` in double-double.
    pub fn power_moment(&self, s: f64) -> Result<DoubleDouble> {
        let sd = DoubleDouble::from_f64(s);
        let total = self
            .masses
            .iter()
            .zip(&self.log_values)
            .fold(DoubleDouble::ZERO, |acc, (&m, &l)| acc + m * (sd * l).exp());
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::Overflow { order: s })
        }
    }

    /// `(λ_s, scale)`. Exact orders 0 and 1 use the log forms; every other
    /// order uses the quotient, which keeps about `32 + log10|s(s-1)|`
    /// significant digits.
    pub fn lambda_with_scale(&self, s: f64) -> Result<(DoubleDouble, DoubleDouble)> {
        if !s.is_finite() {
            return Err(Error::NonFinite(s));
        }
        let (value, scale) = if s == 0.0 {
            let e_log = self
                .masses
                .iter()
                .zip(&self.log_values)
                .fold(DoubleDouble::ZERO, |acc, (&m, &l)| acc + m * l);
            (self.log_mean - e_log, self.log_mean.abs() + e_log.abs())
        } else if s == 1.0 {
            let e_xlogx = self
                .masses
                .iter()
                .zip(self.values.iter().zip(&self.log_values))
                .fold(DoubleDouble::ZERO, |acc, (&m, (&x, &l))| acc + m * x * l);
            let rhs = self.mean * self.log_mean;
            (e_xlogx - rhs, e_xlogx.abs() + rhs.abs())
        } else {
            let moment = self.power_moment(s)?;
            let mean_pow = (DoubleDouble::from_f64(s) * self.log_mean).exp();
            if !mean_pow.is_finite() {
                return Err(Error::Overflow { order: s });
            }
            let denom = DoubleDouble::mul_f64_f64(s, s) - DoubleDouble::from_f64(s);
            (
                (moment - mean_pow) / denom,
                (moment.abs() + mean_pow.abs()) / denom.abs(),
            )
        };
        if !value.is_finite() {
            return Err(Error::Overflow { order: s });
        }
        let clamped =
            if value.is_sign_negative() && value.to_f64() >= -CLAMP_RELATIVE * scale.to_f64() {
                DoubleDouble::ZERO
            } else {
                value
            };
        Ok((clamped, scale))
    }

    pub fn lambda(&self, s: f64) -> Result<DoubleDouble> {
        self.lambda_with_scale(s).map(|(v, _)| v)
    }
}

/// λ_s of `law` in double-double precision.
pub fn lambda_dd(law: &DiscreteLaw, s: f64) -> Result<DoubleDouble> {
    DdLaw::new(law).lambda(s)
}

/// The convex kernel `f_s` with `f_s(1) = 0`, `f_s'' (x) = x^(s-2)`:
///
/// ```text
/// f_s(x) = (x^s − s x + s − 1) / (s(s − 1)),   f_0(x) = x − log x − 1,
/// f_1(x) = x log x − x + 1.
/// ```
///
/// Evaluated through `expm1` so that it stays accurate for `s` near 0 or 1.
/// Returns NaN for `x <= 0`.
pub fn f_pointwise(s: f64, x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let l = x.ln();
    if s == 0.0 {
        x - 1.0 - l
    } else if s == 1.0 {
        x * l - x + 1.0
    } else if s < 0.5 {
        // (x^s − 1)/s − (x − 1), over s − 1
        ((s * l).exp_m1() / s - (x - 1.0)) / (s - 1.0)
    } else {
        // x (x^u − 1)/u − (x − 1) with u = s − 1, over s
        let u = s - 1.0;
        (x * (u * l).exp_m1() / u - (x - 1.0)) / s
    }
}
