use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_weights, mid, DoubleDoubleLambda, DoubleLambda, Forms, LambdaSource, Tracking};
use crate::error::{Error, Result};
use crate::law::{DiscreteLaw, Precision};
use crate::scalar::Scalar;

/// Relative part of the pass threshold `residual >= −(TOL_REL·scale + TOL_ABS)`.
pub const TOL_REL: f64 = 1e-12;
/// Absolute floor of the pass threshold.
pub const TOL_ABS: f64 = 1e-300;
/// Double-precision residuals below `ESCALATION_FACTOR` tolerances are
/// re-evaluated in double-double before a verdict is given.
pub const ESCALATION_FACTOR: f64 = 1e3;

/// Free parameters of a check, in the order documented on [`CheckId::arity`].
pub type FormParams = Vec<f64>;

pub(crate) fn tolerance(scale: f64) -> f64 {
    TOL_REL * scale + TOL_ABS
}

/// `lhs − rhs` of an inequality claimed as `lhs >= rhs`, with
/// `scale = |lhs| + |rhs|`.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual<T> {
    pub residual: T,
    pub scale: T,
}

impl<T: Scalar> Residual<T> {
    pub fn difference(lhs: T, rhs: T) -> Self {
        Self {
            scale: lhs.abs() + rhs.abs(),
            residual: lhs - rhs,
        }
    }

    pub fn zero() -> Self {
        Self {
            residual: T::zero(),
            scale: T::zero(),
        }
    }

    pub fn passes(&self) -> bool {
        self.residual.to_f64() >= -tolerance(self.scale.to_f64())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckId {
    Jensen,
    LogConvex,
    TheoremB,
    Theorem1,
    Corollary1,
    Theorem2,
    Theorem3,
    Lemma2,
    Corollary2,
    Theorem4,
    Theorem5,
    Conjecture1,
    Conjecture2,
}

impl CheckId {
    pub const ALL: [CheckId; 13] = [
        CheckId::Jensen,
        CheckId::LogConvex,
        CheckId::TheoremB,
        CheckId::Theorem1,
        CheckId::Corollary1,
        CheckId::Theorem2,
        CheckId::Theorem3,
        CheckId::Lemma2,
        CheckId::Corollary2,
        CheckId::Theorem4,
        CheckId::Theorem5,
        CheckId::Conjecture1,
        CheckId::Conjecture2,
    ];

    /// Every check backed by a proof.
    pub const PROVED: [CheckId; 11] = [
        CheckId::Jensen,
        CheckId::LogConvex,
        CheckId::TheoremB,
        CheckId::Theorem1,
        CheckId::Corollary1,
        CheckId::Theorem2,
        CheckId::Theorem3,
        CheckId::Lemma2,
        CheckId::Corollary2,
        CheckId::Theorem4,
        CheckId::Theorem5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Jensen => "jensen",
            CheckId::LogConvex => "logconvex",
            CheckId::TheoremB => "theoremb",
            CheckId::Theorem1 => "theorem1",
            CheckId::Corollary1 => "corollary1",
            CheckId::Theorem2 => "theorem2",
            CheckId::Theorem3 => "theorem3",
            CheckId::Lemma2 => "lemma2",
            CheckId::Corollary2 => "corollary2",
            CheckId::Theorem4 => "theorem4",
            CheckId::Theorem5 => "theorem5",
            CheckId::Conjecture1 => "conjecture1",
            CheckId::Conjecture2 => "conjecture2",
        }
    }

    /// Parameter layout:
    ///
    /// | check | params |
    /// |---|---|
    /// | jensen | `s` |
    /// | logconvex | `s t` |
    /// | theoremb | `r s t` with `r < s < t` |
    /// | theorem1, theorem3 | `s t u v` |
    /// | corollary1 | `a t u` |
    /// | theorem2 | `p q s t u v` |
    /// | lemma2 | `s t u` |
    /// | corollary2 | `a x y` |
    /// | theorem4 | `r s v` |
    /// | theorem5 | `r s u v` |
    /// | conjecture1 | `r1 s1 u1 v1 r2 s2 u2 v2` |
    /// | conjecture2 | `a x y z v` |
    pub fn arity(self) -> usize {
        match self {
            CheckId::Jensen => 1,
            CheckId::LogConvex => 2,
            CheckId::TheoremB
            | CheckId::Corollary1
            | CheckId::Lemma2
            | CheckId::Corollary2
            | CheckId::Theorem4 => 3,
            CheckId::Theorem1 | CheckId::Theorem3 | CheckId::Theorem5 => 4,
            CheckId::Conjecture2 => 5,
            CheckId::Theorem2 => 6,
            CheckId::Conjecture1 => 8,
        }
    }

    pub fn is_conjecture(self) -> bool {
        matches!(self, CheckId::Conjecture1 | CheckId::Conjecture2)
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown check `{s}`")))
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one inequality check. `residual >= 0` means the inequality holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub check_id: CheckId,
    pub residual: f64,
    pub scale: f64,
    pub passed: bool,
    pub params: Vec<f64>,
    /// Arithmetic that produced `residual`.
    pub precision: Precision,
}

impl ResidualReport {
    pub fn scaled_residual(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            0.0
        }
    }
}

/// The three quantities of the Theorem 2 proof chain `first >= middle >= last`.
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem2Chain<T> {
    /// `w(s,t) w(u,v)`
    pub first: T,
    /// `[p²λ_{(s+u)/2} + pq(λ_{(s+v)/2} + λ_{(t+u)/2}) + q²λ_{(t+v)/2}]²`
    pub middle: T,
    /// `w²((s+u)/2, (t+v)/2)`
    pub last: T,
}

/// Coefficients of the quadratic `ψ(a,1,c,1)` (with `u = r`) used to prove
/// Theorem 4, and the resulting `D = φ(r,v;r,s)` and `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem4Side<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
    pub epsilon: T,
    pub eta: T,
    pub d: T,
    /// `None` when `α = 0` or `D = 0`.
    pub e: Option<T>,
}

fn arity(id: CheckId, params: &[f64]) -> Result<()> {
    if params.len() == id.arity() {
        Ok(())
    } else {
        Err(Error::ArityMismatch {
            check: id.name(),
            expected: id.arity(),
            got: params.len(),
        })
    }
}

impl<L: LambdaSource> Forms<L> {
    /// Residual of `id` at `params`.
    pub fn residual(&self, id: CheckId, params: &[f64]) -> Result<Residual<L::Value>> {
        arity(id, params)?;
        let p = params;
        match id {
            CheckId::Jensen => Ok(Residual {
                residual: self.lambda(p[0])?,
                scale: self.source().lambda_scale(p[0])?,
            }),
            CheckId::LogConvex => {
                let (residual, scale) = self.xi_parts(p[0], p[1])?;
                Ok(Residual { residual, scale })
            }
            CheckId::TheoremB => self.theorem_b(p[0], p[1], p[2]),
            CheckId::Theorem1 => self.theorem1(p[0], p[1], p[2], p[3]),
            CheckId::Corollary1 => {
                let (a, t, u) = (p[0], p[1], p[2]);
                let lhs = self.mu(a, t)? * self.mu(a, u)?;
                Ok(Residual::difference(lhs, self.mu(a, mid(t, u))?.square()))
            }
            CheckId::Theorem2 => {
                check_weights(p[0], p[1])?;
                let chain = self.theorem2_chain(p[0], p[1], p[2], p[3], p[4], p[5])?;
                Ok(Residual::difference(chain.first, chain.last))
            }
            CheckId::Theorem3 => self.phi_parts(p[0], p[1], p[2], p[3]),
            CheckId::Lemma2 => self.phi_parts(p[0], p[1], p[0], p[2]),
            CheckId::Corollary2 => self.theta_parts(p[0], p[1], p[2]),
            CheckId::Theorem4 => self.theorem4(p[0], p[1], p[2]),
            CheckId::Theorem5 => self.theorem5(p[0], p[1], p[2], p[3]),
            CheckId::Conjecture1 => {
                self.conjecture1([p[0], p[1], p[2], p[3]], [p[4], p[5], p[6], p[7]])
            }
            CheckId::Conjecture2 => self.conjecture2(p[0], p[1], p[2], p[3], p[4]),
        }
    }

    /// `(λ_s)^{t−r} <= (λ_r)^{t−s} (λ_t)^{s−r}` in log form, or, for scalars
    /// without a logarithm, in power form with integer exponents.
    fn theorem_b(&self, r: f64, s: f64, t: f64) -> Result<Residual<L::Value>> {
        if !(r < s && s < t) {
            return Err(Error::OrderViolation { r, s, t });
        }
        let (lr, ls, lt) = (self.lambda(r)?, self.lambda(s)?, self.lambda(t)?);
        let zero = L::Value::zero();
        if lr <= zero || ls <= zero || lt <= zero {
            // Only degenerate laws have a vanishing λ, and then all of them vanish.
            return Ok(Residual::zero());
        }
        let (rv, sv, tv) = (
            L::Value::from_f64(r),
            L::Value::from_f64(s),
            L::Value::from_f64(t),
        );
        match (lr.ln(), ls.ln(), lt.ln()) {
            (Some(ln_r), Some(ln_s), Some(ln_t)) => {
                let a = (tv.clone() - sv.clone()) * ln_r;
                let b = (sv - rv.clone()) * ln_t;
                let c = (tv - rv) * ln_s;
                let scale = a.abs() + b.abs() + c.abs();
                Ok(Residual {
                    residual: a + b - c,
                    scale,
                })
            }
            _ => {
                let exponent = |x: f64| -> Result<u32> {
                    if x.fract() == 0.0 && x > 0.0 && x <= u32::MAX as f64 {
                        Ok(x as u32)
                    } else {
                        Err(Error::NotCertifiable(format!(
                            "power form of theoremb needs integer exponents, got {x}"
                        )))
                    }
                };
                let rhs = lr.powi(exponent(t - s)?) * lt.powi(exponent(s - r)?);
                let lhs = ls.powi(exponent(t - r)?);
                Ok(Residual::difference(rhs, lhs))
            }
        }
    }

    fn theorem1(&self, s: f64, t: f64, u: f64, v: f64) -> Result<Residual<L::Value>> {
        let lhs = self.tau(s, t)? * self.tau(u, v)?;
        let bracket = self.tau_gap(mid(s, u), mid(t, v), mid(s, v), mid(t, u))?;
        Ok(Residual::difference(lhs, bracket.square()))
    }

    pub fn theorem2_chain(
        &self,
        p: f64,
        q: f64,
        s: f64,
        t: f64,
        u: f64,
        v: f64,
    ) -> Result<Theorem2Chain<L::Value>> {
        check_weights(p, q)?;
        let first = self.w_unchecked(p, q, s, t)? * self.w_unchecked(p, q, u, v)?;
        let (pv, qv) = (L::Value::from_f64(p), L::Value::from_f64(q));
        let inner = pv.square() * self.lambda(mid(s, u))?
            + pv * qv.clone() * (self.lambda(mid(s, v))? + self.lambda(mid(t, u))?)
            + qv.square() * self.lambda(mid(t, v))?;
        let last = self.w_unchecked(p, q, mid(s, u), mid(t, v))?.square();
        Ok(Theorem2Chain {
            first,
            middle: inner.square(),
            last,
        })
    }

    fn theorem4(&self, r: f64, s: f64, v: f64) -> Result<Residual<L::Value>> {
        let lhs = self.phi(r, s, r, v)? * self.phi(r, v, s, v)?;
        let first = self.xi(r, v)? * self.xi_gap(s, mid(r, v), mid(r, s), mid(s, v))?;
        let second = self.xi_gap(r, mid(s, v), mid(r, s), mid(r, v))?
            * self.xi_gap(v, mid(r, s), mid(r, v), mid(s, v))?;
        Ok(Residual::difference(lhs, (first + second).square()))
    }

    /// Lemma 3 data for the Theorem 4 proof; `D >= 0` and `E >= 0` hold, and
    /// `α·D·E` equals the Theorem 4 residual.
    pub fn theorem4_side(&self, r: f64, s: f64, v: f64) -> Result<Theorem4Side<L::Value>> {
        let alpha = self.xi(r, v)?;
        let beta = self.xi(r, s)?;
        let gamma = -self.xi_gap(r, mid(s, v), mid(r, s), mid(r, v))?;
        let delta = self.xi_gap(v, mid(r, s), mid(v, s), mid(r, v))?;
        let epsilon = self.xi_gap(s, mid(r, v), mid(r, s), mid(s, v))?;
        let eta = self.xi(s, v)?;
        let d = alpha.clone() * beta.clone() - gamma.square();
        let zero = L::Value::zero();
        let e = if alpha == zero || d == zero {
            None
        } else {
            let cross = alpha.clone() * epsilon.clone() - gamma.clone() * delta.clone();
            Some(eta.clone() - (delta.square() + cross.square() / d.clone()) / alpha.clone())
        };
        Ok(Theorem4Side {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            eta,
            d,
            e,
        })
    }

    fn theorem5(&self, r: f64, s: f64, u: f64, v: f64) -> Result<Residual<L::Value>> {
        let lhs = self.phi(r, s, s, u)? * self.phi(r, s, s, v)?;
        let first = self.xi(r, s)? * self.xi_gap(s, mid(u, v), mid(s, u), mid(s, v))?;
        let second = self.xi_gap(s, mid(r, u), mid(r, s), mid(s, u))?
            * self.xi_gap(s, mid(r, v), mid(r, s), mid(s, v))?;
        Ok(Residual::difference(lhs, (first - second).square()))
    }

    /// The eight-parameter bracket exactly as displayed:
    /// `φ(r₁,s₁;u₁,v₁)φ(r₂,s₂;u₂,v₂) >= [A·B − C·D]²` with
    ///
    /// ```text
    /// A = ξ((r₁+r₂)/2, (s₁+s₂)/2) − ξ((r₁+s₂)/2, (s₁+r₂)/2)
    /// B = ξ((u₁+u₂)/2, (v₁+v₂)/2) − ξ((u₁+v₂)/2, (v₁+u₂)/2)
    /// C = ξ((r₁+u₂)/2, (s₁+v₂)/2) − ξ((r₁+v₂)/2, (s₁+u₂)/2)
    /// D = ξ((u₁+r₂)/2, (v₁+s₂)/2) − ξ((u₁+s₂)/2, (v₁+r₂)/2)
    /// ```
    ///
    /// Each difference pairs two arguments with equal sums, so it is evaluated
    /// through [`Forms::xi_gap`].
    fn conjecture1(&self, first: [f64; 4], second: [f64; 4]) -> Result<Residual<L::Value>> {
        let [r1, s1, u1, v1] = first;
        let [r2, s2, u2, v2] = second;
        let lhs = self.phi(r1, s1, u1, v1)? * self.phi(r2, s2, u2, v2)?;
        let a = self.xi_gap(mid(r1, r2), mid(s1, s2), mid(r1, s2), mid(s1, r2))?;
        let b = self.xi_gap(mid(u1, u2), mid(v1, v2), mid(u1, v2), mid(v1, u2))?;
        let c = self.xi_gap(mid(r1, u2), mid(s1, v2), mid(r1, v2), mid(s1, u2))?;
        let d = self.xi_gap(mid(u1, r2), mid(v1, s2), mid(u1, s2), mid(v1, r2))?;
        Ok(Residual::difference(lhs, (a * b - c * d).square()))
    }

    fn conjecture2(&self, a: f64, x: f64, y: f64, z: f64, v: f64) -> Result<Residual<L::Value>> {
        let lhs = self.theta(a, x, y)? * self.theta(a, z, v)?;
        let bracket = self.theta_gap(a, mid(x, z), mid(y, v), mid(x, v), mid(y, z))?;
        Ok(Residual::difference(lhs, bracket.square()))
    }
}

/// Residual and scale of `id` in `precision`. The scale is the summed
/// magnitude of every product the two sides are built from, so exact
/// cancellations (both sides zero, say) are judged against the size of the
/// terms that cancelled rather than against rounding noise.
pub(crate) fn scaled_residual(
    id: CheckId,
    law: &DiscreteLaw,
    params: &[f64],
    precision: Precision,
) -> Result<(f64, f64)> {
    fn run<L: LambdaSource>(src: L, id: CheckId, params: &[f64]) -> Result<(f64, f64)> {
        let r = Forms::new(Tracking(src)).residual(id, params)?;
        let scale = r.scale.to_f64().max(r.residual.magnitude());
        Ok((r.residual.to_f64(), scale))
    }
    match precision {
        Precision::Double => run(DoubleLambda::new(law), id, params),
        Precision::DoubleDouble => run(DoubleDoubleLambda::new(law), id, params),
    }
}

fn report(
    id: CheckId,
    params: &[f64],
    (residual, scale): (f64, f64),
    precision: Precision,
) -> ResidualReport {
    ResidualReport {
        check_id: id,
        residual,
        scale,
        passed: residual >= -tolerance(scale),
        params: params.to_vec(),
        precision,
    }
}

/// Evaluates `id` in double precision and re-evaluates in double-double
/// whenever the residual is below `ESCALATION_FACTOR` tolerances, so a
/// failing report has survived the extended-precision pass.
pub fn check_inequality(id: CheckId, law: &DiscreteLaw, params: &[f64]) -> Result<ResidualReport> {
    check_inequality_from(id, law, params, Precision::Double)
}

/// Like [`check_inequality`], starting from `precision`.
pub fn check_inequality_from(
    id: CheckId,
    law: &DiscreteLaw,
    params: &[f64],
    precision: Precision,
) -> Result<ResidualReport> {
    if precision == Precision::Double {
        let r = scaled_residual(id, law, params, Precision::Double)?;
        if r.0 >= ESCALATION_FACTOR * tolerance(r.1) {
            return Ok(report(id, params, r, Precision::Double));
        }
    }
    let r = scaled_residual(id, law, params, Precision::DoubleDouble)?;
    Ok(report(id, params, r, Precision::DoubleDouble))
}

/// Evaluates `id` in exactly the requested precision, without escalation.
pub fn check_with_precision(
    id: CheckId,
    law: &DiscreteLaw,
    params: &[f64],
    precision: Precision,
) -> Result<ResidualReport> {
    let r = scaled_residual(id, law, params, precision)?;
    Ok(report(id, params, r, precision))
}
