//! Second- and third-order forms built from λ, and the residuals of the
//! inequalities they satisfy.
//!
//! Every form is written once against [`LambdaSource`], so the same code
//! evaluates in `f64`, in double-double, or exactly over the rationals
//! (see [`crate::exact`]).

mod check;
mod lemma3;

use std::cell::RefCell;
use std::collections::HashMap;
use std::str::FromStr;

use serde::Serialize;

pub use check::{
    check_inequality, check_inequality_from, check_with_precision, CheckId, FormParams, Residual,
    ResidualReport, Theorem2Chain, Theorem4Side, ESCALATION_FACTOR, TOL_ABS, TOL_REL,
};
pub(crate) use check::{scaled_residual, tolerance};
pub use lemma3::{lemma3_criterion, Lemma3Coefficients, Lemma3Verdict};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::law::{lambda_with_scale, DdLaw, DiscreteLaw, OrderParam, Precision};
use crate::scalar::{Scalar, Tracked};

/// Something that can produce λ_s in some scalar type.
pub trait LambdaSource {
    type Value: Scalar;

    fn lambda(&self, s: f64) -> Result<Self::Value>;

    /// Magnitude of the two terms whose difference gives λ_s.
    fn lambda_scale(&self, s: f64) -> Result<Self::Value>;
}

fn order_key(s: f64) -> u64 {
    // 0.0 and -0.0 are the same order.
    if s == 0.0 {
        0
    } else {
        s.to_bits()
    }
}

/// Double-precision λ with per-order memoization.
#[derive(Debug)]
pub struct DoubleLambda<'a> {
    law: &'a DiscreteLaw,
    memo: RefCell<HashMap<u64, (f64, f64)>>,
}

impl<'a> DoubleLambda<'a> {
    pub fn new(law: &'a DiscreteLaw) -> Self {
        Self {
            law,
            memo: RefCell::default(),
        }
    }

    fn get(&self, s: f64) -> Result<(f64, f64)> {
        let key = order_key(s);
        if let Some(&hit) = self.memo.borrow().get(&key) {
            return Ok(hit);
        }
        let pair = lambda_with_scale(self.law, OrderParam::new(s))?;
        self.memo.borrow_mut().insert(key, pair);
        Ok(pair)
    }
}

impl LambdaSource for DoubleLambda<'_> {
    type Value = f64;

    fn lambda(&self, s: f64) -> Result<f64> {
        self.get(s).map(|p| p.0)
    }

    fn lambda_scale(&self, s: f64) -> Result<f64> {
        self.get(s).map(|p| p.1)
    }
}

/// Double-double λ with per-order memoization.
#[derive(Debug)]
pub struct DoubleDoubleLambda {
    law: DdLaw,
    memo: RefCell<HashMap<u64, (DoubleDouble, DoubleDouble)>>,
}

impl DoubleDoubleLambda {
    pub fn new(law: &DiscreteLaw) -> Self {
        Self {
            law: DdLaw::new(law),
            memo: RefCell::default(),
        }
    }

    fn get(&self, s: f64) -> Result<(DoubleDouble, DoubleDouble)> {
        let key = order_key(s);
        if let Some(&hit) = self.memo.borrow().get(&key) {
            return Ok(hit);
        }
        let pair = self.law.lambda_with_scale(s)?;
        self.memo.borrow_mut().insert(key, pair);
        Ok(pair)
    }
}

impl LambdaSource for DoubleDoubleLambda {
    type Value = DoubleDouble;

    fn lambda(&self, s: f64) -> Result<DoubleDouble> {
        self.get(s).map(|p| p.0)
    }

    fn lambda_scale(&self, s: f64) -> Result<DoubleDouble> {
        self.get(s).map(|p| p.1)
    }
}

/// Wraps a λ source so every value carries the magnitude of its terms; a
/// residual evaluated this way knows the size of the products it cancelled.
#[derive(Debug)]
pub struct Tracking<L>(pub L);

impl<L: LambdaSource> LambdaSource for Tracking<L> {
    type Value = Tracked<L::Value>;

    fn lambda(&self, s: f64) -> Result<Self::Value> {
        self.0.lambda(s).map(Tracked::leaf)
    }

    fn lambda_scale(&self, s: f64) -> Result<Self::Value> {
        self.0.lambda_scale(s).map(Tracked::leaf)
    }
}

fn mid(a: f64, b: f64) -> f64 {
    (a + b) / 2.0
}

fn check_weights(p: f64, q: f64) -> Result<()> {
    if p < 0.0 || q < 0.0 || p.is_nan() || q.is_nan() {
        Err(Error::NegativeWeight { p, q })
    } else {
        Ok(())
    }
}

/// The named forms over one λ source.
#[derive(Debug)]
pub struct Forms<L> {
    src: L,
}

impl<'a> Forms<DoubleLambda<'a>> {
    pub fn double(law: &'a DiscreteLaw) -> Self {
        Forms::new(DoubleLambda::new(law))
    }
}

impl Forms<DoubleDoubleLambda> {
    pub fn double_double(law: &DiscreteLaw) -> Self {
        Forms::new(DoubleDoubleLambda::new(law))
    }
}

impl<L: LambdaSource> Forms<L> {
    pub fn new(src: L) -> Self {
        Self { src }
    }

    pub fn source(&self) -> &L {
        &self.src
    }

    pub fn lambda(&self, s: f64) -> Result<L::Value> {
        self.src.lambda(s)
    }

    /// `ξ(s,t) = λ_s λ_t − λ²_{(s+t)/2}`, the log-convexity defect.
    pub fn xi(&self, s: f64, t: f64) -> Result<L::Value> {
        Ok(self.xi_parts(s, t)?.0)
    }

    /// `(ξ(s,t), |λ_s λ_t| + λ²_{(s+t)/2})`.
    pub(crate) fn xi_parts(&self, s: f64, t: f64) -> Result<(L::Value, L::Value)> {
        let prod = self.lambda(s)? * self.lambda(t)?;
        let sq = self.lambda(mid(s, t))?.square();
        Ok((prod.clone() - sq.clone(), prod.abs() + sq))
    }

    /// `τ(s,t) = λ_s − 2λ_{(s+t)/2} + λ_t`, the convexity defect.
    pub fn tau(&self, s: f64, t: f64) -> Result<L::Value> {
        let m = self.lambda(mid(s, t))?;
        Ok(self.lambda(s)? - m.clone() - m + self.lambda(t)?)
    }

    /// `μ_a(t) = λ_t − 2λ_{t+a/2} + λ_{t+a}`, evaluated as `τ(t, t+a)`.
    pub fn mu(&self, a: f64, t: f64) -> Result<L::Value> {
        self.tau(t, t + a)
    }

    /// `w(s,t) = p²λ_s + 2pq λ_{(s+t)/2} + q²λ_t` for `p, q >= 0`.
    pub fn w(&self, p: f64, q: f64, s: f64, t: f64) -> Result<L::Value> {
        check_weights(p, q)?;
        self.w_unchecked(p, q, s, t)
    }

    fn w_unchecked(&self, p: f64, q: f64, s: f64, t: f64) -> Result<L::Value> {
        let p = L::Value::from_f64(p);
        let q = L::Value::from_f64(q);
        let pq = p.clone() * q.clone();
        Ok(p.square() * self.lambda(s)?
            + (pq.clone() + pq) * self.lambda(mid(s, t))?
            + q.square() * self.lambda(t)?)
    }

    /// `φ(s,t;u,v) = ξ(s,t)ξ(u,v) − [ξ((s+u)/2,(t+v)/2) − ξ((s+v)/2,(t+u)/2)]²`.
    pub fn phi(&self, s: f64, t: f64, u: f64, v: f64) -> Result<L::Value> {
        Ok(self.phi_parts(s, t, u, v)?.residual)
    }

    pub(crate) fn phi_parts(&self, s: f64, t: f64, u: f64, v: f64) -> Result<Residual<L::Value>> {
        let lhs = self.xi(s, t)? * self.xi(u, v)?;
        let bracket = self.xi_gap(mid(s, u), mid(t, v), mid(s, v), mid(t, u))?;
        Ok(Residual::difference(lhs, bracket.square()))
    }

    /// `ξ(a,b) − ξ(c,d)` for `a + b = c + d`. Both share the midpoint, so the
    /// `λ²` terms cancel exactly and the difference is `λ_a λ_b − λ_c λ_d`.
    /// This keeps the bracket exact when only the outer orders are integers.
    pub(crate) fn xi_gap(&self, a: f64, b: f64, c: f64, d: f64) -> Result<L::Value> {
        Ok(self.lambda(a)? * self.lambda(b)? - self.lambda(c)? * self.lambda(d)?)
    }

    /// `τ(a,b) − τ(c,d)` for `a + b = c + d`, which is `λ_a + λ_b − λ_c − λ_d`.
    pub(crate) fn tau_gap(&self, a: f64, b: f64, c: f64, d: f64) -> Result<L::Value> {
        Ok(self.lambda(a)? + self.lambda(b)? - self.lambda(c)? - self.lambda(d)?)
    }

    /// `θ_a(x,y) − θ_a(z,w)` for `x + y = z + w`, which is
    /// `σ_a(x)σ_a(y) − σ_a(z)σ_a(w)`.
    pub(crate) fn theta_gap(&self, a: f64, x: f64, y: f64, z: f64, w: f64) -> Result<L::Value> {
        Ok(self.sigma(a, x)? * self.sigma(a, y)? - self.sigma(a, z)? * self.sigma(a, w)?)
    }

    /// `σ_a(x) = ξ(x, x+a)`.
    pub fn sigma(&self, a: f64, x: f64) -> Result<L::Value> {
        self.xi(x, x + a)
    }

    /// `θ_a(x,y) = σ_a(x)σ_a(y) − σ_a²((x+y)/2)`.
    pub fn theta(&self, a: f64, x: f64, y: f64) -> Result<L::Value> {
        Ok(self.theta_parts(a, x, y)?.residual)
    }

    pub(crate) fn theta_parts(&self, a: f64, x: f64, y: f64) -> Result<Residual<L::Value>> {
        let lhs = self.sigma(a, x)? * self.sigma(a, y)?;
        let rhs = self.sigma(a, mid(x, y))?.square();
        Ok(Residual::difference(lhs, rhs))
    }

    /// The four-coefficient form
    ///
    /// ```text
    /// ψ(a,b,c,d) = [a²λ_r + 2abλ_{(r+s)/2} + b²λ_s][c²λ_u + 2cdλ_{(u+v)/2} + d²λ_v]
    ///            − [acλ_{(r+u)/2} + adλ_{(r+v)/2} + bcλ_{(s+u)/2} + bdλ_{(s+v)/2}]²
    /// ```
    ///
    /// which is non-negative for all real coefficients.
    pub fn psi(&self, coeffs: [f64; 4], orders: [f64; 4]) -> Result<L::Value> {
        Ok(self.psi_parts(coeffs, orders)?.residual)
    }

    pub(crate) fn psi_parts(
        &self,
        coeffs: [f64; 4],
        orders: [f64; 4],
    ) -> Result<Residual<L::Value>> {
        let [a, b, c, d] = coeffs.map(L::Value::from_f64);
        let [r, s, u, v] = orders;
        let two = L::Value::from_f64(2.0);
        let first = a.square() * self.lambda(r)?
            + two.clone() * a.clone() * b.clone() * self.lambda(mid(r, s))?
            + b.square() * self.lambda(s)?;
        let second = c.square() * self.lambda(u)?
            + two * c.clone() * d.clone() * self.lambda(mid(u, v))?
            + d.square() * self.lambda(v)?;
        let cross = a.clone() * c.clone() * self.lambda(mid(r, u))?
            + a * d.clone() * self.lambda(mid(r, v))?
            + b.clone() * c * self.lambda(mid(s, u))?
            + b * d * self.lambda(mid(s, v))?;
        Ok(Residual::difference(first * second, cross.square()))
    }
}

/// Forms that can be requested by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormId {
    Xi,
    Tau,
    Mu,
    W,
    Phi,
    Sigma,
    Theta,
    Psi,
}

impl FormId {
    pub const ALL: [FormId; 8] = [
        FormId::Xi,
        FormId::Tau,
        FormId::Mu,
        FormId::W,
        FormId::Phi,
        FormId::Sigma,
        FormId::Theta,
        FormId::Psi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormId::Xi => "xi",
            FormId::Tau => "tau",
            FormId::Mu => "mu",
            FormId::W => "w",
            FormId::Phi => "phi",
            FormId::Sigma => "sigma",
            FormId::Theta => "theta",
            FormId::Psi => "psi",
        }
    }

    /// Parameter order: xi/tau `s t`; mu `a t`; w `p q s t`; phi `s t u v`;
    /// sigma `a x`; theta `a x y`; psi `a b c d r s u v`.
    pub fn arity(self) -> usize {
        match self {
            FormId::Xi | FormId::Tau | FormId::Mu | FormId::Sigma => 2,
            FormId::Theta => 3,
            FormId::W | FormId::Phi => 4,
            FormId::Psi => 8,
        }
    }
}

impl FromStr for FormId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FormId::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown form `{s}`")))
    }
}

impl std::fmt::Display for FormId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl<L: LambdaSource> Forms<L> {
    /// Evaluates a form by name with its parameters in [`FormId::arity`] order.
    pub fn evaluate(&self, id: FormId, params: &[f64]) -> Result<L::Value> {
        if params.len() != id.arity() {
            return Err(Error::ArityMismatch {
                check: id.name(),
                expected: id.arity(),
                got: params.len(),
            });
        }
        let p = params;
        match id {
            FormId::Xi => self.xi(p[0], p[1]),
            FormId::Tau => self.tau(p[0], p[1]),
            FormId::Mu => self.mu(p[0], p[1]),
            FormId::W => self.w(p[0], p[1], p[2], p[3]),
            FormId::Phi => self.phi(p[0], p[1], p[2], p[3]),
            FormId::Sigma => self.sigma(p[0], p[1]),
            FormId::Theta => self.theta(p[0], p[1], p[2]),
            FormId::Psi => self.psi([p[0], p[1], p[2], p[3]], [p[4], p[5], p[6], p[7]]),
        }
    }
}

/// Evaluates a form on `law` in the requested precision.
pub fn evaluate_form(
    id: FormId,
    law: &DiscreteLaw,
    params: &[f64],
    precision: Precision,
) -> Result<f64> {
    match precision {
        Precision::Double => Forms::double(law).evaluate(id, params),
        Precision::DoubleDouble => Forms::double_double(law)
            .evaluate(id, params)
            .map(|v| v.to_f64()),
    }
}

pub fn xi(law: &DiscreteLaw, s: f64, t: f64) -> Result<f64> {
    Forms::double(law).xi(s, t)
}

pub fn tau(law: &DiscreteLaw, s: f64, t: f64) -> Result<f64> {
    Forms::double(law).tau(s, t)
}

pub fn mu(law: &DiscreteLaw, a: f64, t: f64) -> Result<f64> {
    Forms::double(law).mu(a, t)
}

pub fn w_form(law: &DiscreteLaw, p: f64, q: f64, s: f64, t: f64) -> Result<f64> {
    Forms::double(law).w(p, q, s, t)
}

pub fn phi(law: &DiscreteLaw, s: f64, t: f64, u: f64, v: f64) -> Result<f64> {
    Forms::double(law).phi(s, t, u, v)
}

pub fn sigma(law: &DiscreteLaw, a: f64, x: f64) -> Result<f64> {
    Forms::double(law).sigma(a, x)
}

pub fn theta(law: &DiscreteLaw, a: f64, x: f64, y: f64) -> Result<f64> {
    Forms::double(law).theta(a, x, y)
}

pub fn psi_form(law: &DiscreteLaw, coeffs: [f64; 4], orders: [f64; 4]) -> Result<f64> {
    Forms::double(law).psi(coeffs, orders)
}
