//! Exact rational evaluation of moments, λ and every check at integer
//! orders. Used to certify the sign of residuals that floating point cannot
//! settle.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::forms::{CheckId, Forms, LambdaSource};
use crate::law::DiscreteLaw;
use crate::scalar;

/// A finite law with positive rational atoms whose masses sum to exactly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalLaw {
    atoms: Vec<(BigRational, BigRational)>,
}

impl RationalLaw {
    pub fn new(atoms: Vec<(BigRational, BigRational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty);
        }
        for (value, mass) in &atoms {
            if !value.is_positive() {
                return Err(Error::NonPositiveValue(scalar::Scalar::to_f64(value)));
            }
            if !mass.is_positive() {
                return Err(Error::NonPositiveMass(scalar::Scalar::to_f64(mass)));
            }
        }
        let total: BigRational = atoms.iter().map(|(_, m)| m.clone()).sum();
        if !total.is_one() {
            return Err(Error::InexactMassSum(total.to_string()));
        }
        Ok(Self { atoms })
    }

    /// Two-point law: value `x` with mass `p`, value `y` with mass `1 − p`.
    pub fn two_point(x: BigRational, y: BigRational, p: BigRational) -> Result<Self> {
        let q = BigRational::one() - p.clone();
        Self::new(vec![(x, p), (y, q)])
    }

    pub fn atoms(&self) -> &[(BigRational, BigRational)] {
        &self.atoms
    }

    pub fn mean(&self) -> BigRational {
        self.atoms.iter().map(|(x, m)| x * m).sum()
    }

    /// The nearest floating-point law (masses renormalized after rounding).
    pub fn to_float_law(&self) -> Result<DiscreteLaw> {
        let pairs: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .map(|(x, m)| (scalar::Scalar::to_f64(x), scalar::Scalar::to_f64(m)))
            .collect();
        DiscreteLaw::new(&pairs, true)
    }
}

fn rational_pow(x: &BigRational, s: i64) -> BigRational {
    let n = u32::try_from(s.unsigned_abs()).expect("order fits in u32");
    if s >= 0 {
        scalar::Scalar::powi(x, n)
    } else {
        scalar::Scalar::powi(&x.recip(), n)
    }
}

/// `E X^s` for integer `s`.
pub fn exact_power_moment(law: &RationalLaw, s: i64) -> BigRational {
    law.atoms()
        .iter()
        .map(|(x, m)| m * rational_pow(x, s))
        .sum()
}

fn exact_lambda_parts(law: &RationalLaw, s: i64) -> Result<(BigRational, BigRational)> {
    if s == 0 || s == 1 {
        return Err(Error::SingularOrder(s));
    }
    let moment = exact_power_moment(law, s);
    let mean_pow = rational_pow(&law.mean(), s);
    let denom = BigRational::from_integer(BigInt::from(s) * BigInt::from(s - 1));
    let scale = (moment.abs() + mean_pow.abs()) / denom.abs();
    Ok(((moment - mean_pow) / denom, scale))
}

/// λ_s for integer `s ∉ {0, 1}`.
pub fn exact_lambda(law: &RationalLaw, s: i64) -> Result<BigRational> {
    exact_lambda_parts(law, s).map(|p| p.0)
}

fn integer_order(s: f64) -> Result<i64> {
    if s.fract() == 0.0 && s.abs() <= 1e15 {
        Ok(s as i64)
    } else {
        Err(Error::NonIntegerMidpoint(s))
    }
}

/// Exact λ source with memoization; non-integer orders and orders 0, 1 are errors.
#[derive(Debug)]
pub struct ExactLambda<'a> {
    law: &'a RationalLaw,
    memo: RefCell<HashMap<i64, (BigRational, BigRational)>>,
}

impl<'a> ExactLambda<'a> {
    pub fn new(law: &'a RationalLaw) -> Self {
        Self {
            law,
            memo: RefCell::default(),
        }
    }

    fn get(&self, s: f64) -> Result<(BigRational, BigRational)> {
        let k = integer_order(s)?;
        if let Some(hit) = self.memo.borrow().get(&k) {
            return Ok(hit.clone());
        }
        let pair = exact_lambda_parts(self.law, k)?;
        self.memo.borrow_mut().insert(k, pair.clone());
        Ok(pair)
    }
}

impl LambdaSource for ExactLambda<'_> {
    type Value = BigRational;

    fn lambda(&self, s: f64) -> Result<BigRational> {
        self.get(s).map(|p| p.0)
    }

    fn lambda_scale(&self, s: f64) -> Result<BigRational> {
        self.get(s).map(|p| p.1)
    }
}

impl<'a> Forms<ExactLambda<'a>> {
    pub fn exact(law: &'a RationalLaw) -> Self {
        Forms::new(ExactLambda::new(law))
    }
}

/// `φ(s,t;u,v)` exactly. Every order it touches, midpoints included, must be
/// an integer outside `{0, 1}`.
pub fn exact_phi(law: &RationalLaw, s: i64, t: i64, u: i64, v: i64) -> Result<BigRational> {
    Forms::exact(law).phi(s as f64, t as f64, u as f64, v as f64)
}

/// `ξ(s,t)` exactly.
pub fn exact_xi(law: &RationalLaw, s: i64, t: i64) -> Result<BigRational> {
    Forms::exact(law).xi(s as f64, t as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: &BigRational) -> Self {
        if x.is_negative() {
            Sign::Negative
        } else if x.is_zero() {
            Sign::Zero
        } else {
            Sign::Positive
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "negative",
            Sign::Zero => "zero",
            Sign::Positive => "positive",
        })
    }
}

fn serialize_rational<S: Serializer>(
    x: &BigRational,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&x.to_string())
}

/// Exact sign of a check's residual. `Negative` is a certified counterexample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactVerdict {
    pub check_id: CheckId,
    #[serde(serialize_with = "serialize_rational")]
    pub value: BigRational,
    pub sign: Sign,
}

/// Evaluates the residual of `id` exactly on `law`.
///
/// Orders (and all derived midpoints) must be integers outside `{0, 1}`;
/// otherwise the result is [`Error::NotCertifiable`]. Theorem B is compared
/// in power form, which additionally needs integer exponent gaps.
pub fn certify(id: CheckId, law: &RationalLaw, params: &[f64]) -> Result<ExactVerdict> {
    let residual = Forms::exact(law)
        .residual(id, params)
        .map_err(|e| match e {
            Error::SingularOrder(_) | Error::NonIntegerMidpoint(_) => {
                Error::NotCertifiable(e.to_string())
            }
            other => other,
        })?;
    let value = residual.residual;
    Ok(ExactVerdict {
        check_id: id,
        sign: Sign::of(&value),
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn half_half() -> RationalLaw {
        RationalLaw::new(vec![(r(1, 1), r(1, 2)), (r(2, 1), r(1, 2))]).unwrap()
    }

    #[test]
    fn power_moments() {
        let three = RationalLaw::new(vec![(r(3, 1), r(1, 1))]).unwrap();
        assert_eq!(exact_power_moment(&three, 7), r(2187, 1));
        assert_eq!(exact_power_moment(&half_half(), 2), r(5, 2));
        assert_eq!(exact_power_moment(&half_half(), -1), r(3, 4));
    }

    #[test]
    fn lambdas() {
        let one = RationalLaw::new(vec![(r(5, 3), r(1, 1))]).unwrap();
        assert_eq!(exact_lambda(&one, 4).unwrap(), r(0, 1));
        assert_eq!(exact_lambda(&half_half(), 2).unwrap(), r(1, 8));
        assert_eq!(exact_lambda(&half_half(), -1).unwrap(), r(1, 24));
        assert_eq!(exact_lambda(&half_half(), 0), Err(Error::SingularOrder(0)));
        assert_eq!(exact_lambda(&half_half(), 1), Err(Error::SingularOrder(1)));
    }

    #[test]
    fn construction_requires_exact_unit_mass() {
        assert!(matches!(
            RationalLaw::new(vec![(r(1, 1), r(1, 3)), (r(2, 1), r(1, 3))]),
            Err(Error::InexactMassSum(_))
        ));
        assert!(matches!(
            RationalLaw::new(vec![(r(0, 1), r(1, 1))]),
            Err(Error::NonPositiveValue(_))
        ));
        assert_eq!(RationalLaw::new(vec![]), Err(Error::Empty));
    }

    // C(p,q) = (pq)⁴/5529600 · [35 + 11(p−q)² + 17(p−q)⁴ + (p−q)⁶] at p = q = ½:
    // (1/256)·35/5529600 = 7/283115520.
    #[test]
    fn sharp_example_at_equal_masses() {
        let law = RationalLaw::two_point(r(2, 1), r(1, 1), r(1, 2)).unwrap();
        assert_eq!(exact_phi(&law, 2, 4, 2, 6).unwrap(), r(7, 283_115_520));
        assert_eq!(exact_phi(&law, 2, 4, 2, 4).unwrap(), r(0, 1));
    }

    #[test]
    fn phi_rejects_half_integer_midpoints() {
        assert!(matches!(
            exact_phi(&half_half(), 2, 3, 2, 6),
            Err(Error::NonIntegerMidpoint(_))
        ));
    }

    #[test]
    fn certify_examples() {
        let law = RationalLaw::two_point(r(2, 1), r(1, 1), r(1, 2)).unwrap();
        let v = certify(CheckId::Theorem3, &law, &[2.0, 4.0, 2.0, 6.0]).unwrap();
        assert_eq!(v.sign, Sign::Positive);

        let one = RationalLaw::new(vec![(r(7, 2), r(1, 1))]).unwrap();
        for (id, params) in [
            (CheckId::Jensen, vec![5.0]),
            (CheckId::LogConvex, vec![2.0, 4.0]),
            (CheckId::Theorem3, vec![2.0, 4.0, 2.0, 6.0]),
        ] {
            assert_eq!(certify(id, &one, &params).unwrap().sign, Sign::Zero);
        }

        // ξ(2,4) = λ₂λ₄ − λ₃² on the uniform law on {1, 2}
        let v = certify(CheckId::LogConvex, &half_half(), &[2.0, 4.0]).unwrap();
        let expected = exact_lambda(&half_half(), 2).unwrap()
            * exact_lambda(&half_half(), 4).unwrap()
            - scalar::Scalar::square(&exact_lambda(&half_half(), 3).unwrap());
        assert_eq!(v.value, expected);
        assert_eq!(v.value, r(1, 1536));
        assert_eq!(v.sign, Sign::Positive);
    }

    #[test]
    fn certify_reports_uncertifiable_orders() {
        assert!(matches!(
            certify(CheckId::LogConvex, &half_half(), &[2.0, 3.0]),
            Err(Error::NotCertifiable(_))
        ));
        assert!(matches!(
            certify(CheckId::Jensen, &half_half(), &[1.0]),
            Err(Error::NotCertifiable(_))
        ));
    }

    #[test]
    fn theorem_b_power_form() {
        let v = certify(CheckId::TheoremB, &half_half(), &[2.0, 3.0, 4.0]).unwrap();
        // λ₂λ₄ − λ₃²
        assert_eq!(v.value, r(1, 1536));
    }
}
