//! Fractional linear branches `x -> (c + d x) / (a + b x)`.
//!
//! A branch is stored as the integer matrix `[[a, b], [c, d]]`. With this
//! layout composition of maps is the ordinary matrix product and the adjoint
//! is the transpose.

use std::fmt;

use rug::{Float, Integer};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::rational::{denominator_lcm, parse_rational};
use crate::arith::{ArithError, Polynomial, Rational, RationalFunction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoebiusError {
    #[error("singular matrix (zero determinant)")]
    Singular,
    #[error("pole of the branch at x = {0}")]
    Pole(String),
    #[error("the identity has no isolated fixed points")]
    Identity,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MoebiusBranch {
    a: Integer,
    b: Integer,
    c: Integer,
    d: Integer,
}

impl MoebiusBranch {
    pub fn new(a: Integer, b: Integer, c: Integer, d: Integer) -> Result<Self, MoebiusError> {
        let m = Self { a, b, c, d };
        if m.det() == 0 {
            return Err(MoebiusError::Singular);
        }
        Ok(m.canonical())
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self, MoebiusError> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    /// Clears denominators, so `[[3, -3/4], [0, 3/4]]` becomes `[[4, -1], [0, 1]]`.
    pub fn from_rationals(
        a: &Rational,
        b: &Rational,
        c: &Rational,
        d: &Rational,
    ) -> Result<Self, MoebiusError> {
        let l = denominator_lcm([a, b, c, d]);
        let clear = |r: &Rational| -> Integer {
            let v = Rational::from(r * &l);
            v.numer().clone()
        };
        Self::new(clear(a), clear(b), clear(c), clear(d))
    }

    pub fn identity() -> Self {
        Self::from_ints(1, 0, 0, 1).unwrap()
    }

    /// `1 / (k + x)`, the continued fraction digit branch.
    pub fn gauss_digit(k: i64) -> Self {
        Self::from_ints(k, 1, 1, 0).unwrap()
    }

    pub fn a(&self) -> &Integer {
        &self.a
    }
    pub fn b(&self) -> &Integer {
        &self.b
    }
    pub fn c(&self) -> &Integer {
        &self.c
    }
    pub fn d(&self) -> &Integer {
        &self.d
    }

    pub fn entries(&self) -> [&Integer; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn rational_entries(&self) -> [Rational; 4] {
        self.entries().map(|e| Rational::from(e.clone()))
    }

    pub fn det(&self) -> Integer {
        Integer::from(&self.a * &self.d) - Integer::from(&self.b * &self.c)
    }

    fn canonical(mut self) -> Self {
        let g = self
            .entries()
            .iter()
            .fold(Integer::new(), |g, e| g.gcd(e));
        let first_negative = self
            .entries()
            .iter()
            .find(|e| ***e != 0)
            .map_or(false, |e| **e < 0);
        let g = if first_negative { -g } else { g };
        if g != 1 {
            for e in [&mut self.a, &mut self.b, &mut self.c, &mut self.d] {
                e.div_exact_mut(&g);
            }
        }
        self
    }

    pub fn denominator_at(&self, x: &Rational) -> Rational {
        Rational::from(x * &self.b) + &self.a
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, MoebiusError> {
        let den = self.denominator_at(x);
        if den == 0 {
            return Err(MoebiusError::Pole(x.to_string()));
        }
        Ok((Rational::from(x * &self.d) + &self.c) / den)
    }

    pub fn eval_float(&self, x: &Float) -> Float {
        let p = x.prec();
        let num = Float::with_val(p, x * &self.d) + &self.c;
        let den = Float::with_val(p, x * &self.b) + &self.a;
        num / den
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        (self.c.to_f64() + self.d.to_f64() * x) / (self.a.to_f64() + self.b.to_f64() * x)
    }

    /// `self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        let m = |p: &Integer, q: &Integer, r: &Integer, s: &Integer| {
            Integer::from(p * q) + Integer::from(r * s)
        };
        Self::new(
            m(&self.a, &other.a, &self.b, &other.c),
            m(&self.a, &other.b, &self.b, &other.d),
            m(&self.c, &other.a, &self.d, &other.c),
            m(&self.c, &other.b, &self.d, &other.d),
        )
        .expect("product of invertible matrices")
    }

    pub fn adjoint(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: self.c.clone(),
            c: self.b.clone(),
            d: self.d.clone(),
        }
        .canonical()
    }

    /// `x -> self(1 - x)`.
    pub fn flip(&self) -> Self {
        Self::new(
            Integer::from(&self.a + &self.b),
            Integer::from(-&self.b),
            Integer::from(&self.c + &self.d),
            Integer::from(-&self.d),
        )
        .expect("flip preserves invertibility")
    }

    pub fn inverse(&self) -> Self {
        Self::new(
            self.d.clone(),
            Integer::from(-&self.b),
            Integer::from(-&self.c),
            self.a.clone(),
        )
        .expect("adjugate of an invertible matrix")
    }

    pub fn is_identity(&self) -> bool {
        self.b == 0 && self.c == 0 && self.a == self.d
    }

    pub fn is_increasing(&self) -> bool {
        self.det() > 0
    }

    /// True when `a + b x` vanishes somewhere on the closed interval.
    pub fn has_pole_in(&self, lo: &Rational, hi: &Rational) -> bool {
        let l = self.denominator_at(lo);
        let h = self.denominator_at(hi);
        l.cmp0() != std::cmp::Ordering::Greater && h.cmp0() != std::cmp::Ordering::Less
            || l.cmp0() != std::cmp::Ordering::Less && h.cmp0() != std::cmp::Ordering::Greater
    }

    pub fn fixed_points(&self) -> Result<FixedPoints, MoebiusError> {
        if self.is_identity() {
            return Err(MoebiusError::Identity);
        }
        let quadratic = Polynomial::from_coeffs(vec![
            Rational::from(-&self.c),
            Rational::from(&self.a - &self.d),
            Rational::from(self.b.clone()),
        ]);
        let rational_roots = crate::arith::poly_roots_rational(&quadratic)?;
        let (disc, real_approx) = match quadratic.degree() {
            Some(2) => {
                let [c0, c1, c2] = [quadratic.coeff(0), quadratic.coeff(1), quadratic.coeff(2)];
                let disc = Rational::from(&c1 * &c1) - Rational::from(4 * Rational::from(&c2 * &c0));
                let roots = if disc < 0 {
                    Vec::new()
                } else {
                    let prec = 200;
                    let s = Float::with_val(prec, &disc).sqrt();
                    let mb = Float::with_val(prec, Rational::from(-&c1));
                    let two_a = Float::with_val(prec, Rational::from(2 * &c2));
                    let mut r = vec![
                        Float::with_val(prec, &mb - &s) / &two_a,
                        Float::with_val(prec, &mb + &s) / &two_a,
                    ];
                    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    r.dedup();
                    r
                };
                (Some(disc), roots)
            }
            Some(1) => {
                let r = Rational::from(-quadratic.coeff(0)) / quadratic.coeff(1);
                (None, vec![Float::with_val(200, &r)])
            }
            _ => (None, Vec::new()),
        };
        Ok(FixedPoints {
            quadratic,
            rational_roots,
            discriminant: disc,
            real_roots: real_approx,
        })
    }

    pub fn jacobian(&self) -> RationalFunction {
        let det = Rational::from(self.det().abs());
        let lin = Polynomial::linear(Rational::from(self.a.clone()), Rational::from(self.b.clone()));
        RationalFunction::new(Polynomial::constant(det), &lin * &lin)
            .expect("a + b x is not identically zero")
    }

    /// Image of `[0, 1]` as a sorted pair.
    pub fn image_of_unit(&self) -> Result<(Rational, Rational), MoebiusError> {
        let y0 = self.eval(&Rational::new())?;
        let y1 = self.eval(&Rational::from(1))?;
        Ok(if y0 <= y1 { (y0, y1) } else { (y1, y0) })
    }
}

/// Fixed points of a branch: the roots of `b x^2 + (a - d) x - c`.
#[derive(Clone, Debug)]
pub struct FixedPoints {
    pub quadratic: Polynomial,
    pub rational_roots: Vec<Rational>,
    /// `None` when the equation is not genuinely quadratic.
    pub discriminant: Option<Rational>,
    pub real_roots: Vec<Float>,
}

impl fmt::Display for MoebiusBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

#[derive(Serialize, Deserialize)]
struct BranchJson {
    a: String,
    b: String,
    c: String,
    d: String,
}

impl Serialize for MoebiusBranch {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BranchJson {
            a: self.a.to_string(),
            b: self.b.to_string(),
            c: self.c.to_string(),
            d: self.d.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MoebiusBranch {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = BranchJson::deserialize(d)?;
        let p = |s: &str| parse_rational(s).map_err(D::Error::custom);
        MoebiusBranch::from_rationals(&p(&j.a)?, &p(&j.b)?, &p(&j.c)?, &p(&j.d)?)
            .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{int, rat};

    fn m(a: i64, b: i64, c: i64, d: i64) -> MoebiusBranch {
        MoebiusBranch::from_ints(a, b, c, d).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(m(3, 0, 1, -1).eval(&int(0)).unwrap(), rat(1, 3));
        assert_eq!(MoebiusBranch::identity().eval(&rat(5, 7)).unwrap(), rat(5, 7));
        // V_gamma = (3 - 3x) / (6 - x)
        assert_eq!(m(6, -1, 3, -3).eval(&int(1)).unwrap(), int(0));
        assert_eq!(m(6, -1, 3, -3).eval(&int(0)).unwrap(), rat(1, 2));
        assert!(m(1, -1, 0, 1).eval(&int(1)).is_err());
    }

    #[test]
    fn compose_examples() {
        let alpha = m(2, 1, 1, -1);
        let gamma = m(6, -1, 3, -3);
        assert_eq!(alpha.compose(&gamma), m(15, -5, 3, 2));
        assert_eq!(alpha.compose(&MoebiusBranch::identity()), alpha);
        let beta = m(3, -1, 3, -2);
        assert_eq!(beta.compose(&beta), m(6, -1, 3, 1));
    }

    #[test]
    fn canonical_scaling_and_sign() {
        assert_eq!(m(-6, 2, 0, -4), m(3, -1, 0, 2));
        assert_eq!(m(0, -2, 4, 6), m(0, 1, -2, -3));
        assert!(MoebiusBranch::from_ints(1, 2, 2, 4).is_err());
    }

    #[test]
    fn rational_entries_are_cleared() {
        let v = MoebiusBranch::from_rationals(&int(3), &rat(-3, 4), &int(0), &rat(3, 4)).unwrap();
        assert_eq!(v, m(4, -1, 0, 1));
    }

    #[test]
    fn adjoint_and_flip() {
        // V_lambda and W_lambda at lambda = 2
        let v = m(3, 3, 0, 2);
        assert_eq!(v.adjoint(), m(3, 0, 3, 2));
        assert_eq!(v.flip(), m(6, -3, 2, -2));
        assert_eq!(v.flip().flip(), v);
        assert!(!v.flip().is_increasing());
        let sym = m(5, 4, 4, 5);
        assert_eq!(sym.adjoint(), sym);
    }

    #[test]
    fn fixed_point_examples() {
        let third = m(3, 0, 0, 1).fixed_points().unwrap();
        assert_eq!(third.rational_roots, vec![int(0)]);
        let alpha = m(2, 1, 1, -1).fixed_points().unwrap();
        assert!(alpha.rational_roots.is_empty());
        assert_eq!(alpha.quadratic, Polynomial::from_ints(&[-1, 3, 1]));
        assert_eq!(alpha.discriminant, Some(int(13)));
        assert_eq!(alpha.real_roots.len(), 2);
        assert!(MoebiusBranch::identity().fixed_points().is_err());
    }

    #[test]
    fn jacobian_examples() {
        assert_eq!(
            m(2, 1, 1, -1).jacobian(),
            RationalFunction::new(Polynomial::from_ints(&[3]), Polynomial::from_ints(&[4, 4, 1]))
                .unwrap()
        );
        assert_eq!(MoebiusBranch::identity().jacobian(), RationalFunction::one());
        assert_eq!(
            MoebiusBranch::gauss_digit(3).jacobian(),
            RationalFunction::new(Polynomial::from_ints(&[1]), Polynomial::from_ints(&[9, 6, 1]))
                .unwrap()
        );
    }

    #[test]
    fn json_round_trip() {
        let j = r#"{"a":"3","b":"-3/4","c":"0","d":"3/4"}"#;
        let v: MoebiusBranch = serde_json::from_str(j).unwrap();
        assert_eq!(v, m(4, -1, 0, 1));
        let back = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<MoebiusBranch>(&back).unwrap(), v);
    }
}
