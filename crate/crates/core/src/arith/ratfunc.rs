use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::Float;

use super::poly::Polynomial;
use super::rational::Rational;
use super::ArithError;

/// Quotient of two polynomials in lowest terms with a monic denominator.
///
/// Two canonical forms are equal exactly when the functions agree wherever
/// both are defined, so `==` is functional equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

/// `poly + sum c / (x - pole)^power`
#[derive(Clone, Debug, PartialEq)]
pub struct PartialFraction {
    pub poly: Polynomial,
    pub terms: Vec<SimplePole>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplePole {
    pub coeff: Rational,
    pub pole: Rational,
    pub power: u32,
}

impl RationalFunction {
    /// Canonical form of `num / den`.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, ArithError> {
        if den.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lead = Rational::from(den.leading().unwrap().recip_ref());
        Ok(Self {
            num: num.scale(&lead),
            den: den.scale(&lead),
        })
    }

    pub fn zero() -> Self {
        Self {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        Self {
            num: p,
            den: Polynomial::one(),
        }
    }

    /// `weight / (shift + slope x)`, the building block of most densities.
    pub fn reciprocal_linear(weight: Rational, shift: Rational, slope: Rational) -> Self {
        Self::new(
            Polynomial::constant(weight),
            Polynomial::linear(shift, slope),
        )
        .expect("linear denominator must be nonzero")
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if *k == 0 {
            return Self::zero();
        }
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, ArithError> {
        let d = self.den.eval(x);
        if d == 0 {
            return Err(ArithError::Pole(x.to_string()));
        }
        Ok(self.num.eval(x) / d)
    }

    /// Floating evaluation; a pole gives an infinite or NaN result.
    pub fn eval_float(&self, x: &Float) -> Float {
        self.num.eval_float(x) / self.den.eval_float(x)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }

    pub fn derivative(&self) -> Self {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        let d = &self.den * &self.den;
        Self::new(n, d).expect("square of a nonzero denominator")
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// `self((c + d x) / (a + b x))` in canonical form.
    pub fn compose_moebius(
        &self,
        a: &Rational,
        b: &Rational,
        c: &Rational,
        d: &Rational,
    ) -> Result<Self, ArithError> {
        let n = self
            .num
            .degree()
            .unwrap_or(0)
            .max(self.den.degree().unwrap_or(0));
        let num = self.num.substitute_moebius(a, b, c, d, n);
        let den = self.den.substitute_moebius(a, b, c, d, n);
        Self::new(num, den)
    }

    /// Real poles (distinct) strictly inside `(lo, hi)`.
    pub fn pole_count_in_open(&self, lo: &Rational, hi: &Rational) -> usize {
        self.den.distinct_roots_in_open(lo, hi)
    }

    /// Partial fraction decomposition; fails unless the denominator splits
    /// into rational linear factors.
    pub fn partial_fractions(&self) -> Result<PartialFraction, ArithError> {
        let (poly, rem) = self.num.div_rem(&self.den);
        let mut terms = Vec::new();
        if rem.is_zero() {
            return Ok(PartialFraction { poly, terms });
        }
        let roots = self.den.rational_roots_with_multiplicity()?;
        let split: usize = roots.iter().map(|(_, m)| m).sum();
        if split != self.den.degree().unwrap() {
            return Err(ArithError::NotSplit);
        }
        for (rho, mult) in &roots {
            // den = (x - rho)^mult * cofactor; expand rem / cofactor around rho.
            let cofactor = roots
                .iter()
                .filter(|(r, _)| r != rho)
                .fold(Polynomial::one(), |acc, (r, m)| {
                    &acc * &Polynomial::linear(-r.clone(), Rational::from(1)).pow(*m as u32)
                });
            let series = series_quotient(
                &rem.taylor_shift(rho),
                &cofactor.taylor_shift(rho),
                *mult,
            );
            for (j, s) in series.into_iter().enumerate() {
                if s != 0 {
                    terms.push(SimplePole {
                        coeff: s,
                        pole: rho.clone(),
                        power: (*mult - j) as u32,
                    });
                }
            }
        }
        Ok(PartialFraction { poly, terms })
    }

    /// Interval enclosure of the values on `[lo, hi]`, or `None` if the
    /// denominator enclosure touches zero even after subdivision.
    pub fn range_enclosure(&self, lo: &Rational, hi: &Rational) -> Option<(Rational, Rational)> {
        const PIECES: u32 = 32;
        let width = Rational::from(hi - lo);
        let mut out: Option<(Rational, Rational)> = None;
        for i in 0..PIECES {
            let a = Rational::from(lo + Rational::from(&width * i) / PIECES);
            let b = Rational::from(lo + Rational::from(&width * (i + 1)) / PIECES);
            let (nl, nh) = self.num.interval_eval(&a, &b);
            let (dl, dh) = self.den.interval_eval(&a, &b);
            if dl <= 0 && dh >= 0 {
                return None;
            }
            let cands = [
                Rational::from(&nl / &dl),
                Rational::from(&nl / &dh),
                Rational::from(&nh / &dl),
                Rational::from(&nh / &dh),
            ];
            let mn = cands.iter().min().unwrap().clone();
            let mx = cands.iter().max().unwrap().clone();
            out = Some(match out {
                None => (mn, mx),
                Some((l, h)) => (l.min(mn), h.max(mx)),
            });
        }
        out
    }

    /// Upper bound for `|f|` on `[lo, hi]`, rounded up to an `f64`.
    pub fn abs_bound(&self, lo: &Rational, hi: &Rational) -> Option<f64> {
        let (l, h) = self.range_enclosure(lo, hi)?;
        let m = l.abs().max(h.abs());
        Some(m.to_f64() * (1.0 + 1e-12) + f64::MIN_POSITIVE)
    }

    pub fn to_string_var(&self, var: &str) -> String {
        if self.den.is_constant() {
            let p = self.num.scale(&Rational::from(self.den.leading().unwrap().recip_ref()));
            return p.to_string_var(var);
        }
        format!(
            "({})/({})",
            self.num.to_string_var(var),
            self.den.to_string_var(var)
        )
    }
}

/// First `n` power-series coefficients of `a / b` (b(0) != 0).
fn series_quotient(a: &Polynomial, b: &Polynomial, n: usize) -> Vec<Rational> {
    let b0 = b.coeff(0);
    assert!(b0 != 0, "series quotient by a polynomial vanishing at 0");
    let mut out: Vec<Rational> = Vec::with_capacity(n);
    for k in 0..n {
        let mut s = a.coeff(k);
        for (j, o) in out.iter().enumerate() {
            s -= Rational::from(o * &b.coeff(k - j));
        }
        out.push(s / &b0);
    }
    out
}

impl Polynomial {
    /// `p(rho + t)` as a polynomial in `t`.
    pub fn taylor_shift(&self, rho: &Rational) -> Polynomial {
        let mut c: Vec<Rational> = self.coeffs().to_vec();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let add = Rational::from(&c[j + 1] * rho);
                c[j] += add;
            }
        }
        Polynomial::from_coeffs(c)
    }

    /// Interval Horner evaluation over `[lo, hi]`.
    pub fn interval_eval(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        let mut l = Rational::new();
        let mut h = Rational::new();
        for c in self.coeffs().iter().rev() {
            let p = [
                Rational::from(&l * lo),
                Rational::from(&l * hi),
                Rational::from(&h * lo),
                Rational::from(&h * hi),
            ];
            l = Rational::from(p.iter().min().unwrap() + c);
            h = Rational::from(p.iter().max().unwrap() + c);
        }
        (l, h)
    }

    fn sign_changes_at(seq: &[Polynomial], x: &Rational) -> usize {
        let signs: Vec<std::cmp::Ordering> = seq
            .iter()
            .map(|p| p.eval(x).cmp0())
            .filter(|s| *s != std::cmp::Ordering::Equal)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in the open interval, via a Sturm chain.
    pub fn distinct_roots_in_open(&self, lo: &Rational, hi: &Rational) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let mut p = self.clone();
        for end in [lo, hi] {
            let lin = Polynomial::linear(-end.clone(), Rational::from(1));
            while p.degree().unwrap_or(0) > 0 && p.eval(end) == 0 {
                p = p.div_rem(&lin).0;
            }
        }
        if p.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let mut seq = vec![p.clone(), p.derivative()];
        loop {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(-&r);
        }
        Self::sign_changes_at(&seq, lo) - Self::sign_changes_at(&seq, hi)
    }
}

impl PartialFraction {
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut s = self.poly.eval(x);
        for t in &self.terms {
            let base = Rational::from(x - &t.pole);
            s += Rational::from(&t.coeff / Rational::from(rug::ops::Pow::pow(&base, t.power)));
        }
        s
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_var("x"))
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::new(&self.num + &rhs.num, self.den.clone()).unwrap();
        }
        RationalFunction::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .unwrap()
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den).unwrap()
    }
}

impl Div for &RationalFunction {
    type Output = Result<RationalFunction, ArithError>;
    fn div(self, rhs: &RationalFunction) -> Result<RationalFunction, ArithError> {
        RationalFunction::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Add for RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: RationalFunction) -> RationalFunction {
        &self + &rhs
    }
}

impl Sub for RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: RationalFunction) -> RationalFunction {
        &self - &rhs
    }
}

impl Mul for RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: RationalFunction) -> RationalFunction {
        &self * &rhs
    }
}

impl std::iter::Sum for RationalFunction {
    fn sum<I: Iterator<Item = RationalFunction>>(iter: I) -> Self {
        iter.fold(RationalFunction::zero(), |a, b| &a + &b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{int, rat};

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_ints(c)
    }

    fn rf(n: &[i64], d: &[i64]) -> RationalFunction {
        RationalFunction::new(p(n), p(d)).unwrap()
    }

    #[test]
    fn common_factor_cancels() {
        // (2x + 2) / (2x^2 - 2) = 1 / (x - 1)
        assert_eq!(rf(&[2, 2], &[-2, 0, 2]), rf(&[1], &[-1, 1]));
    }

    #[test]
    fn zero_numerator_is_zero_function() {
        let z = rf(&[0], &[5]);
        assert!(z.is_zero());
        assert_eq!(z, RationalFunction::zero());
    }

    #[test]
    fn sign_normalization() {
        assert_eq!(rf(&[1], &[2, -1]), rf(&[-1], &[-2, 1]));
        assert_eq!(rf(&[1], &[2, -1]).den().leading().unwrap(), &int(1));
    }

    #[test]
    fn zero_denominator_is_an_error() {
        assert_eq!(
            RationalFunction::new(p(&[1]), Polynomial::zero()),
            Err(ArithError::ZeroDenominator)
        );
    }

    #[test]
    fn derivative_of_reciprocal_square() {
        // d/dx 1/(2+x)^2 = -2/(2+x)^3
        let f = rf(&[1], &[4, 4, 1]);
        assert_eq!(f.derivative(), rf(&[-2], &[8, 12, 6, 1]));
    }

    #[test]
    fn partial_fractions_of_split_denominator() {
        // 1/((am + 1 + a x)(m + x)) at a = 2, x = 0, as a function of m
        let f = rf(&[1], &[0, 1, 2]);
        let pf = f.partial_fractions().unwrap();
        assert!(pf.poly.is_zero());
        for m in 1..6 {
            let m = int(m);
            assert_eq!(pf.eval(&m), f.eval(&m).unwrap());
        }
        let repeated = rf(&[3, 1], &[0, 0, 1, 1]);
        let pf = repeated.partial_fractions().unwrap();
        assert_eq!(pf.eval(&rat(5, 3)), repeated.eval(&rat(5, 3)).unwrap());
        assert!(pf.terms.iter().any(|t| t.power == 2));
    }

    #[test]
    fn partial_fractions_reject_irreducible_quadratic() {
        assert_eq!(
            rf(&[1], &[1, 0, 1]).partial_fractions(),
            Err(ArithError::NotSplit)
        );
    }

    #[test]
    fn sturm_counts_interior_poles() {
        // x^2 + 3x - 1 has one root near 0.3028
        let f = rf(&[1], &[-1, 3, 1]);
        assert_eq!(f.pole_count_in_open(&int(0), &int(1)), 1);
        assert_eq!(rf(&[1], &[0, 1]).pole_count_in_open(&int(0), &int(1)), 0);
        assert_eq!(rf(&[1], &[-1, 0, 4]).pole_count_in_open(&int(0), &int(1)), 1);
    }

    #[test]
    fn enclosure_contains_samples() {
        let f = rf(&[1, -2, 3], &[2, 1]);
        let (l, h) = f.range_enclosure(&int(0), &int(1)).unwrap();
        for k in 0..=10 {
            let v = f.eval(&rat(k, 10)).unwrap();
            assert!(l <= v && v <= h);
        }
        assert!(rf(&[1], &[-1, 2]).range_enclosure(&int(0), &int(1)).is_none());
    }

    #[test]
    fn moebius_composition_is_pointwise() {
        let f = rf(&[1, 0, 1], &[3, 1]);
        let g = f
            .compose_moebius(&int(2), &int(1), &int(1), &int(-1))
            .unwrap();
        let x = rat(1, 7);
        let y = Rational::from((int(1) - &x) / (int(2) + &x));
        assert_eq!(g.eval(&x).unwrap(), f.eval(&y).unwrap());
    }
}
