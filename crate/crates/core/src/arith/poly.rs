use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::{Float, Integer};

use super::rational::Rational;
use super::ArithError;

/// Dense univariate polynomial over the rationals, lowest degree first.
///
/// The coefficient vector never ends in a zero; the zero polynomial is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

pub fn poly_arith(p: &Polynomial, q: &Polynomial, op: PolyOp) -> Polynomial {
    match op {
        PolyOp::Add => p + q,
        PolyOp::Sub => p - q,
        PolyOp::Mul => p * q,
    }
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    pub fn x() -> Self {
        Self::from_coeffs(vec![Rational::new(), Rational::from(1)])
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c0 + c1 x`
    pub fn linear(c0: Rational, c1: Rational) -> Self {
        Self::from_coeffs(vec![c0, c1])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    /// Monic polynomial with the given roots (repeated roots allowed).
    pub fn from_roots(roots: &[Rational]) -> Self {
        roots.iter().fold(Self::one(), |acc, r| {
            &acc * &Self::linear(-r.clone(), Rational::from(1))
        })
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_float(&self, x: &Float) -> Float {
        let mut acc = Float::new(x.prec());
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| Rational::from(c * k)).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rational::from(c * i as u32))
                .collect(),
        )
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) => {
                let inv = Rational::from(l.recip_ref());
                self.scale(&inv)
            }
        }
    }

    /// Euclidean division over the rationals.
    pub fn div_rem(&self, d: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dn = d.degree().unwrap();
        let lead_inv = Rational::from(d.leading().unwrap().recip_ref());
        let mut rem = self.coeffs.clone();
        if rem.len() <= dn {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Rational::new(); rem.len() - dn];
        for k in (0..quot.len()).rev() {
            let q = Rational::from(&rem[k + dn] * &lead_inv);
            if q != 0 {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= Rational::from(&q * dc);
                }
            }
            quot[k] = q;
        }
        rem.truncate(dn);
        (Self::from_coeffs(quot), Self::from_coeffs(rem))
    }

    /// Writes `self = scale * primitive` with `primitive` an integer
    /// polynomial of content one and positive leading coefficient.
    pub fn primitive_part(&self) -> (Rational, Vec<Integer>) {
        if self.is_zero() {
            return (Rational::new(), Vec::new());
        }
        let lcm = super::rational::denominator_lcm(&self.coeffs);
        let ints: Vec<Integer> = self
            .coeffs
            .iter()
            .map(|c| Integer::from(c.numer() * (Integer::from(&lcm / c.denom()))))
            .collect();
        let mut content = ints.iter().fold(Integer::new(), |g, c| g.gcd(c));
        if *ints.last().unwrap() < 0 {
            content = -content;
        }
        let prim: Vec<Integer> = ints
            .into_iter()
            .map(|c| Integer::from(c.div_exact_ref(&content)))
            .collect();
        (Rational::from((content, lcm)), prim)
    }

    fn from_integers(v: &[Integer]) -> Self {
        Self::from_coeffs(v.iter().map(|c| Rational::from(c.clone())).collect())
    }

    /// Monic greatest common divisor, computed with a primitive
    /// pseudo-remainder sequence over the integers.
    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        let (_, mut p) = self.primitive_part();
        let (_, mut q) = other.primitive_part();
        if p.len() < q.len() {
            std::mem::swap(&mut p, &mut q);
        }
        while !q.is_empty() {
            let r = pseudo_rem(&p, &q);
            p = q;
            q = primitive(r);
        }
        Self::from_integers(&p).monic()
    }

    /// `sum_i c_i (c + d x)^i (a + b x)^(n - i)`: the numerator obtained by
    /// substituting `x -> (c + d x)/(a + b x)` and clearing `(a + b x)^n`.
    pub fn substitute_moebius(
        &self,
        a: &Rational,
        b: &Rational,
        c: &Rational,
        d: &Rational,
        n: usize,
    ) -> Polynomial {
        debug_assert!(self.degree().map_or(true, |deg| deg <= n));
        let num = Self::linear(c.clone(), d.clone());
        let den = Self::linear(a.clone(), b.clone());
        let mut out = Self::zero();
        for (i, ci) in self.coeffs.iter().enumerate() {
            if *ci == 0 {
                continue;
            }
            let term = &num.pow(i as u32) * &den.pow((n - i) as u32);
            out = &out + &term.scale(ci);
        }
        out
    }

    /// Rational roots with multiplicity, by the rational root sieve on the
    /// primitive integer form.
    pub fn rational_roots_with_multiplicity(&self) -> Result<Vec<(Rational, usize)>, ArithError> {
        assert!(!self.is_zero(), "roots of the zero polynomial");
        let mut out = Vec::new();
        let mut rest = self.clone();
        let mut zero_mult = 0;
        while rest.coeffs.first().is_some_and(|c| *c == 0) {
            rest.coeffs.remove(0);
            zero_mult += 1;
        }
        if zero_mult > 0 {
            out.push((Rational::new(), zero_mult));
        }
        if rest.degree().unwrap_or(0) == 0 {
            return Ok(out);
        }
        let (_, prim) = rest.primitive_part();
        let nums = divisors(&prim[0])?;
        let dens = divisors(prim.last().unwrap())?;
        let mut candidates: Vec<Rational> = Vec::new();
        for p in &nums {
            for q in &dens {
                let r = Rational::from((p.clone(), q.clone()));
                candidates.push(r.clone());
                candidates.push(-r);
            }
        }
        candidates.sort();
        candidates.dedup();
        for r in candidates {
            let mut mult = 0;
            let lin = Self::linear(-r.clone(), Rational::from(1));
            while rest.degree().unwrap_or(0) > 0 && rest.eval(&r) == 0 {
                rest = rest.div_rem(&lin).0;
                mult += 1;
            }
            if mult > 0 {
                out.push((r, mult));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    pub fn to_string_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let abs = Rational::from(c.abs_ref());
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let coeff_shown = i == 0 || abs != 1;
            if coeff_shown {
                if *abs.denom() != 1 && i > 0 {
                    s.push_str(&format!("({abs})"));
                } else {
                    s.push_str(&abs.to_string());
                }
            }
            match i {
                0 => {}
                1 => s.push_str(var),
                _ => s.push_str(&format!("{var}^{i}")),
            }
        }
        s
    }
}

/// Rational roots of a nonzero polynomial, sorted, without multiplicity.
pub fn poly_roots_rational(p: &Polynomial) -> Result<Vec<Rational>, ArithError> {
    Ok(p.rational_roots_with_multiplicity()?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

fn primitive(mut v: Vec<Integer>) -> Vec<Integer> {
    while v.last().is_some_and(|c| *c == 0) {
        v.pop();
    }
    if v.is_empty() {
        return v;
    }
    let mut g = v.iter().fold(Integer::new(), |g, c| g.gcd(c));
    if *v.last().unwrap() < 0 {
        g = -g;
    }
    v.into_iter().map(|c| c.div_exact(&g)).collect()
}

fn pseudo_rem(p: &[Integer], q: &[Integer]) -> Vec<Integer> {
    let mut r = p.to_vec();
    let dq = q.len() - 1;
    let lq = &q[dq];
    while r.len() > dq && !r.is_empty() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - 1 - dq;
        for c in r.iter_mut() {
            *c *= lq;
        }
        for (j, qc) in q.iter().enumerate() {
            r[shift + j] -= Integer::from(&lr * qc);
        }
        while r.last().is_some_and(|c| *c == 0) {
            r.pop();
        }
    }
    r
}

fn divisors(n: &Integer) -> Result<Vec<Integer>, ArithError> {
    let n = n.clone().abs();
    let m = n.to_u64().ok_or(ArithError::SieveTooLarge)?;
    if m > 1 << 50 {
        return Err(ArithError::SieveTooLarge);
    }
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= m {
        if m % i == 0 {
            out.push(Integer::from(i));
            if i * i != m {
                out.push(Integer::from(m / i));
            }
        }
        i += 1;
    }
    Ok(out)
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_var("x"))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_coeffs(
            (0..n)
                .map(|i| Rational::from(&self.coeff(i) + &rhs.coeff(i)))
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_coeffs(
            (0..n)
                .map(|i| Rational::from(&self.coeff(i) - &rhs.coeff(i)))
                .collect(),
        )
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        Polynomial::from_coeffs(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::from_coeffs(self.coeffs.iter().map(|c| Rational::from(-c)).collect())
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{int, rat};

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_ints(c)
    }

    #[test]
    fn quintic_factorization() {
        let nu = Polynomial::x();
        let f1 = &nu - &Polynomial::constant(int(3));
        let f2 = &nu.pow(2) - &Polynomial::constant(int(3));
        let f3 = (&nu + &Polynomial::one()).pow(2);
        let prod = poly_arith(&poly_arith(&f1, &f2, PolyOp::Mul), &f3, PolyOp::Mul);
        assert_eq!(prod, p(&[9, 15, 0, -8, -1, 1]));
        assert_eq!(prod.to_string_var("v"), "v^5 - v^4 - 8v^3 + 15v + 9");
    }

    #[test]
    fn additive_identity_and_difference_of_squares() {
        let q = p(&[1, -2, 5]);
        assert_eq!(poly_arith(&q, &Polynomial::zero(), PolyOp::Add), q);
        assert_eq!(
            poly_arith(&p(&[1, 1]), &p(&[-1, 1]), PolyOp::Mul),
            p(&[-1, 0, 1])
        );
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!((&p(&[1, 1]) - &p(&[1, 1])).degree(), None);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[3, -1, 4, 1, 5]);
        let b = p(&[2, 0, 7]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn gcd_finds_common_factor() {
        let a = &p(&[1, 1]) * &p(&[-2, 3]);
        let b = &p(&[1, 1]) * &p(&[5, 0, 1]);
        assert_eq!(a.gcd(&b), p(&[1, 1]));
        assert_eq!(p(&[1, 1]).gcd(&p(&[2, 1])), Polynomial::one());
    }

    #[test]
    fn gcd_with_rational_coefficients() {
        let a = Polynomial::from_coeffs(vec![rat(1, 2), rat(1, 3)]);
        let b = &a * &p(&[7, 0, 2]);
        assert_eq!(a.gcd(&b), a.monic());
    }

    #[test]
    fn rational_roots_of_quintic() {
        let f = p(&[9, 15, 0, -8, -1, 1]);
        assert_eq!(poly_roots_rational(&f).unwrap(), vec![int(-1), int(3)]);
        let mult = f.rational_roots_with_multiplicity().unwrap();
        assert_eq!(mult, vec![(int(-1), 2), (int(3), 1)]);
    }

    #[test]
    fn irrational_roots_are_not_reported() {
        assert!(poly_roots_rational(&p(&[-3, 0, 1])).unwrap().is_empty());
    }

    #[test]
    fn root_of_condition_polynomial_in_lambda() {
        // lambda^2 mu + lambda (mu + 3) - 9 with mu = 36/7
        let mu = rat(36, 7);
        let f = Polynomial::from_coeffs(vec![int(-9), Rational::from(&mu + 3), mu]);
        let roots = poly_roots_rational(&f).unwrap();
        assert!(roots.contains(&rat(3, 4)));
        for r in roots {
            assert_eq!(f.eval(&r), 0);
        }
    }

    #[test]
    fn zero_root_with_multiplicity() {
        let f = p(&[0, 0, -1, 1]);
        assert_eq!(
            f.rational_roots_with_multiplicity().unwrap(),
            vec![(int(0), 2), (int(1), 1)]
        );
    }

    #[test]
    fn moebius_substitution_matches_pointwise() {
        // f(x) = x^2 + 1, x -> (1 + 2x)/(3 - x), cleared by (3 - x)^2
        let f = p(&[1, 0, 1]);
        let s = f.substitute_moebius(&int(3), &int(-1), &int(1), &int(2), 2);
        let x = rat(2, 5);
        let y = Rational::from((int(1) + int(2) * &x) / (int(3) - &x));
        let den = Rational::from(int(3) - &x).square();
        assert_eq!(s.eval(&x), f.eval(&y) * den);
    }
}
