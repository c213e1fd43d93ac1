//! Asymptotic tails of harmonic-type sums with enveloping error bounds.
//!
//! For real `z > 0` the Euler-Maclaurin expansions of the digamma function
//! and of the Hurwitz zeta function are enveloping: the error after any
//! number of Bernoulli terms is at most the first omitted term.

use std::sync::OnceLock;

use rug::ops::Pow;
use rug::{Float, Integer};

use crate::arith::Rational;

const MAX_TERMS: usize = 40;

/// `B_2, B_4, ..., B_{2 MAX_TERMS + 2}`.
fn bernoulli_even() -> &'static [Rational] {
    static CACHE: OnceLock<Vec<Rational>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let n = 2 * MAX_TERMS + 2;
        let mut b: Vec<Rational> = vec![Rational::from(1)];
        for m in 1..=n {
            // sum_{j=0}^{m} C(m+1, j) B_j = 0
            let mut s = Rational::new();
            for (j, bj) in b.iter().enumerate() {
                let c = Integer::from(Integer::binomial_u(m as u32 + 1, j as u32));
                s += Rational::from(bj * &c);
            }
            b.push(-s / Rational::from(m + 1));
        }
        b.into_iter().skip(2).step_by(2).collect()
    })
}

pub fn bernoulli(n: usize) -> Rational {
    assert!(n % 2 == 0 && n >= 2 && n <= 2 * MAX_TERMS + 2);
    bernoulli_even()[n / 2 - 1].clone()
}

/// A value with an absolute error bound.
#[derive(Clone, Debug)]
pub struct Approx {
    pub value: Float,
    pub err: f64,
}

/// Rounds `x` up to an `f64` that is at least `|x|`.
pub fn upper_f64(x: &Float) -> f64 {
    let v = x.to_f64().abs();
    if v.is_finite() {
        v * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
    } else {
        f64::INFINITY
    }
}

/// Sums Bernoulli correction terms `coef_k * B_{2k} * z^{-e_k}` for k = 1, 2, ...
/// while they decrease, returning the sum and the first omitted term.
fn bernoulli_tail(z: &Float, mut term: impl FnMut(usize, &Float) -> Float) -> Approx {
    let prec = z.prec();
    let mut sum = Float::with_val(prec, 0);
    let mut prev: Option<Float> = None;
    for k in 1..=MAX_TERMS + 1 {
        let t = term(k, z);
        let small_enough = prev.as_ref().map_or(true, |p| t.clone().abs() < p.clone().abs());
        if !small_enough || k == MAX_TERMS + 1 {
            return Approx {
                value: sum,
                err: upper_f64(&t),
            };
        }
        sum += &t;
        prev = Some(t);
    }
    unreachable!()
}

/// `psi(z)` for real `z > 0`; accurate when `z` is large.
pub fn digamma(z: &Float) -> Approx {
    assert!(*z > 0, "digamma needs a positive argument");
    let prec = z.prec();
    let tail = bernoulli_tail(z, |k, z| {
        let b = Float::with_val(prec, &bernoulli(2 * k));
        -b / (Float::with_val(prec, z.pow(2 * k as u32)) * (2 * k as u32))
    });
    let v = Float::with_val(prec, z.ln_ref()) - Float::with_val(prec, z.recip_ref()) / 2 + tail.value;
    Approx {
        value: v,
        err: tail.err,
    }
}

/// `zeta(s, z) = sum_{m >= 0} (m + z)^{-s}` for integer `s >= 2`, real `z > 0`.
pub fn hurwitz_zeta(s: u32, z: &Float) -> Approx {
    assert!(s >= 2 && *z > 0);
    let prec = z.prec();
    let zs = Float::with_val(prec, z.pow(s));
    let tail = bernoulli_tail(z, |k, z| {
        // B_{2k} / (2k)! * s (s+1) ... (s + 2k - 2) * z^{-s-2k+1}
        let mut rising = Integer::from(1);
        for i in 0..(2 * k as u32 - 1) {
            rising *= s + i;
        }
        let fact = Integer::from(Integer::factorial(2 * k as u32));
        let coef = Rational::from(&bernoulli(2 * k) * &rising) / fact;
        Float::with_val(prec, &coef) / (Float::with_val(prec, z.pow(2 * k as u32 - 1)) * &zs)
    });
    let lead = Float::with_val(prec, z / &zs) / (s - 1) + Float::with_val(prec, zs.recip_ref()) / 2;
    Approx {
        value: lead + tail.value,
        err: tail.err,
    }
}

/// Elementary upper bound `zeta(s, z) <= z^{-s} + z^{1-s} / (s - 1)` in `f64`.
pub fn hurwitz_zeta_upper(s: u32, z: f64) -> f64 {
    assert!(z > 0.0);
    let v = z.powi(-(s as i32)) + z.powi(1 - s as i32) / f64::from(s - 1);
    v * (1.0 + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREC: u32 = 200;

    #[test]
    fn bernoulli_numbers() {
        assert_eq!(bernoulli(2), Rational::from((1, 6)));
        assert_eq!(bernoulli(4), Rational::from((-1, 30)));
        assert_eq!(bernoulli(12), Rational::from((-691, 2730)));
    }

    #[test]
    fn digamma_matches_harmonic_numbers() {
        // psi(n + 1) = H_n - gamma; psi(101) - psi(51) = H_100 - H_50
        let h: Rational = (51..=100).map(|k| Rational::from((1, k))).sum();
        let a = digamma(&Float::with_val(PREC, 101));
        let b = digamma(&Float::with_val(PREC, 51));
        let diff = (a.value - b.value) - Float::with_val(PREC, &h);
        assert!(diff.abs().to_f64() <= a.err + b.err + 1e-50);
        assert!(a.err < 1e-50);
    }

    #[test]
    fn zeta_two_tail_matches_basel() {
        // zeta(2, 1) - sum_{m=1}^{40} 1/m^2 = zeta(2, 41)
        let pi = Float::with_val(PREC, rug::float::Constant::Pi);
        let basel = Float::with_val(PREC, &pi * &pi) / 6;
        let head: Rational = (1..=40).map(|k| Rational::from((1, k * k))).sum();
        let z = hurwitz_zeta(2, &Float::with_val(PREC, 41));
        let diff: Float = basel - Float::with_val(PREC, &head) - z.value;
        assert!(diff.clone().abs().to_f64() <= z.err + 1e-55, "{diff}");
    }

    #[test]
    fn elementary_bound_dominates() {
        let z = hurwitz_zeta(3, &Float::with_val(PREC, 5.5));
        assert!(z.value.to_f64() <= hurwitz_zeta_upper(3, 5.5));
    }
}
