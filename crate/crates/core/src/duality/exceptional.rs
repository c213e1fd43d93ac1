//! Floating point check of a candidate dual interval, for parameters that
//! are not rational.

use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::moebius::MoebiusBranch;

/// Residuals below this count as a verified identity.
pub const VERIFY_TOL: f64 = 1e-30;
/// Residuals above this refute the candidate.
pub const REFUTE_TOL: f64 = 1e-5;

pub fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

/// Branch `[[a, b], [c, d]]` with floating entries.
#[derive(Clone, Debug)]
pub struct FloatBranch {
    pub a: Float,
    pub b: Float,
    pub c: Float,
    pub d: Float,
}

impl FloatBranch {
    pub fn from_branch(m: &MoebiusBranch, prec: u32) -> Self {
        let f = |i: &rug::Integer| Float::with_val(prec, i);
        Self {
            a: f(m.a()),
            b: f(m.b()),
            c: f(m.c()),
            d: f(m.d()),
        }
    }

    pub fn eval(&self, x: &Float) -> Float {
        let num = Float::with_val(x.prec(), &self.d * x) + &self.c;
        let den = Float::with_val(x.prec(), &self.b * x) + &self.a;
        num / den
    }

    pub fn jacobian(&self, x: &Float) -> Float {
        let det = Float::with_val(x.prec(), &self.a * &self.d) - Float::with_val(x.prec(), &self.b * &self.c);
        let den = Float::with_val(x.prec(), &self.b * x) + &self.a;
        det.abs() / den.pow(2u32)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: self.c.clone(),
            c: self.b.clone(),
            d: self.d.clone(),
        }
    }
}

/// `V_lambda`, `V_mu`, `V_nu` with floating parameters.
pub fn family_t_float(l: &Float, m: &Float, n: &Float) -> Vec<FloatBranch> {
    let p = l.prec();
    let c = |v: f64| Float::with_val(p, v);
    vec![
        FloatBranch {
            a: c(3.0),
            b: Float::with_val(p, 3 * l) - 3,
            c: c(0.0),
            d: l.clone(),
        },
        FloatBranch {
            a: c(9.0),
            b: Float::with_val(p, 3 * m) - 9,
            c: c(3.0),
            d: Float::with_val(p, 2 * m) - 3,
        },
        FloatBranch {
            a: c(3.0),
            b: Float::with_val(p, n - 3),
            c: c(2.0),
            d: Float::with_val(p, n - 2),
        },
    ]
}

/// Parameters of the exceptional example: `lambda` the positive root of
/// `448 l^2 + 283 l - 1113`, `mu = 63/16`, `nu = 7 (lambda + 1) / 4`, and the
/// candidate `B* = [1/2, (448 lambda - 257) / 628]`.
pub struct ExceptionalParams {
    pub lambda: Float,
    pub mu: Float,
    pub nu: Float,
    pub eta: Float,
    pub theta: Float,
}

pub fn remark_parameters(prec: u32) -> ExceptionalParams {
    let disc = Float::with_val(prec, 283 * 283 + 4 * 448 * 1113);
    let lambda = (disc.sqrt() - 283) / 896;
    let mu = Float::with_val(prec, 63) / 16;
    let nu = Float::with_val(prec, &lambda + 1) * 7 / 4;
    let eta = Float::with_val(prec, 0.5);
    let theta = (Float::with_val(prec, &lambda * 448) - 257) / 628;
    ExceptionalParams {
        lambda,
        mu,
        nu,
        eta,
        theta,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Verified,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalReport {
    pub verdict: Check,
    /// Every adjoint branch maps `[eta, theta]` into itself.
    pub invariant: bool,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
}

fn interval_density(eta: &Float, theta: &Float, x: &Float) -> Float {
    let p = x.prec();
    let t = Float::with_val(p, theta / (Float::with_val(p, theta * x) + 1));
    let e = Float::with_val(p, eta / (Float::with_val(p, eta * x) + 1));
    t - e
}

/// Checks that the adjoint branches preserve `[eta, theta]` and that the
/// density `theta/(1+theta x) - eta/(1+eta x)` solves Kuzmin's equation at
/// `points` equally spaced interior points.
pub fn exceptional_dual_verify(
    branches: &[FloatBranch],
    eta: &Float,
    theta: &Float,
    digits: u32,
    points: usize,
) -> ExceptionalReport {
    let prec = bits_for_digits(digits);
    let eta = Float::with_val(prec, eta);
    let theta = Float::with_val(prec, theta);
    let slack = Float::with_val(prec, VERIFY_TOL);
    let lo = Float::with_val(prec, &eta - &slack);
    let hi = Float::with_val(prec, &theta + &slack);
    let invariant = branches.iter().all(|v| {
        let s = v.adjoint();
        let d0 = Float::with_val(prec, &s.b * &eta) + &s.a;
        let d1 = Float::with_val(prec, &s.b * &theta) + &s.a;
        if d0.is_sign_negative() != d1.is_sign_negative() || d0.is_zero() || d1.is_zero() {
            return false;
        }
        [s.eval(&eta), s.eval(&theta)]
            .iter()
            .all(|y| *y >= lo && *y <= hi)
    });
    let residuals: Vec<f64> = (1..=points)
        .map(|i| {
            let x = Float::with_val(prec, i) / (points as u32 + 1);
            let lhs = branches.iter().fold(Float::with_val(prec, 0), |acc, v| {
                acc + interval_density(&eta, &theta, &v.eval(&x)) * v.jacobian(&x)
            });
            (lhs - interval_density(&eta, &theta, &x)).abs().to_f64()
        })
        .collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let verdict = if !invariant || max_residual >= REFUTE_TOL {
        Check::Refuted
    } else if max_residual < VERIFY_TOL {
        Check::Verified
    } else {
        Check::Inconclusive
    };
    ExceptionalReport {
        verdict,
        invariant,
        max_residual,
        residuals,
    }
}
