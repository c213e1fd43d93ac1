//! Density transport `g(x) = sum_j h(V_j x) omega_j(x)` and densities given
//! by infinite series.

use std::fmt;

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;
use thiserror::Error;

use crate::arith::rational::int;
use crate::arith::{ArithError, Polynomial, Rational, RationalFunction};
use crate::duality::exceptional::bits_for_digits;
use crate::duality::{transfer_apply, DualityError, UnionFamily};
use crate::fibred::{DigitFamily, MapError, Piece, PiecewiseMap};
use crate::highprec::{digamma, hurwitz_zeta, hurwitz_zeta_upper, upper_f64, Approx};
use crate::moebius::MoebiusBranch;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("series diverges: {0}")]
    Divergent(String),
    #[error("cannot bound the series: power-one parts do not pair up")]
    Unpaired,
    #[error("{0}")]
    Unsupported(String),
    #[error("series term has a pole at x = {0}")]
    Pole(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Duality(#[from] Box<DualityError>),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl From<DualityError> for TransportError {
    fn from(e: DualityError) -> Self {
        TransportError::Duality(Box::new(e))
    }
}

/// `sum_{m >= m0} weight(x) / (m + shift(x))^power`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPart {
    pub weight: RationalFunction,
    pub shift: RationalFunction,
    pub power: u32,
    pub m0: i64,
}

/// `head(x) + sum of parts`. The weights of the power-one parts add up to
/// zero, which makes the series converge.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesDensity {
    head: RationalFunction,
    parts: Vec<SeriesPart>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Density {
    Rational(RationalFunction),
    Series(SeriesDensity),
}

impl Density {
    pub fn as_series(&self) -> SeriesDensity {
        match self {
            Density::Rational(f) => SeriesDensity::from_rational(f.clone()),
            Density::Series(s) => s.clone(),
        }
    }

    pub fn rational(&self) -> Option<&RationalFunction> {
        match self {
            Density::Rational(f) => Some(f),
            Density::Series(_) => None,
        }
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Rational(r) => write!(f, "{r}"),
            Density::Series(s) => write!(f, "{s}"),
        }
    }
}

/// A series value with its explicit term count.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: Float,
    /// Certified bound on `|value - exact|`.
    pub bound: f64,
    /// Index one past the last explicitly summed term.
    pub explicit_to: i64,
}

/// Smallest `m + shift` at which the asymptotic tail is used.
const TAIL_START: i64 = 24;

impl SeriesDensity {
    pub fn new(head: RationalFunction, parts: Vec<SeriesPart>) -> Result<Self, TransportError> {
        let ones: RationalFunction = parts
            .iter()
            .filter(|p| p.power == 1)
            .map(|p| p.weight.clone())
            .sum();
        if !ones.is_zero() {
            return Err(TransportError::Divergent(format!(
                "power-one weights sum to {ones}"
            )));
        }
        if parts.iter().any(|p| p.power == 0) {
            return Err(TransportError::Divergent("power zero part".into()));
        }
        Ok(Self { head, parts })
    }

    pub fn from_rational(f: RationalFunction) -> Self {
        Self {
            head: f,
            parts: Vec::new(),
        }
    }

    /// `(1/x) sum_j (1/(1 + u_j x) - 1/(1 + v_j x))` with `u_j = alpha + j delta`
    /// and `v_j = beta + j delta`.
    pub fn interval_union(u: &UnionFamily) -> Result<Self, TransportError> {
        if u.delta <= 0 || u.alpha < 0 || u.beta < u.alpha {
            return Err(TransportError::Unsupported(
                "interval union needs 0 <= alpha <= beta and delta > 0".into(),
            ));
        }
        let dx = Polynomial::linear(Rational::new(), u.delta.clone());
        let w = RationalFunction::new(Polynomial::one(), &dx * &Polynomial::x())?;
        let shift = |c: &Rational| {
            RationalFunction::new(Polynomial::linear(int(1), c.clone()), dx.clone()).unwrap()
        };
        Self::new(
            RationalFunction::zero(),
            vec![
                SeriesPart {
                    weight: w.clone(),
                    shift: shift(&u.alpha),
                    power: 1,
                    m0: 0,
                },
                SeriesPart {
                    weight: -&w,
                    shift: shift(&u.beta),
                    power: 1,
                    m0: 0,
                },
            ],
        )
    }

    pub fn head(&self) -> &RationalFunction {
        &self.head
    }

    pub fn parts(&self) -> &[SeriesPart] {
        &self.parts
    }

    /// Sum of the parts' `m`-th terms, plus the head when `m` is `None`.
    pub fn term(&self, m: i64) -> RationalFunction {
        self.parts
            .iter()
            .filter(|p| m >= p.m0)
            .map(|p| {
                let den = p.shift.den();
                let base = &Polynomial::constant(int(m)) * den + p.shift.num().clone();
                let f = RationalFunction::new(den.clone(), base).expect("nonzero base");
                let mut t = p.weight.clone();
                for _ in 0..p.power {
                    t = &t * &f;
                }
                t
            })
            .sum()
    }

    pub fn derivative(&self) -> Self {
        let mut parts = Vec::new();
        for p in &self.parts {
            let dw = p.weight.derivative();
            if !dw.is_zero() {
                parts.push(SeriesPart {
                    weight: dw,
                    shift: p.shift.clone(),
                    power: p.power,
                    m0: p.m0,
                });
            }
            let ds = (&p.weight * &p.shift.derivative()).scale(&int(-i64::from(p.power)));
            if !ds.is_zero() {
                parts.push(SeriesPart {
                    weight: ds,
                    shift: p.shift.clone(),
                    power: p.power + 1,
                    m0: p.m0,
                });
            }
        }
        Self {
            head: self.head.derivative(),
            parts,
        }
    }

    fn max_m0(&self) -> i64 {
        self.parts.iter().map(|p| p.m0).max().unwrap_or(0)
    }

    /// Value at `x` with `explicit` terms beyond the largest `m0` summed
    /// directly and the rest from the asymptotic tail.
    pub fn eval(&self, x: &Float, explicit: usize) -> Result<SeriesValue, TransportError> {
        let prec = x.prec();
        let mut value = self.head.eval_float(x);
        if !value.is_finite() {
            return Err(TransportError::Pole(x.to_string()));
        }
        let mut abs_sum = Float::with_val(prec, value.abs_ref());
        let mut err = 0.0;
        let mut ops = 1usize;
        let ws: Vec<Float> = self.parts.iter().map(|p| p.weight.eval_float(x)).collect();
        let ss: Vec<Float> = self.parts.iter().map(|p| p.shift.eval_float(x)).collect();
        let mut top = self.max_m0() + explicit as i64;
        if let Some(min_s) = ss.iter().min_by(|a, b| a.partial_cmp(b).unwrap()) {
            let need = Float::with_val(prec, TAIL_START - min_s.clone())
                .ceil()
                .to_f64();
            if !need.is_finite() {
                return Err(TransportError::Pole(x.to_string()));
            }
            top = top.max(need as i64);
        }
        for ((p, w), s) in self.parts.iter().zip(&ws).zip(&ss) {
            if !w.is_finite() || !s.is_finite() {
                return Err(TransportError::Pole(x.to_string()));
            }
            if Float::with_val(prec, s + p.m0) <= 0 {
                return Err(TransportError::Pole(x.to_string()));
            }
            for m in p.m0..top {
                let base = Float::with_val(prec, s + m);
                let t = Float::with_val(prec, w / Float::with_val(prec, rug::ops::Pow::pow(&base, p.power)));
                abs_sum += Float::with_val(prec, t.abs_ref());
                value += t;
                ops += 1;
            }
            let z = Float::with_val(prec, s + top);
            let (tail, sign): (Approx, i32) = if p.power == 1 {
                (digamma(&z), -1)
            } else {
                (hurwitz_zeta(p.power, &z), 1)
            };
            let contrib = Float::with_val(prec, w * &tail.value) * sign;
            abs_sum += Float::with_val(prec, contrib.abs_ref());
            value += contrib;
            err += upper_f64(w) * tail.err;
        }
        // rounding: every operation contributes a few ulps of the running magnitude
        let rounding = upper_f64(&abs_sum) * (ops as f64 + 16.0) * (-(prec as f64) + 3.0).exp2();
        Ok(SeriesValue {
            value,
            bound: err + rounding,
            explicit_to: top,
        })
    }

    /// Plain partial sum over `m < m0_max + explicit` and a certified bound on
    /// the discarded tail.
    pub fn eval_truncated(&self, x: &Float, explicit: usize) -> Result<(Float, f64), TransportError> {
        let prec = x.prec();
        let top = self.max_m0() + explicit as i64;
        let mut partial = self.head.eval_float(x);
        for p in &self.parts {
            let w = p.weight.eval_float(x);
            let s = p.shift.eval_float(x);
            for m in p.m0..top {
                partial += Float::with_val(prec, &w / Float::with_val(prec, rug::ops::Pow::pow(Float::with_val(prec, &s + m), p.power)));
            }
        }
        let full = self.eval(x, explicit)?;
        let tail = Float::with_val(prec, &full.value - &partial);
        Ok((partial, upper_f64(&tail) + full.bound))
    }

    /// Upper bound of `|g|` on `[lo, hi]` (with `lo > 0` if a shift has a pole at 0).
    pub fn abs_bound(&self, lo: &Rational, hi: &Rational) -> Result<f64, TransportError> {
        let unbounded = || TransportError::Pole(format!("[{lo}, {hi}]"));
        let mut total = self.head.abs_bound(lo, hi).ok_or_else(unbounded)?;
        let mut used = vec![false; self.parts.len()];
        for (i, p) in self.parts.iter().enumerate() {
            if used[i] {
                continue;
            }
            let (smin_i, _) = p.shift.range_enclosure(lo, hi).ok_or_else(unbounded)?;
            if p.power >= 2 {
                let z = Rational::from(&smin_i + p.m0).to_f64();
                if z <= 0.0 {
                    return Err(unbounded());
                }
                let w = p.weight.abs_bound(lo, hi).ok_or_else(unbounded)?;
                total += w * hurwitz_zeta_upper(p.power, z);
                continue;
            }
            let neg = -&p.weight;
            let j = (i + 1..self.parts.len())
                .find(|&j| {
                    !used[j]
                        && self.parts[j].power == 1
                        && self.parts[j].m0 == p.m0
                        && self.parts[j].weight == neg
                })
                .ok_or(TransportError::Unpaired)?;
            used[j] = true;
            let q = &self.parts[j];
            let (smin_j, _) = q.shift.range_enclosure(lo, hi).ok_or_else(unbounded)?;
            let gap = (&q.shift - &p.shift).abs_bound(lo, hi).ok_or_else(unbounded)?;
            let z = Rational::from(smin_i.min(smin_j) + p.m0).to_f64();
            if z <= 0.0 {
                return Err(unbounded());
            }
            let w = p.weight.abs_bound(lo, hi).ok_or_else(unbounded)?;
            total += w * gap * hurwitz_zeta_upper(2, z);
        }
        Ok(total * (1.0 + 1e-9))
    }
}

impl fmt::Display for SeriesDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.head.is_zero() || self.parts.is_empty() {
            write!(f, "{}", self.head)?;
            first = false;
        }
        for p in &self.parts {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let pw = if p.power == 1 { String::new() } else { format!("^{}", p.power) };
            write!(f, "sum_{{m>={}}} ({})/(m + {}){pw}", p.m0, p.weight, p.shift)?;
        }
        Ok(())
    }
}

fn moebius_entries(m: &MoebiusBranch) -> [Rational; 4] {
    m.rational_entries()
}

/// The series `sum_{k >= k0} h(V_k x) |V_k'(x)|` over one digit family.
fn family_transport(f: &DigitFamily, h: &RationalFunction) -> Result<Vec<SeriesPart>, TransportError> {
    // with t = k + I(x): h(O(1/t)) |O'(1/t)| / t^2 * |I'(x)|
    let recip = MoebiusBranch::from_ints(0, 1, 1, 0).unwrap();
    let [a, b, c, d] = moebius_entries(&f.outer.compose(&recip));
    let h_t = h.compose_moebius(&a, &b, &c, &d)?;
    let [a, b, c, d] = moebius_entries(&recip);
    let jac_t = f.outer.jacobian().compose_moebius(&a, &b, &c, &d)?;
    let t2 = RationalFunction::new(Polynomial::one(), Polynomial::from_ints(&[0, 0, 1]))?;
    let big_f = &(&h_t * &jac_t) * &t2;
    let pf = big_f.partial_fractions()?;
    if !pf.poly.is_zero() {
        return Err(TransportError::Divergent(format!("terms do not decay: {big_f}")));
    }
    let (zlo, _) = f.inner_range();
    let start = Rational::from(&zlo + f.k0);
    let inner = {
        let [a, b, c, d] = moebius_entries(&f.inner);
        RationalFunction::new(Polynomial::linear(c, d), Polynomial::linear(a, b))?
    };
    let jac_inner = f.inner.jacobian();
    let mut parts = Vec::new();
    for term in pf.terms {
        if term.pole >= start {
            return Err(TransportError::Pole(format!("t = {}", term.pole)));
        }
        parts.push(SeriesPart {
            weight: jac_inner.scale(&term.coeff),
            shift: &inner - &RationalFunction::constant(term.pole.clone()),
            power: term.power,
            m0: f.k0,
        });
    }
    Ok(parts)
}

/// Given the density `h` of `U = T . S`, returns `sum_j h(V_j x) omega_j(x)`
/// over the branches of `S`, the density of `Z = S . T`.
pub fn transport_density(s: &PiecewiseMap, h: &Density) -> Result<Density, TransportError> {
    let Density::Rational(h) = h else {
        return Err(TransportError::Unsupported(
            "transport of series densities is not implemented".into(),
        ));
    };
    if s.is_finite() {
        return Ok(Density::Rational(transfer_apply(s, h)?));
    }
    let mut head = RationalFunction::zero();
    let mut parts = Vec::new();
    for piece in s.pieces() {
        match piece {
            Piece::Branch(v) => {
                let single = PiecewiseMap::unchecked(vec![Piece::Branch(v.clone())]);
                head = &head + &transfer_apply(&single, h)?;
            }
            Piece::Family(f) => parts.extend(family_transport(f, h)?),
        }
    }
    Ok(Density::Series(SeriesDensity::new(head, parts)?))
}

/// Certified evaluation: increases the explicit term count until the bound
/// reaches `target`, or reports the best attempt within `cap` terms.
pub fn series_eval(
    s: &SeriesDensity,
    x: &Float,
    target: f64,
    cap: usize,
) -> Result<(SeriesValue, bool), TransportError> {
    let mut j = 1usize;
    loop {
        let v = s.eval(x, j.min(cap))?;
        if v.bound <= target || j >= cap {
            let ok = v.bound <= target;
            return Ok((v, ok));
        }
        j *= 4;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointResidual {
    #[serde(with = "crate::arith::rational::serde_str")]
    pub x: Rational,
    pub g: f64,
    pub residual: f64,
    pub bound: f64,
    /// Digits summed explicitly in each digit family.
    pub digits: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesKuzminReport {
    pub outcome: Outcome,
    pub tol: f64,
    pub points: Vec<PointResidual>,
}

impl SeriesKuzminReport {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_bound(&self) -> f64 {
        self.points.iter().map(|p| p.bound).fold(0.0, f64::max)
    }
}

/// Tail data of one digit family, for `phi(u) = g(O(u)) |O'(u)|` near `u = 0`.
struct FamilyTail {
    family: DigitFamily,
    /// `phi(0)` and `phi'(0)` with error bounds.
    phi0: (Float, f64),
    phi1: (Float, f64),
}

impl FamilyTail {
    fn new(f: &DigitFamily, g: &SeriesDensity, dg: &SeriesDensity, prec: u32, explicit: usize) -> Result<Self, TransportError> {
        let [a, b, c, _] = f.outer.rational_entries();
        let det = Rational::from(f.outer.det());
        let sign = if det > 0 { 1 } else { -1 };
        let d1 = Rational::from(&det / Rational::from(&a * &a));
        let d2 = Rational::from(-2 * Rational::from(&b * &det)) / Rational::from(&a * &a) / &a;
        let o0 = Float::with_val(prec, &Rational::from(&c / &a));
        let g0 = g.eval(&o0, explicit)?;
        let dg0 = dg.eval(&o0, explicit)?;
        let fl = |r: &Rational| Float::with_val(prec, r);
        let ad1 = d1.clone().abs();
        let phi0 = Float::with_val(prec, &g0.value * fl(&ad1));
        let phi0_err = g0.bound * ad1.to_f64();
        let sq = Rational::from(&d1 * &d1);
        let phi1 = (Float::with_val(prec, &dg0.value * fl(&sq)) + Float::with_val(prec, &g0.value * fl(&d2))) * sign;
        let phi1_err = dg0.bound * sq.to_f64() + g0.bound * d2.abs().to_f64();
        Ok(Self {
            family: f.clone(),
            phi0: (phi0, phi0_err),
            phi1: (phi1, phi1_err),
        })
    }

    /// Bound on `|phi''|` over `u` in `[0, 1/(kmax + z_lo)]`.
    fn second_derivative_bound(&self, derivs: [&SeriesDensity; 3], kmax: i64) -> Result<f64, TransportError> {
        let o = &self.family.outer;
        let (zlo, _) = self.family.inner_range();
        let start = Rational::from(&zlo + kmax);
        if start <= 0 {
            return Err(TransportError::Pole(format!("digit {kmax}")));
        }
        let umax = Rational::from(start.recip_ref());
        let [a, b, _, _] = o.rational_entries();
        let e0 = a.clone().abs();
        let e1 = Rational::from(&a + Rational::from(&b * &umax)).abs();
        let m = e0.min(e1).to_f64() * (1.0 - 1e-12);
        let det = Rational::from(o.det()).abs().to_f64();
        let bb = b.abs().to_f64();
        let od = [det / m.powi(2), 2.0 * bb * det / m.powi(3), 6.0 * bb * bb * det / m.powi(4)];
        let y0 = o.eval(&Rational::new()).map_err(|e| TransportError::Unsupported(e.to_string()))?;
        let y1 = o.eval(&umax).map_err(|e| TransportError::Unsupported(e.to_string()))?;
        let (lo, hi) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
        let gb: Vec<f64> = derivs
            .iter()
            .map(|d| d.abs_bound(&lo, &hi))
            .collect::<Result<_, _>>()?;
        Ok(gb[2] * od[0].powi(3) + 3.0 * gb[1] * od[0] * od[1] + gb[0] * od[2])
    }

    /// `sum_{k >= kmax} g(V_k x) omega_k(x)` with an error bound.
    fn tail(&self, x: &Float, kmax: i64, m2: f64) -> (Float, f64) {
        let prec = x.prec();
        let z = self.family.inner.eval_float(x);
        let ji = jacobian_float(&self.family.inner, x);
        let zk = Float::with_val(prec, &z + kmax);
        let z2 = hurwitz_zeta(2, &zk);
        let z3 = hurwitz_zeta(3, &zk);
        let (phi0, e0) = &self.phi0;
        let (phi1, e1) = &self.phi1;
        let tail = Float::with_val(prec, phi0 * &z2.value) + Float::with_val(prec, phi1 * &z3.value);
        let err = e0 * upper_f64(&z2.value)
            + e1 * upper_f64(&z3.value)
            + upper_f64(phi0) * z2.err
            + upper_f64(phi1) * z3.err
            + m2 / 2.0 * hurwitz_zeta_upper(4, zk.to_f64() * (1.0 - 1e-12));
        let jif = upper_f64(&ji);
        (tail * ji, err * jif)
    }
}

fn jacobian_float(v: &MoebiusBranch, x: &Float) -> Float {
    let prec = x.prec();
    let den = Float::with_val(prec, x * v.b()) + v.a();
    Float::with_val(prec, rug::Integer::from(v.det().abs_ref())) / den.square()
}

fn add_term(g: &SeriesDensity, v: &MoebiusBranch, x: &Float, explicit: usize, sum: &mut Float, err: &mut f64) -> Result<(), TransportError> {
    let y = v.eval_float(x);
    let w = jacobian_float(v, x);
    let gv = g.eval(&y, explicit)?;
    *err += gv.bound * upper_f64(&w);
    *sum += gv.value * w;
    Ok(())
}

/// Digit counts tried in turn for the explicit part of each digit family.
pub const FAMILY_DIGITS: [i64; 4] = [64, 256, 1024, 4096];

/// Checks `sum_j g(V_j x) omega_j(x) = g(x)` at each point with a certified
/// bound. A point passes when `|residual| + bound <= tol` and fails when
/// `|residual| - bound > tol`.
pub fn kuzmin_check_series(
    p: &PiecewiseMap,
    g: &SeriesDensity,
    points: &[Rational],
    tol: f64,
    digits: u32,
    explicit: usize,
) -> Result<SeriesKuzminReport, TransportError> {
    let prec = bits_for_digits(digits);
    let dg = g.derivative();
    let d2g = dg.derivative();
    let derivs = [g, &dg, &d2g];
    let mut tails = Vec::new();
    for piece in p.pieces() {
        if let Piece::Family(f) = piece {
            let t = FamilyTail::new(f, g, &dg, prec, explicit)?;
            let m2: Vec<f64> = FAMILY_DIGITS
                .iter()
                .map(|&k| t.second_derivative_bound(derivs, k.max(f.k0 + 1)))
                .collect::<Result<_, _>>()?;
            tails.push((t, m2));
        }
    }
    let results: Vec<Result<(PointResidual, Outcome), TransportError>> = points
        .par_iter()
        .map(|xr| {
            let x = Float::with_val(prec, xr);
            let mut fixed = Float::with_val(prec, 0);
            let mut fixed_err = 0.0;
            for piece in p.pieces() {
                if let Piece::Branch(v) = piece {
                    add_term(g, v, &x, explicit, &mut fixed, &mut fixed_err)?;
                }
            }
            let gx = g.eval(&x, explicit)?;
            fixed -= &gx.value;
            fixed_err += gx.bound;
            // running explicit sums per family
            let mut heads: Vec<(Float, f64, i64)> = tails
                .iter()
                .map(|(t, _)| (Float::with_val(prec, 0), 0.0, t.family.k0))
                .collect();
            let mut last = None;
            for (ki, &kmax) in FAMILY_DIGITS.iter().enumerate() {
                let mut res = fixed.clone();
                let mut bound = fixed_err;
                for ((t, m2), head) in tails.iter().zip(heads.iter_mut()) {
                    let kmax = kmax.max(t.family.k0 + 1);
                    for k in head.2..kmax {
                        add_term(g, &t.family.branch(k), &x, explicit, &mut head.0, &mut head.1)?;
                    }
                    head.2 = kmax;
                    let (tv, te) = t.tail(&x, kmax, m2[ki]);
                    res += &head.0;
                    res += tv;
                    bound += head.1 + te;
                }
                let r = res.to_f64();
                let outcome = if r.abs() + bound <= tol {
                    Outcome::Pass
                } else if r.abs() - bound > tol {
                    Outcome::Fail
                } else {
                    Outcome::Inconclusive
                };
                let pr = PointResidual {
                    x: xr.clone(),
                    g: gx.value.to_f64(),
                    residual: r,
                    bound,
                    digits: kmax,
                };
                let done = outcome != Outcome::Inconclusive || tails.is_empty();
                last = Some((pr, outcome));
                if done {
                    break;
                }
            }
            Ok(last.expect("at least one digit count"))
        })
        .collect();
    let mut out = Vec::new();
    let mut outcomes = Vec::new();
    for r in results {
        let (pr, o) = r?;
        out.push(pr);
        outcomes.push(o);
    }
    let outcome = if outcomes.contains(&Outcome::Fail) {
        Outcome::Fail
    } else if outcomes.iter().all(|o| *o == Outcome::Pass) {
        Outcome::Pass
    } else {
        Outcome::Inconclusive
    };
    Ok(SeriesKuzminReport {
        outcome,
        tol,
        points: out,
    })
}

/// Kuzmin residual at `x` for a finite map when every evaluation of `g` is the
/// plain partial sum with `explicit` terms, with the summed tail bounds.
pub fn kuzmin_residual_truncated(
    p: &PiecewiseMap,
    g: &SeriesDensity,
    x: &Rational,
    explicit: usize,
    digits: u32,
) -> Result<(f64, f64), TransportError> {
    let prec = bits_for_digits(digits);
    let xf = Float::with_val(prec, x);
    let (gx, mut bound) = g.eval_truncated(&xf, explicit)?;
    let mut res = -gx;
    for v in p.branches()? {
        let w = jacobian_float(v, &xf);
        let (gv, b) = g.eval_truncated(&v.eval_float(&xf), explicit)?;
        bound += b * upper_f64(&w);
        res += gv * w;
    }
    Ok((res.to_f64(), bound))
}

/// Equally spaced interior sample points `i / (n + 1)`.
pub fn sample_points(n: usize) -> Vec<Rational> {
    (1..=n).map(|i| Rational::from((i as i64, n as i64 + 1))).collect()
}

/// One row per sample point: `x, g(x)` at `explicit` terms, and the tail bound.
pub fn density_rows(d: &Density, n: usize, digits: u32, explicit: usize) -> Result<Vec<(Rational, Float, f64)>, TransportError> {
    let prec = bits_for_digits(digits);
    let s = d.as_series();
    sample_points(n)
        .into_iter()
        .map(|x| {
            let xf = Float::with_val(prec, &x);
            let (v, b) = s.eval_truncated(&xf, explicit)?;
            Ok((x, v, b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibred::{gauss, times_a};

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
        RationalFunction::new(Polynomial::from_ints(num), Polynomial::from_ints(den)).unwrap()
    }

    fn fl(v: f64) -> Float {
        Float::with_val(200, v)
    }

    #[test]
    fn unpaired_power_one_parts_diverge() {
        let p = SeriesPart {
            weight: RationalFunction::one(),
            shift: rf(&[0, 1], &[1]),
            power: 1,
            m0: 1,
        };
        assert!(matches!(
            SeriesDensity::new(RationalFunction::zero(), vec![p]),
            Err(TransportError::Divergent(_))
        ));
    }

    #[test]
    fn telescoping_series_sums_exactly() {
        // sum_{m>=1} 1/(m+x) - 1/(m+x+1) = 1/(1+x)
        let parts = vec![
            SeriesPart { weight: RationalFunction::one(), shift: rf(&[0, 1], &[1]), power: 1, m0: 1 },
            SeriesPart { weight: -&RationalFunction::one(), shift: rf(&[1, 1], &[1]), power: 1, m0: 1 },
        ];
        let s = SeriesDensity::new(RationalFunction::zero(), parts).unwrap();
        for x in [0.0, 0.25, 0.9] {
            let v = s.eval(&fl(x), 4).unwrap();
            let diff = (v.value.to_f64() - 1.0 / (1.0 + x)).abs();
            assert!(diff < 1e-15 && v.bound < 1e-40, "{diff} {}", v.bound);
            let (part, tb) = s.eval_truncated(&fl(x), 10).unwrap();
            let exact = 1.0 / (1.0 + x) - 1.0 / (11.0 + x);
            assert!((part.to_f64() - exact).abs() < 1e-15);
            assert!(tb >= 1.0 / (11.0 + x) * 0.999);
        }
        let t = s.term(1);
        assert_eq!(t, &rf(&[1], &[1, 1]) - &rf(&[1], &[2, 1]));
    }

    #[test]
    fn zeta_part_matches_basel() {
        let p = SeriesPart { weight: RationalFunction::one(), shift: rf(&[0], &[1]), power: 2, m0: 1 };
        let s = SeriesDensity::new(RationalFunction::zero(), vec![p]).unwrap();
        let v = s.eval(&fl(0.0), 3).unwrap();
        let pi = std::f64::consts::PI;
        assert!((v.value.to_f64() - pi * pi / 6.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_series_matches_difference_quotient() {
        let u = UnionFamily { alpha: int(1), beta: int(2), delta: int(3) };
        let s = SeriesDensity::interval_union(&u).unwrap();
        let ds = s.derivative();
        let h = 1e-20;
        let x0 = fl(0.4);
        let a = s.eval(&Float::with_val(200, &x0 + h), 8).unwrap().value;
        let b = s.eval(&Float::with_val(200, &x0 - h), 8).unwrap().value;
        let fd: f64 = Float::with_val(200, (a - b) / (2.0 * h)).to_f64();
        let d = ds.eval(&x0, 8).unwrap().value.to_f64();
        assert!((fd - d).abs() < 1e-12, "{fd} {d}");
        let bound = s.abs_bound(&Rational::from((1, 4)), &int(1)).unwrap();
        assert!(s.eval(&fl(0.25), 8).unwrap().value.to_f64() <= bound);
    }

    #[test]
    fn gauss_density_is_invariant() {
        let g = SeriesDensity::from_rational(rf(&[1], &[1, 1]));
        let r = kuzmin_check_series(&gauss(), &g, &sample_points(5), 1e-10, 40, 16).unwrap();
        assert_eq!(r.outcome, Outcome::Pass, "{r:?}");
    }

    #[test]
    fn wrong_density_fails() {
        let g = SeriesDensity::from_rational(RationalFunction::one());
        let r = kuzmin_check_series(&gauss(), &g, &sample_points(3), 1e-20, 40, 16).unwrap();
        assert_eq!(r.outcome, Outcome::Fail);
        assert!((r.points[1].residual.abs() - 0.065).abs() < 0.01, "{r:?}");
    }

    #[test]
    fn transport_through_gauss_gives_invariant_series() {
        // S = Gauss, T = x -> a x mod 1 with density h = 1/(a + x)
        let a = 3;
        let t = times_a(a).unwrap();
        let s = gauss();
        let u = PiecewiseMap::compose_maps(&t, &s).unwrap();
        let h = Density::Rational(rf(&[1], &[a, 1]));
        let g = transport_density(&s, &h).unwrap();
        let Density::Series(gs) = &g else { panic!("expected series") };
        let z = PiecewiseMap::compose_maps(&s, &t).unwrap();
        let r = kuzmin_check_series(&z, gs, &sample_points(3), 1e-10, 40, 16).unwrap();
        assert_eq!(r.outcome, Outcome::Pass, "{r:?}");
        let _ = u;
    }

    #[test]
    fn truncated_residual_shrinks_with_terms() {
        let u = UnionFamily { alpha: int(0), beta: int(1), delta: int(2) };
        let g = SeriesDensity::interval_union(&u).unwrap();
        let p = crate::fibred::intro_map();
        let x = Rational::from((1, 3));
        let mut last = f64::INFINITY;
        for j in [100, 1000] {
            let (r, b) = kuzmin_residual_truncated(&p, &g, &x, j, 30).unwrap();
            assert!(r.abs() <= b, "{r} {b}");
            assert!(b < last);
            last = b;
        }
    }
}
