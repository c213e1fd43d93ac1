//! Transfer operator, natural duals and the densities they induce.

mod conditions;
pub mod exceptional;

use std::fmt;

use rug::Integer;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use conditions::{
    condition_eval, condition_from_determinant, dual_row, parametric_branches, ConditionId, Family,
};
pub use exceptional::{exceptional_dual_verify, ExceptionalReport, FloatBranch};

use crate::arith::rational::int;
use crate::arith::{null_space, ArithError, Polynomial, Rational, RationalFunction};
use crate::fibred::{MapError, PiecewiseMap};
use crate::moebius::MoebiusBranch;
use crate::transport::{Density, SeriesDensity, TransportError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualityError {
    #[error("density has a pole inside the cylinder [{lo}, {hi}] of branch {branch}")]
    PoleHit { branch: usize, lo: String, hi: String },
    #[error("dual set passes through infinity; no integrable density")]
    Wrapped,
    #[error("density has a pole inside (0, 1)")]
    PoleInside,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Transport(#[from] Box<TransportError>),
}

/// Sum over the branches of `f(V_j x) |V_j'(x)|`.
///
/// Poles of `f` at cylinder endpoints are allowed (densities such as `1/x`);
/// a pole strictly inside a cylinder is an error.
pub fn transfer_apply(p: &PiecewiseMap, f: &RationalFunction) -> Result<RationalFunction, DualityError> {
    let mut acc = RationalFunction::zero();
    for (j, v) in p.branches()?.into_iter().enumerate() {
        let (lo, hi) = v.image_of_unit().map_err(MapError::from)?;
        if f.pole_count_in_open(&lo, &hi) > 0 {
            return Err(DualityError::PoleHit {
                branch: j,
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        let [a, b, c, d] = v.rational_entries();
        let fv = f.compose_moebius(&a, &b, &c, &d)?;
        acc = &acc + &(&fv * &v.jacobian());
    }
    Ok(acc)
}

/// Exact test of Kuzmin's equation `transfer_apply(p, f) == f`.
pub fn kuzmin_check_exact(p: &PiecewiseMap, f: &RationalFunction) -> Result<bool, DualityError> {
    Ok(transfer_apply(p, f)? == *f)
}

/// `psi(t) = (B + D t) / (A + B t)`, stored as coprime integers with the
/// first nonzero entry positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PsiMap {
    pub a: Integer,
    pub b: Integer,
    pub d: Integer,
}

impl PsiMap {
    pub fn from_rationals(v: &[Rational]) -> Option<Self> {
        let l = crate::arith::rational::denominator_lcm(v.iter());
        let mut ints: Vec<Integer> = v
            .iter()
            .map(|r| Rational::from(r * &l).numer().clone())
            .collect();
        let g = ints.iter().fold(Integer::new(), |g, e| g.gcd(e));
        if g == 0 {
            return None;
        }
        let neg = ints.iter().find(|e| **e != 0).map_or(false, |e| *e < 0);
        let g = if neg { -g } else { g };
        for e in ints.iter_mut() {
            e.div_exact_mut(&g);
        }
        Some(Self {
            a: ints[0].clone(),
            b: ints[1].clone(),
            d: ints[2].clone(),
        })
    }

    pub fn from_ints(a: i64, b: i64, d: i64) -> Self {
        Self::from_rationals(&[int(a), int(b), int(d)]).expect("nonzero")
    }

    pub fn rationals(&self) -> [Rational; 3] {
        [
            Rational::from(self.a.clone()),
            Rational::from(self.b.clone()),
            Rational::from(self.d.clone()),
        ]
    }

    /// `A D - B^2`; zero means `psi` is constant.
    pub fn det(&self) -> Integer {
        Integer::from(&self.a * &self.d) - Integer::from(&self.b * &self.b)
    }

    /// `psi(t)` on the projective line.
    pub fn eval(&self, t: &Rational) -> Endpoint {
        let [a, b, d] = self.rationals();
        let num = Rational::from(&d * t) + &b;
        let den = Rational::from(&b * t) + &a;
        if den == 0 {
            Endpoint::infinity_near(t, &num, &b)
        } else {
            Endpoint::Finite(num / den)
        }
    }

    /// `psi . V` and `V* . psi` agree up to a scalar.
    pub fn conjugates(&self, v: &MoebiusBranch) -> bool {
        let [pa, pb, pd] = self.rationals();
        let [a, b, c, d] = v.rational_entries();
        let mul = |x: &[Rational; 4], y: &[Rational; 4]| -> [Rational; 4] {
            let m = |p: &Rational, q: &Rational, r: &Rational, s: &Rational| {
                Rational::from(p * q) + Rational::from(r * s)
            };
            [
                m(&x[0], &y[0], &x[1], &y[2]),
                m(&x[0], &y[1], &x[1], &y[3]),
                m(&x[2], &y[0], &x[3], &y[2]),
                m(&x[2], &y[1], &x[3], &y[3]),
            ]
        };
        let psi = [pa, pb.clone(), pb, pd];
        let left = mul(&psi, &[a.clone(), b.clone(), c.clone(), d.clone()]);
        let right = mul(&[a, c, b, d], &psi);
        projectively_equal(&left, &right)
    }
}

fn projectively_equal(x: &[Rational; 4], y: &[Rational; 4]) -> bool {
    (0..4).all(|i| (0..4).all(|j| Rational::from(&x[i] * &y[j]) == Rational::from(&x[j] * &y[i])))
}

impl fmt::Display for PsiMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(A, B, D) = ({}, {}, {})", self.a, self.b, self.d)
    }
}

impl Serialize for PsiMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.a.to_string(), self.b.to_string(), self.d.to_string()].serialize(s)
    }
}

/// Outcome of solving for a natural dual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NaturalDual {
    Unique(PsiMap),
    None,
    /// Null space of dimension at least two.
    Degenerate(Vec<PsiMap>),
}

impl NaturalDual {
    pub fn psi(&self) -> Option<&PsiMap> {
        match self {
            NaturalDual::Unique(p) => Some(p),
            _ => None,
        }
    }
}

/// Solves `psi . V_k = V_k* . psi` for all branches, taking the symmetric
/// solution branch `b A + (d - a) B - c D = 0` of each projective identity.
pub fn natural_dual_solve(p: &PiecewiseMap) -> Result<NaturalDual, DualityError> {
    let rows: Vec<Vec<Rational>> = p
        .branches()?
        .into_iter()
        .map(|v| dual_row(&v.rational_entries()).to_vec())
        .collect();
    natural_dual_from_rows(&rows)
}

pub fn natural_dual_from_rows(rows: &[Vec<Rational>]) -> Result<NaturalDual, DualityError> {
    let ns = null_space(rows);
    Ok(match ns.len() {
        0 => NaturalDual::None,
        1 => NaturalDual::Unique(PsiMap::from_rationals(&ns[0]).expect("nonzero kernel vector")),
        _ => NaturalDual::Degenerate(
            ns.iter()
                .map(|v| PsiMap::from_rationals(v).expect("nonzero kernel vector"))
                .collect(),
        ),
    })
}

/// A point of the projective line, with the side from which infinity is reached.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Endpoint {
    /// Limit of `num / den(t)` as `t` approaches the pole from inside `[0, 1]`,
    /// where `den(t) = slope (t - pole)`.
    fn infinity_near(t: &Rational, num: &Rational, slope: &Rational) -> Self {
        // inside [0, 1] the pole is approached from the right at 0 and from the left at 1
        let from_right = *t == 0;
        let den_sign = if from_right { slope.cmp0() } else { slope.cmp0().reverse() };
        if num.cmp0() == den_sign {
            Endpoint::PosInf
        } else {
            Endpoint::NegInf
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Endpoint::Finite(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => f.write_str("-inf"),
            Endpoint::PosInf => f.write_str("inf"),
            Endpoint::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for Endpoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Union of `[alpha + j delta, beta + j delta]` over `j >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct UnionFamily {
    #[serde(with = "crate::arith::rational::serde_str")]
    pub alpha: Rational,
    #[serde(with = "crate::arith::rational::serde_str")]
    pub beta: Rational,
    #[serde(with = "crate::arith::rational::serde_str")]
    pub delta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DualDescriptor {
    /// `B* = [eta, theta]`, either end possibly infinite.
    Interval { eta: Endpoint, theta: Endpoint },
    /// `psi([0,1])` runs through infinity: `B* = [hi, inf] u [-inf, lo]`.
    Wrapped {
        #[serde(with = "crate::arith::rational::serde_str")]
        lo: Rational,
        #[serde(with = "crate::arith::rational::serde_str")]
        hi: Rational,
    },
    Singular {
        #[serde(with = "crate::arith::rational::serde_str")]
        xi: Rational,
    },
    IntervalUnion(UnionFamily),
}

impl DualDescriptor {
    pub fn interval(eta: Rational, theta: Rational) -> Self {
        if eta == theta {
            return DualDescriptor::Singular { xi: eta };
        }
        let (eta, theta) = if eta < theta { (eta, theta) } else { (theta, eta) };
        DualDescriptor::Interval {
            eta: Endpoint::Finite(eta),
            theta: Endpoint::Finite(theta),
        }
    }

    pub fn endpoints(&self) -> Option<[Endpoint; 2]> {
        match self {
            DualDescriptor::Interval { eta, theta } => Some([eta.clone(), theta.clone()]),
            DualDescriptor::Singular { xi } => {
                Some([Endpoint::Finite(xi.clone()), Endpoint::Finite(xi.clone())])
            }
            DualDescriptor::Wrapped { lo, hi } => {
                Some([Endpoint::Finite(lo.clone()), Endpoint::Finite(hi.clone())])
            }
            DualDescriptor::IntervalUnion(_) => None,
        }
    }
}

impl fmt::Display for DualDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualDescriptor::Interval { eta, theta } => write!(f, "[{eta}, {theta}]"),
            DualDescriptor::Wrapped { lo, hi } => write!(f, "[{hi}, inf] u [-inf, {lo}]"),
            DualDescriptor::Singular { xi } => write!(f, "{{{xi}}}"),
            DualDescriptor::IntervalUnion(u) => write!(
                f,
                "union_j [{} + {}j, {} + {}j]",
                u.alpha, u.delta, u.beta, u.delta
            ),
        }
    }
}

/// `B* = psi([0, 1])` with endpoints `{B/A, (B+D)/(A+B)}`.
pub fn dual_interval(psi: &PsiMap) -> DualDescriptor {
    if psi.det() == 0 {
        // constant map: B/A, or (B+D)/(A+B) when A = 0 (then B = 0 as well)
        let [a, b, d] = psi.rationals();
        let xi = if a != 0 {
            b / a
        } else {
            Rational::from(&b + &d) / Rational::from(&a + &b)
        };
        return DualDescriptor::Singular { xi };
    }
    let e0 = psi.eval(&int(0));
    let e1 = psi.eval(&int(1));
    let a = Rational::from(psi.a.clone());
    let ab = Rational::from(&psi.a + &psi.b);
    // pole strictly inside (0, 1) iff A and A + B have opposite signs
    if a.cmp0() != std::cmp::Ordering::Equal
        && ab.cmp0() != std::cmp::Ordering::Equal
        && a.cmp0() != ab.cmp0()
    {
        let (x, y) = (e0.finite().unwrap().clone(), e1.finite().unwrap().clone());
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        return DualDescriptor::Wrapped { lo, hi };
    }
    let (eta, theta) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
    DualDescriptor::Interval { eta, theta }
}

fn recip_linear(weight: Rational, shift: Rational, slope: Rational) -> RationalFunction {
    RationalFunction::reciprocal_linear(weight, shift, slope)
}

/// The density `int_{B*} dy / (1 + x y)^2` induced by a dual set.
pub fn density_from_dual(d: &DualDescriptor) -> Result<Density, DualityError> {
    let one = int(1);
    let f = match d {
        DualDescriptor::Interval { eta, theta } => {
            // theta/(1+theta x) - eta/(1+eta x); an infinite end contributes 1/x
            let upper = match theta {
                Endpoint::Finite(t) => recip_linear(t.clone(), one.clone(), t.clone()),
                Endpoint::PosInf => recip_linear(one.clone(), Rational::new(), one.clone()),
                Endpoint::NegInf => return Err(DualityError::Wrapped),
            };
            let lower = match eta {
                Endpoint::Finite(e) => recip_linear(e.clone(), one.clone(), e.clone()),
                Endpoint::NegInf => recip_linear(int(-1), Rational::new(), one.clone()),
                Endpoint::PosInf => return Err(DualityError::Wrapped),
            };
            &upper - &lower
        }
        DualDescriptor::Singular { xi } => {
            let lin = Polynomial::linear(one.clone(), xi.clone());
            RationalFunction::new(Polynomial::one(), &lin * &lin)?
        }
        DualDescriptor::Wrapped { .. } => return Err(DualityError::Wrapped),
        DualDescriptor::IntervalUnion(u) => {
            return Ok(Density::Series(
                SeriesDensity::interval_union(u).map_err(|e| DualityError::Transport(Box::new(e)))?,
            ))
        }
    };
    if f.pole_count_in_open(&int(0), &int(1)) > 0 {
        return Err(DualityError::PoleInside);
    }
    Ok(Density::Rational(f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    Different,
    NoNaturalDual,
}

#[derive(Clone, Debug, Serialize)]
pub struct SameMeasure {
    pub verdict: Verdict,
    pub dual_p: Option<DualDescriptor>,
    pub dual_q: Option<DualDescriptor>,
    /// Whether the density of `p` satisfies Kuzmin's equation for `q`;
    /// `None` when `p` has no admissible density.
    pub cross_check: Option<bool>,
}

impl SameMeasure {
    /// The cross check agrees with the endpoint verdict.
    pub fn consistent(&self) -> bool {
        match (self.verdict, self.cross_check) {
            (Verdict::Equal, Some(c)) => c,
            (Verdict::Different, Some(c)) => !c,
            _ => true,
        }
    }
}

fn natural_dual_descriptor(p: &PiecewiseMap) -> Result<Option<DualDescriptor>, DualityError> {
    Ok(natural_dual_solve(p)?.psi().map(dual_interval))
}

/// Compares the natural duals of `p` and `q` by their unordered endpoint
/// pairs, and cross checks with the exact transfer operator.
pub fn same_measure(p: &PiecewiseMap, q: &PiecewiseMap) -> Result<SameMeasure, DualityError> {
    let dp = natural_dual_descriptor(p)?;
    let dq = natural_dual_descriptor(q)?;
    let (Some(a), Some(b)) = (&dp, &dq) else {
        return Ok(SameMeasure {
            verdict: Verdict::NoNaturalDual,
            dual_p: dp,
            dual_q: dq,
            cross_check: None,
        });
    };
    let same_kind = std::mem::discriminant(a) == std::mem::discriminant(b);
    let verdict = if same_kind && a.endpoints() == b.endpoints() {
        Verdict::Equal
    } else {
        Verdict::Different
    };
    let cross_check = match density_from_dual(a) {
        Ok(Density::Rational(h)) => Some(kuzmin_check_exact(q, &h)?),
        _ => None,
    };
    Ok(SameMeasure {
        verdict,
        dual_p: dp,
        dual_q: dq,
        cross_check,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommonFixedPoint {
    /// Rational common fixed point `kappa` and `xi = -1/kappa` (`None` for `kappa = 0`).
    Rational { kappa: Rational, xi: Option<Rational> },
    /// All branches share the two roots of this irreducible quadratic.
    Quadratic(Polynomial),
}

/// Intersection of the fixed point sets of all branches.
pub fn common_fixed_point(p: &PiecewiseMap) -> Result<Option<CommonFixedPoint>, DualityError> {
    let mut g: Option<Polynomial> = None;
    for v in p.branches()? {
        let Ok(fp) = v.fixed_points() else {
            continue; // the identity fixes everything
        };
        if fp.quadratic.is_constant() {
            return Ok(None);
        }
        g = Some(match g {
            None => fp.quadratic,
            Some(h) => h.gcd(&fp.quadratic),
        });
    }
    let Some(g) = g else {
        return Ok(None);
    };
    match g.degree() {
        Some(1) => {
            let kappa = Rational::from(-g.coeff(0)) / g.coeff(1);
            let xi = if kappa == 0 {
                None
            } else {
                Some(-Rational::from(kappa.recip_ref()))
            };
            Ok(Some(CommonFixedPoint::Rational { kappa, xi }))
        }
        Some(2) => {
            let roots = crate::arith::poly_roots_rational(&g)?;
            match roots.as_slice() {
                [] => Ok(Some(CommonFixedPoint::Quadratic(g))),
                // two rational roots shared by every branch: report the smaller
                [k, ..] => Ok(Some(CommonFixedPoint::Rational {
                    kappa: k.clone(),
                    xi: (*k != 0).then(|| -Rational::from(k.recip_ref())),
                })),
            }
        }
        _ => Ok(None),
    }
}
