//! Piecewise fractional linear maps of the unit interval, given by their
//! inverse branches.
//!
//! A map is a list of pieces. A piece is either a single branch or a digit
//! family `V_k = O . D_k . I` for `k >= k0`, where `D_k(x) = 1 / (k + x)`.
//! Digit families cover the Gauss map and everything obtained from it by
//! composing with finitely many branches on either side.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::rational::{int, parse_rational, rat, serde_str};
use crate::arith::{ArithError, Rational};
use crate::moebius::{MoebiusBranch, MoebiusError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("invalid map: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("branch index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("{0} is a partition point")]
    PartitionPoint(String),
    #[error("{0} lies in no cylinder")]
    NoCylinder(String),
    #[error("{0} is outside [0, 1]")]
    OutOfDomain(String),
    #[error("composition of two digit families is not supported")]
    NestedFamilies,
    #[error("operation needs a finite branch family")]
    NotFinite,
    #[error("unknown map {0:?}")]
    UnknownMap(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// One problem found by [`PiecewiseMap::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub branch: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.branch, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of(m: &MoebiusBranch) -> Sign {
        if m.is_increasing() {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Which cylinder a partition point belongs to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    Reject,
    #[default]
    Left,
    Right,
}

/// Branches `O(1 / (k + I(x)))`, `k >= k0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitFamily {
    pub outer: MoebiusBranch,
    pub inner: MoebiusBranch,
    pub k0: i64,
}

impl DigitFamily {
    pub fn gauss() -> Self {
        Self {
            outer: MoebiusBranch::identity(),
            inner: MoebiusBranch::identity(),
            k0: 1,
        }
    }

    pub fn branch(&self, k: i64) -> MoebiusBranch {
        self.outer
            .compose(&MoebiusBranch::gauss_digit(k))
            .compose(&self.inner)
    }

    /// `I([0, 1])`, sorted.
    pub fn inner_range(&self) -> (Rational, Rational) {
        self.inner
            .image_of_unit()
            .expect("inner branch validated pole-free")
    }

    pub fn sign(&self) -> Sign {
        let s = Sign::of(&self.outer).flipped();
        if self.inner.is_increasing() {
            s
        } else {
            s.flipped()
        }
    }

    /// Closed hull of the cylinders with digit `>= k`.
    pub fn tail_hull(&self, k: i64) -> (Rational, Rational) {
        let (lo, _) = self.inner_range();
        let top = Rational::from(1) / (Rational::from(k) + lo);
        let a = self.outer.eval(&Rational::new()).expect("validated");
        let b = self.outer.eval(&top).expect("validated");
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Digits whose cylinder can contain `x`, in increasing order.
    fn candidate_digits(&self, x: &Rational) -> Vec<i64> {
        let inv = self.outer.inverse();
        let Ok(u) = inv.eval(x) else {
            return Vec::new();
        };
        if u <= 0 {
            return Vec::new();
        }
        let t = Rational::from(u.recip_ref());
        let (lo, hi) = self.inner_range();
        let from = Rational::from(&t - &hi).ceil();
        let to = Rational::from(&t - &lo).floor();
        let from = from.numer().to_i64().unwrap_or(i64::MAX).max(self.k0);
        let Some(to) = to.numer().to_i64() else {
            return Vec::new();
        };
        (from..=to).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    Branch(MoebiusBranch),
    Family(DigitFamily),
}

/// Address of a single inverse branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchRef {
    pub piece: usize,
    pub digit: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiecewiseMap {
    pieces: Vec<Piece>,
}

/// Positive parameters of the three-branch family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamTriple {
    #[serde(with = "serde_str")]
    pub lambda: Rational,
    #[serde(with = "serde_str")]
    pub mu: Rational,
    #[serde(with = "serde_str")]
    pub nu: Rational,
}

impl ParamTriple {
    pub fn new(lambda: Rational, mu: Rational, nu: Rational) -> Result<Self, MapError> {
        for (name, v) in [("lambda", &lambda), ("mu", &mu), ("nu", &nu)] {
            if *v <= 0 {
                return Err(MapError::BadParameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self { lambda, mu, nu })
    }

    pub fn from_ratios(l: (i64, i64), m: (i64, i64), n: (i64, i64)) -> Self {
        Self::new(rat(l.0, l.1), rat(m.0, m.1), rat(n.0, n.1)).expect("positive literals")
    }

    pub fn parse(l: &str, m: &str, n: &str) -> Result<Self, MapError> {
        Self::new(parse_rational(l)?, parse_rational(m)?, parse_rational(n)?)
    }
}

impl fmt::Display for ParamTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.lambda, self.mu, self.nu)
    }
}

/// The three increasing branches `V_lambda`, `V_mu`, `V_nu`.
pub fn family_t_branches(t: &ParamTriple) -> [MoebiusBranch; 3] {
    let (l, m, n) = (&t.lambda, &t.mu, &t.nu);
    let mk = |a: Rational, b: Rational, c: Rational, d: Rational| {
        MoebiusBranch::from_rationals(&a, &b, &c, &d).expect("positive parameters")
    };
    [
        mk(int(3), Rational::from(3 * l) - 3, int(0), l.clone()),
        mk(int(9), Rational::from(3 * m) - 9, int(3), Rational::from(2 * m) - 3),
        mk(int(3), Rational::from(n - 3), int(2), Rational::from(n - 2)),
    ]
}

/// The map `T` of the three-branch family.
pub fn family_t(t: &ParamTriple) -> Result<PiecewiseMap, MapError> {
    PiecewiseMap::from_branches(family_t_branches(t).to_vec())
}

/// `T` with the branches in `subset` (0 = lambda, 1 = mu, 2 = nu) flipped.
pub fn family_s(t: &ParamTriple, subset: &[usize]) -> Result<PiecewiseMap, MapError> {
    family_t(t)?.flip_branches(subset)
}

pub fn gauss() -> PiecewiseMap {
    PiecewiseMap::new(vec![Piece::Family(DigitFamily::gauss())]).expect("Gauss map is valid")
}

/// `x -> a x mod 1`.
pub fn times_a(a: i64) -> Result<PiecewiseMap, MapError> {
    if a < 2 {
        return Err(MapError::BadParameter(format!("a = {a} must be at least 2")));
    }
    PiecewiseMap::from_branches(
        (0..a)
            .map(|j| MoebiusBranch::from_ints(a, 0, j, 1).unwrap())
            .collect(),
    )
}

/// `x/(1-2x)` on `[0,1/3]`, `1/x - 2` on `(1/3,1/2]`, `1/x - 1` on `(1/2,1]`.
pub fn intro_map() -> PiecewiseMap {
    PiecewiseMap::from_branches(vec![
        MoebiusBranch::from_ints(1, 2, 0, 1).unwrap(),
        MoebiusBranch::from_ints(2, 1, 1, 0).unwrap(),
        MoebiusBranch::from_ints(1, 1, 1, 0).unwrap(),
    ])
    .expect("intro map is valid")
}

fn interval_contains(lo: &Rational, hi: &Rational, x: &Rational) -> bool {
    lo <= x && x <= hi
}

impl PiecewiseMap {
    pub fn new(pieces: Vec<Piece>) -> Result<Self, MapError> {
        let m = Self { pieces };
        let diags = m.validate();
        if diags.is_empty() {
            Ok(m)
        } else {
            Err(MapError::Invalid(diags))
        }
    }

    pub fn from_branches(branches: Vec<MoebiusBranch>) -> Result<Self, MapError> {
        Self::new(branches.into_iter().map(Piece::Branch).collect())
    }

    /// Builds without validation; pair with [`Self::validate`].
    pub fn unchecked(pieces: Vec<Piece>) -> Self {
        Self { pieces }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_finite(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p, Piece::Branch(_)))
    }

    /// The branches of a finite map, in piece order.
    pub fn branches(&self) -> Result<Vec<&MoebiusBranch>, MapError> {
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Branch(m) => Ok(m),
                Piece::Family(_) => Err(MapError::NotFinite),
            })
            .collect()
    }

    pub fn signs(&self) -> Vec<Sign> {
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Branch(m) => Sign::of(m),
                Piece::Family(f) => f.sign(),
            })
            .collect()
    }

    pub fn branch(&self, r: BranchRef) -> MoebiusBranch {
        match (&self.pieces[r.piece], r.digit) {
            (Piece::Branch(m), _) => m.clone(),
            (Piece::Family(f), Some(k)) => f.branch(k),
            (Piece::Family(f), None) => f.branch(f.k0),
        }
    }

    /// All finite branches plus digits `k0 .. k0 + per_family` of each family.
    pub fn truncated_branches(&self, per_family: usize) -> Vec<(BranchRef, MoebiusBranch)> {
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            match p {
                Piece::Branch(m) => out.push((BranchRef { piece: i, digit: None }, m.clone())),
                Piece::Family(f) => {
                    for k in f.k0..f.k0 + per_family as i64 {
                        out.push((BranchRef { piece: i, digit: Some(k) }, f.branch(k)));
                    }
                }
            }
        }
        out
    }

    /// Sorted partition points of a finite map.
    pub fn partition(&self) -> Result<Vec<Rational>, MapError> {
        let mut pts: Vec<Rational> = Vec::new();
        for m in self.branches()? {
            let (lo, hi) = m.image_of_unit()?;
            pts.push(lo);
            pts.push(hi);
        }
        pts.sort();
        pts.dedup();
        Ok(pts)
    }

    /// Checks pole-freeness, branch orientation and that the cylinders tile
    /// `[0, 1]`. An empty result means the map is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        const CHECKED_DIGITS: i64 = 64;
        let zero = Rational::new();
        let one = int(1);
        let mut diags = Vec::new();
        let mut cylinders: Vec<(Rational, Rational, String)> = Vec::new();
        let mut tails: Vec<(Rational, Rational)> = Vec::new();
        let mut push = |name: &str, msg: String| {
            diags.push(Diagnostic {
                branch: name.to_string(),
                message: msg,
            })
        };
        if self.pieces.is_empty() {
            push("map", "no branches".into());
        }
        for (i, p) in self.pieces.iter().enumerate() {
            let name = format!("branch {}", i + 1);
            match p {
                Piece::Branch(m) => {
                    if m.has_pole_in(&zero, &one) {
                        push(&name, format!("{m} has a pole in [0, 1]"));
                        continue;
                    }
                    let (lo, hi) = m.image_of_unit().expect("pole-free");
                    if lo < 0 || hi > 1 {
                        push(&name, format!("{m} maps [0, 1] onto [{lo}, {hi}]"));
                        continue;
                    }
                    cylinders.push((lo, hi, name));
                }
                Piece::Family(f) => {
                    if f.inner.has_pole_in(&zero, &one) {
                        push(&name, format!("inner branch {} has a pole in [0, 1]", f.inner));
                        continue;
                    }
                    let (zlo, zhi) = f.inner_range();
                    if Rational::from(&zlo + f.k0) <= 0 {
                        push(&name, format!("digit {} meets a pole", f.k0));
                        continue;
                    }
                    if Rational::from(&zhi - &zlo) > 1 {
                        push(&name, "inner range wider than 1".into());
                        continue;
                    }
                    let top = Rational::from(1) / Rational::from(&zlo + f.k0);
                    if f.outer.has_pole_in(&zero, &top) {
                        push(&name, format!("outer branch {} has a pole on the range", f.outer));
                        continue;
                    }
                    let mut bad = false;
                    for k in f.k0..f.k0 + CHECKED_DIGITS {
                        let (lo, hi) = f.branch(k).image_of_unit().expect("pole-free");
                        if lo < 0 || hi > 1 {
                            push(&name, format!("digit {k} leaves [0, 1]"));
                            bad = true;
                            break;
                        }
                        cylinders.push((lo, hi, format!("{name} digit {k}")));
                    }
                    if !bad {
                        tails.push(f.tail_hull(f.k0 + CHECKED_DIGITS));
                    }
                }
            }
        }
        if !diags.is_empty() {
            return diags;
        }
        cylinders.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        for w in cylinders.windows(2) {
            if w[1].0 < w[0].1 {
                diags.push(Diagnostic {
                    branch: w[1].2.clone(),
                    message: format!(
                        "cylinder [{}, {}] overlaps {} = [{}, {}]",
                        w[1].0, w[1].1, w[0].2, w[0].0, w[0].1
                    ),
                });
            }
        }
        for c in &cylinders {
            if c.0 == c.1 {
                diags.push(Diagnostic {
                    branch: c.2.clone(),
                    message: "degenerate cylinder".into(),
                });
            }
        }
        // coverage: merge cylinders and tail hulls
        let mut all: Vec<(Rational, Rational)> =
            cylinders.iter().map(|c| (c.0.clone(), c.1.clone())).collect();
        all.extend(tails);
        all.sort();
        let mut reach = zero.clone();
        for (lo, hi) in &all {
            if *lo > reach {
                diags.push(Diagnostic {
                    branch: "map".into(),
                    message: format!("gap ({reach}, {lo}) not covered by any cylinder"),
                });
            }
            if *hi > reach {
                reach = hi.clone();
            }
        }
        if reach < 1 {
            diags.push(Diagnostic {
                branch: "map".into(),
                message: format!("gap ({reach}, 1) not covered by any cylinder"),
            });
        }
        diags
    }

    /// Replaces the branches in `subset` by `x -> V(1 - x)`.
    pub fn flip_branches(&self, subset: &[usize]) -> Result<Self, MapError> {
        let set: BTreeSet<usize> = subset.iter().copied().collect();
        if let Some(&i) = set.iter().find(|&&i| i >= self.pieces.len()) {
            return Err(MapError::IndexOutOfRange(i));
        }
        let flip = MoebiusBranch::from_ints(1, 0, 1, -1).unwrap();
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| match (p, set.contains(&i)) {
                (p, false) => p.clone(),
                (Piece::Branch(m), true) => Piece::Branch(m.flip()),
                (Piece::Family(f), true) => Piece::Family(DigitFamily {
                    outer: f.outer.clone(),
                    inner: f.inner.compose(&flip),
                    k0: f.k0,
                }),
            })
            .collect();
        Self::new(pieces)
    }

    /// Cylinders containing `x`: (branch, lo, hi).
    fn cylinders_at(&self, x: &Rational) -> Vec<(BranchRef, Rational, Rational)> {
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            match p {
                Piece::Branch(m) => {
                    let (lo, hi) = m.image_of_unit().expect("validated");
                    if interval_contains(&lo, &hi, x) {
                        out.push((BranchRef { piece: i, digit: None }, lo, hi));
                    }
                }
                Piece::Family(f) => {
                    for k in f.candidate_digits(x) {
                        let (lo, hi) = f.branch(k).image_of_unit().expect("validated");
                        if interval_contains(&lo, &hi, x) {
                            out.push((BranchRef { piece: i, digit: Some(k) }, lo, hi));
                        }
                    }
                }
            }
        }
        out
    }

    /// The branch whose cylinder holds `x`, resolving shared endpoints by `tie`.
    pub fn locate(&self, x: &Rational, tie: TieBreak) -> Result<BranchRef, MapError> {
        if *x < 0 || *x > 1 {
            return Err(MapError::OutOfDomain(x.to_string()));
        }
        let hits = self.cylinders_at(x);
        match hits.len() {
            0 => Err(MapError::NoCylinder(x.to_string())),
            1 => Ok(hits[0].0),
            _ => {
                let pick = match tie {
                    TieBreak::Reject => None,
                    TieBreak::Left => hits.iter().find(|h| h.2 == *x),
                    TieBreak::Right => hits.iter().find(|h| h.1 == *x),
                };
                pick.map(|h| h.0)
                    .ok_or_else(|| MapError::PartitionPoint(x.to_string()))
            }
        }
    }

    /// The forward map, computed by inverting the branch whose cylinder holds `x`.
    pub fn apply_forward(&self, x: &Rational, tie: TieBreak) -> Result<Rational, MapError> {
        let r = self.locate(x, tie)?;
        Ok(self.branch(r).inverse().eval(x)?)
    }

    /// `U = T . S` for `t` = T and `s` = S. The inverse branches of `U` are
    /// `V^S_i . V^T_j`.
    pub fn compose_maps(t: &Self, s: &Self) -> Result<Self, MapError> {
        let mut pieces = Vec::new();
        for ps in &s.pieces {
            for pt in &t.pieces {
                pieces.push(match (ps, pt) {
                    (Piece::Branch(a), Piece::Branch(b)) => Piece::Branch(a.compose(b)),
                    (Piece::Family(f), Piece::Branch(b)) => Piece::Family(DigitFamily {
                        outer: f.outer.clone(),
                        inner: f.inner.compose(b),
                        k0: f.k0,
                    }),
                    (Piece::Branch(a), Piece::Family(f)) => Piece::Family(DigitFamily {
                        outer: a.compose(&f.outer),
                        inner: f.inner.clone(),
                        k0: f.k0,
                    }),
                    (Piece::Family(_), Piece::Family(_)) => return Err(MapError::NestedFamilies),
                });
            }
        }
        Self::new(pieces)
    }

    pub fn to_spec(&self) -> Result<MapSpec, MapError> {
        let branches: Vec<MoebiusBranch> = self.branches()?.into_iter().cloned().collect();
        Ok(MapSpec::Explicit {
            partition: self.partition()?,
            signs: branches.iter().map(Sign::of).collect(),
            branches,
        })
    }
}

/// JSON map definition: explicit finite branches, or a named constructor.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Explicit {
        #[serde(with = "crate::arith::rational::serde_vec")]
        partition: Vec<Rational>,
        branches: Vec<MoebiusBranch>,
        signs: Vec<Sign>,
    },
    Named {
        name: String,
        #[serde(default)]
        params: Vec<String>,
    },
}

impl MapSpec {
    pub fn build(&self) -> Result<PiecewiseMap, MapError> {
        match self {
            MapSpec::Explicit {
                partition,
                branches,
                signs,
            } => build_explicit(partition, branches, signs),
            MapSpec::Named { name, params } => named_map(name, params),
        }
    }
}

fn build_explicit(
    partition: &[Rational],
    branches: &[MoebiusBranch],
    signs: &[Sign],
) -> Result<PiecewiseMap, MapError> {
    let mut diags = Vec::new();
    if partition.len() != branches.len() + 1 || signs.len() != branches.len() {
        diags.push(Diagnostic {
            branch: "map".into(),
            message: format!(
                "{} partition points, {} branches and {} signs do not match",
                partition.len(),
                branches.len(),
                signs.len()
            ),
        });
        return Err(MapError::Invalid(diags));
    }
    if partition.first() != Some(&int(0)) || partition.last() != Some(&int(1)) {
        diags.push(Diagnostic {
            branch: "map".into(),
            message: "partition must start at 0 and end at 1".into(),
        });
    }
    if partition.windows(2).any(|w| w[0] >= w[1]) {
        diags.push(Diagnostic {
            branch: "map".into(),
            message: "partition is not strictly increasing".into(),
        });
    }
    for (j, (m, s)) in branches.iter().zip(signs).enumerate() {
        let name = format!("branch {}", j + 1);
        if Sign::of(m) != *s {
            diags.push(Diagnostic {
                branch: name.clone(),
                message: format!("declared sign {s:?} but {m} has the opposite orientation"),
            });
            continue;
        }
        let (want0, want1) = match s {
            Sign::Plus => (&partition[j], &partition[j + 1]),
            Sign::Minus => (&partition[j + 1], &partition[j]),
        };
        let got0 = m.eval(&int(0));
        let got1 = m.eval(&int(1));
        if got0.as_ref().ok() != Some(want0) || got1.as_ref().ok() != Some(want1) {
            diags.push(Diagnostic {
                branch: name,
                message: format!("{m} does not map {{0, 1}} onto {{{want0}, {want1}}}"),
            });
        }
    }
    if !diags.is_empty() {
        return Err(MapError::Invalid(diags));
    }
    PiecewiseMap::from_branches(branches.to_vec())
}

fn parse_params(params: &[String], n: usize, name: &str) -> Result<Vec<Rational>, MapError> {
    if params.len() != n {
        return Err(MapError::BadParameter(format!(
            "{name} takes {n} parameters, got {}",
            params.len()
        )));
    }
    params
        .iter()
        .map(|p| parse_rational(p).map_err(MapError::from))
        .collect()
}

/// Named constructors: `family_T`, `S_1` ... `S_123`, `gauss`, `times_a`, `intro`.
pub fn named_map(name: &str, params: &[String]) -> Result<PiecewiseMap, MapError> {
    let triple = |params: &[String]| -> Result<ParamTriple, MapError> {
        let v = parse_params(params, 3, name)?;
        ParamTriple::new(v[0].clone(), v[1].clone(), v[2].clone())
    };
    if name == "family_T" || name == "T" {
        return family_t(&triple(params)?);
    }
    if let Some(digits) = name.strip_prefix("S_") {
        let mut subset = Vec::new();
        for ch in digits.chars() {
            match ch {
                '1' | '2' | '3' => subset.push(ch as usize - '1' as usize),
                _ => return Err(MapError::UnknownMap(name.into())),
            }
        }
        return family_s(&triple(params)?, &subset);
    }
    match name {
        "gauss" => {
            parse_params(params, 0, name)?;
            Ok(gauss())
        }
        "times_a" => {
            let v = parse_params(params, 1, name)?;
            if *v[0].denom() != 1 {
                return Err(MapError::BadParameter("a must be an integer".into()));
            }
            let a = v[0].numer().to_i64().ok_or_else(|| MapError::BadParameter("a too large".into()))?;
            times_a(a)
        }
        "intro" => {
            parse_params(params, 0, name)?;
            Ok(intro_map())
        }
        _ => Err(MapError::UnknownMap(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: i64, b: i64, c: i64, d: i64) -> MoebiusBranch {
        MoebiusBranch::from_ints(a, b, c, d).unwrap()
    }

    #[test]
    fn linear_case_branches() {
        let t = family_t(&ParamTriple::from_ratios((1, 1), (3, 1), (3, 1))).unwrap();
        let b = t.branches().unwrap();
        assert_eq!(*b[0], m(3, 0, 0, 1));
        assert_eq!(*b[1], m(3, 0, 1, 1));
        assert_eq!(*b[2], m(3, 0, 2, 1));
        assert_eq!(t.partition().unwrap(), vec![int(0), rat(1, 3), rat(2, 3), int(1)]);
    }

    #[test]
    fn flip_reproduces_w_matrices() {
        let t = ParamTriple::from_ratios((3, 4), (36, 7), (9, 1));
        let [vl, vm, vn] = family_t_branches(&t);
        let (l, mu, n) = (&t.lambda, &t.mu, &t.nu);
        let w = |a: Rational, b: Rational, c: Rational, d: Rational| {
            MoebiusBranch::from_rationals(&a, &b, &c, &d).unwrap()
        };
        assert_eq!(vl.flip(), w(Rational::from(3 * l), 3 - Rational::from(3 * l), l.clone(), Rational::from(-l)));
        assert_eq!(
            vm.flip(),
            w(Rational::from(3 * mu), 9 - Rational::from(3 * mu), Rational::from(2 * mu), 3 - Rational::from(2 * mu))
        );
        assert_eq!(vn.flip(), w(n.clone(), 3 - n.clone(), n.clone(), 2 - n.clone()));
        let two = ParamTriple::from_ratios((1, 1), (3, 1), (2, 1));
        assert_eq!(family_t_branches(&two)[2].flip(), m(2, 1, 2, 0));
    }

    #[test]
    fn stated_triple_is_valid() {
        assert!(family_t(&ParamTriple::from_ratios((3, 4), (36, 7), (9, 1))).is_ok());
    }

    #[test]
    fn identity_branches_are_rejected() {
        let spec = MapSpec::Explicit {
            partition: vec![int(0), rat(1, 2), int(1)],
            branches: vec![MoebiusBranch::identity(), MoebiusBranch::identity()],
            signs: vec![Sign::Plus, Sign::Plus],
        };
        let Err(MapError::Invalid(d)) = spec.build() else {
            panic!("expected diagnostics");
        };
        assert!(d.iter().any(|d| d.branch == "branch 2"));
    }

    #[test]
    fn overlapping_cylinders_are_diagnosed() {
        let d = PiecewiseMap::unchecked(vec![
            Piece::Branch(m(2, 0, 0, 1)),
            Piece::Branch(m(3, 0, 1, 2)),
        ])
        .validate();
        assert!(!d.is_empty());
    }

    #[test]
    fn flip_subsets() {
        let t = family_t(&ParamTriple::from_ratios((3, 4), (36, 7), (9, 1))).unwrap();
        assert_eq!(t.flip_branches(&[]).unwrap(), t);
        let s1 = t.flip_branches(&[0]).unwrap();
        assert_eq!(s1.signs(), vec![Sign::Minus, Sign::Plus, Sign::Plus]);
        assert_eq!(s1.flip_branches(&[0]).unwrap(), t);
        assert_eq!(t.flip_branches(&[3]), Err(MapError::IndexOutOfRange(3)));
    }

    #[test]
    fn forward_examples() {
        let lin = family_t(&ParamTriple::from_ratios((1, 1), (3, 1), (3, 1))).unwrap();
        assert_eq!(lin.apply_forward(&rat(1, 2), TieBreak::Left).unwrap(), rat(1, 2));
        assert_eq!(gauss().apply_forward(&rat(2, 5), TieBreak::Left).unwrap(), rat(1, 2));
        assert_eq!(intro_map().apply_forward(&rat(2, 5), TieBreak::Left).unwrap(), rat(1, 2));
    }

    #[test]
    fn partition_point_tie_breaks() {
        let lin = family_t(&ParamTriple::from_ratios((1, 1), (3, 1), (3, 1))).unwrap();
        let x = rat(1, 3);
        assert_eq!(lin.apply_forward(&x, TieBreak::Left).unwrap(), int(1));
        assert_eq!(lin.apply_forward(&x, TieBreak::Right).unwrap(), int(0));
        assert!(matches!(
            lin.apply_forward(&x, TieBreak::Reject),
            Err(MapError::PartitionPoint(_))
        ));
        // 1/2 is shared by the Gauss cylinders of digits 1 and 2
        assert_eq!(gauss().apply_forward(&rat(1, 2), TieBreak::Left).unwrap(), int(0));
        assert_eq!(gauss().apply_forward(&rat(1, 2), TieBreak::Right).unwrap(), int(1));
    }

    #[test]
    fn compose_with_identity_map() {
        let t = family_t(&ParamTriple::from_ratios((3, 4), (36, 7), (9, 1))).unwrap();
        let id = PiecewiseMap::from_branches(vec![MoebiusBranch::identity()]).unwrap();
        assert_eq!(PiecewiseMap::compose_maps(&t, &id).unwrap(), t);
    }

    #[test]
    fn gauss_times_a_forward() {
        // U x = a/x - (a k + j)
        for a in [2i64, 3] {
            let u = PiecewiseMap::compose_maps(&times_a(a).unwrap(), &gauss()).unwrap();
            for x in [rat(2, 7), rat(5, 13), rat(9, 10), rat(1, 17)] {
                let k = Rational::from(x.recip_ref()).floor();
                let s = Rational::from(x.recip_ref()) - &k;
                let j = Rational::from(&s * a).floor();
                let want = Rational::from(a) / &x - (Rational::from(&k * a) + &j);
                assert_eq!(u.apply_forward(&x, TieBreak::Left).unwrap(), want);
            }
        }
    }

    #[test]
    fn json_map_round_trip() {
        let j = r#"{"partition":["0","1/3","2/3","1"],
                    "branches":[{"a":"3","b":"0","c":"0","d":"1"},
                                {"a":"3","b":"0","c":"1","d":"1"},
                                {"a":"3","b":"0","c":"2","d":"1"}],
                    "signs":["+","+","+"]}"#;
        let spec: MapSpec = serde_json::from_str(j).unwrap();
        let t = spec.build().unwrap();
        let back: MapSpec = serde_json::from_str(&serde_json::to_string(&t.to_spec().unwrap()).unwrap()).unwrap();
        assert_eq!(back.build().unwrap(), t);
        let named: MapSpec = serde_json::from_str(r#"{"name":"S_13","params":["2","3","3/2"]}"#).unwrap();
        assert_eq!(named.build().unwrap().signs(), vec![Sign::Minus, Sign::Plus, Sign::Minus]);
    }
}
