//! The eight solvability conditions of the three-branch family and the
//! determinants of the corresponding natural-dual systems.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::rational::int;
use crate::arith::Rational;
use crate::fibred::ParamTriple;

/// `T` and its flipped relatives. Index 0, 1, 2 stand for the
/// `lambda`, `mu`, `nu` branches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    T,
    S1,
    S2,
    S3,
    S12,
    S23,
    S13,
    S123,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::T,
        Family::S1,
        Family::S2,
        Family::S3,
        Family::S12,
        Family::S23,
        Family::S13,
        Family::S123,
    ];

    pub fn flipped(self) -> &'static [usize] {
        match self {
            Family::T => &[],
            Family::S1 => &[0],
            Family::S2 => &[1],
            Family::S3 => &[2],
            Family::S12 => &[0, 1],
            Family::S23 => &[1, 2],
            Family::S13 => &[0, 2],
            Family::S123 => &[0, 1, 2],
        }
    }

    pub fn condition(self) -> ConditionId {
        match self {
            Family::T => ConditionId::CT,
            Family::S1 => ConditionId::CS1,
            Family::S2 => ConditionId::CS2,
            Family::S3 => ConditionId::CS3,
            Family::S12 => ConditionId::CS12,
            Family::S23 => ConditionId::CS23,
            Family::S13 => ConditionId::CS13,
            Family::S123 => ConditionId::CS123,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::T => "T",
            Family::S1 => "S_1",
            Family::S2 => "S_2",
            Family::S3 => "S_3",
            Family::S12 => "S_12",
            Family::S23 => "S_23",
            Family::S13 => "S_13",
            Family::S123 => "S_123",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || f.name().replace('_', "") == s)
            .ok_or_else(|| format!("unknown family {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionId {
    CT,
    CS1,
    CS2,
    CS3,
    CS12,
    CS23,
    CS13,
    CS123,
}

impl ConditionId {
    pub const ALL: [ConditionId; 8] = [
        ConditionId::CT,
        ConditionId::CS1,
        ConditionId::CS2,
        ConditionId::CS3,
        ConditionId::CS12,
        ConditionId::CS23,
        ConditionId::CS13,
        ConditionId::CS123,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionId::CT => "CT",
            ConditionId::CS1 => "CS1",
            ConditionId::CS2 => "CS2",
            ConditionId::CS3 => "CS3",
            ConditionId::CS12 => "CS12",
            ConditionId::CS23 => "CS23",
            ConditionId::CS13 => "CS13",
            ConditionId::CS123 => "CS123",
        }
    }

    /// The condition as printed, `lhs = rhs`.
    pub fn display(self) -> &'static str {
        match self {
            ConditionId::CT => "λμ + μ = λν + 3λ",
            ConditionId::CS1 => "λμν + 3λμ + 12μ = 9ν + 27",
            ConditionId::CS2 => "λμν = 9",
            ConditionId::CS3 => "4λν − μν − λμν + 3λ + 3 = 0",
            ConditionId::CS12 => "μν − λν − 3λ − 3 = 0",
            ConditionId::CS23 => "λμν + 3μ − 9ν + 3λμ = 0",
            ConditionId::CS13 => "λμν + 3μν − 9ν − 9 = 0",
            ConditionId::CS123 => "λμ − 4λν + μν − 3λ + 4μ − 3ν = 0",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConditionId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ConditionId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown condition {s:?}"))
    }
}

/// `lhs - rhs` of the named condition.
pub fn condition_eval(id: ConditionId, t: &ParamTriple) -> Rational {
    let (l, m, n) = (&t.lambda, &t.mu, &t.nu);
    let lm = Rational::from(l * m);
    let ln = Rational::from(l * n);
    let mn = Rational::from(m * n);
    let lmn = Rational::from(&lm * n);
    let k = |c: i64, v: &Rational| Rational::from(c * v);
    match id {
        ConditionId::CT => lm + m - ln - k(3, l),
        ConditionId::CS1 => lmn + k(3, &lm) + k(12, m) - k(9, n) - 27,
        ConditionId::CS2 => lmn - 9,
        ConditionId::CS3 => k(4, &ln) - mn - lmn + k(3, l) + 3,
        ConditionId::CS12 => mn - ln - k(3, l) - 3,
        ConditionId::CS23 => lmn + k(3, m) - k(9, n) + k(3, &lm),
        ConditionId::CS13 => lmn + k(3, &mn) - k(9, n) - 9,
        ConditionId::CS123 => lm - k(4, &ln) + mn - k(3, l) + k(4, m) - k(3, n),
    }
}

/// Branch matrices `[a, b, c, d]` of the family with parameter-dependent
/// scaling kept, i.e. without reduction to coprime integers.
pub fn parametric_branches(family: Family, t: &ParamTriple) -> [[Rational; 4]; 3] {
    let (l, m, n) = (&t.lambda, &t.mu, &t.nu);
    let v = [
        [int(3), Rational::from(3 * l) - 3, int(0), l.clone()],
        [int(9), Rational::from(3 * m) - 9, int(3), Rational::from(2 * m) - 3],
        [int(3), Rational::from(n - 3), int(2), Rational::from(n - 2)],
    ];
    let mut out = v.clone();
    for &i in family.flipped() {
        let [a, b, c, d] = &v[i];
        out[i] = [
            Rational::from(a + b),
            Rational::from(-b),
            Rational::from(c + d),
            Rational::from(-d),
        ];
    }
    out
}

/// Row of the natural-dual system contributed by one branch:
/// `b A + (d - a) B - c D = 0`.
pub fn dual_row([a, b, c, d]: &[Rational; 4]) -> [Rational; 3] {
    [b.clone(), Rational::from(d - a), Rational::from(-c)]
}

/// Determinant of the 3x3 natural-dual system of the family at `t`.
pub fn condition_from_determinant(family: Family, t: &ParamTriple) -> Rational {
    let rows = parametric_branches(family, t).map(|m| dual_row(&m));
    det3(&rows)
}

pub(crate) fn det3(r: &[[Rational; 3]; 3]) -> Rational {
    let minor = |i: usize, j: usize, k: usize, l: usize| {
        Rational::from(&r[1][i] * &r[2][j]) - Rational::from(&r[1][k] * &r[2][l])
    };
    Rational::from(&r[0][0] * &minor(1, 2, 2, 1)) - Rational::from(&r[0][1] * &minor(0, 2, 2, 0))
        + Rational::from(&r[0][2] * &minor(0, 1, 1, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(l: (i64, i64), m: (i64, i64), n: (i64, i64)) -> ParamTriple {
        ParamTriple::from_ratios(l, m, n)
    }

    #[test]
    fn printed_solutions_vanish() {
        use ConditionId::*;
        let cases = [
            (t((3, 4), (36, 7), (9, 1)), CS1),
            (t((3, 1), (3, 1), (1, 1)), CS2),
            (t((27, 13), (153, 40), (8, 3)), CS3),
            (t((1, 2), (2, 1), (3, 1)), CS12),
            (t((1, 1), (9, 2), (6, 1)), CS23),
            (t((2, 1), (3, 1), (3, 2)), CS13),
            (t((2, 1), (6, 1), (6, 1)), CS123),
            (t((3, 1), (3, 1), (1, 1)), CS123),
        ];
        for (p, c) in cases {
            assert_eq!(condition_eval(CT, &p), 0, "CT at {p}");
            assert_eq!(condition_eval(c, &p), 0, "{c} at {p}");
        }
    }

    #[test]
    fn linear_case_satisfies_every_condition() {
        let p = t((1, 1), (3, 1), (3, 1));
        for c in ConditionId::ALL {
            assert_eq!(condition_eval(c, &p), 0, "{c}");
        }
    }

    #[test]
    fn determinant_multiples() {
        // hand expansion of the 3x3 determinants
        let p = t((2, 1), (5, 1), (7, 1));
        let cases = [
            (Family::T, -6),
            (Family::S1, -1),
            (Family::S2, 4),
            (Family::S3, 3),
            (Family::S12, 6),
            (Family::S23, 2),
            (Family::S13, -2),
            (Family::S123, 3),
        ];
        for f in Family::ALL {
            let ratios: Vec<Rational> = [t((2, 1), (5, 1), (7, 1)), t((1, 3), (4, 5), (11, 2))]
                .iter()
                .map(|p| condition_from_determinant(f, p) / condition_eval(f.condition(), p))
                .collect();
            assert_eq!(ratios[0], ratios[1], "{f}");
        }
        for (f, k) in cases {
            assert_eq!(
                condition_from_determinant(f, &p),
                Rational::from(k) * condition_eval(f.condition(), &p),
                "{f}"
            );
        }
    }

    #[test]
    fn names_parse() {
        assert_eq!("S_13".parse::<Family>().unwrap(), Family::S13);
        assert_eq!("S13".parse::<Family>().unwrap(), Family::S13);
        assert_eq!("cs123".parse::<ConditionId>().unwrap(), ConditionId::CS123);
    }
}
