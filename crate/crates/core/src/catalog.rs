//! Named instances: parameter triples, example maps and their expected
//! duals and densities, each with the checks that reproduce them.

use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::rational::int;
use crate::arith::{Polynomial, Rational, RationalFunction};
use crate::duality::{ConditionId, Endpoint, Family, UnionFamily, Verdict};
use crate::fibred::{family_s, family_t, gauss, intro_map, times_a, DigitFamily, MapError, ParamTriple, Piece, PiecewiseMap};
use crate::moebius::MoebiusBranch;
use crate::transport::{SeriesDensity, SeriesPart};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Given explicitly in the source.
    Stated,
    /// Immediate (e.g. Lebesgue measure for a linear map).
    Trivial,
    /// Computed independently here and recorded as an oracle.
    Derived,
}

#[derive(Clone, Debug)]
pub struct NamedMap {
    pub label: String,
    pub map: PiecewiseMap,
}

impl NamedMap {
    fn new(label: &str, map: PiecewiseMap) -> Self {
        Self {
            label: label.into(),
            map,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "label": self.label,
            "map": serde_json::to_value(self.map.to_spec().ok()).unwrap_or(Value::Null),
        })
    }
}

pub type PsiFormula = fn(&Rational, &Rational, &Rational) -> [Rational; 3];

#[derive(Clone, Debug)]
pub enum Claim {
    /// The listed conditions vanish exactly at the triple.
    Conditions { triple: ParamTriple, vanish: Vec<ConditionId> },
    /// The natural dual of the family is the printed `(A, B, D)` up to scale.
    Psi {
        family: Family,
        triple: ParamTriple,
        formula: &'static str,
        psi: PsiFormula,
    },
    /// Natural dual endpoint pair of a family member.
    Endpoints { family: Family, triple: ParamTriple, pair: [Endpoint; 2] },
    /// Verdict of comparing `T` with another family at the triple.
    SameMeasure { triple: ParamTriple, other: Family, verdict: Verdict },
    /// `density` is invariant for `map`, exactly.
    KuzminExact { map: NamedMap, density: RationalFunction },
    /// `transport_density(s, h) = g` exactly.
    Transport { s: NamedMap, h: RationalFunction, g: RationalFunction },
    /// The transported series agrees termwise with the printed terms.
    SeriesTransport {
        s: NamedMap,
        h: RationalFunction,
        printed: SeriesDensity,
        up_to: i64,
    },
    /// Certified Kuzmin residual of a series density.
    SeriesKuzmin { map: NamedMap, density: SeriesDensity, points: usize, tol: f64 },
    /// Certified value of a series density at a point.
    SeriesValue { density: SeriesDensity, x: Rational, value: f64, tol: f64, what: &'static str },
    /// Common fixed point of `u`, the singular dual, and its image under `s`.
    SingularChain {
        u: NamedMap,
        s: NamedMap,
        kappa: Rational,
        xi: Rational,
        eta: Rational,
        g: RationalFunction,
    },
    /// Printed branch list compared against branches derived by composition.
    BranchList { map: NamedMap, listed: Vec<(&'static str, MoebiusBranch)> },
    /// Polynomial identity `lhs = rhs`.
    Identity { lhs: Polynomial, rhs: Polynomial, text: &'static str },
    /// The exceptional interval dual of family `T` at irrational parameters.
    Exceptional { digits: u32, points: usize },
}

#[derive(Clone, Debug)]
pub struct ClaimEntry {
    pub claim: Claim,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub triple: Option<ParamTriple>,
    pub maps: Vec<NamedMap>,
    pub claims: Vec<ClaimEntry>,
}

impl CatalogEntry {
    pub fn map(&self, label: &str) -> Option<&PiecewiseMap> {
        self.maps.iter().find(|m| m.label == label).map(|m| &m.map)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "summary": self.summary,
            "triple": self.triple,
            "maps": self.maps.iter().map(NamedMap::to_json).collect::<Vec<_>>(),
            "expected": self.claims.iter().map(|c| {
                let mut v = c.claim.to_json();
                v["provenance"] = serde_json::to_value(c.provenance).unwrap();
                v
            }).collect::<Vec<_>>(),
        })
    }
}

impl Claim {
    pub fn kind(&self) -> &'static str {
        match self {
            Claim::Conditions { .. } => "conditions",
            Claim::Psi { .. } => "psi",
            Claim::Endpoints { .. } => "endpoints",
            Claim::SameMeasure { .. } => "same_measure",
            Claim::KuzminExact { .. } => "kuzmin_exact",
            Claim::Transport { .. } => "transport",
            Claim::SeriesTransport { .. } => "series_transport",
            Claim::SeriesKuzmin { .. } => "series_kuzmin",
            Claim::SeriesValue { .. } => "series_value",
            Claim::SingularChain { .. } => "singular_chain",
            Claim::BranchList { .. } => "branch_list",
            Claim::Identity { .. } => "identity",
            Claim::Exceptional { .. } => "exceptional",
        }
    }

    pub fn to_json(&self) -> Value {
        let s = |x: &dyn ToString| x.to_string();
        let mut v = match self {
            Claim::Conditions { triple, vanish } => json!({
                "triple": triple,
                "vanish": vanish.iter().map(|c| c.name()).collect::<Vec<_>>(),
            }),
            Claim::Psi { family, triple, formula, psi } => {
                let p = psi(&triple.lambda, &triple.mu, &triple.nu);
                json!({
                    "family": family.name(),
                    "triple": triple,
                    "formula": formula,
                    "value": p.iter().map(|x| s(x)).collect::<Vec<_>>(),
                })
            }
            Claim::Endpoints { family, triple, pair } => json!({
                "family": family.name(),
                "triple": triple,
                "endpoints": pair,
            }),
            Claim::SameMeasure { triple, other, verdict } => json!({
                "triple": triple,
                "pair": ["T", other.name()],
                "verdict": verdict,
            }),
            Claim::KuzminExact { map, density } => json!({"map": map.label, "density": s(density)}),
            Claim::Transport { s: m, h, g } => json!({"s": m.label, "h": s(h), "g": s(g)}),
            Claim::SeriesTransport { s: m, h, printed, up_to } => json!({
                "s": m.label, "h": s(h), "g": s(printed), "terms_checked": up_to,
            }),
            Claim::SeriesKuzmin { map, density, points, tol } => json!({
                "map": map.label, "density": s(density), "points": points, "tol": tol,
            }),
            Claim::SeriesValue { density, x, value, tol, what } => json!({
                "density": s(density), "x": s(x), "value": value, "tol": tol, "reference": what,
            }),
            Claim::SingularChain { u, s: sm, kappa, xi, eta, g } => json!({
                "u": u.label, "s": sm.label, "kappa": s(kappa), "xi": s(xi), "eta": s(eta), "g": s(g),
            }),
            Claim::BranchList { map, listed } => json!({
                "map": map.label,
                "listed": listed.iter().map(|(l, b)| json!({"label": l, "branch": b})).collect::<Vec<_>>(),
            }),
            Claim::Identity { text, .. } => json!({"identity": text}),
            Claim::Exceptional { digits, points } => json!({"digits": digits, "points": points}),
        };
        v["kind"] = json!(self.kind());
        v
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn tr(l: (i64, i64), m: (i64, i64), n: (i64, i64)) -> ParamTriple {
    ParamTriple::from_ratios(l, m, n)
}

fn br(a: i64, b: i64, c: i64, d: i64) -> MoebiusBranch {
    MoebiusBranch::from_ints(a, b, c, d).expect("nonsingular")
}

fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
    RationalFunction::new(Polynomial::from_ints(num), Polynomial::from_ints(den)).expect("nonzero")
}

fn maps_of(v: Vec<MoebiusBranch>) -> PiecewiseMap {
    PiecewiseMap::from_branches(v).expect("catalog map is valid")
}

fn stated(claim: Claim) -> ClaimEntry {
    ClaimEntry {
        claim,
        provenance: Provenance::Stated,
    }
}

fn derived(claim: Claim) -> ClaimEntry {
    ClaimEntry {
        claim,
        provenance: Provenance::Derived,
    }
}

fn trivial(claim: Claim) -> ClaimEntry {
    ClaimEntry {
        claim,
        provenance: Provenance::Trivial,
    }
}

fn flipped(family: Family) -> &'static [usize] {
    family.flipped()
}

fn family_map(family: Family, t: &ParamTriple) -> NamedMap {
    let m = if family == Family::T {
        family_t(t)
    } else {
        family_s(t, flipped(family))
    };
    NamedMap::new(family.name(), m.expect("catalog triple gives a valid map"))
}

/// Entry comparing `T` with `other` at a triple on both surfaces.
#[allow(clippy::too_many_arguments)]
fn pairing(
    name: &'static str,
    summary: &'static str,
    t: ParamTriple,
    other: Family,
    verdict: Verdict,
    psi: Vec<(Family, &'static str, PsiFormula)>,
) -> CatalogEntry {
    let mut claims = vec![
        stated(Claim::Conditions {
            triple: t.clone(),
            vanish: vec![ConditionId::CT, other.condition()],
        }),
        stated(Claim::SameMeasure {
            triple: t.clone(),
            other,
            verdict,
        }),
    ];
    for (family, formula, f) in psi {
        claims.push(stated(Claim::Psi {
            family,
            triple: t.clone(),
            formula,
            psi: f,
        }));
    }
    CatalogEntry {
        name,
        summary,
        maps: vec![family_map(Family::T, &t), family_map(other, &t)],
        triple: Some(t),
        claims,
    }
}

fn r3(a: Rational, b: Rational, c: Rational) -> [Rational; 3] {
    [a, b, c]
}

fn k(c: i64, v: &Rational) -> Rational {
    Rational::from(c * v)
}

fn psi_thm1_1(_l: &Rational, m: &Rational, n: &Rational) -> [Rational; 3] {
    let mn = Rational::from(m * n);
    r3(
        k(4, m) - k(3, n) - 9,
        k(-6, m) + k(3, n) + 9,
        -mn + k(9, m) - k(3, n) - 9,
    )
}

fn psi_thm1_2(l: &Rational, _m: &Rational, n: &Rational) -> [Rational; 3] {
    r3(3 - l.clone(), k(3, l) - 3, Rational::from(l * n) + 3 - k(6, l))
}

fn psi_thm1_3(l: &Rational, m: &Rational, _n: &Rational) -> [Rational; 3] {
    r3(3 - l.clone(), k(3, l) - 3, Rational::from(l * m) - k(9, l) + m + 3)
}

fn psi_thm2_1(_l: &Rational, m: &Rational, n: &Rational) -> [Rational; 3] {
    let mn = Rational::from(m * n);
    r3(mn.clone() - 3, 9 - mn.clone(), mn + k(3, n) - 18)
}

fn psi_thm2_2(l: &Rational, m: &Rational, _n: &Rational) -> [Rational; 3] {
    let lm = Rational::from(l * m);
    r3(3 - l.clone(), k(3, l) - 3, (9 - k(6, &lm) + k(3, m)) / m.clone())
}

fn psi_thm2_3(l: &Rational, _m: &Rational, n: &Rational) -> [Rational; 3] {
    let ln = Rational::from(l * n);
    r3(
        k(2, &ln) + k(2, l),
        k(-2, &ln) + k(3, n) - k(3, l),
        k(2, &ln) + k(6, l) - k(6, n) + 6,
    )
}

fn psi_thm3(l: &Rational, m: &Rational, _n: &Rational) -> [Rational; 3] {
    let lm = Rational::from(l * m);
    r3(l.clone() + &lm, k(-3, l) + k(2, m) - &lm, k(9, l) - k(5, m) + lm + 3)
}

fn psi_thm3_equal_s(l: &Rational, _m: &Rational, _n: &Rational) -> [Rational; 3] {
    r3(k(2, l), 3 - k(3, l), k(6, l) - 6)
}

fn psi_thm3_equal_t(l: &Rational, _m: &Rational, _n: &Rational) -> [Rational; 3] {
    r3(3 - l.clone(), k(3, l) - 3, 6 - k(6, l))
}

/// `(1/x) sum_j (1/(1 + 2j x) - 1/(1 + (2j+1) x))`.
pub fn intro_density() -> SeriesDensity {
    SeriesDensity::interval_union(&UnionFamily {
        alpha: int(0),
        beta: int(1),
        delta: int(2),
    })
    .expect("valid union")
}

/// `sum_{m >= 1} 1/((a m + 1 + a x)(m + x))` as printed.
pub fn example4_density(a: i64) -> SeriesDensity {
    let x_plus = |c: Rational| RationalFunction::from_poly(Polynomial::linear(c, int(1)));
    SeriesDensity::new(
        RationalFunction::zero(),
        vec![
            SeriesPart {
                weight: RationalFunction::one(),
                shift: x_plus(int(0)),
                power: 1,
                m0: 1,
            },
            SeriesPart {
                weight: -&RationalFunction::one(),
                shift: x_plus(q(1, a)),
                power: 1,
                m0: 1,
            },
        ],
    )
    .expect("weights cancel")
}

/// `sum_{m >= 0} 1/((a m + a - 1 + a x)(m + 1 + x))` as printed.
pub fn example5_density(a: i64) -> SeriesDensity {
    let x_plus = |c: Rational| RationalFunction::from_poly(Polynomial::linear(c, int(1)));
    // 1/((a(m + x + 1 - 1/a))(m + 1 + x)) = 1/(m + x + 1 - 1/a) - 1/(m + 1 + x)
    SeriesDensity::new(
        RationalFunction::zero(),
        vec![
            SeriesPart {
                weight: RationalFunction::one(),
                shift: x_plus(int(1) - q(1, a)),
                power: 1,
                m0: 0,
            },
            SeriesPart {
                weight: -&RationalFunction::one(),
                shift: x_plus(int(1)),
                power: 1,
                m0: 0,
            },
        ],
    )
    .expect("weights cancel")
}

/// The map `x/(1-x) mod 1` with inverse branches `(k + x)/(k + 1 + x)`, `k >= 0`.
pub fn example5_s() -> PiecewiseMap {
    PiecewiseMap::new(vec![Piece::Family(DigitFamily {
        outer: br(1, 0, 1, -1),
        inner: br(1, 0, 1, 1),
        k0: 0,
    })])
    .expect("valid family")
}

/// `(S, T, U = T.S, Z = S.T)` as named maps.
fn quad(s: PiecewiseMap, t: PiecewiseMap) -> Result<Vec<NamedMap>, MapError> {
    let u = PiecewiseMap::compose_maps(&t, &s)?;
    let z = PiecewiseMap::compose_maps(&s, &t)?;
    Ok(vec![
        NamedMap::new("S", s),
        NamedMap::new("T", t),
        NamedMap::new("U", u),
        NamedMap::new("Z", z),
    ])
}

fn pick(maps: &[NamedMap], label: &str) -> NamedMap {
    maps.iter().find(|m| m.label == label).expect("label").clone()
}

fn example_entry(
    name: &'static str,
    summary: &'static str,
    s: PiecewiseMap,
    t: PiecewiseMap,
    build: impl FnOnce(&[NamedMap]) -> Vec<ClaimEntry>,
) -> CatalogEntry {
    let maps = quad(s, t).expect("example maps compose");
    let claims = build(&maps);
    CatalogEntry {
        name,
        summary,
        triple: None,
        maps,
        claims,
    }
}

/// The exceptional parameters are irrational and have no triple.
fn exceptional_entry() -> CatalogEntry {
    CatalogEntry {
        name: "remark-exceptional",
        summary: "family T at lambda = positive root of 448 l^2 + 283 l - 1113, mu = 63/16, \
                  nu = 7 (lambda + 1)/4; interval dual [1/2, (448 lambda - 257)/628] without a natural dual",
        triple: None,
        maps: Vec::new(),
        claims: vec![stated(Claim::Exceptional { digits: 50, points: 25 })],
    }
}

pub fn catalog_list() -> Vec<CatalogEntry> {
    let mut out = vec![
        pairing(
            "thm1-cs1",
            "T and S_1 share the natural dual",
            tr((3, 4), (36, 7), (9, 1)),
            Family::S1,
            Verdict::Equal,
            vec![
                (Family::S1, "(4mu - 3nu - 9, -6mu + 3nu + 9, -mu nu + 9mu - 3nu - 9)", psi_thm1_1),
                (Family::T, "(4mu - 3nu - 9, -6mu + 3nu + 9, -mu nu + 9mu - 3nu - 9)", psi_thm1_1),
            ],
        ),
        pairing(
            "thm1-cs2",
            "T and S_2 share the natural dual",
            tr((3, 1), (3, 1), (1, 1)),
            Family::S2,
            Verdict::Equal,
            vec![(Family::T, "(3 - lambda, 3lambda - 3, 3 + lambda nu - 6lambda)", psi_thm1_2)],
        ),
        pairing(
            "thm1-cs3",
            "T and S_3 share the natural dual",
            tr((27, 13), (153, 40), (8, 3)),
            Family::S3,
            Verdict::Equal,
            vec![(Family::T, "(3 - lambda, 3lambda - 3, lambda mu - 9lambda + mu + 3)", psi_thm1_3)],
        ),
        pairing(
            "thm2-cs12",
            "T and S_12 both have natural duals on different intervals",
            tr((1, 2), (2, 1), (3, 1)),
            Family::S12,
            Verdict::Different,
            vec![(Family::S12, "(mu nu - 3, 9 - mu nu, -18 + 3nu + mu nu)", psi_thm2_1)],
        ),
        pairing(
            "thm2-cs23",
            "T and S_23 both have natural duals on different intervals",
            tr((1, 1), (9, 2), (6, 1)),
            Family::S23,
            Verdict::Different,
            vec![(Family::S23, "(3 - lambda, 3lambda - 3, (9 - 6lambda mu + 3mu)/mu)", psi_thm2_2)],
        ),
        pairing(
            "thm2-cs13",
            "T and S_13 both have natural duals on different intervals",
            tr((2, 1), (3, 1), (3, 2)),
            Family::S13,
            Verdict::Different,
            vec![(
                Family::S13,
                "(2lambda nu + 2lambda, -2lambda nu + 3nu - 3lambda, 2lambda nu + 6lambda - 6nu + 6)",
                psi_thm2_3,
            )],
        ),
        pairing(
            "thm3-cs123",
            "T and S_123 both have natural duals on different intervals",
            tr((2, 1), (6, 1), (6, 1)),
            Family::S123,
            Verdict::Different,
            vec![(
                Family::S123,
                "(lambda + lambda mu, -3lambda + 2mu - lambda mu, 9lambda - 5mu + lambda mu + 3)",
                psi_thm3,
            )],
        ),
        pairing(
            "thm3-equal",
            "crossed case mu = 3, lambda nu = 3: T and S_123 share the invariant measure",
            tr((3, 1), (3, 1), (1, 1)),
            Family::S123,
            Verdict::Equal,
            vec![
                (Family::S123, "(2lambda, 3 - 3lambda, 6lambda - 6)", psi_thm3_equal_s),
                (Family::T, "(3 - lambda, 3lambda - 3, 6 - 6lambda)", psi_thm3_equal_t),
            ],
        ),
    ];
    // derived endpoint oracle for thm1-cs1
    let t1 = tr((3, 4), (36, 7), (9, 1));
    out[0].claims.push(derived(Claim::Endpoints {
        family: Family::T,
        triple: t1.clone(),
        pair: [Endpoint::Finite(q(-1, 3)), Endpoint::Finite(int(3))],
    }));
    out[0].claims.push(derived(Claim::KuzminExact {
        map: family_map(Family::T, &t1),
        density: &rf(&[3], &[1, 3]) - &rf(&[-1], &[3, -1]),
    }));

    let lin = tr((1, 1), (3, 1), (3, 1));
    let mut linear_claims = vec![trivial(Claim::Conditions {
        triple: lin.clone(),
        vanish: ConditionId::ALL.to_vec(),
    })];
    linear_claims.push(trivial(Claim::KuzminExact {
        map: family_map(Family::T, &lin),
        density: RationalFunction::one(),
    }));
    out.push(CatalogEntry {
        name: "linear",
        summary: "x -> 3x mod 1; Lebesgue measure is invariant",
        maps: vec![family_map(Family::T, &lin)],
        triple: Some(lin),
        claims: linear_claims,
    });

    out.push(exceptional_entry());

    let intro = NamedMap::new("intro", intro_map());
    out.push(CatalogEntry {
        name: "intro-1step",
        summary: "three-branch map with dual set the union of [2j, 2j+1], j >= 0",
        triple: None,
        maps: vec![intro.clone()],
        claims: vec![
            stated(Claim::SeriesKuzmin {
                map: intro,
                density: intro_density(),
                points: 25,
                tol: 1e-8,
            }),
            derived(Claim::SeriesValue {
                density: intro_density(),
                x: int(1),
                value: std::f64::consts::LN_2,
                tol: 1e-10,
                what: "ln 2",
            }),
        ],
    });

    out.push(example_entry(
        "ex1",
        "four-branch map U = T.S with dual [-1/2, 0], and Z = S.T",
        maps_of(vec![br(2, 1, 1, -1), br(3, -1, 3, -2)]),
        maps_of(vec![br(6, -1, 3, -3), br(3, -1, 3, -2)]),
        |m| {
            let h = rf(&[1], &[2, -1]);
            let g = &(&rf(&[1], &[1, 1]) - &rf(&[1], &[2, 1])) + &rf(&[1], &[3, -1]);
            vec![
                stated(Claim::KuzminExact { map: pick(m, "U"), density: h.clone() }),
                stated(Claim::KuzminExact { map: pick(m, "Z"), density: g.clone() }),
                stated(Claim::Transport { s: pick(m, "S"), h, g }),
                stated(Claim::BranchList {
                    map: pick(m, "U"),
                    listed: vec![
                        ("V_alpha gamma", br(15, -5, 3, 2)),
                        ("V_alpha delta", br(9, -4, 0, 1)),
                        ("V_beta gamma", br(5, 0, 4, 1)),
                        ("V_beta delta", br(6, -1, 3, 1)),
                    ],
                }),
                stated(Claim::BranchList {
                    map: pick(m, "Z"),
                    listed: vec![
                        ("V_gamma alpha", br(11, 7, 3, 6)),
                        ("V_beta gamma", br(15, -4, 0, 3)),
                        ("V_delta alpha", br(5, 4, 4, 5)),
                        ("V_delta beta", br(6, -1, 3, 1)),
                    ],
                }),
            ]
        },
    ));

    out.push(example_entry(
        "ex2",
        "S: x/(1+x), 1/(2-x); T: x/(3-x), 1/(2-x)",
        maps_of(vec![br(1, 1, 0, 1), br(2, -1, 1, 0)]),
        maps_of(vec![br(3, -1, 0, 1), br(2, -1, 1, 0)]),
        |m| {
            let h = rf(&[1], &[1, -1]);
            let g = &(&rf(&[1], &[1, 1]) + &rf(&[1], &[1, -1])) - &rf(&[1], &[2, -1]);
            vec![
                stated(Claim::KuzminExact { map: pick(m, "U"), density: h.clone() }),
                stated(Claim::KuzminExact { map: pick(m, "Z"), density: g.clone() }),
                stated(Claim::Transport { s: pick(m, "S"), h, g }),
            ]
        },
    ));

    out.push(example_entry(
        "ex3",
        "S: (1-x)/2, (1+x)/2; T: x/(1+x), (1+x)/(1+3x); U has the infinite invariant density 1/x",
        maps_of(vec![br(2, 0, 1, -1), br(2, 0, 1, 1)]),
        maps_of(vec![br(1, 1, 0, 1), br(1, 3, 1, 1)]),
        |m| {
            let h = rf(&[1], &[0, 1]);
            let g = &rf(&[1], &[1, -1]) + &rf(&[1], &[1, 1]);
            vec![
                stated(Claim::KuzminExact { map: pick(m, "U"), density: h.clone() }),
                stated(Claim::KuzminExact { map: pick(m, "Z"), density: g.clone() }),
                stated(Claim::Transport { s: pick(m, "S"), h, g }),
            ]
        },
    ));

    for a in [2i64, 3] {
        let name: &'static str = if a == 2 { "ex4-a2" } else { "ex4-a3" };
        out.push(example_entry(
            name,
            "S the Gauss map, T = a x mod 1; U has density 1/(a + x)",
            gauss(),
            times_a(a).expect("a >= 2"),
            |m| {
                let h = rf(&[1], &[a, 1]);
                vec![
                    stated(Claim::SeriesTransport {
                        s: pick(m, "S"),
                        h: h.clone(),
                        printed: example4_density(a),
                        up_to: 50,
                    }),
                    stated(Claim::SeriesKuzmin {
                        map: pick(m, "Z"),
                        density: example4_density(a),
                        points: 25,
                        tol: 1e-8,
                    }),
                    derived(Claim::SeriesKuzmin {
                        map: pick(m, "U"),
                        density: SeriesDensity::from_rational(h),
                        points: 25,
                        tol: 1e-8,
                    }),
                ]
            },
        ));
    }

    out.push(example_entry(
        "ex5-a2",
        "S = x/(1-x) mod 1, T = 2x mod 1; U has density 1/(a - 1 + x)",
        example5_s(),
        times_a(2).expect("a >= 2"),
        |m| {
            let h = rf(&[1], &[1, 1]);
            vec![
                stated(Claim::SeriesTransport {
                    s: pick(m, "S"),
                    h: h.clone(),
                    printed: example5_density(2),
                    up_to: 50,
                }),
                stated(Claim::SeriesKuzmin {
                    map: pick(m, "Z"),
                    density: example5_density(2),
                    points: 25,
                    tol: 1e-8,
                }),
            ]
        },
    ));

    out.push(example_entry(
        "ex6",
        "U = T.S has a common fixed point; Z = S.T has density 1",
        maps_of(vec![br(4, 1, 2, -2), br(6, -1, 3, 2)]),
        maps_of(vec![br(4, 2, 0, 3), br(4, 2, 4, -1)]),
        |m| {
            let h = rf(&[1], &[4, 4, 1]);
            vec![
                stated(Claim::KuzminExact { map: pick(m, "U"), density: h.clone() }),
                stated(Claim::KuzminExact { map: pick(m, "Z"), density: RationalFunction::one() }),
                stated(Claim::Transport { s: pick(m, "S"), h, g: RationalFunction::one() }),
                stated(Claim::SingularChain {
                    u: pick(m, "U"),
                    s: pick(m, "S"),
                    kappa: int(-2),
                    xi: q(1, 2),
                    eta: int(0),
                    g: RationalFunction::one(),
                }),
            ]
        },
    ));

    let nu = Polynomial::x();
    let lhs = &(&(&nu - &Polynomial::constant(int(3))) * &(&nu.pow(2) - &Polynomial::constant(int(3))))
        * &(&nu + &Polynomial::one()).pow(2);
    out.push(CatalogEntry {
        name: "quintic",
        summary: "polynomial identity in the analysis of CT and CS_13",
        triple: None,
        maps: Vec::new(),
        claims: vec![stated(Claim::Identity {
            lhs,
            rhs: Polynomial::from_ints(&[9, 15, 0, -8, -1, 1]),
            text: "(nu - 3)(nu^2 - 3)(nu + 1)^2 = nu^5 - nu^4 - 8nu^3 + 15nu + 9",
        })],
    });
    out.sort_by_key(|e| e.name);
    out
}

pub fn catalog_get(name: &str) -> Option<CatalogEntry> {
    catalog_list().into_iter().find(|e| e.name == name)
}

pub fn catalog_names() -> Vec<&'static str> {
    catalog_list().iter().map(|e| e.name).collect()
}

pub fn catalog_export() -> Value {
    Value::Array(catalog_list().iter().map(CatalogEntry::to_json).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::condition_eval;

    #[test]
    fn roster_is_complete_and_sorted() {
        let names = catalog_names();
        for n in [
            "thm1-cs1", "thm1-cs2", "thm1-cs3", "thm2-cs12", "thm2-cs23", "thm2-cs13", "thm3-cs123",
            "thm3-equal", "linear", "remark-exceptional", "intro-1step", "ex1", "ex2", "ex3", "ex4-a2",
            "ex4-a3", "ex5-a2", "ex6", "quintic",
        ] {
            assert!(names.contains(&n), "{n}");
        }
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn stated_conditions_vanish() {
        for e in catalog_list() {
            for c in &e.claims {
                if let Claim::Conditions { triple, vanish } = &c.claim {
                    for id in vanish {
                        assert_eq!(condition_eval(*id, triple), 0, "{} {id:?}", e.name);
                    }
                }
            }
        }
    }

    #[test]
    fn export_is_json() {
        let v = catalog_export();
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"thm1-cs1\""));
        assert!(s.contains("\"provenance\":\"derived\""));
    }

    #[test]
    fn unknown_name() {
        assert!(catalog_get("nonsense").is_none());
        assert_eq!(catalog_get("ex6").unwrap().maps.len(), 4);
    }
}
