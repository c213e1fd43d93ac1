//! The acceptance criteria, each as a list of check records.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{Rational, RationalFunction};
use crate::catalog::{catalog_get, catalog_list, Claim, NamedMap};
use crate::duality::{
    condition_eval, condition_from_determinant, density_from_dual, dual_interval, natural_dual_solve, same_measure,
    Family, Verdict as MeasureVerdict,
};
use crate::fibred::{family_s, family_t, gauss, ParamTriple, PiecewiseMap, TieBreak};
use crate::moebius::MoebiusBranch;
use crate::numlab::{birkhoff_histogram, l1_compare, ulam_stationary, DEFAULT_CHAINS, DEFAULT_TRUNCATION};
use crate::sampling::{crossed_line_samples, ct_cs12_samples, ct_cs23_samples, ct_samples, random_triples};
use crate::transport::{Density, Outcome};
use crate::verify::{claim_checks, dual_density_checks, CheckRecord, RunReport, VerifyOptions};

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "condition table vanishes at the stated triples"),
    (2, "natural duals reproduce the printed (A, B, D)"),
    (3, "solvability determinant is a fixed multiple of each condition"),
    (4, "same-measure verdicts"),
    (5, "quintic identity"),
    (6, "exact Kuzmin suite"),
    (7, "series Kuzmin suite"),
    (8, "transport suite"),
    (9, "exceptional dual"),
    (10, "numerical cross-validation"),
    (11, "seeded property batches"),
];

/// Sub-checks expected to fail; each is analysed in the project notes and
/// does not make the acceptance target exit nonzero.
pub const KNOWN_FAILURES: [&str; 4] = [
    "thm2-cs13/01-same_measure",
    "random-cs13",
    "ulam-ex2-Z",
    "orbit-ex2-Z",
];

pub fn is_known_failure(check: &str) -> bool {
    KNOWN_FAILURES.iter().any(|k| check.ends_with(k))
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<CheckRecord>,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Outcome::Fail) && !self.checks.is_empty()
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| c.verdict == Outcome::Fail).collect()
    }
}

fn catalog_claims(opts: &VerifyOptions, keep: impl Fn(&Claim) -> bool + Sync) -> Vec<CheckRecord> {
    catalog_list()
        .par_iter()
        .flat_map(|e| claim_checks(e, opts, &keep))
        .collect()
}

fn family_map(f: Family, t: &ParamTriple) -> Option<PiecewiseMap> {
    if f == Family::T {
        family_t(t).ok()
    } else {
        family_s(t, f.flipped()).ok()
    }
}

fn c3_determinants(opts: &VerifyOptions) -> Vec<CheckRecord> {
    let triples = random_triples(40, opts.seed);
    Family::ALL
        .iter()
        .map(|&f| {
            let ratios: Vec<Rational> = triples
                .iter()
                .filter_map(|t| {
                    let c = condition_eval(f.condition(), t);
                    (c != 0).then(|| condition_from_determinant(f, t) / c)
                })
                .collect();
            let ok = ratios.len() >= 20 && ratios[0] != 0 && ratios.iter().all(|r| *r == ratios[0]);
            CheckRecord::pass_if(
                format!("determinant-{}", f.name()),
                "determinant_ratio",
                ok,
                format!("{} triples, ratio {}", ratios.len(), ratios.first().map_or("none".into(), |r| r.to_string())),
            )
        })
        .collect()
}

fn random_verdicts(name: &str, other: Family, samples: &[ParamTriple], want: MeasureVerdict) -> CheckRecord {
    let got: Vec<Option<MeasureVerdict>> = samples
        .par_iter()
        .map(|t| {
            let (p, q) = (family_map(Family::T, t)?, family_map(other, t)?);
            same_measure(&p, &q).ok().filter(|s| s.consistent()).map(|s| s.verdict)
        })
        .collect();
    let hits = got.iter().filter(|v| **v == Some(want)).count();
    CheckRecord::pass_if(
        name,
        "same_measure_random",
        samples.len() >= 20 && hits == samples.len(),
        format!("{hits}/{} samples {want:?} for T vs {}", samples.len(), other.name()),
    )
}

fn c4_same_measure(opts: &VerifyOptions) -> Vec<CheckRecord> {
    let mut out = catalog_claims(opts, |c| matches!(c, Claim::SameMeasure { .. } | Claim::Endpoints { .. }));
    let s = opts.seed;
    out.push(random_verdicts("random-cs123", Family::S123, &crossed_line_samples(20, s), MeasureVerdict::Equal));
    out.push(random_verdicts("random-cs12", Family::S12, &ct_cs12_samples(20, s), MeasureVerdict::Different));
    out.push(random_verdicts("random-cs23", Family::S23, &ct_cs23_samples(20, s), MeasureVerdict::Different));
    out.push(random_verdicts("random-cs13", Family::S13, &crossed_line_samples(20, s + 1), MeasureVerdict::Different));
    out
}

fn c6_kuzmin(opts: &VerifyOptions) -> Vec<CheckRecord> {
    let mut out = catalog_claims(opts, |c| matches!(c, Claim::KuzminExact { .. }));
    for e in catalog_list() {
        out.extend(dual_density_checks(&e));
    }
    out
}

fn c7_series(opts: &VerifyOptions) -> Vec<CheckRecord> {
    catalog_claims(opts, |c| matches!(c, Claim::SeriesKuzmin { .. } | Claim::SeriesValue { .. }))
}

fn c8_transport(opts: &VerifyOptions) -> Vec<CheckRecord> {
    catalog_claims(opts, |c| {
        matches!(c, Claim::Transport { .. } | Claim::SeriesTransport { .. } | Claim::SingularChain { .. })
    })
}

fn numeric_targets() -> Vec<(String, PiecewiseMap, Option<Density>)> {
    let pick = |entry: &str, label: &str| -> NamedMap {
        let e = catalog_get(entry).expect("catalog entry");
        e.maps.iter().find(|m| m.label == label).expect("map label").clone()
    };
    let expected = |entry: &str, label: &str| -> Option<Density> {
        catalog_get(entry)?.claims.iter().find_map(|c| match &c.claim {
            Claim::KuzminExact { map, density } if map.label == label => Some(Density::Rational(density.clone())),
            _ => None,
        })
    };
    let t = ParamTriple::from_ratios((3, 4), (36, 7), (9, 1));
    let cs1 = family_t(&t).expect("valid");
    let cs1_density = natural_dual_solve(&cs1)
        .ok()
        .and_then(|nd| nd.psi().map(dual_interval))
        .and_then(|d| density_from_dual(&d).ok());
    let linear = pick("linear", "T");
    vec![
        ("ex1-Z".into(), pick("ex1", "Z").map, expected("ex1", "Z")),
        ("ex2-Z".into(), pick("ex2", "Z").map, expected("ex2", "Z")),
        ("linear".into(), linear.map, Some(Density::Rational(RationalFunction::one()))),
        ("thm1-cs1-T".into(), cs1, cs1_density),
    ]
}

fn c10_numerics(opts: &VerifyOptions) -> Vec<CheckRecord> {
    let digits = 30;
    numeric_targets()
        .par_iter()
        .flat_map(|(name, map, density)| {
            let Some(density) = density else {
                return vec![CheckRecord::pass_if(format!("numeric-{name}"), "numeric", false, "no reference density")];
            };
            let ulam = ulam_stationary(map, opts.cells, DEFAULT_TRUNCATION)
                .map_err(|e| e.to_string())
                .and_then(|u| l1_compare(&u.density, density, digits, opts.truncation).map_err(|e| e.to_string()));
            let orbit = birkhoff_histogram(map, opts.seed, opts.iters, opts.cells.min(200), digits, DEFAULT_CHAINS)
                .map_err(|e| e.to_string())
                .and_then(|b| l1_compare(&b.density, density, digits, opts.truncation).map_err(|e| e.to_string()));
            let rec = |kind: &str, tol: f64, r: Result<crate::numlab::L1Report, String>| match r {
                Ok(l1) => CheckRecord::pass_if(
                    format!("{kind}-{name}"),
                    kind,
                    l1.distance + l1.bound < tol,
                    format!("L1 {:.4} (bound {:.1e}, tol {tol})", l1.distance, l1.bound),
                ),
                Err(e) => CheckRecord::pass_if(format!("{kind}-{name}"), kind, false, e),
            };
            vec![rec("ulam", 0.02, ulam), rec("orbit", 0.05, orbit)]
        })
        .collect()
}

fn random_branch(rng: &mut ChaCha8Rng) -> MoebiusBranch {
    loop {
        let mut v = || rng.gen_range(-9i64..=9);
        if let Ok(m) = MoebiusBranch::from_ints(v(), v(), v(), v()) {
            return m;
        }
    }
}

fn random_unit_rational(rng: &mut ChaCha8Rng) -> Rational {
    let d = rng.gen_range(2i64..=997);
    Rational::from((rng.gen_range(1..d), d))
}

fn batch(name: &str, n: usize, mut f: impl FnMut(usize) -> Option<String>) -> CheckRecord {
    let failures: Vec<String> = (0..n).filter_map(&mut f).collect();
    CheckRecord::pass_if(
        name,
        "property",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{n} cases, 0 failures")
        } else {
            format!("{n} cases, {} failures, first: {}", failures.len(), failures[0])
        },
    )
}

fn c11_properties(opts: &VerifyOptions) -> Vec<CheckRecord> {
    const N: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let triples = random_triples(N, opts.seed);
    let mut out = Vec::new();
    out.push(batch("flip-involution", N, |i| {
        let m = random_branch(&mut rng);
        if m.flip().flip() != m {
            return Some(format!("{m:?}"));
        }
        let subset: Vec<usize> = (0..3).filter(|_| rng.gen_bool(0.5)).collect();
        let t = family_t(&triples[i]).ok()?;
        let back = t.flip_branches(&subset).and_then(|s| s.flip_branches(&subset));
        (back.as_ref().ok() != Some(&t)).then(|| format!("map at {:?}, subset {subset:?}", triples[i]))
    }));
    out.push(batch("compose-associative", N, |_| {
        let (a, b, c) = (random_branch(&mut rng), random_branch(&mut rng), random_branch(&mut rng));
        (a.compose(&b).compose(&c) != a.compose(&b.compose(&c))).then(|| format!("{a:?} {b:?} {c:?}"))
    }));
    out.push(batch("adjoint-antihomomorphism", N, |_| {
        let (a, b) = (random_branch(&mut rng), random_branch(&mut rng));
        (a.compose(&b).adjoint() != b.adjoint().compose(&a.adjoint())).then(|| format!("{a:?} {b:?}"))
    }));
    out.push(batch("jacobian-chain-rule", N, |_| {
        let (m, n) = (random_branch(&mut rng), random_branch(&mut rng));
        let [a, b, c, d] = n.rational_entries();
        let lhs = m.compose(&n).jacobian();
        let rhs = m.jacobian().compose_moebius(&a, &b, &c, &d).ok().map(|j| &j * &n.jacobian());
        (rhs.as_ref() != Some(&lhs)).then(|| format!("{m:?} {n:?}"))
    }));
    let maps: Vec<PiecewiseMap> = triples
        .iter()
        .take(N / 2)
        .filter_map(|t| family_t(t).ok())
        .chain(std::iter::once(gauss()))
        .collect();
    out.push(batch("forward-inverse-round-trip", N, |i| {
        let p = &maps[i % maps.len()];
        let x = random_unit_rational(&mut rng);
        let refs = p.truncated_branches(12);
        let (r, v) = &refs[rng.gen_range(0..refs.len())];
        let y = v.eval(&x).ok()?;
        let back = p.apply_forward(&y, TieBreak::Left).ok();
        let found = p.locate(&y, TieBreak::Left).ok();
        (back.as_ref() != Some(&x) || found != Some(*r)).then(|| format!("x = {x}, branch {r:?}"))
    }));
    let ct = ct_samples(100, opts.seed);
    out.push(batch("natural-dual-soundness", ct.len(), |i| {
        let t = family_t(&ct[i]).ok()?;
        let nd = natural_dual_solve(&t).ok()?;
        let Some(psi) = nd.psi() else {
            return Some(format!("no unique natural dual at {:?}", ct[i]));
        };
        let ok = t.branches().ok()?.iter().all(|v| psi.conjugates(v));
        (!ok).then(|| format!("psi does not conjugate at {:?}", ct[i]))
    }));
    out
}

pub fn run_criterion(id: u8, opts: &VerifyOptions) -> CriterionResult {
    let checks = match id {
        1 => catalog_claims(opts, |c| matches!(c, Claim::Conditions { .. })),
        2 => catalog_claims(opts, |c| matches!(c, Claim::Psi { .. })),
        3 => c3_determinants(opts),
        4 => c4_same_measure(opts),
        5 => catalog_claims(opts, |c| matches!(c, Claim::Identity { .. })),
        6 => c6_kuzmin(opts),
        7 => c7_series(opts),
        8 => c8_transport(opts),
        9 => catalog_claims(opts, |c| matches!(c, Claim::Exceptional { .. })),
        10 => c10_numerics(opts),
        11 => c11_properties(opts),
        _ => Vec::new(),
    };
    let mut checks = checks;
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let title = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
    CriterionResult { id, title, checks }
}

pub fn run_acceptance(opts: &VerifyOptions) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id, opts)).collect()
}

/// The whole suite flattened into one report, check names prefixed by criterion.
pub fn acceptance_report(results: &[CriterionResult]) -> RunReport {
    let checks = results
        .iter()
        .flat_map(|r| {
            r.checks.iter().cloned().map(move |mut c| {
                c.name = format!("c{:02}/{}", r.id, c.name);
                c
            })
        })
        .collect();
    RunReport::new("all", checks)
}
