use proptest::prelude::*;

use fibred_core::arith::{poly_roots_rational, Polynomial, Rational, RationalFunction};
use fibred_core::duality::{
    density_from_dual, dual_interval, kuzmin_check_exact, natural_dual_solve, same_measure, Family, Verdict,
};
use fibred_core::fibred::{family_s, family_t, family_t_branches, ParamTriple, PiecewiseMap, TieBreak};
use fibred_core::moebius::MoebiusBranch;
use fibred_core::transport::{series_eval, Density};

fn rat() -> impl Strategy<Value = Rational> {
    (-50i64..50, 1i64..20).prop_map(|(n, d)| Rational::from((n, d)))
}

fn pos_rat() -> impl Strategy<Value = Rational> {
    (1i64..80, 1i64..16).prop_map(|(n, d)| Rational::from((n, d)))
}

/// Interior points with a large prime denominator, away from partition points.
fn unit_point() -> impl Strategy<Value = Rational> {
    (1i64..10007).prop_map(|n| Rational::from((n, 10007)))
}

fn branch() -> impl Strategy<Value = MoebiusBranch> {
    (-9i64..10, -9i64..10, -9i64..10, -9i64..10)
        .prop_filter_map("singular", |(a, b, c, d)| MoebiusBranch::from_ints(a, b, c, d).ok())
}

fn triple() -> impl Strategy<Value = ParamTriple> {
    (pos_rat(), pos_rat(), pos_rat()).prop_map(|(l, m, n)| ParamTriple::new(l, m, n).unwrap())
}

/// Solves a condition that is linear in `nu` for positive `nu`.
fn with_nu(l: Rational, m: Rational, num: Rational, den: Rational) -> Option<ParamTriple> {
    if den == 0 {
        return None;
    }
    let nu = num / den;
    (nu > 0).then(|| ParamTriple::new(l, m, nu).ok()).flatten()
}

fn ct_triple() -> impl Strategy<Value = ParamTriple> {
    (pos_rat(), pos_rat()).prop_filter_map("nu <= 0", |(l, m)| {
        let num = Rational::from(&l * &m) + &m - Rational::from(3 * &l);
        with_nu(l.clone(), m, num, l)
    })
}

/// Generic points of `CS_i = 0` for a single flipped branch.
fn cs_triple(f: Family) -> impl Strategy<Value = ParamTriple> {
    (pos_rat(), pos_rat()).prop_filter_map("nu <= 0", move |(l, m)| {
        let lm = Rational::from(&l * &m);
        let (num, den) = match f {
            Family::S1 => (27 - Rational::from(3 * &lm) - Rational::from(12 * &m), lm - 9),
            Family::S2 => (Rational::from(9), lm),
            Family::S3 => (-Rational::from(3 * &l) - 3, Rational::from(4 * &l) - &m - lm),
            _ => unreachable!(),
        };
        with_nu(l, m, num, den)
    })
}

fn on_surface() -> impl Strategy<Value = (Family, ParamTriple)> {
    prop_oneof![
        ct_triple().prop_map(|t| (Family::T, t)),
        cs_triple(Family::S1).prop_map(|t| (Family::S1, t)),
        cs_triple(Family::S2).prop_map(|t| (Family::S2, t)),
        cs_triple(Family::S3).prop_map(|t| (Family::S3, t)),
    ]
}

fn map_of(f: Family, t: &ParamTriple) -> Option<PiecewiseMap> {
    if f == Family::T {
        family_t(t).ok()
    } else {
        family_s(t, f.flipped()).ok()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn rational_field_axioms(a in rat(), b in rat(), c in rat()) {
        let ab = Rational::from(&a + &b);
        prop_assert_eq!(Rational::from(&ab + &c), Rational::from(&a + Rational::from(&b + &c)));
        let bc = Rational::from(&b + &c);
        prop_assert_eq!(Rational::from(&a * &bc), Rational::from(&a * &b) + Rational::from(&a * &c));
    }

    #[test]
    fn scaling_by_a_polynomial_cancels(r in rat(), q in prop::collection::vec(rat(), 1..5)) {
        let q = Polynomial::from_coeffs(q);
        prop_assume!(!q.is_zero());
        let qf = RationalFunction::from_poly(q);
        let back = (&(&RationalFunction::constant(r.clone()) * &qf) / &qf).unwrap();
        prop_assert_eq!(back, RationalFunction::constant(r));
    }

    #[test]
    fn rational_roots_are_roots(roots in prop::collection::vec(rat(), 1..4), extra in prop::collection::vec(-5i64..6, 1..3)) {
        let p = &Polynomial::from_roots(&roots) * &Polynomial::from_ints(&[extra.as_slice(), &[1]].concat());
        let found = poly_roots_rational(&p).unwrap();
        for r in &found {
            prop_assert_eq!(p.eval(r), 0);
        }
        for r in &roots {
            prop_assert!(found.contains(r));
        }
    }

    #[test]
    fn composition_is_associative_and_pointwise(m in branch(), n in branch(), o in branch(), x in rat()) {
        prop_assert_eq!(m.compose(&n).compose(&o), m.compose(&n.compose(&o)));
        if let Ok(nx) = n.eval(&x) {
            if let (Ok(lhs), Ok(rhs)) = (m.compose(&n).eval(&x), m.eval(&nx)) {
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn adjoint_reverses_composition(m in branch(), n in branch()) {
        prop_assert_eq!(m.compose(&n).adjoint(), n.adjoint().compose(&m.adjoint()));
    }

    #[test]
    fn jacobian_chain_rule(m in branch(), n in branch(), x in rat()) {
        let (Ok(nx), Ok(jn)) = (n.eval(&x), n.jacobian().eval(&x)) else { return Ok(()) };
        let Ok(jm) = m.jacobian().eval(&nx) else { return Ok(()) };
        if let Ok(j) = m.compose(&n).jacobian().eval(&x) {
            prop_assert_eq!(j, jm * jn);
        }
    }

    #[test]
    fn flip_is_an_involution(m in branch()) {
        prop_assert_eq!(m.flip().flip(), m);
    }

    #[test]
    fn family_flips_match_w_matrices(t in triple()) {
        let [vl, vm, vn] = family_t_branches(&t);
        let (l, mu, n) = (&t.lambda, &t.mu, &t.nu);
        let w = |a: Rational, b: Rational, c: Rational, d: Rational| MoebiusBranch::from_rationals(&a, &b, &c, &d).unwrap();
        prop_assert_eq!(vl.flip(), w(Rational::from(3 * l), 3 - Rational::from(3 * l), l.clone(), Rational::from(-l)));
        prop_assert_eq!(
            vm.flip(),
            w(Rational::from(3 * mu), 9 - Rational::from(3 * mu), Rational::from(2 * mu), 3 - Rational::from(2 * mu))
        );
        prop_assert_eq!(vn.flip(), w(n.clone(), 3 - n.clone(), n.clone(), 2 - n.clone()));
    }

    #[test]
    fn valid_maps_tile_and_invert(t in triple(), subset in prop::collection::vec(0usize..3, 0..3), x in unit_point()) {
        let p = family_s(&t, &subset).unwrap();
        prop_assert!(p.validate().is_empty());
        let cuts = p.partition().unwrap();
        prop_assert_eq!(cuts.first().unwrap(), &Rational::new());
        prop_assert_eq!(cuts.last().unwrap(), &Rational::from(1));
        prop_assert!(cuts.windows(2).all(|w| w[0] < w[1]));
        if let Ok(r) = p.locate(&x, TieBreak::Reject) {
            let y = p.apply_forward(&x, TieBreak::Reject).unwrap();
            prop_assert_eq!(p.branch(r).eval(&y).unwrap(), x);
        }
    }

    #[test]
    fn composed_map_is_the_composition(t in triple(), s in triple(), x in unit_point()) {
        let (t, s) = (family_t(&t).unwrap(), family_s(&s, &[1]).unwrap());
        let u = PiecewiseMap::compose_maps(&t, &s).unwrap();
        let step = s.apply_forward(&x, TieBreak::Reject).and_then(|y| t.apply_forward(&y, TieBreak::Reject));
        if let Ok(direct) = step {
            prop_assert_eq!(u.apply_forward(&x, TieBreak::Reject).unwrap(), direct);
        }
    }

    #[test]
    fn natural_dual_conjugates_every_branch(t in ct_triple()) {
        let p = family_t(&t).unwrap();
        let nd = natural_dual_solve(&p).unwrap();
        let psi = nd.psi().expect("CT surface has a natural dual");
        for v in p.branches().unwrap() {
            prop_assert!(psi.conjugates(v));
        }
    }

    #[test]
    fn admissible_dual_densities_are_invariant((f, t) in on_surface()) {
        let p = map_of(f, &t).unwrap();
        let nd = natural_dual_solve(&p).unwrap();
        let psi = nd.psi().expect("condition surface has a natural dual");
        if let Ok(Density::Rational(h)) = density_from_dual(&dual_interval(psi)) {
            prop_assert!(kuzmin_check_exact(&p, &h).unwrap(), "{:?} at {:?}", f, t);
        }
    }

    #[test]
    fn same_measure_is_symmetric_and_reflexive(t in ct_triple(), other in prop::sample::select(Family::ALL.to_vec())) {
        let p = family_t(&t).unwrap();
        let Some(q) = map_of(other, &t) else { return Ok(()) };
        let pq = same_measure(&p, &q).unwrap();
        let qp = same_measure(&q, &p).unwrap();
        prop_assert_eq!(pq.verdict, qp.verdict);
        prop_assert_eq!(same_measure(&p, &p).unwrap().verdict, Verdict::Equal);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn series_bounds_are_honoured(x in unit_point(), j in 1usize..64) {
        let x = rug::Float::with_val(128, &x);
        for s in [fibred_core::catalog::intro_density(), fibred_core::catalog::example4_density(3)] {
            let a = s.eval(&x, j).unwrap();
            let b = s.eval(&x, 2 * j).unwrap();
            let moved = rug::Float::with_val(128, &a.value - &b.value).abs().to_f64();
            prop_assert!(moved <= a.bound + b.bound, "moved {} bounds {} {}", moved, a.bound, b.bound);
        }
        let (v, ok) = series_eval(&fibred_core::catalog::intro_density(), &x, 1e-20, 10_000).unwrap();
        prop_assert!(ok && v.bound <= 1e-20);
    }
}
