use fibred_core::arith::RationalFunction;
use fibred_core::catalog::{catalog_get, example4_density, CatalogEntry, Claim};
use fibred_core::duality::{density_from_dual, dual_interval, kuzmin_check_exact, natural_dual_solve, same_measure, Family, Verdict};
use fibred_core::fibred::{family_s, family_t, gauss, times_a, ParamTriple, PiecewiseMap};
use fibred_core::numlab::{l1_compare, ulam_stationary, NumlabError, DEFAULT_TRUNCATION};
use fibred_core::transport::{transport_density, Density};

fn map(e: &CatalogEntry, label: &str) -> PiecewiseMap {
    e.map(label).unwrap().clone()
}

fn stated_h(e: &CatalogEntry) -> RationalFunction {
    e.claims
        .iter()
        .find_map(|c| match &c.claim {
            Claim::Transport { h, .. } => Some(h.clone()),
            _ => None,
        })
        .unwrap()
}

#[test]
fn transported_densities_solve_kuzmin_for_z() {
    for name in ["ex1", "ex2", "ex3", "ex6"] {
        let e = catalog_get(name).unwrap();
        let g = transport_density(&map(&e, "S"), &Density::Rational(stated_h(&e))).unwrap();
        let g = g.rational().unwrap();
        assert!(kuzmin_check_exact(&map(&e, "Z"), g).unwrap(), "{name}: {g}");
    }
}

#[test]
fn shared_measure_transports_to_itself() {
    for (l, m, n, other) in [
        ((3, 4), (36, 7), (9, 1), Family::S1),
        ((3, 1), (3, 1), (1, 1), Family::S2),
        ((27, 13), (153, 40), (8, 3), Family::S3),
        ((3, 1), (3, 1), (1, 1), Family::S123),
    ] {
        let t = ParamTriple::from_ratios(l, m, n);
        let tm = family_t(&t).unwrap();
        let s = family_s(&t, other.flipped()).unwrap();
        assert_eq!(same_measure(&tm, &s).unwrap().verdict, Verdict::Equal);
        let psi = natural_dual_solve(&tm).unwrap();
        let h = density_from_dual(&dual_interval(psi.psi().unwrap())).unwrap();
        let moved = transport_density(&s, &h).unwrap();
        assert_eq!(moved.rational(), h.rational(), "{other:?}");
    }
}

#[test]
fn ulam_stationary_vector_is_a_probability() {
    let e = catalog_get("ex1").unwrap();
    let r = ulam_stationary(&map(&e, "U"), 400, DEFAULT_TRUNCATION).unwrap();
    assert!(r.converged);
    assert!(r.density.weights.iter().all(|w| *w >= 0.0));
    assert!((r.density.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
}

#[test]
fn refining_the_ulam_grid_does_not_hurt() {
    let ex1 = catalog_get("ex1").unwrap();
    let g = Density::Rational(
        ex1.claims
            .iter()
            .find_map(|c| match &c.claim {
                Claim::Transport { g, .. } => Some(g.clone()),
                _ => None,
            })
            .unwrap(),
    );
    let t = family_t(&ParamTriple::from_ratios((3, 4), (36, 7), (9, 1))).unwrap();
    let ht = density_from_dual(&dual_interval(natural_dual_solve(&t).unwrap().psi().unwrap())).unwrap();
    for (p, d) in [(map(&ex1, "Z"), g), (t, ht)] {
        let err = |n| {
            let u = ulam_stationary(&p, n, DEFAULT_TRUNCATION).unwrap();
            l1_compare(&u.density, &d, 30, 0).unwrap().distance
        };
        let (coarse, fine) = (err(1000), err(4000));
        assert!(fine <= 1.1 * coarse, "{coarse} -> {fine}");
    }
}

#[test]
fn series_density_of_a_countable_map_is_reached_by_ulam() {
    let z = PiecewiseMap::compose_maps(&gauss(), &times_a(2).unwrap()).unwrap();
    let u = ulam_stationary(&z, 1000, DEFAULT_TRUNCATION).unwrap();
    let d = l1_compare(&u.density, &Density::Series(example4_density(2)), 30, 1000).unwrap();
    assert!(d.distance + d.bound < 0.02, "{d:?}");
}

#[test]
fn non_integrable_densities_are_refused() {
    let ex2 = catalog_get("ex2").unwrap();
    let u = ulam_stationary(&map(&ex2, "Z"), 200, DEFAULT_TRUNCATION).unwrap();
    let g = ex2
        .claims
        .iter()
        .find_map(|c| match &c.claim {
            Claim::Transport { g, .. } => Some(g.clone()),
            _ => None,
        })
        .unwrap();
    assert!(matches!(l1_compare(&u.density, &Density::Rational(g), 30, 0), Err(NumlabError::NotIntegrable(_))));
    let intro = fibred_core::catalog::intro_density();
    assert!(matches!(l1_compare(&u.density, &Density::Series(intro), 30, 100), Err(NumlabError::NotIntegrable(_))));
}
