//! Seeded rational samples on the condition surfaces.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{null_space, Polynomial, Rational};
use crate::fibred::ParamTriple;

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::from((rng.gen_range(1..=60i64), rng.gen_range(1..=12i64)))
}

fn on_ct(lambda: Rational, mu: Rational) -> Option<ParamTriple> {
    if lambda <= 0 || mu <= 0 {
        return None;
    }
    let nu = Rational::from(Rational::from(&lambda * &mu) + &mu - Rational::from(3 * &lambda)) / &lambda;
    ParamTriple::new(lambda, mu, nu).ok()
}

fn is_linear(t: &ParamTriple) -> bool {
    t.lambda == 1 && t.mu == 3 && t.nu == 3
}

/// Generic positive triples with small heights.
pub fn random_triples(n: usize, seed: u64) -> Vec<ParamTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            ParamTriple::new(small_rational(&mut rng), small_rational(&mut rng), small_rational(&mut rng))
                .expect("positive")
        })
        .collect()
}

/// Random points of `CT = 0` with every parameter positive.
pub fn ct_samples(n: usize, seed: u64) -> Vec<ParamTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        if let Some(t) = on_ct(small_rational(&mut rng), small_rational(&mut rng)) {
            out.push(t);
        }
    }
    out
}

/// Points with `mu = 3` and `lambda nu = 3`, where `CT`, `CS13` and `CS123`
/// all vanish.
pub fn crossed_line_samples(n: usize, seed: u64) -> Vec<ParamTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let l = small_rational(&mut rng);
        if l == 1 {
            continue;
        }
        let nu = Rational::from(3) / &l;
        out.push(ParamTriple::new(l, Rational::from(3), nu).expect("positive"));
    }
    out
}

type Curve = fn(&Rational, &Rational) -> Rational;

/// `CS12` restricted to `CT = 0`, cleared of the denominator `lambda`.
pub fn ct_cs12_curve(l: &Rational, m: &Rational) -> Rational {
    let l2 = Rational::from(l * l);
    let m2 = Rational::from(m * m);
    -Rational::from(&l2 * m) + Rational::from(l * &m2) - Rational::from(4 * Rational::from(l * m)) - Rational::from(3 * l)
        + m2
}

/// `CS23` restricted to `CT = 0`, cleared of the denominator `lambda`.
pub fn ct_cs23_curve(l: &Rational, m: &Rational) -> Rational {
    let l2 = Rational::from(l * l);
    let m2 = Rational::from(m * m);
    Rational::from(&l2 * &m2) + Rational::from(l * &m2) - Rational::from(6 * Rational::from(l * m))
        + Rational::from(27 * l)
        - Rational::from(9 * m)
}

fn lagrange(ts: &[Rational], vals: &[Rational]) -> Polynomial {
    let mut result = Polynomial::zero();
    for (i, ti) in ts.iter().enumerate() {
        let mut basis = Polynomial::constant(vals[i].clone());
        for (j, tj) in ts.iter().enumerate() {
            if i != j {
                let den = Rational::from(ti - tj);
                basis = &basis * &Polynomial::linear(-Rational::from(tj / &den), den.recip());
            }
        }
        result = &result + &basis;
    }
    result
}

fn height(r: &Rational) -> u32 {
    r.numer().significant_bits().max(r.denom().significant_bits())
}

type Point = (Rational, Rational);

/// Both roots in `mu` of `f(lambda, .) = 0` when they are rational.
fn mu_roots(f: Curve, l: &Rational) -> Vec<Rational> {
    let ts: Vec<Rational> = (0..3).map(Rational::from).collect();
    let vals: Vec<Rational> = ts.iter().map(|m| f(l, m)).collect();
    let q = lagrange(&ts, &vals);
    let (a, b, c) = (q.coeff(2), q.coeff(1), q.coeff(0));
    if a == 0 {
        return Vec::new();
    }
    let disc = Rational::from(&b * &b) - Rational::from(4 * Rational::from(&a * &c));
    if disc < 0 {
        return Vec::new();
    }
    let (n, d) = (disc.numer().clone(), disc.denom().clone());
    if !n.is_perfect_square() || !d.is_perfect_square() {
        return Vec::new();
    }
    let s = Rational::from((n.sqrt(), d.sqrt()));
    let two_a = Rational::from(2 * &a);
    let mut out = vec![
        Rational::from(Rational::from(-&b) + &s) / &two_a,
        Rational::from(Rational::from(-&b) - &s) / &two_a,
    ];
    out.dedup();
    out
}

/// Fourth intersection of the curve with the `(1,1)` curve
/// `a l m + b l + c m + d = 0` through three of its points.
fn fourth_point(f: Curve, p: [&Point; 3]) -> Option<Point> {
    let rows: Vec<Vec<Rational>> = p
        .iter()
        .map(|(l, m)| vec![Rational::from(l * m), l.clone(), m.clone(), Rational::from(1)])
        .collect();
    let ns = null_space(&rows);
    if ns.len() != 1 {
        return None;
    }
    let [a, b, c, d] = [&ns[0][0], &ns[0][1], &ns[0][2], &ns[0][3]];
    // m = -(b l + d)/(a l + c); numerator of f(l, m(l)) (a l + c)^2 has degree 4
    let ts: Vec<Rational> = (0..5).map(Rational::from).collect();
    let mut vals = Vec::new();
    for t in &ts {
        let den = Rational::from(a * t) + c;
        if den == 0 {
            return None;
        }
        let m = -Rational::from(Rational::from(b * t) + d) / &den;
        vals.push(f(t, &m) * Rational::from(&den * &den));
    }
    let poly = lagrange(&ts, &vals);
    let lead = poly.coeff(4);
    if lead == 0 {
        return None;
    }
    let sum: Rational = p.iter().map(|q| q.0.clone()).sum();
    let l4 = -Rational::from(poly.coeff(3) / &lead) - sum;
    let den = Rational::from(a * &l4) + c;
    if den == 0 {
        return None;
    }
    let m4 = -Rational::from(Rational::from(b * &l4) + d) / den;
    (f(&l4, &m4) == 0).then_some((l4, m4))
}

const HEIGHT_CAP: u32 = 400;

/// Rational points on `f = 0` of either sign, from a small search followed
/// by the chord construction on random triples. Returns positive nonlinear
/// triples on `CT = 0`, smallest heights first.
fn curve_samples(f: Curve, n: usize, seed: u64) -> Vec<ParamTriple> {
    let mut pool: Vec<Point> = Vec::new();
    for q in 1..60i64 {
        for p in -200..200i64 {
            if rug::Integer::from(p).gcd(&rug::Integer::from(q)) != 1 {
                continue;
            }
            let l = Rational::from((p, q));
            for m in mu_roots(f, &l) {
                pool.push((l.clone(), m));
            }
        }
    }
    let mut seen: BTreeSet<Point> = pool.iter().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positive = |p: &Point| on_ct(p.0.clone(), p.1.clone()).filter(|t| !is_linear(t) && t.lambda != 1);
    let mut found: Vec<ParamTriple> = pool.iter().filter_map(positive).collect();
    let want = n + n / 2;
    let mut tries = 0;
    while found.len() < want && tries < 20_000 && pool.len() >= 3 {
        tries += 1;
        let idx = rand::seq::index::sample(&mut rng, pool.len(), 3);
        let q = fourth_point(f, [&pool[idx.index(0)], &pool[idx.index(1)], &pool[idx.index(2)]]);
        let Some(q) = q else { continue };
        if height(&q.0) > HEIGHT_CAP || height(&q.1) > HEIGHT_CAP || !seen.insert(q.clone()) {
            continue;
        }
        if let Some(t) = positive(&q) {
            found.push(t);
        }
        pool.push(q);
    }
    found.sort_by_key(|t| height(&t.lambda).max(height(&t.mu)));
    found.dedup();
    found.truncate(n);
    found
}

/// Positive rational points with `CT = CS12 = 0` and `lambda != 1`.
pub fn ct_cs12_samples(n: usize, seed: u64) -> Vec<ParamTriple> {
    curve_samples(ct_cs12_curve, n, seed)
}

/// Positive rational points with `CT = CS23 = 0` and `lambda != 1`.
pub fn ct_cs23_samples(n: usize, seed: u64) -> Vec<ParamTriple> {
    curve_samples(ct_cs23_curve, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{condition_eval, ConditionId};

    #[test]
    fn samples_lie_on_both_surfaces() {
        for (samples, id) in [
            (ct_cs12_samples(20, 1), ConditionId::CS12),
            (ct_cs23_samples(20, 1), ConditionId::CS23),
            (crossed_line_samples(20, 1), ConditionId::CS13),
            (crossed_line_samples(20, 2), ConditionId::CS123),
        ] {
            assert_eq!(samples.len(), 20, "{id:?}");
            for t in samples {
                assert_eq!(condition_eval(ConditionId::CT, &t), 0);
                assert_eq!(condition_eval(id, &t), 0, "{id:?} {t:?}");
                assert!(t.lambda != 1);
            }
        }
    }

    #[test]
    fn ct_samples_are_positive_and_deterministic() {
        let a = ct_samples(30, 9);
        assert_eq!(a, ct_samples(30, 9));
        for t in a {
            assert_eq!(condition_eval(ConditionId::CT, &t), 0);
        }
    }
}
