//! Numerical cross-checks: Ulam discretization of the transfer operator,
//! orbit histograms, and L1 distances to exact densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{ArithError, Polynomial, Rational, RationalFunction};
use crate::duality::exceptional::bits_for_digits;
use crate::fibred::{MapError, Piece, PiecewiseMap};
use crate::highprec::upper_f64;
use crate::moebius::MoebiusBranch;
use crate::transport::{Density, SeriesDensity, SeriesPart, TransportError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumlabError {
    #[error("density is not integrable on [0, 1]: {0}")]
    NotIntegrable(String),
    #[error("need at least one cell")]
    NoCells,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Cell weights on the uniform grid `i / n`, summing to one.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalDensity {
    pub weights: Vec<f64>,
}

impl EmpiricalDensity {
    pub fn n_cells(&self) -> usize {
        self.weights.len()
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let n = self.n_cells() as f64;
        (i as f64 / n, (i + 1) as f64 / n)
    }

    fn normalized(mut weights: Vec<f64>) -> Self {
        let s: f64 = weights.iter().sum();
        if s > 0.0 {
            weights.iter_mut().for_each(|w| *w /= s);
        }
        Self { weights }
    }
}

/// Row-stochastic transition weights, stored by target column.
#[derive(Clone, Debug)]
pub struct UlamMatrix {
    pub n_cells: usize,
    /// `cols[j]` lists `(i, P_ij)`.
    cols: Vec<Vec<(usize, f64)>>,
    /// Per row, the probability of landing in a discarded cylinder.
    deficit: Vec<f64>,
}

impl UlamMatrix {
    pub fn build(p: &PiecewiseMap, n: usize, truncation: usize) -> Result<Self, NumlabError> {
        if n == 0 {
            return Err(NumlabError::NoCells);
        }
        let nr = Rational::from(n as i64);
        let grid: Vec<Rational> = (0..=n).map(|i| Rational::from((i as i64, n as i64))).collect();
        let branches = p.truncated_branches(truncation);
        let per_branch: Vec<Vec<(usize, usize, f64)>> = branches
            .par_iter()
            .map(|(_, v)| {
                let img: Vec<Rational> = grid.iter().map(|x| v.eval(x).expect("validated branch")).collect();
                let mut out = Vec::new();
                for j in 0..n {
                    let (lo, hi) = if img[j] <= img[j + 1] {
                        (&img[j], &img[j + 1])
                    } else {
                        (&img[j + 1], &img[j])
                    };
                    let first = Rational::from(lo * &nr).floor().numer().to_usize().unwrap_or(0);
                    let last = Rational::from(hi * &nr).ceil().numer().to_usize().unwrap_or(n);
                    for i in first..last.min(n) {
                        let a = lo.max(&grid[i]);
                        let b = hi.min(&grid[i + 1]);
                        if a < b {
                            let w = Rational::from(b - a) * &nr;
                            out.push((i, j, w.to_f64()));
                        }
                    }
                }
                out
            })
            .collect();
        let mut cols = vec![Vec::new(); n];
        let mut row_sum = vec![0.0; n];
        for (i, j, w) in per_branch.into_iter().flatten() {
            cols[j].push((i, w));
            row_sum[i] += w;
        }
        let deficit = row_sum.iter().map(|s| (1.0 - s).max(0.0)).collect();
        Ok(Self { n_cells: n, cols, deficit })
    }

    pub fn max_row_error(&self) -> f64 {
        let mut row_sum = vec![0.0; self.n_cells];
        for col in &self.cols {
            for &(i, w) in col {
                row_sum[i] += w;
            }
        }
        row_sum
            .iter()
            .zip(&self.deficit)
            .map(|(s, d)| (s + d - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `pi P`, with the discarded mass of each row spread uniformly.
    fn apply(&self, pi: &[f64]) -> Vec<f64> {
        let lost: f64 = pi.iter().zip(&self.deficit).map(|(a, b)| a * b).sum();
        let spread = lost / self.n_cells as f64;
        self.cols
            .par_iter()
            .map(|col| col.iter().map(|&(i, w)| pi[i] * w).sum::<f64>() + spread)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UlamResult {
    pub density: EmpiricalDensity,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stationary mass that fell into truncated cylinders in one step.
    pub discarded_mass: f64,
}

pub const ULAM_TOL: f64 = 1e-12;
pub const ULAM_MAX_ITER: usize = 20_000;
/// Digits kept per countable family by default.
pub const DEFAULT_TRUNCATION: usize = 200;

/// Stationary vector of the Ulam matrix by power iteration.
pub fn ulam_stationary(p: &PiecewiseMap, n_cells: usize, truncation: usize) -> Result<UlamResult, NumlabError> {
    let m = UlamMatrix::build(p, n_cells, truncation)?;
    let n = n_cells;
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < ULAM_MAX_ITER {
        let mut next = m.apply(&pi);
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= s);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        iterations += 1;
        if residual < ULAM_TOL {
            break;
        }
    }
    let discarded_mass = pi.iter().zip(&m.deficit).map(|(a, b)| a * b).sum();
    Ok(UlamResult {
        density: EmpiricalDensity::normalized(pi),
        residual,
        iterations,
        converged: residual < ULAM_TOL,
        discarded_mass,
    })
}

struct FloatBranchInv {
    lo: Float,
    hi: Float,
    /// The forward map on this cylinder.
    fwd: MoebiusBranch,
}

struct FloatFamily {
    lo: Float,
    hi: Float,
    outer_inv: MoebiusBranch,
    inner_inv: MoebiusBranch,
    zlo: Float,
    k0: i64,
}

/// The forward map in floating point.
struct FloatMap {
    cylinders: Vec<FloatBranchInv>,
    families: Vec<FloatFamily>,
}

enum Step {
    Next(Float),
    /// `x` is on a cylinder boundary or outside every cylinder.
    Boundary,
}

impl FloatMap {
    fn new(p: &PiecewiseMap, prec: u32) -> Result<Self, NumlabError> {
        let mut cylinders = Vec::new();
        let mut families = Vec::new();
        for piece in p.pieces() {
            match piece {
                Piece::Branch(v) => {
                    let (lo, hi) = v.image_of_unit().map_err(MapError::from)?;
                    cylinders.push(FloatBranchInv {
                        lo: Float::with_val(prec, &lo),
                        hi: Float::with_val(prec, &hi),
                        fwd: v.inverse(),
                    });
                }
                Piece::Family(f) => {
                    let (lo, hi) = f.tail_hull(f.k0);
                    families.push(FloatFamily {
                        lo: Float::with_val(prec, &lo),
                        hi: Float::with_val(prec, &hi),
                        outer_inv: f.outer.inverse(),
                        inner_inv: f.inner.inverse(),
                        zlo: Float::with_val(prec, &f.inner_range().0),
                        k0: f.k0,
                    });
                }
            }
        }
        Ok(Self { cylinders, families })
    }

    fn step(&self, x: &Float) -> Step {
        for c in &self.cylinders {
            if *x == c.lo || *x == c.hi {
                return Step::Boundary;
            }
            if *x > c.lo && *x < c.hi {
                return Step::Next(c.fwd.eval_float(x));
            }
        }
        for f in &self.families {
            if *x > f.lo && *x < f.hi {
                let u = f.outer_inv.eval_float(x);
                if u <= 0 {
                    return Step::Boundary;
                }
                let t = Float::with_val(x.prec(), u.recip_ref());
                let kf = Float::with_val(x.prec(), &t - &f.zlo).floor();
                let Some(k) = kf.to_integer().and_then(|k| k.to_i64()) else {
                    return Step::Boundary;
                };
                if k < f.k0 {
                    return Step::Boundary;
                }
                let z = Float::with_val(x.prec(), &t - k);
                if z == f.zlo {
                    return Step::Boundary;
                }
                return Step::Next(f.inner_inv.eval_float(&z));
            }
        }
        Step::Boundary
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BirkhoffResult {
    pub density: EmpiricalDensity,
    /// Number of times the orbit hit a cylinder boundary and was perturbed.
    pub jitter_events: usize,
}

pub const ORBIT_JITTER: f64 = 1e-30;
const BURN_IN: usize = 1000;
pub const DEFAULT_CHAINS: usize = 4;

fn random_point(rng: &mut ChaCha8Rng, prec: u32) -> Float {
    let hi: u64 = rng.gen();
    let lo: u64 = rng.gen();
    let x = Float::with_val(prec, hi) + Float::with_val(prec, lo) / Float::with_val(prec, u64::MAX);
    let x = x / Float::with_val(prec, u64::MAX);
    // keep away from 0 and 1
    x * 0.998 + 0.001
}

fn run_chain(map: &FloatMap, seed: u64, n_iter: usize, n_cells: usize, prec: u32) -> (Vec<u64>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = random_point(&mut rng, prec);
    let mut counts = vec![0u64; n_cells];
    let mut jitters = 0;
    for it in 0..BURN_IN + n_iter {
        x = loop {
            match map.step(&x) {
                Step::Next(y) if y > 0 && y < 1 && y.is_finite() => break y,
                _ => {
                    jitters += 1;
                    let eps: f64 = rng.gen_range(-1.0..1.0) * ORBIT_JITTER;
                    x += eps;
                    if x <= 0 || x >= 1 {
                        x = random_point(&mut rng, prec);
                    }
                }
            }
        };
        if it >= BURN_IN {
            let c = ((x.to_f64() * n_cells as f64) as usize).min(n_cells - 1);
            counts[c] += 1;
        }
    }
    (counts, jitters)
}

/// Occupation histogram of `chains` independent forward orbits of total
/// length `n_iter`, seeded deterministically from `seed`.
pub fn birkhoff_histogram(
    p: &PiecewiseMap,
    seed: u64,
    n_iter: usize,
    n_cells: usize,
    digits: u32,
    chains: usize,
) -> Result<BirkhoffResult, NumlabError> {
    if n_cells == 0 {
        return Err(NumlabError::NoCells);
    }
    let prec = bits_for_digits(digits);
    let map = FloatMap::new(p, prec)?;
    let chains = chains.max(1);
    let per = n_iter.div_ceil(chains);
    let runs: Vec<(Vec<u64>, usize)> = (0..chains as u64)
        .into_par_iter()
        .map(|c| run_chain(&map, seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(c), per, n_cells, prec))
        .collect();
    let mut counts = vec![0u64; n_cells];
    let mut jitter_events = 0;
    for (c, j) in runs {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        jitter_events += j;
    }
    Ok(BirkhoffResult {
        density: EmpiricalDensity::normalized(counts.into_iter().map(|c| c as f64).collect()),
        jitter_events,
    })
}

/// `F(x)` with `F' = f`, as a closure over the partial fraction expansion.
fn antiderivative(f: &RationalFunction, prec: u32) -> Result<impl Fn(&Rational) -> Float, NumlabError> {
    let pf = f.partial_fractions()?;
    for t in &pf.terms {
        if t.pole >= 0 && t.pole <= 1 {
            return Err(NumlabError::NotIntegrable(format!("pole at {}", t.pole)));
        }
    }
    let coeffs = pf.poly.coeffs().to_vec();
    let integral = Polynomial::from_coeffs(
        std::iter::once(Rational::new())
            .chain(coeffs.iter().enumerate().map(|(i, c)| Rational::from(c / (i as i64 + 1))))
            .collect(),
    );
    Ok(move |x: &Rational| {
        let mut v = Float::with_val(prec, &integral.eval(x));
        for t in &pf.terms {
            let d = Float::with_val(prec, &Rational::from(x - &t.pole));
            let c = Float::with_val(prec, &t.coeff);
            if t.power == 1 {
                v += c * d.abs().ln();
            } else {
                let e = t.power - 1;
                v -= c / (rug::ops::Pow::pow(d, e) * e);
            }
        }
        v
    })
}

fn grid(n: usize) -> Vec<Rational> {
    (0..=n).map(|i| Rational::from((i as i64, n as i64))).collect()
}

/// Cell integrals of `f` on the uniform grid.
fn rational_cell_integrals(f: &RationalFunction, n: usize, prec: u32) -> Result<Vec<Float>, NumlabError> {
    let fint = antiderivative(f, prec)?;
    let vals: Vec<Float> = grid(n).iter().map(&fint).collect();
    Ok(vals.windows(2).map(|w| Float::with_val(prec, &w[1] - &w[0])).collect())
}

/// Cell integrals of a series density: the first `explicit` terms exactly,
/// plus a bound on the remainder's total mass.
fn series_cell_integrals(
    s: &SeriesDensity,
    n: usize,
    explicit: usize,
    prec: u32,
) -> Result<(Vec<Float>, f64), NumlabError> {
    let top = s.parts().iter().map(|p| p.m0).max().unwrap_or(0) + explicit as i64;
    let lo = s.parts().iter().map(|p| p.m0).min().unwrap_or(0);
    // termwise, since the summed rational function has huge coefficients
    let mut cells = if s.head().is_zero() {
        vec![Float::with_val(prec, 0); n]
    } else {
        rational_cell_integrals(s.head(), n, prec)?
    };
    for m in lo..top {
        let t = s.term(m);
        if t.is_zero() {
            continue;
        }
        for (c, v) in cells.iter_mut().zip(rational_cell_integrals(&t, n, prec)?) {
            *c += v;
        }
    }
    let rest: Vec<SeriesPart> = s
        .parts()
        .iter()
        .map(|p| SeriesPart { m0: top, ..p.clone() })
        .collect();
    let rest = SeriesDensity::new(RationalFunction::zero(), rest)?;
    let bound = rest.abs_bound(&Rational::new(), &Rational::from(1)).map_err(|e| match e {
        TransportError::Pole(_) => NumlabError::NotIntegrable("series tail is unbounded on [0, 1]".into()),
        e => e.into(),
    })?;
    Ok((cells, bound))
}

#[derive(Clone, Debug, Serialize)]
pub struct L1Report {
    pub distance: f64,
    /// Bound on the error of `distance` from truncating a series density.
    pub bound: f64,
}

/// `sum_cells |weight - int_cell f / int_0^1 f|`.
pub fn l1_compare(e: &EmpiricalDensity, f: &Density, digits: u32, explicit: usize) -> Result<L1Report, NumlabError> {
    let prec = bits_for_digits(digits);
    let n = e.n_cells();
    let (cells, tail) = match f {
        Density::Rational(r) => (rational_cell_integrals(r, n, prec)?, 0.0),
        Density::Series(s) => series_cell_integrals(s, n, explicit, prec)?,
    };
    let total = cells.iter().fold(Float::with_val(prec, 0), |a, c| a + c);
    if total <= 0 {
        return Err(NumlabError::NotIntegrable("total mass is not positive".into()));
    }
    let distance = cells
        .iter()
        .zip(&e.weights)
        .map(|(c, w)| (Float::with_val(prec, c / &total).to_f64() - w).abs())
        .sum();
    // |c_i + r_i| / (T + R) against c_i / T with sum |r_i| <= tail
    let t = total.to_f64();
    let bound = if tail > 0.0 {
        if tail >= t {
            f64::INFINITY
        } else {
            2.0 * tail / (t - tail)
        }
    } else {
        0.0
    };
    Ok(L1Report { distance, bound })
}

/// Exact cell masses of `f`, normalized, for use as a reference column.
pub fn reference_weights(f: &RationalFunction, n: usize, digits: u32) -> Result<Vec<f64>, NumlabError> {
    let prec = bits_for_digits(digits);
    let cells = rational_cell_integrals(f, n, prec)?;
    let total = cells.iter().fold(Float::with_val(prec, 0), |a, c| a + c);
    Ok(cells.iter().map(|c| upper_f64(&Float::with_val(prec, c / &total)) * (1.0 - 4.0 * f64::EPSILON)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibred::{family_t, gauss, ParamTriple};

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
        RationalFunction::new(Polynomial::from_ints(num), Polynomial::from_ints(den)).unwrap()
    }

    fn linear() -> PiecewiseMap {
        family_t(&ParamTriple::from_ratios((1, 1), (3, 1), (3, 1))).unwrap()
    }

    #[test]
    fn ulam_on_linear_case_is_uniform() {
        let r = ulam_stationary(&linear(), 300, DEFAULT_TRUNCATION).unwrap();
        assert!(r.converged);
        for w in &r.density.weights {
            assert!((w - 1.0 / 300.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ulam_rows_are_stochastic() {
        let m = UlamMatrix::build(&linear(), 90, 10).unwrap();
        assert!(m.max_row_error() < 1e-12);
    }

    #[test]
    fn uniform_against_gauss_density() {
        let e = EmpiricalDensity::normalized(vec![1.0; 1000]);
        let d = l1_compare(&e, &Density::Rational(rf(&[1], &[1, 1])), 30, 0).unwrap();
        // the curves cross at c = 1/ln 2 - 1; L1 = 2 (log2(1 + c) - c)
        let c = 1.0 / std::f64::consts::LN_2 - 1.0;
        let exact = 2.0 * ((1.0 + c).log2() - c);
        assert!((d.distance - exact).abs() < 1e-6, "{} {exact}", d.distance);
    }

    #[test]
    fn density_against_its_own_cells() {
        let f = rf(&[1], &[1, 1]);
        let w = reference_weights(&f, 500, 30).unwrap();
        let d = l1_compare(&EmpiricalDensity { weights: w }, &Density::Rational(f), 30, 0).unwrap();
        assert!(d.distance < 1e-12);
    }

    #[test]
    fn pole_in_unit_interval_is_not_integrable() {
        let e = EmpiricalDensity::normalized(vec![1.0; 10]);
        let r = l1_compare(&e, &Density::Rational(rf(&[1], &[0, 1])), 30, 0);
        assert!(matches!(r, Err(NumlabError::NotIntegrable(_))));
    }

    #[test]
    fn gauss_ulam_close_to_gauss_density() {
        let r = ulam_stationary(&gauss(), 500, DEFAULT_TRUNCATION).unwrap();
        assert!(r.converged);
        let d = l1_compare(&r.density, &Density::Rational(rf(&[1], &[1, 1])), 30, 0).unwrap();
        assert!(d.distance < 0.02, "{}", d.distance);
    }

    #[test]
    fn orbit_histogram_is_deterministic_and_near_uniform() {
        let a = birkhoff_histogram(&linear(), 7, 100_000, 20, 30, 2).unwrap();
        let b = birkhoff_histogram(&linear(), 7, 100_000, 20, 30, 2).unwrap();
        assert_eq!(a.density.weights, b.density.weights);
        for w in &a.density.weights {
            assert!((w - 0.05).abs() < 0.01);
        }
    }

    #[test]
    fn gauss_orbit_histogram() {
        let r = birkhoff_histogram(&gauss(), 3, 200_000, 50, 30, 2).unwrap();
        let d = l1_compare(&r.density, &Density::Rational(rf(&[1], &[1, 1])), 30, 0).unwrap();
        assert!(d.distance < 0.05, "{}", d.distance);
    }
}
