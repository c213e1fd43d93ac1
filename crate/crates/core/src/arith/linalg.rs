use super::rational::Rational;

/// Basis of `{x : M x = 0}` by exact row reduction. Rows may be given in any
/// number; all must have the same length.
pub fn null_space(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let Some(n) = rows.first().map(|r| r.len()) else {
        return Vec::new();
    };
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::from(m[r][col].recip_ref());
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m.len() {
            if i != r && m[i][col] != 0 {
                let f = m[i][col].clone();
                for j in 0..n {
                    let sub = Rational::from(&f * &m[r][j]);
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::new(); n];
            v[f] = Rational::from(1);
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = Rational::from(-&m[row][f]);
            }
            v
        })
        .collect()
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    rows.first().map_or(0, |r| r.len()) - null_space(rows).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::int;

    fn row(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn one_dimensional_kernel() {
        let rows = vec![row(&[0, -2, 0]), row(&[0, -2, -1]), row(&[0, -2, -2])];
        assert_eq!(null_space(&rows), vec![row(&[1, 0, 0])]);
        assert_eq!(rank(&rows), 2);
    }

    #[test]
    fn full_rank_has_trivial_kernel() {
        let rows = vec![row(&[1, 2, 3]), row(&[0, 1, 4]), row(&[5, 6, 0])];
        assert!(null_space(&rows).is_empty());
    }

    #[test]
    fn kernel_vectors_solve_the_system() {
        let rows = vec![row(&[2, -4, 6]), row(&[-1, 2, -3])];
        let ns = null_space(&rows);
        assert_eq!(ns.len(), 2);
        for v in ns {
            for r in &rows {
                let s: Rational = r.iter().zip(&v).map(|(a, b)| Rational::from(a * b)).sum();
                assert_eq!(s, 0);
            }
        }
    }
}
