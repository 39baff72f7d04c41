//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn row_reduce(rows: &mut [Vec<Rational>]) -> Vec<usize> {
    let n_cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut work = rows.to_vec();
    row_reduce(&mut work).len()
}

/// Basis of `{d : A d = 0}` for `A` with `n_cols` columns.
pub fn null_space(rows: &[Vec<Rational>], n_cols: usize) -> Vec<Vec<Rational>> {
    let mut work = rows.to_vec();
    let pivots = row_reduce(&mut work);
    let free: Vec<usize> = (0..n_cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Rational::zero(); n_cols];
            v[fc] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -work[r][fc].clone();
            }
            v
        })
        .collect()
}

/// Indices of the leftmost maximal independent subset of `rows`.
pub fn independent_rows(rows: &[Vec<Rational>]) -> Vec<usize> {
    let n_cols = rows.first().map_or(0, Vec::len);
    let mut transposed: Vec<Vec<Rational>> = (0..n_cols)
        .map(|c| rows.iter().map(|r| r[c].clone()).collect())
        .collect();
    row_reduce(&mut transposed)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|v| int(*v)).collect())
            .collect()
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(&m(&[&[1, 2], &[3, 4]])), 2);
        assert_eq!(rank(&m(&[&[0, 0, 0]])), 0);
        assert_eq!(rank(&[]), 0);
        assert_eq!(rank(&m(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, -1]])), 2);
    }

    #[test]
    fn null_space_of_dependent_system() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        let ns = null_space(&a, 3);
        assert_eq!(ns.len(), 1);
        for row in &a {
            assert_eq!(dot(row, &ns[0]), int(0));
        }
        assert_eq!(ns[0], vec![int(1), int(-1), int(1)]);
    }

    #[test]
    fn rational_pivots() {
        let a = vec![
            vec![ratio(1, 2), ratio(1, 3)],
            vec![ratio(1, 4), ratio(1, 6)],
        ];
        assert_eq!(rank(&a), 1);
    }

    proptest! {
        #[test]
        fn rank_nullity(entries in proptest::collection::vec(-3i64..4, 12)) {
            let a: Vec<Vec<Rational>> = entries.chunks(4).map(|r| r.iter().map(|v| int(*v)).collect()).collect();
            let ns = null_space(&a, 4);
            prop_assert_eq!(rank(&a) + ns.len(), 4);
            for v in &ns {
                for row in &a {
                    prop_assert_eq!(dot(row, v), int(0));
                }
            }
        }

        #[test]
        fn independent_rows_span(entries in proptest::collection::vec(-2i64..3, 15)) {
            let a: Vec<Vec<Rational>> = entries.chunks(3).map(|r| r.iter().map(|v| int(*v)).collect()).collect();
            let picked = independent_rows(&a);
            let sub: Vec<Vec<Rational>> = picked.iter().map(|&i| a[i].clone()).collect();
            prop_assert_eq!(rank(&sub), picked.len());
            prop_assert_eq!(picked.len(), rank(&a));
        }
    }
}
