//! Exact integer row reduction: Hermite normal form, integer kernels and
//! lattice saturation. Generic over the integer type so callers can pick
//! `i128` for bounded inputs and `BigInt` where entries may grow.

use num_integer::Integer;
use num_traits::Signed;

pub type IntMatrix<T> = Vec<Vec<T>>;

fn sub_multiple<T: Integer + Signed + Clone>(m: &mut IntMatrix<T>, target: usize, src: usize, q: &T) {
    let src_row = m[src].clone();
    for (a, b) in m[target].iter_mut().zip(src_row.iter()) {
        *a = a.clone() - q.clone() * b.clone();
    }
}

/// Reduces `m` in place to row-style Hermite normal form with respect to its
/// first `pivot_cols` columns and returns the rank found there.
///
/// Pivots are positive, entries above a pivot lie in `[0, pivot)`, entries
/// below a pivot vanish. Rows past the rank are zero on the pivot columns;
/// any trailing columns are carried along by the same unimodular row
/// operations.
pub fn row_hnf<T: Integer + Signed + Clone>(m: &mut IntMatrix<T>, pivot_cols: usize) -> usize {
    let rows = m.len();
    let mut cur = 0;
    for c in 0..pivot_cols {
        if cur == rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for r in cur..rows {
                if m[r][c].is_zero() {
                    continue;
                }
                best = match best {
                    Some(b) if m[b][c].abs() <= m[r][c].abs() => Some(b),
                    _ => Some(r),
                };
            }
            let Some(b) = best else { break };
            m.swap(cur, b);
            let mut settled = true;
            for r in cur + 1..rows {
                if m[r][c].is_zero() {
                    continue;
                }
                let q = m[r][c].div_floor(&m[cur][c]);
                sub_multiple(m, r, cur, &q);
                if !m[r][c].is_zero() {
                    settled = false;
                }
            }
            if settled {
                break;
            }
        }
        if m[cur][c].is_zero() {
            continue;
        }
        if m[cur][c].is_negative() {
            for a in m[cur].iter_mut() {
                *a = -a.clone();
            }
        }
        for r in 0..cur {
            let q = m[r][c].div_floor(&m[cur][c]);
            if !q.is_zero() {
                sub_multiple(m, r, cur, &q);
            }
        }
        cur += 1;
    }
    cur
}

/// Basis of the integer kernel `{x ∈ ℤⁿ : rows · x = 0}`.
pub fn integer_kernel<T: Integer + Signed + Clone>(rows: &[Vec<T>], n: usize) -> IntMatrix<T> {
    let m = rows.len();
    let mut aug: IntMatrix<T> = (0..n)
        .map(|i| {
            let mut row: Vec<T> = rows.iter().map(|r| r[i].clone()).collect();
            row.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            row
        })
        .collect();
    let rank = row_hnf(&mut aug, m);
    aug[rank..].iter().map(|r| r[m..].to_vec()).collect()
}

/// Rank of `rows` and the HNF basis of the saturated lattice
/// `span_ℚ(rows) ∩ ℤⁿ`.
pub fn saturated_hnf<T: Integer + Signed + Clone>(rows: &[Vec<T>], n: usize) -> (usize, IntMatrix<T>) {
    let mut work: IntMatrix<T> = rows.to_vec();
    let rank = row_hnf(&mut work, n);
    if rank == 0 {
        return (0, Vec::new());
    }
    work.truncate(rank);
    let complement = integer_kernel(&work, n);
    let mut sat = if complement.is_empty() {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect()
    } else {
        integer_kernel(&complement, n)
    };
    let r = row_hnf(&mut sat, n);
    debug_assert_eq!(r, rank);
    sat.truncate(r);
    (rank, sat)
}

/// Fraction-free (Bareiss) determinant of a square matrix.
pub fn determinant(mut a: IntMatrix<i128>) -> i128 {
    let n = a.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// gcd of the maximal minors of a `d × n` integer matrix given row-major.
/// A full-rank basis spans a saturated lattice exactly when this is 1.
pub fn maximal_minor_gcd(basis: &[i64], d: usize, n: usize) -> i128 {
    let mut g: i128 = 0;
    for cols in combinations(n, d) {
        let sub: IntMatrix<i128> = (0..d)
            .map(|i| cols.iter().map(|&j| basis[i * n + j] as i128).collect())
            .collect();
        g = g.gcd(&determinant(sub));
        if g == 1 {
            break;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn big(rows: &[&[i64]]) -> IntMatrix<BigInt> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn hnf_of_small_matrix() {
        let mut m = big(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let rank = row_hnf(&mut m, 3);
        assert_eq!(rank, 3);
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate().take(i) {
                assert_eq!(*x, BigInt::from(0), "entry ({i},{j}) below pivot");
            }
            assert!(row[i] > BigInt::from(0));
        }
        let det: BigInt = (0..3).map(|i| m[i][i].clone()).product();
        assert_eq!(det, BigInt::from(144));
    }

    #[test]
    fn kernel_of_single_row() {
        let k = integer_kernel(&big(&[&[1, 1, 1]]), 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s: BigInt = v.iter().cloned().sum();
            assert_eq!(s, BigInt::from(0));
        }
    }

    #[test]
    fn saturation_divides_out_index() {
        let (rank, sat) = saturated_hnf(&big(&[&[2, 0, 0], &[0, 1, 0]]), 3);
        assert_eq!(rank, 2);
        assert_eq!(sat, big(&[&[1, 0, 0], &[0, 1, 0]]));
        let (rank, sat) = saturated_hnf(&big(&[&[2, 4], &[3, 6]]), 2);
        assert_eq!(rank, 1);
        assert_eq!(sat, big(&[&[1, 2]]));
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(3, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let a = vec![vec![2i128, -1, 3], vec![0, 4, 5], vec![1, 1, -2]];
        // cofactor expansion along the first row: -26 - 5 - 12
        assert_eq!(determinant(a), -43);
        assert_eq!(maximal_minor_gcd(&[2, 0, 0, 0, 1, 0], 2, 3), 2);
        assert_eq!(maximal_minor_gcd(&[1, 0, -1, 0, 1, -1], 2, 3), 1);
        assert_eq!(maximal_minor_gcd(&[2, 0, 0, 0, 2, 0], 2, 3), 4);
    }
}
