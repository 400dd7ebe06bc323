//! Exact integer linear algebra on small lattices.
//!
//! Matrices are row-major `Vec<Vec<i64>>`. Determinants use fraction-free
//! (Bareiss) elimination in `i128`.

use num_integer::Integer;

use crate::rational::{int, Rational};

pub type IntMatrix = Vec<Vec<i64>>;

pub fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

pub fn is_primitive(v: &[i64]) -> bool {
    gcd_all(v) == 1
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Matrix whose columns are the given vectors.
pub fn from_columns(cols: &[&[i64]]) -> IntMatrix {
    let n = cols.first().map_or(0, |c| c.len());
    (0..n)
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect()
}

pub fn transpose(m: &[Vec<i64>]) -> IntMatrix {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|r| r[j]).collect())
        .collect()
}

pub fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|r| dot(r, v)).collect()
}

/// `row * m`, i.e. the linear form `row` composed with the map `m`.
pub fn row_mat(row: &[i64], m: &[Vec<i64>]) -> Vec<i64> {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| row.iter().zip(m).map(|(a, r)| a * r[j]).sum())
        .collect()
}

/// Determinant of a square matrix by Bareiss elimination.
pub fn det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
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

fn minor(m: &[Vec<i64>], skip_row: usize, skip_col: usize) -> IntMatrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != skip_col)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect()
}

/// Adjugate matrix, so that `m * adj(m) = det(m) * I`.
pub fn adjugate(m: &[Vec<i64>]) -> Vec<Vec<i128>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    let mut adj = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[j][i] = s * det(&minor(m, i, j));
        }
    }
    adj
}

/// Inverse of a unimodular matrix; `None` unless `|det| = 1`.
pub fn unimodular_inverse(m: &[Vec<i64>]) -> Option<IntMatrix> {
    let d = det(m);
    if d.abs() != 1 {
        return None;
    }
    Some(
        adjugate(m)
            .into_iter()
            .map(|r| r.into_iter().map(|x| (x * d) as i64).collect())
            .collect(),
    )
}

/// Exact rational inverse; `None` for singular matrices.
pub fn rational_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<Rational>>> {
    let d = det(m);
    if d == 0 {
        return None;
    }
    let d = Rational::from_integer(d.into());
    Some(
        adjugate(m)
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|x| Rational::from_integer(x.into()) / &d)
                    .collect()
            })
            .collect(),
    )
}

/// Generator of the kernel of an `(n-1) x n` matrix of full rank, as the
/// vector of signed maximal minors. Zero when the rank is deficient.
pub fn kernel_line(rows: &[Vec<i64>], n: usize) -> Vec<i128> {
    debug_assert_eq!(rows.len() + 1, n);
    (0..n)
        .map(|k| {
            let sub: IntMatrix = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let s = if k % 2 == 0 { 1 } else { -1 };
            s * det(&sub)
        })
        .collect()
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn rational_row(row: &[i64]) -> Vec<Rational> {
    row.iter().map(|&x| int(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_determinants() {
        assert_eq!(det(&[vec![1, 1], vec![0, 2]]), 2);
        assert_eq!(det(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(det(&[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 1]]), 0);
        assert_eq!(det(&[vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]), -1);
    }

    #[test]
    fn kernel_of_plane() {
        let k = kernel_line(&[vec![1, 1, 0], vec![0, 1, 1]], 3);
        assert_eq!(k, vec![1, -1, 1]);
    }

    fn brute_det(m: &[Vec<i64>]) -> i128 {
        if m.len() == 1 {
            return m[0][0] as i128;
        }
        (0..m.len())
            .map(|j| {
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] as i128 * brute_det(&minor(m, 0, j))
            })
            .sum()
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor_expansion(entries in proptest::collection::vec(-6i64..=6, 16)) {
            let m: IntMatrix = entries.chunks(4).map(|c| c.to_vec()).collect();
            prop_assert_eq!(det(&m), brute_det(&m));
        }

        #[test]
        fn adjugate_inverts(entries in proptest::collection::vec(-5i64..=5, 9)) {
            let m: IntMatrix = entries.chunks(3).map(|c| c.to_vec()).collect();
            let d = det(&m);
            let adj = adjugate(&m);
            for i in 0..3 {
                for j in 0..3 {
                    let s: i128 = (0..3).map(|k| m[i][k] as i128 * adj[k][j]).sum();
                    prop_assert_eq!(s, if i == j { d } else { 0 });
                }
            }
        }
    }
}
