//! Small exact linear algebra over `Z` and `Q`.
//!
//! Matrices here are tiny (dimension at most a handful), so the routines favor
//! clarity over asymptotics.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Divides a vector by the gcd of its entries. The zero vector is returned unchanged.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Scales a rational vector by a positive factor to the primitive integer vector
/// on the same ray.
pub fn clear_denominators(v: &[BigRational]) -> Vec<BigInt> {
    let l = v
        .iter()
        .fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    primitive(&ints)
}

fn to_rational(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| {
            debug_assert_eq!(r.len(), ncols);
            r.iter().cloned().map(BigRational::from_integer).collect()
        })
        .collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [Vec<BigRational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot = m[row].clone();
        for (r, line) in m.iter_mut().enumerate() {
            if r != row && !line[col].is_zero() {
                let f = line[col].clone();
                for (x, p) in line.iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Rank of an integer matrix given by rows, via fraction-free (Bareiss) elimination.
pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    let Some(ncols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut prev = BigInt::one();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in (r + 1)..m.len() {
            for j in (col + 1)..ncols {
                let v = (&m[r][col] * &m[i][j] - &m[i][col] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][col] = BigInt::zero();
        }
        prev = m[r][col].clone();
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Basis of the rational null space `{x : rows · x = 0}`, each vector scaled to
/// a primitive integer vector.
pub fn null_space(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let mut m = to_rational(rows, ncols);
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -m[i][f].clone();
            }
            clear_denominators(&v)
        })
        .collect()
}

/// Inverse of a square integer matrix, or `None` when it is singular.
pub fn inverse(matrix: &[Vec<BigInt>]) -> Option<Vec<Vec<BigRational>>> {
    let n = matrix.len();
    let mut aug: Vec<Vec<BigRational>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> =
                row.iter().cloned().map(BigRational::from_integer).collect();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    let pivots = rref(&mut aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Absolute value of the determinant of a square integer matrix.
pub fn abs_det(matrix: &[Vec<BigInt>]) -> BigInt {
    let n = matrix.len();
    let mut m = to_rational(matrix, n);
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigInt::zero();
        };
        m.swap(col, p);
        det *= m[col][col].clone();
        let pivot = m[col].clone();
        for line in m.iter_mut().skip(col + 1) {
            let f = &line[col] / &pivot[col];
            for (x, p) in line.iter_mut().zip(&pivot).skip(col) {
                *x -= &f * p;
            }
        }
    }
    det.abs().to_integer()
}
