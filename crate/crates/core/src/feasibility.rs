//! Exact feasibility of systems `A y >= b` over the rationals by
//! Fourier-Motzkin elimination, with back-substitution for a witness point.
//!
//! The systems in this crate live in dimension at most four, so elimination is
//! cheap in practice; a row-count guard turns pathological blowup into an
//! error instead of a hang.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Largest number of rows an intermediate system may reach.
pub const MAX_ROWS: usize = 200_000;

/// One constraint `coeffs · y >= rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub coeffs: Vec<BigInt>,
    pub rhs: BigRational,
}

impl Inequality {
    pub fn new(coeffs: Vec<BigInt>, rhs: impl Into<BigInt>) -> Self {
        Inequality {
            coeffs,
            rhs: BigRational::from_integer(rhs.into()),
        }
    }

    pub fn from_i64(coeffs: &[i64], rhs: i64) -> Self {
        Inequality::new(coeffs.iter().map(|&c| BigInt::from(c)).collect(), rhs)
    }

    /// `coeffs · y >= 0` and `coeffs · y <= 0`.
    pub fn equality(coeffs: Vec<BigInt>) -> [Inequality; 2] {
        let neg = coeffs.iter().map(|c| -c).collect();
        [Inequality::new(coeffs, 0), Inequality::new(neg, 0)]
    }

    pub fn holds_at(&self, y: &[BigRational]) -> bool {
        let lhs: BigRational = self
            .coeffs
            .iter()
            .zip(y)
            .map(|(c, v)| v * c)
            .sum();
        lhs >= self.rhs
    }
}

/// Normalized row: primitive coefficient vector and rational bound.
type Rows = BTreeMap<Vec<BigInt>, BigRational>;

enum Normalized {
    Trivial,
    Contradiction,
    Row(Vec<BigInt>, BigRational),
}

fn normalize(coeffs: Vec<BigInt>, rhs: BigRational) -> Normalized {
    let g = coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() {
        return if rhs.is_positive() {
            Normalized::Contradiction
        } else {
            Normalized::Trivial
        };
    }
    let coeffs = coeffs.into_iter().map(|c| c / &g).collect();
    Normalized::Row(coeffs, rhs / BigRational::from_integer(g))
}

fn insert(rows: &mut Rows, coeffs: Vec<BigInt>, rhs: BigRational) -> bool {
    match normalize(coeffs, rhs) {
        Normalized::Trivial => true,
        Normalized::Contradiction => false,
        Normalized::Row(c, b) => {
            match rows.get_mut(&c) {
                Some(old) if *old >= b => {}
                Some(old) => *old = b,
                None => {
                    rows.insert(c, b);
                }
            }
            true
        }
    }
}

/// Returns `Some(y)` with `A y >= b` for every row, or `None` when the system
/// has no rational solution.
pub fn feasible_point(dim: usize, system: &[Inequality]) -> Result<Option<Vec<BigRational>>> {
    let mut top = Rows::new();
    for ineq in system {
        debug_assert_eq!(ineq.coeffs.len(), dim);
        if !insert(&mut top, ineq.coeffs.clone(), ineq.rhs.clone()) {
            return Ok(None);
        }
    }

    // levels[k] only involves variables 0..k
    let mut levels: Vec<Rows> = Vec::with_capacity(dim + 1);
    levels.push(top);
    for var in (0..dim).rev() {
        let current = levels.last().expect("nonempty");
        let mut next = Rows::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for (c, b) in current {
            match c[var].sign() {
                num_bigint::Sign::Plus => lower.push((c, b)),
                num_bigint::Sign::Minus => upper.push((c, b)),
                num_bigint::Sign::NoSign => {
                    next.insert(c.clone(), b.clone());
                }
            }
        }
        let combos = lower.len().saturating_mul(upper.len()) + next.len();
        if combos > MAX_ROWS {
            return Err(Error::FeasibilityBlowup(MAX_ROWS));
        }
        for (lc, lb) in &lower {
            for (uc, ub) in &upper {
                let p = &lc[var];
                let n = -&uc[var];
                let coeffs: Vec<BigInt> = lc
                    .iter()
                    .zip(uc.iter())
                    .map(|(a, b)| a * &n + b * p)
                    .collect();
                let rhs = *lb * BigRational::from_integer(n.clone())
                    + *ub * BigRational::from_integer(p.clone());
                if !insert(&mut next, coeffs, rhs) {
                    return Ok(None);
                }
            }
        }
        levels.push(next);
    }
    // levels = [S_dim, S_{dim-1}, ..., S_0]; S_0 has only trivial rows, already checked.
    levels.reverse();

    let mut point: Vec<BigRational> = Vec::with_capacity(dim);
    for var in 0..dim {
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        for (c, b) in &levels[var + 1] {
            if c[var].is_zero() {
                continue;
            }
            let partial: BigRational = c[..var]
                .iter()
                .zip(&point)
                .map(|(ci, v)| v * ci)
                .sum();
            let bound = (b - partial) / BigRational::from_integer(c[var].clone());
            if c[var].is_positive() {
                if lo.as_ref().is_none_or(|l| bound > *l) {
                    lo = Some(bound);
                }
            } else if hi.as_ref().is_none_or(|h| bound < *h) {
                hi = Some(bound);
            }
        }
        let value = match (lo, hi) {
            (Some(l), Some(h)) => {
                debug_assert!(l <= h);
                let c = l.ceil();
                if c <= h {
                    c
                } else {
                    (l + h) / BigRational::from_integer(2.into())
                }
            }
            (Some(l), None) => l.ceil(),
            (None, Some(h)) => h.floor(),
            (None, None) => BigRational::zero(),
        };
        point.push(value);
    }
    debug_assert!(system.iter().all(|i| i.holds_at(&point)));
    Ok(Some(point))
}

pub fn is_feasible(dim: usize, system: &[Inequality]) -> Result<bool> {
    Ok(feasible_point(dim, system)?.is_some())
}

/// Smallest positive integer `t` so that `t · v` is integral.
pub fn common_denominator(v: &[BigRational]) -> BigInt {
    v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
}
