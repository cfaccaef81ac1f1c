use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg;
use crate::mapcore::{shift_span_rank, CollatzMap, LatticePoint, ResidueClass};

/// A nonzero primitive integer covector `a`, read as the form `Φ(x) = ⟨a, x⟩`.
///
/// Primitivity gives `Φ(Z^e) = Z`. Forms that stand for a hyperplane are kept in
/// canonical sign (first nonzero coefficient positive), see [`IntegerForm::canonical`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerForm(Vec<i64>);

impl IntegerForm {
    /// Divides by the gcd of the coefficients; the sign is kept.
    pub fn new(coeffs: &[i64]) -> Result<Self> {
        let g = coeffs.iter().fold(0i64, |g, &c| g.gcd(&c));
        if g == 0 {
            return Err(Error::InvalidParameter("a form needs a nonzero coefficient".into()));
        }
        Ok(IntegerForm(coeffs.iter().map(|c| c / g).collect()))
    }

    pub fn from_bigints(coeffs: &[BigInt]) -> Result<Self> {
        let prim = linalg::primitive(coeffs);
        let small = prim
            .iter()
            .map(|c| c.to_i64().ok_or_else(|| Error::CoefficientOverflow(format!("{c}"))))
            .collect::<Result<Vec<_>>>()?;
        IntegerForm::new(&small)
    }

    /// The same hyperplane with first nonzero coefficient positive.
    pub fn canonical(&self) -> IntegerForm {
        let first = self.0.iter().find(|c| **c != 0).copied().unwrap_or(1);
        if first < 0 {
            IntegerForm(self.0.iter().map(|c| -c).collect())
        } else {
            self.clone()
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.0.iter().find(|c| **c != 0).is_some_and(|c| *c > 0)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn eval(&self, x: &LatticePoint) -> BigInt {
        self.0
            .iter()
            .zip(x.coords())
            .map(|(a, c)| c * a)
            .sum()
    }

    pub fn eval_i64(&self, x: &[i64]) -> i128 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &c)| a as i128 * c as i128)
            .sum()
    }

    pub fn eval_rational(&self, x: &[BigRational]) -> BigRational {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, c)| c * BigInt::from(a))
            .sum()
    }

    pub fn to_bigints(&self) -> Vec<BigInt> {
        self.0.iter().map(|&c| BigInt::from(c)).collect()
    }
}

impl fmt::Display for IntegerForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Smallest nonzero `|Φ(x)|` over the coset `ω`: with `c = Φ(rep) mod d`, this is
/// `d` when `c = 0` and `min(c, d - c)` otherwise, since `Φ(ω) = c + dZ`.
pub fn min_nonzero_abs(form: &IntegerForm, omega: &ResidueClass, d: u64) -> u64 {
    let value: BigInt = form
        .coeffs()
        .iter()
        .zip(omega.rep())
        .map(|(&a, &r)| BigInt::from(a) * r)
        .sum();
    let c = value.mod_floor(&BigInt::from(d)).to_u64().expect("reduced below d");
    if c == 0 {
        d
    } else {
        c.min(d - c)
    }
}

/// True iff `m_ω · min|Φ(ω) ∖ 0| > |Φ(r_ω)|` for every residue class `ω`, i.e.
/// `|m_ω Φ(x)| > |Φ(r_ω)|` for every `x ∈ ω` off the hyperplane.
pub fn is_separating(form: &IntegerForm, map: &CollatzMap) -> bool {
    let d = map.modulus();
    map.residues().all(|omega| {
        let lhs = map.multiplier(&omega) * BigInt::from(min_nonzero_abs(form, &omega, d));
        lhs > form.eval(map.shift(&omega)).abs()
    })
}

/// Residue data narrowed to `i128` for the enumeration inner loop.
struct SmallTable {
    d: i128,
    reps: Vec<Vec<i128>>,
    multipliers: Vec<i128>,
    shifts: Vec<Vec<i128>>,
}

fn narrow(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .filter(|v| v.unsigned_abs() < (1u128 << 100))
        .ok_or_else(|| Error::CoefficientOverflow(format!("{x}")))
}

impl SmallTable {
    fn new(map: &CollatzMap) -> Result<Self> {
        let mut reps = Vec::new();
        let mut multipliers = Vec::new();
        let mut shifts = Vec::new();
        for w in map.residues() {
            reps.push(w.rep().iter().map(|&c| c as i128).collect());
            multipliers.push(narrow(map.multiplier(&w))?);
            shifts.push(
                map.shift(&w)
                    .coords()
                    .iter()
                    .map(narrow)
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(SmallTable {
            d: map.modulus() as i128,
            reps,
            multipliers,
            shifts,
        })
    }

    fn is_separating(&self, a: &[i64]) -> bool {
        let dot = |v: &[i128]| -> Option<i128> {
            a.iter()
                .zip(v)
                .try_fold(0i128, |acc, (&x, &y)| acc.checked_add((x as i128).checked_mul(y)?))
        };
        for ((rep, &m), r) in self.reps.iter().zip(&self.multipliers).zip(&self.shifts) {
            let (Some(c), Some(v)) = (dot(rep), dot(r)) else {
                return false;
            };
            let c = c.rem_euclid(self.d);
            let min_abs = if c == 0 { self.d } else { c.min(self.d - c) };
            match m.checked_mul(min_abs) {
                Some(lhs) if lhs > v.abs() => {}
                Some(_) => return false,
                None => {}
            }
        }
        true
    }
}

/// Largest number of `e`-subsets of shifts scored when choosing the search box.
const MAX_BASIS_CANDIDATES: usize = 20_000;
/// Largest number of integer vectors the enumeration will visit.
pub const MAX_BOX_POINTS: u128 = 50_000_000;

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Coefficient bounds `|a_j| <= B_j` that every separating form satisfies.
///
/// Each separating form has `|⟨a, r_ω⟩| <= d·m_ω - 1`. For `e` independent
/// shifts `G` this bounds `a = G^{-T} v` coordinatewise; the basis giving the
/// smallest box is used.
pub fn separating_search_box(map: &CollatzMap) -> Result<Vec<i64>> {
    let e = map.rank();
    if shift_span_rank(map) < e {
        return Err(Error::ShiftsDontSpan);
    }
    let d = map.modulus_big();
    // distinct nonzero shifts with their tightest weight d·m - 1
    let mut cands: Vec<(Vec<BigInt>, BigInt)> = Vec::new();
    for w in map.residues() {
        let r = map.shift(&w);
        if r.is_zero() {
            continue;
        }
        let weight = &d * map.multiplier(&w) - 1u32;
        match cands.iter_mut().find(|(v, _)| v.as_slice() == r.coords()) {
            Some((_, old)) if *old > weight => *old = weight,
            Some(_) => {}
            None => cands.push((r.coords().to_vec(), weight)),
        }
    }

    let bounds_for = |subset: &[usize]| -> Option<Vec<BigInt>> {
        let g: Vec<Vec<BigInt>> = (0..e)
            .map(|row| subset.iter().map(|&i| cands[i].0[row].clone()).collect())
            .collect();
        let inv = linalg::inverse(&g)?;
        // a_j = Σ_i v_i (G^{-1})_{ij}
        Some(
            (0..e)
                .map(|j| {
                    let s: BigRational = subset
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| {
                            inv[i][j].abs() * BigRational::from_integer(cands[c].1.clone())
                        })
                        .sum();
                    s.floor().to_integer()
                })
                .collect(),
        )
    };
    let volume = |b: &[BigInt]| -> BigInt { b.iter().map(|x| x * 2u32 + 1u32).product() };

    let mut best: Option<(BigInt, Vec<BigInt>)> = None;
    let mut visited = 0usize;
    for_each_subset(cands.len(), e, |subset| {
        visited += 1;
        if let Some(b) = bounds_for(subset) {
            let v = volume(&b);
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, b));
            }
        }
        visited < MAX_BASIS_CANDIDATES
    });
    let (_, bounds) = best.ok_or(Error::ShiftsDontSpan)?;
    bounds
        .iter()
        .map(|b| b.to_i64().ok_or_else(|| Error::CoefficientOverflow(format!("{b}"))))
        .collect()
}

/// All canonical primitive separating forms with `|a_j| <= bounds[j]`.
pub fn separating_forms_in_box(map: &CollatzMap, bounds: &[i64]) -> Result<Vec<IntegerForm>> {
    let e = map.rank();
    if bounds.len() != e {
        return Err(Error::RankMismatch {
            expected: e,
            found: bounds.len(),
        });
    }
    let points: u128 = bounds
        .iter()
        .map(|&b| 2 * b.unsigned_abs() as u128 + 1)
        .try_fold(1u128, |acc, s| acc.checked_mul(s))
        .unwrap_or(u128::MAX);
    if points > MAX_BOX_POINTS {
        return Err(Error::SizeGuard {
            what: "separating-form search box",
            size: points,
            limit: MAX_BOX_POINTS,
        });
    }
    let table = SmallTable::new(map)?;
    let mut out = Vec::new();
    let mut a: Vec<i64> = bounds.iter().map(|b| -b.abs()).collect();
    loop {
        let first = a.iter().find(|c| **c != 0);
        if first.is_some_and(|c| *c > 0)
            && a.iter().fold(0i64, |g, c| g.gcd(c)) == 1
            && table.is_separating(&a)
        {
            out.push(IntegerForm(a.clone()));
        }
        // odometer
        let mut i = e;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if a[i] < bounds[i].abs() {
                a[i] += 1;
                for (c, b) in a[i + 1..].iter_mut().zip(&bounds[i + 1..]) {
                    *c = -b.abs();
                }
                break;
            }
        }
    }
}

/// The complete list of separating hyperplanes, one canonical primitive form each,
/// in lexicographic order of coefficients.
pub fn enumerate_separating_forms(map: &CollatzMap) -> Result<Vec<IntegerForm>> {
    let bounds = separating_search_box(map)?;
    let mut forms = separating_forms_in_box(map, &bounds)?;
    forms.sort();
    debug_assert!(forms.iter().all(|f| is_separating(f, map)));
    Ok(forms)
}

/// Returns `vec![…]` of forms from literal coefficient rows; used by tests.
#[cfg(test)]
pub(crate) fn forms(rows: &[&[i64]]) -> Vec<IntegerForm> {
    rows.iter().map(|r| IntegerForm::new(r).unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::catalog::{build_section4_map, build_zsqrt2_map, Section4Params};

    fn w(rep: &[u64]) -> ResidueClass {
        ResidueClass::new(rep.to_vec(), 2).unwrap()
    }

    #[test]
    fn form_normalization() {
        let f = IntegerForm::new(&[-2, 4]).unwrap();
        assert_eq!(f.coeffs(), &[-1, 2]);
        assert!(!f.is_canonical());
        assert_eq!(f.canonical().coeffs(), &[1, -2]);
        assert_eq!(IntegerForm::new(&[0, -3]).unwrap().canonical().coeffs(), &[0, 1]);
        assert!(IntegerForm::new(&[0, 0]).is_err());
    }

    #[test]
    fn min_nonzero_abs_examples() {
        let f10 = IntegerForm::new(&[1, 0]).unwrap();
        let f11 = IntegerForm::new(&[1, 1]).unwrap();
        assert_eq!(min_nonzero_abs(&f10, &w(&[1, 0]), 2), 1);
        assert_eq!(min_nonzero_abs(&f11, &w(&[1, 1]), 2), 2);
        assert_eq!(min_nonzero_abs(&f10, &w(&[0, 1]), 2), 2);
        let w3 = ResidueClass::new(vec![2, 2], 5).unwrap();
        // Φ(rep) = 4 ≡ 4 mod 5 -> min(4, 1)
        assert_eq!(min_nonzero_abs(&f11, &w3, 5), 1);
    }

    #[test]
    fn min_nonzero_abs_matches_brute_force() {
        // smallest nonzero |Φ(rep + d v)| over a window of lattice translates
        for d in 2..=5u64 {
            for a in [[1i64, 0], [1, 1], [2, -3], [0, 1], [3, 5]] {
                let f = IntegerForm::new(&a).unwrap();
                for r0 in 0..d {
                    for r1 in 0..d {
                        let omega = ResidueClass::new(vec![r0, r1], d).unwrap();
                        let mut best = i64::MAX;
                        for v0 in -6i64..=6 {
                            for v1 in -6i64..=6 {
                                let x = [r0 as i64 + d as i64 * v0, r1 as i64 + d as i64 * v1];
                                let val = f.eval_i64(&x).abs() as i64;
                                if val != 0 {
                                    best = best.min(val);
                                }
                            }
                        }
                        assert_eq!(min_nonzero_abs(&f, &omega, d) as i64, best);
                    }
                }
            }
        }
    }

    #[test]
    fn separating_examples() {
        let map = build_zsqrt2_map();
        assert!(is_separating(&IntegerForm::new(&[1, 1]).unwrap(), &map));
        assert!(!is_separating(&IntegerForm::new(&[1, 3]).unwrap(), &map));
        assert!(is_separating(&IntegerForm::new(&[0, 1]).unwrap(), &map));
    }

    #[test]
    fn zsqrt2_has_ten_separating_hyperplanes() {
        let map = build_zsqrt2_map();
        let got = enumerate_separating_forms(&map).unwrap();
        let mut expected = forms(&[
            &[1, 1],
            &[1, -1],
            &[1, 0],
            &[1, 2],
            &[1, -2],
            &[1, 4],
            &[1, -4],
            &[0, 1],
            &[2, 1],
            &[2, -1],
        ]);
        expected.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn section4_contains_boundary_lines() {
        let map = build_section4_map(Section4Params::new(3, 1).unwrap());
        let got = enumerate_separating_forms(&map).unwrap();
        assert!(got.contains(&IntegerForm::new(&[3, -1]).unwrap()));
        assert!(got.contains(&IntegerForm::new(&[1, 0]).unwrap()));
    }

    #[test]
    fn doubled_box_finds_nothing_new() {
        let mut maps = alloc::vec![build_zsqrt2_map()];
        for d in 2..=4 {
            maps.push(build_section4_map(Section4Params::new(d, 1).unwrap()));
        }
        for map in maps {
            let found = enumerate_separating_forms(&map).unwrap();
            let bounds: Vec<i64> = separating_search_box(&map)
                .unwrap()
                .iter()
                .map(|b| 2 * b + 1)
                .collect();
            let mut wide = separating_forms_in_box(&map, &bounds).unwrap();
            wide.sort();
            assert_eq!(found, wide);
        }
    }

    #[test]
    fn non_spanning_shifts_are_rejected() {
        use crate::mapcore::{validate_map, MapDescription, MapEntry};
        let degenerate = validate_map(&MapDescription {
            rank: 2,
            modulus: 2,
            entries: vec![
                MapEntry::from_i64s(&[0, 0], 1, &[0, 0]),
                MapEntry::from_i64s(&[1, 0], 3, &[1, 0]),
                MapEntry::from_i64s(&[0, 1], 2, &[0, 0]),
                MapEntry::from_i64s(&[1, 1], 2, &[0, 0]),
            ],
        })
        .unwrap();
        assert_eq!(
            enumerate_separating_forms(&degenerate),
            Err(Error::ShiftsDontSpan)
        );
    }
}
