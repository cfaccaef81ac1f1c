use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;

use super::cone::{ConeHRep, FinitelyGeneratedCone};
use super::form::IntegerForm;
use crate::error::{Error, Result};
use crate::feasibility::{feasible_point, Inequality};
use crate::linalg;
use crate::mapcore::LatticePoint;

/// Most forms the sign-vector construction accepts.
pub const MAX_ARRANGEMENT_FORMS: usize = 64;

/// An open cone `{x : signs_j · Φ_j(x) > 0 for all j}` of the arrangement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chamber {
    /// `±1` per form, in the order of the form list.
    pub signs: Vec<i8>,
    pub wild: bool,
    /// An integer point of the open chamber.
    pub interior: LatticePoint,
}

impl Chamber {
    /// True iff `x` lies in the closure of this chamber, given the signs of all
    /// forms at `x`: every nonzero entry of `point_signs` must agree.
    pub fn closure_admits(&self, point_signs: &[i8]) -> bool {
        self.signs
            .iter()
            .zip(point_signs)
            .all(|(&s, &t)| t == 0 || s == t)
    }
}

/// The angular sector swept counterclockwise from `start` to `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    pub start: [i64; 2],
    pub end: [i64; 2],
    pub interior: [i64; 2],
}

pub(crate) fn cross(u: [i64; 2], v: [i64; 2]) -> i128 {
    u[0] as i128 * v[1] as i128 - u[1] as i128 * v[0] as i128
}

fn upper_half(v: [i64; 2]) -> bool {
    v[1] > 0 || (v[1] == 0 && v[0] > 0)
}

/// Counterclockwise order of directions starting at the positive x-axis.
pub(crate) fn angle_cmp(u: [i64; 2], v: [i64; 2]) -> Ordering {
    match (upper_half(u), upper_half(v)) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => 0.cmp(&cross(u, v)),
    }
}

fn check_ranks(forms: &[IntegerForm], rank: usize) -> Result<()> {
    if let Some(f) = forms.iter().find(|f| f.rank() != rank) {
        return Err(Error::RankMismatch {
            expected: rank,
            found: f.rank(),
        });
    }
    Ok(())
}

/// The `2k` sectors cut out by `k` distinct lines through the origin, in
/// counterclockwise order.
pub fn angular_sectors(forms: &[IntegerForm]) -> Result<Vec<Sector>> {
    check_ranks(forms, 2)?;
    let mut rays: Vec<[i64; 2]> = Vec::with_capacity(2 * forms.len());
    for f in forms {
        let [a, b] = [f.coeffs()[0], f.coeffs()[1]];
        for r in [[-b, a], [b, -a]] {
            if !rays.contains(&r) {
                rays.push(r);
            }
        }
    }
    rays.sort_by(|u, v| angle_cmp(*u, *v));
    let n = rays.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (u, v) = (rays[i], rays[(i + 1) % n]);
        let interior = if n > 2 && cross(u, v) > 0 {
            [u[0] + v[0], u[1] + v[1]]
        } else {
            // sector of angle π
            [-u[1], u[0]]
        };
        out.push(Sector {
            start: u,
            end: v,
            interior,
        });
    }
    Ok(out)
}

fn signs_at(forms: &[IntegerForm], x: &[i64]) -> Vec<i8> {
    forms.iter().map(|f| f.eval_i64(x).signum() as i8).collect()
}

fn whole_space(rank: usize) -> Chamber {
    let mut interior = vec![0i64; rank];
    interior[0] = 1;
    Chamber {
        signs: Vec::new(),
        wild: false,
        interior: LatticePoint::from_i64s(&interior),
    }
}

/// All chambers of the arrangement, unclassified (`wild = false`).
///
/// Rank 2 walks the sorted lines; higher ranks split chambers one hyperplane
/// at a time, keeping each side whose open cone is rationally feasible.
pub fn build_chambers(forms: &[IntegerForm], rank: usize) -> Result<Vec<Chamber>> {
    if rank == 0 {
        return Err(Error::BadRank);
    }
    check_ranks(forms, rank)?;
    if forms.is_empty() {
        return Ok(vec![whole_space(rank)]);
    }
    if rank == 2 {
        return Ok(angular_sectors(forms)?
            .into_iter()
            .map(|s| Chamber {
                signs: signs_at(forms, &s.interior),
                wild: false,
                interior: LatticePoint::from_i64s(&s.interior),
            })
            .collect());
    }
    chambers_by_sign_vectors(forms, rank)
}

fn open_cone_system(forms: &[IntegerForm], signs: &[i8]) -> Vec<Inequality> {
    forms
        .iter()
        .zip(signs)
        .map(|(f, &s)| {
            Inequality::new(f.coeffs().iter().map(|&c| BigInt::from(c * s as i64)).collect(), 1)
        })
        .collect()
}

/// Chambers as feasible sign vectors, sorted lexicographically by sign vector.
/// Works in every rank.
pub fn chambers_by_sign_vectors(forms: &[IntegerForm], rank: usize) -> Result<Vec<Chamber>> {
    check_ranks(forms, rank)?;
    if forms.len() > MAX_ARRANGEMENT_FORMS {
        return Err(Error::TooManyForms {
            count: forms.len(),
            limit: MAX_ARRANGEMENT_FORMS,
        });
    }
    let mut cells: Vec<(Vec<i8>, LatticePoint)> = vec![(Vec::new(), whole_space(rank).interior)];
    for (j, form) in forms.iter().enumerate() {
        let mut next = Vec::with_capacity(2 * cells.len());
        for (signs, witness) in cells {
            let at_witness = form.eval(&witness);
            for s in [1i8, -1] {
                let mut sv = signs.clone();
                sv.push(s);
                let here = at_witness.sign();
                let side_has_witness = matches!(
                    (s, here),
                    (1, num_bigint::Sign::Plus) | (-1, num_bigint::Sign::Minus)
                );
                if side_has_witness {
                    next.push((sv, witness.clone()));
                    continue;
                }
                let sys = open_cone_system(&forms[..=j], &sv);
                if let Some(pt) = feasible_point(rank, &sys)? {
                    next.push((sv, LatticePoint::new(linalg::clear_denominators(&pt))));
                }
            }
        }
        cells = next;
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(cells
        .into_iter()
        .map(|(signs, interior)| Chamber {
            signs,
            wild: false,
            interior,
        })
        .collect())
}

/// Marks each chamber wild iff its open cone meets `cone`.
pub fn classify_wild(
    forms: &[IntegerForm],
    chambers: &[Chamber],
    cone: &FinitelyGeneratedCone,
) -> Result<Vec<Chamber>> {
    let hrep = cone.h_representation()?;
    chambers
        .iter()
        .map(|c| {
            let wild = meets(forms, c, &hrep)?;
            Ok(Chamber {
                wild,
                ..c.clone()
            })
        })
        .collect()
}

fn meets(forms: &[IntegerForm], chamber: &Chamber, hrep: &ConeHRep) -> Result<bool> {
    if hrep.contains(&chamber.interior) {
        return Ok(true);
    }
    let mut sys = open_cone_system(forms, &chamber.signs);
    sys.extend(hrep.inequalities());
    Ok(feasible_point(hrep.rank, &sys)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::form::forms;

    fn zsqrt2_forms() -> Vec<IntegerForm> {
        forms(&[
            &[0, 1],
            &[1, -4],
            &[1, -2],
            &[1, -1],
            &[1, 0],
            &[1, 1],
            &[1, 2],
            &[1, 4],
            &[2, -1],
            &[2, 1],
        ])
    }

    fn sorted(mut v: Vec<Chamber>) -> Vec<Vec<i8>> {
        v.sort_by(|a, b| a.signs.cmp(&b.signs));
        v.into_iter().map(|c| c.signs).collect()
    }

    #[test]
    fn chamber_counts() {
        assert_eq!(build_chambers(&zsqrt2_forms(), 2).unwrap().len(), 20);
        assert_eq!(build_chambers(&forms(&[&[1, 1]]), 2).unwrap().len(), 2);
        let quads = build_chambers(&forms(&[&[1, 0], &[0, 1]]), 2).unwrap();
        assert_eq!(sorted(quads), vec![vec![-1, -1], vec![-1, 1], vec![1, -1], vec![1, 1]]);
        assert_eq!(build_chambers(&[], 3).unwrap().len(), 1);
    }

    #[test]
    fn angular_and_sign_vector_paths_agree() {
        let cases = [
            zsqrt2_forms(),
            forms(&[&[1, 0]]),
            forms(&[&[1, 0], &[0, 1]]),
            forms(&[&[3, -1], &[1, 0], &[1, 1], &[5, 2]]),
        ];
        for fs in cases {
            let angular = build_chambers(&fs, 2).unwrap();
            assert_eq!(angular.len(), 2 * fs.len());
            let general = chambers_by_sign_vectors(&fs, 2).unwrap();
            assert_eq!(sorted(angular.clone()), sorted(general.clone()));
            for c in angular.iter().chain(&general) {
                let x = c.interior.to_i64s().unwrap();
                assert_eq!(signs_at(&fs, &x), c.signs);
            }
        }
    }

    #[test]
    fn three_dimensional_arrangements() {
        // coordinate planes: 8 octants
        let cs = build_chambers(&forms(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]), 3).unwrap();
        assert_eq!(cs.len(), 8);
        // four generic planes through the origin in R^3 cut 14 regions
        let cs = build_chambers(
            &forms(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]]),
            3,
        )
        .unwrap();
        assert_eq!(cs.len(), 14);
        for c in &cs {
            let x = c.interior.to_i64s().unwrap();
            assert_eq!(
                signs_at(&forms(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]]), &x),
                c.signs
            );
        }
    }

    #[test]
    fn guard_on_form_count() {
        let many: Vec<IntegerForm> = (1..=65)
            .map(|i| IntegerForm::new(&[1, i, 0]).unwrap())
            .collect();
        assert!(matches!(
            build_chambers(&many, 3),
            Err(Error::TooManyForms { count: 65, .. })
        ));
    }

    #[test]
    fn zsqrt2_wild_sectors() {
        let fs = zsqrt2_forms();
        let shifts = [
            LatticePoint::from_i64s(&[1, 0]),
            LatticePoint::from_i64s(&[0, 1]),
            LatticePoint::from_i64s(&[3, 1]),
        ];
        let cone = FinitelyGeneratedCone::new(2, &shifts).unwrap();
        let cs = classify_wild(&fs, &build_chambers(&fs, 2).unwrap(), &cone).unwrap();
        let wild: Vec<&Chamber> = cs.iter().filter(|c| c.wild).collect();
        assert_eq!(wild.len(), 5);
        for c in wild {
            let x = c.interior.to_i64s().unwrap();
            assert!(x[0] > 0 && x[1] > 0);
        }
    }

    #[test]
    fn quadrant_wildness() {
        let fs = forms(&[&[1, 0], &[0, 1]]);
        let cone = FinitelyGeneratedCone::new(
            2,
            &[LatticePoint::from_i64s(&[1, 2]), LatticePoint::from_i64s(&[2, 1])],
        )
        .unwrap();
        let cs = classify_wild(&fs, &build_chambers(&fs, 2).unwrap(), &cone).unwrap();
        let wild: Vec<Vec<i8>> = cs.iter().filter(|c| c.wild).map(|c| c.signs.clone()).collect();
        assert_eq!(wild, vec![vec![1, 1]]);
    }

    #[test]
    fn closure_admits() {
        let c = Chamber {
            signs: vec![1, -1, 1],
            wild: true,
            interior: LatticePoint::from_i64s(&[0, 0]),
        };
        assert!(c.closure_admits(&[1, 0, 1]));
        assert!(c.closure_admits(&[0, 0, 0]));
        assert!(!c.closure_admits(&[-1, 0, 1]));
    }
}
