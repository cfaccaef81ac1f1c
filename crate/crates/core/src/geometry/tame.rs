use alloc::vec::Vec;

use num_rational::BigRational;

use super::chambers::{build_chambers, classify_wild, Chamber};
use super::cone::{ConeHRep, FinitelyGeneratedCone};
use super::form::{enumerate_separating_forms, IntegerForm};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mapcore::{is_relatively_prime_type, strictly_positive_witness, CollatzMap, LatticePoint};

/// The wild/tame decomposition of a map.
///
/// The wild cone is `B_r^-` together with the closures of all chambers of the
/// separating arrangement that meet `B_r^+`; the tame cone is its complement.
/// Lattice points of the tame cone have divergent trajectories.
#[derive(Debug, Clone)]
pub struct TameCone {
    rank: usize,
    forms: Vec<IntegerForm>,
    chambers: Vec<Chamber>,
    shift_cone: FinitelyGeneratedCone,
    minus: ConeHRep,
    wild: Vec<usize>,
}

impl TameCone {
    /// Full pipeline for a map of relatively prime type with acute shifts.
    pub fn build(map: &CollatzMap) -> Result<Self> {
        if !is_relatively_prime_type(map) {
            return Err(Error::NotRelativelyPrime);
        }
        if strictly_positive_witness(map.shifts(), map.rank())?.is_none() {
            return Err(Error::NotAcute);
        }
        let forms = enumerate_separating_forms(map)?;
        TameCone::from_parts(map.rank(), forms, map.shifts())
    }

    /// Decomposition for an explicit hyperplane list and shift set.
    pub fn from_parts(rank: usize, forms: Vec<IntegerForm>, shifts: &[LatticePoint]) -> Result<Self> {
        let shift_cone = FinitelyGeneratedCone::new(rank, shifts)?;
        let chambers = classify_wild(&forms, &build_chambers(&forms, rank)?, &shift_cone)?;
        let minus = shift_cone.h_representation()?.negated();
        let wild = chambers
            .iter()
            .enumerate()
            .filter(|(_, c)| c.wild)
            .map(|(i, _)| i)
            .collect();
        Ok(TameCone {
            rank,
            forms,
            chambers,
            shift_cone,
            minus,
            wild,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn forms(&self) -> &[IntegerForm] {
        &self.forms
    }

    pub fn chambers(&self) -> &[Chamber] {
        &self.chambers
    }

    pub fn wild_chambers(&self) -> impl Iterator<Item = &Chamber> {
        self.wild.iter().map(|&i| &self.chambers[i])
    }

    /// `B_r^+`.
    pub fn shift_cone(&self) -> &FinitelyGeneratedCone {
        &self.shift_cone
    }

    /// Inequality description of `B_r^-`.
    pub fn negative_cone(&self) -> &ConeHRep {
        &self.minus
    }

    /// Signs of all separating forms at `x`.
    pub fn point_signs(&self, x: &LatticePoint) -> Vec<i8> {
        self.forms
            .iter()
            .map(|f| match f.eval(x).sign() {
                num_bigint::Sign::Plus => 1,
                num_bigint::Sign::Minus => -1,
                num_bigint::Sign::NoSign => 0,
            })
            .collect()
    }

    fn in_wild_closure(&self, signs: &[i8]) -> bool {
        self.wild_chambers().any(|c| c.closure_admits(signs))
    }

    /// Tame-cone membership. The origin lies in `B_r^-` and is never tame.
    pub fn contains(&self, x: &LatticePoint) -> bool {
        if x.rank() != self.rank || x.is_zero() || self.minus.contains(x) {
            return false;
        }
        !self.in_wild_closure(&self.point_signs(x))
    }

    /// [`TameCone::contains`] for machine-size coordinates.
    pub fn contains_i64(&self, x: &[i64]) -> bool {
        if x.len() != self.rank || x.iter().all(|&c| c == 0) || self.minus.contains_i64(x) {
            return false;
        }
        let signs: Vec<i8> = self
            .forms
            .iter()
            .map(|f| f.eval_i64(x).signum() as i8)
            .collect();
        !self.in_wild_closure(&signs)
    }

    /// Membership of a rational point; cones are invariant under positive scaling.
    pub fn contains_rational(&self, x: &[BigRational]) -> bool {
        self.contains(&LatticePoint::new(linalg::clear_denominators(x)))
    }
}
