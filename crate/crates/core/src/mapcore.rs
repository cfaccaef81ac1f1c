//! Generalized Collatz mappings `T(x) = (m_ω x + r_ω) / d` on `Z^e`.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::feasibility::{feasible_point, Inequality};
use crate::geometry::IntegerForm;
use crate::linalg;

/// Upper limit on the number of residue classes `d^e` a map may have.
pub const MAX_TABLE_SIZE: u64 = 1 << 24;

/// A point of the lattice `Z^e` with arbitrary-precision coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(Vec<BigInt>);

impl LatticePoint {
    pub fn new(coords: Vec<BigInt>) -> Self {
        LatticePoint(coords)
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        LatticePoint(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        LatticePoint(alloc::vec![BigInt::zero(); rank])
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<BigInt> {
        self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn neg(&self) -> Self {
        LatticePoint(self.0.iter().map(|c| -c).collect())
    }

    /// Coordinates as `i64`, when they all fit.
    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn squared_euclidean(&self) -> BigInt {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn sup_norm(&self) -> BigInt {
        self.0
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

impl fmt::Display for LatticePoint {
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

/// A coset `ω ∈ Z^e / dZ^e`, stored by its representative with coordinates in `[0, d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueClass {
    rep: Vec<u64>,
    modulus: u64,
}

impl ResidueClass {
    pub fn new(rep: Vec<u64>, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::BadModulus(modulus as i64));
        }
        if rep.iter().any(|&c| c >= modulus) {
            return Err(Error::ResidueOutOfRange(
                rep.iter().map(|&c| BigInt::from(c)).collect(),
            ));
        }
        Ok(ResidueClass { rep, modulus })
    }

    pub fn rep(&self) -> &[u64] {
        &self.rep
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Position in the mixed-radix enumeration `Σ rep_i d^i`.
    pub fn index(&self) -> usize {
        self.rep
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * self.modulus as usize + c as usize)
    }

    pub fn from_index(mut index: usize, modulus: u64, rank: usize) -> Self {
        let d = modulus as usize;
        let rep = (0..rank)
            .map(|_| {
                let c = index % d;
                index /= d;
                c as u64
            })
            .collect();
        ResidueClass { rep, modulus }
    }

    pub fn rep_point(&self) -> LatticePoint {
        LatticePoint(self.rep.iter().map(|&c| BigInt::from(c)).collect())
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.rep.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ") mod {}", self.modulus)
    }
}

/// One row of an unvalidated map table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapEntry {
    pub residue: Vec<BigInt>,
    pub multiplier: BigInt,
    pub shift: Vec<BigInt>,
}

impl MapEntry {
    pub fn from_i64s(residue: &[i64], multiplier: i64, shift: &[i64]) -> Self {
        MapEntry {
            residue: residue.iter().map(|&c| BigInt::from(c)).collect(),
            multiplier: BigInt::from(multiplier),
            shift: shift.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }
}

/// Raw map description as read from a file or built by hand; see [`validate_map`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapDescription {
    pub rank: usize,
    pub modulus: i64,
    pub entries: Vec<MapEntry>,
}

/// A validated generalized Collatz mapping. Immutable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollatzMap {
    rank: usize,
    modulus: u64,
    multipliers: Vec<BigInt>,
    shifts: Vec<LatticePoint>,
}

impl CollatzMap {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn modulus_big(&self) -> BigInt {
        BigInt::from(self.modulus)
    }

    /// Number of residue classes, `d^e`.
    pub fn num_residues(&self) -> usize {
        self.multipliers.len()
    }

    pub fn residues(&self) -> impl Iterator<Item = ResidueClass> + '_ {
        (0..self.num_residues()).map(|i| ResidueClass::from_index(i, self.modulus, self.rank))
    }

    pub fn multiplier(&self, omega: &ResidueClass) -> &BigInt {
        &self.multipliers[omega.index()]
    }

    pub fn shift(&self, omega: &ResidueClass) -> &LatticePoint {
        &self.shifts[omega.index()]
    }

    /// Multipliers in residue-index order.
    pub fn multipliers(&self) -> &[BigInt] {
        &self.multipliers
    }

    /// Shift vectors `S_r` in residue-index order (zero shifts included).
    pub fn shifts(&self) -> &[LatticePoint] {
        &self.shifts
    }

    pub fn max_multiplier(&self) -> &BigInt {
        self.multipliers.iter().max().expect("nonempty table")
    }

    pub fn to_description(&self) -> MapDescription {
        MapDescription {
            rank: self.rank,
            modulus: self.modulus as i64,
            entries: self
                .residues()
                .map(|w| MapEntry {
                    residue: w.rep().iter().map(|&c| BigInt::from(c)).collect(),
                    multiplier: self.multiplier(&w).clone(),
                    shift: self.shift(&w).coords().to_vec(),
                })
                .collect(),
        }
    }

    pub(crate) fn check_rank(&self, x: &LatticePoint) -> Result<()> {
        if x.rank() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                found: x.rank(),
            });
        }
        Ok(())
    }
}

/// Checks a raw description against the defining conditions of a generalized
/// Collatz mapping and returns the validated map.
pub fn validate_map(candidate: &MapDescription) -> Result<CollatzMap> {
    let rank = candidate.rank;
    if rank == 0 {
        return Err(Error::BadRank);
    }
    if candidate.modulus <= 1 {
        return Err(Error::BadModulus(candidate.modulus));
    }
    let d = candidate.modulus as u64;
    let size = (d as u128).checked_pow(rank as u32).unwrap_or(u128::MAX);
    if size > MAX_TABLE_SIZE as u128 {
        return Err(Error::SizeGuard {
            what: "residue table",
            size,
            limit: MAX_TABLE_SIZE as u128,
        });
    }
    let size = size as usize;
    let dd = BigInt::from(d);

    let mut multipliers: Vec<Option<BigInt>> = alloc::vec![None; size];
    let mut shifts: Vec<Option<LatticePoint>> = alloc::vec![None; size];
    for entry in &candidate.entries {
        if entry.residue.len() != rank {
            return Err(Error::RankMismatch {
                expected: rank,
                found: entry.residue.len(),
            });
        }
        if entry.shift.len() != rank {
            return Err(Error::RankMismatch {
                expected: rank,
                found: entry.shift.len(),
            });
        }
        if entry.residue.iter().any(|c| c.is_negative() || *c >= dd) {
            return Err(Error::ResidueOutOfRange(entry.residue.clone()));
        }
        let rep: Vec<u64> = entry
            .residue
            .iter()
            .map(|c| c.to_u64().expect("in range"))
            .collect();
        let omega = ResidueClass { rep, modulus: d };
        let idx = omega.index();
        if multipliers[idx].is_some() {
            return Err(Error::DuplicateResidue(omega.rep));
        }
        if !entry.multiplier.is_positive() {
            return Err(Error::NonpositiveMultiplier(omega.rep));
        }
        for (i, (x, r)) in entry.residue.iter().zip(&entry.shift).enumerate() {
            if !(&entry.multiplier * x + r).is_multiple_of(&dd) {
                return Err(Error::Divisibility {
                    residue: omega.rep,
                    coordinate: i,
                });
            }
        }
        multipliers[idx] = Some(entry.multiplier.clone());
        shifts[idx] = Some(LatticePoint(entry.shift.clone()));
    }
    if let Some(missing) = multipliers.iter().position(Option::is_none) {
        return Err(Error::MissingResidue(
            ResidueClass::from_index(missing, d, rank).rep,
        ));
    }
    Ok(CollatzMap {
        rank,
        modulus: d,
        multipliers: multipliers.into_iter().map(Option::unwrap).collect(),
        shifts: shifts.into_iter().map(Option::unwrap).collect(),
    })
}

/// Reduces `x` coordinatewise into `[0, d)`.
pub fn residue_of(x: &LatticePoint, map: &CollatzMap) -> Result<ResidueClass> {
    map.check_rank(x)?;
    let d = map.modulus_big();
    let rep = x
        .coords()
        .iter()
        .map(|c| c.mod_floor(&d).to_u64().expect("reduced below d"))
        .collect();
    Ok(ResidueClass {
        rep,
        modulus: map.modulus,
    })
}

/// True iff every multiplier is coprime to the modulus.
pub fn is_relatively_prime_type(map: &CollatzMap) -> bool {
    let d = map.modulus_big();
    map.multipliers.iter().all(|m| m.gcd(&d).is_one())
}

/// Rank of the integer matrix whose columns are the shift vectors.
pub fn shift_span_rank(map: &CollatzMap) -> usize {
    let rows: Vec<Vec<BigInt>> = map.shifts.iter().map(|s| s.coords().to_vec()).collect();
    linalg::rank(&rows)
}

fn positivity_system(shifts: &[LatticePoint]) -> Vec<Inequality> {
    shifts
        .iter()
        .filter(|w| !w.is_zero())
        .map(|w| Inequality::new(w.coords().to_vec(), 1))
        .collect()
}

fn form_from_solution(rank: usize, sol: Option<Vec<num_rational::BigRational>>) -> Result<Option<IntegerForm>> {
    let Some(sol) = sol else {
        return Ok(None);
    };
    let mut coeffs = linalg::clear_denominators(&sol);
    if coeffs.iter().all(Zero::is_zero) {
        // only reachable when no nonzero constraint pins the form down
        coeffs = alloc::vec![BigInt::zero(); rank];
        coeffs[0] = BigInt::one();
    }
    IntegerForm::from_bigints(&coeffs).map(Some)
}

/// An integer form that is strictly positive on every nonzero vector of `shifts`,
/// or `None` when the set is not acute. The empty and all-zero sets are acute.
pub fn strictly_positive_witness(shifts: &[LatticePoint], rank: usize) -> Result<Option<IntegerForm>> {
    if rank == 0 {
        return Err(Error::BadRank);
    }
    if let Some(bad) = shifts.iter().find(|s| s.rank() != rank) {
        return Err(Error::RankMismatch {
            expected: rank,
            found: bad.rank(),
        });
    }
    let system = positivity_system(shifts);
    form_from_solution(rank, feasible_point(rank, &system)?)
}

/// A strictly positive form for `shifts` whose kernel contains `x`, i.e. a
/// semipermeable hyperplane through `x`; `None` when no such form exists.
pub fn semipermeable_form_through(
    shifts: &[LatticePoint],
    x: &LatticePoint,
) -> Result<Option<IntegerForm>> {
    let rank = x.rank();
    if x.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let mut system = positivity_system(shifts);
    system.extend(Inequality::equality(x.coords().to_vec()));
    form_from_solution(rank, feasible_point(rank, &system)?)
}
