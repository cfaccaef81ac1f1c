use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::feasibility::{is_feasible, Inequality};
use crate::linalg;
use crate::mapcore::{strictly_positive_witness, CollatzMap, LatticePoint};

/// Largest number of facet candidates examined by [`FinitelyGeneratedCone::h_representation`].
const MAX_FACET_CANDIDATES: u128 = 2_000_000;

/// The closed convex cone `{Σ λ_i g_i : λ_i >= 0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitelyGeneratedCone {
    rank: usize,
    generators: Vec<LatticePoint>,
}

impl FinitelyGeneratedCone {
    /// Zero generators are dropped; generators on a common ray are kept once.
    pub fn new(rank: usize, generators: &[LatticePoint]) -> Result<Self> {
        let mut gens: Vec<LatticePoint> = Vec::new();
        for g in generators {
            if g.rank() != rank {
                return Err(Error::RankMismatch {
                    expected: rank,
                    found: g.rank(),
                });
            }
            if g.is_zero() {
                continue;
            }
            let p = LatticePoint::new(linalg::primitive(g.coords()));
            if !gens.contains(&p) {
                gens.push(p);
            }
        }
        Ok(FinitelyGeneratedCone {
            rank,
            generators: gens,
        })
    }

    /// `B_r^+`, generated by the shift vectors.
    pub fn from_shifts(map: &CollatzMap) -> Self {
        FinitelyGeneratedCone::new(map.rank(), map.shifts()).expect("shifts have the map's rank")
    }

    pub fn negated(&self) -> Self {
        FinitelyGeneratedCone {
            rank: self.rank,
            generators: self.generators.iter().map(LatticePoint::neg).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[LatticePoint] {
        &self.generators
    }

    /// Inequality description `{y : E y = 0, F y >= 0}`.
    ///
    /// The equalities span the orthogonal complement of the generators' span `L`.
    /// Every facet normal lies in `L` and is orthogonal to `dim L - 1` independent
    /// generators, so all such candidates are tried and kept when the generators
    /// lie weakly on one side.
    pub fn h_representation(&self) -> Result<ConeHRep> {
        let e = self.rank;
        let rows: Vec<Vec<BigInt>> = self.generators.iter().map(|g| g.coords().to_vec()).collect();
        let dim = linalg::rank(&rows);
        let equalities = linalg::null_space(&rows, e);
        let mut facets: Vec<Vec<BigInt>> = Vec::new();

        if dim > 0 {
            let n = rows.len();
            let k = dim - 1;
            let count = binomial(n as u128, k as u128);
            if count > MAX_FACET_CANDIDATES {
                return Err(Error::SizeGuard {
                    what: "facet candidates",
                    size: count,
                    limit: MAX_FACET_CANDIDATES,
                });
            }
            let mut subset: Vec<usize> = (0..k).collect();
            loop {
                let mut sys: Vec<Vec<BigInt>> = subset.iter().map(|&i| rows[i].clone()).collect();
                sys.extend(equalities.iter().cloned());
                let ns = linalg::null_space(&sys, e);
                if ns.len() == 1 {
                    let normal = &ns[0];
                    let signs: Vec<BigInt> = rows.iter().map(|g| linalg::dot(normal, g)).collect();
                    let any_pos = signs.iter().any(Signed::is_positive);
                    let any_neg = signs.iter().any(Signed::is_negative);
                    let oriented = match (any_pos, any_neg) {
                        (true, false) => Some(normal.clone()),
                        (false, true) => Some(normal.iter().map(|c| -c).collect()),
                        _ => None,
                    };
                    if let Some(f) = oriented {
                        if !facets.contains(&f) {
                            facets.push(f);
                        }
                    }
                }
                if !next_subset(&mut subset, n) {
                    break;
                }
            }
        }
        let to_small = |v: &Vec<BigInt>| -> Result<Vec<i64>> {
            v.iter()
                .map(|c| c.to_i64().ok_or_else(|| Error::CoefficientOverflow(format!("{c}"))))
                .collect()
        };
        let mut facets: Vec<Vec<i64>> = facets.iter().map(to_small).collect::<Result<_>>()?;
        facets.sort();
        Ok(ConeHRep {
            rank: e,
            equalities: equalities.iter().map(to_small).collect::<Result<_>>()?,
            facets,
        })
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    loop {
        if i == 0 {
            return false;
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
    true
}

/// `{y : ⟨e, y⟩ = 0 for e in equalities, ⟨f, y⟩ >= 0 for f in facets}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeHRep {
    pub rank: usize,
    pub equalities: Vec<Vec<i64>>,
    pub facets: Vec<Vec<i64>>,
}

fn dot_small(a: &[i64], x: &[i64]) -> i128 {
    a.iter().zip(x).map(|(&p, &q)| p as i128 * q as i128).sum()
}

fn dot_big(a: &[i64], x: &[BigInt]) -> BigInt {
    a.iter().zip(x).map(|(&p, q)| q * p).sum()
}

impl ConeHRep {
    pub fn contains(&self, x: &LatticePoint) -> bool {
        let c = x.coords();
        self.equalities.iter().all(|e| dot_big(e, c).is_zero())
            && self.facets.iter().all(|f| !dot_big(f, c).is_negative())
    }

    pub fn contains_i64(&self, x: &[i64]) -> bool {
        self.equalities.iter().all(|e| dot_small(e, x) == 0)
            && self.facets.iter().all(|f| dot_small(f, x) >= 0)
    }

    /// The same constraints as rows `A y >= 0`.
    pub fn inequalities(&self) -> Vec<Inequality> {
        let big = |v: &Vec<i64>| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
        let mut out: Vec<Inequality> = self.facets.iter().map(|f| Inequality::new(big(f), 0)).collect();
        for e in &self.equalities {
            out.extend(Inequality::equality(big(e)));
        }
        out
    }

    pub fn negated(&self) -> ConeHRep {
        let neg = |v: &Vec<i64>| v.iter().map(|c| -c).collect::<Vec<_>>();
        ConeHRep {
            rank: self.rank,
            equalities: self.equalities.clone(),
            facets: self.facets.iter().map(neg).collect(),
        }
    }
}

/// Exact membership `x ∈ cone(G)`, decided through Farkas' lemma: `x` lies
/// outside iff some `y` has `⟨y, g⟩ >= 0` for all generators and `⟨y, x⟩ <= -1`.
pub fn cone_contains(cone: &FinitelyGeneratedCone, x: &LatticePoint) -> Result<bool> {
    if x.rank() != cone.rank {
        return Err(Error::RankMismatch {
            expected: cone.rank,
            found: x.rank(),
        });
    }
    if x.is_zero() {
        return Ok(true);
    }
    let mut system: Vec<Inequality> = cone
        .generators
        .iter()
        .map(|g| Inequality::new(g.coords().to_vec(), 0))
        .collect();
    system.push(Inequality::new(x.coords().iter().map(|c| -c).collect(), 1));
    Ok(!is_feasible(cone.rank, &system)?)
}

/// Membership of a rational point; cones are invariant under positive scaling.
pub fn cone_contains_rational(cone: &FinitelyGeneratedCone, x: &[BigRational]) -> Result<bool> {
    cone_contains(cone, &LatticePoint::new(linalg::clear_denominators(x)))
}

/// A nonzero point is directed iff it lies outside `B_r^+ ∪ B_r^-`.
pub fn is_directed(map: &CollatzMap, x: &LatticePoint) -> Result<bool> {
    map.check_rank(x)?;
    if x.is_zero() {
        return Err(Error::ZeroPoint);
    }
    if strictly_positive_witness(map.shifts(), map.rank())?.is_none() {
        return Err(Error::NotAcute);
    }
    let plus = FinitelyGeneratedCone::from_shifts(map);
    Ok(!cone_contains(&plus, x)? && !cone_contains(&plus.negated(), x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_zsqrt2_map;
    use alloc::vec;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::from_i64s(c)
    }

    fn cone(rank: usize, gens: &[&[i64]]) -> FinitelyGeneratedCone {
        let g: Vec<LatticePoint> = gens.iter().map(|c| p(c)).collect();
        FinitelyGeneratedCone::new(rank, &g).unwrap()
    }

    #[test]
    fn membership_examples() {
        let c = cone(2, &[&[1, 0], &[0, 1], &[3, 1]]);
        assert!(cone_contains(&c, &p(&[2, 3])).unwrap());
        assert!(!cone_contains(&c, &p(&[-1, 2])).unwrap());
        assert!(cone_contains(&c, &p(&[0, 0])).unwrap());
        let c = cone(2, &[&[1, 2], &[2, 1]]);
        assert!(cone_contains(&c, &p(&[1, 1])).unwrap());
        assert!(!cone_contains(&c, &p(&[1, 0])).unwrap());
        let half = BigRational::new(1.into(), 2.into());
        assert!(cone_contains_rational(&c, &[half.clone(), half]).unwrap());
    }

    #[test]
    fn h_representation_of_quadrant_sector() {
        let c = cone(2, &[&[1, 0], &[0, 1], &[3, 1]]);
        let h = c.h_representation().unwrap();
        assert!(h.equalities.is_empty());
        assert_eq!(h.facets, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn h_representation_of_degenerate_cones() {
        // a ray in the plane
        let h = cone(2, &[&[2, 0]]).h_representation().unwrap();
        assert_eq!(h.equalities.len(), 1);
        assert_eq!(h.facets, vec![vec![1, 0]]);
        assert!(h.contains(&p(&[5, 0])));
        assert!(!h.contains(&p(&[-5, 0])));
        assert!(!h.contains(&p(&[5, 1])));
        // a line
        let h = cone(2, &[&[1, 1], &[-1, -1]]).h_representation().unwrap();
        assert!(h.facets.is_empty());
        assert!(h.contains(&p(&[-3, -3])));
        // the zero cone
        let h = cone(3, &[&[0, 0, 0]]).h_representation().unwrap();
        assert_eq!(h.equalities.len(), 3);
        assert!(h.contains(&p(&[0, 0, 0])));
        // whole plane
        let h = cone(2, &[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]).h_representation().unwrap();
        assert!(h.facets.is_empty() && h.equalities.is_empty());
        // half plane y >= 0
        let h = cone(2, &[&[1, 0], &[-1, 0], &[0, 1]]).h_representation().unwrap();
        assert_eq!(h.facets, vec![vec![0, 1]]);
    }

    #[test]
    fn h_representation_agrees_with_farkas_route() {
        let cones = [
            cone(2, &[&[1, 0], &[0, 1], &[3, 1]]),
            cone(2, &[&[1, 2], &[2, 1]]),
            cone(2, &[&[1, 0], &[-1, 1]]),
            cone(2, &[&[3, 1]]),
            cone(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, -1]]),
            cone(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]]),
            cone(3, &[&[1, 2, 0], &[2, 1, 0]]),
        ];
        for c in &cones {
            let h = c.h_representation().unwrap();
            let r = 3i64;
            let pts: Vec<Vec<i64>> = if c.rank() == 2 {
                (-r..=r).flat_map(|x| (-r..=r).map(move |y| vec![x, y])).collect()
            } else {
                (-r..=r)
                    .flat_map(|x| (-r..=r).flat_map(move |y| (-r..=r).map(move |z| vec![x, y, z])))
                    .collect()
            };
            for x in pts {
                let lp = LatticePoint::from_i64s(&x);
                assert_eq!(h.contains(&lp), cone_contains(c, &lp).unwrap(), "{c:?} {x:?}");
                assert_eq!(h.contains(&lp), h.contains_i64(&x));
            }
        }
    }

    #[test]
    fn directed_examples() {
        let map = build_zsqrt2_map();
        assert!(is_directed(&map, &p(&[-1, 1])).unwrap());
        assert!(!is_directed(&map, &p(&[1, 1])).unwrap());
        assert!(!is_directed(&map, &p(&[-2, -5])).unwrap());
        assert_eq!(is_directed(&map, &p(&[0, 0])), Err(Error::ZeroPoint));
    }
}
