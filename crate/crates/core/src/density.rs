//! Densities: lattice points in balls, the measure of the tame cone (the lower
//! bound on the density of divergent points), `A_k` fractions behind the
//! stopping-time argument, and seeded empirical estimators.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{angular_sectors, TameCone};
use crate::mapcore::{CollatzMap, LatticePoint};
use crate::trajectory::{detect_cycle, stopping_time, Norm, TrajectoryOutcome};

/// Largest box `(2⌊ρ⌋+1)^e` that exact lattice enumeration will walk.
pub const MAX_BALL_BOX: u128 = 100_000_000;
/// Default limit on distinct products kept by [`ak_fraction`].
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub value: f64,
    /// Exact rational value, when one exists (lattice counts and sample fractions).
    pub exact: Option<BigRational>,
    pub kind: EstimateKind,
    /// Two-sided 95% Hoeffding half-width; only for Monte Carlo estimates.
    pub ci_halfwidth: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

impl DensityEstimate {
    fn exact_rational(q: BigRational) -> Self {
        DensityEstimate {
            value: q.to_f64().unwrap_or(f64::NAN),
            exact: Some(q),
            kind: EstimateKind::Exact,
            ci_halfwidth: None,
            samples: None,
            seed: None,
        }
    }

    fn sampled(hits: u64, samples: u64, seed: u64) -> Self {
        let q = BigRational::new(BigInt::from(hits), BigInt::from(samples));
        DensityEstimate {
            value: hits as f64 / samples as f64,
            exact: Some(q),
            kind: EstimateKind::MonteCarlo,
            ci_halfwidth: Some(hoeffding_halfwidth(samples)),
            samples: Some(samples),
            seed: Some(seed),
        }
    }
}

/// `sqrt(ln(2/0.05) / (2n))`.
pub fn hoeffding_halfwidth(samples: u64) -> f64 {
    libm::sqrt(libm::log(2.0 / 0.05) / (2.0 * samples as f64))
}

/// Sample count and seed for Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 200_000,
            seed: 0,
        }
    }
}

/// Lattice points of the closed ball `‖x‖ <= radius`, in lexicographic order.
pub struct BallPoints {
    norm: Norm,
    numer: i128,
    denom: i128,
    bound: i64,
    current: Option<Vec<i64>>,
}

impl BallPoints {
    fn inside(&self, x: &[i64]) -> bool {
        match self.norm {
            Norm::Euclidean => {
                let sq: i128 = x.iter().map(|&c| c as i128 * c as i128).sum();
                self.denom * self.denom * sq <= self.numer * self.numer
            }
            Norm::Sup => {
                let m = x.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as i128;
                self.denom * m <= self.numer
            }
        }
    }

    fn advance(&mut self) {
        let Some(x) = self.current.as_mut() else {
            return;
        };
        for i in (0..x.len()).rev() {
            if x[i] < self.bound {
                x[i] += 1;
                for c in &mut x[i + 1..] {
                    *c = -self.bound;
                }
                return;
            }
        }
        self.current = None;
    }
}

impl Iterator for BallPoints {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        loop {
            let x = self.current.clone()?;
            self.advance();
            if self.inside(&x) {
                return Some(x);
            }
        }
    }
}

pub fn lattice_points_in_ball(radius: &BigRational, norm: Norm, rank: usize) -> Result<BallPoints> {
    if rank == 0 {
        return Err(Error::BadRank);
    }
    if rank > 3 {
        return Err(Error::SizeGuard {
            what: "rank for exact ball enumeration",
            size: rank as u128,
            limit: 3,
        });
    }
    if radius.is_negative() {
        return Err(Error::InvalidParameter("radius must be non-negative".into()));
    }
    let bound = radius.floor().to_integer();
    let side = (&bound * 2u32 + 1u32).to_u128().unwrap_or(u128::MAX);
    let size = side.checked_pow(rank as u32).unwrap_or(u128::MAX);
    if size > MAX_BALL_BOX {
        return Err(Error::SizeGuard {
            what: "ball enumeration box",
            size,
            limit: MAX_BALL_BOX,
        });
    }
    let bound = bound.to_i64().expect("guarded");
    let small = |x: &BigInt| {
        x.to_i128()
            .filter(|v| v.unsigned_abs() < 1 << 40)
            .ok_or_else(|| Error::InvalidParameter("radius has too large a numerator or denominator".into()))
    };
    Ok(BallPoints {
        norm,
        numer: small(radius.numer())?,
        denom: small(radius.denom())?,
        bound,
        current: Some(vec![-bound; rank]),
    })
}

fn to_f64_pair(v: [i64; 2]) -> [f64; 2] {
    [v[0] as f64, v[1] as f64]
}

/// Fraction of the unit ball of `norm` covered by the sector from `u` to `v`
/// (counterclockwise, angle below π). For the sup norm the sector must not
/// contain a corner direction in its interior.
fn arc_fraction(u: [i64; 2], v: [i64; 2], norm: Norm) -> f64 {
    let [u, v] = [to_f64_pair(u), to_f64_pair(v)];
    match norm {
        Norm::Euclidean => {
            let cross = u[0] * v[1] - u[1] * v[0];
            let dot = u[0] * v[0] + u[1] * v[1];
            libm::atan2(cross, dot) / (2.0 * PI)
        }
        Norm::Sup => {
            let scale = |w: [f64; 2]| {
                let s = w[0].abs().max(w[1].abs());
                [w[0] / s, w[1] / s]
            };
            let (p, q) = (scale(u), scale(v));
            (p[0] * q[1] - p[1] * q[0]) / 2.0 / 4.0
        }
    }
}

/// Exact rank-2 measure. Between consecutive critical directions (separating
/// lines, boundary rays of `B_r^-`, axes and, for the sup norm, the square's
/// corners) tame membership is constant, so each arc is tested at one
/// interior point and tame arcs are summed.
fn planar_tame_fraction(tame: &TameCone, norm: Norm) -> Result<f64> {
    let mut rays: Vec<[i64; 2]> = vec![[1, 0], [0, 1], [-1, 0], [0, -1]];
    for s in angular_sectors(tame.forms())? {
        rays.push(s.start);
    }
    let minus = tame.negative_cone();
    for n in minus.facets.iter().chain(&minus.equalities) {
        rays.push([-n[1], n[0]]);
        rays.push([n[1], -n[0]]);
    }
    if norm == Norm::Sup {
        rays.extend([[1, 1], [-1, 1], [-1, -1], [1, -1]]);
    }
    // primitive directions, so equal rays compare equal
    for r in rays.iter_mut() {
        let g = num_integer::gcd(r[0], r[1]);
        *r = [r[0] / g, r[1] / g];
    }
    rays.sort_by(|a, b| crate::geometry::chambers_angle_cmp(*a, *b));
    rays.dedup();
    let n = rays.len();
    let mut total = 0.0;
    for i in 0..n {
        let (u, v) = (rays[i], rays[(i + 1) % n]);
        let mid = [u[0] + v[0], u[1] + v[1]];
        if tame.contains_i64(&mid) {
            total += arc_fraction(u, v, norm);
        }
    }
    Ok(total)
}

/// `vol(D_T ∩ β(1)) / vol(β(1))`: exact angular arithmetic in rank 2, Monte
/// Carlo with a Hoeffding interval otherwise.
pub fn tame_measure_fraction(tame: &TameCone, norm: Norm, mc: &McConfig) -> Result<DensityEstimate> {
    if tame.rank() == 2 {
        let value = planar_tame_fraction(tame, norm)?;
        return Ok(DensityEstimate {
            value,
            exact: None,
            kind: EstimateKind::Exact,
            ci_halfwidth: None,
            samples: None,
            seed: None,
        });
    }
    monte_carlo_tame_fraction(tame, norm, mc)
}

/// Uniform points of the unit ball by rejection from the cube `[-1,1]^e`, each
/// tested for exact tame membership after scaling to an integer vector.
pub fn monte_carlo_tame_fraction(tame: &TameCone, norm: Norm, mc: &McConfig) -> Result<DensityEstimate> {
    if mc.samples == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let e = tame.rank();
    let scale = (1u64 << 40) as f64;
    let mut hits = 0u64;
    let mut x = vec![0f64; e];
    let mut xi = vec![0i64; e];
    for _ in 0..mc.samples {
        loop {
            for c in x.iter_mut() {
                *c = rng.gen_range(-1.0..=1.0);
            }
            let ok = match norm {
                Norm::Euclidean => x.iter().map(|c| c * c).sum::<f64>() <= 1.0,
                Norm::Sup => true,
            };
            for (t, c) in xi.iter_mut().zip(&x) {
                *t = libm::round(c * scale) as i64;
            }
            if ok && xi.iter().any(|&c| c != 0) {
                break;
            }
        }
        if tame.contains_i64(&xi) {
            hits += 1;
        }
    }
    Ok(DensityEstimate::sampled(hits, mc.samples, mc.seed))
}

/// Lower bound on the lower asymptotic density of divergent points.
pub fn divergence_density_bound(map: &CollatzMap, norm: Norm, mc: &McConfig) -> Result<DensityEstimate> {
    let tame = TameCone::build(map)?;
    tame_measure_fraction(&tame, norm, mc)
}

/// `|tame ∩ Λ ∩ β(ρ)| / |Λ ∩ β(ρ)|`, exact.
pub fn exact_tame_lattice_density(tame: &TameCone, radius: &BigRational, norm: Norm) -> Result<DensityEstimate> {
    let mut total = 0u64;
    let mut hits = 0u64;
    for x in lattice_points_in_ball(radius, norm, tame.rank())? {
        total += 1;
        if tame.contains_i64(&x) {
            hits += 1;
        }
    }
    Ok(DensityEstimate::exact_rational(BigRational::new(
        BigInt::from(hits),
        BigInt::from(total),
    )))
}

/// `|A_k| / d^{ek}` where `A_k` holds the residue sequences of length `k`
/// whose multiplier product is below `d^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AkTable {
    pub k: u32,
    pub count: BigInt,
    pub total: BigInt,
    pub fraction: BigRational,
}

/// Dynamic program over distinct products: products at or above `d^k` are
/// dropped at every step since multipliers are at least 1.
pub fn ak_fraction(map: &CollatzMap, k: u32, state_cap: usize) -> Result<AkTable> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let threshold: BigInt = Pow::pow(&map.modulus_big(), k);
    let mut multiset: BTreeMap<BigInt, BigInt> = BTreeMap::new();
    for m in map.multipliers() {
        *multiset.entry(m.clone()).or_insert_with(BigInt::zero) += 1u32;
    }
    let mut states: BTreeMap<BigInt, BigInt> = BTreeMap::new();
    states.insert(BigInt::one(), BigInt::one());
    for _ in 0..k {
        let mut next: BTreeMap<BigInt, BigInt> = BTreeMap::new();
        for (prod, count) in &states {
            for (m, mult) in &multiset {
                let q = prod * m;
                if q < threshold {
                    *next.entry(q).or_insert_with(BigInt::zero) += count * mult;
                }
            }
        }
        if next.len() > state_cap {
            return Err(Error::StateGuard(state_cap));
        }
        states = next;
    }
    let count: BigInt = states.values().sum();
    let total: BigInt = Pow::pow(&BigInt::from(map.num_residues()), k);
    Ok(AkTable {
        k,
        fraction: BigRational::new(count.clone(), total.clone()),
        count,
        total,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductHypothesis {
    pub holds: bool,
    /// `∏_ω m_ω`.
    pub product: BigInt,
    /// `d^{d^e}`.
    pub bound: BigInt,
}

/// Exact check of `∏_ω m_ω < d^{d^e}`.
pub fn product_hypothesis(map: &CollatzMap) -> ProductHypothesis {
    let product: BigInt = map.multipliers().iter().product();
    let bound: BigInt = Pow::pow(&map.modulus_big(), map.num_residues());
    ProductHypothesis {
        holds: product < bound,
        product,
        bound,
    }
}

/// Uniform lattice point of `β(radius)` by rejection from the bounding box.
pub fn sample_ball_point<R: Rng>(rng: &mut R, radius: u64, norm: Norm, rank: usize) -> LatticePoint {
    let r = radius as i64;
    let r2 = radius as i128 * radius as i128;
    loop {
        let x: Vec<i64> = (0..rank).map(|_| rng.gen_range(-r..=r)).collect();
        let inside = match norm {
            Norm::Euclidean => x.iter().map(|&c| c as i128 * c as i128).sum::<i128>() <= r2,
            Norm::Sup => true,
        };
        if inside {
            return LatticePoint::from_i64s(&x);
        }
    }
}

fn check_sampling(samples: u64, radius: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    if radius > (1 << 40) {
        return Err(Error::InvalidParameter("sampling radius too large".into()));
    }
    Ok(())
}

/// Fraction of sampled points of `β(radius)` whose stopping time is at most `cap`.
pub fn empirical_stopping_fraction(
    map: &CollatzMap,
    radius: u64,
    cap: u64,
    samples: u64,
    seed: u64,
    norm: Norm,
) -> Result<DensityEstimate> {
    check_sampling(samples, radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let x = sample_ball_point(&mut rng, radius, norm, map.rank());
        if stopping_time(map, &x, norm, cap)?.k.is_some() {
            hits += 1;
        }
    }
    Ok(DensityEstimate::sampled(hits, samples, seed))
}

/// Fraction of sampled points of `β(radius)` certified divergent within `max_steps`.
pub fn empirical_divergence_fraction(
    map: &CollatzMap,
    tame: &TameCone,
    radius: u64,
    max_steps: u64,
    samples: u64,
    seed: u64,
    norm: Norm,
) -> Result<DensityEstimate> {
    check_sampling(samples, radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let x = sample_ball_point(&mut rng, radius, norm, map.rank());
        if let TrajectoryOutcome::CertifiedDivergent { .. } = detect_cycle(map, &x, max_steps, Some(tame))? {
            hits += 1;
        }
    }
    Ok(DensityEstimate::sampled(hits, samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_section4_map, build_zsqrt2_map, section4_closed_form_bound, Section4Params};
    use crate::geometry::IntegerForm;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn s4(d: u64, b: u64) -> CollatzMap {
        build_section4_map(Section4Params::new(d, b).unwrap())
    }

    #[test]
    fn ball_counts() {
        assert_eq!(lattice_points_in_ball(&q(2), Norm::Euclidean, 2).unwrap().count(), 13);
        assert_eq!(
            lattice_points_in_ball(&q(0), Norm::Euclidean, 2).unwrap().collect::<Vec<_>>(),
            vec![vec![0, 0]]
        );
        assert_eq!(lattice_points_in_ball(&q(1), Norm::Sup, 2).unwrap().count(), 9);
        let half = BigRational::new(3.into(), 2.into());
        assert_eq!(lattice_points_in_ball(&half, Norm::Euclidean, 2).unwrap().count(), 9);
        assert_eq!(lattice_points_in_ball(&q(1), Norm::Euclidean, 3).unwrap().count(), 7);
        assert!(lattice_points_in_ball(&q(1), Norm::Euclidean, 4).is_err());
        assert!(lattice_points_in_ball(&q(100_000), Norm::Euclidean, 2).is_err());
    }

    #[test]
    fn zsqrt2_bound_is_one_half() {
        let est = divergence_density_bound(&build_zsqrt2_map(), Norm::Euclidean, &McConfig::default()).unwrap();
        assert_eq!(est.kind, EstimateKind::Exact);
        assert!((est.value - 0.5).abs() < 1e-12);
        let sup = divergence_density_bound(&build_zsqrt2_map(), Norm::Sup, &McConfig::default()).unwrap();
        assert!((sup.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn section4_bound_matches_closed_form() {
        for (d, b) in [(3, 1), (3, 10), (4, 2)] {
            let est = divergence_density_bound(&s4(d, b), Norm::Euclidean, &McConfig::default()).unwrap();
            let closed = section4_closed_form_bound(Section4Params::new(d, b).unwrap());
            assert!((est.value - closed).abs() < 1e-9, "d={d} b={b}: {} vs {closed}", est.value);
        }
        let est = divergence_density_bound(&s4(3, 1), Norm::Euclidean, &McConfig::default()).unwrap();
        assert!((est.value - 0.897584).abs() < 5e-7);
    }

    #[test]
    fn half_plane_toy_measure() {
        let t = TameCone::from_parts(
            2,
            vec![IntegerForm::new(&[1, 0]).unwrap()],
            &[LatticePoint::from_i64s(&[1, 0])],
        )
        .unwrap();
        let v = tame_measure_fraction(&t, Norm::Euclidean, &McConfig::default()).unwrap().value;
        assert!((v - 0.5).abs() < 1e-12);
        let v = tame_measure_fraction(&t, Norm::Sup, &McConfig::default()).unwrap().value;
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_weights_arcs_by_area() {
        // one cone measured under both norms, each cross-checked by Monte Carlo
        let t = TameCone::from_parts(
            2,
            vec![IntegerForm::new(&[0, 1]).unwrap(), IntegerForm::new(&[1, -1]).unwrap()],
            &[LatticePoint::from_i64s(&[-1, 1])],
        )
        .unwrap();
        let eu = tame_measure_fraction(&t, Norm::Euclidean, &McConfig::default()).unwrap().value;
        let sup = tame_measure_fraction(&t, Norm::Sup, &McConfig::default()).unwrap().value;
        assert!(eu > 0.0 && eu < 1.0 && sup > 0.0 && sup < 1.0);
        let mc = monte_carlo_tame_fraction(&t, Norm::Sup, &McConfig { samples: 40_000, seed: 3 }).unwrap();
        assert!((mc.value - sup).abs() <= mc.ci_halfwidth.unwrap());
        let mc = monte_carlo_tame_fraction(&t, Norm::Euclidean, &McConfig { samples: 40_000, seed: 4 }).unwrap();
        assert!((mc.value - eu).abs() <= mc.ci_halfwidth.unwrap());
    }

    #[test]
    fn exact_lattice_density_examples() {
        let t = TameCone::build(&build_zsqrt2_map()).unwrap();
        let est = exact_tame_lattice_density(&t, &q(10), Norm::Euclidean).unwrap();
        assert_eq!(est.exact.unwrap(), BigRational::new(138.into(), 317.into()));
        let est = exact_tame_lattice_density(&t, &q(0), Norm::Euclidean).unwrap();
        assert_eq!(est.exact.unwrap(), q(0));
    }

    #[test]
    fn ak_examples() {
        let z = build_zsqrt2_map();
        assert_eq!(ak_fraction(&z, 1, DEFAULT_STATE_CAP).unwrap().fraction, BigRational::new(1.into(), 4.into()));
        assert_eq!(ak_fraction(&z, 2, DEFAULT_STATE_CAP).unwrap().fraction, BigRational::new(5.into(), 16.into()));
        // m = 1 at (0,0) and m = d - 1 = 2 at (1,0), (0,1), (1,1) are all below d = 3
        assert_eq!(ak_fraction(&s4(3, 1), 1, DEFAULT_STATE_CAP).unwrap().fraction, BigRational::new(4.into(), 9.into()));
        assert!(ak_fraction(&z, 0, DEFAULT_STATE_CAP).is_err());
        assert_eq!(ak_fraction(&s4(3, 1), 12, 2), Err(Error::StateGuard(2)));
    }

    #[test]
    fn product_hypothesis_examples() {
        let h = product_hypothesis(&s4(3, 1));
        assert!(h.holds);
        assert_eq!(h.product, BigInt::from(8192));
        assert_eq!(h.bound, BigInt::from(19683));
        let h = product_hypothesis(&build_zsqrt2_map());
        assert!(!h.holds);
        assert_eq!((h.product, h.bound), (BigInt::from(81), BigInt::from(16)));
        for d in 4..=6 {
            assert!(product_hypothesis(&s4(d, 1)).holds);
        }
        assert!(!product_hypothesis(&s4(2, 1)).holds);
    }

    #[test]
    fn empirical_edge_cases() {
        let map = s4(3, 1);
        assert_eq!(
            empirical_stopping_fraction(&map, 100, 10, 0, 1, Norm::Euclidean),
            Err(Error::EmptySample)
        );
        let est = empirical_stopping_fraction(&map, 100, 0, 50, 1, Norm::Euclidean).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn all_tame_toy_cone_certifies_every_sample() {
        // axes as hyperplanes and no nonzero shifts: no chamber is wild and B^- = {0}
        let t = TameCone::from_parts(
            2,
            vec![IntegerForm::new(&[1, 0]).unwrap(), IntegerForm::new(&[0, 1]).unwrap()],
            &[],
        )
        .unwrap();
        assert_eq!(t.wild_chambers().count(), 0);
        let map = build_zsqrt2_map();
        let est = empirical_divergence_fraction(&map, &t, 1000, 5, 300, 11, Norm::Euclidean).unwrap();
        assert_eq!(est.exact.unwrap(), q(1));
        let m = tame_measure_fraction(&t, Norm::Euclidean, &McConfig::default()).unwrap();
        assert!((m.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_estimates_are_reproducible() {
        let map = build_zsqrt2_map();
        let tame = TameCone::build(&map).unwrap();
        let a = empirical_divergence_fraction(&map, &tame, 1000, 100, 200, 7, Norm::Euclidean).unwrap();
        let b = empirical_divergence_fraction(&map, &tame, 1000, 100, 200, 7, Norm::Euclidean).unwrap();
        assert_eq!(a, b);
    }
}
