//! Iteration of a map, cycle detection with divergence certificates, stopping
//! times and the closed-form description of `T^k` along a residual sequence.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::TameCone;
use crate::mapcore::{residue_of, CollatzMap, LatticePoint, ResidueClass};

/// Largest coset count `d^{ek}` that [`omega_map`] will enumerate.
pub const MAX_OMEGA_COSETS: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Norm {
    #[default]
    Euclidean,
    Sup,
}

impl Norm {
    /// A quantity that orders points the same way the norm does: the squared
    /// Euclidean norm or the sup norm.
    pub fn size_key(&self, x: &LatticePoint) -> BigInt {
        match self {
            Norm::Euclidean => x.squared_euclidean(),
            Norm::Sup => x.sup_norm(),
        }
    }

    /// `‖x‖²`, exact.
    pub fn squared(&self, x: &LatticePoint) -> BigInt {
        match self {
            Norm::Euclidean => x.squared_euclidean(),
            Norm::Sup => {
                let s = x.sup_norm();
                &s * &s
            }
        }
    }
}

/// `T(x) = (m_ω x + r_ω) / d`.
pub fn step(map: &CollatzMap, x: &LatticePoint) -> Result<LatticePoint> {
    let omega = residue_of(x, map)?;
    apply_branch(map, &omega, x)
}

fn apply_branch(map: &CollatzMap, omega: &ResidueClass, x: &LatticePoint) -> Result<LatticePoint> {
    let m = map.multiplier(omega);
    let r = map.shift(omega);
    let d = map.modulus_big();
    x.coords()
        .iter()
        .zip(r.coords())
        .map(|(xi, ri)| {
            let (q, rem) = (m * xi + ri).div_rem(&d);
            if rem.is_zero() {
                Ok(q)
            } else {
                Err(Error::InternalDivisibility)
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(LatticePoint::new)
}

/// `T^k(x)`.
pub fn iterate(map: &CollatzMap, x: &LatticePoint, k: u64) -> Result<LatticePoint> {
    map.check_rank(x)?;
    let mut y = x.clone();
    for _ in 0..k {
        y = step(map, &y)?;
    }
    Ok(y)
}

/// `[ω(x,0), …, ω(x,k-1)]` with `ω(x,i)` the residue class of `T^i(x)`.
pub fn residual_sequence(map: &CollatzMap, x: &LatticePoint, k: u64) -> Result<Vec<ResidueClass>> {
    map.check_rank(x)?;
    let mut seq = Vec::with_capacity(k as usize);
    let mut y = x.clone();
    for i in 0..k {
        let omega = residue_of(&y, map)?;
        if i + 1 < k {
            y = apply_branch(map, &omega, &y)?;
        }
        seq.push(omega);
    }
    Ok(seq)
}

/// `T^k(x)` evaluated as
/// `d^{-k} ( (∏_{i<k} m_i) x + Σ_{j<k} (∏_{j<i<k} m_i) d^j r_j )`
/// with `m_i, r_i` taken along the residual sequence of `x`.
pub fn closed_form_iterate(map: &CollatzMap, x: &LatticePoint, k: u64) -> Result<LatticePoint> {
    let seq = residual_sequence(map, x, k)?;
    let d = map.modulus_big();
    let e = map.rank();

    // suffix[j] = ∏_{i>j} m_i
    let mut suffix = vec![BigInt::one(); seq.len() + 1];
    for j in (0..seq.len()).rev() {
        suffix[j] = &suffix[j + 1] * map.multiplier(&seq[j]);
    }
    let mut numer: Vec<BigInt> = x.coords().iter().map(|c| c * &suffix[0]).collect();
    let mut d_pow = BigInt::one();
    for (j, omega) in seq.iter().enumerate() {
        let weight = &suffix[j + 1] * &d_pow;
        for (n, r) in numer.iter_mut().zip(map.shift(omega).coords()) {
            *n += &weight * r;
        }
        d_pow *= &d;
    }
    let mut out = Vec::with_capacity(e);
    for n in numer {
        let (q, rem) = n.div_rem(&d_pow);
        if !rem.is_zero() {
            return Err(Error::InternalDivisibility);
        }
        out.push(q);
    }
    Ok(LatticePoint::new(out))
}

/// The map `Z^e/d^kZ^e → (Z^e/dZ^e)^k`, `x ↦ (ω(x,0), …, ω(x,k-1))`, tabulated
/// over the cosets with representatives in `[0, d^k)^e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaMap {
    pub k: u64,
    /// `images[c]` encodes the residual sequence of coset `c` as `Σ_i index(ω_i) · (d^e)^i`;
    /// cosets are numbered in mixed radix `d^k`.
    pub images: Vec<usize>,
}

impl OmegaMap {
    pub fn is_bijective(&self) -> bool {
        let mut seen = vec![false; self.images.len()];
        for &img in &self.images {
            if img >= seen.len() || seen[img] {
                return false;
            }
            seen[img] = true;
        }
        true
    }
}

pub fn omega_map(map: &CollatzMap, k: u64) -> Result<OmegaMap> {
    let e = map.rank() as u32;
    let d = map.modulus() as u128;
    let cosets = d
        .checked_pow(e)
        .and_then(|v| v.checked_pow(k as u32))
        .unwrap_or(u128::MAX);
    if cosets > MAX_OMEGA_COSETS {
        return Err(Error::SizeGuard {
            what: "coset enumeration",
            size: cosets,
            limit: MAX_OMEGA_COSETS,
        });
    }
    let side = d.pow(k as u32) as u64;
    let n = map.num_residues();
    let mut images = Vec::with_capacity(cosets as usize);
    for c in 0..cosets as u64 {
        let mut rest = c;
        let coords: Vec<BigInt> = (0..e)
            .map(|_| {
                let v = rest % side;
                rest /= side;
                BigInt::from(v)
            })
            .collect();
        let seq = residual_sequence(map, &LatticePoint::new(coords), k)?;
        let code = seq
            .iter()
            .rev()
            .fold(0usize, |acc, w| acc * n + w.index());
        images.push(code);
    }
    Ok(OmegaMap { k, images })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryOutcome {
    /// `T^{preperiod+period}(x) = T^{preperiod}(x)` with minimal `period`.
    Cycle { preperiod: u64, period: u64 },
    /// `T^{witness_step}(x)` lies in the tame cone, so the trajectory diverges.
    CertifiedDivergent { witness_step: u64 },
    ExceededCap { steps: u64 },
}

/// Brent cycle detection on exact points. When a tame cone is supplied, the first
/// visited point inside it certifies divergence of the whole trajectory.
pub fn detect_cycle(
    map: &CollatzMap,
    x: &LatticePoint,
    max_steps: u64,
    tame: Option<&TameCone>,
) -> Result<TrajectoryOutcome> {
    map.check_rank(x)?;
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
    }
    let is_tame = |p: &LatticePoint| tame.is_some_and(|t| t.contains(p));
    if is_tame(x) {
        return Ok(TrajectoryOutcome::CertifiedDivergent { witness_step: 0 });
    }

    let mut power = 1u64;
    let mut period = 1u64;
    let mut tortoise = x.clone();
    let mut hare = step(map, x)?;
    let mut steps = 1u64;
    loop {
        if is_tame(&hare) {
            return Ok(TrajectoryOutcome::CertifiedDivergent { witness_step: steps });
        }
        if tortoise == hare {
            break;
        }
        if steps >= max_steps {
            return Ok(TrajectoryOutcome::ExceededCap { steps });
        }
        if power == period {
            tortoise = hare.clone();
            power *= 2;
            period = 0;
        }
        hare = step(map, &hare)?;
        steps += 1;
        period += 1;
    }

    let mut tortoise = x.clone();
    let mut hare = iterate(map, x, period)?;
    let mut preperiod = 0u64;
    while tortoise != hare {
        tortoise = step(map, &tortoise)?;
        hare = step(map, &hare)?;
        preperiod += 1;
    }
    Ok(TrajectoryOutcome::Cycle { preperiod, period })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoppingResult {
    /// Least `k ∈ [1, cap]` with `‖T^k x‖ < ‖x‖`.
    pub k: Option<u64>,
    pub cap: u64,
}

/// Stopping time of `x`, searched up to `cap`. The origin never stops.
pub fn stopping_time(map: &CollatzMap, x: &LatticePoint, norm: Norm, cap: u64) -> Result<StoppingResult> {
    map.check_rank(x)?;
    let start = norm.size_key(x);
    let mut k = None;
    if !start.is_zero() {
        let mut y = x.clone();
        for i in 1..=cap {
            y = step(map, &y)?;
            if norm.size_key(&y) < start {
                k = Some(i);
                break;
            }
        }
    }
    Ok(StoppingResult { k, cap })
}

/// Radius `R · Σ_{j<k} M^{k-1-j} d^j / λ_k` beyond which every point with a
/// given residual sequence stops within `k` steps.
///
/// `R = max ‖r_ω‖`, `M = max m_ω`, `λ_k = d^k - ∏ m_{ω_i}`. The geometric sum
/// equals `(M^k - d^k)/(M - d)` and stays finite at `M = d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuaranteedRadius {
    pub norm: Norm,
    /// `R²`, exact.
    pub shift_norm_squared: BigInt,
    pub factor: BigRational,
}

impl GuaranteedRadius {
    /// Square of the bound, exact.
    pub fn squared(&self) -> BigRational {
        BigRational::from_integer(self.shift_norm_squared.clone()) * &self.factor * &self.factor
    }

    /// True iff `‖y‖` is strictly larger than the bound.
    pub fn is_exceeded_by(&self, y: &LatticePoint) -> bool {
        BigRational::from_integer(self.norm.squared(y)) > self.squared()
    }

    pub fn to_f64(&self) -> f64 {
        let r = libm::sqrt(self.shift_norm_squared.to_f64().unwrap_or(f64::INFINITY));
        r * self.factor.to_f64().unwrap_or(f64::INFINITY)
    }
}

pub fn guaranteed_stopping_radius(
    map: &CollatzMap,
    seq: &[ResidueClass],
    norm: Norm,
) -> Result<Option<GuaranteedRadius>> {
    if seq.is_empty() {
        return Err(Error::InvalidParameter("residual sequence must be nonempty".into()));
    }
    for w in seq {
        if w.modulus() != map.modulus() || w.rep().len() != map.rank() {
            return Err(Error::InvalidParameter("residue class does not belong to this map".into()));
        }
    }
    let k = seq.len() as u32;
    let d = map.modulus_big();
    let d_k: BigInt = Pow::pow(&d, k);
    let product: BigInt = seq.iter().map(|w| map.multiplier(w)).product();
    let lambda = &d_k - product;
    if !lambda.is_positive() {
        return Ok(None);
    }
    let m = map.max_multiplier();
    let geometric: BigInt = (0..k)
        .map(|j| Pow::pow(m, k - 1 - j) * Pow::pow(&d, j))
        .sum();
    let shift_norm_squared = map
        .shifts()
        .iter()
        .map(|r| norm.squared(r))
        .max()
        .unwrap_or_else(BigInt::zero);
    Ok(Some(GuaranteedRadius {
        norm,
        shift_norm_squared,
        factor: BigRational::new(geometric, lambda),
    }))
}
