#![allow(dead_code)]

use lattice_collatz::mapcore::MapEntry;
use lattice_collatz::{
    build_section4_map, build_zsqrt2_map, guaranteed_stopping_radius, iterate, omega_map,
    residual_sequence, validate_map, CollatzMap, LatticePoint, MapDescription, Norm, ResidueClass,
    Section4Params,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use rand::Rng;

pub fn p(c: &[i64]) -> LatticePoint {
    LatticePoint::from_i64s(c)
}

pub fn section4(d: u64, b: u64) -> CollatzMap {
    build_section4_map(Section4Params::new(d, b).unwrap())
}

pub fn catalog_maps() -> Vec<CollatzMap> {
    vec![
        build_zsqrt2_map(),
        section4(2, 1),
        section4(3, 1),
        section4(3, 2),
        section4(4, 1),
    ]
}

/// `m_ω = 3` (and `m_0 = 1`), `r_ω = ω` on `Z^3` with `d = 2`.
pub fn cube_map() -> CollatzMap {
    let entries = (0..8)
        .map(|i| {
            let w = ResidueClass::from_index(i, 2, 3);
            let odd = w.rep().iter().filter(|&&c| c == 1).count() as u32;
            let rep: Vec<i64> = w.rep().iter().map(|&c| c as i64).collect();
            MapEntry::from_i64s(&rep, if odd == 0 { 1 } else { 3 }, &rep)
        })
        .collect();
    validate_map(&MapDescription {
        rank: 3,
        modulus: 2,
        entries,
    })
    .unwrap()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// A random valid map of relatively prime type: `m_ω` coprime to `d`, and
/// `r_ω ≡ -m_ω ω (mod d)` shifted by random multiples of `d`.
pub fn random_map<R: Rng>(rng: &mut R, d: u64, e: usize) -> CollatzMap {
    let n = (d as usize).pow(e as u32);
    let di = d as i64;
    let entries = (0..n)
        .map(|i| {
            let w = ResidueClass::from_index(i, d, e);
            let m = loop {
                let m = rng.gen_range(1..=3 * di + 1);
                if gcd(m, di) == 1 {
                    break m;
                }
            };
            let rep: Vec<i64> = w.rep().iter().map(|&c| c as i64).collect();
            let shift: Vec<i64> = rep
                .iter()
                .map(|&x| (-m * x).rem_euclid(di) + di * rng.gen_range(-2..=2))
                .collect();
            MapEntry::from_i64s(&rep, m, &shift)
        })
        .collect();
    validate_map(&MapDescription {
        rank: e,
        modulus: d as i64,
        entries,
    })
    .unwrap()
}

pub fn random_point<R: Rng>(rng: &mut R, e: usize, bound: i64) -> LatticePoint {
    let c: Vec<i64> = (0..e).map(|_| rng.gen_range(-bound..=bound)).collect();
    p(&c)
}

pub fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

/// `|A_k| / |Λ/dΛ|^k` by walking every residue sequence.
pub fn brute_force_ak(map: &CollatzMap, k: u32) -> BigRational {
    let n = map.num_residues();
    let threshold: BigInt = Pow::pow(&map.modulus_big(), k);
    let total = n.pow(k);
    let count = (0..total)
        .filter(|code| {
            let product: BigInt = (0..k)
                .map(|i| map.multipliers()[code / n.pow(i) % n].clone())
                .product();
            product < threshold
        })
        .count();
    BigRational::new(count.into(), total.into())
}

/// For every residue sequence of length `k ≤ k_max` realised by a coset of
/// `d^k Z^2` and with a guaranteed radius, checks `per_seq` coset members
/// beyond the radius: they follow the sequence and shrink after `k` steps.
pub fn check_radius_contract<R: Rng>(map: &CollatzMap, k_max: u32, per_seq: usize, rng: &mut R) -> usize {
    let d = map.modulus() as i64;
    let n = map.num_residues();
    let mut checked = 0;
    for k in 1..=k_max {
        let om = omega_map(map, k as u64).unwrap();
        let dk = d.pow(k);
        for (coset, &code) in om.images.iter().enumerate() {
            let seq: Vec<ResidueClass> = (0..k)
                .map(|i| ResidueClass::from_index(code / n.pow(i) % n, map.modulus(), 2))
                .collect();
            for norm in [Norm::Euclidean, Norm::Sup] {
                let Some(bound) = guaranteed_stopping_radius(map, &seq, norm).unwrap() else {
                    continue;
                };
                let rep = [coset as i64 % dk, coset as i64 / dk];
                let reach = (bound.to_f64() / dk as f64) as i64 + 2;
                let mut done = 0;
                while done < per_seq {
                    let v: Vec<i64> = (0..2).map(|_| rng.gen_range(-3 * reach..=3 * reach)).collect();
                    let y = p(&[rep[0] + dk * v[0], rep[1] + dk * v[1]]);
                    if !bound.is_exceeded_by(&y) {
                        continue;
                    }
                    assert_eq!(residual_sequence(map, &y, k as u64).unwrap(), seq);
                    let yk = iterate(map, &y, k as u64).unwrap();
                    assert!(norm.squared(&yk) < norm.squared(&y), "{y} k={k}");
                    done += 1;
                }
                checked += done;
            }
        }
    }
    checked
}
