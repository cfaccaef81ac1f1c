//! Built-in maps: the square of the Collatz map on `Z[√2]` and the two-parameter
//! family on `Z^2` whose tame cone fills all but a thin wedge of the plane.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::mapcore::{validate_map, CollatzMap, MapDescription, MapEntry};

/// `T = C²` for `C(z) = z/√2` (z divisible by √2), `(3z+1)/√2` otherwise, in the
/// basis `(1, √2)` of `Z[√2]`.
pub fn build_zsqrt2_map() -> CollatzMap {
    let desc = MapDescription {
        rank: 2,
        modulus: 2,
        entries: vec![
            MapEntry::from_i64s(&[0, 0], 1, &[0, 0]),
            MapEntry::from_i64s(&[1, 0], 3, &[1, 0]),
            MapEntry::from_i64s(&[0, 1], 3, &[0, 1]),
            MapEntry::from_i64s(&[1, 1], 9, &[3, 1]),
        ],
    };
    validate_map(&desc).expect("catalog map is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Section4Params {
    d: u64,
    b: u64,
}

impl Section4Params {
    pub fn new(d: u64, b: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("d must be at least 2, got {d}")));
        }
        if b < 1 {
            return Err(Error::InvalidParameter(format!("b must be at least 1, got {b}")));
        }
        Ok(Section4Params { d, b })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn b(&self) -> u64 {
        self.b
    }
}

fn section4_multiplier(d: u64, i: u64, j: u64) -> u64 {
    let top = i.max(j);
    if top == 0 {
        1
    } else if top < d - 1 {
        d - 1
    } else {
        d + 1
    }
}

/// Every case of the shift definition that applies to `(i, j)`; the cases
/// overlap at `i = j = d - 1`.
fn section4_shift_cases(d: u64, b: u64, i: u64, j: u64) -> Vec<[BigInt; 2]> {
    let (d, b) = (BigInt::from(d), BigInt::from(b));
    let (bi, bj) = (BigInt::from(i), BigInt::from(j));
    let last = &d - 1u32;
    let mut out = Vec::new();
    if i == 0 && j == 0 {
        out.push([BigInt::from(0), BigInt::from(0)]);
        return out;
    }
    if bi.clone().max(bj.clone()) < last {
        out.push([bi.clone(), &bj + &b * &d * &bi]);
    }
    if bi == last {
        out.push([BigInt::from(1), (&b + 1u32) * &d - &bj]);
    }
    if bj == last {
        let s = &d - &bi;
        out.push([s.clone(), &b * &d * &s + 1u32]);
    }
    out
}

/// The family on `Z^2` with modulus `d`, multipliers in `{1, d-1, d+1}` and
/// shifts of the form `(s, t + bds)`.
pub fn build_section4_map(p: Section4Params) -> CollatzMap {
    let (d, b) = (p.d, p.b);
    let mut entries = Vec::with_capacity((d * d) as usize);
    for j in 0..d {
        for i in 0..d {
            let [s0, s1] = section4_shift_cases(d, b, i, j).swap_remove(0);
            entries.push(MapEntry {
                residue: vec![BigInt::from(i), BigInt::from(j)],
                multiplier: BigInt::from(section4_multiplier(d, i, j)),
                shift: vec![s0, s1],
            });
        }
    }
    validate_map(&MapDescription {
        rank: 2,
        modulus: d as i64,
        entries,
    })
    .expect("family is valid for all admissible parameters")
}

/// `1 - arccos(bd / sqrt(1 + b²d²)) / π`, the divergence density bound of the family.
pub fn section4_closed_form_bound(p: Section4Params) -> f64 {
    // arccos(bd/√(1+b²d²)) is the angle between (1, bd) and (0, 1), i.e. atan(1/(bd));
    // atan2 avoids the cancellation of acos near 1.
    let bd = (p.d as f64) * (p.b as f64);
    1.0 - libm::atan2(1.0, bd) / PI
}

/// Names accepted by the command line: `zsqrt2` and `section4:d=<D>,b=<B>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogName {
    Zsqrt2,
    Section4(Section4Params),
}

impl CatalogName {
    pub fn build(&self) -> CollatzMap {
        match self {
            CatalogName::Zsqrt2 => build_zsqrt2_map(),
            CatalogName::Section4(p) => build_section4_map(*p),
        }
    }
}

impl FromStr for CatalogName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownCatalog(s.to_string());
        if s == "zsqrt2" {
            return Ok(CatalogName::Zsqrt2);
        }
        let params = s.strip_prefix("section4:").ok_or_else(unknown)?;
        let (mut d, mut b) = (None, None);
        for kv in params.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(unknown)?;
            let v: u64 = v.trim().parse().map_err(|_| unknown())?;
            match k.trim() {
                "d" => d = Some(v),
                "b" => b = Some(v),
                _ => return Err(unknown()),
            }
        }
        match (d, b) {
            (Some(d), Some(b)) => Ok(CatalogName::Section4(Section4Params::new(d, b)?)),
            _ => Err(unknown()),
        }
    }
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogName::Zsqrt2 => f.write_str("zsqrt2"),
            CatalogName::Section4(p) => write!(f, "section4:d={},b={}", p.d, p.b),
        }
    }
}

impl From<CatalogName> for String {
    fn from(c: CatalogName) -> String {
        c.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapcore::{is_relatively_prime_type, LatticePoint, ResidueClass};
    use crate::trajectory::step;

    fn entry(map: &CollatzMap, i: u64, j: u64) -> (BigInt, LatticePoint) {
        let w = ResidueClass::new(vec![i, j], map.modulus()).unwrap();
        (map.multiplier(&w).clone(), map.shift(&w).clone())
    }

    #[test]
    fn zsqrt2_table() {
        let map = build_zsqrt2_map();
        let mut ms: Vec<i64> = map
            .multipliers()
            .iter()
            .map(|m| i64::try_from(m).unwrap())
            .collect();
        ms.sort();
        assert_eq!(ms, [1, 3, 3, 9]);
        assert_eq!(
            step(&map, &LatticePoint::from_i64s(&[1, 1])).unwrap(),
            LatticePoint::from_i64s(&[6, 5])
        );
        assert!(is_relatively_prime_type(&map));
    }

    #[test]
    fn section4_entries() {
        let map = build_section4_map(Section4Params::new(3, 1).unwrap());
        assert_eq!(entry(&map, 2, 1), (BigInt::from(4), LatticePoint::from_i64s(&[1, 5])));
        assert_eq!(entry(&map, 1, 0), (BigInt::from(2), LatticePoint::from_i64s(&[1, 3])));
        assert_eq!(entry(&map, 0, 0), (BigInt::from(1), LatticePoint::from_i64s(&[0, 0])));
        assert_eq!(entry(&map, 0, 2), (BigInt::from(4), LatticePoint::from_i64s(&[3, 10])));
    }

    #[test]
    fn section4_shift_shape() {
        for d in 2..=6u64 {
            for b in [1u64, 2, 10] {
                let map = build_section4_map(Section4Params::new(d, b).unwrap());
                for w in map.residues() {
                    let m = map.multiplier(&w);
                    let r = map.shift(&w).coords();
                    let s = &r[0];
                    let t = &r[1] - BigInt::from(b * d) * s;
                    let zero = BigInt::from(0);
                    assert!(*s >= zero && s < m, "d={d} b={b} {w}");
                    assert!(t >= zero && &t < m, "d={d} b={b} {w}");
                }
            }
        }
    }

    #[test]
    fn overlapping_cases_agree() {
        for d in 2..=8u64 {
            for b in [1u64, 3, 100] {
                for i in 0..d {
                    for j in 0..d {
                        let cases = section4_shift_cases(d, b, i, j);
                        assert!(!cases.is_empty());
                        assert!(cases.windows(2).all(|w| w[0] == w[1]), "d={d} b={b} ({i},{j})");
                    }
                }
                let corner = section4_shift_cases(d, b, d - 1, d - 1);
                assert_eq!(corner.len(), 2);
                assert_eq!(corner[0], [BigInt::from(1), BigInt::from(b * d + 1)]);
            }
        }
    }

    #[test]
    fn closed_form_values() {
        let v = section4_closed_form_bound(Section4Params::new(3, 1).unwrap());
        let via_acos = 1.0 - libm::acos(3.0 / libm::sqrt(10.0)) / PI;
        assert!((v - via_acos).abs() < 1e-12);
        assert!((v - 0.897584).abs() < 5e-7);
        let v2 = section4_closed_form_bound(Section4Params::new(2, 1).unwrap());
        assert!((v2 - 0.852416).abs() < 5e-7);
        let a = section4_closed_form_bound(Section4Params::new(3, 1).unwrap());
        let b = section4_closed_form_bound(Section4Params::new(3, 10).unwrap());
        let c = section4_closed_form_bound(Section4Params::new(3, 100).unwrap());
        assert!(a < b && b < c && c < 1.0);
    }

    #[test]
    fn catalog_names() {
        assert_eq!("zsqrt2".parse::<CatalogName>().unwrap(), CatalogName::Zsqrt2);
        let n: CatalogName = "section4:d=3,b=1".parse().unwrap();
        assert_eq!(n, CatalogName::Section4(Section4Params::new(3, 1).unwrap()));
        assert_eq!(n.to_string(), "section4:d=3,b=1");
        assert!("section4:d=1,b=1".parse::<CatalogName>().is_err());
        assert!("section4:d=3".parse::<CatalogName>().is_err());
        assert!("gauss".parse::<CatalogName>().is_err());
    }
}
