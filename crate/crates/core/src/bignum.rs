//! Exact big-integer helpers: capped exponentiation and a JSON encoding
//! that keeps machine-sized values as plain numbers.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;
use std::fmt;

/// `base^exp`, failing when the result would need more than `cap` bits.
///
/// Returns `None` on overflow. `0^0` is taken as 1.
pub fn capped_pow(base: &BigUint, exp: &BigUint, cap: u64) -> Option<BigUint> {
    if exp.is_zero() {
        return Some(BigUint::one());
    }
    if base.is_zero() || base.is_one() {
        return Some(base.clone());
    }
    // base >= 2, so the result has at least exp * (bits(base) - 1) + 1 bits.
    let e = exp.to_u64().filter(|&e| e <= cap)?;
    let lower = e.checked_mul(base.bits() - 1)?.checked_add(1)?;
    if lower > cap {
        return None;
    }
    let v = base.pow(u32::try_from(e).ok()?);
    (v.bits() <= cap).then_some(v)
}

/// `value` with an explicit bit cap check.
pub fn within_cap(value: &BigUint, cap: u64) -> bool {
    value.bits() <= cap
}

fn write_big<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(x) => s.serialize_i64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

struct BigVisitor;

impl<'de> Visitor<'de> for BigVisitor {
    type Value = BigInt;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal string")
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigInt, E> {
        Ok(v.into())
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigInt, E> {
        Ok(v.into())
    }
    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigInt, E> {
        v.parse().map_err(|_| E::custom(format!("bad integer {v:?}")))
    }
}

/// Serde adapter for a single `BigInt`.
pub mod big {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        write_big(v, s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        d.deserialize_any(BigVisitor)
    }
}

/// Serde adapter for `Vec<BigInt>`.
pub mod big_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::big")] BigInt);

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Wrap(x.clone()))?;
        }
        seq.end()
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw: Vec<Wrap> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|w| w.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capped_pow_small() {
        let b = BigUint::from(4u32);
        assert_eq!(capped_pow(&b, &BigUint::from(9u32), 64), Some(BigUint::from(262144u32)));
        assert_eq!(capped_pow(&b, &BigUint::from(40u32), 64), None);
        assert_eq!(capped_pow(&BigUint::one(), &BigUint::from(u64::MAX), 8), Some(BigUint::one()));
    }

    #[test]
    fn capped_pow_boundary() {
        // 2^63 has 64 bits.
        let two = BigUint::from(2u32);
        assert!(capped_pow(&two, &BigUint::from(63u32), 64).is_some());
        assert!(capped_pow(&two, &BigUint::from(64u32), 64).is_none());
        // 3^40 has 64 bits; the lower-bound estimate alone does not reject it.
        let three = BigUint::from(3u32);
        assert!(capped_pow(&three, &BigUint::from(40u32), 64).is_some());
        assert!(capped_pow(&three, &BigUint::from(41u32), 64).is_none());
    }
}
