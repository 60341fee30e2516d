//! Nonnegative integers with a 128-bit fast path.
//!
//! Values start out as a `u128`. Any operation that would overflow moves the
//! value to an arbitrary-precision [`BigUint`]; callers never observe the
//! switch except through speed.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An unbounded nonnegative integer.
///
/// Equality, ordering and hashing are by value, so a `Small` and a `Big`
/// holding the same number compare equal.
#[derive(Clone)]
pub enum Nat {
    Small(u128),
    Big(BigUint),
}

impl Nat {
    pub const ONE: Nat = Nat::Small(1);

    pub fn new(value: u128) -> Self {
        Nat::Small(value)
    }

    /// Wraps a big integer, demoting it to the fast representation when it fits.
    pub fn from_biguint(value: BigUint) -> Self {
        match value.to_u128() {
            Some(v) => Nat::Small(v),
            None => Nat::Big(value),
        }
    }

    /// Forces the arbitrary-precision representation. Arithmetic on the
    /// result stays unbounded; used to cross-check the fast path.
    pub fn unbounded(self) -> Self {
        match self {
            Nat::Small(v) => Nat::Big(BigUint::from(v)),
            big => big,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Nat::Big(_))
    }

    pub fn to_u128(&self) -> Option<u128> {
        match self {
            Nat::Small(v) => Some(*v),
            Nat::Big(b) => b.to_u128(),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Nat::Small(v) => *v == 0,
            Nat::Big(b) => b.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Nat::Small(v) => *v == 1,
            Nat::Big(b) => b.is_one(),
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            Nat::Small(v) => v & 1 == 0,
            Nat::Big(b) => !b.bit(0),
        }
    }

    pub fn rem_u64(&self, modulus: u64) -> u64 {
        assert!(modulus != 0, "modulus must be nonzero");
        match self {
            Nat::Small(v) => (v % modulus as u128) as u64,
            Nat::Big(b) => (b % modulus).to_u64().expect("remainder below modulus"),
        }
    }

    pub fn halve(&self) -> Nat {
        match self {
            Nat::Small(v) => Nat::Small(v >> 1),
            Nat::Big(b) => Nat::Big(b >> 1u32),
        }
    }

    pub fn double(&self) -> Nat {
        match self {
            Nat::Small(v) => match v.checked_mul(2) {
                Some(d) => Nat::Small(d),
                None => Nat::Big(BigUint::from(*v) << 1u32),
            },
            Nat::Big(b) => Nat::Big(b << 1u32),
        }
    }

    /// `3x + 1`.
    pub fn triple_plus_one(&self) -> Nat {
        match self {
            Nat::Small(v) => match v.checked_mul(3).and_then(|t| t.checked_add(1)) {
                Some(r) => Nat::Small(r),
                None => Nat::Big(BigUint::from(*v) * 3u32 + 1u32),
            },
            Nat::Big(b) => Nat::Big(b * 3u32 + 1u32),
        }
    }

    /// `(x - 1) / 3`, truncating. Requires `x >= 1`.
    pub fn minus_one_div_three(&self) -> Nat {
        match self {
            Nat::Small(v) => Nat::Small((v - 1) / 3),
            Nat::Big(b) => Nat::Big((b - 1u32) / 3u32),
        }
    }

    pub fn bits(&self) -> u64 {
        match self {
            Nat::Small(v) => 128 - v.leading_zeros() as u64,
            Nat::Big(b) => b.bits(),
        }
    }
}

impl From<u128> for Nat {
    fn from(v: u128) -> Self {
        Nat::Small(v)
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat::Small(v as u128)
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat::Small(v as u128)
    }
}

impl From<BigUint> for Nat {
    fn from(v: BigUint) -> Self {
        Nat::from_biguint(v)
    }
}

impl PartialEq for Nat {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a == b,
            (Nat::Big(a), Nat::Big(b)) => a == b,
            (Nat::Small(a), Nat::Big(b)) | (Nat::Big(b), Nat::Small(a)) => {
                b.to_u128() == Some(*a)
            }
        }
    }
}

impl Eq for Nat {}

impl PartialEq<u128> for Nat {
    fn eq(&self, other: &u128) -> bool {
        self.to_u128() == Some(*other)
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.cmp(b),
            (Nat::Big(a), Nat::Big(b)) => a.cmp(b),
            (Nat::Small(a), Nat::Big(b)) => BigUint::from(*a).cmp(b),
            (Nat::Big(a), Nat::Small(b)) => a.cmp(&BigUint::from(*b)),
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Nat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self.to_u128() {
            Some(v) => v.hash(state),
            None => self.to_biguint().to_u32_digits().hash(state),
        }
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(v) => write!(f, "{v}"),
            Nat::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid natural number: {0:?}")]
pub struct ParseNatError(String);

impl FromStr for Nat {
    type Err = ParseNatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseNatError(s.to_string()));
        }
        match s.parse::<u128>() {
            Ok(v) => Ok(Nat::Small(v)),
            Err(_) => BigUint::from_str(s)
                .map(Nat::from_biguint)
                .map_err(|_| ParseNatError(s.to_string())),
        }
    }
}

// JSON numbers for anything that fits in 128 bits, decimal strings beyond.
impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.to_u128() {
            Some(v) => serializer.serialize_u128(v),
            None => serializer.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Nat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct NatVisitor;

        impl Visitor<'_> for NatVisitor {
            type Value = Nat;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or a decimal string")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Nat, E> {
                Ok(Nat::from(v))
            }

            fn visit_u128<E: de::Error>(self, v: u128) -> Result<Nat, E> {
                Ok(Nat::from(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Nat, E> {
                u64::try_from(v)
                    .map(Nat::from)
                    .map_err(|_| E::custom("negative value"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Nat, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(NatVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_ignores_representation() {
        let small = Nat::new(12345);
        let big = small.clone().unbounded();
        assert!(big.is_unbounded());
        assert_eq!(small, big);
        assert_eq!(small.cmp(&big), Ordering::Equal);
    }

    #[test]
    fn triple_plus_one_escalates_on_overflow() {
        let x = Nat::new(u128::MAX / 2);
        let y = x.triple_plus_one();
        assert!(y.is_unbounded());
        assert_eq!(y.to_biguint(), BigUint::from(u128::MAX / 2) * 3u32 + 1u32);
        assert!(Nat::new(u128::MAX).double().is_unbounded());
    }

    #[test]
    fn parse_and_display() {
        let s = "340282366920938463463374607431768211457";
        let n: Nat = s.parse().unwrap();
        assert!(n.is_unbounded());
        assert_eq!(n.to_string(), s);
        assert!("".parse::<Nat>().is_err());
        assert!("-3".parse::<Nat>().is_err());
        assert!("12a".parse::<Nat>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let small = Nat::new(9232);
        assert_eq!(serde_json::to_string(&small).unwrap(), "9232");
        let big: Nat = "1000000000000000000000000000000000000000000".parse().unwrap();
        let text = serde_json::to_string(&big).unwrap();
        assert_eq!(text, "\"1000000000000000000000000000000000000000000\"");
        assert_eq!(serde_json::from_str::<Nat>(&text).unwrap(), big);
        assert_eq!(serde_json::from_str::<Nat>("9232").unwrap(), small);
    }

    #[test]
    fn remainders() {
        let big: Nat = "1000000000000000000000000000000000000000047".parse().unwrap();
        assert_eq!(big.rem_u64(10), 7);
        assert_eq!(Nat::new(47).rem_u64(10), 7);
        assert!(!big.is_even());
    }
}
