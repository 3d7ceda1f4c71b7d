//! Serde adapters: rationals travel as strings `"p/q"` (integers as `"p"`),
//! never as floats.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

use crate::field::{parse_rational, ExtendedValue, Q};

pub mod q_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let raw = RationalRepr::deserialize(d)?;
        raw.into_q().map_err(D::Error::custom)
    }
}

pub mod q_map {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BTreeMap<String, Q>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(v.iter().map(|(k, q)| (k, q.to_string())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Q>, D::Error> {
        let raw = BTreeMap::<String, RationalRepr>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| v.into_q().map(|q| (k, q)))
            .collect::<Result<_, _>>()
            .map_err(D::Error::custom)
    }
}

pub mod ext_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &ExtendedValue, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExtendedValue, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(D::Error::custom)
    }
}

/// Accept both `"1/3"` and bare JSON integers on input.
#[derive(Deserialize)]
#[serde(untagged)]
enum RationalRepr {
    Text(String),
    Int(i64),
}

impl RationalRepr {
    fn into_q(self) -> Result<Q, String> {
        match self {
            RationalRepr::Text(s) => parse_rational(&s).map_err(|e| e.to_string()),
            RationalRepr::Int(n) => Ok(crate::field::qi(n)),
        }
    }
}

/// A rational that serializes as a string; for report structs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rational(pub Q);

impl serde::Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        q_str::deserialize(d).map(Rational)
    }
}

impl From<Q> for Rational {
    fn from(q: Q) -> Self {
        Rational(q)
    }
}
