//! Instance file format.
//!
//! Instances are stored as JSON objects with a `kind` discriminator:
//!
//! ```json
//! { "kind": "gap", "capacities": [10, 10], "values": [[...], [...]], "sizes": [[...], [...]] }
//! { "kind": "knapsack", "capacity": 10, "values": [...], "sizes": [...] }
//! ```
//!
//! Numbers are integer literals, decimal strings (`"0.25"`), or rational
//! strings (`"1/3"`). Non-integer JSON number literals are rejected so that
//! loading is always exact; saving emits integers as literals and everything
//! else as `p/q` strings, which makes save-then-load the identity.

use super::{GapInstance, KnapsackInstance, ModelError};
use crate::scalar::Rat;
use crate::util::short_digest;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::{Map, Value};
use std::str::FromStr;

/// Either kind of instance, as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceFile {
    Gap(GapInstance),
    Knapsack(KnapsackInstance),
}

impl InstanceFile {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Gap(_) => "gap",
            Self::Knapsack(_) => "knapsack",
        }
    }

    pub fn num_items(&self) -> usize {
        match self {
            Self::Gap(inst) => inst.num_items(),
            Self::Knapsack(inst) => inst.num_items(),
        }
    }

    pub fn num_bins(&self) -> usize {
        match self {
            Self::Gap(inst) => inst.num_bins(),
            Self::Knapsack(_) => 1,
        }
    }

    pub fn digest(&self) -> String {
        short_digest(&save_instance(self))
    }
}

fn parse_err(location: &str, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        location: location.to_string(),
        message: message.into(),
    }
}

fn parse_decimal(text: &str, location: &str) -> Result<Rat, ModelError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(parse_err(location, "empty number"));
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(parse_err(location, format!("`{text}` is not a number")));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(parse_err(location, format!("`{text}` is not a number")));
    }
    let joined = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if joined.is_empty() { "0" } else { &joined })
        .map_err(|e| parse_err(location, e.to_string()))?;
    let denom = BigInt::from(10u8).pow(frac_part.len() as u32);
    Ok(Rat::new(numer * sign, denom))
}

fn parse_rat_str(text: &str, location: &str) -> Result<Rat, ModelError> {
    match text.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim())
                .map_err(|_| parse_err(location, format!("bad numerator in `{text}`")))?;
            let q = BigInt::from_str(q.trim())
                .map_err(|_| parse_err(location, format!("bad denominator in `{text}`")))?;
            if q.is_zero() {
                return Err(parse_err(location, "zero denominator"));
            }
            Ok(Rat::new(p, q))
        }
        None => parse_decimal(text, location),
    }
}

/// Parses a number in any of the textual forms the instance format accepts:
/// integer, decimal, or `p/q`.
pub fn parse_rational(text: &str) -> Result<Rat, ModelError> {
    parse_rat_str(text, "argument")
}

fn rat_from_value(value: &Value, location: &str) -> Result<Rat, ModelError> {
    match value {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_integer(BigInt::from(i)))
            } else if let Some(u) = n.as_u64() {
                Ok(Rat::from_integer(BigInt::from(u)))
            } else {
                Err(parse_err(
                    location,
                    "non-integer numeric literal; write decimals as strings, e.g. \"0.25\"",
                ))
            }
        }
        Value::String(s) => parse_rat_str(s, location),
        other => Err(parse_err(
            location,
            format!("expected a number, got {other}"),
        )),
    }
}

fn rat_vec(value: &Value, location: &str) -> Result<Vec<Rat>, ModelError> {
    let arr = value
        .as_array()
        .ok_or_else(|| parse_err(location, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(k, v)| rat_from_value(v, &format!("{location}[{k}]")))
        .collect()
}

fn rat_matrix(value: &Value, location: &str) -> Result<Vec<Vec<Rat>>, ModelError> {
    let arr = value
        .as_array()
        .ok_or_else(|| parse_err(location, "expected an array of arrays"))?;
    arr.iter()
        .enumerate()
        .map(|(i, row)| rat_vec(row, &format!("{location}[{i}]")))
        .collect()
}

fn expect_keys(map: &Map<String, Value>, allowed: &[&str]) -> Result<(), ModelError> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(parse_err(key, "unknown field"));
        }
    }
    for key in allowed {
        if !map.contains_key(*key) {
            return Err(parse_err(key, "missing field"));
        }
    }
    Ok(())
}

/// Parses and validates an instance file. Schema violations are reported with
/// their location; invariant violations surface as the validation errors.
pub fn load_instance(bytes: &[u8]) -> Result<InstanceFile, ModelError> {
    let value: Value = serde_json::from_slice(bytes)
        .map_err(|e| parse_err(&format!("line {}", e.line()), e.to_string()))?;
    let map = value
        .as_object()
        .ok_or_else(|| parse_err("top level", "expected an object"))?;
    let kind = map
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| parse_err("kind", "missing or non-string"))?;
    match kind {
        "gap" => {
            expect_keys(map, &["kind", "capacities", "values", "sizes"])?;
            let capacities = rat_vec(&map["capacities"], "capacities")?;
            let values = rat_matrix(&map["values"], "values")?;
            let sizes = rat_matrix(&map["sizes"], "sizes")?;
            Ok(InstanceFile::Gap(GapInstance::new(
                capacities, values, sizes,
            )?))
        }
        "knapsack" => {
            expect_keys(map, &["kind", "capacity", "values", "sizes"])?;
            let capacity = rat_from_value(&map["capacity"], "capacity")?;
            let values = rat_vec(&map["values"], "values")?;
            let sizes = rat_vec(&map["sizes"], "sizes")?;
            Ok(InstanceFile::Knapsack(KnapsackInstance::new(
                capacity, values, sizes,
            )?))
        }
        other => Err(parse_err("kind", format!("unknown kind `{other}`"))),
    }
}

fn rat_to_value(r: &Rat) -> Value {
    if r.is_integer() {
        if let Some(i) = r.numer().to_i64() {
            return Value::from(i);
        }
    }
    Value::String(r.to_string())
}

/// Serializes an instance. The output is canonical: loading it reproduces the
/// instance exactly, and equal instances serialize to equal bytes.
pub fn save_instance(inst: &InstanceFile) -> Vec<u8> {
    let mut map = Map::new();
    map.insert("kind".into(), Value::from(inst.kind()));
    match inst {
        InstanceFile::Gap(gap) => {
            let m = gap.num_bins();
            let n = gap.num_items();
            map.insert(
                "capacities".into(),
                Value::Array((0..m).map(|i| rat_to_value(gap.capacity(i))).collect()),
            );
            map.insert(
                "values".into(),
                Value::Array(
                    (0..m)
                        .map(|i| {
                            Value::Array((0..n).map(|j| rat_to_value(gap.value(i, j))).collect())
                        })
                        .collect(),
                ),
            );
            map.insert(
                "sizes".into(),
                Value::Array(
                    (0..m)
                        .map(|i| {
                            Value::Array((0..n).map(|j| rat_to_value(gap.size(i, j))).collect())
                        })
                        .collect(),
                ),
            );
        }
        InstanceFile::Knapsack(ks) => {
            let n = ks.num_items();
            map.insert("capacity".into(), rat_to_value(ks.capacity()));
            map.insert(
                "values".into(),
                Value::Array((0..n).map(|j| rat_to_value(ks.value(j))).collect()),
            );
            map.insert(
                "sizes".into(),
                Value::Array((0..n).map(|j| rat_to_value(ks.size(j))).collect()),
            );
        }
    }
    let mut bytes = serde_json::to_vec_pretty(&Value::Object(map)).expect("serialization");
    bytes.push(b'\n');
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_uniform_gap, GapGenRanges};
    use proptest::prelude::*;

    fn rat(n: i64) -> Rat {
        Rat::from_integer(BigInt::from(n))
    }

    #[test]
    fn parses_integers_decimals_and_ratios() {
        let bytes = br#"{
            "kind": "knapsack",
            "capacity": 10,
            "values": ["0.5", "1/3", 2],
            "sizes": ["2.25", "7/2", 1]
        }"#;
        let InstanceFile::Knapsack(inst) = load_instance(bytes).unwrap() else {
            panic!("expected knapsack");
        };
        assert_eq!(inst.value(0), &Rat::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(inst.value(1), &Rat::new(BigInt::from(1), BigInt::from(3)));
        assert_eq!(inst.size(0), &Rat::new(BigInt::from(9), BigInt::from(4)));
        assert_eq!(inst.size(1), &Rat::new(BigInt::from(7), BigInt::from(2)));
    }

    #[test]
    fn rejects_unknown_fields() {
        let bytes =
            br#"{"kind": "knapsack", "capacity": 1, "values": [1], "sizes": [1], "extra": 0}"#;
        let err = load_instance(bytes).unwrap_err();
        assert!(matches!(err, ModelError::Parse { ref location, .. } if location == "extra"));
    }

    #[test]
    fn rejects_truncated_files() {
        let bytes = br#"{"kind": "knapsack", "capacity": 1,"#;
        assert!(matches!(
            load_instance(bytes),
            Err(ModelError::Parse { .. })
        ));
    }

    #[test]
    fn rejects_float_literals() {
        let bytes = br#"{"kind": "knapsack", "capacity": 1.5, "values": [1], "sizes": [1]}"#;
        assert!(matches!(
            load_instance(bytes),
            Err(ModelError::Parse { .. })
        ));
    }

    #[test]
    fn validation_runs_on_load() {
        let bytes = br#"{"kind": "gap", "capacities": [1], "values": [[1]], "sizes": [["3/2"]]}"#;
        assert_eq!(
            load_instance(bytes).unwrap_err(),
            ModelError::SizeExceedsCapacity { bin: 0, item: 0 }
        );
    }

    #[test]
    fn round_trip_gap_instance() {
        let inst = gen_uniform_gap(6, 2, 11, &GapGenRanges::default()).unwrap();
        let file = InstanceFile::Gap(inst);
        let bytes = save_instance(&file);
        assert_eq!(load_instance(&bytes).unwrap(), file);
        // Canonical bytes: saving again is identical.
        let again = save_instance(&load_instance(&bytes).unwrap());
        assert_eq!(bytes, again);
    }

    proptest! {
        #[test]
        fn round_trip_arbitrary_rationals(
            numers in proptest::collection::vec(1i64..1_000_000, 3),
            denoms in proptest::collection::vec(1i64..1_000, 3),
        ) {
            let sizes: Vec<Rat> = numers
                .iter()
                .zip(&denoms)
                .map(|(&p, &q)| Rat::new(BigInt::from(p), BigInt::from(q)))
                .collect();
            let cap = sizes.iter().cloned().fold(rat(0), |a, b| a + b) + rat(1);
            let inst = KnapsackInstance::new(cap, vec![rat(1), rat(2), rat(3)], sizes).unwrap();
            let file = InstanceFile::Knapsack(inst);
            let bytes = save_instance(&file);
            prop_assert_eq!(load_instance(&bytes).unwrap(), file);
        }
    }
}
