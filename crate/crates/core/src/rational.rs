//! Exact rational numbers and their `"p/q"` string form.

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serializer};
use thiserror::Error;

/// Exact rational used for every loss and error value in the crate.
pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?}: expected an integer or \"p/q\"")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"` or an integer literal.
pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    match text.split_once('/') {
        Some((num, den)) => {
            let num: i64 = num.parse().map_err(|_| err())?;
            let den: i64 = den.parse().map_err(|_| err())?;
            if den == 0 {
                return Err(err());
            }
            Ok(Rational::new(num, den))
        }
        None => text.parse::<i64>().map(Rational::from_integer).map_err(|_| err()),
    }
}

/// Canonical text form: reduced `"p/q"`, or `"p"` for integers.
pub fn format(value: &Rational) -> String {
    value.to_string()
}

pub fn to_f64(value: &Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

pub fn is_nonnegative(value: &Rational) -> bool {
    *value >= Rational::zero()
}

/// Serde adapter storing a [`Rational`] as its canonical string.
pub mod as_string {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Option<Rational>`.
pub mod as_opt_string {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_some(&format(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let text = Option::<String>::deserialize(d)?;
        text.map(|t| parse(&t).map_err(serde::de::Error::custom)).transpose()
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod vec_as_string {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&format(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts.iter().map(|t| parse(t).map_err(serde::de::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!(parse("3").unwrap(), Rational::from_integer(3));
        assert_eq!(parse("2/6").unwrap(), Rational::new(1, 3));
        assert_eq!(parse("-1/2").unwrap(), Rational::new(-1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("one").is_err());
        assert!(parse("1.5").is_err());
    }

    #[test]
    fn canonical_format() {
        assert_eq!(format(&Rational::new(4, 2)), "2");
        assert_eq!(format(&Rational::new(2, 6)), "1/3");
        assert_eq!(parse(&format(&Rational::new(7, 9))).unwrap(), Rational::new(7, 9));
    }
}
