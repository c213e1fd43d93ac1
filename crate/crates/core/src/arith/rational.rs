//! Rational scalars and their string form.
//!
//! Rationals travel through JSON and CSV as `"p/q"` (or `"n"` for integers).

use rug::{Float, Integer};

use super::ArithError;

pub type Rational = rug::Rational;

/// Parses `"p/q"`, `"n"` or a plain decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational, ArithError> {
    let t = s.trim();
    let err = || ArithError::Parse(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if t.contains('/') {
            return Err(err());
        }
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let n: Integer = digits.parse().map_err(|_| err())?;
        let d = Integer::from(Integer::u_pow_u(10, frac.len() as u32));
        let r = Rational::from((n, d));
        return Ok(if neg { -r } else { r });
    }
    let r: Rational = t.parse().map_err(|_| err())?;
    Ok(r)
}

pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::from((n, d))
}

pub fn int(n: i64) -> Rational {
    Rational::from(n)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64()
}

pub fn to_float(r: &Rational, prec: u32) -> Float {
    Float::with_val(prec, r)
}

/// Least common multiple of the denominators.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Integer {
    values
        .into_iter()
        .fold(Integer::from(1), |acc, r| acc.lcm(r.denom()))
}

/// Serde adapter storing a rational as its `"p/q"` string.
pub mod serde_str {
    use super::{parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

/// Same as [`serde_str`] for sequences.
pub mod serde_vec {
    use super::{parse_rational, Rational};
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&r.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(D::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("36/7").unwrap(), rat(36, 7));
        assert_eq!(parse_rational("-4/6").unwrap(), rat(-2, 3));
        assert_eq!(parse_rational("9").unwrap(), int(9));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "x", "1/0", "1/2/3", "1.2/3", "."] {
            assert!(parse_rational(s).is_err(), "{s:?}");
        }
    }

    #[test]
    fn display_is_p_over_q() {
        assert_eq!(rat(6, 4).to_string(), "3/2");
        assert_eq!(rat(-10, 5).to_string(), "-2");
    }
}
