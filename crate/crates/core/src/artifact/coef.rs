//! Exact rational coefficients and extended bounds.
//!
//! Integers serialize as JSON integers, other values as `"p/q"` strings, so a
//! document round-trips byte-for-byte without floating point.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coef(pub Rational64);

impl Coef {
    pub fn int(n: i64) -> Coef {
        Coef(Rational64::from_integer(n))
    }

    pub fn new(num: i64, den: i64) -> Coef {
        Coef(Rational64::new(num, den))
    }

    pub fn zero() -> Coef {
        Coef(Rational64::zero())
    }

    pub fn one() -> Coef {
        Coef::int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Coef {
        Coef(self.0.abs())
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl std::ops::Neg for Coef {
    type Output = Coef;
    fn neg(self) -> Coef {
        Coef(-self.0)
    }
}

impl std::ops::Div for Coef {
    type Output = Coef;
    fn div(self, rhs: Coef) -> Coef {
        Coef(self.0 / rhs.0)
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.0.denom() == 1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefParseError(pub String);

impl fmt::Display for CoefParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid coefficient {:?}", self.0)
    }
}

impl std::error::Error for CoefParseError {}

impl FromStr for Coef {
    type Err = CoefParseError;

    /// Accepts `"p"`, `"p/q"` and finite decimals such as `"-1.25"` or `"2e-3"`.
    fn from_str(s: &str) -> Result<Coef, CoefParseError> {
        let err = || CoefParseError(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| err())?;
            let q: i64 = q.trim().parse().map_err(|_| err())?;
            if q == 0 {
                return Err(err());
            }
            return Ok(Coef::new(p, q));
        }
        if let Ok(n) = t.parse::<i64>() {
            return Ok(Coef::int(n));
        }
        parse_decimal(t).ok_or_else(err)
    }
}

fn parse_decimal(t: &str) -> Option<Coef> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num: i64 = if all.is_empty() { 0 } else { all.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let pow = 10i64.checked_pow(scale.unsigned_abs())?;
    let r = if scale >= 0 { Rational64::from_integer(num.checked_mul(pow)?) } else { Rational64::new(num, pow) };
    Some(Coef(r))
}

impl Serialize for Coef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if *self.0.denom() == 1 {
            s.serialize_i64(*self.0.numer())
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

struct CoefVisitor;

impl Visitor<'_> for CoefVisitor {
    type Value = Coef;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer, a decimal, or a \"p/q\" string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Coef, E> {
        Ok(Coef::int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Coef, E> {
        i64::try_from(v).map(Coef::int).map_err(|_| E::custom("integer out of range"))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Coef, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite coefficient"));
        }
        // Shortest round-trip repr, then exact decimal parse.
        format!("{v:e}").parse().map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Coef, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Coef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Coef, D::Error> {
        d.deserialize_any(CoefVisitor)
    }
}

/// A coefficient extended with the two infinities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtNum {
    NegInf,
    Finite(Coef),
    PosInf,
}

impl ExtNum {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtNum::Finite(_))
    }

    pub fn finite(&self) -> Option<Coef> {
        match self {
            ExtNum::Finite(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, ExtNum::NegInf)
    }

    pub fn is_pos_inf(&self) -> bool {
        matches!(self, ExtNum::PosInf)
    }

    pub fn int(n: i64) -> ExtNum {
        ExtNum::Finite(Coef::int(n))
    }
}

impl PartialOrd for ExtNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtNum {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtNum::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNum::NegInf => f.write_str("-inf"),
            ExtNum::PosInf => f.write_str("inf"),
            ExtNum::Finite(c) => c.fmt(f),
        }
    }
}

impl Serialize for ExtNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtNum::NegInf => s.serialize_str("-inf"),
            ExtNum::PosInf => s.serialize_str("inf"),
            ExtNum::Finite(c) => c.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<ExtNum, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtNum;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a coefficient, \"inf\" or \"-inf\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtNum, E> {
                CoefVisitor.visit_i64(v).map(ExtNum::Finite)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtNum, E> {
                CoefVisitor.visit_u64(v).map(ExtNum::Finite)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtNum, E> {
                CoefVisitor.visit_f64(v).map(ExtNum::Finite)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtNum, E> {
                match v.trim() {
                    "inf" | "+inf" | "infinity" => Ok(ExtNum::PosInf),
                    "-inf" | "-infinity" => Ok(ExtNum::NegInf),
                    other => CoefVisitor.visit_str(other).map(ExtNum::Finite),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!("3".parse::<Coef>().unwrap(), Coef::int(3));
        assert_eq!("-1/2".parse::<Coef>().unwrap(), Coef::new(-1, 2));
        assert_eq!("0.25".parse::<Coef>().unwrap(), Coef::new(1, 4));
        assert_eq!("1.5e2".parse::<Coef>().unwrap(), Coef::int(150));
        assert!("x".parse::<Coef>().is_err());
        assert!("1/0".parse::<Coef>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let v: Vec<Coef> = serde_json::from_str(r#"[2, "3/4", 0.5, "-7"]"#).unwrap();
        assert_eq!(v, vec![Coef::int(2), Coef::new(3, 4), Coef::new(1, 2), Coef::int(-7)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[2,"3/4","1/2",-7]"#);
    }

    #[test]
    fn ext_order() {
        assert!(ExtNum::NegInf < ExtNum::int(-5));
        assert!(ExtNum::int(5) < ExtNum::PosInf);
        let e: ExtNum = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(e, ExtNum::PosInf);
    }
}
