//! Serde helpers for exact rationals, written as `"num/den"` strings.

pub mod rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::arith::Rational;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }

    pub fn format(x: &Rational) -> String {
        format!("{}/{}", x.numer(), x.denom())
    }

    pub fn parse(s: &str) -> Result<Rational, String> {
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n: i128 = n.trim().parse().map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
        let d: i128 = d.trim().parse().map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
        if d == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Rational::new(n, d))
    }
}
