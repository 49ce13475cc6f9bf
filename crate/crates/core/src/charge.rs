// SPDX-License-Identifier: Apache-2.0

//! The electric charge parameter `q`, kept as a reduced fraction so that
//! cache headers, file names and reports can name it exactly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A charge `q = num / den` restricted to `[0, 1/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Charge {
    num: u32,
    den: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Charge {
    pub const ZERO: Charge = Charge { num: 0, den: 1 };
    pub const HALF: Charge = Charge { num: 1, den: 2 };
    pub const QUARTER: Charge = Charge { num: 1, den: 4 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("charge denominator is zero".into()));
        }
        if 2 * u64::from(num) > u64::from(den) {
            return Err(Error::ChargeOutOfRange(f64::from(num) / f64::from(den)));
        }
        if num == 0 {
            return Ok(Self::ZERO);
        }
        let g = gcd(num, den);
        Ok(Charge {
            num: num / g,
            den: den / g,
        })
    }

    /// `1/m` for a directed cycle of length `m >= 2`.
    pub fn reciprocal(m: usize) -> Result<Self> {
        let m = u32::try_from(m).map_err(|_| Error::InvalidParameter(format!("cycle length {m}")))?;
        if m < 2 {
            return Err(Error::InvalidParameter(format!("cycle length {m} < 2")));
        }
        Self::new(1, m)
    }

    pub fn numer(self) -> u32 {
        self.num
    }

    pub fn denom(self) -> u32 {
        self.den
    }

    pub fn value(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// `q ∈ {0, 1/2}`: every phase is ±1 and the pipeline stays real.
    pub fn is_real_degenerate(self) -> bool {
        self.num == 0 || (self.num == 1 && self.den == 2)
    }
}

impl Default for Charge {
    fn default() -> Self {
        Self::ZERO
    }
}

impl PartialOrd for Charge {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Charge {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (u64::from(self.num) * u64::from(other.den)).cmp(&(u64::from(other.num) * u64::from(self.den)))
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Charge {
    type Err = Error;

    /// Accepts `"0"`, `"1/3"` or a terminating decimal such as `"0.25"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse charge `{s}`"));
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse::<u32>().map_err(|_| bad())?;
            let d = d.trim().parse::<u32>().map_err(|_| bad())?;
            return Self::new(n, d);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int = if int.is_empty() { 0 } else { int.parse::<u32>().map_err(|_| bad())? };
        let den = 10u32.pow(frac.len() as u32);
        let frac_num = if frac.is_empty() { 0 } else { frac.parse::<u32>().map_err(|_| bad())? };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_num))
            .ok_or_else(bad)?;
        Self::new(num, den)
    }
}

impl Serialize for Charge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Charge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Number(x) => format!("{x}").parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!("1/3".parse::<Charge>().unwrap(), Charge::new(1, 3).unwrap());
        assert_eq!("0.25".parse::<Charge>().unwrap(), Charge::QUARTER);
        assert_eq!("0.2".parse::<Charge>().unwrap(), Charge::new(1, 5).unwrap());
        assert_eq!("2/8".parse::<Charge>().unwrap(), Charge::QUARTER);
        assert_eq!("0".parse::<Charge>().unwrap(), Charge::ZERO);
        assert!("0.6".parse::<Charge>().is_err());
        assert!("x".parse::<Charge>().is_err());
    }

    #[test]
    fn ordering_and_degeneracy() {
        let third = Charge::reciprocal(3).unwrap();
        assert!(third < Charge::HALF);
        assert!(Charge::ZERO < third);
        assert!(Charge::HALF.is_real_degenerate());
        assert!(Charge::ZERO.is_real_degenerate());
        assert!(!Charge::QUARTER.is_real_degenerate());
        assert!(Charge::reciprocal(1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let q: Charge = serde_json::from_str("\"1/5\"").unwrap();
        assert_eq!(serde_json::to_string(&q).unwrap(), "\"1/5\"");
        let q: Charge = serde_json::from_str("0.25").unwrap();
        assert_eq!(q, Charge::QUARTER);
    }
}
