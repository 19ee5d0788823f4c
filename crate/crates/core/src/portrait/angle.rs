use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PortraitError;
use crate::scalar::Real;

/// A point of the circle ℝ/ℤ stored as a reduced fraction `num/den` with
/// `0 ≤ num < den`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Angle {
    num: BigUint,
    den: BigUint,
}

/// Preperiod and period of an angle under multiplication by the degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitSummary {
    pub preperiod: usize,
    pub period: usize,
    /// Distinct orbit points, `orbit[preperiod + period]` would repeat `orbit[preperiod]`.
    pub orbit: Vec<Angle>,
}

impl OrbitSummary {
    pub fn is_periodic(&self) -> bool {
        self.preperiod == 0
    }
}

impl Angle {
    /// Builds `num/den mod 1` in lowest terms.
    pub fn new(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Result<Self, PortraitError> {
        let num = num.into();
        let den = den.into();
        if den.is_zero() {
            return Err(PortraitError::ZeroDenominator);
        }
        Ok(Self::reduced(num % &den, den))
    }

    fn reduced(num: BigUint, den: BigUint) -> Self {
        if num.is_zero() {
            return Self { num, den: BigUint::one() };
        }
        let g = num.gcd(&den);
        Self { num: num / &g, den: den / g }
    }

    pub fn zero() -> Self {
        Self { num: BigUint::zero(), den: BigUint::one() }
    }

    /// Shorthand for small fractions; panics on a zero denominator.
    pub fn frac(num: u64, den: u64) -> Self {
        Self::new(num, den).expect("nonzero denominator")
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn den(&self) -> &BigUint {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Image under the degree-`d` covering map of the circle.
    pub fn times(&self, d: u32) -> Self {
        Self::reduced((&self.num * BigUint::from(d)) % &self.den, self.den.clone())
    }

    /// Image under the `n`-th iterate of multiplication by `d`.
    pub fn times_pow(&self, d: u32, n: usize) -> Self {
        let factor = BigUint::from(d).modpow(&BigUint::from(n), &self.den);
        Self::reduced((&self.num * factor) % &self.den, self.den.clone())
    }

    /// `(self + k) / d`, one of the `d` preimages under multiplication by `d`.
    pub fn preimage(&self, d: u32, k: u32) -> Self {
        let num = &self.num + BigUint::from(k) * &self.den;
        Self::reduced(num, &self.den * BigUint::from(d))
    }

    /// Additive inverse on the circle.
    pub fn negated(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self::reduced(&self.den - &self.num, self.den.clone())
    }

    pub fn to_real<T: Real>(&self) -> T {
        match (self.num.to_u64(), self.den.to_u64()) {
            (Some(n), Some(d)) => T::lit(n as f64 / d as f64),
            _ => {
                let n = self.num.to_f64().unwrap_or(0.0);
                let d = self.den.to_f64().unwrap_or(1.0);
                T::lit(n / d)
            }
        }
    }

    /// Forward orbit under multiplication by `d` up to the first repetition.
    pub fn orbit(&self, d: u32) -> OrbitSummary {
        let mut seen: HashMap<Angle, usize> = HashMap::new();
        let mut orbit = Vec::new();
        let mut current = self.clone();
        loop {
            if let Some(&first) = seen.get(&current) {
                return OrbitSummary { preperiod: first, period: orbit.len() - first, orbit };
            }
            seen.insert(current.clone(), orbit.len());
            let next = current.times(d);
            orbit.push(current);
            current = next;
        }
    }
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Angle {
    type Err = PortraitError;

    /// Accepts `p/q` or a bare integer (taken mod 1).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PortraitError::Parse(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigUint = n.trim().parse().map_err(|_| bad())?;
                let d: BigUint = d.trim().parse().map_err(|_| bad())?;
                Angle::new(n, d)
            }
            None => {
                let n: BigUint = s.parse().map_err(|_| bad())?;
                Angle::new(n, 1u32)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BigRepr {
    Small(u64),
    Text(String),
}

impl BigRepr {
    fn from_big(v: &BigUint) -> Self {
        v.to_u64().map(BigRepr::Small).unwrap_or_else(|| BigRepr::Text(v.to_string()))
    }

    fn into_big(self) -> Result<BigUint, String> {
        match self {
            BigRepr::Small(v) => Ok(BigUint::from(v)),
            BigRepr::Text(s) => s.parse().map_err(|_| format!("not an unsigned integer: {s}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AngleRepr {
    num: BigRepr,
    den: BigRepr,
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        AngleRepr { num: BigRepr::from_big(&self.num), den: BigRepr::from_big(&self.den) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = AngleRepr::deserialize(d)?;
        let num = repr.num.into_big().map_err(D::Error::custom)?;
        let den = repr.den.into_big().map_err(D::Error::custom)?;
        Angle::new(num, den).map_err(D::Error::custom)
    }
}
