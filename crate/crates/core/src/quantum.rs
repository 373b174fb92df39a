//! Exact Levy indices and the fractional quantum numbers they induce.
//!
//! A Levy index `alpha = n/m` is kept as a reduced rational with
//! `1/2 < n/m <= 1`. The fractional quantum numbers are the solutions of
//! `eps^(2 alpha + 1) = 1`, resolved set-wise: writing `2 alpha + 1 = P/Q` in
//! lowest terms, the solution set is exactly the `P`-th roots of unity,
//! because multiplying exponents by `Q` permutes residues mod `P`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduced rational Levy index `alpha = n/m` with `1/2 < alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LevyIndex {
    n: u64,
    m: u64,
}

impl LevyIndex {
    /// The classical case `alpha = 1`.
    pub const CLASSICAL: LevyIndex = LevyIndex { n: 1, m: 1 };

    /// Builds `n/m`, reducing the fraction first.
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidLevyIndex(format!(
                "{n}/{m}: numerator and denominator must be positive"
            )));
        }
        let g = gcd(n, m);
        let (n, m) = (n / g, m / g);
        // 1/2 < n/m <= 1  <=>  m < 2n and n <= m
        if 2 * n <= m || n > m {
            return Err(Error::InvalidLevyIndex(format!(
                "{n}/{m} lies outside (1/2, 1]"
            )));
        }
        Ok(LevyIndex { n, m })
    }

    /// Nearest rational with denominator at most `max_den` to a decimal value.
    ///
    /// Ties are broken toward the smaller denominator.
    pub fn snap(value: f64, max_den: u64) -> Result<Self> {
        if !value.is_finite() || value <= 0.5 || value > 1.0 {
            return Err(Error::InvalidLevyIndex(format!(
                "{value} lies outside (1/2, 1]"
            )));
        }
        let mut best: Option<(f64, LevyIndex)> = None;
        for m in 1..=max_den.max(1) {
            let lo = m / 2 + 1;
            for n in lo..=m {
                if gcd(n, m) != 1 {
                    continue;
                }
                let d = (n as f64 / m as f64 - value).abs();
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, LevyIndex { n, m }));
                }
            }
        }
        best.map(|(_, a)| a).ok_or_else(|| {
            Error::InvalidLevyIndex(format!("no n/m with m <= {max_den} near {value}"))
        })
    }

    pub fn numerator(&self) -> u64 {
        self.n
    }

    pub fn denominator(&self) -> u64 {
        self.m
    }

    pub fn is_classical(&self) -> bool {
        self.n == self.m
    }

    pub fn value(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    /// Derivative order `2 alpha` (the Levy path dimension).
    pub fn order(&self) -> f64 {
        2.0 * self.value()
    }

    /// Exponent `2 alpha + 1` of the auxiliary integrand.
    pub fn exponent(&self) -> f64 {
        (2 * self.n + self.m) as f64 / self.m as f64
    }

    /// Numerator and denominator of `2 alpha + 1 = (2n + m)/m` in lowest terms.
    pub fn exponent_fraction(&self) -> (u64, u64) {
        let p = 2 * self.n + self.m;
        let g = gcd(p, self.m);
        (p / g, self.m / g)
    }
}

impl fmt::Display for LevyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.n, self.m)
    }
}

impl FromStr for LevyIndex {
    type Err = Error;

    /// Accepts only the literal form `n/m`. Decimal input is rejected with a
    /// suggested rational approximant.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some((num, den)) = s.split_once('/') else {
            let hint = s
                .parse::<f64>()
                .ok()
                .and_then(|x| LevyIndex::snap(x, 40).ok())
                .map(|a| format!("; nearest rational with m <= 40 is {a}"))
                .unwrap_or_default();
            return Err(Error::InvalidLevyIndex(format!(
                "`{s}` is not of the form n/m (irrational or decimal indices are not enumerable){hint}"
            )));
        };
        let parse = |t: &str| -> Result<u64> {
            let t = t.trim();
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::InvalidLevyIndex(format!(
                    "`{s}`: `{t}` is not a positive decimal integer"
                )));
            }
            t.parse::<u64>()
                .map_err(|e| Error::InvalidLevyIndex(format!("`{s}`: {e}")))
        };
        LevyIndex::new(parse(num)?, parse(den)?)
    }
}

/// One root `eps_nu` of `eps^(2 alpha + 1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionalQuantumNumber {
    pub index: usize,
    #[serde(serialize_with = "serialize_complex")]
    pub value: Complex64,
}

fn serialize_complex<S: serde::Serializer>(
    z: &Complex64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl FractionalQuantumNumber {
    pub fn arg(&self) -> f64 {
        self.value.im.atan2(self.value.re)
    }
}

/// Number of distinct solutions of `eps^((2n+m)/m) = 1`: the reduced numerator
/// of `(2n + m)/m`.
pub fn root_count(alpha: LevyIndex) -> usize {
    alpha.exponent_fraction().0 as usize
}

/// All fractional quantum numbers for `alpha`, ordered by argument in `[0, 2 pi)`.
pub fn enumerate_roots(alpha: LevyIndex) -> Vec<FractionalQuantumNumber> {
    let p = root_count(alpha);
    (0..p)
        .map(|j| {
            // Angles past pi are taken as -(2 pi (P - j)/P) so conjugate pairs
            // are bitwise conjugates.
            let theta = if 2 * j <= p {
                2.0 * PI * j as f64 / p as f64
            } else {
                -2.0 * PI * (p - j) as f64 / p as f64
            };
            // -1 is its own conjugate
            let value = if 2 * j == p { Complex64::new(-1.0, 0.0) } else { Complex64::from_polar(1.0, theta) };
            FractionalQuantumNumber { index: j, value }
        })
        .collect()
}

/// Which denominators a brute-force search visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenominatorFilter {
    #[default]
    All,
    Odd,
    Even,
}

impl DenominatorFilter {
    fn admits(self, m: u64) -> bool {
        match self {
            DenominatorFilter::All => true,
            DenominatorFilter::Odd => m % 2 == 1,
            DenominatorFilter::Even => m % 2 == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinNumerator {
    pub minimum: u64,
    pub witness: LevyIndex,
    /// Number of reduced fractions visited.
    pub visited: usize,
}

/// Exhaustive minimum of the reduced numerator of `(2n + m)/m` over reduced
/// `n/m` with `m <= m_max` and `1/2 < n/m < 1`.
pub fn min_numerator_bruteforce(m_max: u64) -> Result<MinNumerator> {
    min_numerator_filtered(m_max, DenominatorFilter::All)
}

pub fn min_numerator_filtered(m_max: u64, filter: DenominatorFilter) -> Result<MinNumerator> {
    if m_max < 3 {
        return Err(Error::InvalidInput(format!(
            "m_max = {m_max}: no fraction in (1/2, 1) has a denominator this small"
        )));
    }
    let mut best: Option<(u64, LevyIndex)> = None;
    let mut visited = 0;
    for m in 2..=m_max {
        if !filter.admits(m) {
            continue;
        }
        for n in (m / 2 + 1)..m {
            if gcd(n, m) != 1 {
                continue;
            }
            visited += 1;
            let p = 2 * n + m;
            let num = p / gcd(p, m);
            if best.map_or(true, |(b, _)| num < b) {
                best = Some((num, LevyIndex { n, m }));
            }
        }
    }
    let (minimum, witness) = best.ok_or_else(|| {
        Error::InvalidInput(format!("no admissible fraction with m <= {m_max}"))
    })?;
    Ok(MinNumerator {
        minimum,
        witness,
        visited,
    })
}
