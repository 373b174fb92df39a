//! Value parsers for grid and index flags.

use fracgrav::LevyIndex;

/// Largest denominator used when snapping decimal alpha values.
pub const SNAP_MAX_DEN: u64 = 40;

/// `lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn linear(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i == self.n - 1 { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:e}:{:e}:{}", self.lo, self.hi, self.n)
    }
}

fn real(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("`{s}`: expected lo:hi:count"));
    };
    let (lo, hi) = (real(lo)?, real(hi)?);
    let n: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a point count"))?;
    if n == 0 || hi < lo || (n == 1 && hi != lo) || (n > 1 && hi == lo) {
        return Err(format!("`{s}`: need count >= 1 and lo < hi (lo = hi only for a single point)"));
    }
    Ok(GridSpec { lo, hi, n })
}

/// `lo:hi`.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let Some((lo, hi)) = s.split_once(':') else {
        return Err(format!("`{s}`: expected lo:hi"));
    };
    let (lo, hi) = (real(lo)?, real(hi)?);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("`{s}`: need lo < hi"))
    }
}

pub fn parse_alpha(s: &str) -> Result<LevyIndex, String> {
    s.parse::<LevyIndex>().map_err(|e| e.to_string())
}

/// An alpha list entry: exact `n/m`, or a decimal snapped to the nearest
/// `n/m` with `m <= 40`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaEntry {
    pub alpha: LevyIndex,
    pub snapped_from: Option<f64>,
}

pub fn parse_alpha_entry(s: &str) -> Result<AlphaEntry, String> {
    let s = s.trim();
    if s.contains('/') {
        return Ok(AlphaEntry { alpha: parse_alpha(s)?, snapped_from: None });
    }
    let x = real(s)?;
    let alpha = LevyIndex::snap(x, SNAP_MAX_DEN).map_err(|e| e.to_string())?;
    Ok(AlphaEntry { alpha, snapped_from: Some(x) })
}

pub fn positive(s: &str) -> Result<f64, String> {
    let x = real(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("`{s}` must be > 0"))
    }
}

pub fn non_negative(s: &str) -> Result<f64, String> {
    let x = real(s)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("`{s}` must be >= 0"))
    }
}

pub fn finite(s: &str) -> Result<f64, String> {
    real(s)
}

/// `auto` or a non-negative real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Auto,
    Value(f64),
}

pub fn parse_beta(s: &str) -> Result<Beta, String> {
    if s.trim().eq_ignore_ascii_case("auto") {
        Ok(Beta::Auto)
    } else {
        non_negative(s).map(Beta::Value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("0:3:301").unwrap();
        let v = g.linear();
        assert_eq!(v.len(), 301);
        assert_eq!((v[0], v[300]), (0.0, 3.0));
        assert!((v[100] - 1.0).abs() < 1e-15);
        assert!(parse_grid("0:3").is_err());
        assert!(parse_grid("3:0:4").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert_eq!(parse_grid("2:2:1").unwrap().linear(), vec![2.0]);
    }

    #[test]
    fn alpha_entries() {
        assert_eq!(parse_alpha_entry("3/4").unwrap().snapped_from, None);
        let e = parse_alpha_entry("0.75").unwrap();
        assert_eq!(e.alpha.to_string(), "3/4");
        assert_eq!(e.snapped_from, Some(0.75));
        assert_eq!(parse_alpha_entry("0.7071").unwrap().alpha.to_string(), "12/17");
        assert!(parse_alpha_entry("0.5").is_err());
        assert!(parse_alpha("0.75").is_err());
        assert!(parse_alpha("1/2").is_err());
    }

    #[test]
    fn beta() {
        assert_eq!(parse_beta("auto").unwrap(), Beta::Auto);
        assert_eq!(parse_beta("1e-3").unwrap(), Beta::Value(1e-3));
        assert!(parse_beta("-1").is_err());
    }
}
