//! Spread of `|y_nu|^2` over a (mass, alpha) grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::LevyIndex;
use crate::scales::{ln_k, ParticleSpec, PhysicalConstants};
use crate::spectrum::log10_spread_diagnostic;

/// Cells with a variance below `10^WHITE_LOG10` are flagged.
pub const WHITE_LOG10: f64 = -80.0;

/// Evaluation point used for the mass sweep.
pub const SWEEP_XI0: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub mass_kg: f64,
    pub alpha: LevyIndex,
    pub log10_variance: f64,
    pub white: bool,
}

/// `n` points from `lo` to `hi`, equally spaced in `log10`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 || (n == 1 && hi != lo) {
        return Err(Error::InvalidGrid(format!("log grid {lo}..{hi} with {n} points")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64),
        })
        .collect())
}

/// `11/20, 12/20, ..., 19/20`, reduced.
pub fn default_alpha_grid() -> Vec<LevyIndex> {
    (11..=19).map(|n| LevyIndex::new(n, 20).expect("in range")).collect()
}

/// One cell per (mass, alpha), masses outer. Cells are independent and
/// computed in parallel; the output order is the input order.
pub fn heatmap(pc: &PhysicalConstants, masses: &[f64], alphas: &[LevyIndex], xi0: f64, tol: f64) -> Result<Vec<HeatmapCell>> {
    if masses.is_empty() || alphas.is_empty() {
        return Err(Error::InvalidGrid("empty mass or alpha grid".into()));
    }
    let cells: Vec<(f64, LevyIndex)> = masses
        .iter()
        .flat_map(|&m| alphas.iter().map(move |&a| (m, a)))
        .collect();
    cells
        .par_iter()
        .map(|&(mass, alpha)| {
            let p = ParticleSpec::new("sweep", mass)?;
            let log10_variance = log10_spread_diagnostic(alpha, ln_k(pc, &p, alpha), xi0, tol)?;
            Ok(HeatmapCell { mass_kg: mass, alpha, log10_variance, white: log10_variance < WHITE_LOG10 })
        })
        .collect()
}
