//! Constraint system on `psi = sum C_nu y_nu`, degrees of freedom and
//! spectrum classification, plus the `|y_nu|^2` spread used as a
//! continuity diagnostic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{residual_of, FracOrder, GridFunction};
use crate::quantum::{enumerate_roots, root_count, LevyIndex};
use crate::solutions::{eval_y, eval_y_increment, eval_y_scaled, eval_y_scaled_floor, ScaledY, SolutionSpec};

/// Default relative rank cut.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

const NORM_POINTS: usize = 64;

/// Number of constraint rows.
pub const CONSTRAINT_COUNT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveFunction {
    pub alpha: LevyIndex,
    pub k: f64,
    coefficients: Vec<Complex64>,
}

impl WaveFunction {
    /// Requires one coefficient per root and `|sum C| <= 1e-10 max |C|`.
    pub fn new(alpha: LevyIndex, k: f64, coefficients: Vec<Complex64>) -> Result<Self> {
        if k <= 0.0 || !k.is_finite() {
            return Err(Error::InvalidScale(k));
        }
        let p = root_count(alpha);
        if coefficients.len() != p {
            return Err(Error::InvalidInput(format!("{} coefficients for {p} roots", coefficients.len())));
        }
        let sum = coefficients.iter().sum::<Complex64>().norm();
        let max = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if sum > 1e-10 * max {
            return Err(Error::ZeroSumViolated { sum, max });
        }
        Ok(WaveFunction { alpha, k, coefficients })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// `psi(xi)` with each `y_nu` at relative tolerance `tol`.
    pub fn eval(&self, xi: f64, tol: f64) -> Result<Complex64> {
        let specs = SolutionSpec::all(self.alpha, self.k)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, s) in self.coefficients.iter().zip(&specs) {
            if *c != Complex64::new(0.0, 0.0) {
                acc += c * eval_y(s, xi, tol)?.value;
            }
        }
        Ok(acc)
    }

    /// `psi` on `x0 + k h`, `k < len`, points evaluated in parallel.
    pub fn sample(&self, x0: f64, h: f64, len: usize, tol: f64) -> Result<GridFunction> {
        let values: Vec<Complex64> = (0..len)
            .into_par_iter()
            .map(|i| self.eval(x0 + i as f64 * h, tol))
            .collect::<Result<_>>()?;
        GridFunction::new(x0, h, values)
    }

    /// `max |D^(2a) psi - K xi psi|` over `range`, sampling `psi` from
    /// `range.0 - window` with step `h`.
    pub fn residual(&self, range: (f64, f64), h: f64, window: f64, tol: f64) -> Result<f64> {
        let (lo, hi) = range;
        if !(lo <= hi) || !(h > 0.0) {
            return Err(Error::InvalidInput(format!("range [{lo}, {hi}] with step {h}")));
        }
        let n_window = (window / h).round() as usize;
        let n_range = ((hi - lo) / h).round() as usize;
        let f = self.sample(lo - n_window as f64 * h, h, n_window + n_range + 1, tol)?;
        let ord = FracOrder::riemann_liouville(self.alpha.order())?;
        let r = residual_of(&f, ord, self.k, n_window as f64 * h, Some((lo, lo + n_range as f64 * h)))?;
        Ok(r.values().iter().map(|v| if v.norm().is_nan() { f64::INFINITY } else { v.norm() }).fold(0.0, f64::max))
    }
}

/// `xi` lying `u` natural lengths `K^(-1/q)` from the origin. The solutions
/// vary on this scale, so constraint points should be placed in these units
/// when `K` is far from 1.
pub fn natural_xi(alpha: LevyIndex, k: f64, u: f64) -> f64 {
    u / k.powf(1.0 / alpha.exponent())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstraintLabel {
    ZeroSum,
    BoundaryAtWall,
    DecayAtInfinity,
    Normalization,
}

impl ConstraintLabel {
    pub const ALL: [ConstraintLabel; CONSTRAINT_COUNT] = [
        ConstraintLabel::ZeroSum,
        ConstraintLabel::BoundaryAtWall,
        ConstraintLabel::DecayAtInfinity,
        ConstraintLabel::Normalization,
    ];
}

/// Rows are stored with unit Euclidean norm; scaling a row does not change
/// its null space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub alpha: LevyIndex,
    pub k: f64,
    pub xi_wall: f64,
    pub xi_far: f64,
    rows: DMatrix<Complex64>,
    labels: [ConstraintLabel; CONSTRAINT_COUNT],
}

impl ConstraintSystem {
    pub fn rows(&self) -> &DMatrix<Complex64> {
        &self.rows
    }

    pub fn labels(&self) -> &[ConstraintLabel] {
        &self.labels
    }

    pub fn root_count(&self) -> usize {
        self.rows.ncols()
    }
}

/// Scales a row of log-scaled values so its largest entry is O(1).
fn common_scale(values: &[ScaledY]) -> Vec<Complex64> {
    let top = values.iter().map(|v| v.ln_scale).fold(f64::NEG_INFINITY, f64::max);
    values.iter().map(|v| v.mantissa * (v.ln_scale - top).exp()).collect()
}

fn unit_row(row: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let norm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateSystem);
    }
    Ok(row.into_iter().map(|c| c / norm).collect())
}

// Pilot accuracy used to locate each row's scale.
const PILOT_TOL: f64 = 1e-6;

/// `y_nu(xi)` for every root, accurate to `tol` relative to the largest
/// entry of the row.
fn scaled_row(specs: &[SolutionSpec], xi: f64, tol: f64) -> Result<Vec<ScaledY>> {
    let pilot: Vec<ScaledY> = specs
        .par_iter()
        .map(|s| eval_y_scaled(s, xi, PILOT_TOL.max(tol)))
        .collect::<Result<_>>()?;
    let top = pilot.iter().map(|y| y.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
    let floor = tol.ln() + top;
    specs.par_iter().map(|s| eval_y_scaled_floor(s, xi, tol, floor)).collect()
}

/// Zero-sum, wall, far-point and grid-norm rows, one column per root.
pub fn build_constraints(alpha: LevyIndex, k: f64, xi_wall: f64, xi_far: f64, tol: f64) -> Result<ConstraintSystem> {
    if !(xi_wall < xi_far) || !xi_far.is_finite() || !xi_wall.is_finite() {
        return Err(Error::InvalidInput(format!("need xi_wall < xi_far, got {xi_wall} and {xi_far}")));
    }
    let specs = SolutionSpec::all(alpha, k)?;
    let p = specs.len();
    let zero_sum = vec![Complex64::new(1.0, 0.0); p];
    let wall = common_scale(&scaled_row(&specs, xi_wall, tol)?);
    let far = common_scale(&scaled_row(&specs, xi_far, tol)?);

    // ln of the RMS of |y_nu| over the grid, per root
    let grid: Vec<f64> = (0..NORM_POINTS)
        .map(|i| xi_wall + (xi_far - xi_wall) * i as f64 / (NORM_POINTS - 1) as f64)
        .collect();
    let ln_norms: Vec<f64> = specs
        .par_iter()
        .map(|s| {
            let pilot: Vec<f64> = grid
                .iter()
                .map(|&x| eval_y_scaled(s, x, PILOT_TOL.max(tol)).map(|y| y.ln_abs()))
                .collect::<Result<_>>()?;
            let floor = tol.ln() + pilot.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let logs: Vec<f64> = grid
                .iter()
                .map(|&x| eval_y_scaled_floor(s, x, tol, floor).map(|y| 2.0 * y.ln_abs()))
                .collect::<Result<_>>()?;
            let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mean = logs.iter().map(|l| (l - top).exp()).sum::<f64>() / NORM_POINTS as f64;
            Ok(0.5 * (top + mean.ln()))
        })
        .collect::<Result<_>>()?;
    let top = ln_norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let norm: Vec<Complex64> = ln_norms.iter().map(|l| Complex64::new((l - top).exp(), 0.0)).collect();

    let rows_vec = [zero_sum, wall, far, norm]
        .into_iter()
        .map(unit_row)
        .collect::<Result<Vec<_>>>()?;
    let rows = DMatrix::from_fn(CONSTRAINT_COUNT, p, |i, j| rows_vec[i][j]);
    Ok(ConstraintSystem { alpha, k, xi_wall, xi_far, rows, labels: ConstraintLabel::ALL })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Discrete,
    Continuous,
}

/// Classification from the root count alone: `P - 4` free coefficients.
/// Energy only translates the `xi` axis, so this does not depend on `E`.
pub fn classify(alpha: LevyIndex) -> (Classification, i64) {
    let dof = root_count(alpha) as i64 - CONSTRAINT_COUNT as i64;
    let class = if dof >= 1 { Classification::Continuous } else { Classification::Discrete };
    (class, dof)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub classification: Classification,
    /// `P - 4`.
    pub dof: i64,
    /// `P - rank`, the numerical null-space dimension.
    pub numerical_dof: usize,
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub p: usize,
    pub degeneracy_note: String,
}

struct Svd {
    sigma: Vec<f64>,
    /// Right singular vectors, one per column index, in descending sigma order.
    v: Vec<DVector<Complex64>>,
}

fn svd_full(a: &DMatrix<Complex64>) -> Svd {
    let (r, c) = a.shape();
    // pad to square so the full right basis comes back
    let n = r.max(c);
    let mut sq = DMatrix::<Complex64>::zeros(n, c);
    sq.view_mut((0, 0), (r, c)).copy_from(a);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    Svd {
        // padded zero rows add exact-zero singular values past min(r, c)
        sigma: order.iter().map(|&i| svd.singular_values[i]).collect(),
        v: order.iter().map(|&i| v_t.row(i).adjoint()).collect(),
    }
}

fn check_rank_tol(rank_tol: f64) -> Result<()> {
    let (lo, hi) = (1e-12, 1e-4);
    if rank_tol > lo && rank_tol < hi {
        Ok(())
    } else {
        Err(Error::InvalidTolerance { tol: rank_tol, lo, hi })
    }
}

fn numerical_rank(sigma: &[f64], rank_tol: f64) -> Result<usize> {
    let top = sigma.first().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::DegenerateSystem);
    }
    Ok(sigma.iter().filter(|&&s| s > rank_tol * top).count())
}

pub fn null_space_dim(cs: &ConstraintSystem, rank_tol: f64) -> Result<SpectrumReport> {
    check_rank_tol(rank_tol)?;
    let svd = svd_full(&cs.rows);
    let rank = numerical_rank(&svd.sigma, rank_tol)?;
    let p = cs.root_count();
    let (classification, dof) = classify(cs.alpha);
    let numerical_dof = p - rank;
    let degeneracy_note = match classification {
        Classification::Continuous => format!(
            "{p} roots against {CONSTRAINT_COUNT} conditions leave {dof} free coefficient(s): \
             any E admits a solution and each level is {}-fold degenerate",
            dof + 1
        ),
        Classification::Discrete => format!(
            "{p} roots against {CONSTRAINT_COUNT} conditions: all coefficients fixed, \
             energy quantised and non-degenerate"
        ),
    };
    Ok(SpectrumReport {
        classification,
        dof,
        numerical_dof,
        rank,
        singular_values: svd.sigma[..CONSTRAINT_COUNT.min(p)].to_vec(),
        p,
        degeneracy_note,
    })
}

/// Orthonormal basis of the numerical null space.
pub fn null_space_basis(cs: &ConstraintSystem, rank_tol: f64) -> Result<Vec<DVector<Complex64>>> {
    check_rank_tol(rank_tol)?;
    let svd = svd_full(&cs.rows);
    let rank = numerical_rank(&svd.sigma, rank_tol)?;
    Ok(svd.v.into_iter().skip(rank).collect())
}

/// `C = sum_i free_choice[i] * basis_i` over the numerical null space
/// (at [`DEFAULT_RANK_TOL`]).
pub fn assemble_wavefunction(cs: &ConstraintSystem, free_choice: &[Complex64]) -> Result<WaveFunction> {
    let basis = null_space_basis(cs, DEFAULT_RANK_TOL)?;
    if basis.is_empty() {
        return Err(Error::NoFreedom);
    }
    if free_choice.len() != basis.len() {
        return Err(Error::FreeChoiceLength { expected: basis.len(), got: free_choice.len() });
    }
    let p = cs.root_count();
    let mut c = DVector::<Complex64>::zeros(p);
    for (w, b) in free_choice.iter().zip(&basis) {
        c += b * *w;
    }
    // remove the rounding-level component along (1, ..., 1)
    let mean = c.sum() / p as f64;
    let coefficients: Vec<Complex64> = c.iter().map(|x| x - mean).collect();
    WaveFunction::new(cs.alpha, cs.k, coefficients)
}

/// `max_i |row_i . C| / |C|` over all constraint rows.
pub fn constraint_violation(cs: &ConstraintSystem, wf: &WaveFunction) -> f64 {
    let c = DVector::from_column_slice(wf.coefficients());
    let norm = c.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (&cs.rows * c).iter().map(|x| x.norm()).fold(0.0, f64::max) / norm
}

/// The combination with `sum C = 0` that vanishes at `xi_far`: the decaying
/// solution when exactly one such combination exists. Coefficients are
/// scaled to unit norm.
pub fn decaying_combination(alpha: LevyIndex, k: f64, xi_far: f64, tol: f64) -> Result<WaveFunction> {
    let specs = SolutionSpec::all(alpha, k)?;
    let p = specs.len();
    let far = unit_row(common_scale(&scaled_row(&specs, xi_far, tol)?))?;
    let ones = unit_row(vec![Complex64::new(1.0, 0.0); p])?;
    let a = DMatrix::from_fn(2, p, |i, j| if i == 0 { ones[j] } else { far[j] });
    let svd = svd_full(&a);
    let rank = numerical_rank(&svd.sigma, DEFAULT_RANK_TOL)?;
    let v = svd.v.get(rank).ok_or(Error::NoFreedom)?;
    let mean = v.sum() / p as f64;
    WaveFunction::new(alpha, k, v.iter().map(|x| x - mean).collect())
}

fn population_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

/// `log10 Var_nu |y_nu(xi0; K)|^2` (population variance over all roots),
/// with `K` given as `ln K` so extreme scales stay finite.
///
/// Uses `y(xi; K) = K^(1/q) y(K^(1/q) xi; 1)`. Near the origin the spread
/// comes from the increments `y_nu(u) - y_nu(0)`, since `|y_nu(0)|` is the
/// same for every root.
pub fn log10_spread_diagnostic(alpha: LevyIndex, ln_k: f64, xi0: f64, tol: f64) -> Result<f64> {
    if !ln_k.is_finite() || !xi0.is_finite() {
        return Err(Error::InvalidInput(format!("ln K = {ln_k}, xi0 = {xi0}")));
    }
    let q = alpha.exponent();
    let roots = enumerate_roots(alpha);
    if roots.len() < 2 || xi0 == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let ln10 = std::f64::consts::LN_10;
    let prefactor = 4.0 / q * ln_k;
    let ln_u = ln_k / q + xi0.abs().ln();
    let sign = xi0.signum();

    if ln_u <= 0.0 {
        let u = sign * ln_u.exp();
        let per_root: Vec<f64> = roots
            .par_iter()
            .map(|r| {
                let spec = SolutionSpec::new(alpha, 1.0, *r)?;
                let y0 = eval_y(&spec, 0.0, tol)?.value;
                let inc = eval_y_increment(alpha, r, u, tol)?.value;
                // (|y(u)|^2 - |y(0)|^2) / u
                Ok(2.0 * (y0.conj() * inc).re + u * inc.norm_sqr())
            })
            .collect::<Result<_>>()?;
        let var = population_variance(&per_root);
        return Ok((prefactor + 2.0 * ln_u + var.ln()) / ln10);
    }

    let u = sign * ln_u.exp();
    let logs: Vec<f64> = roots
        .par_iter()
        .map(|r| {
            let spec = SolutionSpec::new(alpha, 1.0, *r)?;
            eval_y_scaled(&spec, u, tol).map(|y| 2.0 * y.ln_abs())
        })
        .collect::<Result<_>>()?;
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let var = population_variance(&w);
    Ok((prefactor + 2.0 * top + var.ln()) / ln10)
}

/// `Var_nu |y_nu(xi0)|^2` as a double; may underflow to 0.
pub fn spread_diagnostic(alpha: LevyIndex, k: f64, xi0: f64, tol: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidScale(k));
    }
    let l = log10_spread_diagnostic(alpha, k.ln(), xi0, tol)?;
    let v = 10f64.powf(l);
    if v.is_infinite() {
        return Err(Error::Overflow(format!("spread 10^{l}")));
    }
    Ok(v)
}
