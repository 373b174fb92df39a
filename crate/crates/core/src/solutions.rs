//! Auxiliary solutions
//! `y(xi) = eps * int_0^inf exp(eps xi t - t^q / (K q)) dt`, `q = 2 alpha + 1`,
//! evaluated by adaptive quadrature, and the check of the constant-residual
//! identity `D^(2 alpha) y - K xi y = K` against the numerical GL derivative.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{gl_tail_estimate, residual_of, FracOrder, GridFunction};
use crate::quadrature::{integrate_points, QuadOptions};
use crate::quantum::{enumerate_roots, FractionalQuantumNumber, LevyIndex};

/// Accepted range for quadrature tolerances.
pub const TOL_RANGE: (f64, f64) = (1e-14, 1e-2);

const MAX_PANELS: usize = 4000;

// Fraction of the admissible half-angle pi / (2q) a rotated ray may use.
const RAY_SECTOR_FRACTION: f64 = 0.8;

// Gamma(q + 1) <= 6 for q in (2, 3]; bounds the Watson remainder.
const GAMMA_Q1_BOUND: f64 = 6.0;

/// Parameters of one auxiliary solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionSpec {
    pub alpha: LevyIndex,
    pub k: f64,
    pub root: FractionalQuantumNumber,
}

impl SolutionSpec {
    /// Validates `k > 0` and that `root` is one of `alpha`'s quantum numbers.
    pub fn new(alpha: LevyIndex, k: f64, root: FractionalQuantumNumber) -> Result<Self> {
        check_scale(k)?;
        let roots = enumerate_roots(alpha);
        let ok = roots
            .get(root.index)
            .is_some_and(|r| (r.value - root.value).norm() <= 1e-12);
        if !ok {
            return Err(Error::InvalidInput(format!(
                "{} is not fractional quantum number #{} of alpha = {alpha}",
                root.value, root.index
            )));
        }
        Ok(SolutionSpec { alpha, k, root })
    }

    /// All solutions of `alpha` at scale `k`, in root order.
    pub fn all(alpha: LevyIndex, k: f64) -> Result<Vec<Self>> {
        check_scale(k)?;
        Ok(enumerate_roots(alpha)
            .into_iter()
            .map(|root| SolutionSpec { alpha, k, root })
            .collect())
    }

    /// A spec whose `eps` is an arbitrary unit complex number rather than a
    /// root. Only useful as a negative control for [`verify_residual`].
    pub fn with_unit(alpha: LevyIndex, k: f64, eps: Complex64) -> Result<Self> {
        check_scale(k)?;
        if !((eps.norm() - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidInput(format!("|{eps}| != 1")));
        }
        Ok(SolutionSpec {
            alpha,
            k,
            root: FractionalQuantumNumber { index: usize::MAX, value: eps },
        })
    }

    pub fn eps(&self) -> Complex64 {
        self.root.value
    }
}

fn check_scale(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidScale(k))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    let (lo, hi) = TOL_RANGE;
    if tol > lo && tol < hi {
        Ok(())
    } else {
        Err(Error::InvalidTolerance { tol, lo, hi })
    }
}

/// `y = mantissa * exp(ln_scale)`, with `err` in mantissa units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledY {
    pub mantissa: Complex64,
    pub ln_scale: f64,
    pub err: f64,
}

impl ScaledY {
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.ln_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YValue {
    pub value: Complex64,
    pub err: f64,
}

/// Where the real part of the exponent peaks, and its peak value.
fn exponent_peak(a: f64, k: f64, q: f64) -> (f64, f64) {
    if a <= 0.0 {
        return (0.0, 0.0);
    }
    let t = (k * a).powf(1.0 / (q - 1.0));
    (t, a * t * (1.0 - 1.0 / q))
}

/// First `t` past the peak where `a t - t^q/(K q)` has dropped `drop` below
/// its maximum. The exponent is concave, so Newton from the right converges
/// monotonically.
fn truncation_point(a: f64, k: f64, q: f64, drop: f64) -> f64 {
    let kq = k * q;
    let (t_peak, f_max) = exponent_peak(a, k, q);
    let g = |t: f64| a * t - t.powf(q) / kq - (f_max - drop);
    let dg = |t: f64| a - t.powf(q - 1.0) / k;
    let mut t = t_peak.max((kq * drop).powf(1.0 / q)).max(1e-300);
    while g(t) > 0.0 {
        t *= 2.0;
    }
    for _ in 0..100 {
        let step = g(t) / dg(t);
        let next = t - step;
        if !(next < t) || (t - next) <= 1e-14 * t {
            break;
        }
        t = next;
    }
    t
}

/// Evaluates `y` keeping the magnitude in a separate log scale, so growing
/// solutions never overflow.
pub fn eval_y_scaled(spec: &SolutionSpec, xi: f64, tol: f64) -> Result<ScaledY> {
    eval_y_scaled_floor(spec, xi, tol, f64::NEG_INFINITY)
}

/// As [`eval_y_scaled`], but also accepts an absolute error up to
/// `exp(ln_abs_floor)`. Oscillating roots cancel on the real line, so a
/// relative target cannot always be met when `|y|` is far below the
/// integrand's peak; callers that only need accuracy relative to some larger
/// reference value pass its log here.
pub fn eval_y_scaled_floor(spec: &SolutionSpec, xi: f64, tol: f64, ln_abs_floor: f64) -> Result<ScaledY> {
    check_tol(tol)?;
    check_scale(spec.k)?;
    if !xi.is_finite() {
        return Err(Error::InvalidInput(format!("xi = {xi}")));
    }
    let q = spec.alpha.exponent();
    let k = spec.k;
    let eps = spec.eps();
    let s = eps * xi;

    // Watson leading term: eps / (-eps xi) = -1/xi, remainder bounded by
    // Gamma(q+1) / (K q Re(-s)^(q+1)).
    let decay = -s.re;
    if decay > 0.0 {
        let remainder = GAMMA_Q1_BOUND / (k * q * decay.powf(q + 1.0));
        let leading = 1.0 / xi.abs();
        if remainder <= 0.5 * tol * leading {
            return Ok(ScaledY {
                mantissa: Complex64::new(-1.0 / xi, 0.0),
                ln_scale: 0.0,
                err: remainder,
            });
        }
    }

    // With Re s > 0 and Im s != 0 the integrand peaks far above |y| and
    // cancels; integrate along a ray t = r e^{i theta} pointing toward the
    // saddle instead, kept inside the sector where e^{-t^q} still decays.
    let theta = if s.re > 0.0 && s.im != 0.0 {
        let limit = RAY_SECTOR_FRACTION * std::f64::consts::FRAC_PI_2 / q;
        (s.arg() / (q - 1.0)).clamp(-limit, limit)
    } else {
        0.0
    };
    let ray = Complex64::from_polar(1.0, theta);
    let lin = s * ray;
    let pow = Complex64::from_polar(1.0 / (k * q), q * theta);
    // along the ray the real part of the exponent is a r - r^q / (k_ray q)
    let k_ray = k / (q * theta).cos();
    let a = lin.re;
    let (t_peak, f_max) = exponent_peak(a, k_ray, q);
    let drop = ((1.0 / tol).ln() + 40.0).min(745.0);
    let t_end = truncation_point(a, k_ray, q, drop);
    let integrand = |t: f64| (lin * t - (pow * t.powf(q) + f_max)).exp();

    let mut points = vec![0.0];
    if t_peak > 0.0 && t_peak < t_end {
        points.push(t_peak);
    }
    // a few initial panels per oscillation period
    let phase = lin.im.abs() * t_end + pow.im.abs() * t_end.powf(q);
    let cycles = (phase / std::f64::consts::TAU).ceil() as usize;
    let extra = cycles.clamp(1, 64);
    let last = *points.last().unwrap();
    for i in 1..=extra {
        points.push(last + (t_end - last) * i as f64 / extra as f64);
    }

    let abs_tol = (ln_abs_floor - f_max).exp();
    let opts = QuadOptions { rel_tol: tol, abs_tol, max_panels: MAX_PANELS };
    let r = integrate_points(integrand, &points, opts);
    // concave exponent: the dropped tail is below e^{-drop} / |slope at t_end|
    let slope = (t_end.powf(q - 1.0) / k_ray - a).max(f64::MIN_POSITIVE);
    let tail = (-drop).exp() / slope;
    let err = r.error + tail;
    let target = (tol * r.value.norm()).max(abs_tol);
    if !r.converged || err > target {
        return Err(Error::ToleranceNotMet { xi, estimate: err, target });
    }
    Ok(ScaledY { mantissa: eps * ray * r.value, ln_scale: f_max, err })
}

/// `y(xi)` with relative error at most `tol`.
pub fn eval_y(spec: &SolutionSpec, xi: f64, tol: f64) -> Result<YValue> {
    let y = eval_y_scaled(spec, xi, tol)?;
    let scale = y.ln_scale.exp();
    let value = y.mantissa * scale;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Overflow(format!(
            "|y({xi})| = e^{:.1} exceeds double range",
            y.ln_abs()
        )));
    }
    Ok(YValue { value, err: y.err * scale })
}

/// `y` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSample {
    pub spec: SolutionSpec,
    pub xi: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Absolute error estimates, each at most `tol * max(1, |value|)`.
    pub abs_error_estimate: Vec<f64>,
}

impl SolutionSample {
    pub fn abs_sq(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v.norm_sqr())
    }
}

/// [`eval_y`] over a strictly increasing grid. Points are independent and
/// evaluated in parallel; results do not depend on scheduling.
pub fn eval_y_grid(spec: &SolutionSpec, xi: &[f64], tol: f64) -> Result<SolutionSample> {
    if xi.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidGrid("xi grid must be strictly increasing".into()));
    }
    let evals: Vec<YValue> = xi
        .par_iter()
        .map(|&x| eval_y(spec, x, tol))
        .collect::<Result<_>>()?;
    let (values, abs_error_estimate) = evals.into_iter().map(|e| (e.value, e.err)).unzip();
    Ok(SolutionSample { spec: *spec, xi: xi.to_vec(), values, abs_error_estimate })
}

fn expm1_complex(z: Complex64) -> Complex64 {
    let (sin, cos) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * cos - 2.0 * half * half, z.re.exp() * sin)
}

/// `(y(u) - y(0)) / u` at `K = 1`, computed without cancellation for small `u`.
///
/// Requires `|u| <= 1`.
pub fn eval_y_increment(alpha: LevyIndex, root: &FractionalQuantumNumber, u: f64, tol: f64) -> Result<YValue> {
    check_tol(tol)?;
    if !(u.abs() <= 1.0) {
        return Err(Error::InvalidInput(format!("increment evaluated at |u| = {} > 1", u.abs())));
    }
    let q = alpha.exponent();
    let eps = root.value;
    let s = eps * u;
    let drop = ((1.0 / tol).ln() + 40.0).min(745.0);
    let t_end = truncation_point(s.re, 1.0, q, drop);
    let q_inv = 1.0 / q;
    let integrand = |t: f64| {
        let damp = (-t.powf(q) * q_inv).exp();
        let ratio = if u == 0.0 { eps * t } else { expm1_complex(s * t) / u };
        ratio * damp
    };
    let points: Vec<f64> = (0..=8).map(|i| t_end * i as f64 / 8.0).collect();
    let opts = QuadOptions { rel_tol: tol, abs_tol: 0.0, max_panels: MAX_PANELS };
    let r = integrate_points(integrand, &points, opts);
    if !r.converged {
        return Err(Error::ToleranceNotMet { xi: u, estimate: r.error, target: tol * r.value.norm() });
    }
    Ok(YValue { value: eps * r.value, err: r.error })
}

/// Options for [`verify_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions {
    /// GL window standing in for the lower limit `-inf`.
    pub window: f64,
    /// Quadrature tolerance for the sampled solution.
    pub tol: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        ResidualOptions { window: 60.0, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_abs_dev: f64,
    pub expected: f64,
    pub h: f64,
    pub window: f64,
    pub points: usize,
    /// Estimated size of the GL sum beyond the window.
    pub tail_estimate: f64,
}

/// Samples `y` on `[lo - window, hi]` with step `h`, applies the GL
/// derivative of order `2 alpha` and reports `max |D y - K xi y - K|` over
/// `[lo, hi]`.
pub fn verify_residual(spec: &SolutionSpec, range: (f64, f64), h: f64, opts: ResidualOptions) -> Result<ResidualReport> {
    let (lo, hi) = range;
    if !(lo <= hi) || !(h > 0.0) {
        return Err(Error::InvalidInput(format!("range [{lo}, {hi}] with step {h}")));
    }
    let n_window = (opts.window / h).round() as usize;
    let n_range = ((hi - lo) / h).round() as usize;
    let x0 = lo - n_window as f64 * h;
    let xi: Vec<f64> = (0..=n_window + n_range).map(|k| x0 + k as f64 * h).collect();
    let sample = eval_y_grid(spec, &xi, opts.tol)?;
    let f = GridFunction::new(x0, h, sample.values)?;
    let ord = FracOrder::riemann_liouville(spec.alpha.order())?;
    let window = n_window as f64 * h;
    let r = residual_of(&f, ord, spec.k, window, Some((lo, lo + n_range as f64 * h)))?;
    let max_abs_dev = r
        .values()
        .iter()
        .map(|v| {
            let d = (v - spec.k).norm();
            if d.is_nan() { f64::INFINITY } else { d }
        })
        .fold(0.0, f64::max);
    Ok(ResidualReport {
        max_abs_dev,
        expected: spec.k,
        h,
        window,
        points: r.len(),
        tail_estimate: gl_tail_estimate(&f, ord, window)?,
    })
}
