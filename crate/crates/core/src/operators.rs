//! Numerical fractional differentiation of sampled complex functions.
//!
//! The kernel is the Grunwald-Letnikov backward-difference sum with lower
//! limit `-inf`, realized on a finite window. For the function class used
//! here (smooth, decaying toward `-inf`) the Riemann-Liouville derivative with
//! lower limit `-inf` coincides with it, so both kinds share one kernel.
//! Accuracy is first order in the grid step.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Uniformly sampled complex function, `values[k] = f(x0 + k h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    x0: f64,
    h: f64,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(x0: f64, h: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("step h = {h} must be finite and > 0")));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidGrid(format!("grid start x0 = {x0} is not finite")));
        }
        if values.is_empty() {
            return Err(Error::InvalidGrid("no samples".into()));
        }
        Ok(GridFunction { x0, h, values })
    }

    /// Samples `f` at `x0 + k h` for `k = 0..len`.
    pub fn from_fn(x0: f64, h: f64, len: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..len).map(|k| f(x0 + k as f64 * h)).collect();
        GridFunction::new(x0, h, values)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.h
    }

    /// Abscissa of the last sample.
    pub fn x_end(&self) -> f64 {
        self.x(self.values.len() - 1)
    }

    /// `(x_k, f_k)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.x(k), v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `a f + b g` on a shared grid.
    pub fn linear_combination(a: Complex64, f: &GridFunction, b: Complex64, g: &GridFunction) -> Result<Self> {
        if f.len() != g.len() || f.h != g.h || f.x0 != g.x0 {
            return Err(Error::InvalidGrid("linear combination of functions on different grids".into()));
        }
        let values = f
            .values
            .iter()
            .zip(&g.values)
            .map(|(&u, &v)| a * u + b * v)
            .collect();
        GridFunction::new(f.x0, f.h, values)
    }

    /// Index of the sample nearest to `x`, if it lies on the grid to within
    /// a small fraction of a step.
    fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.x0) / self.h;
        let k = t.round();
        if (t - k).abs() > 1e-6 || k < 0.0 || k as usize >= self.values.len() {
            return None;
        }
        Some(k as usize)
    }
}

/// Which fractional derivative a [`FracOrder`] denotes. Both are evaluated
/// through the Grunwald-Letnikov sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OperatorKind {
    #[default]
    GrunwaldLetnikov,
    RiemannLiouvilleViaGL,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    order: f64,
    kind: OperatorKind,
}

impl FracOrder {
    pub fn new(order: f64, kind: OperatorKind) -> Result<Self> {
        if !(order > 0.0 && order <= 4.0) {
            return Err(Error::InvalidOrder(order));
        }
        Ok(FracOrder { order, kind })
    }

    pub fn gl(order: f64) -> Result<Self> {
        FracOrder::new(order, OperatorKind::GrunwaldLetnikov)
    }

    pub fn riemann_liouville(order: f64) -> Result<Self> {
        FracOrder::new(order, OperatorKind::RiemannLiouvilleViaGL)
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }
}

/// Generalized binomial coefficient `order (order-1) ... (order-k+1) / k!`.
pub fn generalized_binomial(order: f64, k: u64) -> f64 {
    let mut c = 1.0;
    for j in 1..=k {
        c *= (order - j as f64 + 1.0) / j as f64;
    }
    c
}

/// Signed GL weights `(-1)^k binom(order, k)` for `k = 0..=n`.
pub fn gl_weights(order: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n + 1);
    let mut c = 1.0;
    w.push(c);
    for k in 1..=n {
        c *= (k as f64 - 1.0 - order) / k as f64;
        w.push(c);
    }
    w
}

/// Minimum number of GL terms a window must span.
pub const MIN_TERMS: usize = 16;

// Above this many multiply-adds the convolution goes through an FFT.
const DIRECT_WORK_LIMIT: usize = 1 << 22;

fn window_terms(h: f64, window: f64) -> Result<usize> {
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::InvalidWindow(format!("window = {window} must be finite and > 0")));
    }
    let n = (window / h).round();
    if n < MIN_TERMS as f64 {
        return Err(Error::InvalidWindow(format!(
            "window {window} spans {n} steps of h = {h}; at least {MIN_TERMS} are required"
        )));
    }
    Ok(n as usize)
}

/// Truncated GL derivative at every grid point with a full window behind it.
///
/// The output grid starts `round(window / h)` steps after `f`'s start and
/// shares its step.
pub fn gl_derivative(f: &GridFunction, ord: FracOrder, window: f64) -> Result<GridFunction> {
    let n = window_terms(f.h, window)?;
    if f.len() <= n {
        return Err(Error::InsufficientSupport(format!(
            "{} samples cannot support a window of {n} steps",
            f.len()
        )));
    }
    gl_on_indices(f, ord, n, n, f.len() - 1)
}

/// Truncated GL derivative restricted to output points in `[lo, hi]`.
///
/// Fails with `InsufficientSupport` when `[lo - window, hi]` is not covered by
/// `f`'s samples.
pub fn gl_derivative_on(
    f: &GridFunction,
    ord: FracOrder,
    window: f64,
    lo: f64,
    hi: f64,
) -> Result<GridFunction> {
    let n = window_terms(f.h, window)?;
    if !(lo <= hi) {
        return Err(Error::InvalidInput(format!("empty output range [{lo}, {hi}]")));
    }
    let slack = 1e-9 * f.h;
    let first_ok = f.x(n);
    if lo < first_ok - slack || hi > f.x_end() + slack {
        return Err(Error::InsufficientSupport(format!(
            "output range [{lo}, {hi}] needs samples on [{}, {hi}], have [{}, {}]",
            lo - window,
            f.x0,
            f.x_end()
        )));
    }
    let i_lo = (((lo - f.x0) / f.h) - 1e-9).ceil().max(n as f64) as usize;
    let i_hi = (((hi - f.x0) / f.h) + 1e-9).floor() as usize;
    let i_hi = i_hi.min(f.len() - 1);
    if i_lo > i_hi {
        return Err(Error::InsufficientSupport(format!(
            "no grid point of step {} falls within [{lo}, {hi}]",
            f.h
        )));
    }
    gl_on_indices(f, ord, n, i_lo, i_hi)
}

fn gl_on_indices(
    f: &GridFunction,
    ord: FracOrder,
    n: usize,
    i_lo: usize,
    i_hi: usize,
) -> Result<GridFunction> {
    let w = gl_weights(ord.order, n);
    let scale = f.h.powf(-ord.order);
    let outputs = i_hi - i_lo + 1;
    let src = &f.values[i_lo - n..=i_hi];
    let sums = if outputs.saturating_mul(n + 1) <= DIRECT_WORK_LIMIT {
        convolve_direct(src, &w, outputs)
    } else {
        convolve_fft(src, &w, outputs)
    };
    let values = sums.into_iter().map(|s| s * scale).collect();
    GridFunction::new(f.x(i_lo), f.h, values)
}

/// `out[i] = sum_k w[k] src[n + i - k]`, with `n = w.len() - 1`.
fn convolve_direct(src: &[Complex64], w: &[f64], outputs: usize) -> Vec<Complex64> {
    let n = w.len() - 1;
    (0..outputs)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &wk) in w.iter().enumerate() {
                acc += src[n + i - k] * wk;
            }
            acc
        })
        .collect()
}

fn convolve_fft(src: &[Complex64], w: &[f64], outputs: usize) -> Vec<Complex64> {
    let n = w.len() - 1;
    let size = (src.len() + w.len()).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    let mut a = vec![Complex64::new(0.0, 0.0); size];
    a[..src.len()].copy_from_slice(src);
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    for (slot, &wk) in b.iter_mut().zip(w) {
        *slot = Complex64::new(wk, 0.0);
    }
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    inv.process(&mut a);
    let norm = 1.0 / size as f64;
    a[n..n + outputs].iter().map(|v| v * norm).collect()
}

/// Rough size of the part of the GL sum dropped by the window: the magnitude
/// of the first sample times the total weight beyond the window.
///
/// Meaningful when `|f|` is non-increasing toward `-inf`.
pub fn gl_tail_estimate(f: &GridFunction, ord: FracOrder, window: f64) -> Result<f64> {
    let n = window_terms(f.h, window)?;
    let partial: f64 = gl_weights(ord.order, n).iter().sum();
    Ok(f.values[0].norm() * partial.abs() * f.h.powf(-ord.order))
}

/// Pointwise `D^order f(x) - K x f(x)` on the part of the grid where the
/// derivative is defined, optionally restricted to `range`.
pub fn residual_of(
    f: &GridFunction,
    ord: FracOrder,
    k: f64,
    window: f64,
    range: Option<(f64, f64)>,
) -> Result<GridFunction> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidScale(k));
    }
    let d = match range {
        Some((lo, hi)) => gl_derivative_on(f, ord, window, lo, hi)?,
        None => gl_derivative(f, ord, window)?,
    };
    let offset = f
        .index_of(d.x0)
        .ok_or_else(|| Error::InvalidGrid("derivative grid is not aligned with the input".into()))?;
    let values = d
        .iter()
        .enumerate()
        .map(|(i, (x, dv))| dv - f.values[offset + i] * (k * x))
        .collect();
    GridFunction::new(d.x0, d.h, values)
}
