//! First-order minimal-length (quadratic GUP) correction of the linear
//! potential problem.
//!
//! With `H0 = D p^(2a) + mgz`, the correction rewrites the equation as
//! `D (-i hbar)^(2a) d^(2a) phi = -(A + B z) phi` where
//!
//! ```text
//! A = E - 2 a beta D^(1 + 1/a) E E0^(1/a)
//! B = m g [2 a beta D^(1 + 1/a) ((1/a) E E0^(1/a - 1) + E0^(1/a)) - 1]
//! ```
//!
//! so `A` plays the role of `E` and `-B` the role of `mg`. `B` keeps the
//! sign of `-mg` and the reduced problem has the same shape, with
//! `K' = (D hbar^(2a) / |B|)^(2a)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{enumerate_roots, LevyIndex};
use crate::scales::{scale_from_affine, ParticleSpec, PhysicalConstants, ScaleParameters, XiMap};
use crate::spectrum::{build_constraints, null_space_dim, SpectrumReport, DEFAULT_RANK_TOL};

/// Relative size of the correction above which first order is rejected.
pub const PERTURBATION_LIMIT: f64 = 0.1;

/// Relative size above which a warning is attached.
pub const PERTURBATION_WARN: f64 = 1e-2;

/// Masses at or above this are outside the regime where the correction is
/// expected to matter.
pub const SMALL_MASS_KG: f64 = 1e-26;

/// `beta = l_pl^2 / (2 hbar^2) = G / (2 hbar c^3)`.
pub fn gup_beta(pc: &PhysicalConstants) -> f64 {
    pc.big_g / (2.0 * pc.hbar * pc.c.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GupParams {
    pub beta: f64,
    /// J
    pub energy: f64,
    /// Unperturbed eigenvalue, J.
    pub e0: f64,
}

impl GupParams {
    pub fn new(beta: f64, energy: f64, e0: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta = {beta} must be finite and >= 0")));
        }
        if !energy.is_finite() {
            return Err(Error::InvalidInput(format!("E = {energy}")));
        }
        if !(e0 >= 0.0 && e0.is_finite()) {
            return Err(Error::InvalidInput(format!("E0 = {e0} must be finite and >= 0")));
        }
        Ok(GupParams { beta, energy, e0 })
    }

    /// `E0 = E`: for fractional `a` the unperturbed spectrum is continuous,
    /// so every `E` is an eigenvalue.
    pub fn with_e0_equal_e(beta: f64, energy: f64) -> Result<Self> {
        Self::new(beta, energy, energy.max(0.0))
    }
}

/// Which of the two closed forms of `A` and `B` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum GupFormula {
    /// Obtained by carrying the substitution through.
    #[default]
    Derivation,
    /// `A = E - 2 a beta D^(1+1/a) E0^(1+1/a)`,
    /// `B = m g [2 a beta D^(1+1/a) (E0/a + E0^(1/a)) - 1]`.
    Simplified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GupScale {
    pub a: f64,
    pub b: f64,
    pub k_prime: f64,
    pub xi_of_z: XiMap,
    pub scale: ScaleParameters,
    /// Largest of `|dA| / |E|` and `|dB| / (m g)`.
    pub relative_correction: f64,
    pub formula: GupFormula,
    pub warnings: Vec<String>,
}

/// `sign(x) exp(ln_c + ln |x|)`, zero for zero `x`.
fn times(ln_c: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * (ln_c + x.abs().ln()).exp()
    }
}

fn ratio(delta: f64, base: f64) -> f64 {
    if delta == 0.0 {
        0.0
    } else {
        delta.abs() / base.abs()
    }
}

pub fn gup_scale(
    sp: &ScaleParameters,
    gp: &GupParams,
    pc: &PhysicalConstants,
    p: &ParticleSpec,
    formula: GupFormula,
) -> Result<GupScale> {
    let alpha = sp.alpha;
    let al = alpha.value();
    let inv = 1.0 / al;
    let mg = p.mass * pc.g;
    let (e, e0) = (gp.energy, gp.e0);

    // ln(2 a beta D^(1 + 1/a)); beta = 0 gives exactly zero corrections
    let (delta_a, delta_b) = if gp.beta == 0.0 {
        (0.0, 0.0)
    } else {
        let ln_c = (2.0 * al * gp.beta).ln() + (1.0 + inv) * sp.ln_d2a;
        match formula {
            GupFormula::Derivation => (
                times(ln_c, e * e0.powf(inv)),
                times(ln_c, inv * e * e0.powf(inv - 1.0) + e0.powf(inv)),
            ),
            GupFormula::Simplified => (times(ln_c, e0.powf(1.0 + inv)), times(ln_c, e0 * inv + e0.powf(inv))),
        }
    };
    if !(delta_a.is_finite() && delta_b.is_finite()) {
        return Err(Error::PerturbationInvalid { ratio: f64::INFINITY, limit: PERTURBATION_LIMIT });
    }
    let a = e - delta_a;
    let b = mg * (delta_b - 1.0);

    let relative_correction = ratio(delta_a, e).max(delta_b.abs());
    if relative_correction > PERTURBATION_LIMIT {
        return Err(Error::PerturbationInvalid { ratio: relative_correction, limit: PERTURBATION_LIMIT });
    }
    let mut warnings = Vec::new();
    if relative_correction > PERTURBATION_WARN {
        warnings.push(format!("first-order correction is {relative_correction:e} of the leading term"));
    }
    if p.mass >= SMALL_MASS_KG {
        warnings.push(format!(
            "mass {:e} kg is not below {SMALL_MASS_KG:e} kg; the correction is negligible",
            p.mass
        ));
    }

    let scale = scale_from_affine(alpha, sp.ln_d2a, pc.hbar, -b, a)?;
    Ok(GupScale {
        a,
        b,
        k_prime: scale.k,
        xi_of_z: scale.xi_of_z,
        scale,
        relative_correction,
        formula,
        warnings,
    })
}

/// The roots take no `beta` input; this compares their bit patterns across
/// `betas` to guard that.
pub fn verify_root_invariance(a: LevyIndex, betas: &[f64]) -> bool {
    let bits = |_: f64| -> Vec<(u64, u64)> {
        enumerate_roots(a)
            .iter()
            .map(|r| (r.value.re.to_bits(), r.value.im.to_bits()))
            .collect()
    };
    let reference = bits(0.0);
    betas.iter().all(|&b| bits(b) == reference)
}

/// The spectral pipeline with `K'` in place of `K`.
pub fn gup_spectrum(a: LevyIndex, gs: &GupScale, xi_wall: f64, xi_far: f64, tol: f64) -> Result<SpectrumReport> {
    let cs = build_constraints(a, gs.k_prime, xi_wall, xi_far, tol)?;
    null_space_dim(&cs, DEFAULT_RANK_TOL)
}
