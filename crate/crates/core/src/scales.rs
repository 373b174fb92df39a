//! Physical constants, the particle catalog, and the maps from SI quantities
//! to the dimensionless `D_2a`, `K` and `xi`.
//!
//! Magnitudes are handled as natural logs and exponentiated at the end.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::LevyIndex;

/// The bundled constants file.
pub const DEFAULT_CONSTANTS: &str = include_str!("../data/constants.conf");

/// Catalog entries every constants file must provide.
pub const REQUIRED_PARTICLES: [&str; 6] = ["z_boson", "tau", "muon", "electron", "electron_neutrino", "neutron"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// J s
    pub hbar: f64,
    /// m/s
    pub c: f64,
    /// m^3 / (kg s^2). Zero switches the minimal-length correction off.
    pub big_g: f64,
    /// m/s^2
    pub g: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, c: f64, big_g: f64, g: f64) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} = {v} must be finite and > 0")))
            }
        };
        positive("hbar", hbar)?;
        positive("c", c)?;
        positive("g", g)?;
        if !(big_g >= 0.0 && big_g.is_finite()) {
            return Err(Error::InvalidInput(format!("G = {big_g} must be finite and >= 0")));
        }
        Ok(PhysicalConstants { hbar, c, big_g, g })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticleSpec {
    pub name: String,
    /// kg
    pub mass: f64,
}

impl ParticleSpec {
    pub fn new(name: impl Into<String>, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidInput(format!("mass {mass} must be finite and > 0")));
        }
        Ok(ParticleSpec { name: name.into(), mass })
    }
}

/// Lowercase, with runs of spaces and hyphens folded to `_`.
pub fn normalize_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for ch in name.trim().chars() {
        let ch = if ch == ' ' || ch == '-' { '_' } else { ch.to_ascii_lowercase() };
        if ch == '_' && out.ends_with('_') {
            continue;
        }
        out.push(ch);
    }
    out
}

/// Parsed constants file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsConfig {
    pub constants: PhysicalConstants,
    particles: Vec<ParticleSpec>,
}

impl ConstantsConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let (mut hbar, mut c, mut big_g, mut g) = (None, None, None, None);
        let mut particles: Vec<ParticleSpec> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::ConfigParse { line: line_no, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            let number = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("`{value}` is not a finite number")))
            };
            match key {
                "version" => {}
                "hbar" => hbar = Some(number()?),
                "c" => c = Some(number()?),
                "G" => big_g = Some(number()?),
                "g" => g = Some(number()?),
                _ => {
                    let name = key
                        .strip_prefix("particle.")
                        .and_then(|k| k.strip_suffix(".mass_kg"))
                        .ok_or_else(|| err(format!("unknown key `{key}`")))?;
                    let name = normalize_name(name);
                    let p = ParticleSpec::new(name.clone(), number()?).map_err(|e| err(e.to_string()))?;
                    match particles.iter_mut().find(|q| q.name == name) {
                        Some(q) => *q = p,
                        None => particles.push(p),
                    }
                }
            }
        }
        let need = |v: Option<f64>, k: &str| v.ok_or_else(|| Error::ConfigMissing(k.to_string()));
        let constants = PhysicalConstants::new(need(hbar, "hbar")?, need(c, "c")?, need(big_g, "G")?, need(g, "g")?)?;
        for name in REQUIRED_PARTICLES {
            if !particles.iter().any(|p| p.name == name) {
                return Err(Error::ConfigMissing(format!("particle.{name}.mass_kg")));
            }
        }
        Ok(ConstantsConfig { constants, particles })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Particles in file order.
    pub fn particles(&self) -> &[ParticleSpec] {
        &self.particles
    }

    /// Case-insensitive; spaces and hyphens match underscores.
    pub fn lookup(&self, name: &str) -> Result<&ParticleSpec> {
        let key = normalize_name(name);
        self.particles
            .iter()
            .find(|p| p.name == key)
            .ok_or_else(|| Error::UnknownParticle(name.to_string()))
    }
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self::parse(DEFAULT_CONSTANTS).expect("bundled constants file is valid")
    }
}

/// The six catalog particles from the bundled constants file.
pub fn particle_catalog() -> Vec<ParticleSpec> {
    let cfg = ConstantsConfig::default();
    REQUIRED_PARTICLES
        .iter()
        .map(|n| cfg.lookup(n).expect("required").clone())
        .collect()
}

/// A positive magnitude stored as its natural log.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Magnitude {
    pub ln: f64,
}

impl Magnitude {
    pub fn from_ln(ln: f64) -> Self {
        Magnitude { ln }
    }

    pub fn log10(&self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// `(mantissa, e)` with `1 <= mantissa < 10` and value `mantissa * 10^e`.
    pub fn mantissa_exp10(&self) -> (f64, i64) {
        let l = self.log10();
        let mut e = l.floor();
        let mut mant = 10f64.powf(l - e);
        if mant >= 10.0 {
            mant /= 10.0;
            e += 1.0;
        }
        (mant, e as i64)
    }

    /// The value as a double, if representable.
    pub fn to_f64(&self) -> Option<f64> {
        let v = self.ln.exp();
        (v.is_finite() && v > 0.0).then_some(v)
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (m, e) = self.mantissa_exp10();
        write!(f, "{m:.6}e{e}")
    }
}

/// `ln D_2a = (2 - 2a) ln c - ln(2a) - (2a - 1) ln m`.
pub fn ln_d2alpha(pc: &PhysicalConstants, p: &ParticleSpec, a: LevyIndex) -> f64 {
    let two_a = a.order();
    (2.0 - two_a) * pc.c.ln() - two_a.ln() - (two_a - 1.0) * p.mass.ln()
}

/// `D_2a = c^(2 - 2a) / (2a m^(2a - 1))` in SI units.
pub fn d2alpha(pc: &PhysicalConstants, p: &ParticleSpec, a: LevyIndex) -> Result<f64> {
    let ln = ln_d2alpha(pc, p, a);
    Magnitude::from_ln(ln)
        .to_f64()
        .ok_or_else(|| Error::Overflow(format!("D_2a = e^{ln} for {} at alpha = {a}", p.name)))
}

/// Factor converting `D_2a` from SI to erg^(1-2a) cm^(2a) s^(-2a).
pub fn d2alpha_si_to_cgs(a: LevyIndex) -> f64 {
    let two_a = a.order();
    1e7f64.powf(1.0 - two_a) * 1e2f64.powf(two_a)
}

/// Affine map `xi = slope * z + intercept`, with `z` in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiMap {
    pub slope: f64,
    pub intercept: f64,
}

impl XiMap {
    pub fn xi(&self, z: f64) -> f64 {
        self.slope * z + self.intercept
    }

    pub fn z(&self, xi: f64) -> f64 {
        (xi - self.intercept) / self.slope
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleParameters {
    pub alpha: LevyIndex,
    /// `D_2a` in SI units.
    pub d2a: f64,
    pub ln_d2a: f64,
    pub k: f64,
    pub ln_k: f64,
    pub xi_of_z: XiMap,
    /// `ln(D_2a hbar^(2a))`, the energy unit of the `xi` axis.
    pub log_scale: f64,
    /// Phase of the complex `K` discarded by taking the modulus,
    /// in `[0, 2 pi)`.
    pub discarded_phase: f64,
}

impl ScaleParameters {
    pub fn k_magnitude(&self) -> Magnitude {
        Magnitude::from_ln(self.ln_k)
    }
}

/// Phase of `[(-i)^(2a) / (-1)]^(2a)` on principal branches.
pub fn discarded_phase(a: LevyIndex) -> f64 {
    let al = a.value();
    (std::f64::consts::TAU * al * (1.0 - al)).rem_euclid(std::f64::consts::TAU)
}

/// Shared by the plain and minimal-length pipelines:
/// `xi = (force z - energy) / (D hbar^(2a))` and `K = (D hbar^(2a) / |force|)^(2a)`.
pub(crate) fn scale_from_affine(alpha: LevyIndex, ln_d2a: f64, hbar: f64, force: f64, energy: f64) -> Result<ScaleParameters> {
    if !(force != 0.0 && force.is_finite()) {
        return Err(Error::InvalidInput(format!("linear coefficient {force} must be finite and nonzero")));
    }
    let two_a = alpha.order();
    let log_scale = ln_d2a + two_a * hbar.ln();
    let ln_force = force.abs().ln();
    let ln_k = two_a * (log_scale - ln_force);
    let k = Magnitude::from_ln(ln_k)
        .to_f64()
        .ok_or_else(|| Error::Overflow(format!("K = e^{ln_k} at alpha = {alpha}")))?;
    let d2a = Magnitude::from_ln(ln_d2a)
        .to_f64()
        .ok_or_else(|| Error::Overflow(format!("D_2a = e^{ln_d2a} at alpha = {alpha}")))?;
    let slope = force.signum() * (ln_force - log_scale).exp();
    let intercept = -energy * (-log_scale).exp() + 0.0;
    if !(slope.is_finite() && slope != 0.0 && intercept.is_finite()) {
        return Err(Error::Overflow(format!("xi map slope e^{} at alpha = {alpha}", ln_force - log_scale)));
    }
    Ok(ScaleParameters {
        alpha,
        d2a,
        ln_d2a,
        k,
        ln_k,
        xi_of_z: XiMap { slope, intercept },
        log_scale,
        discarded_phase: discarded_phase(alpha),
    })
}

/// `K = (D_2a hbar^(2a) / (m g))^(2a)` and `xi = (m g z - E) / (D_2a hbar^(2a))`,
/// so the wall sits at `xi = -E / (D hbar^(2a))` and `xi` grows with height.
pub fn scale_params(pc: &PhysicalConstants, p: &ParticleSpec, a: LevyIndex, energy: f64) -> Result<ScaleParameters> {
    if !energy.is_finite() {
        return Err(Error::InvalidInput(format!("E = {energy}")));
    }
    scale_from_affine(a, ln_d2alpha(pc, p, a), pc.hbar, p.mass * pc.g, energy)
}

/// `ln K` alone; finite for any positive mass.
pub fn ln_k(pc: &PhysicalConstants, p: &ParticleSpec, a: LevyIndex) -> f64 {
    let two_a = a.order();
    two_a * (ln_d2alpha(pc, p, a) + two_a * pc.hbar.ln() - (p.mass * pc.g).ln())
}
