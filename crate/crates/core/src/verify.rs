//! Self-check suite behind `fracgrav verify`.

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::Result;
use crate::gup::{gup_beta, gup_scale, gup_spectrum, verify_root_invariance, GupFormula, GupParams};
use crate::quantum::{min_numerator_bruteforce, root_count, LevyIndex};
use crate::scales::{scale_params, ConstantsConfig};
use crate::solutions::{eval_y, eval_y_scaled, verify_residual, ResidualOptions, SolutionSpec};
use crate::spectrum::{
    assemble_wavefunction, build_constraints, classify, decaying_combination, log10_spread_diagnostic, natural_xi, null_space_dim,
    Classification, DEFAULT_RANK_TOL,
};
use crate::sweep::{default_alpha_grid, heatmap, log_spaced, SWEEP_XI0};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub measured: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub h: f64,
    pub window: f64,
    pub tol: f64,
    /// `None` uses `G / (2 hbar c^3)`.
    pub beta: Option<f64>,
    /// Also rerun residuals at `h / 10` and require a 5x drop.
    pub refine: bool,
    pub constants: ConstantsConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            h: 1e-3,
            window: ResidualOptions::default().window,
            tol: 1e-12,
            beta: None,
            refine: false,
            constants: ConstantsConfig::default(),
        }
    }
}

pub const RESIDUAL_TOL: f64 = 1e-2;
pub const REFINE_FACTOR: f64 = 5.0;

fn a(n: u64, m: u64) -> LevyIndex {
    LevyIndex::new(n, m).expect("valid test index")
}

fn check(name: impl Into<String>, tolerance: f64, measured: f64, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), tolerance, measured, passed, detail: detail.into() }
}

fn failed(name: impl Into<String>, tolerance: f64, why: impl std::fmt::Display) -> Check {
    check(name, tolerance, f64::INFINITY, false, why.to_string())
}

/// `Ai(x)` from its Maclaurin series with `terms` terms per component.
pub fn airy_ai_series(x: f64, terms: usize) -> f64 {
    const C1: f64 = 0.355_028_053_887_817_239;
    const C2: f64 = 0.258_819_403_792_806_798;
    let x3 = x * x * x;
    let (mut f, mut g) = (0.0, 0.0);
    let (mut tf, mut tg) = (1.0, x);
    for k in 0..terms {
        f += tf;
        g += tg;
        let k = k as f64;
        tf *= x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg *= x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
    }
    C1 * f - C2 * g
}

fn root_counts() -> Check {
    let table = [(a(3, 4), 5), (a(2, 3), 7), (a(3, 5), 11), (LevyIndex::CLASSICAL, 3)];
    let bad: Vec<String> = table
        .iter()
        .filter(|(al, p)| root_count(*al) != *p)
        .map(|(al, p)| format!("{al}: {} != {p}", root_count(*al)))
        .collect();
    check("root_count", 0.0, bad.len() as f64, bad.is_empty(), if bad.is_empty() { "3/4->5 2/3->7 3/5->11 1->3".into() } else { bad.join("; ") })
}

fn min_numerator() -> Check {
    match min_numerator_bruteforce(500) {
        Ok(r) => check(
            "min_numerator",
            0.0,
            r.minimum as f64,
            r.minimum == 5 && r.witness == a(3, 4),
            format!("minimum {} at {} over {} fractions", r.minimum, r.witness, r.visited),
        ),
        Err(e) => failed("min_numerator", 0.0, e),
    }
}

fn residuals(opts: &VerifyOptions, out: &mut Vec<Check>) {
    let ropts = ResidualOptions { window: opts.window, tol: opts.tol };
    for al in [a(3, 4), a(2, 3), a(5, 6)] {
        for spec in SolutionSpec::all(al, 1.0).expect("K = 1") {
            let name = format!("residual[{al},nu={}]", spec.root.index);
            let coarse = match verify_residual(&spec, (-1.0, 1.0), opts.h, ropts) {
                Ok(r) => r,
                Err(e) => {
                    out.push(failed(name, RESIDUAL_TOL, e));
                    continue;
                }
            };
            let mut passed = coarse.max_abs_dev <= RESIDUAL_TOL;
            let mut detail = format!("h = {:e}: max|r - K| = {:e}", opts.h, coarse.max_abs_dev);
            if opts.refine && passed {
                match verify_residual(&spec, (-1.0, 1.0), opts.h / 10.0, ropts) {
                    Ok(fine) => {
                        let ratio = coarse.max_abs_dev / fine.max_abs_dev;
                        passed &= ratio >= REFINE_FACTOR;
                        detail.push_str(&format!("; h/10: {:e} (x{ratio:.2})", fine.max_abs_dev));
                    }
                    Err(e) => {
                        passed = false;
                        detail.push_str(&format!("; h/10: {e}"));
                    }
                }
            }
            out.push(check(name, RESIDUAL_TOL, coarse.max_abs_dev, passed, detail));
        }
    }
}

fn zero_sum_residuals(opts: &VerifyOptions, out: &mut Vec<Check>) {
    let one = [Complex64::new(1.0, 0.0)];
    let wf = build_constraints(a(3, 4), 1.0, 0.0, 3.0, 1e-10).and_then(|cs| assemble_wavefunction(&cs, &one));
    let name = "wavefunction_residual[3/4]";
    match wf.and_then(|wf| wf.residual((-1.0, 1.0), opts.h, opts.window, opts.tol)) {
        Ok(dev) => out.push(check(name, RESIDUAL_TOL, dev, dev <= RESIDUAL_TOL, format!("h = {:e}", opts.h))),
        Err(e) => out.push(failed(name, RESIDUAL_TOL, e)),
    }
    // integer order: the operator is local, a short window is exact
    let name = "wavefunction_residual[1]";
    match decaying_combination(LevyIndex::CLASSICAL, 1.0, 8.0, opts.tol)
        .and_then(|wf| wf.residual((-1.0, 1.0), opts.h, 0.05, opts.tol))
    {
        Ok(dev) => out.push(check(name, RESIDUAL_TOL, dev, dev <= RESIDUAL_TOL, format!("decaying combination, h = {:e}", opts.h))),
        Err(e) => out.push(failed(name, RESIDUAL_TOL, e)),
    }
}

fn gamma_anchor() -> Check {
    let tol = 1e-8;
    let mut worst: f64 = 0.0;
    for al in [a(3, 4), a(2, 3), a(5, 6), LevyIndex::CLASSICAL] {
        let q = al.exponent();
        for k in [0.01, 1.0, 100.0] {
            let closed = (k * q).powf(1.0 / q) * gamma(1.0 + 1.0 / q);
            for spec in SolutionSpec::all(al, k).expect("valid K") {
                match eval_y(&spec, 0.0, 1e-12) {
                    Ok(y) => worst = worst.max((y.value - spec.eps() * closed).norm() / closed),
                    Err(e) => return failed("gamma_anchor", tol, e),
                }
            }
        }
    }
    check("gamma_anchor", tol, worst, worst <= tol, "max relative error over roots, alpha, K")
}

fn classical_airy() -> Check {
    let tol = 1e-6;
    let run = || -> Result<f64> {
        let wf = decaying_combination(LevyIndex::CLASSICAL, 1.0, 8.0, 1e-13)?;
        let scale = airy_ai_series(0.0, 60) / wf.eval(0.0, 1e-13)?;
        let mut worst: f64 = 0.0;
        for i in 0..=30 {
            let x = 0.1 * i as f64;
            let ai = airy_ai_series(x, 60);
            worst = worst.max((wf.eval(x, 1e-13)? * scale - ai).norm() / ai.abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => check("classical_airy", tol, w, w <= tol, "max relative error on [0, 3] after matching at 0"),
        Err(e) => failed("classical_airy", tol, e),
    }
}

fn classification() -> Check {
    let cases = [
        (a(3, 4), Classification::Continuous, 1),
        (a(2, 3), Classification::Continuous, 3),
        (a(3, 5), Classification::Continuous, 7),
        (LevyIndex::CLASSICAL, Classification::Discrete, -1),
    ];
    let mut bad = Vec::new();
    for (al, class, dof) in cases {
        match build_constraints(al, 1.0, 0.0, 3.0, 1e-10).and_then(|cs| null_space_dim(&cs, DEFAULT_RANK_TOL)) {
            Ok(r) if r.classification == class && r.dof == dof => {}
            Ok(r) => bad.push(format!("{al}: {:?} dof {}", r.classification, r.dof)),
            Err(e) => bad.push(format!("{al}: {e}")),
        }
    }
    let detail = if bad.is_empty() { "3/4:1 2/3:3 3/5:7 continuous; 1 discrete".to_string() } else { bad.join("; ") };
    check("classification", 0.0, bad.len() as f64, bad.is_empty(), detail)
}

fn fig1_trend(cfg: &ConstantsConfig, tol: f64) -> Check {
    let run = || -> Result<Vec<f64>> {
        let n = cfg.lookup("neutron")?;
        [a(2, 3), a(5, 6), LevyIndex::CLASSICAL]
            .into_iter()
            .map(|al| log10_spread_diagnostic(al, scale_params(&cfg.constants, n, al, 0.0)?.ln_k, 1.0, tol))
            .collect()
    };
    match run() {
        Ok(v) => check(
            "trend_alpha",
            0.0,
            v[1] - v[0],
            v[1] < v[0] && v[2] < v[1],
            format!("log10 spread at 2/3, 5/6, 1: {:.3}, {:.3}, {:.3}", v[0], v[1], v[2]),
        ),
        Err(e) => failed("trend_alpha", 0.0, e),
    }
}

fn fig23_trend(cfg: &ConstantsConfig, tol: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let al = a(4, 5);
    let run = || -> Result<Vec<f64>> {
        ["electron", "muon", "neutron"]
            .iter()
            .map(|name| {
                let p = cfg.lookup(name)?;
                log10_spread_diagnostic(al, scale_params(&cfg.constants, p, al, 0.0)?.ln_k, SWEEP_XI0, tol)
            })
            .collect()
    };
    out.push(match run() {
        Ok(v) => check(
            "trend_particles",
            0.0,
            v[0] - v[1],
            v[0] > v[1] && v[1] > v[2],
            format!("log10 spread electron, muon, neutron: {:.3}, {:.3}, {:.3}", v[0], v[1], v[2]),
        ),
        Err(e) => failed("trend_particles", 0.0, e),
    });
    let grid = || -> Result<(usize, f64)> {
        let masses = log_spaced(1e-37, 1e-25, 20)?;
        let alphas = default_alpha_grid();
        let cells = heatmap(&cfg.constants, &masses, &alphas, SWEEP_XI0, tol)?;
        let mut violations = 0;
        let mut worst: f64 = f64::NEG_INFINITY;
        for j in 0..alphas.len() {
            for i in 1..masses.len() {
                let step = cells[i * alphas.len() + j].log10_variance - cells[(i - 1) * alphas.len() + j].log10_variance;
                worst = worst.max(step);
                if step > 0.0 {
                    violations += 1;
                }
            }
        }
        Ok((violations, worst))
    };
    out.push(match grid() {
        Ok((v, worst)) => check("trend_heatmap", 0.0, worst, v == 0, format!("{v} increasing steps; largest step {worst:.3}")),
        Err(e) => failed("trend_heatmap", 0.0, e),
    });
    out
}

fn gup_invariance(cfg: &ConstantsConfig, beta: Option<f64>) -> Check {
    let auto = gup_beta(&cfg.constants);
    let b = beta.unwrap_or(auto);
    let betas = [0.0, b, 10.0 * b];
    let run = || -> Result<Vec<String>> {
        let p = cfg.lookup("electron")?;
        let mut bad = Vec::new();
        for al in [a(3, 4), a(2, 3)] {
            if !verify_root_invariance(al, &betas) {
                bad.push(format!("{al}: roots changed"));
            }
            let sp = scale_params(&cfg.constants, p, al, 0.0)?;
            let (class, dof) = classify(al);
            for &beta in &betas {
                let gs = gup_scale(&sp, &GupParams::new(beta, 0.0, 0.0)?, &cfg.constants, p, GupFormula::Derivation)?;
                if beta == 0.0 && gs.scale != sp {
                    bad.push(format!("{al}: beta = 0 differs from the uncorrected scale"));
                }
                let r = gup_spectrum(al, &gs, 0.0, natural_xi(al, gs.k_prime, 3.0), 1e-10)?;
                if r.classification != class || r.dof != dof || r.numerical_dof as i64 != dof {
                    bad.push(format!("{al}, beta {beta:e}: {:?} dof {} ({})", r.classification, r.dof, r.numerical_dof));
                }
            }
        }
        Ok(bad)
    };
    match run() {
        Ok(bad) => check(
            "gup_invariance",
            0.0,
            bad.len() as f64,
            bad.is_empty(),
            if bad.is_empty() { format!("beta in {{0, {b:e}, {:e}}}", 10.0 * b) } else { bad.join("; ") },
        ),
        Err(e) => failed("gup_invariance", 0.0, e),
    }
}

fn k_scaling() -> Check {
    let tol = 1e-10;
    let mut worst: f64 = 0.0;
    for al in [a(3, 4), a(2, 3), a(5, 6), LevyIndex::CLASSICAL] {
        let q = al.exponent();
        for k in [1e-2f64, 1e2] {
            let s = k.powf(1.0 / q);
            for (spec_k, spec_1) in SolutionSpec::all(al, k).unwrap().iter().zip(SolutionSpec::all(al, 1.0).unwrap()) {
                for i in 0..=8 {
                    let xi = -2.0 + 0.5 * i as f64;
                    let lhs = eval_y_scaled(spec_k, xi, 1e-11);
                    let rhs = eval_y_scaled(&spec_1, s * xi, 1e-11);
                    match (lhs, rhs) {
                        (Ok(l), Ok(r)) => {
                            let r_val = r.mantissa * s * (r.ln_scale - l.ln_scale).exp();
                            worst = worst.max((l.mantissa - r_val).norm() / l.mantissa.norm());
                        }
                        (Err(e), _) | (_, Err(e)) => return failed("k_scaling", tol, e),
                    }
                }
            }
        }
    }
    check("k_scaling", tol, worst, worst <= tol, "max relative deviation, xi in [-2, 2]")
}

/// Runs every check. Failing checks are reported, not returned as errors.
pub fn run_suite(opts: &VerifyOptions) -> VerifyReport {
    let mut checks = vec![root_counts(), min_numerator()];
    residuals(opts, &mut checks);
    zero_sum_residuals(opts, &mut checks);
    checks.push(gamma_anchor());
    checks.push(classical_airy());
    checks.push(classification());
    checks.push(fig1_trend(&opts.constants, 1e-10));
    checks.extend(fig23_trend(&opts.constants, 1e-10));
    checks.push(gup_invariance(&opts.constants, opts.beta));
    checks.push(k_scaling());
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { passed, checks }
}
