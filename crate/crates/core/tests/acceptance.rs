//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion with
//! the measured value, the pinned tolerance and the wall time.
//!
//! Failing criteria are reported, and the binary still exits 0 so the rest
//! of `cargo test` runs; set `ACCEPTANCE_STRICT=1` to exit 1 on any failure.

use std::time::{Duration, Instant};

use fracgrav::gup::{gup_beta, gup_scale, gup_spectrum, verify_root_invariance, GupFormula, GupParams};
use fracgrav::quantum::{enumerate_roots, min_numerator_bruteforce, root_count, LevyIndex};
use fracgrav::scales::{scale_params, ConstantsConfig};
use fracgrav::solutions::{eval_y, eval_y_scaled, verify_residual, ResidualOptions, SolutionSpec};
use fracgrav::spectrum::{
    assemble_wavefunction, build_constraints, decaying_combination, log10_spread_diagnostic, natural_xi, null_space_dim,
    Classification, DEFAULT_RANK_TOL,
};
use fracgrav::sweep::{default_alpha_grid, heatmap, log_spaced, SWEEP_XI0};
use fracgrav::Complex64;
use statrs::function::gamma::gamma;

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

fn a(n: u64, m: u64) -> LevyIndex {
    LevyIndex::new(n, m).unwrap()
}

fn gcd(mut x: u64, mut y: u64) -> u64 {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

/// Maclaurin series of Ai with `terms` terms in each of the two components.
fn airy_ai(x: f64, terms: usize) -> f64 {
    let c1 = 0.355_028_053_887_817_239;
    let c2 = 0.258_819_403_792_806_798;
    let (mut f, mut g) = (0.0, 0.0);
    let (mut tf, mut tg) = (1.0, x);
    let x3 = x.powi(3);
    for k in 0..terms {
        f += tf;
        g += tg;
        let k = k as f64;
        tf *= x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg *= x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
    }
    c1 * f - c2 * g
}

fn criterion_1() -> Outcome {
    let table = [(a(3, 4), 5), (a(2, 3), 7), (a(3, 5), 11), (LevyIndex::CLASSICAL, 3)];
    let got: Vec<(LevyIndex, usize, usize)> = table.iter().map(|&(al, p)| (al, p, root_count(al))).collect();
    let passed = got.iter().all(|(_, p, g)| p == g);
    let summary = got.iter().map(|(al, _, g)| format!("{al}->{g}")).collect::<Vec<_>>().join(" ");
    Outcome { passed, summary, details: vec![] }
}

fn criterion_2() -> Outcome {
    // independent sweep, strict 1/2 < n/m < 1
    let mut best = (u64::MAX, 0, 0);
    for m in 2..=500u64 {
        for n in m / 2 + 1..m {
            if gcd(n, m) != 1 {
                continue;
            }
            let (num, den) = (2 * n + m, m);
            let p = num / gcd(num, den);
            if p < best.0 {
                best = (p, n, m);
            }
        }
    }
    let lib = min_numerator_bruteforce(500).unwrap();
    let passed = best == (5, 3, 4) && lib.minimum == 5 && lib.witness == a(3, 4);
    Outcome {
        passed,
        summary: format!("oracle {} at {}/{}; library {} at {}", best.0, best.1, best.2, lib.minimum, lib.witness),
        details: vec![],
    }
}

fn criterion_3() -> Outcome {
    let opts = ResidualOptions::default();
    let mut details = Vec::new();
    let mut passed = true;
    let mut worst: f64 = 0.0;
    for al in [a(3, 4), a(2, 3), a(5, 6)] {
        for spec in SolutionSpec::all(al, 1.0).unwrap() {
            let eps = spec.eps();
            let label = format!("alpha {al} nu {} eps = {:+.4}{:+.4}i", spec.root.index, eps.re, eps.im);
            let coarse = match verify_residual(&spec, (-1.0, 1.0), 1e-3, opts) {
                Ok(r) => r.max_abs_dev,
                Err(e) => {
                    passed = false;
                    details.push(format!("{label}: {e}"));
                    continue;
                }
            };
            worst = worst.max(coarse);
            if coarse > 1e-2 {
                passed = false;
                details.push(format!("{label}: h=1e-3 dev {coarse:.3e} (not refined)"));
                continue;
            }
            match verify_residual(&spec, (-1.0, 1.0), 1e-4, opts) {
                Ok(r) => {
                    let ratio = coarse / r.max_abs_dev;
                    passed &= ratio >= 5.0;
                    details.push(format!("{label}: h=1e-3 dev {coarse:.3e}, h=1e-4 dev {:.3e}, shrink x{ratio:.2}", r.max_abs_dev));
                }
                Err(e) => {
                    passed = false;
                    details.push(format!("{label}: h=1e-4 {e}"));
                }
            }
        }
    }
    Outcome { passed, summary: format!("max dev at h=1e-3 {worst:.3e} (tol 1e-2, shrink >= 5x)"), details }
}

fn criterion_4() -> Outcome {
    let opts = ResidualOptions::default();
    let mut details = Vec::new();
    let mut passed = true;
    let one = Complex64::new(1.0, 0.0);
    let wf = build_constraints(a(3, 4), 1.0, 0.0, 3.0, 1e-10).and_then(|cs| assemble_wavefunction(&cs, &[one]));
    match wf.and_then(|wf| wf.residual((-1.0, 1.0), 1e-3, opts.window, opts.tol)) {
        Ok(dev) => {
            passed &= dev <= 1e-2;
            details.push(format!("alpha 3/4 assembled: max |residual| {dev:.3e}"));
        }
        Err(e) => {
            passed = false;
            details.push(format!("alpha 3/4 assembled: {e}"));
        }
    }
    // alpha = 1: no free coefficients remain; the zero-sum decaying pair instead
    let cs1 = build_constraints(LevyIndex::CLASSICAL, 1.0, 0.0, 3.0, 1e-10).unwrap();
    details.push(format!("alpha 1 assembled: {}", assemble_wavefunction(&cs1, &[]).unwrap_err()));
    match decaying_combination(LevyIndex::CLASSICAL, 1.0, 8.0, 1e-12).and_then(|wf| wf.residual((-1.0, 1.0), 1e-3, 0.05, 1e-12)) {
        Ok(dev) => {
            passed &= dev <= 1e-2;
            details.push(format!("alpha 1 zero-sum decaying combination: max |residual| {dev:.3e}"));
        }
        Err(e) => {
            passed = false;
            details.push(format!("alpha 1: {e}"));
        }
    }
    Outcome { passed, summary: "max |residual| <= 1e-2 at h = 1e-3".into(), details }
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for al in [a(3, 4), a(2, 3), a(5, 6), a(3, 5), a(4, 5), LevyIndex::CLASSICAL] {
        let q = 2.0 * al.value() + 1.0;
        for k in [0.01, 1.0, 100.0] {
            let closed = (k * q).powf(1.0 / q) * gamma(1.0 + 1.0 / q);
            for spec in SolutionSpec::all(al, k).unwrap() {
                let y = eval_y(&spec, 0.0, 1e-12).unwrap().value;
                worst = worst.max((y - spec.eps() * closed).norm() / closed);
            }
        }
    }
    Outcome { passed: worst <= 1e-8, summary: format!("max rel err {worst:.3e} (tol 1e-8)"), details: vec![] }
}

fn criterion_6() -> Outcome {
    let wf = decaying_combination(LevyIndex::CLASSICAL, 1.0, 8.0, 1e-13).unwrap();
    let scale = airy_ai(0.0, 60) / wf.eval(0.0, 1e-13).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=60 {
        let x = 0.05 * i as f64;
        let ai = airy_ai(x, 60);
        worst = worst.max((wf.eval(x, 1e-13).unwrap() * scale - ai).norm() / ai.abs());
    }
    let c = wf.coefficients();
    Outcome {
        passed: worst <= 1e-6,
        summary: format!("max rel err on [0, 3] {worst:.3e} (tol 1e-6)"),
        details: vec![format!("C = [{:.3e}, {:.6}, {:.6}]", c[0], c[1], c[2])],
    }
}

fn criterion_7() -> Outcome {
    let cases = [
        (a(3, 4), Classification::Continuous, 1),
        (a(2, 3), Classification::Continuous, 3),
        (a(3, 5), Classification::Continuous, 7),
        (a(5, 6), Classification::Continuous, 4),
        (a(4, 5), Classification::Continuous, 9),
        (LevyIndex::CLASSICAL, Classification::Discrete, -1),
    ];
    let mut passed = true;
    let mut details = Vec::new();
    for (al, class, dof) in cases {
        let cs = build_constraints(al, 1.0, 0.0, 3.0, 1e-10).unwrap();
        let r = null_space_dim(&cs, DEFAULT_RANK_TOL).unwrap();
        let ok = r.classification == class && r.dof == dof && r.dof == r.p as i64 - 4 && r.numerical_dof as i64 == dof.max(0);
        passed &= ok;
        details.push(format!("{al}: {:?} dof {} numerical {} (P = {})", r.classification, r.dof, r.numerical_dof, r.p));
    }
    Outcome { passed, summary: "classification and dof = P - 4 exact".into(), details }
}

fn criterion_8(cfg: &ConstantsConfig) -> Outcome {
    let n = cfg.lookup("neutron").unwrap();
    let v: Vec<f64> = [a(2, 3), a(5, 6), LevyIndex::CLASSICAL]
        .iter()
        .map(|&al| log10_spread_diagnostic(al, scale_params(&cfg.constants, n, al, 0.0).unwrap().ln_k, 1.0, 1e-10).unwrap())
        .collect();
    Outcome {
        passed: v[1] < v[0] && v[2] < v[1],
        summary: format!("log10 spread at xi0 = 1: 2/3 {:.2}, 5/6 {:.2}, 1 {:.2}", v[0], v[1], v[2]),
        details: vec![],
    }
}

fn criterion_9(cfg: &ConstantsConfig) -> Outcome {
    let al = a(4, 5);
    let v: Vec<f64> = ["electron", "muon", "neutron"]
        .iter()
        .map(|name| {
            let p = cfg.lookup(name).unwrap();
            log10_spread_diagnostic(al, scale_params(&cfg.constants, p, al, 0.0).unwrap().ln_k, SWEEP_XI0, 1e-10).unwrap()
        })
        .collect();
    let masses = log_spaced(1e-37, 1e-25, 20).unwrap();
    let alphas = default_alpha_grid();
    let cells = heatmap(&cfg.constants, &masses, &alphas, SWEEP_XI0, 1e-10).unwrap();
    let mut rising = 0;
    for j in 0..alphas.len() {
        for i in 1..masses.len() {
            if cells[i * alphas.len() + j].log10_variance > cells[(i - 1) * alphas.len() + j].log10_variance {
                rising += 1;
            }
        }
    }
    let white = cells.iter().filter(|c| c.white).count();
    Outcome {
        passed: v[0] > v[1] && v[1] > v[2] && rising == 0,
        summary: format!("e {:.2} > mu {:.2} > n {:.2}; {rising} rising steps in 20x9 grid", v[0], v[1], v[2]),
        details: vec![format!("{white} of {} cells below 1e-80", cells.len())],
    }
}

fn criterion_10(cfg: &ConstantsConfig) -> Outcome {
    let auto = gup_beta(&cfg.constants);
    let betas = [0.0, auto, 10.0 * auto];
    let p = cfg.lookup("electron").unwrap();
    let mut passed = true;
    let mut details = Vec::new();
    for al in [a(3, 4), a(2, 3)] {
        let roots = enumerate_roots(al);
        passed &= verify_root_invariance(al, &betas);
        let sp = scale_params(&cfg.constants, p, al, 0.0).unwrap();
        let mut reports = Vec::new();
        for &b in &betas {
            let gs = gup_scale(&sp, &GupParams::new(b, 0.0, 0.0).unwrap(), &cfg.constants, p, GupFormula::Derivation).unwrap();
            if b == 0.0 {
                passed &= gs.scale == sp && gs.k_prime.to_bits() == sp.k.to_bits();
            }
            let r = gup_spectrum(al, &gs, 0.0, natural_xi(al, gs.k_prime, 3.0), 1e-10).unwrap();
            passed &= enumerate_roots(al) == roots;
            reports.push((r.classification, r.dof, r.numerical_dof));
        }
        let (class, dof, numerical) = reports[0];
        passed &= class == Classification::Continuous && dof == root_count(al) as i64 - 4 && numerical as i64 == dof;
        passed &= reports.windows(2).all(|w| w[0] == w[1]);
        details.push(format!("{al}: {:?}", reports));
    }
    Outcome { passed, summary: format!("beta in {{0, {auto:.4e}, {:.4e}}}", 10.0 * auto), details }
}

fn criterion_11() -> Outcome {
    let mut worst: f64 = 0.0;
    for al in [a(3, 4), a(2, 3), a(5, 6), LevyIndex::CLASSICAL] {
        let q = 2.0 * al.value() + 1.0;
        for k in [1e-2f64, 1e2] {
            let s = k.powf(1.0 / q);
            let with_k = SolutionSpec::all(al, k).unwrap();
            let unit = SolutionSpec::all(al, 1.0).unwrap();
            for (sk, s1) in with_k.iter().zip(&unit) {
                for i in 0..=16 {
                    let xi = -2.0 + 0.25 * i as f64;
                    let l = eval_y_scaled(sk, xi, 1e-11).unwrap();
                    let r = eval_y_scaled(s1, s * xi, 1e-11).unwrap();
                    let rv = r.mantissa * s * (r.ln_scale - l.ln_scale).exp();
                    worst = worst.max((l.mantissa - rv).norm() / l.mantissa.norm());
                }
            }
        }
    }
    Outcome { passed: worst <= 1e-10, summary: format!("max rel dev {worst:.3e} (tol 1e-10)"), details: vec![] }
}

fn main() {
    let cfg = ConstantsConfig::default();
    type Criterion<'a> = (&'a str, Option<Duration>, Box<dyn Fn() -> Outcome + 'a>);
    let ms = Duration::from_millis;
    let criteria: Vec<Criterion> = vec![
        ("root-count table", Some(ms(1)), Box::new(criterion_1)),
        ("minimum numerator, m <= 500", Some(ms(1000)), Box::new(criterion_2)),
        ("residual identity per root", Some(ms(60_000)), Box::new(criterion_3)),
        ("zero-sum cancellation", Some(ms(10_000)), Box::new(criterion_4)),
        ("gamma-identity anchor", Some(ms(1000)), Box::new(criterion_5)),
        ("classical limit vs Airy", Some(ms(1000)), Box::new(criterion_6)),
        ("spectrum classification", None, Box::new(criterion_7)),
        ("spread trend in alpha", None, Box::new(|| criterion_8(&cfg))),
        ("spread trend in mass", None, Box::new(|| criterion_9(&cfg))),
        ("minimal-length invariance", None, Box::new(|| criterion_10(&cfg))),
        ("K-scaling covariance", Some(ms(5000)), Box::new(criterion_11)),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let passed = out.passed && in_time;
        if !passed {
            failures += 1;
        }
        let timing = match budget {
            Some(b) => format!("{:.3} s, budget {:.3} s", elapsed.as_secs_f64(), b.as_secs_f64()),
            None => format!("{:.3} s", elapsed.as_secs_f64()),
        };
        println!("[{}] {:>2} {name}: {} ({timing})", if passed { "PASS" } else { "FAIL" }, i + 1, out.summary);
        if !out.passed || std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
            for d in &out.details {
                println!("         {d}");
            }
        }
        if out.passed && !in_time {
            println!("         over time budget");
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
