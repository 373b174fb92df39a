use std::io::Write;

use fracgrav::gup::{gup_beta, gup_scale, gup_spectrum, verify_root_invariance, GupFormula, GupParams};
use fracgrav::quantum::{min_numerator_filtered, DenominatorFilter};
use fracgrav::solutions::eval_y_scaled;
use fracgrav::spectrum::{classify, natural_xi, DEFAULT_RANK_TOL};
use fracgrav::sweep::{default_alpha_grid, heatmap, log_spaced};
use fracgrav::verify::{run_suite, VerifyOptions};
use fracgrav::{
    build_constraints, enumerate_roots, null_space_dim, scale_params, verify_residual, Classification, ConstantsConfig,
    LevyIndex, ResidualOptions, SolutionSpec, SpectrumReport,
};

use crate::args::{Beta, GridSpec};
use crate::error::{CliError, CliResult};
use crate::output::{csv_writer, open_sink, sci, sha256_hex, RunRecord};
use crate::{Cli, Command, FilterArg, FormulaArg};

/// Tolerance for curve and spectrum commands.
const DATA_TOL: f64 = 1e-10;

/// Parsed constants plus the hash of the text they came from.
struct Constants {
    cfg: ConstantsConfig,
    sha256: String,
    source: String,
}

fn load_constants(cli: &Cli) -> CliResult<Constants> {
    let (text, source) = match &cli.common.constants {
        Some(p) => (
            std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read constants file {}: {e}", p.display())))?,
            p.display().to_string(),
        ),
        None => (fracgrav::scales::DEFAULT_CONSTANTS.to_string(), "builtin".to_string()),
    };
    Ok(Constants { cfg: ConstantsConfig::parse(&text)?, sha256: sha256_hex(&text), source })
}

fn record(cmd: &str, c: &Constants, tol: f64) -> RunRecord {
    let mut r = RunRecord::new(cmd);
    r.set("tol", sci(tol)).set("constants", &c.source);
    r
}

fn finish(mut r: RunRecord, c: &Constants) -> RunRecord {
    r.set("constants_sha256", &c.sha256);
    r
}

fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::Discrete => "discrete",
        Classification::Continuous => "continuous",
    }
}

fn resolve_beta(b: Beta, c: &Constants) -> f64 {
    match b {
        Beta::Auto => gup_beta(&c.cfg.constants),
        Beta::Value(v) => v,
    }
}

/// `|y|^2` and its log10, kept finite in the log even when the value is not.
fn abs_sq(spec: &SolutionSpec, xi: f64, tol: f64) -> CliResult<(f64, f64)> {
    let y = eval_y_scaled(spec, xi, tol)?;
    let ln = 2.0 * y.ln_abs();
    Ok((ln.exp(), ln / std::f64::consts::LN_10))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let c = load_constants(cli)?;
    let out = cli.common.out.as_deref();
    match &cli.command {
        Command::Roots { alpha } => {
            let mut r = RunRecord::new("roots");
            r.set("alpha", alpha).set("constants", &c.source);
            let mut w = csv_writer(open_sink(out)?, &finish(r, &c), &["nu", "re", "im"])?;
            for root in enumerate_roots(*alpha) {
                w.write_record([root.index.to_string(), sci(root.value.re), sci(root.value.im)])?;
            }
            w.flush()?;
        }

        Command::Ynorm { alpha, particle, xi, energy, k } => {
            let tol = cli.common.tol.unwrap_or(DATA_TOL);
            let p = c.cfg.lookup(particle)?;
            let sp = scale_params(&c.cfg.constants, p, *alpha, *energy)?;
            let kk = k.unwrap_or(sp.k);
            let mut r = record("ynorm", &c, tol);
            r.set("alpha", alpha).set("particle", &p.name).set("xi", xi).set("E", sci(*energy)).set("K", sci(kk));
            let header = ["xi", "z_m", "nu", "abs_y_sq", "log10_abs_y_sq"];
            let mut w = csv_writer(open_sink(out)?, &finish(r, &c), &header)?;
            let grid = xi.linear();
            for spec in SolutionSpec::all(*alpha, kk)? {
                for &x in &grid {
                    let (v, l) = abs_sq(&spec, x, tol)?;
                    // heights only mean something on the particle's own scale
                    let z = if k.is_some() { String::new() } else { sci(sp.xi_of_z.z(x)) };
                    w.write_record([sci(x), z, spec.root.index.to_string(), sci(v), sci(l)])?;
                }
            }
            w.flush()?;
        }

        Command::Particles { alpha, particle, xi } => {
            let tol = cli.common.tol.unwrap_or(DATA_TOL);
            let mut names: Vec<String> = ["electron", "muon", "neutron"].map(String::from).into();
            for extra in particle {
                let n = c.cfg.lookup(extra)?.name.clone();
                if !names.contains(&n) {
                    names.push(n);
                }
            }
            let mut r = record("particles", &c, tol);
            r.set("alpha", alpha).set("particles", names.join(";")).set("xi", xi);
            let header = ["particle", "xi", "nu", "abs_y_sq", "log10_abs_y_sq"];
            let mut w = csv_writer(open_sink(out)?, &finish(r, &c), &header)?;
            let grid = xi.linear();
            for name in &names {
                let p = c.cfg.lookup(name)?;
                let k = scale_params(&c.cfg.constants, p, *alpha, 0.0)?.k;
                for spec in SolutionSpec::all(*alpha, k)? {
                    for &x in &grid {
                        let (v, l) = abs_sq(&spec, x, tol)?;
                        w.write_record([p.name.clone(), sci(x), spec.root.index.to_string(), sci(v), sci(l)])?;
                    }
                }
            }
            w.flush()?;
        }

        Command::Heatmap { mass, alphas, xi0 } => {
            let tol = cli.common.tol.unwrap_or(DATA_TOL);
            let GridSpec { lo, hi, n } = *mass;
            let masses = log_spaced(lo, hi, n)?;
            let grid: Vec<LevyIndex> =
                if alphas.is_empty() { default_alpha_grid() } else { alphas.iter().map(|e| e.alpha).collect() };
            let snaps: Vec<String> = alphas
                .iter()
                .filter_map(|e| e.snapped_from.map(|x| format!("{x}->{}", e.alpha)))
                .collect();
            let mut r = record("heatmap", &c, tol);
            r.set("mass", mass)
                .set("alphas", grid.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";"))
                .set("xi0", sci(*xi0));
            if !snaps.is_empty() {
                r.set("snapped", snaps.join(";"));
            }
            let header = ["mass_kg", "alpha_num", "alpha_den", "log10_variance", "white"];
            let mut w = csv_writer(open_sink(out)?, &finish(r, &c), &header)?;
            for cell in heatmap(&c.cfg.constants, &masses, &grid, *xi0, tol)? {
                w.write_record([
                    sci(cell.mass_kg),
                    cell.alpha.numerator().to_string(),
                    cell.alpha.denominator().to_string(),
                    sci(cell.log10_variance),
                    cell.white.to_string(),
                ])?;
            }
            w.flush()?;
        }

        Command::MinNumerator { m_max, filter } => {
            let (f, fname) = match filter {
                FilterArg::All => (DenominatorFilter::All, "all"),
                FilterArg::Odd => (DenominatorFilter::Odd, "odd"),
                FilterArg::Even => (DenominatorFilter::Even, "even"),
            };
            let res = min_numerator_filtered(*m_max, f)?;
            let mut r = RunRecord::new("min-numerator");
            r.set("m_max", m_max).set("filter", fname).set("constants", &c.source);
            let header = ["m_max", "filter", "minimum", "witness_num", "witness_den", "visited"];
            let mut w = csv_writer(open_sink(out)?, &finish(r, &c), &header)?;
            w.write_record([
                m_max.to_string(),
                fname.to_string(),
                res.minimum.to_string(),
                res.witness.numerator().to_string(),
                res.witness.denominator().to_string(),
                res.visited.to_string(),
            ])?;
            w.flush()?;
        }

        Command::Residual { alpha, root, k, xi, h, window } => {
            let tol = cli.common.tol.unwrap_or(ResidualOptions::default().tol);
            let specs = SolutionSpec::all(*alpha, *k)?;
            let chosen: Vec<SolutionSpec> = match root {
                Some(j) if *j >= specs.len() => {
                    return Err(CliError::Usage(format!("root {j} out of range: alpha {alpha} has {} roots", specs.len())))
                }
                Some(j) => vec![specs[*j]],
                None => specs,
            };
            let mut r = record("residual", &c, tol);
            r.set("alpha", alpha)
                .set("root", root.map_or("all".to_string(), |j| j.to_string()))
                .set("K", sci(*k))
                .set("xi", format!("{:e}:{:e}", xi.0, xi.1))
                .set("h", sci(*h))
                .set("window", sci(*window));
            let header = ["nu", "eps_re", "eps_im", "h", "window", "points", "max_abs_dev", "tail_estimate"];
            let mut w = csv_writer(open_sink(out)?, &finish(r, &c), &header)?;
            let opts = ResidualOptions { window: *window, tol };
            for spec in chosen {
                let rep = verify_residual(&spec, *xi, *h, opts)?;
                let e = spec.eps();
                w.write_record([
                    spec.root.index.to_string(),
                    sci(e.re),
                    sci(e.im),
                    sci(rep.h),
                    sci(rep.window),
                    rep.points.to_string(),
                    sci(rep.max_abs_dev),
                    sci(rep.tail_estimate),
                ])?;
            }
            w.flush()?;
        }

        Command::Spectrum { alpha, particle, k, xi_wall, xi_far, beta, energy, e0 } => {
            let tol = cli.common.tol.unwrap_or(DATA_TOL);
            let mut r = record("spectrum", &c, tol);
            r.set("alpha", alpha);
            let kk = match particle {
                Some(name) => {
                    let p = c.cfg.lookup(name)?;
                    let sp = scale_params(&c.cfg.constants, p, *alpha, *energy)?;
                    r.set("particle", &p.name).set("E", sci(*energy));
                    match beta {
                        Some(b) => {
                            let b = resolve_beta(*b, &c);
                            let e0 = e0.unwrap_or(energy.max(0.0));
                            let gp = GupParams::new(b, *energy, e0)?;
                            let gs = gup_scale(&sp, &gp, &c.cfg.constants, p, GupFormula::Derivation)?;
                            for warning in &gs.warnings {
                                eprintln!("fracgrav: warning: {warning}");
                            }
                            r.set("beta", sci(b)).set("E0", sci(e0));
                            gs.k_prime
                        }
                        None => sp.k,
                    }
                }
                None => k.unwrap_or(1.0),
            };
            let far = xi_far.unwrap_or_else(|| natural_xi(*alpha, kk, 3.0));
            r.set("K", sci(kk)).set("xi_wall", sci(*xi_wall)).set("xi_far", sci(far));
            let cs = build_constraints(*alpha, kk, *xi_wall, far, tol)?;
            let rep = null_space_dim(&cs, DEFAULT_RANK_TOL)?;
            let header = [
                "alpha_num",
                "alpha_den",
                "roots",
                "rank",
                "numerical_dof",
                "dof",
                "classification",
                "singular_values",
                "note",
            ];
            let mut w = csv_writer(open_sink(out)?, &finish(r, &c), &header)?;
            w.write_record([
                alpha.numerator().to_string(),
                alpha.denominator().to_string(),
                rep.p.to_string(),
                rep.rank.to_string(),
                rep.numerical_dof.to_string(),
                rep.dof.to_string(),
                class_name(rep.classification).to_string(),
                rep.singular_values.iter().map(|s| sci(*s)).collect::<Vec<_>>().join(";"),
                rep.degeneracy_note.clone(),
            ])?;
            w.flush()?;
        }

        Command::GupCheck { alpha, particle, beta, energy, e0, formula } => {
            let tol = cli.common.tol.unwrap_or(DATA_TOL);
            let b = resolve_beta(*beta, &c);
            let e0 = e0.unwrap_or(energy.max(0.0));
            let (form, fname) = match formula {
                FormulaArg::Derivation => (GupFormula::Derivation, "derivation"),
                FormulaArg::Simplified => (GupFormula::Simplified, "simplified"),
            };
            let p = c.cfg.lookup(particle)?;
            let sp = scale_params(&c.cfg.constants, p, *alpha, *energy)?;
            let roots_ok = verify_root_invariance(*alpha, &[0.0, b]);
            let mut rows: Vec<(f64, fracgrav::gup::GupScale, SpectrumReport)> = Vec::new();
            for beta in [0.0, b] {
                let gs = gup_scale(&sp, &GupParams::new(beta, *energy, e0)?, &c.cfg.constants, p, form)?;
                for warning in &gs.warnings {
                    eprintln!("fracgrav: warning: {warning}");
                }
                let rep = gup_spectrum(*alpha, &gs, 0.0, natural_xi(*alpha, gs.k_prime, 3.0), tol)?;
                rows.push((beta, gs, rep));
            }
            let (class, dof) = classify(*alpha);
            let spectra_ok = rows
                .iter()
                .all(|(_, _, r)| r.classification == class && r.dof == dof && r.numerical_dof as i64 == dof);
            let mut rec = record("gup-check", &c, tol);
            rec.set("alpha", alpha)
                .set("particle", &p.name)
                .set("beta", sci(b))
                .set("E", sci(*energy))
                .set("E0", sci(e0))
                .set("formula", fname);
            let header = [
                "beta",
                "a_j",
                "b_n",
                "k_prime",
                "relative_correction",
                "classification",
                "dof",
                "numerical_dof",
                "roots_invariant",
            ];
            let mut w = csv_writer(open_sink(out)?, &finish(rec, &c), &header)?;
            for (beta, gs, rep) in &rows {
                w.write_record([
                    sci(*beta),
                    sci(gs.a),
                    sci(gs.b),
                    sci(gs.k_prime),
                    sci(gs.relative_correction),
                    class_name(rep.classification).to_string(),
                    rep.dof.to_string(),
                    rep.numerical_dof.to_string(),
                    roots_ok.to_string(),
                ])?;
            }
            w.flush()?;
            if !(roots_ok && spectra_ok) {
                return Err(CliError::Verification(format!("classification or roots moved under beta = {b:e}")));
            }
        }

        Command::Verify { h, window, beta, refine } => {
            let opts = VerifyOptions {
                h: *h,
                window: *window,
                tol: cli.common.tol.unwrap_or(VerifyOptions::default().tol),
                beta: beta.map(|b| resolve_beta(b, &c)),
                refine: *refine,
                constants: c.cfg.clone(),
            };
            let report = run_suite(&opts);
            let mut sink = open_sink(out)?;
            serde_json::to_writer_pretty(&mut sink, &report)?;
            writeln!(sink)?;
            sink.flush()?;
            let failed: Vec<&str> = report.checks.iter().filter(|ch| !ch.passed).map(|ch| ch.name.as_str()).collect();
            eprintln!("fracgrav verify: {} of {} checks passed", report.checks.len() - failed.len(), report.checks.len());
            if !failed.is_empty() {
                return Err(CliError::Verification(format!("failing checks: {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}
