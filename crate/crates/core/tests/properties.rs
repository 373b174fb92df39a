use fracgrav::gup::{gup_scale, GupFormula, GupParams};
use fracgrav::operators::{gl_derivative, FracOrder, GridFunction};
use fracgrav::quantum::{enumerate_roots, root_count, LevyIndex};
use fracgrav::scales::{d2alpha, scale_params, ConstantsConfig, ParticleSpec};
use fracgrav::solutions::{eval_y, eval_y_scaled, SolutionSpec};
use fracgrav::spectrum::{classify, spread_diagnostic, Classification};
use fracgrav::Complex64;
use proptest::prelude::*;

fn levy() -> impl Strategy<Value = LevyIndex> {
    (1u64..=50).prop_flat_map(|m| (m / 2 + 1..=m).prop_map(move |n| LevyIndex::new(n, m).unwrap()))
}

fn test_alpha() -> impl Strategy<Value = LevyIndex> {
    prop_oneof![
        Just(LevyIndex::new(3, 4).unwrap()),
        Just(LevyIndex::new(2, 3).unwrap()),
        Just(LevyIndex::new(5, 6).unwrap()),
        Just(LevyIndex::CLASSICAL),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn gl_is_linear(order in 0.1f64..2.0, ca in -3.0f64..3.0, cb in -3.0f64..3.0, lam in 0.2f64..2.0) {
        let h = 0.01;
        let f = GridFunction::from_fn(-5.0, h, 800, |x| Complex64::new((lam * x).exp(), 0.0)).unwrap();
        let g = GridFunction::from_fn(-5.0, h, 800, |x| Complex64::new(x.sin(), x.cos())).unwrap();
        let (a, b) = (Complex64::new(ca, 0.0), Complex64::new(0.0, cb));
        let combo = GridFunction::linear_combination(a, &f, b, &g).unwrap();
        let ord = FracOrder::gl(order).unwrap();
        let lhs = gl_derivative(&combo, ord, 2.0).unwrap();
        let df = gl_derivative(&f, ord, 2.0).unwrap();
        let dg = gl_derivative(&g, ord, 2.0).unwrap();
        // rounding in the weighted sums grows like h^-order
        let scale = h.powf(-order) * combo.max_abs().max(f.max_abs());
        for ((l, x), y) in lhs.values().iter().zip(df.values()).zip(dg.values()) {
            prop_assert!((l - (a * x + b * y)).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn roots_closed_under_conjugation(alpha in levy()) {
        let roots = enumerate_roots(alpha);
        let p = roots.len();
        prop_assert_eq!(p, root_count(alpha));
        for r in &roots {
            let c = r.value.conj();
            prop_assert!(roots.iter().any(|s| s.value == c));
        }
        let min_gap = 2.0 * (std::f64::consts::PI / p as f64).sin();
        for i in 0..p {
            for j in i + 1..p {
                prop_assert!((roots[i].value - roots[j].value).norm() >= min_gap * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn root_count_skips_four(alpha in levy()) {
        let p = root_count(alpha);
        prop_assert_ne!(p, 4);
        let (class, dof) = classify(alpha);
        if alpha.is_classical() {
            prop_assert_eq!(p, 3);
            prop_assert_eq!(class, Classification::Discrete);
        } else {
            prop_assert!(p >= 5);
            prop_assert!(dof >= 1);
            prop_assert_eq!(class, Classification::Continuous);
        }
    }

    #[test]
    fn conjugate_root_gives_conjugate_value(alpha in test_alpha(), j in 0usize..11, xi in -4.0f64..4.0) {
        let specs = SolutionSpec::all(alpha, 1.0).unwrap();
        let j = j % specs.len();
        let p = specs.len();
        let tol = 1e-11;
        let y = eval_y(&specs[j], xi, tol).unwrap().value;
        let yc = eval_y(&specs[(p - j) % p], xi, tol).unwrap().value;
        prop_assert!((y - yc.conj()).norm() <= 2.0 * tol * y.norm().max(1.0));
    }

    #[test]
    fn k_scaling(alpha in test_alpha(), lk in -2.0f64..2.0, xi in -2.0f64..2.0, j in 0usize..11) {
        let k = 10f64.powf(lk);
        let q = alpha.exponent();
        let s = k.powf(1.0 / q);
        let n = root_count(alpha);
        let lhs = eval_y_scaled(&SolutionSpec::all(alpha, k).unwrap()[j % n], xi, 1e-11).unwrap();
        let rhs = eval_y_scaled(&SolutionSpec::all(alpha, 1.0).unwrap()[j % n], s * xi, 1e-11).unwrap();
        let r = rhs.mantissa * s * (rhs.ln_scale - lhs.ln_scale).exp();
        prop_assert!((lhs.mantissa - r).norm() <= 1e-10 * lhs.mantissa.norm());
    }

    #[test]
    fn spread_is_a_set_function(alpha in test_alpha(), xi0 in 0.05f64..1.5, seed in any::<u64>()) {
        let tol = 1e-12;
        let specs = SolutionSpec::all(alpha, 1.0).unwrap();
        let mut vals: Vec<f64> = specs.iter().map(|s| eval_y(s, xi0, tol).unwrap().value.norm_sqr()).collect();
        // conjugated root set
        let conj: Vec<f64> = specs
            .iter()
            .map(|s| eval_y(&SolutionSpec::with_unit(alpha, 1.0, s.eps().conj()).unwrap(), xi0, tol).unwrap().value.norm_sqr())
            .collect();
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        let reference = var(&vals);
        // a deterministic shuffle
        let mut state = seed | 1;
        for i in (1..vals.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            vals.swap(i, (state % (i as u64 + 1)) as usize);
        }
        prop_assert!((var(&vals) - reference).abs() <= 1e-12 * reference.max(1e-300));
        prop_assert!((var(&conj) - reference).abs() <= 1e-9 * reference.max(1e-300));
        let ours = spread_diagnostic(alpha, 1.0, xi0, tol).unwrap();
        prop_assert!((ours - reference).abs() <= 1e-8 * reference.max(1e-300), "{} vs {}", ours, reference);
    }

    #[test]
    fn scales_monotone_in_mass(alpha in levy(), lm in -36.0f64..-26.0) {
        let pc = ConstantsConfig::default().constants;
        let m1 = 10f64.powf(lm);
        let m2 = m1 * 1.01;
        let p1 = ParticleSpec::new("a", m1).unwrap();
        let p2 = ParticleSpec::new("b", m2).unwrap();
        let d1 = d2alpha(&pc, &p1, alpha).unwrap();
        let d2 = d2alpha(&pc, &p2, alpha).unwrap();
        // d ln D / d ln m = 1 - 2a < 0, d ln K / d ln m = -4 a^2 < 0
        prop_assert!(d2 < d1);
        let k1 = scale_params(&pc, &p1, alpha, 0.0).unwrap().ln_k;
        let k2 = scale_params(&pc, &p2, alpha, 0.0).unwrap().ln_k;
        let slope = (k2 - k1) / 1.01f64.ln();
        prop_assert!((slope + 4.0 * alpha.value().powi(2)).abs() < 1e-8);
    }

    #[test]
    fn gup_affine_in_beta(alpha in test_alpha(), le in -34.0f64..-32.0) {
        let cfg = ConstantsConfig::default();
        let p = cfg.lookup("electron").unwrap();
        let e = 10f64.powf(le);
        let sp = scale_params(&cfg.constants, p, alpha, e).unwrap();
        // largest beta keeps the correction well inside first order
        let probe = gup_scale(&sp, &GupParams::new(1.0, e, e).unwrap(), &cfg.constants, p, GupFormula::Derivation);
        let unit = match probe {
            Ok(g) => g.relative_correction,
            Err(fracgrav::Error::PerturbationInvalid { ratio, .. }) => ratio,
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let b1 = 1e-3 / unit;
        let run = |beta: f64| gup_scale(&sp, &GupParams::new(beta, e, e).unwrap(), &cfg.constants, p, GupFormula::Derivation).unwrap();
        let g: Vec<_> = [0.0, b1, 2.0 * b1].iter().map(|&b| run(b)).collect();
        let (da1, da2) = (g[1].a - g[0].a, g[2].a - g[1].a);
        let (db1, db2) = (g[1].b - g[0].b, g[2].b - g[1].b);
        prop_assert!((da1 - da2).abs() <= 1e-10 * da1.abs().max(1e-300) + 4.0 * f64::EPSILON * e);
        prop_assert!((db1 - db2).abs() <= 1e-10 * db1.abs() + 4.0 * f64::EPSILON * g[0].b.abs());
    }
}
