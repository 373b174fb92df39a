use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracgrav")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracgrav")).args(args).env(key, val).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows, after the comment line and the header.
fn rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# fracgrav "));
    lines.next().expect("header");
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn root_rows() {
    for (alpha, n) in [("3/4", 5), ("1/1", 3), ("2/3", 7)] {
        let out = stdout(&run(&["roots", "--alpha", alpha]));
        assert_eq!(out.lines().nth(1), Some("nu,re,im"));
        assert_eq!(rows(&out).len(), n, "{alpha}");
    }
}

#[test]
fn bad_alpha_is_usage_error() {
    for bad in ["0.75", "1/2", "3/2", "x"] {
        let o = run(&["roots", "--alpha", bad]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    assert_eq!(run(&["ynorm", "--alpha", "3/4", "--particle", "proton"]).status.code(), Some(2));
    assert_eq!(run(&["ynorm", "--alpha", "3/4", "--xi", "3:0:10"]).status.code(), Some(2));
    assert_eq!(run(&["residual", "--alpha", "3/4", "--root", "5"]).status.code(), Some(2));
}

#[test]
fn ynorm_grid_and_conjugate_pairs() {
    let out = stdout(&run(&["ynorm", "--alpha", "3/4", "--xi", "0:3:301"]));
    let r = rows(&out);
    assert_eq!(r.len(), 5 * 301);
    // root nu and 5 - nu are conjugate
    let v = |nu: usize, i: usize| -> f64 { r[nu * 301 + i][3].parse().unwrap() };
    for i in [0, 100, 300] {
        for nu in 1..=2 {
            let (a, b) = (v(nu, i), v(5 - nu, i));
            assert!((a - b).abs() <= 1e-9 * a.abs(), "{a} {b}");
        }
    }
}

#[test]
fn particles_default_and_extra() {
    let names = |o: &str| {
        let mut n: Vec<String> = rows(o).into_iter().map(|r| r[0].clone()).collect();
        n.dedup();
        n
    };
    let base = stdout(&run(&["particles", "--xi", "0:1:3"]));
    assert_eq!(names(&base), ["electron", "muon", "neutron"]);
    let more = stdout(&run(&["particles", "--xi", "0:1:3", "--particle", "tau"]));
    assert_eq!(names(&more).len(), 4);
}

#[test]
fn heatmap_shape_and_determinism() {
    let args = ["heatmap", "--mass", "1e-37:1e-25:20"];
    let a = stdout(&run(&args));
    assert_eq!(rows(&a).len(), 20 * 9);
    assert_eq!(a.lines().nth(1), Some("mass_kg,alpha_num,alpha_den,log10_variance,white"));
    let b = stdout(&run(&args));
    let single = stdout(&run_env(&args, "RAYON_NUM_THREADS", "1"));
    assert_eq!(a, b);
    assert_eq!(a, single);
    for r in rows(&a) {
        let lv: f64 = r[3].parse().unwrap();
        assert_eq!(r[4] == "true", lv < -80.0);
    }
}

#[test]
fn snapped_alphas_are_recorded() {
    let out = stdout(&run(&["heatmap", "--mass", "1e-30:1e-29:2", "--alphas", "0.75,2/3"]));
    assert!(out.lines().next().unwrap().contains("snapped=0.75->3/4"));
    assert_eq!(rows(&out).len(), 4);
}

#[test]
fn constants_hash_tracks_file_contents() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("constants_copy.conf");
    std::fs::write(&path, fracgrav::scales::DEFAULT_CONSTANTS).unwrap();
    let p = path.to_str().unwrap();
    let hash = |o: &str| o.lines().next().unwrap().rsplit("constants_sha256=").next().unwrap().to_string();
    let builtin = stdout(&run(&["roots", "--alpha", "3/4"]));
    let copied = stdout(&run(&["roots", "--alpha", "3/4", "--constants", p]));
    assert_eq!(hash(&builtin), hash(&copied));
    std::fs::write(&path, format!("{}\n# edited\n", fracgrav::scales::DEFAULT_CONSTANTS)).unwrap();
    let edited = stdout(&run(&["roots", "--alpha", "3/4", "--constants", p]));
    assert_ne!(hash(&builtin), hash(&edited));
    assert_eq!(run(&["roots", "--alpha", "3/4", "--constants", "/nonexistent/x.conf"]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("roots.csv");
    let o = run(&["roots", "--alpha", "2/3", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(rows(&std::fs::read_to_string(&path).unwrap()).len(), 7);
}

#[test]
fn spectrum_and_gup_check() {
    let s = stdout(&run(&["spectrum", "--alpha", "2/3"]));
    let r = &rows(&s)[0];
    assert_eq!((r[2].as_str(), r[4].as_str(), r[5].as_str(), r[6].as_str()), ("7", "3", "3", "continuous"));
    let g = run(&["gup-check", "--alpha", "3/4", "--beta", "auto"]);
    let out = stdout(&g);
    assert_eq!(rows(&out).len(), 2);
    assert!(rows(&out).iter().all(|r| r[5] == "continuous" && r[6] == "1" && r[8] == "true"));
}

#[test]
fn min_numerator_row() {
    let out = stdout(&run(&["min-numerator", "--m-max", "500"]));
    let r = &rows(&out)[0];
    assert_eq!((r[2].as_str(), r[3].as_str(), r[4].as_str()), ("5", "3", "4"));
}
