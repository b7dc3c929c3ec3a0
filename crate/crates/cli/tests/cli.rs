use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phylocomb")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("phylocomb-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn balanced_ranked_shape_probability() {
    let out = run(&["prob", "--model", "urt", "--newick", "((1,2),(3,4));", "--ranks", "1,2,3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).split_whitespace().next(), Some("1/3"));
}

#[test]
fn labelled_count() {
    let out = run(&["count", "--kind", "labelled", "--n", "5"]);
    assert_eq!(stdout(&out).trim(), "105");
    let out = run(&["count", "--kind", "ranked-labelled", "--n", "4", "--enumerate"]);
    assert_eq!(stdout(&out).trim(), "18");
}

#[test]
fn pure_birth_diversity_ratio() {
    for extra in [&[][..], &["--quadrature"][..]] {
        let mut args = vec!["cpp", "pd", "--b", "0.1", "--d", "0", "--p", "0.5", "--horizon", "inf"];
        args.extend_from_slice(extra);
        let v: f64 = stdout(&run(&args)).trim().parse().unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-6);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--kind", "labelled"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--kind", "labelled", "--n", "5", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["prob", "--model", "urt", "--newick", "((1,2),(3,4)"]).status.code(), Some(3));
    assert_eq!(run(&["cpp", "pd", "--b", "1", "--d", "1", "--p", "0.5", "--horizon", "inf"]).status.code(), Some(3));
    let bad = scratch("bad.csv", "t,value\n0,1\n0.5,oops\n");
    assert_eq!(run(&["reduce", "--input", bad.to_str().unwrap(), "--height", "1"]).status.code(), Some(3));
    assert_eq!(run(&["contour", "--input", "/nonexistent/file.json"]).status.code(), Some(3));
}

#[test]
fn seeded_output_is_reproducible_and_echoes_seed() {
    let args = ["sim", "kingman", "--n", "6", "--seed", "11", "--reps", "3000"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("# seed=11\n"));
    let one = Command::new(env!("CARGO_BIN_EXE_phylocomb")).args(args).env("PHYLOCOMB_THREADS", "1").output().unwrap();
    assert_eq!(one.stdout, a.stdout);
    let json = stdout(&run(&["cpp", "sim", "--b", "1", "--d", "1", "--horizon", "3", "--seed", "4", "--reps", "50"]));
    assert!(json.contains("\"seed\":4"));
    assert_eq!(Command::new(env!("CARGO_BIN_EXE_phylocomb")).args(args).env("PHYLOCOMB_THREADS", "zero").output().unwrap().status.code(), Some(2));
}

#[test]
fn splitting_contour_reduce_pipeline() {
    let tree = stdout(&run(&["sim", "splitting", "--b", "2", "--lifetime", "exp:0.5", "--horizon", "2.5", "--seed", "8"]));
    let tree_path = scratch("tree.json", &tree);
    let path = run(&["contour", "--input", tree_path.to_str().unwrap()]);
    assert!(path.status.success());
    let csv_path = scratch("contour.csv", &stdout(&path));
    let back = run(&["contour", "--input", csv_path.to_str().unwrap(), "--inverse"]);
    assert!(back.status.success());
    let comb = run(&["reduce", "--input", csv_path.to_str().unwrap(), "--height", "2.5"]);
    if comb.status.success() {
        let comb_path = scratch("comb.csv", &stdout(&comb));
        let m = run(&["comb", "dist", "--input", comb_path.to_str().unwrap()]);
        assert!(m.status.success());
        let t = run(&["comb", "tree", "--input", comb_path.to_str().unwrap(), "--horizon", "2.5", "--format", "newick"]);
        assert!(stdout(&t).trim_end().ends_with(';'));
    } else {
        assert_eq!(comb.status.code(), Some(3));
    }
}

#[test]
fn comb_distance_between_points() {
    let c = scratch("c.csv", "position,height\n1,0.5\n2,1.5\n");
    let out = run(&["comb", "dist", "--input", c.to_str().unwrap(), "--points", "0.5,2.5"]);
    assert_eq!(stdout(&out).trim(), "3");
    assert_eq!(run(&["comb", "dist", "--input", c.to_str().unwrap(), "--points", "1,2.5"]).status.code(), Some(3));
}

#[test]
fn cpp_outputs() {
    let comb = stdout(&run(&["cpp", "sim", "--b", "1", "--d", "0.5", "--horizon", "4", "--seed", "3"]));
    assert!(comb.starts_with("# seed=3\nposition,height\n"));
    let depths = scratch("depths.csv", &comb);
    let ll: f64 = stdout(&run(&["cpp", "loglik", "--b", "1", "--d", "0.5", "--horizon", "4", "--depths", depths.to_str().unwrap()]))
        .trim()
        .parse()
        .unwrap();
    assert!(ll.is_finite());
    let fit = stdout(&run(&["cpp", "fit", "--depths", depths.to_str().unwrap(), "--horizon", "4"]));
    assert!(fit.contains("\"degenerate\""));
    let dens = stdout(&run(&["cpp", "density", "--b", "1", "--d", "1", "--horizon", "2", "--points", "3"]));
    assert_eq!(dens.lines().next(), Some("t,density"));
    assert_eq!(dens.lines().count(), 4);
    let w = stdout(&run(&["cpp", "bottleneck", "--b", "1", "--d", "1", "--horizon", "3", "--p", "0.5", "--points", "2"]));
    assert_eq!(w, "t,w\n0,1\n3,2.5\n");
    assert_eq!(run(&["cpp", "bottleneck", "--b", "1", "--d", "1", "--horizon", "3", "--schedule", "4:0.5"]).status.code(), Some(3));
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("0 failed"));
}
