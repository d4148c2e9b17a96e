use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiprice"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MPL_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn elicit_kinked_and_gpn() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["elicit", "-s", "model=rn-kinked", "-s", "lambda=2", "-s", "scenario=ignore", "-s", "q=6"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains(",6.00,3.00,"), "{}", stdout(&o));

    let o = run(&["elicit", "-s", "model=gpn", "-s", "scenario=combine", "-s", "endowment=10", "-s", "q=1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains(",1.00,7.00,"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["elicit", "-s", "model=rn", "-s", "gamma=-1.5", "-s", "q=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));

    let o = run(&["elicit", "-s", "model=rn-linear", "-s", "q=20"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let o = run(&["analyze", "-i", "missing.csv", "-o", "out"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));

    fs::write(dir.path().join("bad.toml"), "bogus = 1\n").unwrap();
    let o = run(&["--config", "bad.toml", "check"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));

    fs::write(dir.path().join("wrong.toml"), "subcommand = \"simulate\"\n").unwrap();
    let o = run(&["--config", "wrong.toml", "check"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "model = \"rn-kinked\"\nlambda = 3\nscenario = \"ignore\"\nq = 6\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_multiprice"))
        .arg("elicit")
        .current_dir(dir.path())
        .env("MPL_CONFIG", "run.toml")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains(",6.00,2.00,"), "{}", stdout(&o));
}

#[test]
fn check_catalog_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "-s", "audit_points=200", "--csv", "matrix.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("matrix.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9, "{csv}");
}

#[test]
fn simulate_analyze_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "-s", "model=rn-kinked", "-s", "lambda=2", "-s", "scenario=ignore", "-s", "subjects=8", "-s", "seed=7",
    ];
    let mut a = args.to_vec();
    a.extend(["-o", "a.csv"]);
    let o = run(&a, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut b = args.to_vec();
    b.extend(["-o", "b.csv"]);
    assert_eq!(run(&b, dir.path()).status.code(), Some(0));

    let text_a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(text_a, fs::read(dir.path().join("b.csv")).unwrap());
    let sidecar = fs::read_to_string(dir.path().join("a.csv.provenance.toml")).unwrap();
    assert!(sidecar.contains("seed = 7") && sidecar.contains("config_sha256"), "{sidecar}");

    let dataset = multiprice::io::parse_dataset(std::str::from_utf8(&text_a).unwrap()).unwrap();
    assert_eq!(multiprice::io::format_dataset(&dataset).unwrap().as_bytes(), &text_a[..]);

    let o = run(&["analyze", "-i", "a.csv", "-o", "report"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["report.txt", "subjects.csv", "means.csv", "cdf.csv", "regression.csv"] {
        assert!(dir.path().join("report").join(f).exists(), "{f} missing");
    }
    assert!(stdout(&o).contains("m-high"), "{}", stdout(&o));
}

#[test]
fn rejects_off_grid_switch_points() {
    let dir = tempfile::tempdir().unwrap();
    let header = multiprice::io::DATASET_HEADER;
    let body = format!("{header}\n1,1,mp,m,10.005,2.50\n1,1,mp,p,3.00,2.50\n");
    fs::write(dir.path().join("bad.csv"), body).unwrap();
    let o = run(&["analyze", "-i", "bad.csv", "-o", "out"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn regions_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["regions", "-s", "model=rn-linear", "-s", "gamma=-0.3333333333333333", "-s", "lq=10", "-s", "hq=15", "-o", "r"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let regions = fs::read_to_string(dir.path().join("r").join("regions.csv")).unwrap();
    assert_eq!(regions.lines().count(), 1 + 101 * 101);
    let bounds = fs::read_to_string(dir.path().join("r").join("boundaries.csv")).unwrap();
    assert!(bounds.starts_with("pair,lp,hp,value_gap"), "{bounds}");
}
