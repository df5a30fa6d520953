use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reeb-index"))
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn dataset(n: usize, orbits: &[(&str, &str, i64, &[&str])]) -> tempfile::NamedTempFile {
    let orbits: Vec<Value> = orbits
        .iter()
        .map(|(label, action, p, thetas)| {
            serde_json::json!({ "label": label, "action": action, "p": p, "q": thetas.len(), "thetas": thetas })
        })
        .collect();
    let doc = serde_json::json!({ "schema": "reeb-index/dataset", "version": 1, "n": n, "orbits": orbits });
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(doc.to_string().as_bytes()).unwrap();
    f
}

fn path(f: &tempfile::NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

fn e1_sqrt2() -> String {
    let o = run(&["ellipsoid", "--radii", "1,(sqrt 2)"], None);
    assert_eq!(o.status.code(), Some(0));
    stdout(&o)
}

#[test]
fn ellipsoid_piped_into_spectrum() {
    let o = run(&["spectrum", "--cap", "3"], Some(&e1_sqrt2()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().take(2).map(String::from).collect())
        .collect();
    let want = [["3", "g1"], ["5", "g2"], ["7", "g1^2"], ["9", "g2^2"], ["11", "g1^3"]];
    assert_eq!(rows, want.map(|r| r.map(String::from).to_vec()));

    let o = run(&["spectrum", "--cap", "3", "--json", "-"], Some(&e1_sqrt2()));
    let v = json(&o);
    let idx: Vec<i64> = v["records"].as_array().unwrap().iter().map(|r| r["index"].as_i64().unwrap()).collect();
    assert_eq!(idx, [3, 5, 7, 9, 11]);
}

#[test]
fn output_is_stable() {
    let a = run(&["spectrum", "--cap", "12"], Some(&e1_sqrt2()));
    let b = run(&["spectrum", "--cap", "12"], Some(&e1_sqrt2()));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn index_json() {
    let f = dataset(3, &[("g", "1", 1, &["(/ 1 (sqrt 2))"])]);
    let o = run(&["index", path(&f), "--max-iterate", "35", "--json"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let its = v[0]["iterates"].as_array().unwrap();
    assert_eq!(its[0]["index"], 2);
    assert_eq!(its[33]["index"], 83);
    assert_eq!(its[34]["index"], 84);
    assert_eq!(v[0]["even"], false);
}

#[test]
fn cij_reports_jump_and_identities() {
    let f = dataset(3, &[("g", "1", 1, &["(/ 1 (sqrt 2))"])]);
    let o = run(&["cij", "--M", "1", path(&f), "--json"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["solution"]["N"], 41);
    assert_eq!(v["solution"]["entries"][0]["m"], 17);
    assert_eq!(v["solution"]["entries"][0]["eta"], -1);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    let o = run(&["cij", path(&f)], None);
    let text = stdout(&o);
    assert!(text.starts_with("N = 41\n"), "{text}");
    assert!(text.contains("[ok]") && !text.contains("FAIL"));

    let o = run(&["cij", path(&f), "--search-bound", "10"], None);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn resonance_lines() {
    let o = run(&["verify", "--check", "resonance"], Some(&e1_sqrt2()));
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "Equal\n"));
    let f = dataset(3, &[("a", "1", 4, &[]), ("b", "1", 3, &[])]);
    let o = run(&["verify", "--check", "resonance", path(&f)], None);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "Less\n"));
}

#[test]
fn multiplicity_violation_exits_2() {
    let f = dataset(3, &[("a", "1", 4, &[]), ("b", "(sqrt 2)", 4, &[])]);
    let o = run(&["verify", "--check", "multiplicity", path(&f), "--json"], None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["verdict"], "violation");
    assert_eq!(v["witness_degree"], 6);
    assert_eq!(v["jump"]["N"], 4);

    let o = run(&["verify", "--check", "multiplicity"], Some(&e1_sqrt2()));
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["verify", "--check", "multiplicity", "--threshold", "n-1"], Some(&e1_sqrt2()));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn third_orbit_and_perfectness() {
    let f = dataset(3, &[("gamma", "6/5", 4, &[]), ("delta", "3/2", 3, &[])]);
    let o = run(&["verify", "--check", "third-orbit", "--cap", "40", path(&f)], None);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("witness degree: 14"));
    let o = run(&["verify", "--check", "third-orbit"], Some(&e1_sqrt2()));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n odd"));

    let o = run(&["verify", "--check", "perfect", "--cap", "20"], Some(&e1_sqrt2()));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["verify", "--check", "convexity", path(&f)], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("delta has index 3 < 4"), "{}", stdout(&o));
    let o = run(&["verify", "--check", "convexity"], Some(&e1_sqrt2()));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn homology_reports() {
    let o = run(&["homology", "--cap", "5", "--json"], Some(&e1_sqrt2()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["feasibility"]["verdict"], "feasible");
    assert_eq!(v["feasibility"]["pairs"].as_array().unwrap().len(), 0);

    // two generators in degree 4 and nothing to cancel against
    let f = dataset(2, &[("a", "1", 4, &[]), ("b", "(sqrt 2)", 4, &[])]);
    let o = run(&["homology", "--cap", "3", path(&f)], None);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("infeasible"));

    let f = dataset(2, &[("g", "1", 0, &[])]);
    let o = run(&["homology", "--cap", "3", path(&f)], None);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn czpath_blocks_and_samples() {
    let o = run(&["czpath", "--rotations", "13/10"], None);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "3\n"));
    let o = run(&["czpath", "--rotations", "(+ 1 (/ 1 (sqrt 2)))", "--iterate", "2"], None);
    // 2 * 1.707 = 3.414: 2 * 3 + 1
    assert_eq!(stdout(&o), "7\n");
    let o = run(&["czpath", "--rotations", "3/10", "--hyperbolic", "-2"], None);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "2\n"));

    let mut text = String::from("# rotation by 0.3 turns\n");
    for i in 0..=200 {
        let t = i as f64 / 200.0;
        let a = 2.0 * std::f64::consts::PI * 0.3 * t;
        text += &format!("{t} {} {} {} {}\n", a.cos(), -a.sin(), a.sin(), a.cos());
    }
    let o = run(&["czpath", "-", "--json"], Some(&text));
    assert_eq!(json(&o)["conley_zehnder"], 1);

    let o = run(&["czpath", "-"], Some("0 1 0 0 1\n1 1 0 0 1\n"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("eigenvalue 1"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(run(&["verify", "--check", "bogus"], None).status.code(), Some(1));
    assert_eq!(run(&["spectrum"], Some(&e1_sqrt2())).status.code(), Some(1));
    assert_eq!(run(&["ellipsoid", "--radii", "1,2"], None).status.code(), Some(1));
    let o = run(&["index"], Some("{\"schema\": \"reeb-index/dataset\",\n \"version\": 1,\n \"n\": oops}"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let f = dataset(2, &[("g", "1", 3, &["(/ 1 (sqrt 2))"])]);
    let o = run(&["index", path(&f)], None);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["--help"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("spectrum"));
    assert_eq!(run(&["--version"], None).status.code(), Some(0));
}

#[test]
fn rational_theta_warns() {
    let f = dataset(3, &[("g", "1", 2, &["1/2"])]);
    let o = run(&["index", path(&f), "--max-iterate", "2"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("rational"), "{}", stderr(&o));
}

#[test]
fn budget_exhaustion_exits_4() {
    // theta = sqrt 2 - r with r a 90-digit truncation, so theta is about 1e-90
    let digits = "141421356237309504880168872420969807856967187537694807317667973799073247846210703885038753";
    let theta = format!("(- (sqrt 2) {digits}/1{})", "0".repeat(digits.len() - 1));
    let f = dataset(3, &[("g", "1", 2, &[theta.as_str()])]);
    let o = run(&["index", path(&f), "--max-iterate", "1"], None);
    assert_eq!(o.status.code(), Some(4), "{}{}", stdout(&o), stderr(&o));
    assert!(stderr(&o).contains("ambiguous"));
    let o = run(&["index", path(&f), "--max-iterate", "1", "--bits", "1024", "--json"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&o)[0]["iterates"][0]["index"], 3);
}
