use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tf(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tractorforms"))
        .args(args)
        .env("TRACTORFORMS_CACHE", cache)
        .env_remove("TRACTORFORMS_DATA")
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn expand_order_one_middle_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let o = tf(&["expand", "--n", "8", "--k", "2", "--ell", "1", "--format", "text"], dir.path());
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("definition: (1/2)E + (3/2)F + (3/4)J"), "{s}");
    assert!(s.contains("factored:   [-2E - 6F - 3J]"), "{s}");
    assert!(s.contains("c = -4"), "{s}");
    assert!(s.contains("∼ dδ + 3δd + (3/2)J"), "{s}");
}

#[test]
fn expand_middle_degree_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = tf(&["expand", "--n", "4", "--k", "2", "--ell", "1"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("∼ dδ − δd"), "{}", stdout(&o));
}

#[test]
fn expand_json_and_latex() {
    let dir = tempfile::tempdir().unwrap();
    let o = tf(&["expand", "--n", "6", "--k", "1", "--ell", "3", "--format", "json"], dir.path());
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "tractorforms.expand/1");
    assert_eq!(v["case"], "square-route");
    assert_eq!(v["factors"].as_array().unwrap().len(), 3);
    let o = tf(&["expand", "--n", "5", "--k", "2", "--ell", "2", "--format", "latex"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("d\\delta"));
}

#[test]
fn expand_rejects_degree_above_half_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let o = tf(&["expand", "--n", "3", "--k", "2", "--ell", "1"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("k = 2"));
    assert_eq!(code(&tf(&["expand", "--n", "4"], dir.path())), 2);
    assert_eq!(code(&tf(&["--help"], dir.path())), 0);
}

#[test]
fn mmstar_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mm.json");
    let o = tf(&["verify", "--theorem", "MMstar", "--output", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v["schema"], "tractorforms.verification/1");
    assert_eq!(v["report"]["config"]["theorems"], serde_json::json!(["mm-star"]));
    let s = &v["report"]["summary"];
    assert_eq!(s["failed"], 0);
    assert!(s["passed"].as_u64().unwrap() > 100);
    assert!(v["metadata"]["generated_unix"].as_u64().is_some());
}

#[test]
fn sweep_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = tf(&["verify", "--theorem", "order-one", "--n-min", "8", "--n-max", "8", "--format", "text"], dir.path());
    assert_eq!(code(&o), 1);
    let s = stdout(&o);
    assert!(s.contains("PASS order-one n=8 k=1"), "{s}");
    assert!(s.contains("FAIL order-one n=8 k=2"), "{s}");
}

#[test]
fn sweep_configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unwritable = dir.path().join("missing").join("report.json");
    let o = tf(&["verify", "--theorem", "monomials", "--output", unwritable.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert_eq!(code(&tf(&["verify", "--theorem", "bogus"], dir.path())), 2);
    assert_eq!(code(&tf(&["verify", "--n-min", "2"], dir.path())), 2);
    assert_eq!(code(&tf(&["verify", "--j-value", "x/"], dir.path())), 2);
    assert_eq!(code(&tf(&["verify", "--model", "/nonexistent/model.json"], dir.path())), 2);
}

#[test]
fn sweep_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, epoch: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_tractorforms"));
        cmd.args(["verify", "--n-max", "6", "--ell-max", "3", "--theorem", "factorization,bezout,kernel-decomposition"])
            .args(["--output", out.to_str().unwrap()]);
        match epoch {
            Some(e) => cmd.env("SOURCE_DATE_EPOCH", e),
            None => cmd.env_remove("SOURCE_DATE_EPOCH"),
        };
        let o = cmd.output().unwrap();
        assert_eq!(o.status.code(), Some(1), "n = 6 carries a w = 0 factor");
        std::fs::read(&out).unwrap()
    };
    let a = run("a.json", Some("1700000000"));
    let b = run("b.json", Some("1700000000"));
    assert_eq!(a, b);
    let c: Value = serde_json::from_slice(&run("c.json", None)).unwrap();
    let a: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(serde_json::to_vec(&a["report"]).unwrap(), serde_json::to_vec(&c["report"]).unwrap());
    assert_eq!(a["metadata"]["generated_unix"], 1700000000);
}

#[test]
fn torus_oracle_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("torus.json");
    let o = tf(&["oracle", "torus", "--n", "4", "--k", "1", "--ell", "2", "--modes", "20", "--output", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("20/20 modes exact"));
    let v = read_json(&out);
    assert_eq!(v["schema"], "tractorforms.torus/1");
    let modes = v["report"]["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 20);
    assert!(modes.iter().all(|m| m["l_discrepancy"] == "0"));
}

#[test]
fn dec_oracle_on_the_torus() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tf(&["oracle", "dec", "--mesh", "torus3-grid", "--size", "2"], dir.path())), 2);
    assert_eq!(code(&tf(&["oracle", "dec", "--mesh", "klein-bottle"], dir.path())), 2);
    let out = dir.path().join("dec.json");
    let o = tf(&["oracle", "dec", "--mesh", "torus3-grid", "--size", "3", "--output", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v["schema"], "tractorforms.dec/1");
    assert_eq!(v["report"]["levels"][0]["betti"], serde_json::json!([1, 3, 3, 1]));
    assert!(dir.path().join("mesh-torus3-grid-3-.json").exists());
    // a second run reads the cached mesh
    let again = tf(&["oracle", "dec", "--mesh", "torus3-grid", "--size", "3", "--k", "2", "--eigs", "5"], dir.path());
    assert_eq!(code(&again), 0);
}

#[test]
fn dec_oracle_coarse_sphere_is_mesh_limited() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dec.json");
    let o = tf(&["oracle", "dec", "--mesh", "cell600", "--k", "1", "--eigs", "30", "--promote", "--output", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Coexact l=1"));
    assert!(!dir.path().join("sphere_s3.json").exists());
    let v = read_json(&out);
    let level = &v["report"]["levels"][0];
    assert_eq!(level["betti"], serde_json::json!([1, 0, 0, 1]));
    assert_eq!(level["f_vector"], serde_json::json!([120, 720, 1200, 600]));
    assert_eq!(level["sphere_check"]["passed"], false);
    assert_eq!(code(&tf(&["oracle", "dec", "--mesh", "torus3-grid", "--size", "3", "--promote"], dir.path())), 2);
}
