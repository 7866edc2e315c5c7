use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_varquad"))
}

fn put(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(dir: &Path, out: &str, args: &[&str]) -> Output {
    bin().current_dir(dir).arg("--out").arg(out).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn setup() -> TempDir {
    let t = TempDir::new().unwrap();
    let d = t.path();
    put(d, "dhym2.json", r#"{"n":2,"c":[0,1,0,-1]}"#);
    put(d, "dhym3.json", r#"{"n":3,"c":[0,0,1,0,-1]}"#);
    put(d, "sigma3.json", r#"{"n":3,"c":[0,0,0,0,1]}"#);
    put(d, "sigma1.json", r#"{"n":3,"c":[0,1,0,0,0]}"#);
    put(d, "tanh.json", r#"{"s":0,"p":[0,0],"R":[1,1],"r":0,"rprime":-0.5}"#);
    put(d, "generic3.json", r#"{"s":0,"p":[0.1,-0.2,0.3],"R":[1,1.2,0.8],"r":0,"rprime":0}"#);
    put(d, "boxed.json", r#"{"variant":"BoxedExample","n":3,"theta":0}"#);
    put(d, "quarter.json", r#"{"variant":"N2Hyperbolic","n":2,"psi":[0.7853981633974483,0.7853981633974483]}"#);
    put(d, "flat.json", r#"{"variant":"N2Hyperbolic","n":2,"psi":[0,0]}"#);
    put(d, "trig.json", r#"{"variant":"N2Trig","n":2,"alpha":1.2,"psi":[0.3,0.2]}"#);
    put(d, "pole.json", r#"{"variant":"N2Hyperbolic","n":2,"psi":[1.0471975511965976,0.5235987755982988]}"#);
    t
}

#[test]
fn classify_examples() {
    let t = setup();
    let o = run(t.path(), "o", &["classify", "dhym2.json"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("recursive family, representative (1,0); Case 1 roots ±i"), "{}", stdout(&o));
    assert_eq!(json(t.path().join("o/classify.json"))["verdict"], "recursive");

    let o = run(t.path(), "o", &["classify", "sigma3.json"]);
    assert!(stdout(&o).contains("n=3 non-recursive, CubicShift a=0"), "{}", stdout(&o));

    put(t.path(), "bad.json", r#"{"n": 2, "c": ["#);
    assert_eq!(run(t.path(), "o", &["classify", "bad.json"]).status.code(), Some(2));
    put(t.path(), "short.json", r#"{"n": 3, "c": [0, 1]}"#);
    assert_eq!(run(t.path(), "o", &["classify", "short.json"]).status.code(), Some(2));
    assert_eq!(run(t.path(), "o", &["classify", "missing.json"]).status.code(), Some(1));
}

#[test]
fn solve_examples() {
    let t = setup();
    let o = run(t.path(), "a", &["solve", "dhym3.json", "--init", "generic3.json", "--s-min", "0", "--s-max", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = json(t.path().join("a/summary.json"));
    assert_eq!(s["forward"]["termination"]["kind"], "blow_up");
    assert!(s["forward"]["termination"]["s"].as_f64().unwrap() < 3.0, "{s}");
    assert!(s["forward"]["s_star"].as_f64().unwrap().is_finite());
    assert!(s["backward"].is_null());

    let o = run(t.path(), "b", &["solve", "dhym2.json", "--init", "tanh.json", "--s-min", "-5", "--s-max", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = json(t.path().join("b/summary.json"));
    assert_eq!(s["forward"]["termination"]["kind"], "reached_end");
    assert_eq!(s["backward"]["termination"]["kind"], "reached_end");
    let csv = fs::read_to_string(t.path().join("b/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "s,p1,p2,R1,R2,r,rprime,rpp,F,kappa,xi1,xi2");
    let s_col: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(s_col.windows(2).all(|w| w[0] < w[1]));
    assert_eq!((s_col[0], *s_col.last().unwrap()), (-5.0, 5.0));

    let o = run(t.path(), "c", &["solve", "dhym2.json", "--init", "tanh.json", "--s-min", "0", "--s-max", "0"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(t.path().join("c/trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);

    put(t.path(), "zero_r.json", r#"{"s":0,"p":[0,0],"R":[0,1],"r":0,"rprime":0}"#);
    let o = run(t.path(), "d", &["solve", "dhym2.json", "--init", "zero_r.json", "--s-min", "-1", "--s-max", "1"]);
    assert_eq!(o.status.code(), Some(3));
    put(t.path(), "f_zero.json", r#"{"s":0,"p":[1,1],"R":[1,1],"r":0,"rprime":0}"#);
    let o = run(t.path(), "d", &["solve", "dhym2.json", "--init", "f_zero.json", "--s-min", "-1", "--s-max", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn family_examples() {
    let t = setup();
    let o = run(t.path(), "a", &["family", "boxed.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(t.path().join("a/family_report.json"));
    assert!(r["scaled_max"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["positivity_ok"], true);

    put(t.path(), "inadmissible.json", r#"{"variant":"N2Hyperbolic","n":2,"psi":[1.0471975511965976,0.1],"entire":true}"#);
    let o = run(t.path(), "b", &["family", "inadmissible.json"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("tan psi_1"), "{}", stderr(&o));

    let o = run(t.path(), "c", &["family", "trig.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d = &json(t.path().join("c/family_report.json"))["family"]["domain"];
    assert_eq!(d["kind"], "interval");
    assert!(d["lo"].as_f64().unwrap().is_finite() && d["hi"].as_f64().unwrap().is_finite());

    let o = run(t.path(), "d", &["family", "boxed.json", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn verify_examples() {
    let t = setup();
    let o = run(t.path(), "a", &["verify", "dhym2.json", "--family", "flat.json", "--count", "11"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(t.path(), "b", &["verify", "dhym3.json", "--init", "generic3.json", "--count", "9", "--points"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(t.path().join("b/verify_report.json"));
    assert!(r["scaled_max"].as_f64().unwrap() <= 1e-9);
    let rows = fs::read_to_string(t.path().join("b/verify_residuals.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 9usize.pow(4));
    // Wrong equation for the family.
    let o = run(t.path(), "c", &["verify", "sigma1.json", "--family", "boxed.json", "--count", "5"]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn slag_examples() {
    let t = setup();
    let o = run(t.path(), "a", &["slag", "joyce", "quarter.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(t.path().join("a/joyce_report.json"));
    assert!(r["residual"]["max_abs"].as_f64().unwrap() <= 1e-10);

    let o = run(t.path(), "b", &["slag", "joyce", "flat.json"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("required θ = π/2 (e^{iθ}iⁿ = −i)"), "{}", stderr(&o));

    let o = run(t.path(), "c", &["slag", "residual", "boxed.json", "--count", "11"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = run(t.path(), "d", &["slag", "pointcloud", "quarter.json", "--count", "4"]);
    assert!(o.status.success());
    let cloud = fs::read_to_string(t.path().join("d/pointcloud.csv")).unwrap();
    assert_eq!(cloud.lines().next().unwrap(), "re_z1,im_z1,re_z2,im_z2,re_z3,im_z3");
    assert_eq!(cloud.lines().count(), 1 + 4 * 16);

    // Past the pole of p at s ~ 0.658 the quadric data stays finite.
    let o = run(t.path(), "e", &["slag", "extend", "pole.json", "--count", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(t.path().join("e/extend_report.json"));
    let hi = r["graphical_t_range"][1].as_f64().unwrap();
    assert!(r["t_range"][1].as_f64().unwrap() > hi);
    assert!(r["max_phase_defect"].as_f64().unwrap() <= 1e-7);
    let cloud = fs::read_to_string(t.path().join("e/extend_pointcloud.csv")).unwrap();
    assert!(cloud.lines().skip(1).all(|l| l.split(',').all(|v| v.parse::<f64>().unwrap().is_finite())));

    let o = run(t.path(), "f", &["slag", "extend", "trig.json"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn output_is_deterministic() {
    let t = setup();
    // n + 1 > 6 switches the grid to Monte-Carlo sampling.
    let psi = [0.1, -0.2, 0.3, 0.05, -0.1, 0.2];
    let body = format!(r#"{{"variant":"SubcriticalEntire","n":6,"psi":{psi:?}}}"#);
    put(t.path(), "six.json", &body);
    let read = |dir: &str| {
        let mut r = json(t.path().join(dir).join("family_report.json"));
        r.as_object_mut().unwrap().remove("grid");
        (r, fs::read_to_string(t.path().join(dir).join("family_samples.csv")).unwrap())
    };
    for (dir, threads) in [("x", "1"), ("y", "4")] {
        let o = run(t.path(), dir, &["--seed", "7", "--threads", threads, "family", "six.json", "--count", "5"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(read("x"), read("y"));
    let o = run(t.path(), "z", &["--seed", "8", "family", "six.json", "--count", "5"]);
    assert!(o.status.success());
    assert_ne!(read("x").0["worst"], read("z").0["worst"]);

    for dir in ["u", "v"] {
        let o = run(t.path(), dir, &["solve", "dhym3.json", "--init", "generic3.json", "--s-min", "-1", "--s-max", "1"]);
        assert!(o.status.success());
    }
    let csv = |d: &str| fs::read(t.path().join(d).join("trajectory.csv")).unwrap();
    assert_eq!(csv("u"), csv("v"));
}
