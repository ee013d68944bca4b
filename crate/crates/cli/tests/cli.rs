use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const L1: &str = r#"{"d":3,"g":2,"A0":[[1,0,0],[0,1,0],[0,0,1]],"A":[[[2,0,0],[0,2,0],[0,0,0]],[[2,0,0],[0,0,0],[0,0,2]]]}"#;
const L2: &str = r#"{"d":3,"g":2,"A0":[[1,0,0],[0,1,0],[0,0,1]],"A":[[[1,0,0],[0,1,0],[0,0,0]],[[1,0,0],[0,0,0],[0,0,1]]]}"#;
/// L2 with its second block repeated.
const L2_PADDED: &str = r#"{"d":4,"g":2,"A0":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
  "A":[[[1,0,0,0],[0,1,0,0],[0,0,0,0],[0,0,0,1]],[[1,0,0,0],[0,0,0,0],[0,0,1,0],[0,0,0,0]]]}"#;
const INTERVAL: &str = r#"{"d":2,"g":1,"A0":[[1,0],[0,1]],"A":[[[1,0],[0,-1]]]}"#;
const ONE_MINUS_Y2: &str = r#"{"rows":1,"cols":1,"g":1,"terms":[{"word":[],"coef":[[1]]},{"word":[1,1],"coef":[[-1]]}]}"#;
const Y: &str = r#"{"rows":1,"cols":1,"g":1,"terms":[{"word":[1],"coef":[[1]]}]}"#;
const NON_MONIC: &str = r#"{"d":2,"g":1,"A0":[[1,0],[0,0]],"A":[[[0,1],[1,0]]]}"#;

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_freespec")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, s) = run(args);
    (code, serde_json::from_str(&s).unwrap_or_else(|e| panic!("not json ({e}): {s}")))
}

fn p(x: &Path) -> &str {
    x.to_str().unwrap()
}

/// Runs `verify` on a saved verdict.
fn verify(w: &Work, name: &str, stdout: &str) -> Value {
    let f = w.file(name, stdout);
    let (code, v) = run_json(&["verify", "--certificate", p(&f)]);
    assert_eq!(code, 0, "{v}");
    v
}

fn schema(v: &Value) {
    assert!(v["verdict"].is_string(), "{v}");
    assert!(v["residuals"].is_object(), "{v}");
    assert!(v["timings"].is_object(), "{v}");
}

#[test]
fn example_inclusion_and_offline_verify() {
    let w = Work::new();
    let (a, b) = (w.file("l1.json", L1), w.file("l2.json", L2));
    let (code, out) = run(&["include", "--lhs", p(&a), "--rhs", p(&b)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    schema(&v);
    assert_eq!(v["verdict"], "included");
    assert_eq!(v["mode"], "contraction");
    assert_eq!(v["residuals"]["certificate_valid"], true);
    assert!(v["residuals"]["reconstruction"].as_f64().unwrap() <= 1e-6);
    let checked = verify(&w, "inc.json", &out);
    assert_eq!(checked["verdict"], "valid");
    assert_eq!(checked["kind"], "inclusion");
}

#[test]
fn reverse_inclusion_gives_verifiable_witness() {
    let w = Work::new();
    let (a, b) = (w.file("l1.json", L1), w.file("l2.json", L2));
    let (code, out) = run(&["include", "--lhs", p(&b), "--rhs", p(&a)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "not_included");
    assert!(v["witness"].is_object());
    assert_eq!(verify(&w, "w.json", &out)["verdict"], "valid");
}

#[test]
fn tampered_certificate_is_invalid() {
    let w = Work::new();
    let (a, b) = (w.file("l1.json", L1), w.file("l2.json", L2));
    let (_, mut v) = run_json(&["include", "--lhs", p(&a), "--rhs", p(&b)]);
    let entry = &mut v["certificate"]["kraus"]["V"][0][2][2];
    let old = entry.as_f64().unwrap();
    *entry = Value::from(old + 1e-2);
    let f = w.file("bad.json", &v.to_string());
    let (code, out) = run_json(&["verify", "--certificate", p(&f)]);
    assert_eq!(code, 0);
    assert_eq!(out["verdict"], "invalid");
    let r = out["residual"].as_f64().unwrap();
    assert!(r > 1e-3, "residual {r}");
}

#[test]
fn tampered_psatz_certificate_is_invalid() {
    let w = Work::new();
    let (l, f) = (w.file("l.json", INTERVAL), w.file("f.json", ONE_MINUS_Y2));
    let (code, mut v) = run_json(&["psatz", "--pencil", p(&l), "--poly", p(&f)]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "certified");
    assert_eq!(verify(&w, "ok.json", &v.to_string())["verdict"], "valid");
    v["certificate"]["poly"]["terms"][0]["coef"][0][0] = Value::from(1.1);
    let out = verify(&w, "bad.json", &v.to_string());
    assert_eq!(out["verdict"], "invalid");
    assert!(out["residual"].as_f64().unwrap() > 1e-2);
}

#[test]
fn member_at_zero_is_inside() {
    let w = Work::new();
    let l = w.file("l.json", L1);
    let (code, v) = run_json(&["member", "--pencil", p(&l), "--point", "zero"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "inside");
    let pt = w.file("x.json", r#"{"n":1,"g":2,"X":[[[-1]],[[0]]]}"#);
    let (_, v) = run_json(&["member", "--pencil", p(&l), "--point", p(&pt)]);
    assert_eq!(v["verdict"], "outside");
    assert!((v["residuals"]["min_eig"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn eval_pencil_and_polynomial() {
    let w = Work::new();
    let (l, f) = (w.file("l.json", INTERVAL), w.file("f.json", ONE_MINUS_Y2));
    let x = w.file("x.json", r#"{"n":1,"g":1,"X":[[[0.5]]]}"#);
    let (code, v) = run_json(&["eval", "--pencil", p(&l), "--point", p(&x)]);
    assert_eq!(code, 0);
    assert_eq!(v["value"], serde_json::json!([[1.5, 0.0], [0.0, 0.5]]));
    let (_, v) = run_json(&["eval", "--poly", p(&f), "--point", p(&x)]);
    assert_eq!(v["value"], serde_json::json!([[0.75]]));
    let (code, _) = run_json(&["eval", "--poly", p(&f), "--pencil", p(&l), "--point", p(&x)]);
    assert_eq!(code, 1);
}

#[test]
fn boundedness_verdicts() {
    let w = Work::new();
    let (code, v) = run_json(&["bounded", "--pencil", p(&w.file("i.json", INTERVAL))]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "bounded");
    let (_, out) = run(&["bounded", "--pencil", p(&w.file("l.json", L1))]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "unbounded");
    assert_eq!(verify(&w, "r.json", &out)["verdict"], "valid");
}

#[test]
fn equality_both_polarities_roundtrip() {
    let w = Work::new();
    let (a, b, c) = (w.file("l1.json", L1), w.file("l2.json", L2), w.file("pad.json", L2_PADDED));
    let (code, out) = run(&["equal", "--lhs", p(&b), "--rhs", p(&c)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "equal");
    assert_eq!(v["minimal_sizes"], serde_json::json!([3, 3]));
    assert_eq!(verify(&w, "eq.json", &out)["verdict"], "valid");
    let (code, out) = run(&["equal", "--lhs", p(&a), "--rhs", p(&b)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "not_equal");
    assert_eq!(verify(&w, "ne.json", &out)["verdict"], "valid");
}

#[test]
fn minimal_drops_repeated_block() {
    let w = Work::new();
    let (code, out) = run(&["minimal", "--pencil", p(&w.file("pad.json", L2_PADDED))]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["size"], 3);
    assert_eq!(v["original_size"], 4);
    assert_eq!(verify(&w, "m.json", &out)["verdict"], "valid");
}

#[test]
fn polar_memberships() {
    let w = Work::new();
    let gens = w.file("g.json", r#"{"n":1,"g":1,"X":[[[1]]]}"#);
    let inside = w.file("a.json", r#"{"n":1,"g":1,"X":[[[0.5]]]}"#);
    let outside = w.file("b.json", r#"{"n":1,"g":1,"X":[[[2]]]}"#);
    let (code, out) = run(&["polar", "--target", p(&inside), "--generators", p(&gens)]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["verdict"], "in_polar");
    assert_eq!(verify(&w, "pi.json", &out)["verdict"], "valid");
    let (_, out) = run(&["polar", "--target", p(&outside), "--generators", p(&gens)]);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["verdict"], "not_in_polar");
    assert_eq!(verify(&w, "po.json", &out)["verdict"], "valid");
}

#[test]
fn drop_polar_of_disk_projection() {
    let w = Work::new();
    let omega = w.file("o.json", r#"{"n":2,"g":1,"X":[[[1,0],[0,-1]]]}"#);
    let gamma = w.file("g.json", r#"{"n":2,"g":1,"X":[[[0,1],[1,0]]]}"#);
    let a = w.file("a.json", r#"{"n":1,"g":1,"X":[[[0.5]]]}"#);
    let b = w.file("b.json", r#"{"n":1,"g":1,"X":[[[1.5]]]}"#);
    for (t, expect) in [(&a, "in_polar"), (&b, "not_in_polar")] {
        let (code, out) = run(&["dpolar", "--target", p(t), "--omega", p(&omega), "--gamma", p(&gamma)]);
        assert_eq!(code, 0, "{out}");
        assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["verdict"], expect);
        assert_eq!(verify(&w, "d.json", &out)["verdict"], "valid");
    }
}

#[test]
fn psatz_refutation_roundtrip() {
    let w = Work::new();
    let (l, f) = (w.file("l.json", INTERVAL), w.file("f.json", Y));
    let (code, out) = run(&["psatz", "--pencil", p(&l), "--poly", p(&f)]);
    assert_eq!(code, 0);
    let mut v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "refuted");
    let x = v["witness"]["X"]["X"][0][0][0].as_f64().unwrap();
    assert!((x + 1.0).abs() < 1e-6, "X = {x}");
    assert_eq!(verify(&w, "r.json", &out)["verdict"], "valid");
    v["witness"]["X"]["X"][0][0][0] = Value::from(-1.5);
    assert_eq!(verify(&w, "bad.json", &v.to_string())["verdict"], "invalid");
}

#[test]
fn univar_mirrors_psatz() {
    let w = Work::new();
    let (l, f, g) = (w.file("l.json", INTERVAL), w.file("f.json", ONE_MINUS_Y2), w.file("g.json", Y));
    let (code, out) = run(&["univar", "--pencil", p(&l), "--poly", p(&f)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "certified");
    assert_eq!(v["interval"]["kind"], "compact");
    assert_eq!(verify(&w, "u.json", &out)["verdict"], "valid");
    let (_, out) = run(&["univar", "--pencil", p(&l), "--poly", p(&g)]);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["verdict"], "refuted");
    assert_eq!(verify(&w, "ur.json", &out)["verdict"], "valid");
}

#[test]
fn seeded_runs_are_byte_identical() {
    let w = Work::new();
    let (a, b) = (w.file("l1.json", L1), w.file("l2.json", L2));
    for args in [
        vec!["include", "--lhs", p(&b), "--rhs", p(&a), "--seed", "7"],
        vec!["include", "--lhs", p(&b), "--rhs", p(&a), "--seed", "7", "--search", "random-restart"],
        vec!["equal", "--lhs", p(&a), "--rhs", p(&b), "--seed", "3"],
    ] {
        assert_eq!(run(&args), run(&args));
    }
}

#[test]
fn usage_errors_exit_one() {
    let w = Work::new();
    let l = w.file("l.json", L1);
    for args in [
        vec!["frobnicate"],
        vec!["include", "--lhs", p(&l)],
        vec!["include", "--lhs", p(&l), "--rhs", p(&l), "--bogus"],
        vec!["include", "--lhs", p(&l), "--rhs", p(&l), "--search", "nope"],
        vec!["include", "--lhs", p(&l), "--rhs", p(&l), "--mode", "sideways"],
        vec!["member", "--pencil", p(&l), "--point", "zero", "--dump-sdp", "x.sdpa"],
    ] {
        let (code, v) = run_json(&args);
        assert_eq!(code, 1, "{args:?}");
        assert_eq!(v["verdict"], "error");
        assert_eq!(v["error"]["kind"], "usage");
    }
}

#[test]
fn malformed_and_non_monic_inputs_are_structured_errors() {
    let w = Work::new();
    let bad = w.file("bad.json", r#"{"d":2,"g":1,"A0":[[1,0],[0,1]],"A":[[[1,0]"#);
    let (code, v) = run_json(&["member", "--pencil", p(&bad), "--point", "zero"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "input");
    let nm = w.file("nm.json", NON_MONIC);
    let f = w.file("f.json", Y);
    let (code, v) = run_json(&["psatz", "--pencil", p(&nm), "--poly", p(&f)]);
    assert_eq!(code, 1);
    assert!(v["error"]["message"].as_str().unwrap().contains("monic"));
    let (code, _) = run_json(&["verify", "--certificate", p(&w.path("missing.json"))]);
    assert_eq!(code, 1);
}

#[test]
fn dump_sdp_writes_sdpa() {
    let w = Work::new();
    let (a, b) = (w.file("l1.json", L1), w.file("l2.json", L2));
    let dump = w.path("inc.sdpa");
    let (code, _) = run(&["include", "--lhs", p(&a), "--rhs", p(&b), "--dump-sdp", p(&dump)]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(freespec_sdp_parse(&text));
    let (l, f) = (w.file("l.json", INTERVAL), w.file("f.json", ONE_MINUS_Y2));
    let dump2 = w.path("ps.sdpa");
    let (code, _) = run(&["psatz", "--pencil", p(&l), "--poly", p(&f), "--dump-sdp", p(&dump2)]);
    assert_eq!(code, 0);
    assert!(freespec_sdp_parse(&std::fs::read_to_string(&dump2).unwrap()));
}

fn freespec_sdp_parse(text: &str) -> bool {
    freespec_sdp::from_sdpa(text).is_ok_and(|p| p.num_constraints() > 0 && !p.blocks.is_empty())
}

#[test]
fn timings_only_on_request() {
    let w = Work::new();
    let l = w.file("l.json", L1);
    let (_, v) = run_json(&["member", "--pencil", p(&l), "--point", "zero"]);
    assert_eq!(v["timings"], serde_json::json!({}));
    let (_, v) = run_json(&["member", "--pencil", p(&l), "--point", "zero", "--timings"]);
    assert!(v["timings"]["total_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn in_process_run_matches_binary() {
    let w = Work::new();
    let l = w.file("l.json", L1);
    let exit = freespec_cli::run(["freespec", "member", "--pencil", p(&l), "--point", "zero"]);
    let (code, out) = run(&["member", "--pencil", p(&l), "--point", "zero"]);
    assert_eq!(exit.code, code);
    assert_eq!(format!("{}\n", exit.stdout), out);
}
