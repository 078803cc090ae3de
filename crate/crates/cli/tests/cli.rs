use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn tautrec(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tautrec"))
        .args(args)
        .env_remove("TAUTREC_CACHE_DIR")
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn doc(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn graph_listings() {
    for (g, n, count) in [("1", "1", 2), ("0", "3", 1), ("2", "0", 7)] {
        let (code, out, _) = tautrec(&["graphs", "--g", g, "--n", n]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(doc(lines[0])["payload"]["count"], count);
        assert_eq!(lines.len(), count + 1);
        assert!(lines[1..].iter().all(|l| doc(l)["automorphisms"].as_u64().unwrap() >= 1));
    }
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(tautrec(&["graphs", "--g", "0", "--n", "2"]).0, 2);
    assert_eq!(tautrec(&["basis", "--g", "1", "--n", "1"]).0, 2);
    assert_eq!(tautrec(&["pixton", "--g", "1", "--n", "1", "--r", "1", "--sigma", "2"]).0, 2);
    assert_eq!(tautrec(&["verify", "/nonexistent/spec.json"]).0, 2);
    assert_eq!(tautrec(&["rank", "--g", "1", "--n", "1", "--r", "1", "--kappa-variant", "other"]).0, 2);
}

#[test]
fn genus_one_derive_and_translate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let (code, _, _) = tautrec(&["derive", "--g", "1", "--n", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let d = doc(&fs::read_to_string(&out).unwrap());
    assert_eq!(d["config"]["command"], "derive");
    let terms = d["payload"]["solution"]["rhs"]["terms"].as_array().unwrap().clone();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["coeff"], "1/24");
    assert_eq!(terms[0]["text"], "+1/24 <<W g^a g_a>>_0");
    let (code, text, _) = tautrec(&["translate", out.to_str().unwrap(), "--format", "text"]);
    assert_eq!(code, 0);
    assert!(text.contains("<<T(W)>>_1") && text.contains("-1/24 <<W g^a g_a>>_0"), "{text}");
}

fn write_spec(dir: &Path, name: &str, spec: Value) -> String {
    let p = dir.join(name);
    fs::write(&p, spec.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_reports_pass_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let g2 = serde_json::json!({
        "lhs": "<<T^4(W)>>_2",
        "rhs": "1/2 <<W T^2(g^a)>>_1 <<T(g_a)>>_1",
        "normal_form": "1/1152 <<D D W>>_0",
    });
    let ok = write_spec(dir.path(), "g2.json", g2.clone());
    let (code, out, _) = tautrec(&["verify", &ok]);
    assert_eq!(code, 0);
    assert_eq!(doc(&out)["payload"]["holds"], true);
    assert_eq!(tautrec(&["verify", &ok, "--delta-reading", "contraction"]).0, 1);
    let mut perturbed = g2;
    perturbed["genus1"] = "1/23".into();
    let bad = write_spec(dir.path(), "bad.json", perturbed);
    assert_eq!(tautrec(&["verify", &bad]).0, 1);
    let top = write_spec(dir.path(), "top.json", serde_json::json!({"top_psi": {"g": 2, "r": 1}}));
    assert_eq!(tautrec(&["verify", &top]).0, 0);
    let both = write_spec(dir.path(), "both.json", serde_json::json!({"lhs": "<<T(W)>>_1", "top_psi": {"g": 1, "r": 0}}));
    assert_eq!(tautrec(&["verify", &both]).0, 2);
}

#[test]
fn payloads_are_reproducible_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |extra: &[&str]| {
        let mut args = vec!["rank", "--g", "2", "--n", "1", "--r", "2"];
        args.extend_from_slice(extra);
        let (code, out, _) = tautrec(&args);
        assert_eq!(code, 0);
        serde_json::to_string(&doc(&out)["payload"]).unwrap()
    };
    let plain = run(&[]);
    assert_eq!(plain, run(&["--threads", "1"]));
    let c = cache.to_str().unwrap();
    assert_eq!(plain, run(&["--cache-dir", c]));
    assert_eq!(fs::read_dir(cache.join("rank")).unwrap().count(), 1);
    assert_eq!(plain, run(&["--cache-dir", c]));
    assert_ne!(plain, run(&["--cache-dir", c, "--kappa-variant", "per-vertex"]));
    assert_eq!(fs::read_dir(cache.join("rank")).unwrap().count(), 2);
}

#[test]
fn interrupted_derive_resumes_to_the_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let c = cache.to_str().unwrap();
    let base = ["derive", "--g", "3", "--n", "1", "--checkpoint-every", "15", "--cache-dir", c];
    let mut halted = base.to_vec();
    halted.extend(["--halt-after-checkpoints", "3"]);
    assert_eq!(tautrec(&halted).0, 130);
    let ck = fs::read_dir(cache.join("checkpoints")).unwrap().next().unwrap().unwrap().path();
    assert!(fs::read_to_string(&ck).unwrap().lines().count() > 1);
    let (code, resumed, _) = tautrec(&base);
    assert_eq!(code, 0);
    assert!(!ck.exists());
    let (_, fresh, _) = tautrec(&["derive", "--g", "3", "--n", "1"]);
    assert_eq!(
        serde_json::to_string(&doc(&resumed)["payload"]).unwrap(),
        serde_json::to_string(&doc(&fresh)["payload"]).unwrap()
    );
}

#[test]
fn corrupt_checkpoint_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let c = cache.to_str().unwrap();
    let args = ["derive", "--g", "2", "--n", "1", "--checkpoint-every", "3", "--cache-dir", c];
    let mut halted = args.to_vec();
    halted.extend(["--halt-after-checkpoints", "1"]);
    assert_eq!(tautrec(&halted).0, 130);
    let ck = fs::read_dir(cache.join("checkpoints")).unwrap().next().unwrap().unwrap().path();
    let text = fs::read_to_string(&ck).unwrap();
    let (header, rest) = text.split_once('\n').unwrap();
    fs::write(&ck, format!("{header}\n[[0,\"2\"]]\n{rest}")).unwrap();
    let (code, _, err) = tautrec(&args);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("checkpoint"));
}
