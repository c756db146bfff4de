use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ipslab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipslab"))
        .args(args)
        .current_dir(dir)
        .env_remove("IPSLAB_CAP")
        .output()
        .expect("binary runs")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn word_gen_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = ipslab(&["word", "gen", "--d", "4", "--k", "3"], dir.path());
    assert!(o.status.success());
    fs::write(dir.path().join("w.json"), &o.stdout).unwrap();
    let o = ipslab(&["word", "check", "w.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["balanced"], Value::Bool(true));
}

#[test]
fn word_check_unbalanced_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "w.json", "[-3,6,-2,-4,2,5,-4,-2]");
    let o = ipslab(&["word", "check", "w.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json_out(&o)["balanced"], Value::Bool(false));
}

#[test]
fn ks_inverse_rank_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "w.json", "[2,-2]");
    assert!(ipslab(&["ks", "gen", "--word", "w.json", "-o", "ks.json"], d).status.success());
    let ks: Value = serde_json::from_str(&fs::read_to_string(d.join("ks.json")).unwrap()).unwrap();
    assert_eq!(ks["degree"], 2);
    assert_eq!(ks["beta"], "-1/1");
    write(d, "f.json", &ks["poly"].to_string());
    assert!(ipslab(&["inverse", "--poly", "f.json", "-o", "g.json"], d).status.success());
    let g: Value = serde_json::from_str(&fs::read_to_string(d.join("g.json")).unwrap()).unwrap();
    write(d, "gp.json", &g["poly"].to_string());

    let r = json_out(&ipslab(&["rank", "--poly", "gp.json", "--word", "w.json"], d));
    assert_eq!(r["rank"], 4);
    assert_eq!(r["full_rank"], true);
    let r = json_out(&ipslab(&["relrk", "--poly", "gp.json", "--word", "w.json"], d));
    assert_eq!(r["certificate"], true);
    let full = json_out(&ipslab(&["rank", "--poly", "gp.json", "--word", "w.json", "--full"], d));
    assert_eq!(full["kind"], "full");
}

#[test]
fn negative_beta_flag() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "w.json", "[1,-1]");
    let o = ipslab(&["ks", "gen", "--word", "w.json", "--beta", "-3/2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json_out(&o)["beta"], "-3/2");
}

#[test]
fn collapse_and_embed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "w.json", "[1,-1]");
    write(d, "m.json", r#"{"y.2.0":1}"#);
    let o = ipslab(&["ks", "collapse", "--word", "w.json", "--monomial", "m.json"], d);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["restricted"], "x.1.0 + 1");
    let o = ipslab(&["ks", "embed", "--word", "w.json", "--n", "6"], d);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["holds"], true);
}

#[test]
fn refute_then_verify_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "w.json", "[1,-2]");
    assert!(ipslab(&["ks", "gen", "--word", "w.json", "-o", "ks.json"], d).status.success());
    let ks: Value = serde_json::from_str(&fs::read_to_string(d.join("ks.json")).unwrap()).unwrap();
    write(d, "f.json", &ks["poly"].to_string());
    assert!(ipslab(&["refute", "--poly", "f.json", "--circuit", "c.json", "--axioms", "a.json"], d).status.success());

    let o = ipslab(&["verify-ips", "--circuit", "c.json", "--axioms", "a.json", "--class", "mlips"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json_out(&o)["verdict"], "PASS");

    // shift the first Σ coefficient by one
    let mut c: Value = serde_json::from_str(&fs::read_to_string(d.join("c.json")).unwrap()).unwrap();
    let node = c["nodes"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|n| n["op"] == "sum")
        .expect("a sum gate");
    let coeff = node["args"][0][1].as_str().unwrap().to_string();
    node["args"][0][1] = Value::String(if coeff == "1/1" { "2/1".into() } else { "1/1".into() });
    write(d, "bad.json", &c.to_string());
    let o = ipslab(&["verify-ips", "--circuit", "bad.json", "--axioms", "a.json", "--class", "mlips"], d);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json_out(&o)["verdict"], "FAIL");
}

#[test]
fn verify_ips_input_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", "{\"nodes\": [], \"output\": 3}");
    write(dir.path(), "a.json", "[]");
    let o = ipslab(&["verify-ips", "--circuit", "c.json", "--axioms", "a.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = ipslab(&["verify-ips", "--circuit", "missing.json", "--axioms", "a.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cap_flag_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "w.json", "[1,-1]");
    let o = ipslab(&["ks", "gen", "--word", "w.json", "--cap", "3"], d);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ipslab"))
        .args(["ks", "gen", "--word", "w.json"])
        .current_dir(d)
        .env("IPSLAB_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap is 3"));
}

#[test]
fn experiment_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "extra.json", "[-3,6,-2,-4,2,5,-4,-2]");
    let o = ipslab(
        &[
            "experiment", "full-rank", "--dmax", "2", "--bmax", "2", "--out", "report.csv", "--word", "extra.json",
            "--order", "lex", "--jobs", "2", "--refutation", "--mutations", "3",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(d.join("report.csv")).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..7], ["word", "dims", "rank", "full_rank?", "relrk_cert?", "lm_claim?", "seconds"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    let extra = rows.iter().find(|r| &r[0] == "[-3,6,-2,-4,2,5,-4,-2]").expect("extra word row");
    assert_eq!(&extra[7], "SKIPPED");
    for r in rows.iter().filter(|r| &r[0] != "[-3,6,-2,-4,2,5,-4,-2]") {
        assert_eq!(&r[7], "PASS");
        assert_eq!(&r[3], "true");
        assert!(r[5].starts_with("lex:true"));
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["fail"], 0);
    assert_eq!(report["rows"].as_array().unwrap().len(), 10);
}

#[test]
fn empty_grid_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = ipslab(&["experiment", "full-rank", "--dmax", "0", "--out", "r.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(text.starts_with("word,dims,rank"));
}
