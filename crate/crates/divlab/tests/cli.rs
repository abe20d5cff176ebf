use std::path::Path;
use std::process::{Command, Output};

use divlab::cli::{EXIT_ASSERTION, EXIT_CAP, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn divlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divlab")).args(args).env_remove("DIVLAB_THREADS").output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn counterexample_table_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    let out = divlab(&["boolean", "counterexample-table", "--r", "2..10", "--csv", csv_path.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(headers, ["r", "p", "family", "mu", "gamma_p", "deficit", "total_influence", "ratio"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 18);
    assert_eq!(rows.iter().filter(|r| &r[2] == "T").count(), 9);
    assert_eq!(rows.iter().filter(|r| &r[2] == "majority").count(), 9);
    // rational cells are written exactly
    assert!(rows.iter().all(|r| r[3].contains('/') || r[3] == *"1" || r[3] == *"0"));
}

#[test]
fn rho_exact_table_spans_half_length() {
    let out = divlab(&["rho", "dist", "--L", "15", "--mode", "exact"]);
    assert_eq!(code(&out), EXIT_OK);
    let r = report(&out);
    let ks: Vec<u64> = r["results"]["tail"].as_array().unwrap().iter().map(|row| row["k"].as_u64().unwrap()).collect();
    assert_eq!(ks, (0..=7).collect::<Vec<_>>());
    assert_eq!(r["schema"], 1);
    assert_eq!(r["results"]["in_t_count"], 1 << 14);
}

#[test]
fn rho_csv_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.csv");
    let out = divlab(&["rho", "dist", "--L", "9", "--csv", path.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    let tail = std::fs::read_to_string(&path).unwrap();
    assert!(tail.starts_with("k,prob,stderr\n"));
    let runs = std::fs::read_to_string(path.with_extension("runs.csv")).unwrap();
    assert!(runs.starts_with("t,expected_runs,"));
}

#[test]
fn rho_profile_of_example_word() {
    let out = divlab(&["rho", "profile", "--word", "11110001000"]);
    let r = report(&out);
    assert_eq!(r["results"]["rho"], 0);
    assert_eq!(r["results"]["in_t"], true);
    assert_eq!(r["results"]["profile"]["ones"], serde_json::json!([4, 1]));
    assert_eq!(r["results"]["profile"]["zeros"], serde_json::json!([3, 3]));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&divlab(&["no-such-command"])), EXIT_USAGE);
    assert_eq!(code(&divlab(&["extremal", "--n", "7"])), EXIT_USAGE);
    assert_eq!(code(&divlab(&["rho", "dist", "--L", "26", "--mode", "exact"])), EXIT_CAP);
    assert_eq!(code(&divlab(&["boolean", "mu", "--family", "t", "--r", "13"])), EXIT_CAP);
    assert_eq!(code(&divlab(&["boolean", "mu", "--family", "majority", "--r", "13"])), EXIT_CAP);
    assert_eq!(code(&divlab(&["extremal", "--n", "12", "--k", "4"])), EXIT_CAP);
    assert_eq!(code(&divlab(&["family", "build", "--kind", "complete", "--n", "40", "--k", "20"])), EXIT_CAP);
    assert_eq!(code(&divlab(&["lemma-sweep", "--m", "6", "--a", "2", "--b", "3"])), EXIT_USAGE);
    assert_eq!(code(&divlab(&["--help"])), EXIT_OK);
}

#[test]
fn dry_run_validates_without_computing() {
    let out = divlab(&["--dry-run", "rho", "dist", "--L", "25", "--mode", "exact"]);
    assert_eq!(code(&out), EXIT_OK);
    assert_eq!(report(&out)["results"]["dry_run"], true);
    assert_eq!(code(&divlab(&["--dry-run", "rho", "dist", "--L", "30", "--mode", "exact"])), EXIT_CAP);
    assert_eq!(code(&divlab(&["--dry-run", "extremal", "--n", "10", "--k", "3"])), EXIT_OK);
    assert_eq!(code(&divlab(&["--dry-run", "verify-all"])), EXIT_OK);
    assert_eq!(code(&divlab(&["--dry-run", "verify-all", "--only", "13"])), EXIT_USAGE);
}

#[test]
fn family_files_flow_through_commands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a2.txt");
    let p = path.to_str().unwrap();
    let out = divlab(&["family", "build", "--kind", "a-u", "--n", "12", "--k", "3", "--u", "2", "--out", p]);
    assert_eq!(code(&out), EXIT_OK);
    assert_eq!(report(&out)["results"]["stats"]["diversity"], 9);

    let stats = report(&divlab(&["family", "stats", p]));
    assert_eq!(stats["results"]["size"], 28);

    let check = report(&divlab(&["family", "check", p, "--t", "2"]));
    assert_eq!(check["results"]["intersecting"], true);
    assert_eq!(check["results"]["t_intersecting"], false);

    let dec = divlab(&["decompose", p]);
    assert_eq!(code(&dec), EXIT_OK);
    let dec = report(&dec);
    assert_eq!(dec["results"]["g"], 9);
    assert_eq!(dec["results"]["h1"], 0);

    let shifted = dir.path().join("shifted.txt");
    let out = divlab(&["shift", p, "--out", shifted.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    assert_eq!(report(&out)["results"]["shifted"], true);
    let text = std::fs::read_to_string(&shifted).unwrap();
    assert!(text.starts_with("n=12 k=3\n"));
}

#[test]
fn lex_commands() {
    let r = report(&divlab(&["lex", "partner", "--b-size", "8", "--a", "2", "--b", "3", "--m", "10"]));
    assert_eq!(r["results"]["partner_max"], 17);
    let r = report(&divlab(&["lex", "segment", "--m", "4", "--k", "2", "--n", "5"]));
    assert_eq!(r["results"]["sets"], serde_json::json!([[1, 2], [1, 3], [1, 4], [1, 5]]));
}

#[test]
fn lemma_sweep_reports_no_violations() {
    let out = divlab(&["lemma-sweep", "--m", "10", "--a", "2", "--b", "3", "--cprime", "2"]);
    assert_eq!(code(&out), EXIT_OK);
    let r = report(&out);
    assert_eq!(r["results"]["violations"], serde_json::json!([]));
    assert!(r["assertions"][0]["pass"].as_bool().unwrap());
}

#[test]
fn extremal_emits_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.txt");
    let out = divlab(&["extremal", "--n", "7", "--k", "3", "--emit-witness", path.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    let r = report(&out);
    assert_eq!(r["results"]["best_diversity"], 5);
    assert_eq!(r["results"]["complete"], true);
    let witness = divlab::format::load(&path).unwrap();
    assert_eq!(divlab_core::bitfam::stats(&witness).diversity, 5);
    assert!(divlab_core::bitfam::is_intersecting(&witness).unwrap());
}

#[test]
fn boolean_values() {
    let r = report(&divlab(&["boolean", "mu", "--family", "majority", "--r", "1", "--p", "1/4"]));
    assert_eq!(r["results"]["mu"]["exact"], "5/32");
    let r = report(&divlab(&["boolean", "influence", "--family", "majority", "--r", "1", "--p", "1/2"]));
    assert_eq!(r["results"]["total"]["exact"], "3/2");
    let r = report(&divlab(&["boolean", "gammap", "--family", "majority", "--r", "1", "--p", "1/4"]));
    // the only member avoiding 1 is {2,3}, of measure p^2 (1 - p)
    assert_eq!(r["results"]["gamma_p"]["exact"], "3/64");
    let out = divlab(&["boolean", "russo", "--family", "majority", "--r", "3"]);
    assert_eq!(code(&out), EXIT_OK);
}

fn results_of(args: &[&str], json: &Path) -> String {
    let mut full: Vec<&str> = args.to_vec();
    let j = json.to_str().unwrap();
    full.extend(["--json", j]);
    assert_eq!(code(&divlab(&full)), EXIT_OK);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    serde_json::to_string(&v["results"]).unwrap()
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    for args in [
        &["rho", "dist", "--L", "21", "--mode", "mc", "--samples", "200000", "--seed", "7"][..],
        &["extremal", "--n", "9", "--k", "3"][..],
        &["boolean", "counterexample-table", "--r", "2..6"][..],
    ] {
        let mut one = args.to_vec();
        one.extend(["--threads", "1"]);
        let mut four = args.to_vec();
        four.extend(["--threads", "4"]);
        assert_eq!(results_of(&one, &json), results_of(&four, &json), "{args:?}");
        assert_eq!(results_of(&four, &json), results_of(&four, &json), "{args:?}");
    }
}

#[test]
fn verify_all_quick_reports_each_criterion() {
    let passing = divlab(&["verify-all", "--quick", "--only", "1,2,3,4,5,6,8,9,10,11,12"]);
    let stderr = String::from_utf8_lossy(&passing.stderr);
    assert_eq!(code(&passing), EXIT_OK, "{stderr}");
    assert_eq!(stderr.lines().filter(|l| l.starts_with("criterion")).count(), 11);

    // the strict ratio trend cannot hold because T_3 and T_4 equal majority
    let trend = divlab(&["verify-all", "--quick", "--only", "7"]);
    assert_eq!(code(&trend), EXIT_ASSERTION);
    assert!(String::from_utf8_lossy(&trend.stderr).contains("criterion  7 FAIL"));
}
