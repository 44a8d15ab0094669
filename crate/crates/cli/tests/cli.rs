use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn ringcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn check_builtin_with_fairness_passes() {
    let out = ringcheck(&[
        "check", "--variant", "modified", "-n", "3", "--uids", "0,1,2", "--props", "builtin", "--fairness", "running",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    let props = doc["properties"].as_array().unwrap();
    assert_eq!(props.len(), 3);
    for p in props {
        assert_eq!(p["matches"], true, "{p}");
    }
    assert_eq!(props[0]["holds"], true);
    assert_eq!(props[1]["holds"], false);
    assert_eq!(props[2]["holds"], true);
    assert_eq!(doc["stats"]["reachable_states"], 75);
}

#[test]
fn check_without_fairness_reports_starvation_lasso() {
    let out = ringcheck(&[
        "check", "--variant", "modified", "-n", "3", "--uids", "0,1,2", "--props", "builtin", "--fairness", "off",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    let p1 = &doc["properties"][0];
    assert_eq!(p1["holds"], false);
    let ev = &p1["evidence"];
    assert_eq!(ev["kind"], "lasso");
    let start = ev["loop_start"].as_u64().unwrap() as usize;
    let steps = ev["steps"].as_array().unwrap();
    let mut loop_procs: Vec<u64> = steps[start..].iter().map(|s| s["process"].as_u64().unwrap()).collect();
    loop_procs.sort_unstable();
    loop_procs.dedup();
    assert!(loop_procs.len() < 3, "loop runs every process: {loop_procs:?}");
    for (k, s) in steps.iter().enumerate() {
        assert_eq!(s["step"], k);
        assert!(!s["delta"].as_str().unwrap().is_empty());
    }
}

#[test]
fn report_key_order_is_stable() {
    let args = ["check", "--variant", "extra", "-n", "3", "--fairness", "off"];
    let a = ringcheck(&args);
    let b = ringcheck(&args);
    let strip = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| !l.contains("\"elapsed_ms\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    let text = String::from_utf8_lossy(&a.stdout);
    let keys = [
        "\"tool_version\"",
        "\"command\"",
        "\"variant\"",
        "\"n\"",
        "\"uids\"",
        "\"clear_dead_temps\"",
        "\"properties\"",
        "\"stats\"",
        "\"elapsed_ms\"",
    ];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
}

#[test]
fn explore_extra_four_has_no_deadlock() {
    let out = ringcheck(&["explore", "--variant", "extra", "-n", "4", "--uids", "0,1,2,3", "--max-states", "5000000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["stats"]["quiescent_nonleader"], 0);
    assert_eq!(doc["stats"]["reachable_states"], 128);
    assert!(doc.get("properties").is_none());
}

#[test]
fn explore_is_independent_of_jobs() {
    let stats = |jobs: &str| {
        json(&ringcheck(&["explore", "--variant", "general", "-n", "4", "--uids", "2,0,3,1", "--jobs", jobs]))["stats"].clone()
    };
    assert_eq!(stats("1"), stats("3"));
}

#[test]
fn state_limit_exits_three() {
    let out = ringcheck(&["check", "--variant", "general", "-n", "4", "--max-states", "50"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("50"));
}

#[test]
fn usage_errors_exit_two_and_name_the_token() {
    let cases: [(&[&str], &str); 6] = [
        (&["check", "--variant", "alg9", "-n", "3"], "alg9"),
        (&["check", "--variant", "general", "-n", "3", "--uids", "0,1,q"], "q"),
        (&["check", "--variant", "general", "-n", "3", "--uids", "0,2,2"], "0,2,2"),
        (&["check", "--variant", "general", "-n", "3", "--uids", "0,1,5"], "0,1,5"),
        (&["explore", "--variant", "general", "-n", "3", "--format", "xml"], "xml"),
        (&["sweep", "--n-range", "2-5"], "2-5"),
    ];
    for (args, token) in cases {
        let out = ringcheck(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains(token), "{args:?}: {}", stderr(&out));
    }
    assert_eq!(ringcheck(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn uid_seed_is_reported_and_reproducible() {
    let a = json(&ringcheck(&["explore", "--variant", "modified", "-n", "5", "--uid-seed", "17"]));
    let b = json(&ringcheck(&["explore", "--variant", "modified", "-n", "5", "--uid-seed", "17"]));
    assert_eq!(a["uid_seed"], 17);
    assert_eq!(a["uids"], b["uids"]);
    let mut uids: Vec<u64> = a["uids"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    uids.sort_unstable();
    assert_eq!(uids, vec![0, 1, 2, 3, 4]);
}

#[test]
fn sweep_csv_matches_schema() {
    let out = ringcheck(&["sweep", "--n-range", "2..5", "--runs", "3", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["variant", "n", "seed", "uids", "elected", "elected_vid", "steps", "link_transmissions", "oracle_winner", "phases"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3 * 4 * 3);
    for r in &rows {
        let n: usize = r[1].parse().unwrap();
        assert_eq!(r[5].parse::<usize>().unwrap(), n - 1);
        assert_eq!(&r[4], &r[8]);
    }
    let again = ringcheck(&["sweep", "--n-range", "2..5", "--runs", "3", "--seed", "4"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn simulate_reports_every_run() {
    let out = ringcheck(&["simulate", "--variant", "general", "-n", "6", "--uids", "5,0,4,1,3,2", "--runs", "4", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    let runs = doc["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    for r in runs {
        assert_eq!(r["terminated"], true);
        assert_eq!(r["elected_vid"], 5);
        assert_eq!(r["elected"], doc["oracle"]["winner"]);
    }
    let out = ringcheck(&["simulate", "--variant", "general", "-n", "6", "--max-steps", "5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn export_smv_matches_shipped_model() {
    let dir = tmp("smv-export");
    let out = ringcheck(&["export-smv", "--variant", "modified", "-n", "3", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let written = std::fs::read_to_string(dir.join("modified_3.smv")).unwrap();
    let shipped = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/modified_3.smv")).unwrap();
    assert_eq!(written, shipped);
    let stdout = ringcheck(&["export-smv", "--variant", "modified", "-n", "3"]);
    assert_eq!(String::from_utf8_lossy(&stdout.stdout), shipped);
}

#[test]
fn props_file_is_checked() {
    let path = tmp("props.json");
    std::fs::write(
        &path,
        r#"[
  {"name": "some-leader", "formula": "AF (leader(0) | leader(1) | leader(2))"},
  {"name": "never-relay-0", "formula": "AG !mode(0)=relay", "expected": true, "fairness": "off"},
  {"name": "reach-quiescent", "formula": "EF quiescent", "expected": true}
]"#,
    )
    .unwrap();
    let out = ringcheck(&["check", "--variant", "extra", "-n", "3", "--props", path.to_str().unwrap()]);
    let doc = json(&out);
    let props = doc["properties"].as_array().unwrap();
    assert_eq!(props.len(), 3);
    assert_eq!(props[0]["holds"], true);
    assert_eq!(props[0]["fairness"], "running");
    // position 0 wins on the identity ring and stays active throughout
    assert_eq!(props[1]["holds"], true);
    assert_eq!(props[2]["holds"], true);
    assert_eq!(out.status.code(), Some(0));

    std::fs::write(&path, r#"[{"name": "bad", "formula": "AF leader(7)"}]"#).unwrap();
    let out = ringcheck(&["check", "--variant", "extra", "-n", "3", "--props", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("leader(7)"));
}
