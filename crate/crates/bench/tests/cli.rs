//! The `pb-bench` binary, driven as a user would.

use std::path::Path;
use std::process::{Command, Output};

use pb_bench::{aggregate, emit_scatter, load_instances, run_experiment, Preset, Summary};

fn pb_bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pb-bench")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn solve_city_with_pav() {
    let out = pb_bench(&["solve", "--instance", "city", "--rule", "pav", "--tiebreak", "cheapest-first"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("bundle: A-G1,A-G2,A-G3,A-G4,A-G5,B-E1,B-E2,B-E3"), "{text}");
    assert!(text.contains("sw: 770 of 800 (0.962500)"), "{text}");
    assert!(text.contains("rp: 190 of 200 (0.950000)"), "{text}");
    assert!(text.contains("ejr: yes"), "{text}");
}

#[test]
fn city_bench_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let out = pb_bench(&["bench", "--preset", "city", "--out-csv", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let table = stdout(&out);
    let pav = table.lines().find(|l| l.split_whitespace().nth(1) == Some("pav")).unwrap();
    assert!(pav.contains("0.9625") && pav.contains("0.9500"), "{pav}");
    let rows = read(&csv);
    assert!(rows.starts_with("instance,rule,sw,rp,util_ratio,rep_ratio,ejr,reason\n"));
    assert!(rows.contains("city,pav,770,190,0.962500,0.950000,yes,\n"), "{rows}");
    assert!(rows.contains("city,av,800,100,1.000000,0.500000,no,\n"), "{rows}");
}

#[test]
fn city_scatter_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("city.svg");
    let out = pb_bench(&["bench", "--preset", "city", "--out-svg", svg.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(read(&svg), include_str!("fixtures/city.svg"));
}

#[test]
fn one_marker_per_rule_and_dataset() {
    let mut summaries: Vec<Summary> = Vec::new();
    for preset in [Preset::EuclideanDesk, Preset::PartyListDesk] {
        let mut spec = preset.spec();
        spec.count = 3;
        let rows = run_experiment(&spec, &load_instances(&spec).unwrap()).unwrap();
        summaries.extend(aggregate(preset.name(), &rows).unwrap());
    }
    let svg = emit_scatter(&summaries).unwrap();
    let markers = svg.split("<g id=\"markers\">").nth(1).unwrap().split("</g>").next().unwrap();
    assert_eq!(markers.matches("class=").count(), 14);
    assert_eq!(markers.matches("class=\"rule_x_pav\"").count(), 2);
}

#[test]
fn bench_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(format!("{name}.csv"));
        let summary = dir.path().join(format!("{name}-summary.csv"));
        let out = pb_bench(&[
            "bench",
            "--preset",
            "euclidean-desk",
            "--count",
            "4",
            "--seed",
            "9",
            "--rules",
            "av,pav,rule_x",
            "--out-csv",
            csv.to_str().unwrap(),
            "--out-summary",
            summary.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (read(&csv), read(&summary), stdout(&out))
    };
    let first = run("a");
    assert_eq!(first, run("b"));
    assert_eq!(first.0.lines().count(), 1 + 4 * 3);
    assert!(first.0.contains("euclidean-desk-009,"), "{}", first.0);
}

#[test]
fn config_file_and_settings() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(&config, "# small party-list run\npreset = partylist-desk\nrules = av, rule_x\ncount = 2\n").unwrap();
    let out = pb_bench(&["bench", "--config", config.to_str().unwrap(), "--set", "group_size=2..3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = stdout(&out);
    assert_eq!(table.lines().count(), 3, "{table}");

    let bad = pb_bench(&["bench", "--config", config.to_str().unwrap(), "--set", "budget=10"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn spec_errors_exit_with_2() {
    assert_eq!(pb_bench(&["bench", "--dataset", "nowhere"]).status.code(), Some(2));
    assert_eq!(pb_bench(&["bench", "--preset", "city", "--rules", ""]).status.code(), Some(2));
    assert_eq!(pb_bench(&["bench", "--dataset", "pabulib:/definitely/missing"]).status.code(), Some(2));
    assert_eq!(pb_bench(&["solve", "--instance", "/definitely/missing.pb", "--rule", "av"]).status.code(), Some(2));
    assert_eq!(pb_bench(&["check-ejr", "--instance", "city", "--bundle", "nope"]).status.code(), Some(2));
}

#[test]
fn node_budget_failures_exit_with_1() {
    let out = pb_bench(&["bench", "--preset", "city", "--rules", "av,rule_x", "--max-nodes", "5"]);
    // Every row needs the exact optima, so nothing survives a tiny budget.
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generate_then_bench_the_files() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let out = pb_bench(&["generate", "--preset", "partylist-desk", "--count", "3", "--out-dir", corpus.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> =
        std::fs::read_dir(&corpus).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["partylist-desk-000.pb", "partylist-desk-001.pb", "partylist-desk-002.pb"]);

    let again = dir.path().join("again");
    pb_bench(&["generate", "--preset", "partylist-desk", "--count", "3", "--out-dir", again.to_str().unwrap()]);
    for name in &names {
        assert_eq!(read(&corpus.join(name)), read(&again.join(name)));
    }

    let dataset = format!("pabulib:{}", corpus.display());
    let out = pb_bench(&["bench", "--dataset", &dataset, "--rules", "rule_x", "--tcap", "full"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = stdout(&out);
    assert!(table.lines().any(|l| l.contains("rule_x") && l.contains(" 3 ")), "{table}");
}

#[test]
fn check_ejr_reports_a_witness() {
    let out = pb_bench(&["check-ejr", "--instance", "city", "--bundle", "A-D1,A-D2,A-G1,A-G2,A-G3,A-G4,A-G5,A-G6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("ejr: no"), "{text}");
    assert!(text.contains("group: "), "{text}");

    let out = pb_bench(&["check-ejr", "--instance", "city", "--bundle", "A-G1,A-G2,A-G3,A-G4,A-G5,B-E1,B-E2,B-E3"]);
    assert!(stdout(&out).starts_with("ejr: yes"));
}

#[test]
fn adversarial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("adv.csv");
    let out = pb_bench(&["adversarial", "--family", "SPAV_WELFARE", "--out-csv", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = read(&csv);
    assert!(text.starts_with("family,params,achieved_ratio,expected_ratio,bound_value,pass\n"));
    assert!(text.contains("SPAV_WELFARE,n=10,1/5,1/5,0.200000,true\n"), "{text}");
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));

    let out = pb_bench(&["adversarial", "--family", "SPAV_WELFARE", "--params", "n=98,m=10"]);
    assert_eq!(out.status.code(), Some(2));
}
