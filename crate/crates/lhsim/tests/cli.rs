use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL_SCENARIO: &str = "num_users = 20\nsim_time_ms = 300\nue_speed_kmh = 30\n";

fn lhsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lhsim")).args(args).output().expect("binary runs")
}

fn small_scenario(dir: &Path) -> String {
    let p = dir.join("small.cfg");
    fs::write(&p, SMALL_SCENARIO).unwrap();
    p.to_str().unwrap().to_owned()
}

fn run_into(dir: &Path, scenario: &str, seed: &str) -> Output {
    lhsim(&[
        "run",
        "--scenario",
        scenario,
        "--algo",
        "hoa4",
        "--hom",
        "3",
        "--ttt",
        "2",
        "--seed",
        seed,
        "--out",
        dir.to_str().unwrap(),
        "--dump-ho-events",
        "--dump-channel-trace",
    ])
}

#[test]
fn run_is_byte_reproducible() {
    let tmp = TempDir::new().unwrap();
    let scenario = small_scenario(tmp.path());
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for (dir, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let out = run_into(dir, &scenario, seed);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |d: &Path, f: &str| fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "results.csv"), read(&b, "results.csv"));
    assert_eq!(read(&a, "metrics.json"), read(&b, "metrics.json"));
    assert_eq!(read(&a, "ho_events_seed7.csv"), read(&b, "ho_events_seed7.csv"));
    assert_eq!(read(&a, "channel_trace_seed7.csv"), read(&b, "channel_trace_seed7.csv"));
    assert_ne!(read(&a, "channel_trace_seed7.csv"), read(&c, "channel_trace_seed8.csv"));

    let results = String::from_utf8(read(&a, "results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algorithm,speed_kmh,hom_db,ttt_or_factor,seed,ho_avg,total_throughput_bps,total_delay_ms,optimize_ratio"
    );
    assert!(lines.next().unwrap().starts_with("HOA4,30.0,3.0,2.0,7,"));
    let events = String::from_utf8(read(&a, "ho_events_seed7.csv")).unwrap();
    assert!(events.starts_with("time_ms,ue_id,source,target,algorithm,hom,ttt_or_alpha_beta\n"));
    // reports at 0, 50, ..., 250 for 20 users and 7 cells
    let trace = String::from_utf8(read(&a, "channel_trace_seed7.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 6 * 20 * 7);
}

#[test]
fn several_seeds_in_one_run() {
    let tmp = TempDir::new().unwrap();
    let scenario = small_scenario(tmp.path());
    let out_dir = tmp.path().join("out");
    let out = lhsim(&[
        "run",
        "--scenario",
        &scenario,
        "--algo",
        "hoa2",
        "--hom",
        "1",
        "--beta",
        "0.5",
        "--seed",
        "1",
        "--seed",
        "2",
        "--workers",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.contains("2 seed(s)"));
    let results = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 3);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let scenario = small_scenario(tmp.path());
    let out_dir = tmp.path().join("o");
    let out_dir = out_dir.to_str().unwrap();

    let missing = lhsim(&["run", "--scenario", &scenario, "--algo", "hoa1", "--hom", "3", "--out", out_dir]);
    assert_eq!(missing.status.code(), Some(1));

    let bad = tmp.path().join("bad.cfg");
    fs::write(&bad, "num_users = 20\nnot_a_key = 1\n").unwrap();
    let out = lhsim(&["run", "--scenario", bad.to_str().unwrap(), "--algo", "hoa3", "--hom", "3", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not_a_key"));

    let invalid = tmp.path().join("invalid.cfg");
    fs::write(&invalid, "num_users = 0\n").unwrap();
    let out =
        lhsim(&["run", "--scenario", invalid.to_str().unwrap(), "--algo", "hoa3", "--hom", "3", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(1));

    let no_such = lhsim(&["run", "--scenario", "/no/such/file", "--algo", "hoa3", "--hom", "3", "--alpha", "0.5"]);
    assert_eq!(no_such.status.code(), Some(1));

    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let unwritable = blocker.join("out");
    let out = lhsim(&[
        "run",
        "--scenario",
        &scenario,
        "--algo",
        "hoa3",
        "--hom",
        "3",
        "--alpha",
        "0.5",
        "--out",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(lhsim(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lhsim(&["--help"]).status.code(), Some(0));
}

#[test]
fn oracle_passes() {
    let out = lhsim(&["oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().count() >= 10);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
}

#[test]
fn small_sweep_then_compare() {
    let tmp = TempDir::new().unwrap();
    let scenario = small_scenario(tmp.path());
    let grid = tmp.path().join("grid.cfg");
    fs::write(
        &grid,
        "algorithms = HOA1,HOA2,HOA3,HOA4\nhom_db_values = 0,6\nttt_values = 0,4\nalpha_beta_values = 0.5\nspeeds_kmh = 3,120\n",
    )
    .unwrap();
    let sweep = |dir: &Path, workers: &str| {
        lhsim(&[
            "sweep",
            "--scenario",
            &scenario,
            "--grid",
            grid.to_str().unwrap(),
            "--sim-time",
            "200",
            "--workers",
            workers,
            "--out",
            dir.to_str().unwrap(),
        ])
    };
    let (one, three) = (tmp.path().join("w1"), tmp.path().join("w3"));
    assert!(sweep(&one, "1").status.success());
    assert!(sweep(&three, "3").status.success());
    let rows = fs::read_to_string(one.join("sweep.csv")).unwrap();
    assert_eq!(rows, fs::read_to_string(three.join("sweep.csv")).unwrap());
    // (4 + 2 + 2 + 4) points per speed
    assert_eq!(rows.lines().count(), 1 + 2 * 12);
    assert!(one.join("plots/optimize_ratio_hoa4_120kmh.dat").is_file());

    let optima: serde_json::Value = serde_json::from_slice(&fs::read(one.join("optima.json")).unwrap()).unwrap();
    assert_eq!(optima["optima"].as_array().unwrap().len(), 8);

    let cmp = tmp.path().join("cmp");
    let out = lhsim(&[
        "compare",
        "--scenario",
        &scenario,
        "--optima",
        one.join("optima.json").to_str().unwrap(),
        "--seed",
        "1",
        "--seed",
        "2",
        "--out",
        cmp.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let compare = fs::read_to_string(cmp.join("compare.csv")).unwrap();
    assert_eq!(compare.lines().count(), 1 + 8 + 4);
    let improvements = fs::read_to_string(cmp.join("improvements.csv")).unwrap();
    assert_eq!(improvements.lines().count(), 1 + 9);
    for f in ["ho_avg.dat", "total_throughput.dat", "total_delay.dat", "compare.json", "metadata.json"] {
        assert!(cmp.join(f).is_file(), "{f}");
    }
}

#[test]
fn compare_with_explicit_parameters() {
    let tmp = TempDir::new().unwrap();
    let scenario = small_scenario(tmp.path());
    let cmp = tmp.path().join("cmp");
    let out = lhsim(&[
        "compare",
        "--scenario",
        &scenario,
        "--hom",
        "3",
        "--ttt",
        "2",
        "--alpha",
        "0.5",
        "--beta",
        "0.5",
        "--speed",
        "30",
        "--seed",
        "3",
        "--out",
        cmp.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(cmp.join("compare.csv")).unwrap().lines().count(), 1 + 4 + 4);

    let partial = lhsim(&["compare", "--scenario", &scenario, "--hom", "3", "--ttt", "2"]);
    assert_eq!(partial.status.code(), Some(1));
}
