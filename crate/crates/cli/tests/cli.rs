use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use iotpatch_core::experiment::read_grid;
use iotpatch_core::{parse_trace_str, tally_traffic, validate};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iotpatch"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const HAND_TRACE: &str = "# devices=3 aps=3\n1,0,1,I,0\n2,1,2,I,0;1\n3,0,2,D\n";

#[test]
fn gen_trace_writes_valid_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen-trace", "--devices", "50", "--aps", "200", "--seed", "1", "-o"];
    let a = run(dir.path(), &[&args[..], &["t1.csv"]].concat());
    let b = run(dir.path(), &[&args[..], &["t2.csv"]].concat());
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(b.status.success());
    let t1 = fs::read(dir.path().join("t1.csv")).unwrap();
    assert_eq!(t1, fs::read(dir.path().join("t2.csv")).unwrap());
    let trace = parse_trace_str(std::str::from_utf8(&t1).unwrap()).unwrap();
    assert!(validate(&trace).is_empty());
    assert_eq!((trace.devices(), trace.aps()), (50, 200));
    assert_eq!(
        stdout(&a).trim(),
        format!("devices=50 aps=200 events={}", trace.events().len())
    );
}

#[test]
fn gen_trace_rejects_zero_devices() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["gen-trace", "--devices", "0", "-o", "t.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n_devices"));
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn rank_empty_window_lists_ids_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "h.csv", HAND_TRACE);
    let o = run(dir.path(), &["rank", "--trace", t.to_str().unwrap(), "--window-end", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "rank,ap_id,event_count\n1,0,0\n2,1,0\n3,2,0\n");
}

#[test]
fn rank_hand_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "h.csv", "# devices=3 aps=3\n1,0,1,I,0;0\n2,0,1,I,1\n3,0,1,I,1\n4,0,1,I,2\n5,0,1,I,0;2\n6,0,1,I,1;0\n7,0,1,I,1\n");
    // AP0: events at 1,5,6; AP1: 2,3,6,7; AP2: 4,5. Cutting the window
    // before t=7 ties AP0 and AP1 at 3.
    let o = run(dir.path(), &["rank", "--trace", t.to_str().unwrap(), "--window-end", "100"]);
    assert_eq!(stdout(&o), "rank,ap_id,event_count\n1,1,4\n2,0,3\n3,2,2\n");
    let o = run(dir.path(), &["rank", "--trace", t.to_str().unwrap(), "--window-end", "6.5"]);
    assert_eq!(stdout(&o), "rank,ap_id,event_count\n1,0,3\n2,1,3\n3,2,2\n");
}

#[test]
fn rank_policy_fixture_orders_one_zero_two() {
    // counts {0:5, 1:9, 2:5}
    let mut text = String::from("# devices=2 aps=3\n");
    let mut t = 0;
    for (ap, n) in [(0, 5), (1, 9), (2, 5)] {
        for _ in 0..n {
            t += 1;
            text.push_str(&format!("{t},0,1,I,{ap}\n"));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "p.csv", &text);
    let o = run(dir.path(), &["rank", "--trace", path.to_str().unwrap(), "--window-end", "1000"]);
    assert_eq!(stdout(&o), "rank,ap_id,event_count\n1,1,9\n2,0,5\n3,2,5\n");
}

#[test]
fn rank_beyond_duration_matches_full_tally() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["rank", "--synthetic", "--devices", "10", "--aps", "15", "--duration", "500", "--window-end", "1e9", "-o", "r.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = iotpatch_core::generate_synthetic(&iotpatch_core::SyntheticParams {
        n_devices: 10,
        n_aps: 15,
        duration: 500.0,
        ..Default::default()
    })
    .unwrap();
    let full = tally_traffic(&trace, f64::INFINITY);
    let report = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut seen = 0;
    for line in report.lines().skip(1) {
        let f: Vec<u64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(full.counts[f[1] as usize], f[2]);
        seen += 1;
    }
    assert_eq!(seen, 15);
}

fn small_sim<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "--synthetic", "--devices", "20", "--aps", "30", "--duration", "2000", "--lambda-inf", "0.05",
        "--lambda-dir", "0.01", "--trials", "60", "--seed", "42",
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn sweep_one_by_one_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &[&["sweep"][..], &small_sim(&["--patch-times", "100", "--fractions", "50"])].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_grid(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].patch_time, rows[0].fraction, rows[0].trials), (100.0, 50.0, 60));
}

#[test]
fn none_policy_columns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[&["sweep"][..], &small_sim(&["--policy", "none", "--patch-times", "0,500", "--fractions", "0,30,100"])].concat(),
    );
    let rows = read_grid(o.stdout.as_slice()).unwrap();
    for chunk in rows.chunks(3) {
        assert!(chunk.iter().all(|r| r.mean_fraction == chunk[0].mean_fraction && r.stderr == chunk[0].stderr));
    }
}

#[test]
fn sweep_with_fixed_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [&["sweep"][..], &small_sim(&["--patch-times", "0,200", "--fractions", "0,50"])].concat();
    assert_eq!(run(dir.path(), &args).stdout, run(dir.path(), &args).stdout);
}

#[test]
fn sweep_writes_series_and_optimal_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[&["sweep"][..], &small_sim(&["--patch-times", "0,200", "--fractions", "10,50", "-o", "g.csv", "--series", "s.csv", "--optimal", "opt.csv"])].concat(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let series = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(series.lines().count(), 1 + 4 * 100);
    let opt = fs::read_to_string(dir.path().join("opt.csv")).unwrap();
    assert!(opt.starts_with("fraction,best_patch_time,best_mean_fraction\n"));
    assert_eq!(opt.lines().count(), 3);
}

#[test]
fn compare_policy_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[&["compare"][..], &small_sim(&["--baseline", "traffic", "--patch-times", "0,300", "--fractions", "20,60"])].concat(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_grid(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.mean_fraction == 0.0 && r.policy == "traffic-traffic"));
}

#[test]
fn compare_no_patch_against_traffic_is_non_negative() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[&["compare"][..], &small_sim(&["--baseline", "none", "--patch-times", "0,500", "--fractions", "0,50,100"])].concat(),
    );
    let rows = read_grid(o.stdout.as_slice()).unwrap();
    assert!(rows.iter().all(|r| r.mean_fraction >= -2.0 * r.stderr), "{rows:?}");
    assert!(rows.iter().any(|r| r.mean_fraction > 0.0));
}

#[test]
fn compare_missing_trace_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["compare", "--trace", "does/not/exist.csv", "-o", "d.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("does/not/exist.csv"));
    assert!(!dir.path().join("d.csv").exists());
}

#[test]
fn malformed_trace_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "bad.csv", "0,1,2,D\n1,3,3,D\n");
    let o = run(dir.path(), &["simulate", "--trace", t.to_str().unwrap(), "-o", "out.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
    assert!(!dir.path().join("out.csv").exists());
}

#[test]
fn invalid_config_produces_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.ini", "synthetic = true\nfractions = 0,150\n");
    let o = run(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep", "-o", "g.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("g.csv").exists());
    let o = run(dir.path(), &["sweep", "--synthetic", "--policy", "greedy"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(dir.path(), &["sweep", "--synthetic", "-o", "missing-dir/g.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.ini",
        "[trace]\nsynthetic = true\ndevices = 20\naps = 30\nduration = 2000\n[sim]\ntrials = 60\nseed = 42\nlambda-inf = 0.05\nlambda-dir = 0.01\nfractions = 0,10\n",
    );
    let from_cfg = run(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep", "--fractions", "50"]);
    let from_flags = run(dir.path(), &[&["sweep"][..], &small_sim(&["--fractions", "50"])].concat());
    assert!(from_cfg.status.success(), "{}", stderr(&from_cfg));
    assert_eq!(from_cfg.stdout, from_flags.stdout);
}

#[test]
fn simulate_writes_one_row_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[&["simulate"][..], &small_sim(&["--patch-time", "100", "--fraction", "30", "--series", "s.csv"])].concat(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_grid(o.stdout.as_slice()).unwrap().len(), 1);
    assert_eq!(fs::read_to_string(dir.path().join("s.csv")).unwrap().lines().count(), 101);
}

#[test]
fn oracle_check_zero_rates_pass_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["oracle-check", "--golden", "--lambda-inf", "0", "--lambda-dir", "0", "--trials", "1000", "--seed-device", "2"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("\n1,0,0,0,pass\n"));
    assert!(out.contains("\n2,1,1,0,pass\n"));
    assert!(out.contains("oracle-check passed"));
}

#[test]
fn oracle_check_golden_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["oracle-check", "--golden", "--seed-device", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("3,0.140625,"));
}

#[test]
fn oracle_check_reports_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = (0..30).map(|i| format!("{i},0,1,D\n")).collect();
    let t = write(dir.path(), "long.csv", &text);
    let o = run(dir.path(), &["oracle-check", "--trace", t.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cap is 20"), "{}", stderr(&o));
}

#[test]
fn oracle_check_mismatch_exits_three() {
    // one trial: every estimate is 0 or 1 with zero stderr, while device 1's
    // exact probability is 1/4
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["oracle-check", "--golden", "--trials", "1", "--seed-device", "0"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn oracle_check_rejects_random_policy() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["oracle-check", "--golden", "--policy", "random"]);
    assert_eq!(o.status.code(), Some(1));
}
