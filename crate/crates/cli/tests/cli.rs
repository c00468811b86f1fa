use std::path::Path;
use std::process::{Command, Output};

fn netid(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_netid"));
    cmd.args(args).env_remove("NETID_WORKERS");
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn local_exact_recovers_g34() {
    let s = stdout(&netid(&["local", "--exact"], None));
    assert!(s.starts_with("theorem1 for G3,4: excite [3, 4, 5, 6], measure [3, 5, 6], 12 T entries"), "{s}");
    let theta: Vec<f64> = s.lines().filter_map(|l| l.split(" = ").nth(1).filter(|_| l.starts_with("theta")).map(|v| v.parse().unwrap())).collect();
    assert!((theta[0] + 0.3).abs() < 1e-8 && (theta[1] - 0.8).abs() < 1e-8);
}

#[test]
fn direct_prints_informativity() {
    let s = stdout(&netid(&["direct", "--excite", "3,4,5", "--samples", "2000"], None));
    assert!(s.contains("informative=true"), "{s}");
    assert!(s.contains("G3,4 = "));
}

#[test]
fn simulate_writes_signals() {
    let dir = tempfile::tempdir().unwrap();
    let o = netid(&["simulate", "--excite", "1", "--samples", "10"], Some(dir.path()));
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("signals.csv")).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.starts_with("t,w1,"));
}

#[test]
fn truth_dumps_block_and_edges() {
    let s = stdout(&netid(&["truth", "--rows", "3", "--cols", "4", "--grid-points", "4"], None));
    assert_eq!(s.lines().count(), 5);
    let s = stdout(&netid(&["truth", "--edges", "--grid-points", "2"], None));
    assert_eq!(s.lines().count(), 1 + 2 * 56);
}

#[test]
fn montecarlo_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = netid(&["montecarlo", "--scenario", "2", "--runs", "3", "--samples", "1000"], Some(dir.path()));
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = dir.path().join("results.csv");
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);

    let svg_dir = dir.path().join("plots");
    let o = netid(&["report", csv.to_str().unwrap(), "--format", "svg"], Some(&svg_dir));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(svg_dir.join("scatter_2.svg").exists());
    assert!(stdout(&o).contains("2 "));
}

#[test]
fn scenario_file_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, "schema_version = 1\n[[scenario]]\nid = \"mine\"\nexcited = [1, 2]\ntarget = [2, 1]\nruns = 2\nsamples = 500\n").unwrap();
    let s = stdout(&netid(&["montecarlo", "--scenario", path.to_str().unwrap()], None));
    assert!(s.starts_with("scenario_id,run,a1,a2,informative,error\n"));
    assert_eq!(s.lines().filter(|l| l.starts_with("mine,")).count(), 2);
}

#[test]
fn failures_exit_nonzero_with_stage_labels() {
    let o = netid(&["local", "--target", "1,20"], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error: plan: edge 1 <- 20"), "{}", stderr(&o));

    let o = netid(&["local", "--fir-order", "0", "--samples", "500"], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error: estimate:"), "{}", stderr(&o));

    let o = netid(&["montecarlo", "--scenario", "99"], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("load scenarios"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "schema_version = 1\n[[scenario]]\nid = \"x\"\nexcited = [1]\ntarget = [2, 1]\nextra = 1\n").unwrap();
    let o = netid(&["montecarlo", "--scenario", bad.to_str().unwrap()], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("bad.toml:6"), "{}", stderr(&o));

    let net = dir.path().join("bad.net");
    std::fs::write(&net, "nodes 2\n2 1 0,1\n1 2 1 0\n").unwrap();
    let o = netid(&["--network", net.to_str().unwrap(), "truth", "--edges"], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("load network"), "{}", stderr(&o));
}
