use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_resistive-walk"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn generate(dir: &PathBuf) -> PathBuf {
    let path = dir.join("g.txt");
    let out = bin()
        .args(["generate", "--model", "lrp", "--L", "256", "--s", "3.0", "--seed", "5", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generate_writes_an_edge_list() {
    let dir = scratch("generate");
    let path = generate(&dir);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# marked=0 window=-256,256\n"));
    let again = dir.join("again.txt");
    bin()
        .args(["generate", "--model", "lrp", "--L", "256", "--s", "3.0", "--seed", "5", "--out"])
        .arg(&again)
        .output()
        .unwrap();
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn resistance_and_profile() {
    let dir = scratch("resistance");
    let line = dir.join("line.txt");
    let edges: String = (-8..8).map(|x| format!("{x} {} 1\n", x + 1)).collect();
    fs::write(&line, format!("# marked=0 window=-8,8\n{edges}")).unwrap();

    let out = bin().args(["resistance", "--graph"]).arg(&line).args(["--A", "-3", "--B", "4"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!((stdout(&out).trim().parse::<f64>().unwrap() - 7.0).abs() < 1e-9);

    let out = bin()
        .args(["profile", "--metric", "line", "--radii", "1,2", "--graph"])
        .arg(&line)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("R,reff_complement,max_ratio"));
    let row: Vec<f64> = lines.nth(1).unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    assert_eq!(row[0], 2.0);
    assert!((row[1] - 1.0).abs() < 1e-9);
}

#[test]
fn heatkernel_and_jcheck() {
    let dir = scratch("kernel");
    let g = generate(&dir);
    let out = bin().args(["heatkernel", "--horizon", "10", "--graph"]).arg(&g).output().unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().next(), Some("n,p2n,f_n,boundary_mass"));
    assert_eq!(stdout(&out).lines().count(), 1 + 6);

    let out = bin()
        .args(["jcheck", "--metric", "line", "--R", "32", "--lambda", "16", "--graph"])
        .arg(&g)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["radius"], 32.0);
    assert!(report["member"].is_boolean());
}

#[test]
fn run_and_report_a_preset() {
    let dir = scratch("run");
    let out = bin().args(["run", "line-sanity", "--out"]).arg(&dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("summary.json").exists());
    let out = bin().arg("report").arg(&dir).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("spectral dimension"));
    assert!(dir.join("plots/p2n.dat").exists());
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = scratch("codes");
    // Unknown preset: configuration error.
    let out = bin().args(["run", "no-such-preset"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Report on an empty directory: missing record.
    let out = bin().arg("report").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // A radius past the window guard is refused.
    let g = generate(&dir);
    let out = bin().args(["profile", "--metric", "line", "--radii", "200", "--graph"]).arg(&g).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Unknown keys in a config file.
    let cfg = dir.join("bad.conf");
    fs::write(&cfg, "model = lrp\nbogus = 1\n").unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Worker count must be a positive integer.
    let out = bin().env("RESISTIVE_WALK_WORKERS", "zero").args(["run", "line-sanity", "--out"]).arg(dir.join("w")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
