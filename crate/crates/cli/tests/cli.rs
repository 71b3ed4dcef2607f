use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn steer(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steer"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("STEER_THREADS", "2")
        .output()
        .expect("spawn steer")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The single run directory created under `out` for `command`.
fn run_dir(out: &Path, command: &str) -> PathBuf {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with(command))
        .collect();
    dirs.sort();
    dirs.pop().expect("run directory")
}

fn manifest_files(dir: &Path) -> Vec<(String, String)> {
    let text = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    text.split("[files]\n")
        .nth(1)
        .unwrap()
        .lines()
        .map(|l| {
            let (name, digest) = l.split_once(' ').unwrap();
            (name.to_string(), digest.trim_start_matches("sha256:").to_string())
        })
        .collect()
}

#[test]
fn operators_report_published_measures() {
    let tmp = tempfile::tempdir().unwrap();
    let o = steer(tmp.path(), &["operators", "--kind", "M1", "--report"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("comm = 18.1587"), "{}", stdout(&o));
    let o = steer(tmp.path(), &["operators", "--kind", "M2", "--alpha", "0.404"]);
    assert!(stdout(&o).contains("comm = 16.71"), "{}", stdout(&o));
}

#[test]
fn bad_custom_set_names_the_violated_constraint() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("m1.txt");
    let o = steer(tmp.path(), &["operators", "--export", good.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&good).unwrap().replacen("1.0 0.0", "0.5 0.0", 1);
    let bad = tmp.path().join("bad.txt");
    std::fs::write(&bad, text).unwrap();
    let o = steer(tmp.path(), &["operators", "--custom", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("Hamiltonian-sum constraint"), "{}", stderr(&o));
    let o = steer(tmp.path(), &["operators", "--custom", bad.to_str().unwrap(), "--waive-sum"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn run_writes_digest_linked_artifacts_and_reproduces() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let args = [
        "run", "--Ls", "2", "--dt", "0.5pi", "--periods", "6", "--traj", "8", "--seed", "5", "--stop-scheme",
    ];
    let o = steer(&a, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("stop scheme"));
    let dir = run_dir(&a, "run-");
    let files = manifest_files(&dir);
    for name in ["config.txt", "ensemble.csv", "tconv.csv", "summary.txt", "outcomes.txt"] {
        assert!(files.iter().any(|(n, _)| n == name), "{name} missing");
    }
    // rerun from the stored configuration
    let b = tmp.path().join("b");
    let cfg = dir.join("config.txt");
    let o = steer(&b, &["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let again = manifest_files(&run_dir(&b, "run-"));
    assert_eq!(files, again);
}

#[test]
fn unknown_config_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.txt");
    std::fs::write(&cfg, "chain.Ls = 2\nprotocol.dtpi = 0.5\n").unwrap();
    let o = steer(tmp.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("protocol.dtpi"), "{}", stderr(&o));
}

#[test]
fn oversized_chains_are_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let o = steer(tmp.path(), &["run", "--Ls", "8", "--traj", "1", "--periods", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("1594323"), "{}", stderr(&o));
}

#[test]
fn sweep_over_dt_emits_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = steer(
        tmp.path(),
        &["sweep", "--param", "dt", "--values", "0.3pi:0.7pi:3", "--Ls", "2", "--traj", "8", "--periods", "8"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = run_dir(tmp.path(), "sweep-");
    let table = std::fs::read_to_string(dir.join("tconv_vs_dt.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("3/10pi,0.3,"));
    assert!(lines[3].starts_with("7/10pi,0.7,"));
}

#[test]
fn oracle_modes_pass_their_invariants() {
    let tmp = tempfile::tempdir().unwrap();
    let o = steer(
        tmp.path(),
        &["oracle", "--mode", "channel", "--Ls", "2", "--dt", "0.2pi", "--periods", "5", "--traj", "200"],
    );
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let o = steer(tmp.path(), &["oracle", "--mode", "toy", "--n", "2", "--dt", "pi/4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("sine-law recursion: ok"));
    let o = steer(
        tmp.path(),
        &["oracle", "--mode", "lindblad-limit", "--Ls", "2", "--dts", "0.4pi,0.2pi,0.1pi", "--horizon", "2"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("fitted order"));
}

#[test]
fn optimize_and_entropy_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let o = steer(tmp.path(), &["optimize", "--starts", "2", "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = run_dir(tmp.path(), "optimize-");
    let set = dir.join("operators.txt");
    let o = steer(tmp.path(), &["operators", "--custom", set.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let spectrum: Vec<String> = (0..300)
        .map(|k| format!("{}", (-(k as f64) / 8.0).exp().sqrt()))
        .collect();
    let sp = tmp.path().join("spectrum.txt");
    std::fs::write(&sp, spectrum.join("\n")).unwrap();
    let o = steer(tmp.path(), &["fit", "entropy", "--spectrum", sp.to_str().unwrap(), "--cut-max", "40"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("S_sat,"));
    let dir = run_dir(tmp.path(), "fit-entropy-");
    assert!(dir.join("entropy_curve.csv").exists());
}

#[test]
fn snapshot_feeds_the_entropy_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let o = steer(
        tmp.path(),
        &["run", "--Ls", "3", "--periods", "2", "--traj", "1", "--snapshot", "--no-entropy"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let snap = run_dir(tmp.path(), "run-").join("state.snap");
    assert!(snap.exists());
    let o = steer(tmp.path(), &["fit", "entropy", "--snapshot", snap.to_str().unwrap(), "--cut-max", "9"]);
    // a 5-site chain has at most 9 Schmidt values across the central cut;
    // the fit needs at least 10, so the command must fail cleanly
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error"), "{}", stderr(&o));
}
