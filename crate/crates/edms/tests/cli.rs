//! End-to-end checks of the `edms` binary: synth -> analyze -> report,
//! exit codes, rerun determinism, and watch-mode equivalence.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_edms");

const SYNTH_SPEC: &str = r#"
residues = 40
frames = 300
base_noise_std = 0.05

[[schedule]]
first_residue = 3
last_residue = 30
target = "ideal_helix"
start_frame = 100
end_frame = 118
noise_std = 0.05
"#;

const RUN_CONFIG: &str = r#"
driving = "full"

[[regions]]
name = "r1"
first_residue = 3
last_residue = 20

[[regions]]
name = "r2"
first_residue = 25
last_residue = 38

[detector]
window = 20
rel_threshold = 0.02
abs_threshold = 0.0
min_region = 50
reps_per_region = 3
keep_transitions = false
"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary launches")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn synth_into(dir: &Path) -> std::path::PathBuf {
    let spec = dir.join("spec.toml");
    fs::write(&spec, SYNTH_SPEC).unwrap();
    let frames = dir.join("frames");
    let stdout = run_ok(&[
        "synth",
        "--spec",
        spec.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        frames.to_str().unwrap(),
    ]);
    assert!(stdout.contains("frames=300"), "synth output: {stdout}");
    frames
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, RUN_CONFIG).unwrap();
    path
}

#[test]
fn synth_analyze_report_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let frames = synth_into(tmp.path());
    let config = write_config(tmp.path());
    let out = tmp.path().join("out");

    let stdout = run_ok(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--input",
        frames.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("frames=300"), "analyze output: {stdout}");
    assert!(out.join("frames.edms").is_file());

    let decisions = fs::read_to_string(out.join("decisions.csv")).unwrap();
    assert!(decisions.starts_with("frame,verdict,region,request_id"));
    assert_eq!(decisions.lines().count(), 301, "one row per frame");
    assert!(decisions.contains("representative"));
    assert!(decisions.contains("drop"));

    let stdout = run_ok(&[
        "report",
        "--config",
        config.to_str().unwrap(),
        "--input",
        frames.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("frames=300"), "report output: {stdout}");

    let series = fs::read_to_string(out.join("frames.csv")).unwrap();
    assert_eq!(
        series.lines().next().unwrap(),
        "frame,full,r1,r2,r1-r2"
    );
    assert_eq!(series.lines().count(), 301);

    let regions = fs::read_to_string(out.join("regions.csv")).unwrap();
    assert!(regions.lines().count() >= 3, "expected stable regions:\n{regions}");

    let reps = fs::read_to_string(out.join("representatives.csv")).unwrap();
    assert!(reps.lines().count() >= 4, "expected representatives:\n{reps}");

    for name in ["full", "r1", "r2"] {
        assert!(out.join(format!("heatmap_{name}.csv")).is_file());
        let svg = fs::read_to_string(out.join(format!("heatmap_{name}.svg"))).unwrap();
        assert!(svg.starts_with("<svg"));
    }
}

#[test]
fn empty_input_exits_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = run(&[
        "analyze",
        "--input",
        empty.to_str().unwrap(),
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no frames"));
}

#[test]
fn rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let frames = synth_into(tmp.path());
    let config = write_config(tmp.path());

    let mut artifacts: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    for run_dir in ["out_a", "out_b"] {
        let out = tmp.path().join(run_dir);
        run_ok(&[
            "analyze",
            "--config",
            config.to_str().unwrap(),
            "--input",
            frames.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        artifacts.push((
            fs::read(out.join("frames.edms")).unwrap(),
            fs::read(out.join("decisions.csv")).unwrap(),
        ));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "store bytes differ");
    assert_eq!(artifacts[0].1, artifacts[1].1, "decision bytes differ");
}

#[test]
fn watch_matches_one_shot_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let frames = synth_into(tmp.path());
    let config = write_config(tmp.path());

    // Ground truth from one-shot analysis.
    let out_analyze = tmp.path().join("out_analyze");
    run_ok(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--input",
        frames.to_str().unwrap(),
        "--out",
        out_analyze.to_str().unwrap(),
    ]);

    // Watch a staging directory that fills up while the watcher runs.
    let staged = tmp.path().join("staged");
    fs::create_dir(&staged).unwrap();
    let mut files: Vec<_> = fs::read_dir(&frames)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    let stage = |f: &Path| {
        // Copy then rename so the watcher never sees a half-written frame.
        let tmp = staged.join("incoming.tmp");
        fs::copy(f, &tmp).unwrap();
        fs::rename(&tmp, staged.join(f.file_name().unwrap())).unwrap();
    };
    for f in &files[..100] {
        stage(f);
    }

    let out_watch = tmp.path().join("out_watch");
    let persist = tmp.path().join("persist");
    let mut child = Command::new(BIN)
        .args([
            "watch",
            "--config",
            config.to_str().unwrap(),
            "--input",
            staged.to_str().unwrap(),
            "--out",
            out_watch.to_str().unwrap(),
            "--persist-dir",
            persist.to_str().unwrap(),
            "--watch-poll-ms",
            "20",
            "--idle-timeout-ms",
            "2000",
        ])
        .spawn()
        .expect("watch launches");

    std::thread::sleep(std::time::Duration::from_millis(200));
    for f in &files[100..] {
        stage(f);
    }
    let status = child.wait().expect("watch exits");
    assert!(status.success());

    let store_a = fs::read(out_analyze.join("frames.edms")).unwrap();
    let store_w = fs::read(out_watch.join("staged.edms")).unwrap();
    // Identical payload bytes; headers differ only if request sets did.
    assert_eq!(store_a.len(), store_w.len());
    assert_eq!(store_a[store_a.len() - 300 * 32..], store_w[store_w.len() - 300 * 32..]);

    let dec_a = fs::read_to_string(out_analyze.join("decisions.csv")).unwrap();
    let dec_w = fs::read_to_string(out_watch.join("decisions.csv")).unwrap();
    assert_eq!(dec_a, dec_w);

    // Representatives from the decision table landed in the persist dir.
    let persisted: Vec<_> = fs::read_dir(&persist)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let reps = dec_w
        .lines()
        .filter(|l| l.contains("representative"))
        .count();
    assert_eq!(persisted.len(), reps);
    assert!(reps >= 4);
}
