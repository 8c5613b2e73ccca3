use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dlo_core::pbm::write_pbm;
use dlo_core::BinaryImage;

fn dlo(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlo"))
        .args(args)
        .current_dir(cwd)
        .env_remove("DLO_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const AT_GOAL: &str = r#"
name = "at-goal"

[[contacts]]
center = [0.0, 0.28]

[goal]
kind = "wrap"
start = [-0.2, 0.14]
end = [0.2, 0.14]
wraps = [{ contact = 1, turn = "cw" }]

[rope]
kind = "goal"
"#;

#[test]
fn gen_dataset_splits_and_skips_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let first = dlo(
        &["gen-dataset", "--samples", "11", "--out", "ds", "--jobs", "1"],
        dir.path(),
    );
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).contains("10 train, 1 test"), "{}", stdout(&first));
    let again = dlo(&["gen-dataset", "--samples", "11", "--out", "ds"], dir.path());
    assert!(stdout(&again).contains("identical, skipped"));

    let report = dlo(&["eval-detector", "--dataset", "ds", "--oracle"], dir.path());
    assert_eq!(report.status.code(), Some(0));
    assert!(stdout(&report).contains("mu_c=0.0000 var_c=0.0000 mu_p=0.0000 var_p=0.0000 off_body=0"));
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dlo"))
        .args(["gen-dataset", "--samples", "11"])
        .current_dir(dir.path())
        .env("DLO_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("from-env/manifest.txt").exists());
}

#[test]
fn goal_start_episode_succeeds_without_steps() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("goal.toml"), AT_GOAL).unwrap();
    let o = dlo(&["run-episode", "--config", "goal.toml", "--out", "ep"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let log = fs::read_to_string(dir.path().join("ep/episode.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2);
    assert!(log.lines().last().unwrap().contains(r#""success":true,"steps":0"#));
    assert!(dir.path().join("ep/step_000.svg").exists());
}

#[test]
fn two_contact_fixture_succeeds_and_frames_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlo(&["run-episode", "--config", "snake", "--out", "ep"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let log = fs::read_to_string(dir.path().join("ep/episode.jsonl")).unwrap();
    let steps = log.lines().filter(|l| l.contains(r#""record":"step""#)).count();
    assert!((1..=20).contains(&steps));

    let frame = fs::read_to_string(dir.path().join("ep/step_001.svg")).unwrap();
    assert_eq!(frame.matches("class=\"rope\"").count(), 1);
    assert_eq!(frame.matches("class=\"contact\"").count(), 2);
    let r = dlo(&["render", "--config", "snake", "--step", "1"], dir.path());
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(stdout(&r), frame);
    let again = dlo(&["render", "--config", "snake", "--step", "1"], dir.path());
    assert_eq!(r.stdout, again.stdout);
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[goal]\nkind = \"points\"\ncolour = 1\n").unwrap();
    let bad = dlo(&["run-episode", "--config", "bad.toml"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("line 1") && err.contains("colour"), "{err}");

    assert_eq!(
        dlo(&["run-episode", "--config", "missing.toml"], dir.path())
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        dlo(&["render", "--config", "arch", "--step", "99"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dlo(&["no-such-command"], dir.path()).status.code(), Some(2));
    let starved = dlo(
        &["run-episode", "--config", "snake", "--max-steps", "1", "--out", "ep"],
        dir.path(),
    );
    assert_eq!(starved.status.code(), Some(1));
}

#[test]
fn detect_and_eval_images() {
    let dir = tempfile::tempdir().unwrap();
    let mut band = BinaryImage::new(40, 12);
    for u in 2..38 {
        for v in 5..8 {
            band.set(u, v, true);
        }
    }
    write_pbm(&dir.path().join("band.pbm"), &band).unwrap();
    let o = dlo(&["detect", "--image", "band.pbm", "--m", "4", "--finetune"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let pts: Vec<(f64, f64)> = stdout(&o)
        .lines()
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(pts.len(), 4);
    assert!(pts.windows(2).all(|w| w[0].0 < w[1].0));

    let e = dlo(&["eval", "images", "band.pbm", "band.pbm"], dir.path());
    let text = stdout(&e);
    assert!(
        text.contains("name=iou value=1.000000") && text.contains("name=l1 value=0.000000"),
        "{text}"
    );
}
