use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fedtoken"))
}

fn default_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml")
}

fn run(cmd: &mut Command) -> (i32, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().expect("binary runs");
    let text = String::from_utf8_lossy(&stdout).into_owned() + &String::from_utf8_lossy(&stderr);
    (status.code().expect("exit code"), text)
}

fn simulate(out: &Path) {
    let (code, text) = run(bin()
        .arg("simulate")
        .arg(default_config())
        .arg("--out")
        .arg(out));
    assert_eq!(code, 0, "{text}");
}

#[test]
fn validate_accepts_the_shipped_config() {
    let (code, text) = run(bin().arg("validate").arg(default_config()));
    assert_eq!(code, 0, "{text}");
}

#[test]
fn validate_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(default_config())
        .unwrap()
        .replace("learning_rate = 0.1", "learning_rate = -0.1")
        .replace("clients = 5", "clients = 4");
    std::fs::write(&path, text).unwrap();
    let (code, out) = run(bin().arg("validate").arg(&path));
    assert_eq!(code, 1);
    assert!(out.contains("federation.learning_rate"), "{out}");
    assert!(out.contains("len(agents.clients)"), "{out}");
}

#[test]
fn missing_config_is_exit_one() {
    let (code, _) = run(bin().arg("simulate").arg("/nonexistent/config.toml"));
    assert_eq!(code, 1);
}

#[test]
fn simulate_writes_outputs_and_replay_matches() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    for f in [
        "rewards.csv",
        "payouts.csv",
        "prices.csv",
        "events.jsonl",
        "final_state.json",
    ] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let (code, text) = run(bin().arg("replay").arg(dir.path().join("events.jsonl")));
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("final state matches"), "{text}");
}

#[test]
fn seed_flag_changes_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    simulate(a.path());
    let (code, text) = run(bin()
        .arg("simulate")
        .arg(default_config())
        .arg("--seed")
        .arg("8")
        .arg("--out")
        .arg(b.path()));
    assert_eq!(code, 0, "{text}");
    let read = |d: &Path| std::fs::read(d.join("rewards.csv")).unwrap();
    assert_ne!(read(a.path()), read(b.path()));
}

#[test]
fn tampered_log_is_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let path = dir.path().join("events.jsonl");
    let log = std::fs::read_to_string(&path).unwrap();
    let line = log
        .lines()
        .position(|l| l.contains("\"type\":\"payout_executed\""))
        .unwrap();
    let tampered: Vec<String> = log
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == line {
                let at = l.find("\"amount\":").unwrap() + "\"amount\":".len();
                format!("{}1{}", &l[..at], &l[at..])
            } else {
                l.to_string()
            }
        })
        .collect();
    std::fs::write(&path, tampered.join("\n") + "\n").unwrap();
    let (code, text) = run(bin().arg("replay").arg(&path));
    assert_eq!(code, 2, "{text}");
}

#[test]
fn replay_without_final_state_skips_comparison() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    std::fs::remove_file(dir.path().join("final_state.json")).unwrap();
    let (code, text) = run(bin().arg("replay").arg(dir.path().join("events.jsonl")));
    assert_eq!(code, 0, "{text}");
    assert!(!text.contains("final state matches"));
}

#[test]
fn edited_final_state_is_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let path = dir.path().join("final_state.json");
    let state = std::fs::read_to_string(&path).unwrap();
    let edited = state.replacen("\"clients\": 5", "\"clients\": 6", 1);
    assert_ne!(edited, state);
    std::fs::write(&path, edited).unwrap();
    let (code, text) = run(bin().arg("replay").arg(dir.path().join("events.jsonl")));
    assert_eq!(code, 2, "{text}");
}
