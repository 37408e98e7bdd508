use std::io::Write;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

static COUNTER: AtomicUsize = AtomicUsize::new(0);

fn run(job: &str, extra: &[&str]) -> Output {
    let dir = std::env::temp_dir().join(format!("qextremal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("job-{}.json", COUNTER.fetch_add(1, Ordering::SeqCst)));
    std::fs::File::create(&path).unwrap().write_all(job.as_bytes()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qextremal"))
        .arg("--job")
        .arg(&path)
        .args(extra)
        .output()
        .unwrap()
}

const A2: &str = r#"{"type": "A", "rank": 2, "task": "reducibility", "V": [1, 0], "Z": [1, 0]}"#;

#[test]
fn reducibility_job_succeeds() {
    let out = run(A2, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "completely_reducible");
    assert_eq!(v["verdict_mode"], "exact");
}

#[test]
fn malformed_job_fails() {
    let out = run(r#"{"type": "A", "rank": 2, "task": "reducibility", "V": [1, 0], "bogus": 1}"#, &[]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn output_is_reproducible() {
    let a = run(A2, &[]);
    let b = run(A2, &[]);
    assert_eq!(a.stdout, b.stdout);
}
