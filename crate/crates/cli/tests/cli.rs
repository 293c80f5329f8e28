use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn kc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("kc runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn put(dir: &TempDir, name: &str, text: &str) {
    std::fs::write(dir.path().join(name), text).unwrap();
}

#[test]
fn generated_tight_example_validates() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&kc(dir.path(), &["gen", "tight", "3", "-o", "t3.nnf"])), 0);
    let out = kc(dir.path(), &["validate", "t3.nnf"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn convert_report_has_sizes() {
    let dir = tempfile::tempdir().unwrap();
    kc(dir.path(), &["gen", "tight", "3", "-o", "t3.nnf"]);
    let out = kc(dir.path(), &["convert", "t3.nnf", "-o", "t3.fbdd", "--report", "r.json"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    let r: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["M"], 56);
    for key in ["N", "L", "out_nodes_with_noops", "out_nodes_final"] {
        assert!(r[key].is_u64(), "{key}");
    }
    assert_eq!(code(&kc(dir.path(), &["validate", "t3.fbdd"])), 0);
}

#[test]
fn hierarchical_reports_offending_pair() {
    let dir = tempfile::tempdir().unwrap();
    put(&dir, "h.txt", "exists x y : R(x), S(x, y), T(y)\n");
    put(&dir, "rs.txt", "exists x y : R(x), S(x, y)\n");
    let out = kc(dir.path(), &["hierarchical", "h.txt"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "non-hierarchical: (x,y)");
    assert_eq!(stdout(&kc(dir.path(), &["hierarchical", "rs.txt"])).trim(), "hierarchical");
}

#[test]
fn compile_count_and_prob_agree() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&kc(dir.path(), &["gen", "phi", "2", "-o", "phi2.dnf"])), 0);
    let out = kc(dir.path(), &["compile", "phi2.dnf", "-o", "phi2.nnf", "--heuristic", "frequent"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let a = stdout(&kc(dir.path(), &["count", "phi2.dnf"]));
    let b = stdout(&kc(dir.path(), &["count", "phi2.nnf"]));
    assert_eq!(a, b);
    let count: u64 = a.trim().parse().unwrap();
    // Φ_2 has 8 variables: count / 2^8 is the uniform probability.
    let out = kc(dir.path(), &["prob", "phi2.nnf"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1/2 assumed"));
    let exact = stdout(&out).lines().next().unwrap().to_string();
    let (n, d): (u64, u64) = exact.split_once('/').map(|(n, d)| (n.parse().unwrap(), d.parse().unwrap())).unwrap();
    assert_eq!(n * 256, count * d);
}

#[test]
fn count_over_wider_universe_doubles() {
    let dir = tempfile::tempdir().unwrap();
    put(&dir, "f.cnf", "p cnf 2 1\n1 2 0\n");
    assert_eq!(stdout(&kc(dir.path(), &["count", "f.cnf"])).trim(), "3");
    assert_eq!(stdout(&kc(dir.path(), &["count", "f.cnf", "--universe", "3"])).trim(), "6");
}

#[test]
fn weights_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    put(&dir, "f.dnf", "p dnf 2 1\n1 2 0\n");
    put(&dir, "w.csv", "var,probability\n1,1/3\n2,0.5\n");
    let out = kc(dir.path(), &["prob", "f.dnf", "--weights", "w.csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some("1/6"));
    assert!(out.stderr.is_empty());
}

#[test]
fn lineage_of_example_database() {
    let dir = tempfile::tempdir().unwrap();
    put(&dir, "q.txt", "exists x y : Patient(x, 'asthma'), Friend(x, y), Smoker(y)\n");
    put(
        &dir,
        "db.txt",
        "Patient(Ann, asthma) X1\nPatient(Bob, asthma) X2\nPatient(Carl, flu) X3\n\
         Friend(Ann, Joe) Z11\nFriend(Ann, Tom) Z12\nFriend(Bob, Tom) Z22\nFriend(Carl, Tom) Z32\n\
         Smoker(Joe) Y1\nSmoker(Tom) Y2\n",
    );
    let out = kc(dir.path(), &["lineage", "q.txt", "db.txt", "-o", "l.dnf"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).trim(), "X1 Z11 Y1 ∨ X1 Z12 Y2 ∨ X2 Z22 Y2");
    assert_eq!(code(&kc(dir.path(), &["compile", "l.dnf", "-o", "l.nnf"])), 0);
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = kc(dir.path(), &["bench", "--family", "tight", "--range", "1..3", "-o", "b.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("family,param,N,M,L,out_nodes,bound"));
    let sizes: Vec<u64> = lines.map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    assert_eq!(sizes.len(), 3);
    assert!(sizes.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&kc(dir.path(), &[])), 2);
    assert_eq!(code(&kc(dir.path(), &["gen", "nope", "1", "-o", "x"])), 2);
    assert_eq!(code(&kc(dir.path(), &["gen", "psi", "4", "-o", "x"])), 2);
    assert_eq!(code(&kc(dir.path(), &["bench", "--family", "phi", "--range", "3", "-o", "x"])), 2);
    put(&dir, "bad.nnf", "nnf 3 2 2\nL 1\nL 2\nO 0 2 0 1\n");
    assert_eq!(code(&kc(dir.path(), &["validate", "bad.nnf"])), 1);
    // Both branches test x1 again below a decision on x1.
    put(&dir, "twice.fbdd", "S 0\nS 1\nD 1 0 1\nD 1 2 2\n");
    let out = kc(dir.path(), &["validate", "twice.fbdd"]);
    assert_eq!(code(&out), 1);
    assert_eq!(code(&kc(dir.path(), &["validate", "missing.nnf"])), 1);
}
