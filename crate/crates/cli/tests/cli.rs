use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use moc_core::fixtures;

fn moc(dir: &Path, group: &str, prime: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moc"))
        .args(["--group", group, "--prime", prime])
        .args(args)
        .env("MOC_WORKSPACE", dir)
        .output()
        .expect("run moc")
}

fn ok(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn a5(dir: &Path) {
    let t = dir.join("a5.tbl");
    fs::write(&t, fixtures::A5_TEXT).unwrap();
    ok(&moc(dir, "A5", "5", &["init"]));
    ok(&moc(dir, "A5", "5", &["import-table", t.to_str().unwrap()]));
}

#[test]
fn a5_session() {
    let d = tempfile::tempdir().unwrap();
    a5(d.path());
    let out = ok(&moc(d.path(), "A5", "5", &["blocks"]));
    assert_eq!(out.lines().count(), 2);
    assert_eq!(out.matches("defect 0").count(), 1);
    ok(&moc(d.path(), "A5", "5", &["basicset", "--block", "1", "--rows", "X1,X2"]));
    let out = ok(&moc(d.path(), "A5", "5", &["tensor", "X5", "X2"]));
    assert!(out.contains("tensoring ordinaries with defect 0 characters"));
    ok(&moc(d.path(), "A5", "5", &["tensor", "X5", "X5"]));
    ok(&moc(d.path(), "A5", "5", &["certify", "--bs", "B1,B2", "--ps", "P1,P2"]));
    let out = ok(&moc(d.path(), "A5", "5", &["atoms"]));
    assert_eq!(out.trim(), "projective nr 1 (P1) in block 1 is indecomposable, because it is an atom");
    let out = ok(&moc(d.path(), "A5", "5", &["status"]));
    assert!(out.contains("indecomposable: 1"));
    let out = ok(&moc(d.path(), "A5", "5", &["trace", "P1"]));
    assert!(out.starts_with("P1: obtained by: tensoring ordinaries"));
}

#[test]
fn induction_from_a4() {
    let d = tempfile::tempdir().unwrap();
    a5(d.path());
    ok(&moc(d.path(), "A5", "5", &["basicset", "--block", "1", "--rows", "X1,X2"]));
    let t = d.path().join("a4.tbl");
    fs::write(&t, fixtures::A4_TEXT).unwrap();
    let fusion = fixtures::A4_IN_A5.join(",");
    let label = fixtures::a4().labels[0].clone();
    let args = ["induce", "--from", "A4", "--table", t.to_str().unwrap(), "--fusion", &fusion, &label];
    let out = ok(&moc(d.path(), "A5", "5", &args));
    assert!(out.starts_with("P1: new projective, obtained by: inducing"), "{out}");
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    a5(d.path());
    ok(&moc(d.path(), "A5", "5", &["basicset", "--block", "1", "--rows", "X1,X2"]));
    // outside the block
    assert_eq!(moc(d.path(), "A5", "5", &["tensor", "X5", "X1"]).status.code(), Some(1));
    // not a basic set
    let e = tempfile::tempdir().unwrap();
    a5(e.path());
    assert_eq!(moc(e.path(), "A5", "5", &["basicset", "--block", "1", "--rows", "X1"]).status.code(), Some(1));
    // malformed table
    let bad = d.path().join("bad.tbl");
    fs::write(&bad, "group A5\nrow X1 1\n").unwrap();
    let f = tempfile::tempdir().unwrap();
    ok(&moc(f.path(), "A5", "5", &["init"]));
    assert_eq!(moc(f.path(), "A5", "5", &["import-table", bad.to_str().unwrap()]).status.code(), Some(2));
    // no workspace
    let g = tempfile::tempdir().unwrap();
    assert_eq!(moc(g.path(), "A5", "5", &["status"]).status.code(), Some(1));
}

fn co2(dir: &Path) {
    let w = |name: &str, m: moc_core::IntMatrix| {
        let p = dir.join(name);
        fs::write(&p, m.to_text()).unwrap();
        p.to_str().unwrap().to_string()
    };
    let (u, b, p) = (w("u.txt", fixtures::co2_u()), w("b.txt", fixtures::co2_b()), w("p.txt", fixtures::co2_p()));
    let names = fixtures::CO2_PS.join(",");
    ok(&moc(dir, "Co2", "5", &["init", "--legacy"]));
    let args = ["basicset", "--matrices", &u, "--brauer", &b, "--projective", &p, "--names", &names];
    ok(&moc(dir, "Co2", "5", &args));
}

#[test]
fn co2_pim_test_and_replay() {
    let d = tempfile::tempdir().unwrap();
    co2(d.path());
    ok(&moc(d.path(), "Co2", "5", &["atoms"]));
    let out = ok(&moc(d.path(), "Co2", "5", &["improve", "pimtest"]));
    for name in ["Psi43", "Psi42", "Psi38", "Psi49", "Psi32", "Psi34"] {
        assert!(out.contains(&format!("({name}) in block 1 is indecomposable, because of the PIM test")), "{out}");
    }
    let out = ok(&moc(d.path(), "Co2", "5", &["improve", "subtract", "--pim", "1", "--from", "P2"]));
    assert!(out.starts_with("P20 = P2 - 1*P1"), "{out}");
    ok(&moc(d.path(), "Co2", "5", &["improve", "prune"]));

    let fresh = tempfile::tempdir().unwrap();
    let log = d.path().join("Co2.5.info");
    let out = ok(&moc(fresh.path(), "Co2", "5", &["replay", log.to_str().unwrap()]));
    assert_eq!(out.trim(), "replayed 6 commands");
    for f in ["Co2.5", "Co2.5.bras", "Co2.5.proj"] {
        assert_eq!(fs::read(d.path().join(f)).unwrap(), fs::read(fresh.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn ilp_solve() {
    let d = tempfile::tempdir().unwrap();
    let p = moc_core::ilp::IlpProblem::from_i64(
        &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, -1], vec![-1, 0, 0]],
        &[1, 1, 1, -1, -1],
        &[1, 0, 0],
    )
    .unwrap();
    let f = d.path().join("p.ilp");
    fs::write(&f, p.to_text()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_moc")).args(["ilp", "solve", f.to_str().unwrap()]).output().unwrap();
    let out = ok(&out);
    assert!(out.starts_with("optimum 1\n"), "{out}");
}
