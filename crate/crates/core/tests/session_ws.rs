use std::fs;

use moc_core::exactnum::{ints, legacy_decode, LegacyRecord};
use moc_core::fixtures;
use moc_core::session::{
    replay, snapshot, Codec, Command, ImproveCommand, LabeledRecord, Payload, Workspace, LABEL_RELATIONS,
};
use moc_core::{Error, IntMatrix};

fn words(s: &str) -> Command {
    let w: Vec<String> = s.split_whitespace().map(String::from).collect();
    Command::from_words(&w, &[]).unwrap()
}

fn a5_workspace(dir: &std::path::Path) -> Workspace {
    let ws = Workspace::new(dir, "A5", 5).unwrap();
    ws.run_command(&Command::Init { legacy: false }).unwrap();
    ws.run_command(&Command::ImportTable { group: "A5".into(), text: fixtures::A5_TEXT.into() }).unwrap();
    ws
}

#[test]
fn a5_blocks_and_basic_set() {
    let dir = tempfile::tempdir().unwrap();
    let ws = a5_workspace(dir.path());
    let out = ws.run_command(&Command::Blocks).unwrap();
    assert_eq!(out.lines.len(), 2, "{:?}", out.lines);
    assert_eq!(out.lines.iter().filter(|l| l.contains("defect 0")).count(), 1);
    let out = ws.run_command(&words("basicset --block 1 --rows X1,X2")).unwrap();
    assert!(out.lines.iter().all(|l| !l.contains("defect 0")));
    let out = ws.run_command(&words("tensor X5 X2")).unwrap();
    assert!(out.lines[0].starts_with("P1: new projective, obtained by: tensoring ordinaries with defect 0"));
    ws.run_command(&words("tensor X5 X5")).unwrap();
    let (_, proj) = ws.pools().unwrap();
    assert_eq!(proj.get("P1").unwrap().coeffs, ints(&[0, 1, 1, 1]));
    assert_eq!(proj.get("P2").unwrap().coeffs, ints(&[1, 1, 1, 2]));
    // X5 ⊗ X1 lies outside the block
    assert!(matches!(ws.run_command(&words("tensor X5 X1")), Err(Error::Domain(_))));
    ws.run_command(&words("certify --bs B1,B2 --ps P1,P2")).unwrap();
    let st = ws.state().unwrap();
    assert_eq!(st.u.unwrap(), IntMatrix::from_vec_i64(&[vec![0, 1], vec![1, 1]]));
    let out = ws.run_command(&Command::Atoms).unwrap();
    assert_eq!(out.lines, ["projective nr 1 (P1) in block 1 is indecomposable, because it is an atom"]);
    // without relations the bit of 3 may be P1 alone
    let out = ws.run_command(&Command::Improve(ImproveCommand::Subtract { pim: 0, from: "P2".into() })).unwrap();
    assert_eq!(out.lines, ["P2: no multiple of projective nr 1 (P1) can be subtracted"]);
    let out = ws.run_command(&words("tensor P1 X4")).unwrap();
    assert!(out.lines[0].starts_with("P3: new projective, obtained by: tensoring P1 with X4"), "{:?}", out.lines);
    let out = ws.run_command(&words("trace P3")).unwrap();
    assert_eq!(out.lines.len(), 2, "{:?}", out.lines);
    assert!(out.lines[1].starts_with("  P1: obtained by: tensoring ordinaries with defect 0 characters"));
}

fn co2_workspace(dir: &std::path::Path, legacy: bool) -> Workspace {
    let ws = Workspace::new(dir, "Co2", 5).unwrap();
    ws.run_command(&Command::Init { legacy }).unwrap();
    let text = |m: IntMatrix| m.to_text();
    ws.run_command(&Command::BasicSetMatrices {
        u: text(fixtures::co2_u()),
        brauer: Some(text(fixtures::co2_b())),
        projective: Some(text(fixtures::co2_p())),
        names: fixtures::CO2_PS.iter().map(|s| s.to_string()).collect(),
    })
    .unwrap();
    ws
}

#[test]
fn co2_pim_test_log_lines() {
    let dir = tempfile::tempdir().unwrap();
    let ws = co2_workspace(dir.path(), false);
    ws.run_command(&Command::Atoms).unwrap();
    let out = ws.run_command(&Command::Improve(ImproveCommand::PimTest { column: None })).unwrap();
    for name in ["Psi43", "Psi42", "Psi38", "Psi49", "Psi32", "Psi34"] {
        let want = format!("({name}) in block 1 is indecomposable, because of the PIM test");
        assert!(out.lines.iter().any(|l| l.ends_with(&want)), "{name}: {:?}", out.lines);
    }
    assert_eq!(ws.state().unwrap().pims.len(), 13);
    let log = fs::read_to_string(ws.info_path()).unwrap();
    assert!(log.contains("because it is an atom"));
    assert_eq!(log.matches("event pim_test").count(), 10);
    // Ψ51 is P2
    let out = ws.run_command(&words("improve subtract --pim 1 --from P2")).unwrap();
    assert!(out.lines[0].starts_with("P20 = P2 - 1*P1"), "{:?}", out.lines);
    let out = ws.run_command(&words("improve prune")).unwrap();
    assert!(out.lines.contains(&"P18 is not essential".to_string()), "{:?}", out.lines);
}

#[test]
fn replay_reproduces_the_files() {
    for legacy in [false, true] {
        let a = tempfile::tempdir().unwrap();
        let ws = co2_workspace(a.path(), legacy);
        for c in ["atoms", "improve pimtest", "improve subtract --pim 1 --from P2", "improve prune"] {
            ws.run_command(&words(c)).unwrap();
        }
        let log = fs::read_to_string(ws.info_path()).unwrap();
        let b = tempfile::tempdir().unwrap();
        let fresh = Workspace::new(b.path(), "Co2", 5).unwrap();
        replay(&log, &fresh).unwrap();
        assert_eq!(snapshot(&ws).unwrap(), snapshot(&fresh).unwrap());
    }
}

#[test]
fn failed_commands_leave_the_state_alone() {
    let dir = tempfile::tempdir().unwrap();
    let ws = a5_workspace(dir.path());
    ws.run_command(&words("basicset --block 1 --rows X1,X2")).unwrap();
    let before = snapshot(&ws).unwrap();
    assert!(ws.run_command(&words("tensor X5 X1")).is_err());
    assert!(ws.run_command(&words("certify --bs B1,B2 --ps P7,P8")).is_err());
    assert_eq!(snapshot(&ws).unwrap(), before);
    let log = ws.read_log().unwrap();
    assert_eq!(log.iter().filter(|e| e.aborted.is_some()).count(), 2);
    // a replay skips the aborted entries
    let b = tempfile::tempdir().unwrap();
    let fresh = Workspace::new(b.path(), "A5", 5).unwrap();
    replay(&fs::read_to_string(ws.info_path()).unwrap(), &fresh).unwrap();
    assert_eq!(snapshot(&fresh).unwrap(), before);
}

fn append(path: &std::path::Path, text: &str) {
    let mut f = fs::OpenOptions::new().append(true).open(path).unwrap();
    std::io::Write::write_all(&mut f, text.as_bytes()).unwrap();
}

#[test]
fn interrupted_commands_are_rolled_back_or_forward() {
    // reference: the same commands without a crash
    let r = tempfile::tempdir().unwrap();
    let reference = a5_workspace(r.path());
    reference.run_command(&words("basicset --block 1 --rows X1,X2")).unwrap();
    let before = snapshot(&reference).unwrap();
    reference.run_command(&words("tensor X5 X2")).unwrap();
    let after = snapshot(&reference).unwrap();

    // crash before the commit mark: rolled back
    let dir = tempfile::tempdir().unwrap();
    let ws = a5_workspace(dir.path());
    ws.run_command(&words("basicset --block 1 --rows X1,X2")).unwrap();
    fs::write(format!("{}.new", ws.projective_path().display()), "garbage").unwrap();
    append(&ws.info_path(), "entry 4 0\ncommand tensor X5 X2\nbegin\n");
    assert_eq!(snapshot(&ws).unwrap(), before);
    ws.run_command(&words("tensor X5 X2")).unwrap();
    assert_eq!(snapshot(&ws).unwrap(), after);

    // crash after the commit mark: rolled forward
    let dir = tempfile::tempdir().unwrap();
    let ws = a5_workspace(dir.path());
    ws.run_command(&words("basicset --block 1 --rows X1,X2")).unwrap();
    let proj = fs::read_to_string(reference.projective_path()).unwrap();
    fs::write(format!("{}.new", ws.projective_path().display()), proj).unwrap();
    append(&ws.info_path(), "entry 4 0\ncommand tensor X5 X2\nbegin\nline P1\ncommit\n");
    ws.run_command(&words("tensor X5 X5")).unwrap();
    reference.run_command(&words("tensor X5 X5")).unwrap();
    assert_eq!(snapshot(&ws).unwrap(), snapshot(&reference).unwrap());
}

#[test]
fn lock_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let ws = a5_workspace(dir.path());
    let lock = dir.path().join("A5.5.lock");
    fs::write(&lock, "1").unwrap();
    assert!(matches!(ws.run_command(&words("basicset --block 1 --rows X1,X2")), Err(Error::Io(_))));
    assert!(ws.run_command(&Command::Status).is_ok());
    fs::remove_file(&lock).unwrap();

    let m = IntMatrix::from_vec_i64(&[vec![1, 0], vec![0, 1], vec![0, 1], vec![1, 1]]);
    let path = dir.path().join("extra");
    ws.ws_write(&path, LabeledRecord::matrix(LABEL_RELATIONS, m.clone()), Codec::Legacy).unwrap();
    let rec = ws.ws_read(&path, LABEL_RELATIONS).unwrap();
    assert_eq!(rec.payload, Payload::Matrix(m));
    let text = fs::read_to_string(&path).unwrap();
    let first = text.lines().nth(1).unwrap().split_whitespace().next().unwrap();
    assert_eq!(legacy_decode(&LegacyRecord::parse(first).unwrap()).unwrap(), 1.into());
    assert!(matches!(ws.ws_read(&path, 30700), Err(Error::NotFound(_))));
}
