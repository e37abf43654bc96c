use std::fs;

use moc_core::fixtures;
use moc_core::session::{replay, snapshot, Command, Workspace};
use proptest::prelude::*;

const A5_STEPS: [&str; 12] = [
    "tensor X5 X2",
    "tensor X5 X5",
    "tensor X5 X4",
    "tensor X2 X2",
    "tensor X5 X1",
    "certify --bs B1,B2 --ps P1,P2",
    "certify --bs B1,B2 --ps P2,P1",
    "atoms",
    "improve pimtest",
    "improve subtract --pim 1 --from P2",
    "improve triangular",
    "improve prune",
];

const CO2_STEPS: [&str; 9] = [
    "atoms",
    "improve pimtest",
    "improve pimtest --column 8",
    "improve subtract --pim 1 --from P2",
    "improve subtract --pim 1 --from P15",
    "improve subtract --pim 1 --from P16",
    "improve prune",
    "improve split --column 2",
    "improve triangular",
];

fn cmd(s: &str) -> Command {
    let w: Vec<String> = s.split_whitespace().map(String::from).collect();
    Command::from_words(&w, &[]).unwrap()
}

fn check_replay(ws: &Workspace, group: &str, prime: u64) -> Result<(), TestCaseError> {
    let log = fs::read_to_string(ws.info_path()).unwrap();
    let b = tempfile::tempdir().unwrap();
    let fresh = Workspace::new(b.path(), group, prime).unwrap();
    replay(&log, &fresh).unwrap();
    prop_assert_eq!(snapshot(ws).unwrap(), snapshot(&fresh).unwrap());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn a5_sessions_replay(steps in proptest::collection::vec(0usize..A5_STEPS.len(), 0..10), legacy: bool) {
        let a = tempfile::tempdir().unwrap();
        let ws = Workspace::new(a.path(), "A5", 5).unwrap();
        ws.run_command(&Command::Init { legacy }).unwrap();
        ws.run_command(&Command::ImportTable { group: "A5".into(), text: fixtures::A5_TEXT.into() }).unwrap();
        ws.run_command(&cmd("basicset --block 1 --rows X1,X2")).unwrap();
        for k in steps {
            let _ = ws.run_command(&cmd(A5_STEPS[k]));
        }
        check_replay(&ws, "A5", 5)?;
    }

    #[test]
    fn co2_sessions_replay(steps in proptest::collection::vec(0usize..CO2_STEPS.len(), 0..8), legacy: bool) {
        let a = tempfile::tempdir().unwrap();
        let ws = Workspace::new(a.path(), "Co2", 5).unwrap();
        ws.run_command(&Command::Init { legacy }).unwrap();
        ws.run_command(&Command::BasicSetMatrices {
            u: fixtures::co2_u().to_text(),
            brauer: Some(fixtures::co2_b().to_text()),
            projective: Some(fixtures::co2_p().to_text()),
            names: fixtures::CO2_PS.iter().map(|s| s.to_string()).collect(),
        })
        .unwrap();
        for k in steps {
            let _ = ws.run_command(&cmd(CO2_STEPS[k]));
        }
        check_replay(&ws, "Co2", 5)?;
    }
}
