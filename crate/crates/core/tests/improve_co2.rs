use moc_core::exactnum::{int, ints, BigInt};
use moc_core::fixtures;
use moc_core::improve::{
    fong_parity, parity_event, prune_essential, ImproveContext, PartVerdict, ProofEvent, Rule,
};
use moc_core::IntMatrix;
use num_traits::Zero;

fn co2() -> ImproveContext {
    let mut ctx = ImproveContext::new(fixtures::co2_u(), fixtures::co2_b(), fixtures::co2_p()).unwrap();
    ctx.ps_names = fixtures::CO2_PS.iter().map(|s| s.to_string()).collect();
    ctx.bs_names = fixtures::CO2_BS.iter().map(|s| s.to_string()).collect();
    ctx
}

fn col(name: &str) -> usize {
    fixtures::CO2_PS.iter().position(|n| *n == name).unwrap()
}

#[test]
fn atoms_of_co2() {
    let mut ctx = co2();
    let atoms = ctx.detect_atoms();
    let names: Vec<&str> = atoms.iter().map(|&j| fixtures::CO2_PS[j]).collect();
    assert_eq!(names, ["Psi37", "Psi46", "Psi39"]);
    assert!(ctx.events.iter().all(|e| e.replay().unwrap()));
}

#[test]
fn pim_tests_of_co2() {
    let mut ctx = co2();
    ctx.detect_atoms();
    let mut proved = Vec::new();
    for j in 0..16 {
        if ctx.pims.contains(&j) {
            continue;
        }
        if let PartVerdict::Proved(_) = ctx.pim_test(j).unwrap() {
            proved.push(fixtures::CO2_PS[j]);
        }
    }
    let want = ["Psi43", "Psi42", "Psi38", "Psi34", "Psi49", "Phi6", "Psi11", "Psi32", "Psi31", "Psi20"];
    assert_eq!(proved, want);
    assert_eq!(ctx.pims.len(), 13);
    for e in &ctx.events {
        assert!(e.replay().unwrap());
        let back = ProofEvent::parse(&e.to_text()).unwrap();
        assert_eq!(&back, e);
    }
}

fn proved_co2() -> ImproveContext {
    let mut ctx = co2();
    ctx.detect_atoms();
    for j in 0..16 {
        let _ = ctx.pim_test(j).unwrap();
    }
    ctx
}

#[test]
fn psi37_is_contained_in_the_undecided_columns() {
    let mut ctx = proved_co2();
    let f = col("Psi37");
    for name in ["Psi51", "Psi8", "Psi4"] {
        let mut sigma = vec![BigInt::zero(); 16];
        sigma[col(name)] = int(1);
        let (problem, vars, offset) =
            ctx.bit_system(f, 15, &sigma, Rule::Max, &ctx.max_multiplicities()).unwrap();
        assert_eq!(vars, [col("Psi51"), col("Psi8"), col("Psi4")]);
        assert_eq!(offset, int(0));
        // relation rows of Φ4, Φ5, Φ7 against the bit of 1291059
        assert_eq!(problem.b[3..6], ints(&[2, 1, 2])[..]);
        let sub = ctx.subtract_indecomposable(f, &sigma, name).unwrap();
        assert_eq!(sub.z, int(1), "{name}");
        assert_eq!(sub.minima.len(), 1);
        assert_eq!(sub.reduced[f], int(-1));
        let e = ctx.events.last().unwrap();
        assert!(e.replay().unwrap());
        assert_eq!(ProofEvent::parse(&e.to_text()).unwrap(), *e);
    }
}

#[test]
fn pruning_drops_phi5() {
    let p0 = fixtures::co2_p();
    let mut p: Vec<Vec<BigInt>> = (0..p0.nrows()).map(|k| p0.row(k).to_vec()).collect();
    let mut phi = vec![BigInt::zero(); 16];
    phi[col("Psi37")] = int(-1);
    phi[col("Psi51")] = int(1);
    p.push(phi);
    let p = IntMatrix::from_rows_with_cols(p, 16);
    let rep = prune_essential(16, &p).unwrap();
    assert_eq!(rep.essential[0], 3);
    assert_eq!(rep.discarded.iter().map(|d| d.0).collect::<Vec<_>>(), [1]);
    assert_eq!(rep.essential.len(), 3);
}

#[test]
fn m11_parity_forces_containment() {
    let proj = fixtures::m11_proj();
    let degrees = ints(&fixtures::M11_DEGREES);
    let rep = fong_parity(2, &degrees, &fixtures::M11_REAL, &proj).unwrap();
    assert_eq!(rep.source, Some(0));
    assert_eq!(rep.trivial_pim, Some(ints(&[1, 0, 0, 0, 1, 0, 1, 1])));
    assert_eq!(rep.containments, [2]);
    let e = parity_event(&degrees, &fixtures::M11_REAL, &proj, &rep).unwrap();
    assert!(e.replay().unwrap());
    assert_eq!(ProofEvent::parse(&e.to_text()).unwrap(), e);
}
