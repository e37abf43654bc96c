use moc_core::exactnum::{int, ints, BigInt};
use moc_core::fixtures;
use moc_core::improve::{
    part_test, singular_matrix, subsum_test, Certificate, ImproveContext, PartVerdict,
    ProofEvent, SplitOutcome, SubsumVerdict,
};
use moc_core::IntMatrix;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Known decompositions: BS = X·atoms, PS = atoms·Y, so ⟨BS, PS⟩ = X·Y.
struct Truth {
    x: IntMatrix,
    y: IntMatrix,
    b: IntMatrix,
    p: IntMatrix,
}

fn unitriangular(rng: &mut ChaCha8Rng, s: usize, max: i64, density: f64) -> IntMatrix {
    let rows: Vec<Vec<i64>> = (0..s)
        .map(|i| {
            (0..s)
                .map(|j| match i.cmp(&j) {
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Greater if rng.gen_bool(density) => rng.gen_range(1..=max),
                    _ => 0,
                })
                .collect()
        })
        .collect();
    IntMatrix::from_vec_i64(&rows)
}

fn nonneg(rng: &mut ChaCha8Rng, s: usize) -> Vec<BigInt> {
    (0..s).map(|_| int(if rng.gen_bool(0.5) { rng.gen_range(0..=2) } else { 0 })).collect()
}

fn truth(seed: u64, s: usize, nb: usize, np: usize) -> Truth {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = unitriangular(&mut rng, s, 1, 0.3);
    let y = unitriangular(&mut rng, s, 2, 0.4);
    let xi = x.inverse_unimodular().unwrap();
    let yi = y.inverse_unimodular().unwrap();
    let b = (0..nb).map(|_| xi.vec_mul(&nonneg(&mut rng, s))).collect();
    let p = (0..np).map(|_| yi.mul_vec(&nonneg(&mut rng, s))).collect();
    Truth { x, y, b: IntMatrix::from_rows_with_cols(b, s), p: IntMatrix::from_rows_with_cols(p, s) }
}

impl Truth {
    fn ctx(&self) -> ImproveContext {
        ImproveContext::new(self.x.mul(&self.y).unwrap(), self.b.clone(), self.p.clone()).unwrap()
    }

    fn is_atom_col(&self, j: usize) -> bool {
        self.y.col(j).iter().filter(|v| !v.is_zero()).count() == 1
    }

    /// Decomposition of the current PS over the atoms.
    fn ps_over_atoms(&self, ctx: &ImproveContext) -> IntMatrix {
        let u0 = self.x.mul(&self.y).unwrap();
        let t = u0.inverse_unimodular().unwrap().mul(&ctx.u).unwrap();
        self.y.mul(&t).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn proofs_are_sound_and_replay(seed in any::<u64>(), s in 2usize..6, nb in 0usize..4, np in 0usize..4) {
        let t = truth(seed, s, nb, np);
        let mut ctx = t.ctx();
        ctx.detect_atoms();
        for j in 0..s {
            if let PartVerdict::Proved(_) = ctx.pim_test(j).unwrap() {
                prop_assert!(t.is_atom_col(j));
            }
        }
        for i in 0..s {
            if let PartVerdict::Proved(_) = ctx.irr_test(i).unwrap() {
                prop_assert_eq!(t.x.row(i).iter().filter(|v| !v.is_zero()).count(), 1);
            }
        }
        for e in &ctx.events {
            prop_assert!(e.replay().unwrap());
            prop_assert_eq!(&ProofEvent::parse(&e.to_text()).unwrap(), e);
        }
    }

    #[test]
    fn subtraction_never_removes_too_much(seed in any::<u64>(), s in 2usize..6, np in 0usize..4) {
        let t = truth(seed, s, 0, np);
        let mut ctx = t.ctx();
        ctx.pims = (0..s).filter(|&j| t.is_atom_col(j)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let d = nonneg(&mut rng, s);
        let sigma = t.y.inverse_unimodular().unwrap().mul_vec(&d);
        for f in 0..s {
            let pim = ctx.pims.contains(&f);
            let free = ctx.u.col(f).iter().all(|v| *v <= int(1));
            if !pim && !free {
                continue;
            }
            let sub = ctx.subtract_indecomposable(f, &sigma, "sigma").unwrap();
            let left = t.y.mul_vec(&sub.reduced);
            prop_assert!(left.iter().all(|v| !v.is_negative()), "f={} z={} d={:?}", f, sub.z, d);
            prop_assert!(ctx.events.last().unwrap().replay().unwrap());
        }
    }

    #[test]
    fn triangular_reduction_keeps_projectives(seed in any::<u64>(), s in 2usize..6, np in 1usize..5) {
        let t = truth(seed, s, 0, np);
        let mut ctx = t.ctx();
        let before = ctx.u.clone();
        let steps = ctx.triangular_reduce().unwrap();
        prop_assert!(t.ps_over_atoms(&ctx).is_nonneg());
        prop_assert!(ctx.u.det().unwrap().abs() == int(1));
        if !steps.is_empty() {
            prop_assert!(ctx.u.columns() < before.columns());
        }
        for e in &ctx.events {
            prop_assert!(e.replay().unwrap());
        }
    }

    #[test]
    fn splitting_keeps_projectives(seed in any::<u64>(), s in 2usize..6, nb in 0usize..3, np in 1usize..4) {
        let t = truth(seed, s, nb, np);
        let mut ctx = t.ctx();
        for i in 0..s {
            if let SplitOutcome::Split { .. } = ctx.split_decomposable(i).unwrap() {
                prop_assert!(!t.is_atom_col(i));
                prop_assert!(t.ps_over_atoms(&ctx).is_nonneg());
                prop_assert!(ctx.events.last().unwrap().replay().unwrap());
                break;
            }
        }
    }

    #[test]
    fn pruning_certificates_hold(seed in any::<u64>(), s in 2usize..6, np in 0usize..6) {
        let t = truth(seed, s, 0, np);
        let mut ctx = t.ctx();
        let rep = ctx.prune().unwrap();
        prop_assert_eq!(rep.essential.len() + rep.discarded.len(), np);
        prop_assert_eq!(ctx.p.nrows(), rep.essential.len());
        for e in &ctx.events {
            let is_comb = matches!(e.certificate, Certificate::Combination { .. });
            prop_assert!(is_comb);
            prop_assert!(e.replay().unwrap());
            prop_assert_eq!(&ProofEvent::parse(&e.to_text()).unwrap(), e);
        }
    }

    #[test]
    fn part_witness_is_a_part(n in proptest::collection::vec(0i64..3, 1..6), rel in proptest::collection::vec(-2i64..3, 0..12)) {
        let n = ints(&n);
        prop_assume!(n.iter().any(|v| v.is_positive()));
        let s = n.len();
        let rows: Vec<Vec<BigInt>> = rel.chunks_exact(s).map(ints).collect();
        let rel = IntMatrix::from_rows_with_cols(rows, s);
        let total: BigInt = n.iter().sum();
        match part_test(&n, &rel, 10_000).unwrap() {
            PartVerdict::Inconclusive(Some(x)) => {
                let sum: BigInt = x.iter().sum();
                prop_assert!(sum.is_positive() && sum < total);
                prop_assert!(x.iter().zip(&n).all(|(a, b)| !a.is_negative() && a <= b));
            }
            PartVerdict::Proved(p) => {
                prop_assert!(Certificate::Infeasible(p).verify().unwrap());
                // brute force: no proper part passes the relations
                let mut x = vec![BigInt::zero(); s];
                loop {
                    let sum: BigInt = x.iter().sum();
                    let rest: Vec<BigInt> = n.iter().zip(&x).map(|(a, b)| a - b).collect();
                    let ok = (0..rel.nrows()).all(|k| {
                        moc_core::intlin::dot(rel.row(k), &x) >= BigInt::zero()
                            && moc_core::intlin::dot(rel.row(k), &rest) >= BigInt::zero()
                    });
                    prop_assert!(!(sum.is_positive() && sum < total && ok), "{:?}", x);
                    let Some(i) = (0..s).find(|&i| x[i] < n[i]) else { break };
                    x[i] += 1;
                    for v in &mut x[..i] {
                        *v = BigInt::zero();
                    }
                }
            }
            PartVerdict::Inconclusive(None) => {}
        }
    }
}

#[test]
fn forced_split_replaces_the_decomposable_column() {
    // PS = (Φ1+Φ2, Φ2+Φ3, Φ3) and the projective PS1 − PS2 + PS3 = Φ1
    let u = IntMatrix::from_vec_i64(&[vec![1, 0, 0], vec![1, 1, 0], vec![0, 1, 1]]);
    let p = IntMatrix::from_vec_i64(&[vec![1, -1, 1]]);
    let mut ctx = ImproveContext::new(u, IntMatrix::zeros(0, 3), p).unwrap();
    let out = ctx.split_decomposable(1).unwrap();
    let SplitOutcome::Split { parts, replaced } = out else { panic!("{out:?}") };
    assert_eq!(parts, [ints(&[0, 0, 1]), ints(&[0, 1, 0])]);
    assert_eq!(replaced, [(1, ints(&[0, 1, 0]))]);
    assert_eq!(ctx.u, IntMatrix::from_vec_i64(&[vec![1, 0, 0], vec![1, 1, 0], vec![0, 0, 1]]));
    assert!(ctx.events[0].replay().unwrap());
    assert_eq!(ctx.p.row(0), ints(&[1, -1, 0]).as_slice());
    // an indecomposable column is left alone
    assert!(matches!(ctx.split_decomposable(2).unwrap(), SplitOutcome::NoAction(_)));
}

#[test]
fn subsums_agree_with_the_pim_test_for_a5_mod_5() {
    let t = fixtures::a5();
    let block = ["X1", "X2", "X3", "X4"].map(|l| t.row_by_label(l).unwrap());
    let sing = singular_matrix(&t, 5, &block);
    // PA0 → Irr over BS0 = {1, 3}
    let s = IntMatrix::from_vec_i64(&[vec![1, 0], vec![0, 1], vec![0, 1], vec![1, 1]]);
    let cases = [([1, 0, 0, 1], true), ([0, 1, 1, 1], true), ([1, 1, 1, 2], false), ([2, 0, 0, 2], false)];
    for (a, indec) in cases {
        let a = ints(&a);
        let by_subsum = matches!(subsum_test(&sing, &a, 10_000).unwrap(), SubsumVerdict::Indecomposable);
        let n = a[..2].to_vec();
        assert_eq!(s.mul_vec(&n), a);
        let by_pim = matches!(part_test(&n, &IntMatrix::zeros(0, 2), 10_000).unwrap(), PartVerdict::Proved(_));
        assert_eq!(by_subsum, indec, "{a:?}");
        assert_eq!(by_pim, indec, "{a:?}");
    }
}
