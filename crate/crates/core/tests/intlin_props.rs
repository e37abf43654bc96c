mod common;

use common::oracles::{check_fba, expected, matches, random_dec_system, random_generators, Expected};
use moc_core::intlin::{dec_solve_with, fba, DecOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn opts() -> DecOptions {
    DecOptions { q: 101, maxj: 20, ..DecOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dec_agrees_with_rational_elimination(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (basis, w) = random_dec_system(&mut rng);
        let want = expected(&w, &basis);
        let got = dec_solve_with(&w, &basis, opts()).unwrap().outcome;
        prop_assert!(matches(&got, &want), "{:?} vs {:?}", got, want);
    }

    #[test]
    fn fba_output_is_a_nonnegative_basis(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens = random_generators(&mut rng);
        let r = fba(&gens).unwrap();
        if let Err(e) = check_fba(&gens, &r.basis) {
            return Err(TestCaseError::fail(e));
        }
    }
}

#[test]
fn all_dec_outcomes_occur() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut seen = [0usize; 3];
    for _ in 0..200 {
        let (basis, w) = random_dec_system(&mut rng);
        let want = expected(&w, &basis);
        seen[match want {
            Expected::Coefficients(_) => 0,
            Expected::NotInSpan => 1,
            Expected::NotIntegral => 2,
        }] += 1;
        let got = dec_solve_with(&w, &basis, opts()).unwrap().outcome;
        assert!(matches(&got, &want), "{got:?} vs {want:?}");
    }
    assert!(seen.iter().all(|&k| k > 10), "{seen:?}");
}
