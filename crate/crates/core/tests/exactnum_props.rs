mod common;

use common::oracles::{random_big, round_trips};
use moc_core::exactnum::{legacy_decode, legacy_encode, BigInt, LegacyRecord};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn hundred_thousand_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100_000 {
        let n = random_big(&mut rng);
        assert!(round_trips(&n), "{n}");
    }
}

proptest! {
    #[test]
    fn i128_round_trips(v: i128) {
        prop_assert!(round_trips(&BigInt::from(v)));
    }

    #[test]
    fn decoding_inverts_encoding_on_valid_records(words in proptest::collection::vec(0u16..10000, 0..6), last in 0u16..10000, neg: bool) {
        let mut w = words;
        while w.first() == Some(&0) {
            w.remove(0);
        }
        w.push(last + if neg && (last != 0 || !w.is_empty()) { 20000 } else { 10000 });
        let rec = LegacyRecord::new(w).unwrap();
        let n = legacy_decode(&rec).unwrap();
        prop_assert_eq!(legacy_encode(&n), rec);
    }
}
