mod common;

use common::{build_trace, check_oracle_trace};
use optiq_core::model::Packet;
use optiq_core::oracle::PriorityQueueOracle;
use proptest::prelude::*;

fn raw_trace(max_len: usize) -> impl Strategy<Value = Vec<(bool, i64, bool)>> {
    prop::collection::vec((prop::bool::weighted(0.6), -1000i64..1000, prop::bool::weighted(0.4)), 0..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn closed_forms_hold(cap in 1usize..12, raw in raw_trace(120)) {
        let trace = build_trace(&raw);
        if let Err(e) = check_oracle_trace(cap, &trace) {
            return Err(TestCaseError::fail(format!("B={cap}: {e}")));
        }
    }
}

#[test]
fn examples() {
    let mut q = PriorityQueueOracle::new(3).unwrap();
    let p7 = Packet::new(1, 7, 1);
    let out = q.step(Some(p7), true).unwrap();
    assert_eq!(out.departure, Some(p7));
    assert_eq!(out.loss, None);

    let mut q = PriorityQueueOracle::new(2).unwrap();
    q.step(Some(Packet::new(1, 50, 1)), false).unwrap();
    q.step(Some(Packet::new(2, 40, 2)), false).unwrap();
    let low = Packet::new(3, 1, 3);
    assert_eq!(q.step(Some(low), false).unwrap().loss, Some(low));
    assert_eq!(q.occupancy(), 2);
    assert!(q.step(Some(Packet::new(4, 40, 4)), false).is_err());
}
