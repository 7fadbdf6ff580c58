mod common;

use common::check_mux_case;
use optiq_core::compose::ComposedMux;
use optiq_core::model::Packet;
use optiq_core::mux::{Multiplexer, Timing};
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (usize, usize, Timing, Vec<usize>)> {
    (prop::sample::select(vec![1usize, 2, 4]), prop::sample::select(vec![1usize, 2, 4, 8]), prop::bool::ANY)
        .prop_flat_map(|(n, b, cut)| {
            let timing = if cut { Timing::CutThrough } else { Timing::Registered };
            (Just(n), Just(b), Just(timing), prop::collection::vec(0..=n, 0..60))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn fifo_mux_matches_reference((n, b, timing, pattern) in case()) {
        if let Err(e) = check_mux_case(n, b, timing, &pattern) {
            return Err(TestCaseError::fail(format!("n={n} B={b} {timing:?}: {e}")));
        }
    }
}

fn feed(pattern: &[usize], buffer: usize) -> Result<(), String> {
    let mut mux = ComposedMux::new(buffer).map_err(|e| e.to_string())?;
    let mut next = 0u64;
    let mut branch_of = std::collections::HashMap::new();
    let mut last_out: [Option<u64>; 2] = [None, None];
    for (t, &n) in pattern.iter().enumerate() {
        let arrivals: Vec<Packet> = (0..n)
            .map(|_| {
                next += 1;
                Packet::new(next, next as i64, t as u64)
            })
            .collect();
        let busy = mux.occupancy() > 0;
        let out = mux.step(&arrivals).map_err(|e| e.to_string())?;
        if busy != out.departure.is_some() {
            return Err(format!("slot {t}: idled with backlog"));
        }
        if !out.losses.is_empty() {
            return Err(format!("slot {t}: loss with buffer {buffer}"));
        }
        // Learn which front each arrival went to.
        for p in &arrivals {
            let f = (0..2).find(|&f| mux.front(f).contents().any(|q| q.id == p.id));
            if let Some(f) = f {
                branch_of.insert(p.id.0, f);
            }
        }
        if let Some(d) = out.departure {
            if let Some(&f) = branch_of.get(&d.id.0) {
                if last_out[f].is_some_and(|prev| prev > d.id.0) {
                    return Err(format!("slot {t}: branch {f} reordered"));
                }
                last_out[f] = Some(d.id.0);
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    // Buffer large enough that nothing is dropped, so every packet is
    // tracked from its front stage to the exit.
    #[test]
    fn composed_is_non_idling_and_fifo_per_branch(pattern in prop::collection::vec(0..=4usize, 0..60)) {
        let total: usize = pattern.iter().sum();
        prop_assert!(feed(&pattern, total.max(1)).is_ok(), "{:?}", feed(&pattern, total.max(1)));
    }
}

#[test]
fn fifo_examples() {
    use optiq_core::mux::{FifoMux, MuxConfig};
    let x = Packet::new(1, 10, 1);
    let mut cut = FifoMux::new(MuxConfig::new(4, 2, Timing::CutThrough).unwrap());
    assert_eq!(cut.step(&[x]).unwrap().departure, Some(x));

    let mut reg = FifoMux::new(MuxConfig::new(4, 2, Timing::Registered).unwrap());
    let a = Packet::new(1, 1, 1);
    let b = Packet::new(2, 2, 1);
    reg.step(&[a, b]).unwrap();
    let extra: Vec<Packet> = (3..6).map(|i| Packet::new(i, i as i64, 2)).collect();
    let out = reg.step(&extra).unwrap();
    assert_eq!(out.departure, Some(a));
    assert_eq!(out.losses.len(), 2);
    assert_eq!(reg.occupancy(), 2);

    let mut fifo = FifoMux::new(MuxConfig::new(1, 4, Timing::Registered).unwrap());
    fifo.step(&[a]).unwrap();
    fifo.step(&[b]).unwrap();
    assert_eq!(fifo.step(&[]).unwrap().departure, Some(b));
}
