use proptest::prelude::*;

use super::*;
use crate::channel::{ChannelConfig, FaultKind, ObservedOrder, PagePair, Payload, Residency, MIB, NANOS_PER_MS};

fn params(disk: u64, switch: u64) -> SimParams {
    SimParams {
        disk_latency: disk,
        mem_latency: 1,
        switch_cost: switch,
        ..Default::default()
    }
}

fn pair() -> PagePair {
    PagePair { slot: 0, p1: 0, p2: 64 }
}

fn state_with(p: SimParams, p1_resident: bool, p2_resident: bool) -> SimState {
    let mut s = SimState::new(p, 8192, 0).unwrap();
    if p1_resident {
        s.make_resident(0);
    }
    if p2_resident {
        s.make_resident(64);
    }
    s
}

#[test]
fn classify_cases() {
    let mut s = SimState::new(SimParams::default(), 16, 0).unwrap();
    assert_eq!(s.classify_access(3, false), FaultKind::HardFault);
    s.make_resident(3);
    assert_eq!(s.classify_access(3, false), FaultKind::SoftFault);
    assert_eq!(s.classify_access(3, true), FaultKind::NoFault);
}

#[test]
fn evict_cases() {
    let mut s = SimState::new(SimParams::default(), 16, 0).unwrap();
    for p in 0..8 {
        s.map(Process::Spy, p);
    }
    s.evict(&[5]);
    assert_eq!(s.residency(5), Residency::Evicted);
    assert!(!s.is_mapped(Process::Spy, 5));
    assert_eq!(s.classify_access(5, true), FaultKind::HardFault);

    let before: Vec<u64> = s.cache().pages().collect();
    s.evict(&[]);
    assert_eq!(s.cache().pages().collect::<Vec<_>>(), before);
    // absent page is a no-op
    s.evict(&[12]);
    assert_eq!(s.cache().len(), 7);

    s.evict(&before);
    assert!(s.cache().is_empty());
}

#[test]
fn touch_resident_keeps_core() {
    let mut s = SimState::new(SimParams::default(), 16, 0).unwrap();
    s.make_resident(2);
    let out = s.touch(ThreadId::T1, 2);
    assert_eq!(
        out,
        TouchOutcome {
            fault: FaultKind::SoftFault,
            completion: 1
        }
    );
    assert!(s.is_mapped(Process::Spy, 2));
    assert_eq!(s.touch(ThreadId::T2, 2).fault, FaultKind::NoFault);
    // the trojan has its own address space
    assert_eq!(s.touch(ThreadId::Trojan, 2).fault, FaultKind::SoftFault);
}

#[test]
fn touch_evicted_queues_fetch() {
    let mut s = SimState::new(SimParams::default(), 16, 0).unwrap();
    let out = s.touch(ThreadId::Trojan, 4);
    assert_eq!(
        out,
        TouchOutcome {
            fault: FaultKind::HardFault,
            completion: 1000
        }
    );
    // a second access joins the fetch in flight
    assert_eq!(s.touch(ThreadId::T1, 4).completion, 1000);
    // another page waits behind it on the disk
    assert_eq!(s.touch(ThreadId::T1, 5).completion, 2000);
}

// Hand traces with disk 100, mem 1, switch 10, t1 dispatched at tick 0.
#[test]
fn hand_trace_p1_evicted() {
    let mut s = state_with(params(100, 10), false, true);
    let (out, trace) = s.run_spy_slot(pair());
    assert_eq!(out.order, ObservedOrder::T1Last);
    assert_eq!(out.faults, [FaultKind::HardFault, FaultKind::SoftFault]);
    // t1 faults at 0, t2 gets the core at 10 and is done at 11, t1 resumes when
    // its page lands at 100
    assert_eq!(out.completed_at, [101, 11]);
    let text: Vec<String> = trace.records().iter().map(|r| r.to_string()).collect();
    assert_eq!(text, ["0,t1,0,hard", "10,t2,64,soft"]);
}

#[test]
fn hand_trace_p2_evicted() {
    let mut s = state_with(params(100, 10), true, false);
    let (out, trace) = s.run_spy_slot(pair());
    assert_eq!(out.order, ObservedOrder::T2Last);
    assert_eq!(out.completed_at, [1, 102]);
    let text: Vec<String> = trace.records().iter().map(|r| r.to_string()).collect();
    assert_eq!(text, ["0,t1,0,soft", "1,t2,64,hard"]);
}

#[test]
fn hand_trace_both_resident_and_both_evicted() {
    let mut s = state_with(params(100, 10), true, true);
    let (out, _) = s.run_spy_slot(pair());
    assert_eq!(out.order, ObservedOrder::Ambiguous);
    assert_eq!(out.completed_at, [1, 2]);

    let mut s = state_with(params(100, 10), false, false);
    let (out, _) = s.run_spy_slot(pair());
    assert_eq!(out.order, ObservedOrder::Ambiguous);
    // second fetch queues behind the first on the disk
    assert_eq!(out.completed_at, [101, 201]);
}

/// The evicted side finishes last; otherwise the order is ambiguous.
fn predicted(p1_resident: bool, p2_resident: bool) -> ObservedOrder {
    match (p1_resident, p2_resident) {
        (false, true) => ObservedOrder::T1Last,
        (true, false) => ObservedOrder::T2Last,
        _ => ObservedOrder::Ambiguous,
    }
}

#[test]
fn four_residency_combinations() {
    for disk in [10, 100, 1000] {
        for switch in [0, 1, 10] {
            for (r1, r2) in [(false, false), (false, true), (true, false), (true, true)] {
                let mut s = state_with(params(disk, switch), r1, r2);
                let (out, _) = s.run_spy_slot(pair());
                assert_eq!(
                    out.order,
                    predicted(r1, r2),
                    "disk={disk} switch={switch} r=({r1},{r2})"
                );
            }
        }
    }
}

#[test]
fn readahead_pulls_neighbours() {
    let p = SimParams {
        readahead: 4,
        ..Default::default()
    };
    let mut s = SimState::new(p, 16, 0).unwrap();
    let out = s.run_spy_slot(PagePair { slot: 0, p1: 0, p2: 2 }).0;
    // t1's fetch brings page 2 in while t2 is already waiting on its own fetch
    assert_eq!(out.order, ObservedOrder::Ambiguous);
    for page in 0..4 {
        assert_eq!(s.residency(page), Residency::Resident);
    }
    assert_eq!(s.residency(4), Residency::Evicted);
}

#[test]
fn retention_only_hits_accessed_pages() {
    let p = SimParams {
        warm_retention: 1.0,
        ..Default::default()
    };
    let mut s = SimState::new(p, 16, 0).unwrap();
    s.make_resident(1);
    assert!(s.advise_dontneed(&[1]).is_empty(), "never-accessed page is dropped");
    s.make_resident(1);
    s.touch(ThreadId::T1, 1);
    assert_eq!(s.advise_dontneed(&[1]), vec![1]);
    assert!(s.is_mapped(Process::Spy, 1));
}

fn cfg(gap: u64) -> ChannelConfig {
    ChannelConfig::default().with_page_gap(gap)
}

#[test]
fn one_bit_payload_gives_one_slot() {
    let payload = Payload::from_bit_str("1").unwrap();
    let run = simulate_channel(&cfg(64), &SimParams::default(), &payload).unwrap();
    assert_eq!(run.report.per_slot.len(), 1);
    assert_eq!(run.report.ber, 0.0);
    assert_eq!(run.report.per_slot[0].order, ObservedOrder::T1Last);
    // trojan reads once, spy twice
    let by = |t| run.trace.records().iter().filter(|r| r.thread == t).count();
    assert_eq!((by(ThreadId::Trojan), by(ThreadId::T1), by(ThreadId::T2)), (1, 1, 1));
}

#[test]
fn empty_payload() {
    let run = simulate_channel(&cfg(64), &SimParams::default(), &Payload::default()).unwrap();
    assert!(run.report.per_slot.is_empty());
    assert!(run.trace.is_empty());
}

#[test]
fn period_shorter_than_tick_rejected() {
    let c = ChannelConfig {
        sync_period: 999,
        guard_offset: 1,
        ..cfg(64)
    };
    assert!(run_channel_sim(&c, &SimParams::default(), &Payload::random(0, 4)).is_err());
}

#[test]
fn ideal_round_trip_all_gaps() {
    let payload = Payload::random(11, 400);
    for gap in [4, 8, 16, 32, 64, 128, 256] {
        let run = simulate_channel(&cfg(gap), &SimParams::default(), &payload).unwrap();
        assert_eq!(run.report.ber, 0.0, "gap {gap}");
        assert_eq!(run.sender_overruns, 0);
    }
}

#[test]
fn retained_pages_across_wraps_raise_ber() {
    let payload = Payload::random(5, 100);
    let small = ChannelConfig {
        region_size: MIB,
        ..cfg(64)
    };
    let ideal = run_channel_sim(&small, &SimParams::default(), &payload).unwrap();
    assert_eq!(ideal.ber, 0.0);
    let sticky = SimParams {
        warm_retention: 1.0,
        ..Default::default()
    };
    let report = run_channel_sim(&small, &sticky, &payload).unwrap();
    // 256 pages / gap 64: only the first four slots see cold pages
    assert_eq!(report.bit_errors(), 96);
    assert_eq!(report.indeterminate_slots(), 96);
}

#[test]
fn short_period_overloads_disk() {
    let payload = Payload::random(2, 50);
    let fast = cfg(64).with_sync_period(NANOS_PER_MS);
    let run = simulate_channel(&fast, &SimParams::default(), &payload).unwrap();
    assert!(run.report.ber > 0.0);
    assert!(run.sender_overruns > 0);
}

#[test]
fn simulated_bandwidth_uses_slot_time() {
    let payload = Payload::random(1, 10);
    let report = run_channel_sim(&cfg(64), &SimParams::default(), &payload).unwrap();
    assert_eq!(report.elapsed_ns, 10 * 10 * NANOS_PER_MS);
    assert_eq!(report.bandwidth_bps, 100.0);
}

fn sim_params() -> impl Strategy<Value = SimParams> {
    (2u64..2000, 1u64..5, 0u64..50, 2usize..64, 0u64..4).prop_filter_map(
        "disk must exceed mem",
        |(disk, mem, switch, cap, ra)| {
            (disk > mem).then_some(SimParams {
                cache_capacity: cap,
                disk_latency: disk,
                mem_latency: mem,
                switch_cost: switch,
                readahead: ra,
                ..Default::default()
            })
        },
    )
}

proptest! {
    #[test]
    fn hard_fault_yields_soft_fault_keeps_core(
        p in sim_params(),
        resident in proptest::collection::vec(0u64..32, 0..12),
        mapped in proptest::collection::vec(0u64..32, 0..6),
        p1 in 0u64..32,
        delta in 1u64..32,
    ) {
        let mut s = SimState::new(p.clone(), 32, 0).unwrap();
        for page in resident {
            s.make_resident(page);
        }
        for page in mapped {
            s.map(Process::Spy, page);
        }
        let pair = PagePair { slot: 0, p1, p2: (p1 + delta) % 32 };
        let (out, trace) = s.run_spy_slot(pair);
        prop_assert!(s.cache().len() <= p.cache_capacity);
        let t1 = trace.records().iter().find(|r| r.thread == ThreadId::T1).unwrap();
        let t2 = trace.records().iter().find(|r| r.thread == ThreadId::T2).unwrap();
        match t1.fault {
            FaultKind::HardFault => prop_assert_eq!(t2.tick, t1.tick + p.switch_cost),
            _ => prop_assert_eq!(t2.tick, t1.tick + p.mem_latency),
        }
        prop_assert!(trace.records().windows(2).all(|w| w[0].tick <= w[1].tick));
        let hard = out.hard_faulted;
        if hard[0] == hard[1] {
            prop_assert_eq!(out.order, ObservedOrder::Ambiguous);
        }
    }

    #[test]
    fn ordering_identifies_the_evicted_page(
        disk in 2u64..3000, switch in 0u64..100, evict_first in any::<bool>(), gap in 1u64..100,
    ) {
        prop_assume!(disk > 1 + switch);
        let mut s = SimState::new(params(disk, switch), 256, 0).unwrap();
        let pair = PagePair { slot: 0, p1: 0, p2: gap };
        s.make_resident(if evict_first { gap } else { 0 });
        let (out, _) = s.run_spy_slot(pair);
        let expected = if evict_first { ObservedOrder::T1Last } else { ObservedOrder::T2Last };
        prop_assert_eq!(out.order, expected);
    }

    #[test]
    fn channel_sim_is_deterministic_and_bounded(
        seed in any::<u64>(), n in 1usize..120, gap_exp in 2u32..9, retention in 0.0f64..1.0,
        cap in 2usize..300, mb in 1u64..4,
    ) {
        let c = ChannelConfig { region_size: mb * MIB, seed, ..cfg(1 << gap_exp) };
        let p = SimParams { warm_retention: retention, cache_capacity: cap, ..Default::default() };
        let payload = Payload::random(seed, n);
        let a = simulate_channel(&c, &p, &payload).unwrap();
        let b = simulate_channel(&c, &p, &payload).unwrap();
        prop_assert_eq!(&a.report, &b.report);
        prop_assert_eq!(&a.trace, &b.trace);
        prop_assert!((0.0..=1.0).contains(&a.report.ber));
        prop_assert_eq!(a.report.received.len(), n);
    }

    #[test]
    fn exact_eviction_round_trips(seed in any::<u64>(), n in 1usize..300, gap_exp in 2u32..9) {
        let c = ChannelConfig { seed, ..cfg(1 << gap_exp) };
        let payload = Payload::random(seed, n);
        let report = run_channel_sim(&c, &SimParams::default(), &payload).unwrap();
        prop_assert_eq!(report.received, payload);
    }
}
