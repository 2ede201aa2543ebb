//! Acceptance gate. Prints one line per criterion and fails if any is red.
//!
//! The live criterion needs a conforming host and is skipped unless
//! `PFCHAN_LIVE=1` is set. `PFCHAN_LIVE_DIR` picks where the 32 MiB backing file
//! goes (default: the system temp dir, which must not be tmpfs).

use std::process::ExitCode;
use std::time::Instant;

use pagefault_channel::channel::{MIB, NANOS_PER_MS};
use pagefault_channel::harness::{run_sweep, write_csv, SweepSpec, SweepVariable};
use pagefault_channel::live::{probe_capabilities, run_live};
use pagefault_channel::sim::{run_channel_sim, SimParams, SimState};
use pagefault_channel::{compute_metrics, page_pair_for_slot, ChannelConfig, ObservedOrder, PagePair, Payload};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAPS: [u64; 7] = [4, 8, 16, 32, 64, 128, 256];

type Criterion = (&'static str, fn() -> Verdict);

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn ideal() -> SimParams {
    SimParams {
        disk_latency: 1000,
        mem_latency: 1,
        switch_cost: 10,
        ..SimParams::default()
    }
}

fn round_trip() -> Verdict {
    let mut worst = std::time::Duration::ZERO;
    for gap in GAPS {
        let cfg = ChannelConfig {
            payload_bits: 1000,
            seed: 7,
            ..ChannelConfig::default()
        }
        .with_page_gap(gap);
        let payload = Payload::random(cfg.seed, cfg.payload_bits);
        let start = Instant::now();
        let report = match run_channel_sim(&cfg, &ideal(), &payload) {
            Ok(r) => r,
            Err(e) => return Verdict::Fail(format!("M={gap}: {e}")),
        };
        let took = start.elapsed();
        worst = worst.max(took);
        if report.ber != 0.0 || took.as_secs_f64() >= 1.0 {
            return Verdict::Fail(format!("M={gap}: ber={} in {took:?}", report.ber));
        }
    }
    Verdict::Pass(format!("ber=0 for all M, slowest run {worst:?}"))
}

fn residency_oracle() -> Verdict {
    let pair = PagePair { slot: 0, p1: 0, p2: 64 };
    let mut cases = 0;
    for disk in [10, 100, 1000] {
        for switch in [0, 1, 10] {
            for (p1_res, p2_res) in [(true, true), (true, false), (false, true), (false, false)] {
                let params = SimParams {
                    disk_latency: disk,
                    mem_latency: 1,
                    switch_cost: switch,
                    ..SimParams::default()
                };
                let mut s = SimState::new(params, 8192, 0).unwrap();
                if p1_res {
                    s.make_resident(pair.p1);
                }
                if p2_res {
                    s.make_resident(pair.p2);
                }
                let expected = match (p1_res, p2_res) {
                    (false, true) => ObservedOrder::T1Last,
                    (true, false) => ObservedOrder::T2Last,
                    _ => ObservedOrder::Ambiguous,
                };
                let got = s.run_spy_slot(pair).0.order;
                if got != expected {
                    return Verdict::Fail(format!(
                        "disk={disk} switch={switch} p1_resident={p1_res} p2_resident={p2_res}: {got:?} != {expected:?}"
                    ));
                }
                cases += 1;
            }
        }
    }
    Verdict::Pass(format!("{cases}/36 cases exact"))
}

fn schedule_oracle() -> Verdict {
    for gap in GAPS {
        let cfg = ChannelConfig {
            region_size: 8192 * 4096,
            page_size: 4096,
            ..ChannelConfig::default()
        }
        .with_page_gap(gap);
        let region = 8192;
        let mut p1 = cfg.base_page;
        for k in 0..10_000u64 {
            let mut p2 = p1 + cfg.pair_offset;
            if p2 >= region {
                p2 -= region;
            }
            let got = page_pair_for_slot(&cfg, k);
            if (got.p1, got.p2) != (p1, p2) {
                return Verdict::Fail(format!("M={gap} k={k}: ({},{}) != ({p1},{p2})", got.p1, got.p2));
            }
            p1 += gap;
            if p1 >= region {
                p1 -= region;
            }
        }
    }
    Verdict::Pass("10^4 slots x 7 gaps exact".into())
}

fn is_non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

fn ber_by_value(spec: &SweepSpec) -> Result<Vec<Vec<f64>>, String> {
    let result = run_sweep(spec).map_err(|e| e.to_string())?;
    let reps = spec.repetitions;
    let mut per_seed = vec![Vec::new(); reps];
    for row in &result.rows {
        per_seed[row.repetition].push(row.ber);
    }
    Ok(per_seed)
}

fn means(per_seed: &[Vec<f64>]) -> Vec<f64> {
    let n = per_seed[0].len();
    (0..n)
        .map(|i| per_seed.iter().map(|s| s[i]).sum::<f64>() / per_seed.len() as f64)
        .collect()
}

fn fmt(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
}

fn region_trend() -> Verdict {
    let fixed = ChannelConfig {
        payload_bits: 100,
        seed: 1,
        ..ChannelConfig::default()
    };
    let sim = SimParams {
        warm_retention: 0.5,
        ..SimParams::default()
    };
    let mut spec = SweepSpec::new(SweepVariable::RegionSize, fixed, sim);
    spec.values = [1, 2, 4, 8, 16, 32].iter().map(|m| m * MIB).collect();
    spec.repetitions = 5;
    let per_seed = match ber_by_value(&spec) {
        Ok(v) => v,
        Err(e) => return Verdict::Fail(e),
    };
    if let Some((seed, row)) = per_seed.iter().enumerate().find(|(_, r)| !is_non_increasing(r)) {
        return Verdict::Fail(format!("seed {} not monotone: {}", spec.seed + seed as u64, fmt(row)));
    }
    let mean = means(&per_seed);
    let strict = mean.windows(2).any(|w| w[1] < w[0]);
    check(strict, format!("mean ber 1..32MiB: {}", fmt(&mean)))
}

fn bit_rate_trend() -> Verdict {
    let fixed = ChannelConfig {
        payload_bits: 100,
        seed: 1,
        ..ChannelConfig::default()
    };
    let mut spec = SweepSpec::new(SweepVariable::BitRate, fixed, SimParams::default());
    // longest period first, so BER must not decrease along the grid
    spec.values.sort_unstable_by(|a, b| b.cmp(a));
    spec.repetitions = 5;
    let per_seed = match ber_by_value(&spec) {
        Ok(v) => v,
        Err(e) => return Verdict::Fail(e),
    };
    let non_decreasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] >= w[0]);
    if let Some((seed, row)) = per_seed.iter().enumerate().find(|(_, r)| !non_decreasing(r)) {
        return Verdict::Fail(format!("seed {}: {}", spec.seed + seed as u64, fmt(row)));
    }
    let mean = means(&per_seed);
    let periods: Vec<String> = spec.values.iter().map(|v| format!("{}ms", v / NANOS_PER_MS)).collect();
    Verdict::Pass(format!("mean ber over {}: {}", periods.join(","), fmt(&mean)))
}

fn metrics_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
    for i in 0..100_000 {
        let n = rng.random_range(1..=128);
        let a: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let b: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let elapsed = rng.random_range(1..=10_000_000_000u64);
        let mut errors = 0usize;
        for j in 0..n {
            if a[j] != b[j] {
                errors += 1;
            }
        }
        let m = compute_metrics(&a, &b, elapsed).unwrap();
        let ber = errors as f64 / n as f64;
        let bw = n as f64 * 1e9 / elapsed as f64;
        if m.ber != ber || m.bandwidth_bps != bw {
            return Verdict::Fail(format!("pair {i}: {m:?} vs ber={ber} bw={bw}"));
        }
    }
    Verdict::Pass("10^5 pairs exact".into())
}

fn determinism() -> Verdict {
    let fixed = ChannelConfig {
        payload_bits: 100,
        seed: 42,
        ..ChannelConfig::default()
    };
    let sim = SimParams {
        warm_retention: 0.3,
        ..SimParams::default()
    };
    let csv = || -> Result<Vec<u8>, String> {
        let spec = SweepSpec::new(SweepVariable::PageGap, fixed.clone(), sim.clone());
        let result = run_sweep(&spec).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_csv(&result, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    match (csv(), csv()) {
        (Ok(a), Ok(b)) => check(a == b, format!("{} bytes, identical={}", a.len(), a == b)),
        (Err(e), _) | (_, Err(e)) => Verdict::Fail(e),
    }
}

fn live() -> Verdict {
    if std::env::var("PFCHAN_LIVE").as_deref() != Ok("1") {
        return Verdict::Skip("manual check, set PFCHAN_LIVE=1 on a conforming host".into());
    }
    let base = std::env::var_os("PFCHAN_LIVE_DIR")
        .map(Into::into)
        .unwrap_or_else(std::env::temp_dir);
    let dir = match tempfile::tempdir_in(&base) {
        Ok(d) => d,
        Err(e) => return Verdict::Fail(format!("{}: {e}", base.display())),
    };
    let caps = probe_capabilities(dir.path());
    if !(caps.ready() && caps.switch_on_hard_fault) {
        return Verdict::Fail(format!("capability probe: {caps}"));
    }
    let path = dir.path().join("region.bin");
    if let Err(e) = std::fs::write(&path, vec![0xa5u8; 32 * MIB as usize]) {
        return Verdict::Fail(e.to_string());
    }
    let cfg = ChannelConfig {
        payload_bits: 100,
        region_size: 32 * MIB,
        seed: 3,
        ..ChannelConfig::default()
    }
    .with_page_gap(64)
    .with_sync_period(20 * NANOS_PER_MS);
    let payload = Payload::random(cfg.seed, cfg.payload_bits);
    match run_live(&cfg, &path, &payload, 200 * NANOS_PER_MS) {
        Ok(r) => check(
            r.ber <= 0.10,
            format!(
                "ber={:.3} indeterminate={} bw={:.1} bit/s",
                r.ber,
                r.indeterminate_slots(),
                r.bandwidth_bps
            ),
        ),
        Err(e) => Verdict::Fail(e.to_string()),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "round-trip: sim ideal params, 1000 bits, M in {4..256}, ber == 0, < 1 s",
            round_trip,
        ),
        (
            "residency->order oracle: 4 combos x disk {10,100,1000} x switch {0,1,10}",
            residency_oracle,
        ),
        ("schedule oracle: k < 10^4, M in {4..256}, 8192 pages", schedule_oracle),
        (
            "region-size trend: 100 bits, 1..32 MiB, 5 seeds non-increasing, strict somewhere",
            region_trend,
        ),
        (
            "bit-rate trend: ber non-decreasing as sync period shrinks",
            bit_rate_trend,
        ),
        ("metrics: 10^5 random pairs vs brute force", metrics_oracle),
        ("determinism: identical sweep CSV bytes", determinism),
        ("live (non-CI): 100 bits, 32 MiB, M=64, 20 ms, ber <= 10%", live),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Verdict::Pass(d) => println!("[PASS] {name} -- {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("[FAIL] {name} -- {d}");
            }
            Verdict::Skip(d) => println!("[SKIP] {name} -- {d}"),
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
