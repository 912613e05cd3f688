//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use visnet::agency::{
    ca_sense, fa_migrate, fa_return, fa_skip, fa_visit, nma_interpret, nma_report, sma_dispatch, AgencyError,
    AgentKind, AgentLog, ContextKind, DispatchTrigger, InterpretParams, NodeStatus, ProfileSet, SensorNode,
    SinkManager,
};
use visnet::energy::{EnergyConfig, UsageClass};
use visnet::fusion::{fuse_pair, FusionProfile};
use visnet::imagecore::synth::{random_scene, split_blur_pair};
use visnet::imagecore::{entropy, error_measure, BitDepth, Image};
use visnet::netsim::{
    flood, Channel, ChannelConfig, FloodReport, LossModel, NetworkTopology, Packet, PacketKind, Position,
};
use visnet::scenario::{
    agent_overhead, bandwidth_required, dropping_rate, format_sig, median, run_scenario, sweep_seeds, throughput,
    write_run, ScenarioConfig, SweepTable,
};
use visnet::wavelet::{dwt2_real, idwt2_real, Basis};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("wavelet round trip", round_trip),
        ("orthogonal energy preservation", energy_preservation),
        ("entropy oracle", entropy_oracle),
        ("self fusion", self_fusion),
        ("split-blur fusion quality", fusion_quality),
        ("line fixture metrics", line_fixture),
        ("trend reproduction", trends),
        ("determinism", determinism),
        ("agency protocol", protocol),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = check();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {verdict} {name} [{:.1}s] {}",
            i + 1,
            started.elapsed().as_secs_f64(),
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

fn random_arrays(count: usize, seed: u64) -> Vec<Array2<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Array2::from_shape_fn((32, 32), |_| rng.gen_range(-256.0..256.0)))
        .collect()
}

fn round_trip() -> Outcome {
    let arrays = random_arrays(100, 101);
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for basis in Basis::ALL {
        for levels in 1..=3 {
            for a in &arrays {
                let p = dwt2_real(a, basis, levels, BitDepth::Sixteen).expect("forward transform");
                let back = idwt2_real(&p).expect("inverse transform");
                let err = a
                    .iter()
                    .zip(back.iter())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(err);
            }
        }
    }
    let elapsed = started.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(10),
        format!(
            "max error {worst:.3e} (limit 1e-8), {:.2}s (limit 10s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn energy_preservation() -> Outcome {
    let arrays = random_arrays(100, 101);
    let mut worst: f64 = 0.0;
    let orthogonal: Vec<Basis> = Basis::ALL.into_iter().filter(|b| b.is_orthogonal()).collect();
    for &basis in &orthogonal {
        for levels in 1..=3 {
            for a in &arrays {
                let p = dwt2_real(a, basis, levels, BitDepth::Sixteen).expect("forward transform");
                let input: f64 = a.iter().map(|x| x * x).sum();
                let output: f64 = p.coefficients().map(|c| c * c).sum();
                worst = worst.max((output - input).abs() / input);
            }
        }
    }
    let names: Vec<&str> = orthogonal.iter().map(|b| b.name()).collect();
    outcome(
        worst <= 1e-8 && orthogonal.len() == 4,
        format!(
            "max relative deviation {worst:.3e} (limit 1e-8) over {}",
            names.join(",")
        ),
    )
}

/// Sorts the pixels and measures run lengths, with no histogram table.
fn brute_force_entropy(image: &Image) -> f64 {
    let mut px = image.pixels().to_vec();
    px.sort_unstable();
    let n = px.len() as f64;
    let mut h = 0.0;
    let mut start = 0;
    for i in 1..=px.len() {
        if i == px.len() || px[i] != px[start] {
            let p = (i - start) as f64 / n;
            h -= p * p.log2();
            start = i;
        }
    }
    h
}

fn entropy_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let depth = BitDepth::ALL[i % 4];
        let (w, h) = (rng.gen_range(2..48), rng.gen_range(2..48));
        let levels = 1u64 << rng.gen_range(1..=depth.bits());
        let img = Image::from_fn(w, h, depth, |_, _| rng.gen_range(0..levels) as u32).expect("valid image");
        worst = worst.max((entropy(&img) - brute_force_entropy(&img)).abs());
    }
    let constants_zero = BitDepth::ALL.into_iter().all(|d| {
        let img = Image::filled(13, 7, d, d.max_value() / 3).expect("valid image");
        entropy(&img) == 0.0 && entropy(&img).is_sign_positive()
    });
    outcome(
        worst <= 1e-12 && constants_zero,
        format!("max deviation {worst:.3e} (limit 1e-12), constant images give 0: {constants_zero}"),
    )
}

fn profile_for(basis: Basis, levels: usize) -> FusionProfile {
    FusionProfile {
        basis,
        levels,
        output_bit_depth: BitDepth::Eight,
        ..FusionProfile::high_resolution()
    }
}

fn self_fusion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let images: Vec<Image> = (0..50)
        .map(|_| Image::from_fn(64, 64, BitDepth::Eight, |_, _| rng.gen_range(0..256)).expect("valid image"))
        .collect();
    let worst = Basis::ALL
        .par_iter()
        .map(|&basis| {
            let profile = profile_for(basis, 3);
            images
                .iter()
                .map(|x| {
                    let fused = fuse_pair(x, x, &profile).expect("fusion");
                    x.pixels()
                        .iter()
                        .zip(fused.pixels())
                        .map(|(&a, &b)| a.abs_diff(b))
                        .max()
                        .unwrap_or(0)
                })
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    outcome(worst <= 1, format!("max deviation {worst} gray levels (limit 1)"))
}

fn fusion_quality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let pairs: Vec<(Image, Image, Image)> = (0..20)
        .map(|_| {
            let truth = random_scene(64, 64, BitDepth::Eight, 255, &mut rng);
            let (a, b) = split_blur_pair(&truth, 2.0);
            (truth, a, b)
        })
        .collect();
    let rows: Vec<(Basis, f64, f64, f64, f64, usize)> = Basis::ALL
        .par_iter()
        .map(|&basis| {
            let profile = profile_for(basis, 3);
            let (mut sa, mut sb, mut sf, mut mf, mut wins) = (0.0, 0.0, 0.0, 0.0, 0);
            for (truth, a, b) in &pairs {
                let fused = fuse_pair(a, b, &profile).expect("fusion");
                let ea = error_measure(truth, a).expect("same shape").std_of_difference;
                let eb = error_measure(truth, b).expect("same shape").std_of_difference;
                let ef = error_measure(truth, &fused).expect("same shape");
                sa += ea;
                sb += eb;
                sf += ef.std_of_difference;
                mf += ef.mean_squared_error;
                if ef.std_of_difference <= ea.min(eb) {
                    wins += 1;
                }
            }
            let n = pairs.len() as f64;
            (basis, sa / n, sb / n, sf / n, mf / n, wins)
        })
        .collect();
    println!(
        "  {:<10} {:>10} {:>10} {:>12} {:>12} {:>6}",
        "wavelet", "std(A)", "std(B)", "std(fused)", "mse(fused)", "wins"
    );
    for (basis, sa, sb, sf, mf, wins) in &rows {
        println!(
            "  {:<10} {sa:>10.4} {sb:>10.4} {sf:>12.4} {mf:>12.4} {wins:>3}/{}",
            basis.name(),
            pairs.len()
        );
    }
    let wins: usize = rows.iter().map(|r| r.5).sum();
    let cells = rows.len() * pairs.len();
    let fraction = wins as f64 / cells as f64;
    outcome(
        fraction >= 0.9,
        format!(
            "fused error at or below the better input in {wins}/{cells} cells ({:.1}%, limit 90%)",
            fraction * 100.0
        ),
    )
}

fn same6(got: f64, want: f64) -> bool {
    format_sig(got) == format_sig(want) && (got - want).abs() <= 1e-12 * want.abs().max(1.0)
}

fn line_fixture() -> Outcome {
    // five nodes 8 m apart, radius 10: only neighbors on the line can talk
    let positions: Vec<Position> = (0..5)
        .map(|i| Position {
            x: 8.0 * i as f64,
            y: 0.0,
        })
        .collect();
    let topo = NetworkTopology::from_positions(&positions, 10.0).expect("line topology");
    let (bps, payload, overhead_us) = (250_000.0, 256usize, 500u64);
    // transfer 0: hop 0 loses packet 1, hop 2 loses packet 3; flood 2 loses the copy 3 -> 2
    let lost: BTreeSet<(u64, usize, usize)> = [(0, 0, 1), (0, 2, 3), (2, 3, 2)].into_iter().collect();
    let mut channel = Channel::new(
        ChannelConfig {
            bandwidth_bps: bps,
            packet_payload_bytes: payload,
            per_hop_overhead: overhead_us,
            loss: LossModel::Scripted(lost),
        },
        0,
    );
    let image_bytes = 1000usize;
    let code_bytes = 4096usize;
    let image = channel
        .transmit(&topo, &[4, 3, 2, 1, 0], image_bytes, PacketKind::FusedImage, 0)
        .expect("image transfer");
    let control = channel
        .transmit(&topo, &[1, 0], 300, PacketKind::Control, 0)
        .expect("control transfer");
    let message = Packet {
        seq: 1,
        kind: PacketKind::ContextFlood,
        payload_bytes: 64,
        src: 3,
        dst: Some(0),
        hop_count: 0,
    };
    let report = flood(&topo, &mut channel, 3, &message, 0).expect("flood");

    let mut failures = Vec::new();
    let mut check = |name: &str, got: f64, want: f64| {
        if !same6(got, want) {
            failures.push(format!("{name}: got {} want {}", format_sig(got), format_sig(want)));
        }
    };

    // ceil(1000/256) = 4 packets over 4 hops; ceil(300/256) = 2 packets over 1 hop
    check("t_load image", image.t_load as f64, (4 * 4) as f64);
    check("t_load control", control.t_load as f64, 2.0);
    // hop attempts 4, 3, 3, 2; packets 0 and 2 survive
    let attempts: Vec<usize> = image.hop_ledger.iter().map(|h| h.attempted).collect();
    check(
        "hop attempts",
        attempts.iter().map(|&a| a as f64).sum(),
        (4 + 3 + 3 + 2) as f64,
    );
    check("image received", image.packets_received as f64, 2.0);
    // airtime: full packet 256*8/250000 s, last packet (1000-768)*8/250000 s
    let full = 256.0 * 8.0 / bps * 1e6;
    let last = 232.0 * 8.0 / bps * 1e6;
    let latency = (3.0 * full + last) + 2.0 * (2.0 * full + last) + 2.0 * full + 4.0 * overhead_us as f64;
    check("image latency us", image.latency() as f64, latency);
    // the flood reaches 3 and 4 only: three copies on the air, one lost, one duplicate
    check("flood copies", report.copies_sent as f64, 3.0);
    check("flood duplicates", report.duplicates as f64, 1.0);
    let sink_reached = report.reached(0);

    let sent = (image.packets_sent + control.packets_sent + 1) as u64;
    let received = (image.packets_received + control.packets_received + usize::from(sink_reached)) as u64;
    check(
        "dropping rate",
        dropping_rate(sent, received).expect("packets sent"),
        (7.0 - 4.0) / 7.0,
    );
    check(
        "throughput",
        throughput(image.packets_sent as u64, image.packets_received as u64).expect("image packets"),
        2.0 / 4.0,
    );
    check(
        "bandwidth",
        bandwidth_required(64 * 64 * 8, bps).expect("positive bandwidth"),
        32768.0 / 250_000.0,
    );
    let pair = agent_overhead(image_bytes, code_bytes).expect("positive sizes");
    check("overhead", pair.agent_fraction, 4096.0 / 5096.0);
    check("overhead complement", pair.image_fraction, 1000.0 / 5096.0);

    let pass = failures.is_empty() && !sink_reached;
    let detail = if pass {
        format!(
            "t_load 16, drop {}, throughput {}, bandwidth {} s, overhead {}",
            format_sig(3.0 / 7.0),
            format_sig(0.5),
            format_sig(0.131072),
            format_sig(4096.0 / 5096.0)
        )
    } else {
        failures.join("; ")
    };
    outcome(pass, detail)
}

const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

fn config(pairs: &[(&str, &str)]) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    for (k, v) in pairs {
        c.set(k, v).expect("valid setting");
    }
    c.validate().expect("valid config");
    c
}

fn seeds() -> Vec<u64> {
    SEEDS.collect()
}

fn strings(values: &[&str]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

fn series(table: &SweepTable, metric: &str) -> Vec<f64> {
    table.column(metric).expect("known metric")
}

fn non_decreasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] >= w[0])
}

fn non_increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] <= w[0])
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0])
}

fn show(v: &[f64]) -> String {
    v.iter().map(|&x| format_sig(x)).collect::<Vec<_>>().join(",")
}

fn trends() -> Outcome {
    let started = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut record = |name: &str, ok: bool, detail: String| {
        pass &= ok;
        lines.push(format!("{name} {} [{detail}]", if ok { "ok" } else { "FAILED" }));
    };

    let depleting = [
        ("comm_radius_m", "100"),
        ("node_battery_mv", "1000"),
        ("days", "3"),
        ("recharge_mv_per_hour", "0"),
    ];

    // battery against packets sent, per node, no recharge
    let battery_ok = seeds().par_iter().all(|&seed| {
        let mut c = config(&depleting);
        c.seed = seed;
        let out = run_scenario(&c).expect("scenario runs");
        let mut by_node: BTreeMap<usize, Vec<(u64, f64)>> = BTreeMap::new();
        for s in &out.battery {
            by_node.entry(s.node).or_default().push((s.packets_sent, s.battery_mv));
        }
        by_node.values().all(|samples| {
            samples.windows(2).all(|w| {
                let ((p0, b0), (p1, b1)) = (w[0], w[1]);
                b1 <= b0 && (p1 <= p0 || b1 < b0 || b0 == 0.0)
            })
        })
    });
    record(
        "battery vs packets",
        battery_ok,
        "non-increasing, falls whenever packets are sent".into(),
    );

    // power per usage class
    let runs: Vec<_> = seeds()
        .par_iter()
        .map(|&seed| {
            let mut c = config(&depleting);
            c.seed = seed;
            run_scenario(&c).expect("scenario runs").metrics
        })
        .collect();
    let med = |f: fn(&visnet::scenario::MetricsReport) -> f64| median(&runs.iter().map(f).collect::<Vec<_>>());
    let power = [
        med(|m| m.power_day_noncritical_mw),
        med(|m| m.power_day_critical_mw),
        med(|m| m.power_night_mw),
    ];
    record(
        "power by class",
        power.iter().all(|p| p.is_finite()) && power[2] > power[1] && power[1] > power[0],
        format!("noncritical,critical,night = {}", show(&power)),
    );

    // dropping rate against active node count
    let connected = [
        ("comm_radius_m", "100"),
        ("duty_sleep_ms", "0"),
        ("node_battery_mv", "1000"),
    ];
    let nums: Vec<String> = (5..=15).map(|n| n.to_string()).collect();
    let mut by_count = config(&connected);
    // every sensor one hop from every other, so path length follows the itinerary
    for (k, v) in [
        ("area_width_m", "60"),
        ("area_height_m", "60"),
        ("threshold_pct", "30"),
        ("active_fraction", "1"),
        ("days", "10"),
    ] {
        by_count.set(k, v).expect("valid setting");
    }
    let t = sweep_seeds(&by_count, "num_nodes", &nums, &seeds()).expect("sweep runs");
    let drop = series(&t, "dropping_rate");
    record("drop vs node count", non_decreasing(&drop), show(&drop));

    let mut by_th = config(&connected);
    for (k, v) in [("days", "10"), ("num_nodes", "10")] {
        by_th.set(k, v).expect("valid setting");
    }
    let t = sweep_seeds(&by_th, "threshold_pct", &strings(&["50", "60", "70"]), &seeds()).expect("sweep runs");
    let drop = series(&t, "dropping_rate");
    record("drop vs threshold", non_increasing(&drop), show(&drop));

    // fusion time against active node count, low and high resolution
    let mut timing = by_count.clone();
    for (k, v) in [("days", "3"), ("sensing_times", "08:00,10:00,12:00,14:00,16:00")] {
        timing.set(k, v).expect("valid setting");
    }
    let mut low = timing.clone();
    low.set("critical_fraction", "0").expect("valid setting");
    let mut high = timing;
    high.set("critical_fraction", "1").expect("valid setting");
    let low_t = series(
        &sweep_seeds(&low, "num_nodes", &nums, &seeds()).expect("sweep runs"),
        "fusion_time_ms",
    );
    let high_t = series(
        &sweep_seeds(&high, "num_nodes", &nums, &seeds()).expect("sweep runs"),
        "fusion_time_ms",
    );
    record(
        "low-res fusion time vs node count",
        non_decreasing(&low_t),
        show(&low_t),
    );
    record(
        "high-res fusion time vs node count",
        non_decreasing(&high_t),
        show(&high_t),
    );
    record(
        "high-res slower than low-res",
        low_t.iter().zip(&high_t).all(|(l, h)| h > l),
        format!("{} pointwise", low_t.len()),
    );

    // throughput and overhead against image size, overhead against code size
    let sizing = config(&[("comm_radius_m", "100"), ("node_battery_mv", "1000"), ("days", "3")]);
    let t = sweep_seeds(&sizing, "image_size", &strings(&["32", "64", "128", "256"]), &seeds()).expect("sweep runs");
    let tp = series(&t, "throughput");
    let ov = series(&t, "agent_overhead");
    record("throughput vs image size", non_increasing(&tp), show(&tp));
    record("overhead vs image size", strictly_decreasing(&ov), show(&ov));
    let t = sweep_seeds(&sizing, "f_code_bytes", &strings(&["4096", "8192", "12288"]), &seeds()).expect("sweep runs");
    let ov = series(&t, "agent_overhead");
    record("overhead vs code size", strictly_increasing(&ov), show(&ov));

    let elapsed = started.elapsed();
    let fast = elapsed < Duration::from_secs(300);
    for line in &lines {
        println!("  {line}");
    }
    outcome(
        pass && fast,
        format!(
            "{} trends, sweep suite {:.1}s (limit 300s)",
            lines.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let c = ScenarioConfig {
        seed: 7,
        ..ScenarioConfig::default()
    };
    let dirs = [
        tempfile::tempdir().expect("temp dir"),
        tempfile::tempdir().expect("temp dir"),
    ];
    for d in &dirs {
        let out = run_scenario(&c).expect("scenario runs");
        write_run(&out, d.path()).expect("outputs written");
    }
    let mut differing = Vec::new();
    for file in ["metrics.csv", "events.tsv", "battery.csv", "agents.tsv"] {
        let a = std::fs::read(dirs[0].path().join(file)).expect("file exists");
        let b = std::fs::read(dirs[1].path().join(file)).expect("file exists");
        if a != b || a.is_empty() {
            differing.push(file);
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            "metrics.csv, events.tsv, battery.csv and agents.tsv byte-identical for seed 7".to_string()
        } else {
            format!("differing: {}", differing.join(","))
        },
    )
}

/// Checks that every flood forwards each message at most once per node.
fn flood_deduplicated(report: &FloodReport) -> bool {
    let mut forwarders = BTreeSet::new();
    report
        .forwards
        .iter()
        .all(|&(n, _)| forwarders.insert(n) && report.reached(n))
        && report.transmissions == report.forwards.len()
        && report.copies_received == report.hops.len() - 1 + report.duplicates
        && report.copies_sent == report.copies_received + report.dropped_asleep + report.dropped_loss
}

fn random_frame(rng: &mut ChaCha8Rng, size: usize, spread: u32) -> Image {
    Image::from_fn(size, size, BitDepth::Eight, |_, _| rng.gen_range(0..spread)).expect("valid image")
}

/// Each node's CA/NMA actions must read as repeated `sense [interpret [report]]`.
fn node_order_ok(log: &AgentLog) -> bool {
    let mut last: BTreeMap<usize, &str> = BTreeMap::new();
    for e in &log.entries {
        if !matches!(e.agent, AgentKind::ContextAgent | AgentKind::NodeManager) {
            continue;
        }
        let prev = last.get(&e.node).copied().unwrap_or("start");
        let ok = match e.action {
            "sense" => matches!(prev, "start" | "interpret" | "report"),
            "interpret" => prev == "sense",
            "report" => prev == "interpret",
            _ => true,
        };
        if !ok {
            return false;
        }
        if matches!(e.action, "sense" | "interpret" | "report") {
            last.insert(e.node, e.action);
        }
    }
    true
}

/// Agent actions after a dispatch must read `migrate visit|skip ... return dispose`,
/// with each visit at the stop just migrated to.
fn agent_order_ok(entries: &[(&'static str, usize)]) -> bool {
    let Some((&("dispatch", _), rest)) = entries.split_first() else {
        return false;
    };
    let n = rest.len();
    if n < 2 || rest[n - 1].0 != "dispose" || !matches!(rest[n - 2].0, "return" | "return-failed") {
        return false;
    }
    let mut at = None;
    for &(action, node) in &rest[..n - 2] {
        match action {
            "migrate" => at = Some(node),
            "visit" if at == Some(node) => at = None,
            "visit" => return false,
            "skip" => at = None,
            _ => return false,
        }
    }
    true
}

fn schedule(case: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA6E7 ^ case);
    let n = rng.gen_range(2..=7);
    let mut positions = vec![Position { x: 0.0, y: 0.0 }];
    positions.extend((0..n).map(|_| Position {
        x: rng.gen_range(0.0..30.0),
        y: rng.gen_range(0.0..30.0),
    }));
    let mut topo = NetworkTopology::from_positions(&positions, rng.gen_range(10.0..25.0)).map_err(|e| e.to_string())?;
    let loss = rng.gen_range(0.0..0.3);
    let mut channel = Channel::new(
        ChannelConfig {
            loss: LossModel::Bernoulli(loss),
            ..ChannelConfig::lossless()
        },
        case,
    );
    let energy = EnergyConfig::default();
    let mut sink = SinkManager::new(0, positions[0], 4e6);
    let mut nodes: Vec<SensorNode> = (0..=n)
        .map(|i| SensorNode::new(i, positions[i], rng.gen_range(20.0..90.0), 4e6))
        .collect();
    let mut log = AgentLog::default();
    let params = InterpretParams {
        threshold_pct: rng.gen_range(5.0..60.0),
        ..InterpretParams::default()
    };
    let mut t = 0u64;
    let mut agent_entries: Vec<Vec<(&'static str, usize)>> = Vec::new();
    let rounds = rng.gen_range(1..=4);
    for round in 0..=rounds {
        channel.begin_epoch(round);
        t += 1_000_000;
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(&mut rng);
        for &id in &order {
            let node = &mut nodes[id];
            if node.is_dead() {
                if ca_sense(
                    node,
                    random_frame(&mut rng, 16, 4),
                    t,
                    UsageClass::DayNoncritical,
                    &energy,
                    &mut log,
                )
                .is_ok()
                {
                    return Err(format!("dead node {id} sensed"));
                }
                continue;
            }
            // out-of-order calls are rejected without side effects
            if rng.gen_bool(0.2) && nma_report(node, &mut sink, &topo, &mut channel, t, &mut log).is_ok() {
                return Err(format!("node {id} reported before interpreting"));
            }
            let spread = if round == 0 { 4 } else { 1 << rng.gen_range(1..=8) };
            ca_sense(
                node,
                random_frame(&mut rng, 16, spread),
                t,
                UsageClass::DayNoncritical,
                &energy,
                &mut log,
            )
            .map_err(|e| e.to_string())?;
            if rng.gen_bool(0.2)
                && ca_sense(
                    node,
                    random_frame(&mut rng, 16, 4),
                    t,
                    UsageClass::DayNoncritical,
                    &energy,
                    &mut log,
                )
                .is_ok()
            {
                return Err(format!("node {id} sensed twice without interpreting"));
            }
            let verdict = nma_interpret(node, &params, &mut log).map_err(|e| e.to_string())?;
            if rng.gen_bool(0.2) && nma_interpret(node, &params, &mut log).is_ok() {
                return Err(format!("node {id} interpreted twice"));
            }
            if verdict.status == NodeStatus::Active {
                let report =
                    nma_report(node, &mut sink, &topo, &mut channel, t, &mut log).map_err(|e| e.to_string())?;
                if !flood_deduplicated(&report) {
                    return Err(format!("flood from {id} forwarded a message twice: {report:?}"));
                }
            }
        }

        let expected: BTreeSet<usize> = sink.blackboard.active_nodes().map(|r| r.node_id).collect();
        let mark = log.entries.len();
        let trigger = DispatchTrigger::Context(ContextKind::GeneralObject);
        let mut agent = match sma_dispatch(&mut sink, trigger, &ProfileSet::default(), &topo, t, &mut log) {
            Ok(agent) => agent,
            Err(AgencyError::NoActiveNodes) if expected.is_empty() => continue,
            Err(e) => return Err(e.to_string()),
        };
        if sma_dispatch(&mut sink, trigger, &ProfileSet::default(), &topo, t, &mut log).is_ok() {
            return Err("second agent dispatched while one is out".into());
        }
        let stops: BTreeSet<usize> = agent.itinerary.iter().copied().collect();
        if stops != expected || stops.len() != agent.itinerary.len() {
            return Err(format!(
                "itinerary {:?} does not cover {expected:?} once",
                agent.itinerary
            ));
        }
        // kill some stops before the agent arrives
        for &id in &agent.itinerary {
            if rng.gen_bool(0.15) {
                nodes[id].energy.battery_mv = 0.0;
                topo.set_alive(id, false).map_err(|e| e.to_string())?;
            }
        }
        let mut clock = t;
        loop {
            let Some(next) = agent.remaining().next() else {
                break;
            };
            if rng.gen_bool(0.1) && fa_return(&mut agent, &mut sink, &topo, &mut channel, clock, &mut log).is_ok() {
                return Err("agent returned with stops left".into());
            }
            match fa_migrate(&mut agent, &topo, &mut channel, next, clock, &mut log) {
                Ok(m) => {
                    clock = m.record.finished_at;
                    if fa_visit(&mut agent, &mut nodes[next], clock, &energy, &mut log).is_err() {
                        fa_skip(&mut agent, next, "unavailable", clock, &mut log).map_err(|e| e.to_string())?;
                    } else if fa_visit(&mut agent, &mut nodes[next], clock, &energy, &mut log).is_ok() {
                        return Err(format!("node {next} visited twice"));
                    }
                }
                Err(_) => fa_skip(&mut agent, next, "unreachable", clock, &mut log).map_err(|e| e.to_string())?,
            }
        }
        fa_return(&mut agent, &mut sink, &topo, &mut channel, clock, &mut log).map_err(|e| e.to_string())?;
        for &id in &agent.skipped {
            sink.blackboard.mark_served(id);
        }
        if !agent.visited.is_disjoint(&agent.skipped) {
            return Err("a stop was both visited and skipped".into());
        }
        let served: BTreeSet<usize> = agent.visited.union(&agent.skipped).copied().collect();
        if served != stops {
            return Err(format!("served {served:?} but itinerary was {stops:?}"));
        }
        let entries: Vec<(&'static str, usize)> = log.entries[mark..]
            .iter()
            .filter(|e| matches!(e.agent, AgentKind::FusingAgent | AgentKind::SinkManager))
            .filter(|e| e.action != "dispatch-refused")
            .map(|e| (e.action, e.node))
            .collect();
        let visits = entries.iter().filter(|(a, _)| *a == "visit").count();
        if visits != agent.visited.len() {
            return Err(format!(
                "{visits} visit entries for {} visited stops",
                agent.visited.len()
            ));
        }
        agent_entries.push(entries);
    }
    if !node_order_ok(&log) {
        return Err("node actions out of sense, interpret, report order".into());
    }
    if let Some(bad) = agent_entries.iter().find(|e| !agent_order_ok(e)) {
        return Err(format!("agent actions out of order: {bad:?}"));
    }
    Ok(())
}

fn protocol() -> Outcome {
    let results: Vec<(u64, std::result::Result<(), String>)> = (0..1000u64)
        .into_par_iter()
        .map(|case| (case, schedule(case)))
        .collect();
    let failures: Vec<_> = results.iter().filter(|(_, r)| r.is_err()).collect();
    match failures.first() {
        None => outcome(
            true,
            "1000 randomized schedules: ordering, single visit and flood dedup hold",
        ),
        Some((case, Err(why))) => outcome(
            false,
            format!("{} of 1000 schedules failed; case {case}: {why}", failures.len()),
        ),
        Some(_) => unreachable!(),
    }
}
