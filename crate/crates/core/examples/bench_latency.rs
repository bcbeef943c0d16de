//! Single-sample latency, throughput and samples/s/W for every model
//! variant, plus the real-time verdict.
//!
//! cargo run --release --example bench_latency -- [tdp_watts] [host]

use std::env;

use avtp_ids::bench::{self, BenchPlan, BenchRow, MonotonicClock, REALTIME_THRESHOLD_US};
use avtp_ids::cli::builtin_variants;
use avtp_ids::features::random_windows;

fn main() -> anyhow::Result<()> {
    let mut args = env::args().skip(1);
    let tdp: f64 = args.next().map_or(Ok(65.0), |s| s.parse())?;
    let host = args.next().unwrap_or_else(|| "local".into());
    let inputs = random_windows(64, 44, 0);
    // A short budget per variant; the command-line tool defaults to 10,000 calls.
    let plan = BenchPlan {
        warmup: 20,
        min_calls: 500,
        max_time: std::time::Duration::from_secs(2),
    };
    let mut rows = Vec::new();
    for m in builtin_variants(44, 0)? {
        let stats = bench::time_planned(&m, &inputs, plan, &mut MonotonicClock::default())?;
        rows.push(BenchRow::new(m.name(), &host, stats, tdp, REALTIME_THRESHOLD_US)?);
    }
    print!("{}", bench::render_report(&rows, REALTIME_THRESHOLD_US));

    println!("\nreference arithmetic:");
    for (mean_us, tdp) in [(849.78, 10.0), (727.51, 10.0)] {
        let r = bench::EfficiencyRow::from_mean_us(mean_us, tdp)?;
        println!(
            "  {mean_us} us -> {:.2} samples/s -> {:.2} samples/s/W at {tdp} W",
            r.throughput_sps, r.efficiency_spspw
        );
    }
    Ok(())
}
