//! Single-sample latency measurement and the derived throughput,
//! energy-efficiency and real-time figures.
//!
//! Every timed call is one `forward` on one window (batch size 1), measured
//! on the calling thread with a monotonic clock. Averages are the headline
//! figure; median, p95 and extremes are reported alongside because
//! microsecond timings are noisy.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::features::{FeatureMatrix, WindowBuilder};
use crate::ingest::{extract_avtp, Label, RawPacket};
use crate::nn::{Model, NnError, Scratch};

pub const REALTIME_THRESHOLD_US: f64 = 1000.0;
pub const DEFAULT_WARMUP: usize = 100;
pub const DEFAULT_MIN_CALLS: usize = 10_000;
pub const DEFAULT_MAX_TIME: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no inputs to time")]
    EmptyInputs,
    #[error("reps must be at least 1")]
    ZeroReps,
    #[error("mean latency must be positive, got {0}")]
    NonPositive(f64),
    #[error("TDP must be positive, got {0}")]
    NonPositiveTdp(f64),
    #[error(transparent)]
    Model(#[from] NnError),
}

/// Source of monotonic timestamps, in nanoseconds.
pub trait Clock {
    fn now_ns(&mut self) -> u64;
}

#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl Default for MonotonicClock {
    fn default() -> Self {
        MonotonicClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for MonotonicClock {
    fn now_ns(&mut self) -> u64 {
        self.origin.elapsed().as_nanos() as u64
    }
}

/// Replays a fixed list of per-call durations; for testing the statistics.
#[derive(Debug, Clone)]
pub struct ScriptedClock {
    durations_ns: Vec<u64>,
    now: u64,
    reads: usize,
}

impl ScriptedClock {
    pub fn new(durations_ns: Vec<u64>) -> Self {
        ScriptedClock {
            durations_ns,
            now: 0,
            reads: 0,
        }
    }
}

impl Clock for ScriptedClock {
    /// Reads come in start/stop pairs; each stop advances by the next
    /// scripted duration (cycling).
    fn now_ns(&mut self) -> u64 {
        if self.reads % 2 == 1 && !self.durations_ns.is_empty() {
            let k = (self.reads / 2) % self.durations_ns.len();
            self.now += self.durations_ns[k];
        }
        self.reads += 1;
        self.now
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyStats {
    pub mean_us: f64,
    pub median_us: f64,
    pub p95_us: f64,
    pub min_us: f64,
    pub max_us: f64,
    pub samples_measured: usize,
    pub warmup_discarded: usize,
}

impl LatencyStats {
    pub fn from_durations_us(mut d: Vec<f64>, warmup_discarded: usize) -> Option<Self> {
        if d.is_empty() {
            return None;
        }
        d.sort_by(f64::total_cmp);
        let n = d.len();
        let median_us = if n % 2 == 1 {
            d[n / 2]
        } else {
            (d[n / 2 - 1] + d[n / 2]) / 2.0
        };
        // Nearest-rank percentile.
        let p95_us = d[((0.95 * n as f64).ceil() as usize).clamp(1, n) - 1];
        // Offsets from the minimum keep a constant trace's mean exact.
        let mean_us = d[0] + d.iter().map(|v| v - d[0]).sum::<f64>() / n as f64;
        Some(LatencyStats {
            mean_us,
            median_us,
            p95_us,
            min_us: d[0],
            max_us: d[n - 1],
            samples_measured: n,
            warmup_discarded,
        })
    }
}

/// How many calls to time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchPlan {
    pub warmup: usize,
    /// Stop once this many calls are timed...
    pub min_calls: usize,
    /// ...or once this much time has been spent, whichever comes first.
    /// At least one call is always timed.
    pub max_time: Duration,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            warmup: DEFAULT_WARMUP,
            min_calls: DEFAULT_MIN_CALLS,
            max_time: DEFAULT_MAX_TIME,
        }
    }
}

/// Times `reps × inputs.len()` single-window inferences after `warmup`
/// untimed ones.
pub fn time_inference(
    model: &Model,
    inputs: &[FeatureMatrix],
    warmup: usize,
    reps: usize,
) -> Result<LatencyStats, BenchError> {
    time_inference_with(model, inputs, warmup, reps, &mut MonotonicClock::default())
}

pub fn time_inference_with(
    model: &Model,
    inputs: &[FeatureMatrix],
    warmup: usize,
    reps: usize,
    clock: &mut dyn Clock,
) -> Result<LatencyStats, BenchError> {
    if inputs.is_empty() {
        return Err(BenchError::EmptyInputs);
    }
    if reps == 0 {
        return Err(BenchError::ZeroReps);
    }
    let plan = BenchPlan {
        warmup,
        min_calls: reps * inputs.len(),
        max_time: Duration::MAX,
    };
    time_planned(model, inputs, plan, clock)
}

/// Times calls according to `plan`, cycling through `inputs`.
pub fn time_planned(
    model: &Model,
    inputs: &[FeatureMatrix],
    plan: BenchPlan,
    clock: &mut dyn Clock,
) -> Result<LatencyStats, BenchError> {
    if inputs.is_empty() {
        return Err(BenchError::EmptyInputs);
    }
    let mut scratch = Scratch::new();
    for x in inputs.iter().cycle().take(plan.warmup) {
        black_box(model.infer(black_box(x), &mut scratch)?);
    }
    let budget_ns = plan.max_time.as_nanos().min(u64::MAX as u128) as u64;
    let mut durations = Vec::with_capacity(plan.min_calls.min(1 << 20));
    let mut spent = 0u64;
    for x in inputs.iter().cycle() {
        let t0 = clock.now_ns();
        let y = model.infer(black_box(x), &mut scratch)?;
        let t1 = clock.now_ns();
        black_box(y);
        let d = t1.saturating_sub(t0);
        spent = spent.saturating_add(d);
        durations.push(d as f64 / 1000.0);
        if durations.len() >= plan.min_calls.max(1) || spent >= budget_ns {
            break;
        }
    }
    Ok(LatencyStats::from_durations_us(durations, plan.warmup).expect("at least one call"))
}

/// Per-window latency from raw frame bytes to score: header extraction,
/// delta row, window assembly and inference. Captures are parsed up front.
pub fn time_pipeline(
    model: &Model,
    packets: &[RawPacket],
    warmup: usize,
    clock: &mut dyn Clock,
) -> Result<LatencyStats, BenchError> {
    let w = model.input_shape()[0];
    let mut scratch = Scratch::new();
    let mut run = |clock: &mut dyn Clock| -> Result<Vec<f64>, BenchError> {
        let mut builder = WindowBuilder::new(w).map_err(|_| BenchError::EmptyInputs)?;
        let mut out = Vec::new();
        for (i, p) in packets.iter().enumerate() {
            let t0 = clock.now_ns();
            let mut scored = false;
            if let Ok(pkt) = extract_avtp(p, Label::Benign, i as u64) {
                if let Some(win) = builder.push(pkt) {
                    black_box(model.infer(&win, &mut scratch)?);
                    scored = true;
                }
            }
            let t1 = clock.now_ns();
            if scored {
                out.push(t1.saturating_sub(t0) as f64 / 1000.0);
            }
        }
        Ok(out)
    };
    // Warm up with whole passes over the capture.
    let mut warmed = 0;
    while warmed < warmup {
        let n = run(clock)?.len();
        if n == 0 {
            break;
        }
        warmed += n;
    }
    LatencyStats::from_durations_us(run(clock)?, warmed).ok_or(BenchError::EmptyInputs)
}

pub fn throughput(mean_us: f64) -> Result<f64, BenchError> {
    if !(mean_us > 0.0) {
        return Err(BenchError::NonPositive(mean_us));
    }
    Ok(1e6 / mean_us)
}

pub fn efficiency(throughput_sps: f64, tdp_w: f64) -> Result<f64, BenchError> {
    if !(tdp_w > 0.0) {
        return Err(BenchError::NonPositiveTdp(tdp_w));
    }
    Ok(throughput_sps / tdp_w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyRow {
    pub tdp_w: f64,
    pub throughput_sps: f64,
    pub efficiency_spspw: f64,
}

impl EfficiencyRow {
    pub fn from_mean_us(mean_us: f64, tdp_w: f64) -> Result<Self, BenchError> {
        Self::from_throughput(throughput(mean_us)?, tdp_w)
    }

    pub fn from_throughput(throughput_sps: f64, tdp_w: f64) -> Result<Self, BenchError> {
        Ok(EfficiencyRow {
            tdp_w,
            throughput_sps,
            efficiency_spspw: efficiency(throughput_sps, tdp_w)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealtimeVerdict {
    pub pass: bool,
    /// Threshold minus mean; negative when over budget.
    pub margin_us: f64,
}

/// Passes when the mean is at or below `threshold_us`.
pub fn check_realtime(stats: &LatencyStats, threshold_us: f64) -> RealtimeVerdict {
    RealtimeVerdict {
        pass: stats.mean_us <= threshold_us,
        margin_us: threshold_us - stats.mean_us,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub model: String,
    pub host: String,
    pub stats: LatencyStats,
    pub efficiency: EfficiencyRow,
    pub realtime: RealtimeVerdict,
}

impl BenchRow {
    pub fn new(
        model: &str,
        host: &str,
        stats: LatencyStats,
        tdp_w: f64,
        threshold_us: f64,
    ) -> Result<Self, BenchError> {
        Ok(BenchRow {
            model: model.to_string(),
            host: host.to_string(),
            efficiency: EfficiencyRow::from_mean_us(stats.mean_us, tdp_w)?,
            realtime: check_realtime(&stats, threshold_us),
            stats,
        })
    }

    /// `model host mean_us throughput tdp efficiency realtime_pass`, tab-separated.
    pub fn machine_line(&self) -> String {
        format!(
            "{}\t{}\t{:.2}\t{:.2}\t{}\t{:.2}\t{}",
            self.model,
            self.host,
            self.stats.mean_us,
            self.efficiency.throughput_sps,
            self.efficiency.tdp_w,
            self.efficiency.efficiency_spspw,
            self.realtime.pass
        )
    }
}

pub const MACHINE_HEADER: &str =
    "# model\thost\tmean_us\tthroughput_sps\ttdp_w\tefficiency_spspw\trealtime_pass";

/// Human-readable table followed by the machine-readable lines.
pub fn render_report(rows: &[BenchRow], threshold_us: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:>10} {:>10} {:>10} {:>10} {:>10} {:>12} {:>8} {:>12}  real-time (<= {threshold_us} us)",
        "model", "mean_us", "median_us", "p95_us", "min_us", "max_us", "samples/s", "TDP W", "samples/s/W"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<20} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>12.2} {:>8} {:>12.2}  {} ({:+.2} us, n={})",
            r.model,
            r.stats.mean_us,
            r.stats.median_us,
            r.stats.p95_us,
            r.stats.min_us,
            r.stats.max_us,
            r.efficiency.throughput_sps,
            r.efficiency.tdp_w,
            r.efficiency.efficiency_spspw,
            if r.realtime.pass { "pass" } else { "FAIL" },
            r.realtime.margin_us,
            r.stats.samples_measured,
        );
    }
    s.push('\n');
    s.push_str(MACHINE_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.machine_line());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::random_windows;
    use crate::nn::{Architecture, DEFAULT_INPUT};

    fn stats(mean_us: f64) -> LatencyStats {
        LatencyStats::from_durations_us(vec![mean_us], 0).unwrap()
    }

    #[test]
    fn single_call() {
        let m = Architecture::UltraLight.build(DEFAULT_INPUT, 0).unwrap();
        let x = random_windows(1, 44, 0);
        let s = time_inference(&m, &x, 0, 1).unwrap();
        assert_eq!(s.samples_measured, 1);
        assert_eq!(s.warmup_discarded, 0);
        assert!(matches!(time_inference(&m, &[], 0, 1), Err(BenchError::EmptyInputs)));
        assert!(matches!(time_inference(&m, &x, 0, 0), Err(BenchError::ZeroReps)));
    }

    #[test]
    fn constant_fake_clock() {
        let m = Architecture::UltraLight.build(DEFAULT_INPUT, 0).unwrap();
        let x = random_windows(3, 44, 0);
        let mut clock = ScriptedClock::new(vec![250_000]);
        let s = time_inference_with(&m, &x, 2, 4, &mut clock).unwrap();
        assert_eq!(s.samples_measured, 12);
        assert_eq!(s.warmup_discarded, 2);
        assert_eq!((s.mean_us, s.median_us, s.p95_us), (250.0, 250.0, 250.0));
        assert_eq!((s.min_us, s.max_us), (250.0, 250.0));
    }

    #[test]
    fn scripted_traces_are_reproducible() {
        let m = Architecture::UltraLight.build(DEFAULT_INPUT, 0).unwrap();
        let x = random_windows(2, 44, 0);
        let trace = vec![100_000, 300_000, 200_000, 900_000, 150_000];
        let a = time_inference_with(&m, &x, 0, 5, &mut ScriptedClock::new(trace.clone())).unwrap();
        let b = time_inference_with(&m, &x, 0, 5, &mut ScriptedClock::new(trace)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples_measured, 10);
        assert_eq!(a.median_us, 200.0);
        assert_eq!(a.max_us, 900.0);
        assert_eq!(a.p95_us, 900.0);
        assert_eq!(a.mean_us, 330.0);
    }

    #[test]
    fn plan_stops_on_time_budget() {
        let m = Architecture::UltraLight.build(DEFAULT_INPUT, 0).unwrap();
        let x = random_windows(1, 44, 0);
        let plan = BenchPlan {
            warmup: 0,
            min_calls: 1_000_000,
            max_time: Duration::from_millis(1),
        };
        let s = time_planned(&m, &x, plan, &mut ScriptedClock::new(vec![400_000])).unwrap();
        assert_eq!(s.samples_measured, 3);
    }

    #[test]
    fn throughput_and_efficiency() {
        assert_eq!(throughput(1e6).unwrap(), 1.0);
        assert!(matches!(throughput(0.0), Err(BenchError::NonPositive(_))));
        assert!(matches!(throughput(-3.0), Err(BenchError::NonPositive(_))));
        assert_eq!(efficiency(123.5, 1.0).unwrap(), 123.5);
        assert!(matches!(efficiency(1.0, 0.0), Err(BenchError::NonPositiveTdp(_))));
    }

    #[test]
    fn realtime_gate() {
        let v = check_realtime(&stats(849.78), REALTIME_THRESHOLD_US);
        assert!(v.pass);
        assert!((v.margin_us - 150.22).abs() < 1e-9);
        assert!(check_realtime(&stats(1000.0), REALTIME_THRESHOLD_US).pass);
        let v = check_realtime(&stats(17259.0), REALTIME_THRESHOLD_US);
        assert!(!v.pass);
        assert!(v.margin_us < 0.0);
    }

    #[test]
    fn report_lines() {
        let row = BenchRow::new("ultra-light", "pi4", stats(849.78), 10.0, 1000.0).unwrap();
        assert_eq!(row.machine_line(), "ultra-light\tpi4\t849.78\t1176.78\t10\t117.68\ttrue");
        let text = render_report(&[row], 1000.0);
        assert!(text.contains(MACHINE_HEADER));
        assert!(text.contains("pass"));
    }
}
