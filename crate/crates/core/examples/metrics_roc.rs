//! Point metrics, ROC curve and AUROC for a set of scored windows.
//!
//! cargo run --example metrics_roc -- [threshold]

use std::env;

use avtp_ids::ingest::Label;
use avtp_ids::metrics::MetricsReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let threshold: f64 = env::args().nth(1).map_or(Ok(0.5), |s| s.parse())?;
    // An imperfect detector: injected windows tend to score higher.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let labels: Vec<Label> = (0..500)
        .map(|i| if i % 5 == 0 { Label::Injected } else { Label::Benign })
        .collect();
    let scores: Vec<f64> = labels
        .iter()
        .map(|l| {
            let centre = if *l == Label::Injected { 0.75 } else { 0.3 };
            (centre + rng.gen_range(-0.3..0.3f64)).clamp(0.0, 1.0)
        })
        .collect();

    let r = MetricsReport::evaluate(&labels, &scores, threshold)?;
    println!(
        "threshold {threshold}: accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4} auroc {:.4}",
        r.accuracy,
        r.precision,
        r.recall,
        r.f1,
        r.auroc.unwrap_or(f64::NAN)
    );
    println!("confusion {:?}", r.confusion);
    let csv = r.roc_csv();
    let lines: Vec<&str> = csv.lines().collect();
    println!("ROC: {} points; first and last:", lines.len() - 1);
    for l in lines.iter().take(4).chain(lines.iter().rev().take(2).rev()) {
        println!("  {l}");
    }
    Ok(())
}
