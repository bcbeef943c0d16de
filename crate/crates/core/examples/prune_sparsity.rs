//! Magnitude pruning: sparsity targets, measured sparsity and equivalence of
//! sparse and dense storage.
//!
//! cargo run --release --example prune_sparsity -- [arch]

use std::env;

use avtp_ids::features::random_windows;
use avtp_ids::nn::{compress, Architecture, Scratch, DEFAULT_INPUT};

fn main() -> anyhow::Result<()> {
    let arch: Architecture = env::args().nth(1).as_deref().unwrap_or("baseline").parse()?;
    let model = arch.build(DEFAULT_INPUT, 3)?;
    let inputs = random_windows(50, 44, 4);
    let mut s = Scratch::new();

    println!("{:>8} {:>10} {:>16} {:>18}", "target", "measured", "max |sparse-dense|", "max |pruned-full|");
    for target in [0.0, 0.5, 0.7, 0.9] {
        let sparse = compress::prune_magnitude(&model, target)?;
        let dense = compress::densify(&sparse);
        let (mut storage_gap, mut drift) = (0f32, 0f32);
        for x in &inputs {
            let a = sparse.forward_with(x, &mut s)?;
            storage_gap = storage_gap.max((a - dense.forward_with(x, &mut s)?).abs());
            drift = drift.max((a - model.forward_with(x, &mut s)?).abs());
        }
        println!(
            "{target:>8.2} {:>10.4} {storage_gap:>16.2e} {drift:>18.4}",
            sparse.sparsity()?
        );
    }
    Ok(())
}
