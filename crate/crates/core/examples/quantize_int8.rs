//! Post-training int8 quantization: calibrate activation ranges, quantize
//! kernels, and compare int8 against float scores.
//!
//! cargo run --release --example quantize_int8 -- [arch] [seed]

use std::env;

use avtp_ids::features::random_windows;
use avtp_ids::nn::{compress, save_model, Architecture, Scratch, DEFAULT_INPUT};

fn main() -> anyhow::Result<()> {
    let mut args = env::args().skip(1);
    let arch: Architecture = args.next().as_deref().unwrap_or("student").parse()?;
    let seed: u64 = args.next().map_or(Ok(0), |s| s.parse())?;

    let float = arch.build(DEFAULT_INPUT, seed)?;
    let calibration = random_windows(128, 44, seed ^ 1);
    let int8 = compress::quantize_model(&float, &calibration)?;
    for (i, l) in int8.layers().iter().enumerate() {
        if let (Some(w), Some(x)) = (l.weights(), l.input_quant()) {
            let p = w.quant_params().unwrap();
            println!(
                "layer {i:>2} {:?}: weight scale {:.3e}, input scale {:.3e} zero point {}",
                l.kind(),
                p.scale,
                x.scale,
                x.zero_point
            );
        }
    }
    println!(
        "model file {} bytes float, {} bytes int8",
        save_model(&float).len(),
        save_model(&int8).len()
    );

    let mut s = Scratch::new();
    let inputs = random_windows(200, 44, seed ^ 2);
    let (mut agree, mut worst) = (0, 0f32);
    for x in &inputs {
        let a = float.forward_with(x, &mut s)?;
        let b = int8.forward_int8_with(x, &mut s)?;
        agree += ((a >= 0.5) == (b >= 0.5)) as usize;
        worst = worst.max((a - b).abs());
    }
    println!(
        "{arch}: decision agreement {agree}/{}, max score difference {worst:.2e}",
        inputs.len()
    );
    Ok(())
}
