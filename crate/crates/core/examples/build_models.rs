//! Builds the three detector architectures, prints their layer shapes and
//! writes them as model files.
//!
//! cargo run --example build_models -- [out_dir] [seed]

use std::path::PathBuf;
use std::{env, fs};

use avtp_ids::features::random_windows;
use avtp_ids::nn::{load_model, save_model, Architecture, DEFAULT_INPUT};

fn main() -> anyhow::Result<()> {
    let mut args = env::args().skip(1);
    let dir = args.next().map(PathBuf::from).unwrap_or_else(env::temp_dir);
    let seed: u64 = args.next().map_or(Ok(0), |s| s.parse())?;
    let x = &random_windows(1, 44, seed)[0];

    for arch in Architecture::ALL {
        let m = arch.build(DEFAULT_INPUT, seed)?;
        println!("{arch}: {} parameters", m.parameter_count());
        for (layer, shape) in m.layers().iter().zip(&m.shapes()[1..]) {
            println!("  {:<12} -> {shape}", format!("{:?}", layer.kind()));
        }
        let path = dir.join(format!("{arch}.aeid"));
        let bytes = save_model(&m);
        fs::write(&path, &bytes)?;
        let back = load_model(&fs::read(&path)?, arch.name())?;
        println!(
            "  wrote {} ({} bytes); score {:.6} before, {:.6} after reload",
            path.display(),
            bytes.len(),
            m.forward(x)?,
            back.forward(x)?
        );
    }
    Ok(())
}
