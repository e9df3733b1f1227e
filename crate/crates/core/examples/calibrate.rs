//! Runs every simulation protocol over a range of seeds and prints the
//! reports. Usage: `cargo run --release --example calibrate -- [first_seed] [last_seed]`

use clique::data::SimKind;
use clique::experiments::{run, ExperimentConfig};

fn main() -> clique::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let first = args.first().copied().unwrap_or(1);
    let last = args.get(1).copied().unwrap_or(first + 4);
    for kind in [SimKind::AndGate, SimKind::Corners, SimKind::RegInteraction, SimKind::ThreeBands] {
        for seed in first..=last {
            let out = run(&ExperimentConfig::standard(kind, seed))?;
            print!("{}", out.report.to_text());
        }
    }
    Ok(())
}
