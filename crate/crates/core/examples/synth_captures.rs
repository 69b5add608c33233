//! Writes the synthetic two-app capture directory.
//!
//! `cargo run -p labelforge-core --example synth_captures -- toy/captures`

use std::path::PathBuf;

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "toy/captures".into()));
    if let Err(e) = labelforge_core::synth::write_icon_captures(&out) {
        eprintln!("{e}");
        std::process::exit(1);
    }
    println!("wrote {}", out.display());
}
