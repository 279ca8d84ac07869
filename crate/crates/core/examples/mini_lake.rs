//! Write the synthetic mini-lake inputs and config to a directory.
//!
//! `cargo run -p scilake-core --example mini_lake -- /tmp/demo`

use std::path::PathBuf;

use scilake::synth::{generate, SynthOptions};

fn main() -> scilake::Result<()> {
    let dir: PathBuf = std::env::args_os().nth(1).map(Into::into).unwrap_or_else(|| "mini-lake".into());
    let lake = generate(&dir, &SynthOptions::default())?;
    println!("{}", lake.config_path.display());
    Ok(())
}
