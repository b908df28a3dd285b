//! Writes the benchmark configuration as JSON, reads it back, and applies a
//! dotted-key override the way the command line does.

use lightshift::cli::load_config;
use lightshift::model::ChainConfig;

fn main() -> lightshift::Result<()> {
    let path = std::env::temp_dir().join("lightshift_benchmark.json");
    let cfg = ChainConfig::thermal_benchmark();
    std::fs::write(&path, cfg.to_json_pretty())?;
    println!("{}", cfg.to_json_pretty());

    let back = ChainConfig::load(&path)?;
    assert_eq!(back, cfg);
    let tweaked = load_config(Some(&path), &[("drive.omega".into(), "1.4".into())])?;
    println!("with --drive.omega=1.4: tau1 = {:.2}", lightshift::effective::gate_time(&tweaked)?);
    Ok(())
}
