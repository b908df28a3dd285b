//! Gate frequency and Bell-state time for the benchmark crystal, and how they
//! move with the drive strength.

use lightshift::effective::build_effective;
use lightshift::model::ChainConfig;

fn main() -> lightshift::Result<()> {
    let cfg = ChainConfig::thermal_benchmark();
    let model = build_effective(&cfg)?;
    println!("omega = {:.6e}", model.omega_gate);
    println!("tau1  = {:.4}", model.gate_time()?);
    for (p, a) in model.a_coeff.iter().enumerate() {
        println!("  mode {} contributes {:+.4e} (b = {:+.4})", p + 1, a, model.b_coeff[p]);
    }

    println!("\n  Omega     tau1");
    for k in 0..7 {
        let omega = 1.1 + 0.1 * k as f64;
        let c = ChainConfig::two_ion_defaults(0.025, omega)?;
        match build_effective(&c).and_then(|m| m.gate_time()) {
            Ok(t) => println!("  {omega:.2}  {t:9.2}"),
            Err(e) => println!("  {omega:.2}  {e}"),
        }
    }
    Ok(())
}
