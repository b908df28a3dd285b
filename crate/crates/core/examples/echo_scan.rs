//! How the echo frequency controls the motion-dependent phase: smallest
//! reference overlap from (|++> + |-->)/sqrt 2 over 300 periods.

use lightshift::analysis::{echo_frequency_scan, plus_plus_minus_minus};
use lightshift::hamiltonians::HamiltonianKind;
use lightshift::model::ChainConfig;

fn main() -> lightshift::Result<()> {
    let cfg = ChainConfig::thermal_benchmark().with_truncation(&[6, 3]);
    let freqs = [0.0, 1.0 / 400.0, 1.0 / 200.0, 1.0 / 100.0, 1.0 / 50.0, 1.0 / 25.0, 1.0 / 10.0];
    let rows = echo_frequency_scan(&cfg, &freqs, &plus_plus_minus_minus(), &[3, 1], HamiltonianKind::Ld1, 300.0, 1.0)?;
    println!("     F     min overlap   final");
    for r in rows {
        println!("{:8.4}   {:.4}        {:.4}", r.freq, r.min_ref_overlap, r.final_ref_overlap);
    }
    Ok(())
}
