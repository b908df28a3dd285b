//! Entangling power at 2 tau1: ideal propagator, then the first-order
//! Hamiltonian from the motional ground state.

use lightshift::analysis::{cnot_equivalence_report, simulate_gate};
use lightshift::hamiltonians::HamiltonianKind;
use lightshift::model::ChainConfig;

fn main() -> lightshift::Result<()> {
    let cfg = ChainConfig::thermal_benchmark();
    let mut report = cnot_equivalence_report(&cfg)?;
    report.simulated = Some(simulate_gate(&cfg, HamiltonianKind::Ld1, &[0, 0], 5.0)?);
    let sim = report.simulated.as_ref().unwrap();
    println!("tau1 = {:.2}", report.tau1);
    println!("inputs          ee      eg      ge      gg");
    println!("ideal       {:?}", report.ideal_concurrences.map(|c| (c * 1e4).round() / 1e4));
    println!("simulated   {:?}", sim.concurrences.map(|c| (c * 1e4).round() / 1e4));
    println!("Bell overlap from |+->: {:.4} at tau1, peak {:.4} at t = {}", sim.overlap_at_tau1, sim.peak_overlap, sim.peak_time);
    Ok(())
}
