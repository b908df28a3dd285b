//! The effective model on its own: Bell state at tau1, echo cancellation of the
//! motion-dependent term, and the phase it leaves when the echo is off.

use lightshift::analysis::{bell_overlap_rho, BellSign};
use lightshift::effective::{b_phase_error, echo_cancellation_check, gate_time, ideal_internal_propagator};
use lightshift::hilbert::kets;
use lightshift::model::ChainConfig;

fn main() -> lightshift::Result<()> {
    let cfg = ChainConfig::thermal_benchmark();
    let tau = gate_time(&cfg)?;
    let out = ideal_internal_propagator(&cfg, tau, true)? * kets::pair(&kets::plus(), &kets::minus());
    let rho = out * out.adjoint();
    println!(
        "at tau1 = {tau:.2}: |<b+|psi>|^2 = {:.6}, |<b-|psi>|^2 = {:.6}",
        bell_overlap_rho(&rho, BellSign::Plus),
        bell_overlap_rho(&rho, BellSign::Minus)
    );

    for f in [1.0 / 200.0, 1.0 / 50.0, 1.0 / 10.0] {
        let r = echo_cancellation_check(&cfg.clone().with_echo(f))?;
        println!("echo F = {f:.4}: residual after two inversions {:.2e}", r.max);
    }

    let no_echo = cfg.clone().with_echo(0.0);
    println!("\nwithout echo, |++>/|--> relative phase (measured, predicted):");
    for occ in [[0, 0], [1, 0], [3, 1]] {
        let (m, p) = b_phase_error(&no_echo, 100.0, &occ)?;
        println!("  n = {occ:?}: {m:+.5} {p:+.5}");
    }
    Ok(())
}
