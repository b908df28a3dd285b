//! One quantum-jump trajectory under motional heating, with its jump log.

use lightshift::analysis::standard_observables;
use lightshift::dynamics::{mcwf_trajectory, uniform_grid, JumpOperatorSet, TrajectoryOptions};
use lightshift::hamiltonians::{build, HamiltonianKind};
use lightshift::hilbert::{kets, StateVector};
use lightshift::model::ChainConfig;

fn main() -> lightshift::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let cfg = ChainConfig::thermal_benchmark().with_recommended_truncation(1100.0, 1e-3);
    let ham = build(HamiltonianKind::Ld1, &cfg)?;
    let jumps = JumpOperatorSet::from_config(&cfg, ham.layout())?;
    let phi = kets::pair(&kets::plus(), &kets::minus());
    let psi0 = StateVector::product(ham.layout(), &phi, &[1, 0])?;
    let obs = standard_observables(&cfg, &phi);
    let grid = uniform_grid(1100.0, 100.0);
    let res = mcwf_trajectory(ham.as_ref(), &psi0, &jumps, &grid, &obs, &TrajectoryOptions::default(), seed)?;

    println!("{} jumps (seed {seed}):", res.jumps.len());
    for j in &res.jumps {
        println!("  t = {:7.2}  mode {} {}", j.time, j.mode + 1, j.direction);
    }
    println!("\n     t  bell_minus  leakage");
    for (i, t) in res.times.iter().enumerate() {
        println!("{t:6.0}  {:.4}      {:.1e}", res.samples[1][i], res.samples[5][i]);
    }
    println!("leakage {:.2e}{}", res.leakage, if res.flagged { " (flagged)" } else { "" });
    Ok(())
}
