//! Deterministic evolution from |+-> with the motion in a Fock state, first
//! order and all orders in the Lamb-Dicke parameters.

use lightshift::analysis::bell_overlaps;
use lightshift::dynamics::{integrate_schrodinger, uniform_grid, IntegratorOptions};
use lightshift::hamiltonians::{build, HamiltonianKind};
use lightshift::hilbert::{kets, StateVector};
use lightshift::model::ChainConfig;

fn main() -> lightshift::Result<()> {
    let cfg = ChainConfig::thermal_benchmark().without_heating();
    let fock = [1, 0];
    let grid = uniform_grid(600.0, 50.0);
    let phi = kets::pair(&kets::plus(), &kets::minus());
    let mut curves = Vec::new();
    for kind in [HamiltonianKind::Ld1, HamiltonianKind::Full] {
        let ham = build(kind, &cfg)?;
        let psi0 = StateVector::product(ham.layout(), &phi, &fock)?;
        let states = integrate_schrodinger(ham.as_ref(), &psi0, &grid, &IntegratorOptions::default())?;
        curves.push(states.iter().map(|s| bell_overlaps(s).1).collect::<Vec<_>>());
    }
    println!("     t   beta- (LD1)   beta- (all orders)");
    for (i, t) in grid.iter().enumerate() {
        println!("{t:6.0}   {:.6}      {:.6}", curves[0][i], curves[1][i]);
    }
    Ok(())
}
