//! Checks V H V† + i V̇ V† against the dressed-picture Hamiltonian at a few
//! times, with and without phase inversions.

use lightshift::hamiltonians::{dressed_v, dressed_v_derivative, h_dressed, h_ld1};
use lightshift::hilbert::I;
use lightshift::model::ChainConfig;

fn main() -> lightshift::Result<()> {
    for echo in [0.0, 1.0 / 50.0] {
        let cfg = ChainConfig::thermal_benchmark().with_truncation(&[4, 3]).with_echo(echo);
        let l = cfg.layout();
        let mut worst = 0.0f64;
        for k in 0..20 {
            let t = 3.7 + 51.3 * k as f64;
            let v = dressed_v(t, &cfg, &l)?;
            let vd = dressed_v_derivative(t, &cfg, &l)?;
            let lhs = v.mul(&h_ld1(t, &cfg, &l)?).mul(&v.adjoint()).add(&vd.mul(&v.adjoint()).scale(I));
            worst = worst.max(lhs.sub(&h_dressed(t, &cfg, &l)?).max_abs());
        }
        println!("F = {echo:<6} max |lhs - H'| = {worst:.2e}");
    }
    Ok(())
}
