//! Gate time over a grid of drive strengths and Lamb-Dicke parameters, marking
//! where the detuning condition holds. Prints the fastest valid settings.

use lightshift::analysis::gate_time_scan;

fn main() {
    let omegas: Vec<f64> = (0..66).map(|k| 1.05 + 0.01 * k as f64).collect();
    let etas: Vec<f64> = (0..46).map(|k| 0.005 + 0.001 * k as f64).collect();
    let rows = gate_time_scan(&omegas, &etas, 10.0);
    let mut ok: Vec<_> = rows.iter().filter(|r| r.pass).collect();
    ok.sort_by(|a, b| a.tau1.unwrap().total_cmp(&b.tau1.unwrap()));
    println!("{} of {} grid points satisfy the detuning condition", ok.len(), rows.len());
    println!(" Omega    eta    tau1   margin");
    for r in ok.iter().take(8) {
        println!(" {:.2}  {:.3}  {:7.1}  {:.2}", r.omega, r.eta, r.tau1.unwrap(), r.margin.unwrap());
    }
    let bench = gate_time_scan(&[1.5], &[0.025], 10.0);
    println!("\nbenchmark point: {:?}", bench[0]);
}
