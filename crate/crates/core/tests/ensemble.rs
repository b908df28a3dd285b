use lightshift::analysis::{bell_overlaps, standard_observables};
use lightshift::dynamics::*;
use lightshift::hamiltonians::{build, HamiltonianKind};
use lightshift::hilbert::{kets, StateVector};
use lightshift::model::ChainConfig;

fn small(nbar: [f64; 2], gamma: [f64; 2]) -> ChainConfig {
    ChainConfig::thermal_benchmark().with_truncation(&[6, 3]).with_thermal(&nbar, &gamma)
}

fn options(t_max: f64, dt: f64) -> EnsembleOptions {
    EnsembleOptions { kind: HamiltonianKind::Ld1, grid: uniform_grid(t_max, dt), trajectory: TrajectoryOptions::default() }
}

#[test]
fn cold_closed_ensemble_equals_pure_run() {
    let cfg = small([0.0, 0.0], [0.0, 0.0]);
    let phi = kets::pair(&kets::plus(), &kets::minus());
    let obs = standard_observables(&cfg, &phi);
    let opts = options(120.0, 10.0);
    let res = run_ensemble(&cfg, &phi, 4, 11, &obs, &opts).unwrap();
    let ham = build(HamiltonianKind::Ld1, &cfg).unwrap();
    let psi0 = StateVector::product(ham.layout(), &phi, &[0, 0]).unwrap();
    let states = integrate_schrodinger(ham.as_ref(), &psi0, &opts.grid, &opts.trajectory.integrator).unwrap();
    let bm = res.curve("bell_minus").unwrap();
    for (i, s) in states.iter().enumerate() {
        assert!((bm[i] - bell_overlaps(&s.normalized()).1).abs() < 1e-12);
    }
    assert!(res.stderr.iter().flatten().all(|&e| e < 1e-12));
    assert!(res.jump_counts.iter().all(|&c| c == 0));
    assert!(res.initial_fock.iter().all(|f| f == &vec![0, 0]));
}

#[test]
fn ensemble_is_independent_of_thread_count() {
    let cfg = small([1.0, 0.1], [0.02, 0.002]);
    let phi = kets::pair(&kets::plus(), &kets::minus());
    let obs = standard_observables(&cfg, &phi);
    let opts = options(80.0, 4.0);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_ensemble(&cfg, &phi, 12, 2024, &obs, &opts).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    assert_eq!(a, run(1));
    assert!(a.jump_counts.iter().sum::<usize>() > 0);
    let c = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .unwrap()
        .install(|| run_ensemble(&cfg, &phi, 12, 2025, &obs, &opts).unwrap());
    assert_ne!(a.jump_counts, c.jump_counts);
}

#[test]
fn stderr_is_sample_deviation_over_root_n() {
    let cfg = small([1.0, 0.1], [0.02, 0.002]);
    let phi = kets::pair(&kets::plus(), &kets::minus());
    let obs = standard_observables(&cfg, &phi);
    let opts = options(60.0, 20.0);
    let runs = run_trajectories(&cfg, &phi, 9, 3, &obs, &opts).unwrap();
    let res = run_ensemble(&cfg, &phi, 9, 3, &obs, &opts).unwrap();
    let n = runs.len() as f64;
    for k in 0..obs.len() {
        for i in 0..opts.grid.len() {
            let xs: Vec<f64> = runs.iter().map(|(_, r)| r.samples[k][i]).collect();
            let m = xs.iter().sum::<f64>() / n;
            let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!((res.mean[k][i] - m).abs() < 1e-12);
            assert!((res.stderr[k][i] - sd / n.sqrt()).abs() < 1e-12);
        }
    }
    assert_eq!(res.jump_counts, runs.iter().map(|(_, r)| r.jumps.len()).collect::<Vec<_>>());
}

#[test]
fn member_streams_match_ensemble_entries() {
    let cfg = small([1.0, 0.1], [0.02, 0.002]);
    let phi = kets::pair(&kets::plus(), &kets::minus());
    let obs = standard_observables(&cfg, &phi);
    let opts = options(40.0, 10.0);
    let runs = run_trajectories(&cfg, &phi, 5, 8, &obs, &opts).unwrap();
    let ham = build(opts.kind, &cfg).unwrap();
    let jumps = JumpOperatorSet::from_config(&cfg, ham.layout()).unwrap();
    let (fock, r) = ensemble_member(&cfg, ham.as_ref(), &jumps, &phi, &obs, &opts, 8, 3).unwrap();
    assert_eq!(fock, runs[3].0);
    assert_eq!(r.samples, runs[3].1.samples);
    assert_eq!((r.seed, r.stream), (8, 3));
}

#[test]
fn leakage_flags_propagate() {
    // a hot mode in a tiny box fills the top level at once
    let cfg = ChainConfig::thermal_benchmark().with_truncation(&[2, 1]).with_thermal(&[3.0, 0.1], &[0.0, 0.0]);
    let phi = kets::pair(&kets::plus(), &kets::minus());
    let obs = standard_observables(&cfg, &phi);
    let res = run_ensemble(&cfg, &phi, 20, 1, &obs, &options(5.0, 1.0)).unwrap();
    assert!(res.flagged_fraction() > 0.2);
    assert_eq!(res.flagged.iter().filter(|f| **f).count() as f64 / 20.0, res.flagged_fraction());
}

#[test]
fn compensated_sum() {
    let xs = [1e16, 1.0, -1e16, 1.0];
    assert_eq!(neumaier(xs), 2.0);
    assert_eq!(neumaier(std::iter::empty()), 0.0);
}
