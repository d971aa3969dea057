mod common;

use common::{c, max_diff, pq_bus_voltages, random_case, two_bus};
use num_complex::Complex64;
use pfkit::homotopy::*;
use pfkit::network::{powerflow_system, Bus, BusKind, Case, Line, Network};
use pfkit::newton::{newton_solve, NewtonOptions};
use pfkit::poly::parse_system;
use pfkit::{PolySystem, Ring};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn system(names: &[&str], text: &str) -> PolySystem<f64> {
    let r = Ring::new(names).unwrap();
    PolySystem::new(&r, parse_system(&r, text).unwrap()).unwrap()
}

fn sort_points(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}

#[test]
fn bezout_and_binomial_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=5 {
        let sys = powerflow_system(&random_case(&mut rng, n));
        assert_eq!(cbb(&sys), 1u128 << (2 * (n - 1)));
    }
    assert_eq!(cbb(&system(&["x"], "x^3 - 2")), 3);
    assert_eq!(binomial_bound(2).unwrap(), 2);
    assert_eq!(binomial_bound(3).unwrap(), 6);
    assert_eq!(binomial_bound(5).unwrap(), 70);
    assert!(binomial_bound(1).is_err());
}

#[test]
fn start_system_roots() {
    let sys = system(&["x", "y"], "x^2 - y\nx*y - 3");
    let (start, roots) = make_start_system(&sys, 4).unwrap();
    assert_eq!(roots.len(), 4);
    for r in &roots {
        assert!(start.eval(r).iter().all(|v| v.norm() <= 1e-12));
    }
    let cube = StartSystem {
        a: vec![c(1.0, 0.0)],
        b: vec![c(1.0, 0.0)],
        degrees: vec![3],
    };
    let mut got: Vec<Complex64> = cube.roots().into_iter().map(|r| r[0]).collect();
    got.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
    let h = 3f64.sqrt() / 2.0;
    let want = [c(-0.5, -h), c(1.0, 0.0), c(-0.5, h)];
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).norm() < 1e-12);
    }
}

#[test]
fn tracks_both_roots_of_unit_square() {
    let sys = system(&["x"], "x^2 - 1");
    let (start, roots) = make_start_system(&sys, 0).unwrap();
    let h = Homotopy::new(&sys, start, draw_eta(0)).unwrap();
    let mut ends: Vec<f64> = roots
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = track_path(&h, i, r, &TrackerOptions::default());
            assert_eq!(p.status, PathStatus::Converged);
            assert!(p.endpoint[0].im.abs() < 1e-10);
            p.endpoint[0].re
        })
        .collect();
    ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((ends[0] + 1.0).abs() < 1e-10 && (ends[1] - 1.0).abs() < 1e-10);
}

#[test]
fn two_bus_matches_closed_form() {
    let net = two_bus(0.25, 0.25, 0.25, 0.25, 1.0);
    let set = solve_powerflow(&net, 0, &SolveOptions::default()).unwrap();
    assert_eq!(set.diagnostics.paths_tracked, 4);
    assert_eq!(set.bounds.cbb, 4);
    assert_eq!(set.bounds.binomial, Some(2));
    assert_eq!(set.real_solutions.len(), 2);
    let oracle = pq_bus_voltages(net.admittance(), 1, &[c(1.0, 0.0), c(0.0, 0.0)], c(-0.25, -0.25));
    let oracle = sort_points(oracle.iter().map(|v| vec![v.re, v.im]).collect());
    let found = sort_points(set.real_solutions.clone());
    for (a, b) in found.iter().zip(&oracle) {
        assert!((a[0] - b[0]).abs() < 1e-8 && (a[1] - b[1]).abs() < 1e-8, "{a:?} vs {b:?}");
    }
}

#[test]
fn three_bus_all_pq_respects_binomial_bound() {
    let mut buses = vec![Bus {
        v_set: Some(1.0),
        ..Bus::new(1, BusKind::Slack)
    }];
    for (id, p, q) in [(2, 0.3, 0.1), (3, 0.2, 0.15)] {
        buses.push(Bus {
            p_load: p,
            q_load: q,
            ..Bus::new(id, BusKind::Pq)
        });
    }
    let line = |from, to, r, x| Line { from, to, r, x, b_sh: 0.0 };
    let net = Network::from_case(Case {
        buses,
        lines: vec![line(1, 2, 0.05, 0.2), line(2, 3, 0.04, 0.25), line(1, 3, 0.03, 0.15)],
    })
    .unwrap();
    let set = solve_powerflow(&net, 9, &SolveOptions::default()).unwrap();
    assert_eq!(set.diagnostics.paths_tracked, 16);
    assert!(set.n_found() <= 6);
    assert!(set.n_found() >= 2);
}

#[test]
fn seeds_agree_on_real_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [2, 3] {
        let net = random_case(&mut rng, n);
        let reference = sort_points(solve_powerflow(&net, 0, &SolveOptions::default()).unwrap().real_solutions);
        for seed in 1..=5 {
            let set = solve_powerflow(&net, seed, &SolveOptions::default()).unwrap();
            let got = sort_points(set.real_solutions);
            assert_eq!(got.len(), reference.len(), "seed {seed}, n {n}");
            for (a, b) in got.iter().zip(&reference) {
                assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-6));
            }
        }
    }
}

#[test]
fn same_seed_same_result_across_thread_counts() {
    let net = random_case(&mut ChaCha8Rng::seed_from_u64(5), 3);
    let one = SolveOptions {
        threads: Some(1),
        ..SolveOptions::default()
    };
    let four = SolveOptions {
        threads: Some(4),
        ..SolveOptions::default()
    };
    let a = solve_powerflow(&net, 17, &one).unwrap();
    let b = solve_powerflow(&net, 17, &four).unwrap();
    assert_eq!(a.complex_solutions, b.complex_solutions);
    assert_eq!(a.real_solutions, b.real_solutions);
}

#[test]
fn endpoints_are_accurate_newton_fixed_points_and_conjugate_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for n in [2, 3, 3] {
        let net = random_case(&mut rng, n);
        let sys = powerflow_system(&net);
        let set = solve_powerflow(&net, 2, &SolveOptions::default()).unwrap();
        assert!(set.n_found() as u128 <= set.bounds.binomial.unwrap());
        for p in set.paths.iter().filter(|p| p.status == PathStatus::Converged) {
            assert!(p.residual <= 1e-8);
        }
        for x in &set.real_solutions {
            let refined = newton_solve(&sys, x, &NewtonOptions::default()).unwrap();
            let delta = refined.solution.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(delta < 1e-8);
        }
        for s in &set.complex_solutions {
            let conj: Vec<Complex64> = s.point.iter().map(|v| v.conj()).collect();
            assert!(set.complex_solutions.iter().any(|t| max_diff(&t.point, &conj) < 1e-6));
        }
    }
}

#[test]
fn non_square_system_is_rejected() {
    let sys = system(&["x", "y"], "x^2 - y");
    assert!(solve_all(&sys, 0, &SolveOptions::default()).is_err());
}
