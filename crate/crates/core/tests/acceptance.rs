//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the run exits non-zero if any criterion fails. Runs without the libtest
//! harness so the report is always printed.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{c, grid_opf, max_diff, opf_cases, pq_bus_voltages, random_case};
use num_bigint::BigInt;
use num_complex::Complex64;
use pfkit::groebner::*;
use pfkit::homotopy::{solve_all, solve_powerflow, SolveOptions};
use pfkit::moment::*;
use pfkit::network::{powerflow_system, Bus, BusKind, Case, Line, Network};
use pfkit::newton::{newton_solve, NewtonOptions};
use pfkit::poly::{parse_polynomial, parse_system, rational_approx, QPoly, Rational};
use pfkit::sdp::{solve, SdpOptions, SdpStatus};
use pfkit::{MonomialOrder, PolySystem, Ring};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Equal after normalising both to leading coefficient one.
fn same_up_to_scale(a: &QPoly, b: &QPoly, ord: &MonomialOrder) -> bool {
    a.monic(ord).unwrap() == b.monic(ord).unwrap()
}

fn sorted(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}

fn same_points(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let gb = buchberger(&two_bus_ideal(&rat(1, 4), &rat(1, 4)), &BuchbergerOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let r = gb.ring.clone();
    let quad = parse_polynomial(&r, "2*P^2 - 2*(PL - QL + 2*V^2)*P + PL^2 - 2*PL*QL + QL^2 + 4*PL*V^2").unwrap();
    let loss = parse_polynomial(&r, "P - PL - Q + QL").unwrap();
    let elim = eliminate(&gb, 5).map_err(|e| e.to_string())?;
    ensure!(elim.len() == 2, "expected two generators free of currents and load voltage, got {}", elim.len());
    for want in [&quad, &loss] {
        ensure!(
            elim.iter().any(|g| same_up_to_scale(g, want, &gb.order)),
            "no generator equal to {} up to scaling",
            want
        );
    }
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("both generators matched exactly, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let curve = loadability_polynomial(&rat(1, 4), &rat(1, 4)).map_err(|e| e.to_string())?;
    let r = curve.ring().clone();
    let want = parse_polynomial(&r, "PL^2 - 2*PL*QL + QL^2 + 4*V^2*PL + 4*V^2*QL - 4*V^4").unwrap();
    let ord = MonomialOrder::lex_natural(r.nvars());
    ensure!(same_up_to_scale(&curve, &want, &ord), "boundary polynomial {curve}");
    let mut rows = 0;
    let mut worst: f64 = 0.0;
    for v in [0.9f64, 1.0, 1.1] {
        let pts = sample_curve(&curve, v, -2.0 * v * v, v * v, 61).map_err(|e| e.to_string())?;
        ensure!(!pts.is_empty(), "no boundary points at V = {v}");
        for (pl, ql) in pts {
            let f = pl * pl - 2.0 * pl * ql + ql * ql + 4.0 * v * v * pl + 4.0 * v * v * ql - 4.0 * v.powi(4);
            worst = worst.max(f.abs());
            rows += 1;
        }
    }
    ensure!(worst < 1e-10, "worst boundary residual {worst:e}");
    Ok(format!("exact match; {rows} sampled rows, worst residual {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut slowest = Duration::ZERO;
    let mut cases = 0;
    for k in 0..24 {
        let n = 2 + k % 3;
        let net = random_case(&mut rng, n);
        let t = Instant::now();
        let set = solve_powerflow(&net, k as u64, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let dt = t.elapsed();
        slowest = slowest.max(dt);
        let bound = set.bounds.binomial.unwrap();
        ensure!(set.n_found() as u128 <= bound, "case {k}: {} solutions > bound {bound}", set.n_found());
        for s in &set.complex_solutions {
            ensure!(s.residual <= 1e-8, "case {k}: residual {:e}", s.residual);
        }
        if n == 3 {
            ensure!(set.diagnostics.paths_tracked == 16 && set.bounds.cbb == 16, "case {k}: {:?}", set.diagnostics);
            ensure!(set.n_found() <= 6, "case {k}: {} solutions", set.n_found());
        }
        ensure!(dt < Duration::from_secs(10), "case {k} took {dt:?}");
        cases += 1;
    }
    Ok(format!("{cases} cases, slowest {slowest:.2?}"))
}

/// Network with dyadic line and load data, so that every power-flow
/// coefficient is an exact binary fraction.
fn dyadic_case(n: usize, loads: &[(f64, f64)]) -> Network {
    let mut buses = vec![Bus {
        v_set: Some(1.0),
        ..Bus::new(1, BusKind::Slack)
    }];
    for (i, &(p, q)) in loads.iter().enumerate() {
        buses.push(Bus {
            p_load: p,
            q_load: q,
            ..Bus::new(i as u32 + 2, BusKind::Pq)
        });
    }
    let line = |from, to, r, x| Line { from, to, r, x, b_sh: 0.0 };
    let lines = if n == 2 {
        vec![line(1, 2, 0.25, 0.25)]
    } else {
        vec![line(1, 2, 0.25, 0.25), line(2, 3, 0.5, 0.5), line(1, 3, 0.25, 0.5)]
    };
    Network::from_case(Case { buses, lines }).unwrap()
}

fn groebner_real_solutions(sys: &PolySystem<f64>) -> Result<Vec<Vec<f64>>, String> {
    let ring: Arc<Ring> = sys.ring().clone();
    let gens: Vec<QPoly> = sys.polys().iter().map(|p| p.map_coeffs(|&v| rational_approx(v, 1 << 20))).collect();
    let ideal = Ideal::new(&ring, gens, MonomialOrder::lex_natural(ring.nvars())).map_err(|e| e.to_string())?;
    let gb = buchberger(&ideal, &BuchbergerOptions::default()).map_err(|e| e.to_string())?;
    Ok(triangular_solve(&gb).map_err(|e| e.to_string())?.real_solutions(1e-9))
}

fn criterion_4() -> Outcome {
    let newton_delta = |sys: &PolySystem<f64>, x: &[f64]| -> Result<f64, String> {
        let refined = newton_solve(sys, x, &NewtonOptions::default()).map_err(|e| e.to_string())?;
        Ok(refined.solution.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    };
    let mut worst_delta: f64 = 0.0;
    let mut compared = 0;
    // Two-bus cases against the closed-form quadratic in |V2|^2.
    for (pl, ql) in [(0.25, 0.25), (0.5, 0.1), (0.1, -0.3), (0.9, 0.2)] {
        let net = common::two_bus(0.1, 0.3, pl, ql, 1.0);
        let set = solve_powerflow(&net, 0, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let oracle = pq_bus_voltages(net.admittance(), 1, &[c(1.0, 0.0), c(0.0, 0.0)], c(-pl, -ql));
        let oracle = sorted(oracle.iter().map(|v| vec![v.re, v.im]).collect());
        ensure!(same_points(&sorted(set.real_solutions.clone()), &oracle, 1e-6), "two-bus ({pl}, {ql}) differs from closed form");
        let sys = powerflow_system(&net);
        for x in &set.real_solutions {
            worst_delta = worst_delta.max(newton_delta(&sys, x)?);
        }
        compared += 1;
    }
    // Two- and three-bus cases against lex back-substitution.
    for (n, loads) in [
        (2, vec![(0.25, 0.25)]),
        (2, vec![(0.5, 0.125)]),
        (3, vec![(0.25, 0.125), (0.375, 0.125)]),
        (3, vec![(0.5, 0.25), (0.25, 0.0)]),
    ] {
        let net = dyadic_case(n, &loads);
        let sys = powerflow_system(&net);
        let set = solve_powerflow(&net, 3, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let exact = sorted(groebner_real_solutions(&sys)?);
        ensure!(!exact.is_empty(), "{n}-bus {loads:?}: no real solutions");
        ensure!(
            same_points(&sorted(set.real_solutions.clone()), &exact, 1e-6),
            "{n}-bus {loads:?}: homotopy {:?} vs elimination {exact:?}",
            set.real_solutions
        );
        for x in &set.real_solutions {
            worst_delta = worst_delta.max(newton_delta(&sys, x)?);
        }
        compared += 1;
    }
    ensure!(worst_delta < 1e-8, "Newton refinement moved a solution by {worst_delta:e}");
    Ok(format!("{compared} systems matched; largest Newton refinement {worst_delta:.1e}"))
}

fn criterion_5() -> Outcome {
    let mut systems: Vec<PolySystem<f64>> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for n in [2, 3, 3, 4] {
        systems.push(powerflow_system(&random_case(&mut rng, n)));
    }
    for (names, text) in [
        (vec!["x", "y"], "x^2 + y^2 - 4\nx*y + 3"),
        (vec!["x", "y"], "x^3 - 2*x*y + 1\ny^2 + x - 5"),
        (vec!["x"], "x^4 + x^2 + 1"),
    ] {
        let ring = Ring::new(&names).unwrap();
        systems.push(PolySystem::new(&ring, parse_system(&ring, text).unwrap()).unwrap());
    }
    let opts = SolveOptions::default();
    let mut total = 0;
    for (k, sys) in systems.iter().enumerate() {
        let set = solve_all(sys, 7, &opts).map_err(|e| e.to_string())?;
        for s in &set.complex_solutions {
            let conj: Vec<Complex64> = s.point.iter().map(|z| z.conj()).collect();
            ensure!(
                set.complex_solutions.iter().any(|t| max_diff(&t.point, &conj) <= opts.dedupe_tol),
                "system {k}: conjugate of {:?} missing",
                s.point
            );
            total += 1;
        }
        ensure!(!set.complex_solutions.is_empty(), "system {k}: no solutions");
    }
    Ok(format!("{} systems, {total} solutions, all paired", systems.len()))
}

/// Ten-bus chain with complete limits (for structure-only builds).
fn ten_bus() -> Network {
    let mut buses = Vec::new();
    for id in 1..=10u32 {
        let kind = match id {
            1 => BusKind::Slack,
            4 | 7 => BusKind::Pv,
            _ => BusKind::Pq,
        };
        let mut b = Bus::new(id, kind);
        b.v_min = Some(0.9);
        b.v_max = Some(1.1);
        if kind.is_generator() {
            b.v_set = Some(1.0);
            b.p_min = Some(0.0);
            b.p_max = Some(2.0);
            b.q_min = Some(-1.0);
            b.q_max = Some(1.0);
            b.cost = 1.0;
        } else {
            b.p_load = 0.1;
            b.q_load = 0.05;
        }
        buses.push(b);
    }
    let lines = (1..10).map(|i| Line { from: i, to: i + 1, r: 0.02, x: 0.1, b_sh: 0.0 }).collect();
    Network::from_case(Case { buses, lines }).unwrap()
}

fn criterion_6() -> Outcome {
    let shape = MomentOptions {
        structure_only: true,
        ..MomentOptions::default()
    };
    let mut nets = vec![ten_bus()];
    nets.extend(opf_cases().into_iter().map(|(_, n)| n));
    for net in &nets {
        let n = net.nbuses();
        for gamma in 1..=3 {
            let r = build_msos_r(net, gamma, &shape).map_err(|e| e.to_string())?;
            let cx = build_msos_c(net, gamma, &shape).map_err(|e| e.to_string())?;
            ensure!(r.moment_size == binomial(2 * n + gamma, gamma), "real n={n} gamma={gamma}: {}", r.moment_size);
            ensure!(cx.moment_size == 2 * binomial(n + gamma, gamma), "complex n={n} gamma={gamma}: {}", cx.moment_size);
        }
    }
    let big_r = build_msos_r(&nets[0], 3, &shape).map_err(|e| e.to_string())?.moment_size;
    let big_c = build_msos_c(&nets[0], 3, &shape).map_err(|e| e.to_string())?.moment_size;
    ensure!(big_r == 1771 && big_c == 572, "n=10, gamma=3: {big_r} and {big_c}");
    Ok(format!("formulas hold; n=10, gamma=3 gives {big_r} and {big_c}"))
}

fn bound(relax: &MomentRelaxation) -> Result<f64, String> {
    let s = solve(&relax.problem, &SdpOptions::default()).map_err(|e| e.to_string())?;
    ensure!(s.status == SdpStatus::Optimal, "solver status {:?}: {:?}", s.status, s.message);
    Ok(s.primal_objective)
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let opts = MomentOptions::default();
    let mut strict = 0;
    let mut cases = 0;
    for (name, net) in opf_cases() {
        let oracle = grid_opf(&net, 1e-3, 0.5).ok_or(format!("{name}: grid found no feasible point"))?.objective;
        let r1 = bound(&build_msos_r(&net, 1, &opts).map_err(|e| e.to_string())?)?;
        let c1 = bound(&build_msos_c(&net, 1, &opts).map_err(|e| e.to_string())?)?;
        let mixed = bound(&build_mixed_sdpsocp(&net, 2, &opts).map_err(|e| e.to_string())?)?;
        let r2 = bound(&build_msos_r(&net, 2, &opts).map_err(|e| e.to_string())?)?;
        // Bounds from separate solves agree to the solver tolerance only.
        let slack = 1e-7;
        ensure!(r1 <= mixed + slack && mixed <= r2 + slack, "{name}: {r1} / {mixed} / {r2} not ordered");
        ensure!(r2 <= oracle + 1e-5, "{name}: {r2} above oracle {oracle}");
        ensure!((r1 - c1).abs() <= 1e-6, "{name}: real {r1} vs complex {c1}");
        if mixed - r1 > 1e-4 && r2 - mixed > 1e-4 {
            strict += 1;
        }
        cases += 1;
    }
    let elapsed = t.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!("{cases} cases ({strict} with a strictly intermediate mixed bound), {elapsed:.1?}"))
}

fn criterion_8() -> Outcome {
    let opts = MomentOptions::default();
    let mut worst: f64 = 0.0;
    for (name, net) in opf_cases() {
        let sol = newton_solve(&powerflow_system(&net), &pfkit::newton::flat_start(&net), &NewtonOptions::default())
            .map_err(|e| e.to_string())?;
        let v = net.full_voltages(&sol.solution.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
        // Arbitrary global phase; extraction must undo it.
        let v: Vec<Complex64> = v.iter().map(|z| z * Complex64::from_polar(1.0, -1.1)).collect();
        let rot = v[0].conj() / v[0].norm();
        let want: Vec<Complex64> = v.iter().map(|z| z * rot).collect();
        for relax in [build_msos_r(&net, 2, &opts), build_msos_c(&net, 2, &opts)] {
            let relax = relax.map_err(|e| e.to_string())?;
            let y = lift_point(&relax, &v).map_err(|e| e.to_string())?;
            let report = check_exactness(&relax, &y, relax.problem.objective_value(&y)).map_err(|e| e.to_string())?;
            let got = report.extracted_voltages.ok_or(format!("{name}: lifted point not rank one"))?;
            ensure!(got[0].im == 0.0, "{name}: Im V1 = {}", got[0].im);
            worst = worst.max(max_diff(&got, &want));
        }
    }
    ensure!(worst < 1e-8, "round-trip error {worst:e}");

    let (name, net) = &opf_cases()[0];
    let relax = build_msos_r(net, 1, &opts).map_err(|e| e.to_string())?;
    let s = solve(&relax.problem, &SdpOptions::default()).map_err(|e| e.to_string())?;
    let report = check_exactness_and_extract(&relax, &s).map_err(|e| e.to_string())?;
    ensure!(report.eigenvalue_ratio < RANK_RATIO_THRESHOLD, "{name}: ratio {:e}", report.eigenvalue_ratio);
    let viol = report.max_violation.unwrap();
    let gap = (report.extracted_objective.unwrap() - s.primal_objective).abs();
    ensure!(report.certified && viol <= 1e-6 && gap <= 1e-6, "{name}: {report:?}");
    Ok(format!(
        "round-trip error {worst:.1e}; {name}: ratio {:.1e}, violation {viol:.1e}, objective gap {gap:.1e}",
        report.eigenvalue_ratio
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = Vec::new();
    for (k, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {k}: PASS - {detail}"),
            Err(why) => {
                println!("criterion {k}: FAIL - {why}");
                failed.push(k);
            }
        }
    }
    println!("criterion 9: NOT REPRODUCIBLE (declared) - 14-bus enumeration and thousand-bus sparse relaxations are out of scope");
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
