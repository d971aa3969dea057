//! Case builders and brute-force oracles shared by the integration tests.
//!
//! Nothing in here calls into the solvers under test; the oracles only use
//! the admittance matrix and plain complex arithmetic.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use pfkit::network::{Bus, BusKind, Case, Line, Network};
use rand::{Rng, SeedableRng};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Slack bus at `v` feeding one PQ load through `r + jx`.
pub fn two_bus(r: f64, x: f64, pl: f64, ql: f64, v: f64) -> Network {
    let slack = Bus {
        v_set: Some(v),
        ..Bus::new(1, BusKind::Slack)
    };
    let load = Bus {
        p_load: pl,
        q_load: ql,
        ..Bus::new(2, BusKind::Pq)
    };
    Network::from_case(Case {
        buses: vec![slack, load],
        lines: vec![Line {
            from: 1,
            to: 2,
            r,
            x,
            b_sh: 0.0,
        }],
    })
    .unwrap()
}

/// Random connected network with `n` buses: a random spanning tree plus, for
/// `n >= 3`, one extra line closing a loop. About a third of the non-slack
/// buses are PV.
pub fn random_case(rng: &mut impl Rng, n: usize) -> Network {
    let mut buses = vec![Bus {
        v_set: Some(1.0),
        ..Bus::new(1, BusKind::Slack)
    }];
    for i in 2..=n {
        let kind = if rng.gen_bool(0.3) { BusKind::Pv } else { BusKind::Pq };
        let mut b = Bus::new(i as u32, kind);
        b.p_load = rng.gen_range(0.0..0.6);
        b.q_load = rng.gen_range(0.0..0.3);
        if kind == BusKind::Pv {
            b.v_set = Some(rng.gen_range(0.95..1.05));
            b.p_set = rng.gen_range(0.0..0.5);
        }
        buses.push(b);
    }
    let mut lines = Vec::new();
    for i in 2..=n {
        lines.push(Line {
            from: rng.gen_range(1..i) as u32,
            to: i as u32,
            r: rng.gen_range(0.01..0.1),
            x: rng.gen_range(0.05..0.3),
            b_sh: 0.0,
        });
    }
    if n >= 3 && !lines.iter().any(|l| l.from == 2 && l.to == n as u32) {
        lines.push(Line {
            from: 2,
            to: n as u32,
            r: 0.05,
            x: 0.2,
            b_sh: 0.02,
        });
    }
    Network::from_case(Case { buses, lines }).unwrap()
}

/// All voltages of PQ bus `k` consistent with its injection `s` when every
/// other bus voltage is known.
///
/// With `c = sum_{j != k} Y_kj V_j` and `u = V_k conj(c)` the injection is
/// `s = conj(Y_kk) |V_k|^2 + u` and `|V_k|^2 = |u|^2 / |c|^2`. Writing
/// `a = conj(Y_kk) / |c|^2` and `t = |u|^2` gives `u = s - a t` and the real
/// quadratic `|a|^2 t^2 - (2 Re(s conj(a)) + 1) t + |s|^2 = 0`.
pub fn pq_bus_voltages(y: &DMatrix<Complex64>, k: usize, v: &[Complex64], s: Complex64) -> Vec<Complex64> {
    let n = v.len();
    let cur: Complex64 = (0..n).filter(|&j| j != k).map(|j| y[(k, j)] * v[j]).sum();
    let c2 = cur.norm_sqr();
    if c2 == 0.0 {
        return vec![];
    }
    let a = y[(k, k)].conj() / c2;
    let qa = a.norm_sqr();
    let qb = -(2.0 * (s * a.conj()).re + 1.0);
    let qc = s.norm_sqr();
    let mut ts = Vec::new();
    if qa == 0.0 {
        ts.push(-qc / qb);
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return vec![];
        }
        let sq = disc.sqrt();
        // Stable quadratic formula.
        let q = -0.5 * (qb + qb.signum() * sq);
        ts.push(q / qa);
        if q != 0.0 {
            ts.push(qc / q);
        }
    }
    ts.into_iter()
        .filter(|t| *t >= 0.0)
        .map(|t| (s - a * t) / cur.conj())
        .collect()
}

/// Brute-force OPF optimum: grid over the generator-bus voltages (magnitude
/// within limits, angle relative to the slack), each remaining load bus
/// solved in closed form, then successive local refinement of the best grid
/// point. Supports networks with at most one non-generator bus.
pub struct GridOracle {
    pub objective: f64,
    pub voltages: Vec<Complex64>,
}

pub fn grid_opf(net: &Network, resolution: f64, angle_span: f64) -> Option<GridOracle> {
    let buses = net.buses();
    let n = buses.len();
    let slack = net.slack();
    let loads: Vec<usize> = (0..n).filter(|&i| !buses[i].kind.is_generator()).collect();
    assert!(loads.len() <= 1, "grid oracle handles at most one load bus");
    let gens: Vec<usize> = (0..n).filter(|&i| buses[i].kind.is_generator()).collect();
    // Grid axes: |V| for every generator, angle for every non-slack generator.
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for &g in &gens {
        lo.push(buses[g].v_min.unwrap());
        hi.push(buses[g].v_max.unwrap());
    }
    for &g in &gens {
        if g != slack {
            lo.push(-angle_span);
            hi.push(angle_span);
        }
    }
    let eval = |p: &[f64]| -> Option<(f64, Vec<Complex64>)> {
        let mut v = vec![c(0.0, 0.0); n];
        let mut ang = gens.len();
        for (j, &g) in gens.iter().enumerate() {
            let theta = if g == slack {
                0.0
            } else {
                ang += 1;
                p[ang - 1]
            };
            v[g] = Complex64::from_polar(p[j], theta);
        }
        let candidates = match loads.first() {
            Some(&k) => {
                let s = c(-buses[k].p_load, -buses[k].q_load);
                pq_bus_voltages(net.admittance(), k, &v, s)
                    .into_iter()
                    .map(|vk| {
                        let mut w = v.clone();
                        w[k] = vk;
                        w
                    })
                    .collect()
            }
            None => vec![v],
        };
        candidates
            .into_iter()
            .filter_map(|w| opf_objective_if_feasible(net, &w, 1e-9).map(|f| (f, w)))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
    };

    let mut best: Option<(f64, Vec<Complex64>, Vec<f64>)> = None;
    let consider = |p: Vec<f64>, best: &mut Option<(f64, Vec<Complex64>, Vec<f64>)>| {
        if let Some((f, w)) = eval(&p) {
            if best.as_ref().map_or(true, |b| f < b.0) {
                *best = Some((f, w, p));
            }
        }
    };
    for p in grid(&lo, &hi, resolution) {
        consider(p, &mut best);
    }
    // Refinement: random local search around the incumbent with a shrinking
    // radius. The optimum usually sits on a curved limit, where improving
    // moves form a thin wedge that axis-aligned grids rarely hit.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let mut radius = resolution;
    while radius > 1e-10 {
        let Some((_, _, centre)) = best.clone() else { break };
        let mut failures = 0;
        let mut centre = centre;
        while failures < 400 {
            let p: Vec<f64> = centre
                .iter()
                .zip(lo.iter().zip(&hi))
                .map(|(x, (l, h))| (x + radius * rng.gen_range(-1.0..1.0)).clamp(*l, *h))
                .collect();
            let before = best.as_ref().unwrap().0;
            consider(p, &mut best);
            let b = best.as_ref().unwrap();
            if b.0 < before {
                centre = b.2.clone();
                failures = 0;
            } else {
                failures += 1;
            }
        }
        radius /= 4.0;
    }
    best.map(|(objective, voltages, _)| GridOracle { objective, voltages })
}

fn grid(lo: &[f64], hi: &[f64], step: f64) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = lo
        .iter()
        .zip(hi)
        .map(|(&l, &h)| {
            let k = ((h - l) / step).round() as usize;
            (0..=k).map(|i| (l + i as f64 * step).min(h)).collect()
        })
        .collect();
    let mut out = vec![vec![]];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Generation cost at `v` if every OPF limit holds to `tol`, computed from
/// the admittance matrix directly.
pub fn opf_objective_if_feasible(net: &Network, v: &[Complex64], tol: f64) -> Option<f64> {
    let y = net.admittance();
    let n = v.len();
    let mut cost = 0.0;
    for (i, b) in net.buses().iter().enumerate() {
        let cur: Complex64 = (0..n).map(|k| y[(i, k)] * v[k]).sum();
        let s = v[i] * cur.conj();
        let (pg, qg) = (s.re + b.p_load, s.im + b.q_load);
        let lim = |x: Option<f64>| x.unwrap_or(0.0);
        if pg > lim(b.p_max) + tol || pg < lim(b.p_min) - tol || qg > lim(b.q_max) + tol || qg < lim(b.q_min) - tol {
            return None;
        }
        let m = v[i].norm();
        if m > b.v_max.unwrap() + tol || m < b.v_min.unwrap() - tol {
            return None;
        }
        if b.kind.is_generator() {
            cost += b.cost * pg;
        }
    }
    Some(cost)
}

/// Test OPF cases: (name, network). All have at most one load bus so the
/// grid oracle applies.
pub fn opf_cases() -> Vec<(&'static str, Network)> {
    let cases = [
        (
            "two-bus, slack voltage fixed",
            r#"{"buses":[
              {"id":1,"kind":"slack","v_set":1.0,"v_min":1.0,"v_max":1.0,"p_min":-5,"p_max":5,"q_min":-5,"q_max":5,"cost":1},
              {"id":2,"kind":"pq","p_load":0.25,"q_load":0.25,"v_min":0.8,"v_max":1.1}],
              "lines":[{"from":1,"to":2,"r":0.25,"x":0.25}]}"#,
        ),
        (
            "two-bus, slack voltage band",
            r#"{"buses":[
              {"id":1,"kind":"slack","v_set":1.0,"v_min":0.95,"v_max":1.05,"p_min":-5,"p_max":5,"q_min":-5,"q_max":5,"cost":1},
              {"id":2,"kind":"pq","p_load":0.25,"q_load":0.25,"v_min":0.8,"v_max":1.1}],
              "lines":[{"from":1,"to":2,"r":0.25,"x":0.25}]}"#,
        ),
        (
            "two-bus, line charging and reactive limit",
            r#"{"buses":[
              {"id":1,"kind":"slack","v_set":1.0,"v_min":0.9,"v_max":1.1,"p_min":0,"p_max":2,"q_min":-0.2,"q_max":0.4,"cost":1},
              {"id":2,"kind":"pq","p_load":0.6,"q_load":0.3,"v_min":0.9,"v_max":1.1}],
              "lines":[{"from":1,"to":2,"r":0.05,"x":0.2,"b_sh":0.1}]}"#,
        ),
        (
            "three-bus meshed, two generators",
            r#"{"buses":[
              {"id":1,"kind":"slack","v_set":1.0,"v_min":0.95,"v_max":1.05,"p_min":0,"p_max":2,"q_min":-1,"q_max":1,"cost":1},
              {"id":2,"kind":"pv","v_set":1.0,"v_min":0.95,"v_max":1.05,"p_min":0,"p_max":0.6,"q_min":-1,"q_max":1,"cost":2},
              {"id":3,"kind":"pq","p_load":0.9,"q_load":0.3,"v_min":0.9,"v_max":1.1}],
              "lines":[{"from":1,"to":2,"r":0.02,"x":0.2},{"from":2,"to":3,"r":0.02,"x":0.2},{"from":1,"to":3,"r":0.05,"x":0.3}]}"#,
        ),
        (
            // The first-order relaxation is not exact here; the mixed bound
            // lies strictly between the first- and second-order bounds.
            "two generators, narrow reactive window",
            r#"{"buses":[
              {"id":1,"kind":"slack","v_set":0.98,"v_min":0.95,"v_max":1.05,"p_min":0,"p_max":10,"q_min":-3,"q_max":3,"cost":1,"p_load":0.46},
              {"id":2,"kind":"pv","v_set":1.04,"p_set":1.0,"p_load":1.82,"q_load":-0.54,"v_min":0.93,"v_max":1.07,"p_min":0,"p_max":1.64,"q_min":0.1,"q_max":0.32,"cost":0.58}],
              "lines":[{"from":1,"to":2,"r":0.11,"x":0.31}]}"#,
        ),
    ];
    cases
        .into_iter()
        .map(|(name, json)| (name, Network::from_json(json).unwrap()))
        .collect()
}

/// Max over entries of `|a_i - b_i|`.
pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
