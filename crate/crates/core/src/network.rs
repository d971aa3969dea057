//! Network cases: buses, lines, the admittance matrix and the polynomial
//! power-flow / OPF models built from them.
//!
//! A case is a JSON document:
//!
//! ```json
//! {"buses": [{"id": 1, "kind": "slack", "v_set": 1.0},
//!            {"id": 2, "kind": "pq", "p_load": 0.25, "q_load": 0.25}],
//!  "lines": [{"from": 1, "to": 2, "r": 0.25, "x": 0.25}]}
//! ```
//!
//! All quantities are per-unit. `p_set`/`q_set` are generation setpoints, so a
//! bus's net injection is `p_set - p_load`.

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Polynomial, PolySystem, Ring};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("cannot read case file: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invalid field `{field}`: {msg}")]
    InvalidField { field: String, msg: String },
    #[error("duplicate slack: buses {0} and {1} are both slack")]
    DuplicateSlack(u32, u32),
    #[error("no slack bus")]
    NoSlack,
    #[error("duplicate bus id {0}")]
    DuplicateBus(u32),
    #[error("line {line}: unknown bus id {id}")]
    UnknownBus { line: usize, id: u32 },
    #[error("disconnected graph: bus {0} is not reachable from bus {1}")]
    Disconnected(u32, u32),
    #[error("disconnected graph: no lines")]
    NoLines,
    #[error("missing limits: bus {bus} has no `{field}`")]
    MissingLimits { bus: u32, field: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    #[serde(alias = "PQ")]
    Pq,
    #[serde(alias = "PV")]
    Pv,
    #[serde(alias = "Slack")]
    Slack,
}

impl BusKind {
    /// PV and slack buses host generators; PQ buses do not.
    pub fn is_generator(self) -> bool {
        !matches!(self, BusKind::Pq)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: u32,
    pub kind: BusKind,
    #[serde(default)]
    pub p_load: f64,
    #[serde(default)]
    pub q_load: f64,
    #[serde(default)]
    pub p_set: f64,
    #[serde(default)]
    pub q_set: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_set: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[serde(default)]
    pub cost: f64,
}

impl Bus {
    /// A bus of the given kind with every optional field unset.
    pub fn new(id: u32, kind: BusKind) -> Self {
        Bus {
            id,
            kind,
            p_load: 0.0,
            q_load: 0.0,
            p_set: 0.0,
            q_set: 0.0,
            v_set: None,
            p_min: None,
            p_max: None,
            q_min: None,
            q_max: None,
            v_min: None,
            v_max: None,
            cost: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub from: u32,
    pub to: u32,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b_sh: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
}

/// A validated network with its admittance matrix. Immutable once built.
#[derive(Clone, Debug)]
pub struct Network {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    y: DMatrix<Complex64>,
    slack: usize,
}

/// Which bound a row of the OPF constraint vector encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    P,
    Q,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstraintLabel {
    pub quantity: Quantity,
    pub side: Side,
    /// Bus position (0-based, file order).
    pub bus: usize,
}

/// OPF in polynomial form: minimize `objective` subject to `g[i] >= 0`.
///
/// `g` has `6n` rows grouped as `Pmax - gP`, `gP - Pmin`, `Qmax - gQ`,
/// `gQ - Qmin`, `Vmax^2 - gV`, `gV - Vmin^2`, each block ordered by bus.
#[derive(Clone, Debug)]
pub struct OpfPolynomials<C: crate::poly::Coeff> {
    pub ring: Arc<Ring>,
    pub objective: Polynomial<C>,
    pub g: Vec<Polynomial<C>>,
    pub labels: Vec<ConstraintLabel>,
    /// `tight[i]` is true when row `i` and its opposite bound coincide
    /// (e.g. `Pmin = Pmax`), i.e. the pair is really an equality.
    pub tight: Vec<bool>,
}

impl<C: crate::poly::Coeff> OpfPolynomials<C> {
    pub fn nbuses(&self) -> usize {
        self.g.len() / 6
    }
}

impl Network {
    pub fn from_case(case: Case) -> Result<Self, NetworkError> {
        validate(&case)?;
        let index: HashMap<u32, usize> = case.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
        let n = case.buses.len();
        let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for l in &case.lines {
            let (i, k) = (index[&l.from], index[&l.to]);
            let ys = Complex64::new(1.0, 0.0) / Complex64::new(l.r, l.x);
            let sh = Complex64::new(0.0, l.b_sh / 2.0);
            y[(i, i)] += ys + sh;
            y[(k, k)] += ys + sh;
            y[(i, k)] -= ys;
            y[(k, i)] -= ys;
        }
        let slack = case.buses.iter().position(|b| b.kind == BusKind::Slack).unwrap();
        Ok(Network {
            buses: case.buses,
            lines: case.lines,
            y,
            slack,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let case: Case = serde_json::from_str(text).map_err(|e| NetworkError::Schema(e.to_string()))?;
        Self::from_case(case)
    }

    pub fn to_case(&self) -> Case {
        Case {
            buses: self.buses.clone(),
            lines: self.lines.clone(),
        }
    }

    pub fn nbuses(&self) -> usize {
        self.buses.len()
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn admittance(&self) -> &DMatrix<Complex64> {
        &self.y
    }

    /// Position of the slack bus.
    pub fn slack(&self) -> usize {
        self.slack
    }

    /// Positions of the non-slack buses, in file order. These index the
    /// unknowns of [`powerflow_system`].
    pub fn non_slack(&self) -> Vec<usize> {
        (0..self.nbuses()).filter(|&i| i != self.slack).collect()
    }

    pub fn position(&self, id: u32) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// Complex power injections `S_i = V_i * conj(sum_k Y_ik V_k)`.
    pub fn injections(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.nbuses();
        (0..n)
            .map(|i| {
                let cur: Complex64 = (0..n).map(|k| self.y[(i, k)] * v[k]).sum();
                v[i] * cur.conj()
            })
            .collect()
    }

    /// Total complex power absorbed by the lines (series losses plus shunts).
    pub fn line_losses(&self, v: &[Complex64]) -> Complex64 {
        self.lines
            .iter()
            .map(|l| {
                let (i, k) = (self.position(l.from).unwrap(), self.position(l.to).unwrap());
                let z = Complex64::new(l.r, l.x);
                let i_series = (v[i] - v[k]) / z;
                let series = z * i_series.norm_sqr();
                let sh = Complex64::new(0.0, -l.b_sh / 2.0) * (v[i].norm_sqr() + v[k].norm_sqr());
                series + sh
            })
            .sum()
    }

    /// Bus voltages from a power-flow solution vector `[Vd.., Vq..]` over the
    /// non-slack buses, with the slack at `v_set` and zero angle.
    pub fn full_voltages(&self, x: &[Complex64]) -> Vec<Complex64> {
        let ns = self.non_slack();
        let m = ns.len();
        assert_eq!(x.len(), 2 * m, "solution length does not match the network");
        let mut v = vec![Complex64::new(self.slack_voltage(), 0.0); self.nbuses()];
        for (j, &b) in ns.iter().enumerate() {
            // Vd + j Vq, with Vd and Vq themselves possibly complex.
            v[b] = x[j] + Complex64::i() * x[m + j];
        }
        v
    }

    fn slack_voltage(&self) -> f64 {
        self.buses[self.slack].v_set.unwrap_or(1.0)
    }
}

pub fn load_case(path: impl AsRef<Path>) -> Result<Network, NetworkError> {
    let text = std::fs::read_to_string(path)?;
    Network::from_json(&text)
}

fn invalid(field: impl Into<String>, msg: impl Into<String>) -> NetworkError {
    NetworkError::InvalidField {
        field: field.into(),
        msg: msg.into(),
    }
}

fn validate(case: &Case) -> Result<(), NetworkError> {
    let mut index = HashMap::new();
    let mut slack: Option<u32> = None;
    for (pos, b) in case.buses.iter().enumerate() {
        if index.insert(b.id, pos).is_some() {
            return Err(NetworkError::DuplicateBus(b.id));
        }
        let f = |name: &str| format!("buses[{pos}].{name}");
        if b.kind == BusKind::Slack {
            if let Some(first) = slack {
                return Err(NetworkError::DuplicateSlack(first, b.id));
            }
            slack = Some(b.id);
        }
        if b.kind.is_generator() {
            match b.v_set {
                Some(v) if v > 0.0 && v.is_finite() => {}
                Some(_) => return Err(invalid(f("v_set"), "must be positive")),
                None => return Err(invalid(f("v_set"), "required for pv and slack buses")),
            }
        }
        for (lo, hi, name) in [
            (b.p_min, b.p_max, "p_min"),
            (b.q_min, b.q_max, "q_min"),
            (b.v_min, b.v_max, "v_min"),
        ] {
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if lo > hi {
                    return Err(invalid(f(name), "lower limit exceeds upper limit"));
                }
            }
        }
        if let Some(v) = b.v_min {
            if v < 0.0 {
                return Err(invalid(f("v_min"), "must be non-negative"));
            }
        }
        if !b.kind.is_generator() {
            for (val, name) in [
                (b.p_min, "p_min"),
                (b.p_max, "p_max"),
                (b.q_min, "q_min"),
                (b.q_max, "q_max"),
            ] {
                if val.is_some_and(|v| v != 0.0) {
                    return Err(invalid(f(name), "buses without generators must have zero generation limits"));
                }
            }
        }
    }
    if slack.is_none() {
        return Err(NetworkError::NoSlack);
    }
    if case.lines.is_empty() {
        return Err(NetworkError::NoLines);
    }
    let n = case.buses.len();
    let mut adj = vec![Vec::new(); n];
    for (li, l) in case.lines.iter().enumerate() {
        let f = |name: &str| format!("lines[{li}].{name}");
        let i = *index.get(&l.from).ok_or(NetworkError::UnknownBus { line: li, id: l.from })?;
        let k = *index.get(&l.to).ok_or(NetworkError::UnknownBus { line: li, id: l.to })?;
        if i == k {
            return Err(invalid(f("to"), "line endpoints must differ"));
        }
        if l.r < 0.0 || !l.r.is_finite() {
            return Err(invalid(f("r"), "must be non-negative"));
        }
        if l.r == 0.0 && l.x == 0.0 {
            return Err(invalid(f("x"), "zero series impedance"));
        }
        adj[i].push(k);
        adj[k].push(i);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for &k in &adj[i] {
            if !seen[k] {
                seen[k] = true;
                queue.push_back(k);
            }
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(NetworkError::Disconnected(case.buses[k].id, case.buses[0].id));
    }
    Ok(())
}

/// Active and reactive injection polynomials given per-bus real and
/// imaginary voltage parts (each a polynomial or a constant).
fn injection_polys(
    y: &DMatrix<Complex64>,
    vd: &[Polynomial<f64>],
    vq: &[Polynomial<f64>],
) -> (Vec<Polynomial<f64>>, Vec<Polynomial<f64>>) {
    let n = vd.len();
    let ring = vd[0].ring().clone();
    let mut ps = Vec::with_capacity(n);
    let mut qs = Vec::with_capacity(n);
    for i in 0..n {
        // Re/Im parts of the current sum_k Y_ik V_k.
        let mut ire = Polynomial::zero(&ring);
        let mut iim = Polynomial::zero(&ring);
        for k in 0..n {
            let (g, b) = (y[(i, k)].re, y[(i, k)].im);
            if g == 0.0 && b == 0.0 {
                continue;
            }
            ire = &ire + &(&vd[k].scale(&g) - &vq[k].scale(&b));
            iim = &iim + &(&vd[k].scale(&b) + &vq[k].scale(&g));
        }
        // S = V conj(I): P = Vd Ire + Vq Iim, Q = Vq Ire - Vd Iim.
        ps.push(&(&vd[i] * &ire) + &(&vq[i] * &iim));
        qs.push(&(&vq[i] * &ire) - &(&vd[i] * &iim));
    }
    (ps, qs)
}

/// Power-flow equations in rectangular coordinates with the slack voltage
/// substituted. Unknowns are `Vd` then `Vq` of the non-slack buses (named
/// `Vd<id>`, `Vq<id>`); the result is square with `2n - 2` quadratics.
///
/// PQ buses contribute their P and Q balance, PV buses their P balance and
/// `Vd^2 + Vq^2 - v_set^2`.
pub fn powerflow_system(net: &Network) -> PolySystem<f64> {
    let ns = net.non_slack();
    let mut names: Vec<String> = ns.iter().map(|&b| format!("Vd{}", net.buses[b].id)).collect();
    names.extend(ns.iter().map(|&b| format!("Vq{}", net.buses[b].id)));
    let ring = Ring::new(&names).expect("bus ids give valid distinct names");
    let m = ns.len();
    let mut vd = Vec::with_capacity(net.nbuses());
    let mut vq = Vec::with_capacity(net.nbuses());
    for b in 0..net.nbuses() {
        if b == net.slack {
            vd.push(Polynomial::constant(&ring, net.slack_voltage()));
            vq.push(Polynomial::zero(&ring));
        } else {
            let j = ns.iter().position(|&x| x == b).unwrap();
            vd.push(Polynomial::var(&ring, j));
            vq.push(Polynomial::var(&ring, m + j));
        }
    }
    let (ps, qs) = injection_polys(&net.y, &vd, &vq);
    let mut eqs = Vec::with_capacity(2 * m);
    let mut second = Vec::with_capacity(m);
    for &b in &ns {
        let bus = &net.buses[b];
        let p = &ps[b] + &Polynomial::constant(&ring, bus.p_load - bus.p_set);
        eqs.push(p);
        match bus.kind {
            BusKind::Pq => second.push(&qs[b] + &Polynomial::constant(&ring, bus.q_load - bus.q_set)),
            _ => {
                let v = bus.v_set.unwrap();
                second.push(&(&(&vd[b] * &vd[b]) + &(&vq[b] * &vq[b])) - &Polynomial::constant(&ring, v * v));
            }
        }
    }
    eqs.extend(second);
    PolySystem::new(&ring, eqs).expect("all equations share one ring")
}

fn required(bus: &Bus, val: Option<f64>, field: &'static str) -> Result<f64, NetworkError> {
    match val {
        Some(v) => Ok(v),
        None if !bus.kind.is_generator() && field != "v_min" && field != "v_max" => Ok(0.0),
        None => Err(NetworkError::MissingLimits { bus: bus.id, field }),
    }
}

struct Limits {
    pmax: Vec<f64>,
    pmin: Vec<f64>,
    qmax: Vec<f64>,
    qmin: Vec<f64>,
    vmax: Vec<f64>,
    vmin: Vec<f64>,
}

fn limits(net: &Network) -> Result<Limits, NetworkError> {
    let mut l = Limits {
        pmax: vec![],
        pmin: vec![],
        qmax: vec![],
        qmin: vec![],
        vmax: vec![],
        vmin: vec![],
    };
    for b in &net.buses {
        l.pmax.push(required(b, b.p_max, "p_max")?);
        l.pmin.push(required(b, b.p_min, "p_min")?);
        l.qmax.push(required(b, b.q_max, "q_max")?);
        l.qmin.push(required(b, b.q_min, "q_min")?);
        l.vmax.push(required(b, b.v_max, "v_max")?);
        l.vmin.push(required(b, b.v_min, "v_min")?);
    }
    Ok(l)
}

fn group<C: crate::poly::Coeff>(
    ring: &Arc<Ring>,
    gp: &[Polynomial<C>],
    gq: &[Polynomial<C>],
    gv: &[Polynomial<C>],
    l: &Limits,
    lift: impl Fn(f64) -> C,
) -> (Vec<Polynomial<C>>, Vec<ConstraintLabel>, Vec<bool>) {
    let n = gp.len();
    let c = |v: f64| Polynomial::constant(ring, lift(v));
    let mut g = Vec::with_capacity(6 * n);
    let mut labels = Vec::with_capacity(6 * n);
    let mut tight = Vec::with_capacity(6 * n);
    let blocks: [(&[Polynomial<C>], &[f64], &[f64], Quantity); 3] = [
        (gp, &l.pmax, &l.pmin, Quantity::P),
        (gq, &l.qmax, &l.qmin, Quantity::Q),
        (gv, &l.vmax, &l.vmin, Quantity::V),
    ];
    for (polys, hi, lo, quantity) in blocks {
        let sq = |v: f64| if quantity == Quantity::V { v * v } else { v };
        for i in 0..n {
            g.push(&c(sq(hi[i])) - &polys[i]);
            labels.push(ConstraintLabel { quantity, side: Side::Max, bus: i });
            tight.push(hi[i] == lo[i]);
        }
        for i in 0..n {
            g.push(&polys[i] - &c(sq(lo[i])));
            labels.push(ConstraintLabel { quantity, side: Side::Min, bus: i });
            tight.push(hi[i] == lo[i]);
        }
    }
    (g, labels, tight)
}

/// Real OPF model over `[Vd1..Vdn, Vq1..Vqn]` (all buses, file order).
pub fn opf_constraints(net: &Network) -> Result<OpfPolynomials<f64>, NetworkError> {
    let l = limits(net)?;
    let n = net.nbuses();
    let mut names: Vec<String> = net.buses.iter().map(|b| format!("Vd{}", b.id)).collect();
    names.extend(net.buses.iter().map(|b| format!("Vq{}", b.id)));
    let ring = Ring::new(&names).expect("bus ids give valid distinct names");
    let vd: Vec<_> = (0..n).map(|i| Polynomial::var(&ring, i)).collect();
    let vq: Vec<_> = (0..n).map(|i| Polynomial::var(&ring, n + i)).collect();
    let (ps, qs) = injection_polys(&net.y, &vd, &vq);
    let gp: Vec<_> = ps
        .iter()
        .zip(&net.buses)
        .map(|(p, b)| p + &Polynomial::constant(&ring, b.p_load))
        .collect();
    let gq: Vec<_> = qs
        .iter()
        .zip(&net.buses)
        .map(|(q, b)| q + &Polynomial::constant(&ring, b.q_load))
        .collect();
    let gv: Vec<_> = (0..n).map(|i| &(&vd[i] * &vd[i]) + &(&vq[i] * &vq[i])).collect();
    let mut objective = Polynomial::zero(&ring);
    for (i, b) in net.buses.iter().enumerate() {
        if b.kind.is_generator() && b.cost != 0.0 {
            objective = &objective + &gp[i].scale(&b.cost);
        }
    }
    let (g, labels, tight) = group(&ring, &gp, &gq, &gv, &l, |v| v);
    Ok(OpfPolynomials {
        ring,
        objective,
        g,
        labels,
        tight,
    })
}

/// Complex OPF model over `[V1..Vn, W1..Wn]` where `Wi` stands for the
/// conjugate of `Vi`. Every polynomial is real-valued when `W = conj(V)`.
pub fn complex_opf_constraints(net: &Network) -> Result<OpfPolynomials<Complex64>, NetworkError> {
    let l = limits(net)?;
    let n = net.nbuses();
    let mut names: Vec<String> = net.buses.iter().map(|b| format!("V{}", b.id)).collect();
    names.extend(net.buses.iter().map(|b| format!("W{}", b.id)));
    let ring = Ring::new(&names).expect("bus ids give valid distinct names");
    let v: Vec<Polynomial<Complex64>> = (0..n).map(|i| Polynomial::var(&ring, i)).collect();
    let w: Vec<Polynomial<Complex64>> = (0..n).map(|i| Polynomial::var(&ring, n + i)).collect();
    let half = Complex64::new(0.5, 0.0);
    let neg_half_j = Complex64::new(0.0, -0.5);
    let mut gp = Vec::with_capacity(n);
    let mut gq = Vec::with_capacity(n);
    for i in 0..n {
        // s = V_i sum_k conj(Y_ik) W_k ; conj(s) = W_i sum_k Y_ik V_k
        let mut cur_conj = Polynomial::zero(&ring);
        let mut cur = Polynomial::zero(&ring);
        for k in 0..n {
            let yik = net.y[(i, k)];
            if yik.norm() == 0.0 {
                continue;
            }
            cur_conj = &cur_conj + &w[k].scale(&yik.conj());
            cur = &cur + &v[k].scale(&yik);
        }
        let s = &v[i] * &cur_conj;
        let sc = &w[i] * &cur;
        let b = &net.buses[i];
        gp.push(&(&s + &sc).scale(&half) + &Polynomial::constant(&ring, Complex64::new(b.p_load, 0.0)));
        gq.push(&(&s - &sc).scale(&neg_half_j) + &Polynomial::constant(&ring, Complex64::new(b.q_load, 0.0)));
    }
    let gv: Vec<_> = (0..n).map(|i| &v[i] * &w[i]).collect();
    let mut objective = Polynomial::zero(&ring);
    for (i, b) in net.buses.iter().enumerate() {
        if b.kind.is_generator() && b.cost != 0.0 {
            objective = &objective + &gp[i].scale(&Complex64::new(b.cost, 0.0));
        }
    }
    let (g, labels, tight) = group(&ring, &gp, &gq, &gv, &l, |x| Complex64::new(x, 0.0));
    Ok(OpfPolynomials {
        ring,
        objective,
        g,
        labels,
        tight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus() -> Network {
        Network::from_json(
            r#"{"buses":[{"id":1,"kind":"slack","v_set":1.0},
                         {"id":2,"kind":"pq","p_load":0.25,"q_load":0.25}],
                "lines":[{"from":1,"to":2,"r":0.25,"x":0.25}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn admittance_of_single_line() {
        let y = two_bus().admittance().clone();
        let c = |re, im| Complex64::new(re, im);
        assert!((y[(0, 0)] - c(2.0, -2.0)).norm() < 1e-15);
        assert!((y[(0, 1)] - c(-2.0, 2.0)).norm() < 1e-15);
        assert!((y[(1, 0)] - c(-2.0, 2.0)).norm() < 1e-15);
        assert!((y[(1, 1)] - c(2.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_topology() {
        let e = Network::from_json(r#"{"buses":[{"id":1,"kind":"slack","v_set":1.0},{"id":2,"kind":"pq"}],"lines":[]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("disconnected graph"), "{e}");
        let e = Network::from_json(
            r#"{"buses":[{"id":1,"kind":"slack","v_set":1.0},{"id":2,"kind":"slack","v_set":1.0}],
                "lines":[{"from":1,"to":2,"r":0.1,"x":0.1}]}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("duplicate slack"), "{e}");
    }

    #[test]
    fn schema_errors_name_the_field() {
        let e = Network::from_json(r#"{"buses":[{"id":1,"kind":"slack","vset":1.0}],"lines":[]}"#).unwrap_err();
        assert!(e.to_string().contains("vset"), "{e}");
        let e = Network::from_json(
            r#"{"buses":[{"id":1,"kind":"slack","v_set":1.0},{"id":2,"kind":"pq"}],
                "lines":[{"from":1,"to":2,"r":-0.1,"x":0.1}]}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("lines[0].r"), "{e}");
    }

    #[test]
    fn two_bus_powerflow_shape() {
        let sys = powerflow_system(&two_bus());
        assert_eq!(sys.len(), 2);
        assert!(sys.is_square());
        assert_eq!(sys.degrees(), vec![2, 2]);
        assert_eq!(sys.ring().names(), ["Vd2", "Vq2"]);
    }
}
