//! Moment (Lasserre) relaxations of the OPF problem.
//!
//! [`build_msos_r`] works over the real voltage components
//! `x = (Vd_1..Vd_n, Vq_1..Vq_n)`; every monomial `x^a` becomes a lifted
//! variable `y_a`. [`build_msos_c`] works over the complex voltages and
//! lifts `V^a conj(V)^b` to `yh_{a,b}`, stored as a real and an imaginary
//! part tied together by the Hermitian identifications
//! `yh_{a,b} = conj(yh_{b,a})`; its Hermitian blocks are realified as
//! `[[Re, -Im], [Im, Re]]`.
//!
//! Both hierarchies are invariant under a global rotation of the voltages,
//! so an interior-point solution of the real relaxation is typically a
//! rotation average. The rank test therefore looks at the Hermitian
//! second-moment matrix `W = L(V V^H)` (directly available in the complex
//! mode, compressed from `L(x x^T)` in the real mode), which is rank one
//! exactly when the relaxation is tight up to rotation.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::network::{complex_opf_constraints, opf_constraints, ConstraintLabel, Network, NetworkError, OpfPolynomials, Quantity, Side};
use crate::poly::Polynomial;
use crate::sdp::{BlockEntry, BlockKind, SdpBlock, SdpError, SdpProblem, SdpSolution};

#[derive(Debug, Error)]
pub enum MomentError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("relaxation order must be at least {min}, got {got}")]
    InvalidOrder { min: usize, got: usize },
    #[error("moment block of size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("point has {got} voltages, network has {expected} buses")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("relaxation was built structure-only and has no entries")]
    StructureOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum RelaxationMode {
    /// Over the `2n` real voltage components.
    Real,
    /// Over the `n` complex voltages.
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum RelaxationKind {
    Full,
    /// First-order PSD blocks plus 2×2 minor conditions on the higher-order
    /// blocks.
    Mixed,
}

/// All exponent vectors of total degree `<= degree`, graded, constant
/// first; within a degree in descending lex order (`x1^2, x1 x2, ...`).
pub fn graded_exponents(nvars: usize, degree: usize) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        out.push(vec![]);
        return out;
    }
    for d in 0..=degree as u32 {
        rec(nvars, d, &mut Vec::new(), &mut out);
    }
    out
}

/// `C(n, k)` without overflow for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialBasis {
    pub entries: Vec<Vec<u32>>,
    pub mode: RelaxationMode,
}

impl MonomialBasis {
    pub fn new(nbuses: usize, gamma: usize, mode: RelaxationMode) -> Self {
        let nvars = match mode {
            RelaxationMode::Real => 2 * nbuses,
            RelaxationMode::Complex => nbuses,
        };
        MonomialBasis {
            entries: graded_exponents(nvars, gamma),
            mode,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LiftedKey {
    /// `y_a`.
    Real(Vec<u32>),
    /// Real or imaginary part of `yh_{a,b}`.
    Complex { a: Vec<u32>, b: Vec<u32>, imag: bool },
}

impl LiftedKey {
    pub fn label(&self) -> String {
        fn digits(e: &[u32]) -> String {
            if e.iter().all(|&v| v < 10) {
                e.iter().map(|v| v.to_string()).collect()
            } else {
                e.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(".")
            }
        }
        match self {
            LiftedKey::Real(a) => format!("y_{}", digits(a)),
            LiftedKey::Complex { a, b, imag } => {
                format!("yh_{},{}.{}", digits(a), digits(b), if *imag { "im" } else { "re" })
            }
        }
    }
}

/// Injective map between lifted keys and variable ids (id 0 is the
/// constant moment).
#[derive(Clone, Debug, Default)]
pub struct LiftedVarIndex {
    keys: Vec<LiftedKey>,
    map: HashMap<LiftedKey, usize>,
}

impl LiftedVarIndex {
    fn id(&mut self, key: LiftedKey) -> usize {
        if let Some(&i) = self.map.get(&key) {
            return i;
        }
        self.keys.push(key.clone());
        self.map.insert(key, self.keys.len() - 1);
        self.keys.len() - 1
    }

    pub fn get(&self, key: &LiftedKey) -> Option<usize> {
        self.map.get(key).copied()
    }

    pub fn keys(&self) -> &[LiftedKey] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MomentOptions {
    /// Refuse moment blocks larger than this.
    pub max_moment_size: usize,
    /// Lay out the basis and block sizes without generating entries.
    pub structure_only: bool,
    /// Restrict the real moment block to the complement of the kernel
    /// forced by equality constraints (see [`build_msos_r`]).
    pub facial_reduction: bool,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            max_moment_size: 5000,
            structure_only: false,
            facial_reduction: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MomentRelaxation {
    pub problem: SdpProblem,
    pub mode: RelaxationMode,
    pub kind: RelaxationKind,
    pub gamma: usize,
    pub nbuses: usize,
    pub basis: MonomialBasis,
    pub index: LiftedVarIndex,
    /// Size of the (realified, in complex mode) order-gamma moment matrix.
    pub moment_size: usize,
    /// Size of each (realified) localizing matrix.
    pub localizing_size: usize,
    /// Number of localizing conditions (`6n`, one per one-sided bound).
    pub localizing_count: usize,
    pub structure_only: bool,
    opf: OpfPolynomials<f64>,
}

// A symbolic linear form over lifted ids, and a dense symbolic matrix.
type Lin = Vec<(usize, f64)>;
type SymMat = Vec<Vec<Lin>>;

fn merge(mut l: Lin) -> Lin {
    l.sort_by_key(|t| t.0);
    let mut out: Lin = Vec::with_capacity(l.len());
    for (v, c) in l {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += c,
            _ => out.push((v, c)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

fn add_exp(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn label_of(l: &ConstraintLabel, net: &Network) -> String {
    let q = match l.quantity {
        Quantity::P => "P",
        Quantity::Q => "Q",
        Quantity::V => "V",
    };
    let s = match l.side {
        Side::Max => "max",
        Side::Min => "min",
    };
    format!("{q}{s}@{}", net.buses()[l.bus].id)
}

struct Builder {
    index: LiftedVarIndex,
    problem: SdpProblem,
}

impl Builder {
    fn new(mode: RelaxationMode, n: usize) -> Self {
        let mut index = LiftedVarIndex::default();
        match mode {
            RelaxationMode::Real => index.id(LiftedKey::Real(vec![0; 2 * n])),
            RelaxationMode::Complex => index.id(LiftedKey::Complex {
                a: vec![0; n],
                b: vec![0; n],
                imag: false,
            }),
        };
        Builder {
            index,
            problem: SdpProblem::default(),
        }
    }

    /// `L(g b b^T)` in the real mode.
    fn real_loc(&mut self, g: &Polynomial<f64>, basis: &[Vec<u32>]) -> SymMat {
        let n = basis.len();
        let mut m: SymMat = vec![vec![Vec::new(); n]; n];
        for r in 0..n {
            for c in r..n {
                let base = add_exp(&basis[r], &basis[c]);
                let lin: Lin = g
                    .terms()
                    .iter()
                    .map(|(mono, coef)| (self.index.id(LiftedKey::Real(add_exp(&mono.0, &base))), *coef))
                    .collect();
                let lin = merge(lin);
                m[c][r] = lin.clone();
                m[r][c] = lin;
            }
        }
        m
    }

    /// `L(g z z^H)` in the complex mode, as (real part, imaginary part).
    fn complex_loc(&mut self, g: &Polynomial<Complex64>, basis: &[Vec<u32>], n: usize) -> (SymMat, SymMat) {
        let k = basis.len();
        let mut re: SymMat = vec![vec![Vec::new(); k]; k];
        let mut im: SymMat = vec![vec![Vec::new(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let mut lr = Lin::new();
                let mut li = Lin::new();
                for (mono, c) in g.terms() {
                    let a = add_exp(&mono.0[..n], &basis[i]);
                    let b = add_exp(&mono.0[n..], &basis[j]);
                    let yr = self.index.id(LiftedKey::Complex {
                        a: a.clone(),
                        b: b.clone(),
                        imag: false,
                    });
                    let yi = self.index.id(LiftedKey::Complex { a, b, imag: true });
                    // (cr + i ci)(yr + i yi)
                    lr.push((yr, c.re));
                    lr.push((yi, -c.im));
                    li.push((yr, c.im));
                    li.push((yi, c.re));
                }
                re[i][j] = merge(lr);
                im[i][j] = merge(li);
            }
        }
        (re, im)
    }

    fn push_block(&mut self, label: String, kind: BlockKind, m: &SymMat) {
        let k = self.problem.blocks.len();
        let n = m.len();
        self.problem.blocks.push(SdpBlock { label, size: n, kind });
        for r in 0..n {
            for c in r..n {
                for &(var, coef) in &m[r][c] {
                    self.problem.entries.push(BlockEntry {
                        block: k,
                        row: r,
                        col: c,
                        var,
                        coef,
                    });
                }
            }
        }
    }

    fn push_zero_equations(&mut self, m: &SymMat) {
        for r in 0..m.len() {
            for c in r..m.len() {
                if !m[r][c].is_empty() {
                    self.problem.equations.push(m[r][c].clone());
                }
            }
        }
    }

    fn finish(mut self) -> (SdpProblem, LiftedVarIndex) {
        self.problem.var_labels = self.index.keys.iter().map(|k| k.label()).collect();
        (self.problem, self.index)
    }
}

fn realify(re: &SymMat, im: &SymMat) -> SymMat {
    let k = re.len();
    let neg = |l: &Lin| l.iter().map(|&(v, c)| (v, -c)).collect::<Lin>();
    let mut out: SymMat = vec![vec![Vec::new(); 2 * k]; 2 * k];
    for i in 0..k {
        for j in 0..k {
            out[i][j] = re[i][j].clone();
            out[k + i][k + j] = re[i][j].clone();
            out[i][k + j] = neg(&im[i][j]);
            out[k + i][j] = im[i][j].clone();
        }
    }
    out
}

/// Coefficient vectors (over `basis`) of `h x^b` for every equality
/// polynomial `h` and monomial `x^b` that keep the product inside the basis.
/// The moment matrix annihilates all of them once `L(h x^d) = 0` holds.
fn forced_kernel(eqs: &[&Polynomial<f64>], basis: &[Vec<u32>], gamma: usize) -> Vec<Vec<f64>> {
    let pos: HashMap<&Vec<u32>, usize> = basis.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut out = Vec::new();
    for h in eqs {
        let Some(dh) = h.total_degree() else { continue };
        let dh = dh as usize;
        if dh > gamma {
            continue;
        }
        for b in basis.iter().filter(|b| b.iter().sum::<u32>() as usize + dh <= gamma) {
            let mut v = vec![0.0; basis.len()];
            for (mono, c) in h.terms() {
                v[pos[&add_exp(&mono.0, b)]] += c;
            }
            out.push(v);
        }
    }
    out
}

/// Orthonormal basis of the complement of `span(vectors)` in `R^n`.
fn complement(vectors: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    let mut kkt = DMatrix::<f64>::zeros(n, n);
    for v in vectors {
        let col = nalgebra::DVector::from_column_slice(v);
        kkt += &col * col.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(kkt);
    let top = eig.eigenvalues.amax();
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= 1e-10 * top.max(1.0)).collect();
    eig.eigenvectors.select_columns(&keep)
}

/// `Q^T M Q` for a symbolic symmetric `M`.
fn congruence(m: &SymMat, q: &DMatrix<f64>) -> SymMat {
    let k = q.ncols();
    let n = m.len();
    let mut out: SymMat = vec![vec![Vec::new(); k]; k];
    for a in 0..k {
        for b in a..k {
            let mut acc: HashMap<usize, f64> = HashMap::new();
            for r in 0..n {
                let qa = q[(r, a)];
                if qa.abs() < 1e-15 {
                    continue;
                }
                for c in 0..n {
                    let w = qa * q[(c, b)];
                    if w.abs() < 1e-15 {
                        continue;
                    }
                    for &(v, coef) in &m[r][c] {
                        *acc.entry(v).or_insert(0.0) += w * coef;
                    }
                }
            }
            let mut lin: Lin = acc.into_iter().filter(|t| t.1.abs() > 1e-13).collect();
            lin.sort_by_key(|t| t.0);
            out[b][a] = lin.clone();
            out[a][b] = lin;
        }
    }
    out
}

fn check_order(gamma: usize, min: usize) -> Result<(), MomentError> {
    if gamma < min {
        return Err(MomentError::InvalidOrder { min, got: gamma });
    }
    Ok(())
}

/// Indices of constraint rows that are the `Max` half of a tight pair (the
/// `Min` half is dropped as redundant).
fn tight_rows(opf_tight: &[bool], labels: &[ConstraintLabel]) -> Vec<bool> {
    labels.iter().zip(opf_tight).map(|(l, &t)| t && l.side == Side::Max).collect()
}

/// Real moment relaxation `MSOS_R(gamma)`.
///
/// One moment block `L(x_g x_g^T)` and one localizing block
/// `L(g_i x_{g-1} x_{g-1}^T)` per one-sided bound. A bound pair with equal
/// limits is an equality `h = 0`: its two localizing blocks are replaced by
/// the linear equations `L(h x_{g-1} x_{g-1}^T) = 0`. Those equations force
/// `L(x_g x_g^T) v = 0` for the coefficient vector `v` of every `h x^b` of
/// degree `<= gamma`, so (with `facial_reduction`) the block is restricted to
/// the orthogonal complement of these vectors; `moment_size` still reports
/// the unreduced size.
pub fn build_msos_r(net: &Network, gamma: usize, opts: &MomentOptions) -> Result<MomentRelaxation, MomentError> {
    check_order(gamma, 1)?;
    let n = net.nbuses();
    let opf = opf_constraints(net)?;
    let basis = MonomialBasis::new(n, gamma, RelaxationMode::Real);
    let loc_basis = graded_exponents(2 * n, gamma - 1);
    if basis.len() > opts.max_moment_size {
        return Err(MomentError::TooLarge {
            size: basis.len(),
            limit: opts.max_moment_size,
        });
    }
    let mut b = Builder::new(RelaxationMode::Real, n);
    if !opts.structure_only {
        let one = Polynomial::one(&opf.ring);
        let m = b.real_loc(&one, &basis.entries);
        let drop_tight = tight_rows(&opf.tight, &opf.labels);
        let eqs: Vec<&Polynomial<f64>> = opf.g.iter().zip(&drop_tight).filter(|t| *t.1).map(|t| t.0).collect();
        let kernel = if opts.facial_reduction { forced_kernel(&eqs, &basis.entries, gamma) } else { vec![] };
        if kernel.is_empty() {
            b.push_block("moment".into(), BlockKind::Psd, &m);
        } else {
            let q = complement(&kernel, basis.len());
            b.push_block("moment".into(), BlockKind::Psd, &congruence(&m, &q));
        }
        for (i, g) in opf.g.iter().enumerate() {
            if opf.tight[i] && !drop_tight[i] {
                continue;
            }
            let l = b.real_loc(g, &loc_basis);
            if drop_tight[i] {
                b.push_zero_equations(&l);
            } else {
                b.push_block(label_of(&opf.labels[i], net), BlockKind::Psd, &l);
            }
        }
        let obj: Lin = opf
            .objective
            .terms()
            .iter()
            .map(|(mono, c)| (b.index.id(LiftedKey::Real(mono.0.clone())), *c))
            .collect();
        b.problem.objective = merge(obj);
    }
    let (problem, index) = b.finish();
    Ok(MomentRelaxation {
        problem,
        mode: RelaxationMode::Real,
        kind: RelaxationKind::Full,
        gamma,
        nbuses: n,
        moment_size: basis.len(),
        localizing_size: loc_basis.len(),
        localizing_count: opf.g.len(),
        basis,
        index,
        structure_only: opts.structure_only,
        opf,
    })
}

/// Complex moment relaxation `MSOS_C(gamma)`, realified.
pub fn build_msos_c(net: &Network, gamma: usize, opts: &MomentOptions) -> Result<MomentRelaxation, MomentError> {
    check_order(gamma, 1)?;
    let n = net.nbuses();
    let copf = complex_opf_constraints(net)?;
    let opf = opf_constraints(net)?;
    let basis = MonomialBasis::new(n, gamma, RelaxationMode::Complex);
    let loc_basis = graded_exponents(n, gamma - 1);
    if 2 * basis.len() > opts.max_moment_size {
        return Err(MomentError::TooLarge {
            size: 2 * basis.len(),
            limit: opts.max_moment_size,
        });
    }
    let mut b = Builder::new(RelaxationMode::Complex, n);
    if !opts.structure_only {
        let one = Polynomial::one(&copf.ring);
        let (re, im) = b.complex_loc(&one, &basis.entries, n);
        b.push_block("moment".into(), BlockKind::Psd, &realify(&re, &im));
        let drop_tight = tight_rows(&copf.tight, &copf.labels);
        for (i, g) in copf.g.iter().enumerate() {
            if copf.tight[i] && !drop_tight[i] {
                continue;
            }
            let (re, im) = b.complex_loc(g, &loc_basis, n);
            if drop_tight[i] {
                b.push_zero_equations(&re);
                b.push_zero_equations(&im);
            } else {
                b.push_block(label_of(&copf.labels[i], net), BlockKind::Psd, &realify(&re, &im));
            }
        }
        let mut obj = Lin::new();
        for (mono, c) in copf.objective.terms() {
            let a = mono.0[..n].to_vec();
            let bb = mono.0[n..].to_vec();
            let yr = b.index.id(LiftedKey::Complex {
                a: a.clone(),
                b: bb.clone(),
                imag: false,
            });
            let yi = b.index.id(LiftedKey::Complex { a, b: bb, imag: true });
            obj.push((yr, c.re));
            obj.push((yi, -c.im));
        }
        b.problem.objective = merge(obj);
        // Hermitian identifications.
        let keys: Vec<LiftedKey> = b.index.keys.clone();
        for (id, key) in keys.iter().enumerate() {
            let LiftedKey::Complex { a, b: bb, imag } = key else { continue };
            if a == bb {
                if *imag {
                    b.problem.equations.push(vec![(id, 1.0)]);
                }
                continue;
            }
            if a > bb {
                continue; // handled from the partner
            }
            let partner = LiftedKey::Complex {
                a: bb.clone(),
                b: a.clone(),
                imag: *imag,
            };
            if let Some(pid) = b.index.get(&partner) {
                let sign = if *imag { 1.0 } else { -1.0 };
                b.problem.equations.push(vec![(id, 1.0), (pid, sign)]);
            }
        }
    }
    let (problem, index) = b.finish();
    Ok(MomentRelaxation {
        problem,
        mode: RelaxationMode::Complex,
        kind: RelaxationKind::Full,
        gamma,
        nbuses: n,
        moment_size: 2 * basis.len(),
        localizing_size: 2 * loc_basis.len(),
        localizing_count: copf.g.len(),
        basis,
        index,
        structure_only: opts.structure_only,
        opf,
    })
}

/// Mixed SDP/SOCP weakening of `MSOS_R(gamma)`: the first-order relaxation
/// with full PSD constraints plus `2×2` principal-minor conditions on every
/// pair of rows of the order-`gamma` moment and localizing matrices.
pub fn build_mixed_sdpsocp(net: &Network, gamma: usize, opts: &MomentOptions) -> Result<MomentRelaxation, MomentError> {
    check_order(gamma, 2)?;
    let n = net.nbuses();
    let opf = opf_constraints(net)?;
    let basis = MonomialBasis::new(n, gamma, RelaxationMode::Real);
    let loc_basis = graded_exponents(2 * n, gamma - 1);
    let first = graded_exponents(2 * n, 1);
    if basis.len() > opts.max_moment_size {
        return Err(MomentError::TooLarge {
            size: basis.len(),
            limit: opts.max_moment_size,
        });
    }
    let mut b = Builder::new(RelaxationMode::Real, n);
    if !opts.structure_only {
        let one = Polynomial::one(&opf.ring);
        let drop_tight = tight_rows(&opf.tight, &opf.labels);
        // First-order relaxation.
        let m1 = b.real_loc(&one, &first);
        b.push_block("moment1".into(), BlockKind::Psd, &m1);
        for (i, g) in opf.g.iter().enumerate() {
            if opf.tight[i] && !drop_tight[i] {
                continue;
            }
            let l = b.real_loc(g, &first[..1]);
            if drop_tight[i] {
                b.push_zero_equations(&l);
            } else {
                b.push_block(label_of(&opf.labels[i], net), BlockKind::Psd, &l);
            }
        }
        // Higher-order blocks, weakened to 2×2 minors.
        type Key = Vec<(usize, u64)>;
        let mut seen: std::collections::HashSet<(Key, Key, Key)> = Default::default();
        let key = |l: &Lin| -> Key { l.iter().map(|&(v, c)| (v, c.to_bits())).collect() };
        let mut minors = |b: &mut Builder, label: &str, m: &SymMat, skip_first: usize| {
            for i in 0..m.len() {
                for k in i + 1..m.len() {
                    if k < skip_first {
                        continue; // already inside a PSD block
                    }
                    let t = (key(&m[i][i]), key(&m[i][k]), key(&m[k][k]));
                    if m[i][k].is_empty() || !seen.insert(t) {
                        continue;
                    }
                    let sub: SymMat = vec![vec![m[i][i].clone(), m[i][k].clone()], vec![m[i][k].clone(), m[k][k].clone()]];
                    b.push_block(format!("{label}[{i},{k}]"), BlockKind::SocpMinor, &sub);
                }
            }
        };
        let m = b.real_loc(&one, &basis.entries);
        minors(&mut b, "moment", &m, first.len());
        for (i, g) in opf.g.iter().enumerate() {
            if opf.tight[i] && !drop_tight[i] {
                continue;
            }
            let l = b.real_loc(g, &loc_basis);
            if drop_tight[i] {
                b.push_zero_equations(&l);
            } else {
                minors(&mut b, &label_of(&opf.labels[i], net), &l, 0);
            }
        }
        let obj: Lin = opf
            .objective
            .terms()
            .iter()
            .map(|(mono, c)| (b.index.id(LiftedKey::Real(mono.0.clone())), *c))
            .collect();
        b.problem.objective = merge(obj);
    }
    let (problem, index) = b.finish();
    Ok(MomentRelaxation {
        problem,
        mode: RelaxationMode::Real,
        kind: RelaxationKind::Mixed,
        gamma,
        nbuses: n,
        moment_size: basis.len(),
        localizing_size: loc_basis.len(),
        localizing_count: opf.g.len(),
        basis,
        index,
        structure_only: opts.structure_only,
        opf,
    })
}

/// Lifted assignment of a voltage vector: every lifted variable takes the
/// value of its monomial at `v`.
pub fn lift_point(relax: &MomentRelaxation, v: &[Complex64]) -> Result<Vec<f64>, MomentError> {
    if v.len() != relax.nbuses {
        return Err(MomentError::DimensionMismatch {
            expected: relax.nbuses,
            got: v.len(),
        });
    }
    let x: Vec<f64> = v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect();
    let pow = |base: &[Complex64], e: &[u32]| -> Complex64 {
        base.iter().zip(e).fold(Complex64::new(1.0, 0.0), |acc, (z, &k)| acc * z.powu(k))
    };
    let vc: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
    Ok(relax
        .index
        .keys()
        .iter()
        .map(|k| match k {
            LiftedKey::Real(a) => x.iter().zip(a).map(|(xi, &e)| xi.powi(e as i32)).product(),
            LiftedKey::Complex { a, b, imag } => {
                let z = pow(v, a) * pow(&vc, b);
                if *imag {
                    z.im
                } else {
                    z.re
                }
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ExactnessReport {
    /// Numerical rank of `W = L(V V^H)` (eigenvalues above `1e-5 λ1`).
    pub rank_estimate: usize,
    /// `λ2 / λ1` of `W`.
    pub eigenvalue_ratio: f64,
    #[serde(skip)]
    pub extracted_voltages: Option<Vec<Complex64>>,
    pub relaxation_bound: f64,
    /// Objective of the extracted point.
    pub extracted_objective: Option<f64>,
    /// Largest violation of the OPF inequalities at the extracted point.
    pub max_violation: Option<f64>,
    /// Extracted point is feasible to 1e-6 and matches the bound to 1e-6.
    pub certified: bool,
}

/// Threshold on `λ2 / λ1` below which the moment matrix counts as rank one.
pub const RANK_RATIO_THRESHOLD: f64 = 1e-5;

impl MomentRelaxation {
    /// Hermitian second-moment matrix `W_ik = L(V_i conj(V_k))` at `y`.
    pub fn second_moment(&self, y: &[f64]) -> DMatrix<Complex64> {
        let n = self.nbuses;
        let mut w = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        let unit = |len: usize, i: usize| {
            let mut e = vec![0u32; len];
            e[i] = 1;
            e
        };
        match self.mode {
            RelaxationMode::Real => {
                let get = |a: usize, b: usize| -> f64 {
                    let e = add_exp(&unit(2 * n, a), &unit(2 * n, b));
                    self.index.get(&LiftedKey::Real(e)).map_or(0.0, |id| y[id])
                };
                for i in 0..n {
                    for k in 0..n {
                        let re = get(i, k) + get(n + i, n + k);
                        let im = get(n + i, k) - get(i, n + k);
                        w[(i, k)] = Complex64::new(re, im);
                    }
                }
            }
            RelaxationMode::Complex => {
                let get = |a: &[u32], b: &[u32], imag: bool| {
                    self.index
                        .get(&LiftedKey::Complex {
                            a: a.to_vec(),
                            b: b.to_vec(),
                            imag,
                        })
                        .map(|id| y[id])
                };
                for i in 0..n {
                    for k in 0..n {
                        let (a, b) = (unit(n, i), unit(n, k));
                        let z = match (get(&a, &b, false), get(&a, &b, true)) {
                            (Some(re), Some(im)) => Complex64::new(re, im),
                            _ => {
                                let re = get(&b, &a, false).unwrap_or(0.0);
                                let im = get(&b, &a, true).unwrap_or(0.0);
                                Complex64::new(re, -im)
                            }
                        };
                        w[(i, k)] = z;
                    }
                }
            }
        }
        let wh = w.adjoint();
        (w + wh) * Complex64::new(0.5, 0.0)
    }

    /// OPF objective at a voltage vector.
    pub fn objective_at(&self, v: &[Complex64]) -> f64 {
        let x: Vec<f64> = v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect();
        self.opf.objective.eval_exact(&x).expect("point has one value per variable")
    }

    /// Largest violation of `g_i(V) >= 0` (zero when feasible).
    pub fn max_violation(&self, v: &[Complex64]) -> f64 {
        let x: Vec<f64> = v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect();
        self.opf.g.iter().map(|g| (-g.eval_exact(&x).expect("point has one value per variable")).max(0.0)).fold(0.0, f64::max)
    }

    pub fn opf(&self) -> &OpfPolynomials<f64> {
        &self.opf
    }
}

/// Rank test and voltage extraction from a solved relaxation.
pub fn check_exactness_and_extract(relax: &MomentRelaxation, sol: &SdpSolution) -> Result<ExactnessReport, MomentError> {
    check_exactness(relax, &sol.x, sol.primal_objective)
}

/// Rank test on a lifted assignment `y` whose relaxation objective is `bound`.
pub fn check_exactness(relax: &MomentRelaxation, y: &[f64], bound: f64) -> Result<ExactnessReport, MomentError> {
    if relax.structure_only {
        return Err(MomentError::StructureOnly);
    }
    let w = relax.second_moment(y);
    let eig = nalgebra::SymmetricEigen::new(w);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let l1 = eig.eigenvalues[order[0]];
    let l2 = order.get(1).map_or(0.0, |&k| eig.eigenvalues[k].max(0.0));
    let ratio = if l1 > 0.0 { l2 / l1 } else { f64::INFINITY };
    let rank_estimate = eig.eigenvalues.iter().filter(|&&l| l > RANK_RATIO_THRESHOLD * l1.max(0.0)).count();
    let mut report = ExactnessReport {
        rank_estimate,
        eigenvalue_ratio: ratio,
        extracted_voltages: None,
        relaxation_bound: bound,
        extracted_objective: None,
        max_violation: None,
        certified: false,
    };
    if ratio < RANK_RATIO_THRESHOLD {
        let eta = eig.eigenvectors.column(order[0]);
        let scale = l1.sqrt();
        let mut v: Vec<Complex64> = eta.iter().map(|z| z * scale).collect();
        if v[0].norm() > 0.0 {
            let rot = v[0].conj() / v[0].norm();
            for z in v.iter_mut() {
                *z *= rot;
            }
            v[0].im = 0.0;
        }
        let obj = relax.objective_at(&v);
        let viol = relax.max_violation(&v);
        report.certified = viol <= 1e-6 && (obj - bound).abs() <= 1e-6 * bound.abs().max(1.0);
        report.extracted_objective = Some(obj);
        report.max_violation = Some(viol);
        report.extracted_voltages = Some(v);
    }
    Ok(report)
}
