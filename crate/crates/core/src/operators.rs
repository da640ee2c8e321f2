//! Sparse operators, complexity-one Haar shifts, paraproducts and positive
//! dyadic operators, applied exactly on leaves; weighted norms by power
//! iteration with a dense singular-value oracle.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomId, DyadicModel, Weight};

/// Relative slack allowed on normalization certificates.
const CERT_TOL: f64 = 1e-12;
/// Power iteration stops once the Rayleigh quotient moves by less than this.
pub const POWER_TOL: f64 = 1e-9;
pub const POWER_CAP: usize = 100_000;
/// Largest leaf count accepted by the dense oracle.
pub const DENSE_LIMIT: usize = 256;
/// Iteration count after which small problems switch to the dense oracle.
pub const DENSE_SWITCH: usize = 5_000;

/// Block normalization used by Haar shifts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockNorm {
    /// `(T_I f, g) ≤ |I|⁻¹‖f‖₁‖g‖₁` on the difference space.
    #[default]
    L1xL1,
    /// `‖T_I‖_{L²(I) → L²(I)} ≤ 1` on the difference space.
    L2,
}

/// Dense child-basis matrix of one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub atom: AtomId,
    pub matrix: Vec<Vec<f64>>,
}

/// Symbol entry `b_I` given by its values on the children of `I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolEntry {
    pub atom: AtomId,
    pub values: Vec<f64>,
}

/// Serialized operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorRecord {
    Sparse { members: Vec<AtomId> },
    HaarShift { blocks: Vec<Block>, #[serde(default)] mode: BlockNorm },
    Paraproduct { symbol: Vec<SymbolEntry> },
    PositiveDyadic { coefficients: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Positive { coeffs: Vec<f64>, sparse: bool },
    Shift { blocks: Vec<Option<Vec<f64>>>, mode: BlockNorm },
    Para { symbol: Vec<Option<Vec<f64>>> },
}

/// Normalization certificate: the worst per-kind quantity and where it occurs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub value: f64,
    pub atom: AtomId,
    /// Classical Carleson norm `sup|I|⁻¹Σ‖b_{I'}‖²₂` for paraproducts.
    pub classical: Option<f64>,
}

/// A validated operator on a fixed model.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    kind: Kind,
    certificate: Certificate,
}

/// `P = I − 1mᵀ/M` applied to a child vector.
fn project(x: &mut [f64], masses: &[f64]) {
    let total: f64 = masses.iter().sum();
    let mean = x.iter().zip(masses).map(|(a, m)| a * m).sum::<f64>() / total;
    for a in x.iter_mut() {
        *a -= mean;
    }
}

fn child_masses(model: &DyadicModel, id: AtomId) -> Vec<f64> {
    model.children(id).iter().map(|&c| model.mass(c)).collect()
}

fn mat_vec(m: &[f64], k: usize, x: &[f64]) -> Vec<f64> {
    (0..k).map(|r| (0..k).map(|c| m[r * k + c] * x[c]).sum()).collect()
}

/// `P T P` in row-major order.
fn project_block(matrix: &[Vec<f64>], masses: &[f64]) -> Vec<f64> {
    let k = masses.len();
    let mut cols = vec![vec![0.0; k]; k];
    for c in 0..k {
        let mut e = vec![0.0; k];
        e[c] = 1.0;
        project(&mut e, masses);
        let mut y: Vec<f64> = (0..k).map(|r| (0..k).map(|j| matrix[r][j] * e[j]).sum()).collect();
        project(&mut y, masses);
        cols[c] = y;
    }
    let mut out = vec![0.0; k * k];
    for r in 0..k {
        for c in 0..k {
            out[r * k + c] = cols[c][r];
        }
    }
    out
}

/// `|I| · sup (T_I f, g)` over `f, g` in the unit `L¹` balls of the difference
/// space, attained at the extreme points `(e_i/m_i − e_j/m_j)/2`.
pub fn block_certificate(matrix: &[Vec<f64>], masses: &[f64]) -> f64 {
    let k = masses.len();
    if k < 2 {
        return 0.0;
    }
    let t = project_block(matrix, masses);
    let total: f64 = masses.iter().sum();
    let mut best = 0.0f64;
    for i in 0..k {
        for j in (i + 1)..k {
            let mut x = vec![0.0; k];
            x[i] = 0.5 / masses[i];
            x[j] = -0.5 / masses[j];
            let y = mat_vec(&t, k, &x);
            let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
            best = best.max(0.5 * (hi - lo));
        }
    }
    total * best
}

/// Operator norm of the projected block on `L²` of the children.
pub fn block_l2_norm(matrix: &[Vec<f64>], masses: &[f64]) -> f64 {
    let k = masses.len();
    if k < 2 {
        return 0.0;
    }
    let t = project_block(matrix, masses);
    let m = DMatrix::from_fn(k, k, |r, c| masses[r].sqrt() * t[r * k + c] / masses[c].sqrt());
    m.singular_values().max()
}

fn check_len(model: &DyadicModel, len: usize, what: &str) -> Result<()> {
    if len != model.len() {
        return Err(Error::InvalidInput(format!("{what} has {len} entries, model has {} atoms", model.len())));
    }
    Ok(())
}

impl OperatorSpec {
    /// `T_Q f = Σ_{I∈Q} ⟨f⟩_I 1_I`; rejects non-sparse families.
    pub fn sparse(model: &DyadicModel, members: &[AtomId]) -> Result<Self> {
        if let Some(&bad) = members.iter().find(|&&i| i >= model.len()) {
            return Err(Error::InvalidInput(format!("atom {bad} not in model")));
        }
        let cert = model.check_sparse(members);
        if let Some(atom) = cert.violator {
            return Err(Error::NormalizationViolated { atom, value: cert.worst_ratio });
        }
        let mut coeffs = vec![0.0; model.len()];
        for &i in members {
            coeffs[i] = 1.0;
        }
        let certificate = Certificate { value: cert.worst_ratio, atom: cert.worst_atom.unwrap_or(0), classical: None };
        Ok(Self { kind: Kind::Positive { coeffs, sparse: true }, certificate })
    }

    /// `Tf = Σ ⟨f⟩_I a_I 1_I`; the certificate is `‖a‖_Carl`.
    pub fn positive_dyadic(model: &DyadicModel, coeffs: Vec<f64>) -> Result<Self> {
        check_len(model, coeffs.len(), "coefficient list")?;
        if coeffs.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidInput("coefficients must be finite and nonnegative".into()));
        }
        let (value, atom) = model.carleson_norm(&coeffs);
        Ok(Self { kind: Kind::Positive { coeffs, sparse: false }, certificate: Certificate { value, atom, classical: None } })
    }

    /// `Tf = Σ T_I(Δ_I f)`; blocks are projected onto the difference space.
    pub fn haar_shift(model: &DyadicModel, blocks: &[Block], mode: BlockNorm) -> Result<Self> {
        let mut store: Vec<Option<Vec<f64>>> = vec![None; model.len()];
        let mut cert = Certificate { value: 0.0, atom: 0, classical: None };
        for b in blocks {
            if b.atom >= model.len() {
                return Err(Error::InvalidInput(format!("atom {} not in model", b.atom)));
            }
            let masses = child_masses(model, b.atom);
            let k = masses.len();
            if b.matrix.len() != k || b.matrix.iter().any(|r| r.len() != k) {
                return Err(Error::InvalidInput(format!("block at atom {} is not {k}×{k}", b.atom)));
            }
            if k < 2 {
                continue;
            }
            let value = match mode {
                BlockNorm::L1xL1 => block_certificate(&b.matrix, &masses),
                BlockNorm::L2 => block_l2_norm(&b.matrix, &masses),
            };
            if value > 1.0 + CERT_TOL {
                return Err(Error::NormalizationViolated { atom: b.atom, value });
            }
            if value > cert.value {
                cert = Certificate { value, atom: b.atom, classical: None };
            }
            store[b.atom] = Some(project_block(&b.matrix, &masses));
        }
        Ok(Self { kind: Kind::Shift { blocks: store, mode }, certificate: cert })
    }

    /// Rescales every block to certificate at most one, then builds the shift.
    pub fn haar_shift_normalized(model: &DyadicModel, blocks: &[Block], mode: BlockNorm) -> Result<Self> {
        let scaled: Vec<Block> = blocks
            .iter()
            .map(|b| {
                let masses = child_masses(model, b.atom);
                let c = if masses.len() == b.matrix.len() {
                    match mode {
                        BlockNorm::L1xL1 => block_certificate(&b.matrix, &masses),
                        BlockNorm::L2 => block_l2_norm(&b.matrix, &masses),
                    }
                } else {
                    0.0
                };
                let s = if c > 1.0 { 1.0 / c } else { 1.0 };
                Block { atom: b.atom, matrix: b.matrix.iter().map(|r| r.iter().map(|x| x * s).collect()).collect() }
            })
            .collect();
        Self::haar_shift(model, &scaled, mode)
    }

    /// `Πf = Σ ⟨f⟩_I b_I` with `sup_I |I|⁻¹Σ_{I'⊆I}‖b_{I'}‖²_∞|I'| ≤ 1`.
    pub fn paraproduct(model: &DyadicModel, symbol: &[SymbolEntry]) -> Result<Self> {
        let (store, cert) = paraproduct_store(model, symbol)?;
        if cert.value > 1.0 + CERT_TOL {
            return Err(Error::NormalizationViolated { atom: cert.atom, value: cert.value });
        }
        Ok(Self { kind: Kind::Para { symbol: store }, certificate: cert })
    }

    pub fn from_record(model: &DyadicModel, rec: &OperatorRecord) -> Result<Self> {
        match rec {
            OperatorRecord::Sparse { members } => Self::sparse(model, members),
            OperatorRecord::HaarShift { blocks, mode } => Self::haar_shift(model, blocks, *mode),
            OperatorRecord::Paraproduct { symbol } => Self::paraproduct(model, symbol),
            OperatorRecord::PositiveDyadic { coefficients } => Self::positive_dyadic(model, coefficients.clone()),
        }
    }

    pub fn to_record(&self, model: &DyadicModel) -> OperatorRecord {
        match &self.kind {
            Kind::Positive { coeffs, sparse: true } => {
                OperatorRecord::Sparse { members: (0..coeffs.len()).filter(|&i| coeffs[i] != 0.0).collect() }
            }
            Kind::Positive { coeffs, .. } => OperatorRecord::PositiveDyadic { coefficients: coeffs.clone() },
            Kind::Shift { blocks, mode } => OperatorRecord::HaarShift {
                blocks: blocks
                    .iter()
                    .enumerate()
                    .filter_map(|(i, b)| {
                        b.as_ref().map(|m| {
                            let k = model.children(i).len();
                            Block { atom: i, matrix: (0..k).map(|r| m[r * k..(r + 1) * k].to_vec()).collect() }
                        })
                    })
                    .collect(),
                mode: *mode,
            },
            Kind::Para { symbol } => OperatorRecord::Paraproduct {
                symbol: symbol
                    .iter()
                    .enumerate()
                    .filter_map(|(i, b)| b.as_ref().map(|v| SymbolEntry { atom: i, values: v.clone() }))
                    .collect(),
            },
        }
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    /// Coefficients `a_I` of a positive dyadic (or sparse) operator.
    pub fn coefficients(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Positive { coeffs, .. } => Some(coeffs),
            _ => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self.kind, Kind::Positive { .. })
    }

    /// `Tg` on the leaves.
    pub fn apply(&self, model: &DyadicModel, g: &Weight) -> Weight {
        self.apply_inner(model, g, false)
    }

    /// The adjoint with respect to `∫ (Tf) g dμ`.
    pub fn apply_adjoint(&self, model: &DyadicModel, g: &Weight) -> Weight {
        self.apply_inner(model, g, true)
    }

    fn apply_inner(&self, model: &DyadicModel, g: &Weight, adjoint: bool) -> Weight {
        let avg = model.averages(g);
        let mut add = vec![0.0; model.len()];
        match &self.kind {
            Kind::Positive { coeffs, .. } => {
                for i in 0..model.len() {
                    add[i] += coeffs[i] * avg[i];
                }
            }
            Kind::Shift { blocks, .. } => {
                for (i, b) in blocks.iter().enumerate() {
                    let Some(t) = b else { continue };
                    let ch = model.children(i);
                    let k = ch.len();
                    let d: Vec<f64> = ch.iter().map(|&c| avg[c] - avg[i]).collect();
                    let y = if adjoint {
                        let m: Vec<f64> = ch.iter().map(|&c| model.mass(c)).collect();
                        let dm: Vec<f64> = d.iter().zip(&m).map(|(a, b)| a * b).collect();
                        (0..k).map(|c| (0..k).map(|r| t[r * k + c] * dm[r]).sum::<f64>() / m[c]).collect()
                    } else {
                        mat_vec(t, k, &d)
                    };
                    for (j, &c) in ch.iter().enumerate() {
                        add[c] += y[j];
                    }
                }
            }
            Kind::Para { symbol } => {
                for (i, b) in symbol.iter().enumerate() {
                    let Some(b) = b else { continue };
                    let ch = model.children(i);
                    if adjoint {
                        let s: f64 = ch.iter().zip(b).map(|(&c, bc)| model.mass(c) * bc * avg[c]).sum();
                        add[i] += s / model.mass(i);
                    } else {
                        for (j, &c) in ch.iter().enumerate() {
                            add[c] += avg[i] * b[j];
                        }
                    }
                }
            }
        }
        push_down(model, &add)
    }

    /// Splits a Haar shift into the blocks at even and at odd depths.
    pub fn split_by_generation(&self, model: &DyadicModel) -> Option<(OperatorSpec, OperatorSpec)> {
        let Kind::Shift { blocks, mode } = &self.kind else { return None };
        let pick = |parity: usize| {
            let b: Vec<Option<Vec<f64>>> = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| if model.atom(i).depth % 2 == parity { b.clone() } else { None })
                .collect();
            OperatorSpec { kind: Kind::Shift { blocks: b, mode: *mode }, certificate: self.certificate }
        };
        Some((pick(0), pick(1)))
    }

    /// The positive dyadic operator restricted to a set of atoms.
    pub fn restricted(&self, keep: &[bool]) -> Option<OperatorSpec> {
        let Kind::Positive { coeffs, sparse } = &self.kind else { return None };
        let c: Vec<f64> = coeffs.iter().zip(keep).map(|(a, &k)| if k { *a } else { 0.0 }).collect();
        Some(OperatorSpec { kind: Kind::Positive { coeffs: c, sparse: *sparse }, certificate: self.certificate })
    }
}

fn paraproduct_store(model: &DyadicModel, symbol: &[SymbolEntry]) -> Result<(Vec<Option<Vec<f64>>>, Certificate)> {
    let mut store: Vec<Option<Vec<f64>>> = vec![None; model.len()];
    let mut sup = vec![0.0; model.len()];
    let mut l2 = vec![0.0; model.len()];
    for e in symbol {
        if e.atom >= model.len() {
            return Err(Error::InvalidInput(format!("atom {} not in model", e.atom)));
        }
        let masses = child_masses(model, e.atom);
        if e.values.len() != masses.len() {
            return Err(Error::InvalidInput(format!("symbol at atom {} has wrong length", e.atom)));
        }
        let mut v = e.values.clone();
        if masses.len() < 2 {
            continue;
        }
        project(&mut v, &masses);
        sup[e.atom] = v.iter().fold(0.0f64, |a, x| a.max(x.abs())).powi(2);
        l2[e.atom] = v.iter().zip(&masses).map(|(x, m)| x * x * m).sum::<f64>() / model.mass(e.atom);
        store[e.atom] = Some(v);
    }
    let (value, atom) = model.carleson_norm(&sup);
    let (classical, _) = model.carleson_norm(&l2);
    Ok((store, Certificate { value, atom, classical: Some(classical) }))
}

/// Both paraproduct normalizations without enforcing either.
pub fn paraproduct_certificate(model: &DyadicModel, symbol: &[SymbolEntry]) -> Result<Certificate> {
    Ok(paraproduct_store(model, symbol)?.1)
}

/// Leaf values of `Σ_I add_I 1_I`.
fn push_down(model: &DyadicModel, add: &[f64]) -> Weight {
    let mut acc = vec![0.0; model.len()];
    let mut out = Weight::zeros(model.n_leaves());
    for i in 0..model.len() {
        acc[i] = add[i] + model.parent(i).map_or(0.0, |p| acc[p]);
        if model.is_leaf(i) {
            out.values[model.leaf_span(i).start] = acc[i];
        }
    }
    out
}

/// Result of a weighted norm computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub lower: f64,
    /// Rigorous upper bound when available (Frobenius norm on stalls), else the estimate.
    pub upper: f64,
    pub iterations: usize,
    /// Maximizing `f` (unit in `L²(u)`), as leaf values.
    pub maximizer: Vec<f64>,
}

/// Norm of `f ↦ T(fu)` from `L²(u)` to `L²(v)`.
pub fn weighted_norm(op: &OperatorSpec, model: &DyadicModel, u: &Weight, v: &Weight) -> Result<f64> {
    Ok(weighted_norm_detail(op, model, u, v)?.norm)
}

/// Power iteration on `AᵀA` with `A = D_{√(mv)} T D_{√(u/m)}`, started from `1 + 0.1 sin(i)`.
pub fn weighted_norm_detail(op: &OperatorSpec, model: &DyadicModel, u: &Weight, v: &Weight) -> Result<NormEstimate> {
    let n = model.n_leaves();
    let m = model.leaf_masses();
    let su: Vec<f64> = (0..n).map(|j| (u.values[j] / m[j]).sqrt()).collect();
    let sum_: Vec<f64> = (0..n).map(|j| (u.values[j] * m[j]).sqrt()).collect();
    let smv: Vec<f64> = (0..n).map(|i| (m[i] * v.values[i]).sqrt()).collect();
    let svm: Vec<f64> = (0..n).map(|i| (v.values[i] / m[i]).sqrt()).collect();
    let a = |x: &[f64]| -> Vec<f64> {
        let g = Weight::new(x.iter().zip(&su).map(|(a, b)| a * b).collect());
        let y = op.apply(model, &g);
        y.values.iter().zip(&smv).map(|(a, b)| a * b).collect()
    };
    let at = |y: &[f64]| -> Vec<f64> {
        let g = Weight::new(y.iter().zip(&svm).map(|(a, b)| a * b).collect());
        let x = op.apply_adjoint(model, &g);
        x.values.iter().zip(&sum_).map(|(a, b)| a * b).collect()
    };
    let norm2 = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|a| *a /= nx);
    let mut lambda = 0.0;
    for it in 1..=POWER_CAP {
        if it == DENSE_SWITCH && n <= DENSE_LIMIT {
            return dense_estimate(op, model, u, v, it);
        }
        let bx = at(&a(&x));
        let new_lambda: f64 = bx.iter().zip(&x).map(|(p, q)| p * q).sum();
        let nb = norm2(&bx);
        if nb == 0.0 {
            return Ok(NormEstimate { norm: 0.0, lower: 0.0, upper: 0.0, iterations: it, maximizer: vec![0.0; n] });
        }
        let done = (new_lambda - lambda).abs() <= 1e-3 * POWER_TOL * new_lambda;
        lambda = new_lambda;
        x = bx.iter().map(|p| p / nb).collect();
        if done {
            let maximizer: Vec<f64> = (0..n).map(|j| if sum_[j] > 0.0 { x[j] / sum_[j] } else { 0.0 }).collect();
            return Ok(NormEstimate { norm: lambda.sqrt(), lower: lambda.sqrt(), upper: lambda.sqrt(), iterations: it, maximizer });
        }
    }
    let upper = dense_matrix(op, model, u, v).norm().max(lambda.sqrt());
    Err(Error::PowerIterationStall { lower: lambda.sqrt(), upper })
}

/// Exact fallback for nearly degenerate top singular values.
fn dense_estimate(op: &OperatorSpec, model: &DyadicModel, u: &Weight, v: &Weight, iterations: usize) -> Result<NormEstimate> {
    let a = dense_matrix(op, model, u, v);
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::InvalidInput("singular value decomposition failed".into()))?;
    let (k, norm) = svd.singular_values.iter().copied().enumerate().fold((0, 0.0), |b, (i, s)| if s > b.1 { (i, s) } else { b });
    let m = model.leaf_masses();
    let maximizer = (0..model.n_leaves())
        .map(|j| {
            let w = (u.values[j] * m[j]).sqrt();
            if w > 0.0 { vt[(k, j)] / w } else { 0.0 }
        })
        .collect();
    Ok(NormEstimate { norm, lower: norm, upper: norm, iterations, maximizer })
}

/// Dense matrix `A` representing the weighted operator on leaf coordinates.
pub fn dense_matrix(op: &OperatorSpec, model: &DyadicModel, u: &Weight, v: &Weight) -> DMatrix<f64> {
    let n = model.n_leaves();
    let m = model.leaf_masses();
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = Weight::zeros(n);
        e.values[j] = 1.0;
        let col = op.apply(model, &e);
        let s = (u.values[j] / m[j]).sqrt();
        for i in 0..n {
            a[(i, j)] = (m[i] * v.values[i]).sqrt() * col.values[i] * s;
        }
    }
    a
}

/// Largest singular value of the dense representation (leaf counts up to 256).
pub fn dense_norm(op: &OperatorSpec, model: &DyadicModel, u: &Weight, v: &Weight) -> Result<f64> {
    if model.n_leaves() > DENSE_LIMIT {
        return Err(Error::InvalidInput(format!("dense oracle limited to {DENSE_LIMIT} leaves")));
    }
    Ok(dense_matrix(op, model, u, v).singular_values().max())
}
