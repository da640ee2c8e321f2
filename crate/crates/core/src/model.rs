//! Finite non-homogeneous dyadic models.
//!
//! A model is a finite tree of atoms with positive masses. Atoms are stored in
//! depth-first preorder, so every subtree occupies a contiguous id range and
//! the leaves under an atom occupy a contiguous range of leaf positions.
//! Functions live on leaves; coarser generations are induced by averaging.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type AtomId = usize;

/// Relative tolerance for the mass additivity check on deserialized models.
const ADDITIVITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub id: AtomId,
    pub parent: Option<AtomId>,
    pub children: Vec<AtomId>,
    pub mass: f64,
    pub depth: usize,
}

/// Serialized form of one atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub id: AtomId,
    pub parent: Option<AtomId>,
    pub children: Vec<AtomId>,
    pub mass: f64,
}

/// Branching plan: leaves carry masses, internal masses are the sums.
#[derive(Clone, Debug, PartialEq)]
pub enum Plan {
    Leaf(f64),
    Node(Vec<Plan>),
}

impl Plan {
    /// Uniform `branching`-ary tree of the given depth with total mass `mass`.
    pub fn uniform(branching: usize, depth: usize, mass: f64) -> Plan {
        if depth == 0 {
            Plan::Leaf(mass)
        } else {
            let m = mass / branching as f64;
            Plan::Node((0..branching).map(|_| Plan::uniform(branching, depth - 1, m)).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DyadicModel {
    atoms: Vec<Atom>,
    subtree_end: Vec<AtomId>,
    leaves: Vec<AtomId>,
    leaf_span: Vec<Range<usize>>,
    leaf_masses: Vec<f64>,
    depth: usize,
}

impl DyadicModel {
    pub fn from_plan(plan: &Plan) -> Result<Self> {
        fn walk(plan: &Plan, parent: Option<AtomId>, depth: usize, atoms: &mut Vec<Atom>) -> AtomId {
            let id = atoms.len();
            atoms.push(Atom { id, parent, children: Vec::new(), mass: 0.0, depth });
            match plan {
                Plan::Leaf(m) => atoms[id].mass = *m,
                Plan::Node(kids) => {
                    let mut total = 0.0;
                    for k in kids {
                        let c = walk(k, Some(id), depth + 1, atoms);
                        atoms[id].children.push(c);
                        total += atoms[c].mass;
                    }
                    atoms[id].mass = total;
                }
            }
            id
        }
        if let Plan::Node(k) = plan {
            if k.is_empty() {
                return Err(Error::InvalidModel("node without children".into()));
            }
        }
        let mut atoms = Vec::new();
        walk(plan, None, 0, &mut atoms);
        Self::finish(atoms)
    }

    /// Uniform tree with unit root mass (Lebesgue measure on [0,1)).
    pub fn uniform(branching: usize, depth: usize) -> Self {
        Self::from_plan(&Plan::uniform(branching.max(1), depth, 1.0)).expect("uniform plan is valid")
    }

    /// Uniform branching with prescribed leaf masses in depth-first order.
    pub fn from_leaf_masses(branching: usize, depth: usize, masses: &[f64]) -> Result<Self> {
        let b = branching.max(1);
        if masses.len() != b.pow(depth as u32) {
            return Err(Error::InvalidModel(format!(
                "expected {} leaf masses, got {}",
                b.pow(depth as u32),
                masses.len()
            )));
        }
        fn build(b: usize, depth: usize, masses: &[f64]) -> Plan {
            if depth == 0 {
                Plan::Leaf(masses[0])
            } else {
                let chunk = masses.len() / b;
                Plan::Node(masses.chunks(chunk).map(|c| build(b, depth - 1, c)).collect())
            }
        }
        Self::from_plan(&build(b, depth, masses))
    }

    /// Rebuilds a model from serialized records; ids must be a depth-first preorder.
    pub fn from_records(records: &[AtomRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidModel("no atoms".into()));
        }
        let mut atoms: Vec<Atom> = Vec::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.id != i {
                return Err(Error::InvalidModel(format!("atom at position {i} has id {}", r.id)));
            }
            atoms.push(Atom { id: i, parent: r.parent, children: r.children.clone(), mass: r.mass, depth: 0 });
        }
        if atoms[0].parent.is_some() {
            return Err(Error::InvalidModel("atom 0 must be the root".into()));
        }
        let mut preorder = Vec::with_capacity(atoms.len());
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if preorder.len() > atoms.len() {
                return Err(Error::InvalidModel("children lists contain a cycle".into()));
            }
            preorder.push(id);
            for &c in atoms[id].children.iter().rev() {
                if c >= atoms.len() || atoms[c].parent != Some(id) {
                    return Err(Error::InvalidModel(format!("child {c} of atom {id} is inconsistent")));
                }
                stack.push(c);
            }
        }
        if preorder.len() != atoms.len() || preorder.iter().enumerate().any(|(i, &id)| i != id) {
            return Err(Error::InvalidModel("ids are not a depth-first preorder".into()));
        }
        for id in 0..atoms.len() {
            if let Some(p) = atoms[id].parent {
                atoms[id].depth = atoms[p].depth + 1;
            }
        }
        for a in &atoms {
            if !a.children.is_empty() {
                let s: f64 = a.children.iter().map(|&c| atoms[c].mass).sum();
                if (s - a.mass).abs() > ADDITIVITY_TOL * a.mass.abs().max(s.abs()) {
                    return Err(Error::AdditivityViolation { atom: a.id, mass: a.mass, children: s });
                }
            }
        }
        Self::finish(atoms)
    }

    fn finish(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::ZeroMassAtom(a.id));
            }
        }
        let n = atoms.len();
        let mut subtree_end = vec![0; n];
        for id in (0..n).rev() {
            subtree_end[id] = atoms[id].children.last().map_or(id + 1, |&c| subtree_end[c]);
        }
        let leaves: Vec<AtomId> = (0..n).filter(|&i| atoms[i].children.is_empty()).collect();
        let mut leaf_pos = vec![usize::MAX; n];
        for (p, &l) in leaves.iter().enumerate() {
            leaf_pos[l] = p;
        }
        let mut leaf_span = vec![0..0; n];
        for id in (0..n).rev() {
            leaf_span[id] = if atoms[id].children.is_empty() {
                leaf_pos[id]..leaf_pos[id] + 1
            } else {
                let first = atoms[id].children[0];
                let last = *atoms[id].children.last().unwrap();
                leaf_span[first].start..leaf_span[last].end
            };
        }
        let leaf_masses = leaves.iter().map(|&l| atoms[l].mass).collect();
        let depth = atoms.iter().map(|a| a.depth).max().unwrap_or(0);
        Ok(Self { atoms, subtree_end, leaves, leaf_span, leaf_masses, depth })
    }

    pub fn records(&self) -> Vec<AtomRecord> {
        self.atoms
            .iter()
            .map(|a| AtomRecord { id: a.id, parent: a.parent, children: a.children.clone(), mass: a.mass })
            .collect()
    }

    pub fn root(&self) -> AtomId {
        0
    }
    pub fn len(&self) -> usize {
        self.atoms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id]
    }
    pub fn mass(&self, id: AtomId) -> f64 {
        self.atoms[id].mass
    }
    pub fn children(&self, id: AtomId) -> &[AtomId] {
        &self.atoms[id].children
    }
    pub fn parent(&self, id: AtomId) -> Option<AtomId> {
        self.atoms[id].parent
    }
    pub fn is_leaf(&self, id: AtomId) -> bool {
        self.atoms[id].children.is_empty()
    }
    pub fn depth(&self) -> usize {
        self.depth
    }
    pub fn leaves(&self) -> &[AtomId] {
        &self.leaves
    }
    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }
    pub fn leaf_masses(&self) -> &[f64] {
        &self.leaf_masses
    }
    /// Leaf positions under `id`.
    pub fn leaf_span(&self, id: AtomId) -> Range<usize> {
        self.leaf_span[id].clone()
    }
    /// Atom ids of the subtree rooted at `id` (including `id`).
    pub fn subtree(&self, id: AtomId) -> Range<AtomId> {
        id..self.subtree_end[id]
    }
    /// `a ⊆ b` in the tree sense (descendant or self).
    pub fn is_within(&self, a: AtomId, b: AtomId) -> bool {
        b <= a && a < self.subtree_end[b]
    }
    /// Atom of leaf position `p`.
    pub fn leaf_atom(&self, p: usize) -> AtomId {
        self.leaves[p]
    }

    /// `∫_I w` for every atom.
    pub fn integrals(&self, w: &Weight) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.n_leaves());
        let mut out = vec![0.0; self.len()];
        for id in (0..self.len()).rev() {
            let a = &self.atoms[id];
            out[id] = if a.children.is_empty() {
                let p = self.leaf_span[id].start;
                w.values[p] * self.leaf_masses[p]
            } else {
                a.children.iter().map(|&c| out[c]).sum()
            };
        }
        out
    }

    /// `⟨w⟩_I` for every atom.
    pub fn averages(&self, w: &Weight) -> Vec<f64> {
        let mut s = self.integrals(w);
        for (id, x) in s.iter_mut().enumerate() {
            *x /= self.atoms[id].mass;
        }
        s
    }

    pub fn average(&self, w: &Weight, id: AtomId) -> f64 {
        let r = self.leaf_span(id);
        let s: f64 = r.clone().map(|p| w.values[p] * self.leaf_masses[p]).sum();
        s / self.atoms[id].mass
    }

    /// `Δ_I w = Σ_{children} E_{I'}w − E_I w`; zero for leaves and one-child atoms.
    pub fn martingale_difference(&self, w: &Weight, id: AtomId) -> Weight {
        let mut out = Weight::zeros(self.n_leaves());
        let a = &self.atoms[id];
        if a.children.len() < 2 {
            return out;
        }
        let avg = self.average(w, id);
        for &c in &a.children {
            let d = self.average(w, c) - avg;
            for p in self.leaf_span(c) {
                out.values[p] = d;
            }
        }
        out
    }

    /// Child values of `Δ_I w` given all atom averages.
    pub fn difference_on_children(&self, averages: &[f64], id: AtomId) -> Vec<f64> {
        let a = &self.atoms[id];
        a.children.iter().map(|&c| averages[c] - averages[id]).collect()
    }

    /// `M(w·1_{I0})` on the leaves under `I0`, zero elsewhere.
    pub fn maximal_function(&self, w: &Weight, i0: AtomId) -> Weight {
        let abs = w.map(f64::abs);
        let avg = self.averages(&abs);
        self.maximal_from_averages(&avg, i0)
    }

    /// Maximal function from precomputed averages of `|w|`.
    pub fn maximal_from_averages(&self, abs_averages: &[f64], i0: AtomId) -> Weight {
        let mut out = Weight::zeros(self.n_leaves());
        let mut stack = vec![(i0, abs_averages[i0])];
        while let Some((id, m)) = stack.pop() {
            let m = m.max(abs_averages[id]);
            if self.is_leaf(id) {
                out.values[self.leaf_span[id].start] = m;
            } else {
                for &c in &self.atoms[id].children {
                    stack.push((c, m));
                }
            }
        }
        out
    }

    /// `⟨M(w·1_I)⟩_I` for every atom `I`, in one pass per atom.
    pub fn maximal_averages(&self, w: &Weight) -> Vec<f64> {
        let abs = w.map(f64::abs);
        let avg = self.averages(&abs);
        (0..self.len())
            .map(|i| {
                let m = self.maximal_from_averages(&avg, i);
                self.leaf_span(i).map(|p| m.values[p] * self.leaf_masses[p]).sum::<f64>() / self.mass(i)
            })
            .collect()
    }

    /// `sup_{I0} |I0|⁻¹ Σ_{I⊆I0} a_I |I|` and an attaining atom.
    pub fn carleson_norm(&self, a: &[f64]) -> (f64, AtomId) {
        let mut tail = vec![0.0; self.len()];
        let mut best = (0.0, 0);
        for id in (0..self.len()).rev() {
            let at = &self.atoms[id];
            tail[id] = a[id] * at.mass + at.children.iter().map(|&c| tail[c]).sum::<f64>();
            let r = tail[id] / at.mass;
            if r > best.0 || (r == best.0 && id < best.1) {
                best = (r, id);
            }
        }
        best
    }

    /// Sparsity certificate of a family of atoms.
    pub fn check_sparse(&self, family: &[AtomId]) -> SparseCertificate {
        let mut member = vec![false; self.len()];
        for &i in family {
            member[i] = true;
        }
        let mut covered = vec![0.0; self.len()];
        let mut worst = 0.0;
        let mut violator = None;
        let mut worst_atom = None;
        for id in (0..self.len()).rev() {
            let strict: f64 = self.atoms[id].children.iter().map(|&c| covered[c]).sum();
            covered[id] = if member[id] { self.atoms[id].mass } else { strict };
            if member[id] {
                let r = strict / self.atoms[id].mass;
                if r >= worst {
                    worst = r;
                    worst_atom = Some(id);
                }
                if r > 0.5 * (1.0 + 1e-12) {
                    violator = Some(id);
                }
            }
        }
        SparseCertificate { worst_ratio: worst, worst_atom, violator }
    }

    /// Splits leaf atom `leaf` into two children of equal mass.
    /// Returns the refined model and the map from old atom ids to new ones.
    pub fn refine_leaf(&self, leaf: AtomId) -> Result<(DyadicModel, Vec<AtomId>)> {
        if !self.is_leaf(leaf) {
            return Err(Error::InvalidInput(format!("atom {leaf} is not a leaf")));
        }
        fn plan_of(m: &DyadicModel, id: AtomId, leaf: AtomId) -> Plan {
            let a = m.atom(id);
            if a.children.is_empty() {
                if id == leaf {
                    Plan::Node(vec![Plan::Leaf(a.mass / 2.0), Plan::Leaf(a.mass / 2.0)])
                } else {
                    Plan::Leaf(a.mass)
                }
            } else {
                Plan::Node(a.children.iter().map(|&c| plan_of(m, c, leaf)).collect())
            }
        }
        let refined = DyadicModel::from_plan(&plan_of(self, 0, leaf))?;
        let map = (0..self.len()).map(|id| if id > leaf { id + 2 } else { id }).collect();
        Ok((refined, map))
    }
}

/// A simple function on the leaves (nonnegative when used as a weight).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight {
    pub values: Vec<f64>,
}

impl Weight {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }
    pub fn constant(model: &DyadicModel, c: f64) -> Self {
        Self { values: vec![c; model.n_leaves()] }
    }
    /// `1_I` for an atom `I`.
    pub fn indicator(model: &DyadicModel, id: AtomId) -> Self {
        let mut w = Self::zeros(model.n_leaves());
        for p in model.leaf_span(id) {
            w.values[p] = 1.0;
        }
        w
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&x| f(x)).collect() }
    }
    pub fn mul(&self, other: &Weight) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect() }
    }
    pub fn add(&self, other: &Weight) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }
    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }
    /// Pointwise reciprocal; fails on a zero value.
    pub fn recip(&self) -> Result<Self> {
        if let Some(p) = self.values.iter().position(|&x| x == 0.0) {
            return Err(Error::DivisionByZero(format!("weight vanishes at leaf position {p}")));
        }
        Ok(self.map(|x| 1.0 / x))
    }
    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&x| x >= 0.0 && x.is_finite())
    }
    /// `Σ m_i w_i`.
    pub fn integral(&self, model: &DyadicModel) -> f64 {
        self.values.iter().zip(model.leaf_masses()).map(|(w, m)| w * m).sum()
    }
    /// `∫ |f|² w` for a weight `w`.
    pub fn l2_norm_sq(&self, model: &DyadicModel, w: &Weight) -> f64 {
        self.values
            .iter()
            .zip(&w.values)
            .zip(model.leaf_masses())
            .map(|((f, w), m)| f * f * w * m)
            .sum()
    }
    /// Keyed by leaf atom id, for serialization.
    pub fn to_leaf_map(&self, model: &DyadicModel) -> BTreeMap<AtomId, f64> {
        model.leaves().iter().zip(&self.values).map(|(&l, &v)| (l, v)).collect()
    }
    pub fn from_leaf_map(model: &DyadicModel, map: &BTreeMap<AtomId, f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(model.n_leaves());
        for &l in model.leaves() {
            values.push(
                *map.get(&l).ok_or_else(|| Error::InvalidInput(format!("no value for leaf {l}")))?,
            );
        }
        if map.len() != values.len() {
            return Err(Error::InvalidInput("values given for non-leaf atoms".into()));
        }
        Ok(Self { values })
    }
    /// Same function on a model where leaf position `p` was split in two.
    pub fn refine_at(&self, p: usize) -> Self {
        let mut values = self.values.clone();
        values.insert(p, self.values[p]);
        Self { values }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseCertificate {
    pub worst_ratio: f64,
    pub worst_atom: Option<AtomId>,
    pub violator: Option<AtomId>,
}

impl SparseCertificate {
    pub fn is_sparse(&self) -> bool {
        self.violator.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseFamily {
    pub members: Vec<AtomId>,
    pub certificate: SparseCertificate,
}

impl SparseFamily {
    pub fn new(model: &DyadicModel, members: &[AtomId]) -> Result<Self> {
        let mut m: Vec<AtomId> = members.to_vec();
        m.sort_unstable();
        m.dedup();
        if let Some(&bad) = m.iter().find(|&&i| i >= model.len()) {
            return Err(Error::InvalidInput(format!("atom {bad} not in model")));
        }
        let certificate = model.check_sparse(&m);
        if let Some(atom) = certificate.violator {
            return Err(Error::NormalizationViolated { atom, value: certificate.worst_ratio });
        }
        Ok(Self { members: m, certificate })
    }

    /// Indicator of membership per atom.
    pub fn mask(&self, model: &DyadicModel) -> Vec<bool> {
        let mut mask = vec![false; model.len()];
        for &i in &self.members {
            mask[i] = true;
        }
        mask
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarlesonSequence {
    pub entries: Vec<f64>,
    pub carleson_norm: f64,
    pub attained_at: AtomId,
}

impl CarlesonSequence {
    pub fn new(model: &DyadicModel, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != model.len() {
            return Err(Error::InvalidInput("one entry per atom expected".into()));
        }
        if entries.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidInput("Carleson entries must be finite and nonnegative".into()));
        }
        let (carleson_norm, attained_at) = model.carleson_norm(&entries);
        Ok(Self { entries, carleson_norm, attained_at })
    }
}
