//! Entropy bumps `E^α_I(w) = w*_I α(w*_I/w_I)` and their suprema.

use serde::{Deserialize, Serialize};

use super::penalty::PenaltyFn;
use crate::functionals::{u_star_all, Variant};
use crate::model::{AtomId, DyadicModel, Weight};

/// `w* α(w*/w)`, zero when `w = 0`.
pub fn entropy_bump_value(avg: f64, star: f64, alpha: &PenaltyFn) -> f64 {
    if avg <= 0.0 {
        return 0.0;
    }
    star * alpha.alpha((star / avg).max(1.0))
}

pub fn entropy_bump(model: &DyadicModel, w: &Weight, id: AtomId, alpha: &PenaltyFn, variant: Variant) -> f64 {
    let avg = model.average(w, id);
    let star = crate::functionals::u_star(model, w, id, variant);
    entropy_bump_value(avg, star, alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpMode {
    /// `α(u*/u)u* · α(v*/v)v*`.
    TwoSided,
    /// `α(u*/u)^e u* · ⟨v⟩`.
    OneSidedU,
    /// `α(v*/v)^e v* · ⟨u⟩`.
    OneSidedV,
}

/// Supremum of the bump product and an attaining atom.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSup {
    pub value: f64,
    pub atom: AtomId,
}

/// Per-atom bump products.
pub fn bump_products(
    model: &DyadicModel,
    u: &Weight,
    v: &Weight,
    alpha: &PenaltyFn,
    mode: BumpMode,
    variant: Variant,
    exponent: f64,
) -> Vec<f64> {
    let ua = model.averages(u);
    let va = model.averages(v);
    let us = u_star_all(model, u, variant);
    let vs = u_star_all(model, v, variant);
    let one_sided = |avg: f64, star: f64| {
        if avg <= 0.0 {
            0.0
        } else {
            alpha.alpha((star / avg).max(1.0)).powf(exponent) * star
        }
    };
    (0..model.len())
        .map(|i| match mode {
            BumpMode::TwoSided => entropy_bump_value(ua[i], us[i], alpha) * entropy_bump_value(va[i], vs[i], alpha),
            BumpMode::OneSidedU => one_sided(ua[i], us[i]) * va[i],
            BumpMode::OneSidedV => one_sided(va[i], vs[i]) * ua[i],
        })
        .collect()
}

/// Exact supremum over all atoms; the one-sided exponent is 2.
pub fn bump_supremum(
    model: &DyadicModel,
    u: &Weight,
    v: &Weight,
    alpha: &PenaltyFn,
    mode: BumpMode,
    variant: Variant,
) -> BumpSup {
    bump_supremum_with_exponent(model, u, v, alpha, mode, variant, 2.0)
}

pub fn bump_supremum_with_exponent(
    model: &DyadicModel,
    u: &Weight,
    v: &Weight,
    alpha: &PenaltyFn,
    mode: BumpMode,
    variant: Variant,
    exponent: f64,
) -> BumpSup {
    let p = bump_products(model, u, v, alpha, mode, variant, exponent);
    argmax(p.iter().copied().enumerate())
}

/// Supremum restricted to a subset of atoms.
pub fn bump_supremum_over(
    model: &DyadicModel,
    u: &Weight,
    v: &Weight,
    alpha: &PenaltyFn,
    mode: BumpMode,
    variant: Variant,
    atoms: &[AtomId],
) -> BumpSup {
    let p = bump_products(model, u, v, alpha, mode, variant, 2.0);
    argmax(atoms.iter().map(|&i| (i, p[i])))
}

fn argmax(it: impl Iterator<Item = (AtomId, f64)>) -> BumpSup {
    let mut best = BumpSup { value: 0.0, atom: 0 };
    for (i, x) in it {
        if x > best.value {
            best = BumpSup { value: x, atom: i };
        }
    }
    best
}
