//! Rigorously bracketed improper integrals `∫₁^∞ h(t) dt` of decreasing `h`.
//!
//! The integrand is supplied in logarithmic coordinates as `k(s) = t·h(t)` at
//! `t = e^s`, which keeps closed forms finite far beyond the range of `f64`
//! in `t`. On a cell `[a, b]` monotonicity gives
//! `(b−a)h(b) ≤ ∫ ≤ (b−a)h(a)`, i.e. `(1−e^{−δ})k(s_b) ≤ ∫ ≤ (e^{δ}−1)k(s_a)`.

use serde::{Deserialize, Serialize};

/// Default number of dyadic blocks `[2^j, 2^{j+1}]` in `t`.
pub const DEFAULT_BLOCKS: usize = 60;
/// Running lower bound beyond which the integral is declared divergent.
pub const DIVERGENCE_LEVEL: f64 = 1e6;
/// Target relative width of the bracket on the dyadic range.
pub const TARGET_REL_GAP: f64 = 1e-6;

const COARSE_CELLS: usize = 64;
const MAX_CELLS: usize = 1 << 22;
const EXTENSION_CELLS: usize = 2048;
const STALL_RATIO: f64 = 0.99;

/// Outcome of a bracketed improper integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    /// Whether `upper` is rigorous (closed-form tail) or extrapolated.
    pub tail_exact: bool,
    pub divergent: bool,
}

impl Bracket {
    pub fn value(&self) -> f64 {
        if self.divergent {
            f64::INFINITY
        } else {
            0.5 * (self.lower + self.upper)
        }
    }
    pub fn rel_gap(&self) -> f64 {
        (self.upper - self.lower) / self.lower.max(f64::MIN_POSITIVE)
    }
    fn divergent(lower: f64) -> Self {
        Self { lower, upper: f64::INFINITY, tail_exact: true, divergent: true }
    }
}

/// Tail model beyond the bracketed range.
pub enum Tail<'a> {
    /// `∫_{e^S}^∞ h(t) dt` in closed form as a function of `S` (may be `+∞`).
    Closed(&'a dyn Fn(f64) -> f64),
    /// Lower and upper bounds of the tail as a function of `S`.
    Bounds(&'a dyn Fn(f64) -> (f64, f64)),
    /// `k` is decreasing in `s`; extend by `s`-doubling blocks up to `s_max`,
    /// then extrapolate geometrically.
    Extend { s_max: f64 },
}

fn dyadic_block(k: &dyn Fn(f64) -> f64, j: usize, cells: usize) -> (f64, f64) {
    let l2 = std::f64::consts::LN_2;
    log_block(k, j as f64 * l2, (j + 1) as f64 * l2, cells)
}

/// Bracket of `∫_{e^a}^{e^b} h(t) dt` for decreasing `h`, with `k(s) = e^s h(e^s)`.
pub fn log_block(k: &dyn Fn(f64) -> f64, a: f64, b: f64, cells: usize) -> (f64, f64) {
    let s0 = a;
    let delta = (b - a) / cells as f64;
    let lo_f = -(-delta).exp_m1();
    let hi_f = delta.exp_m1();
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut ka = k(s0);
    for c in 0..cells {
        let kb = k(s0 + (c + 1) as f64 * delta);
        lower += lo_f * kb;
        upper += hi_f * ka;
        ka = kb;
    }
    (lower, upper)
}

fn linear_block(k: &dyn Fn(f64) -> f64, a: f64, b: f64, cells: usize) -> (f64, f64) {
    let delta = (b - a) / cells as f64;
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut ka = k(a);
    for c in 0..cells {
        let kb = k(a + (c + 1) as f64 * delta);
        lower += delta * kb.min(ka);
        upper += delta * ka.max(kb);
        ka = kb;
    }
    (lower, upper)
}

/// `∫₁^∞ h(t) dt` with `k(s) = e^s h(e^s)` and `h` decreasing.
pub fn improper(k: &dyn Fn(f64) -> f64, blocks: usize, tail: Tail<'_>) -> Bracket {
    improper_to(k, blocks, tail, TARGET_REL_GAP)
}

/// As [`improper`], refining the dyadic range until the relative gap is below `rel_gap`.
pub fn improper_to(k: &dyn Fn(f64) -> f64, blocks: usize, tail: Tail<'_>, rel_gap: f64) -> Bracket {
    let mut lo = vec![0.0; blocks];
    let mut hi = vec![0.0; blocks];
    for j in 0..blocks {
        let (l, h) = dyadic_block(k, j, COARSE_CELLS);
        lo[j] = l;
        hi[j] = h;
        if lo[..=j].iter().sum::<f64>() > DIVERGENCE_LEVEL {
            return Bracket::divergent(lo[..=j].iter().sum());
        }
    }
    let total: f64 = lo.iter().sum();
    let budget = rel_gap * 0.5 * total;
    let gap = |lo: &[f64], hi: &[f64]| hi.iter().zip(lo).map(|(h, l)| h - l).sum::<f64>();
    if gap(&lo, &hi) > budget && total > 0.0 {
        let g: Vec<f64> = hi.iter().zip(&lo).map(|(h, l)| (h - l) * COARSE_CELLS as f64).collect();
        let root_sum: f64 = g.iter().map(|x| x.sqrt()).sum();
        let mut scale = 1.0;
        for _ in 0..4 {
            for j in 0..blocks {
                let want = (scale * g[j].sqrt() * root_sum / budget).ceil() as usize;
                let cells = want.clamp(COARSE_CELLS, MAX_CELLS);
                if cells > COARSE_CELLS {
                    let (l, h) = dyadic_block(k, j, cells);
                    lo[j] = l;
                    hi[j] = h;
                }
            }
            if gap(&lo, &hi) <= budget {
                break;
            }
            scale *= 2.0;
        }
    }
    let mut lower: f64 = lo.iter().sum();
    let mut upper: f64 = hi.iter().sum();
    let s_end = blocks as f64 * std::f64::consts::LN_2;
    match tail {
        Tail::Closed(f) => {
            let t = f(s_end);
            if !t.is_finite() {
                return Bracket::divergent(lower);
            }
            Bracket { lower: lower + t, upper: upper + t, tail_exact: true, divergent: false }
        }
        Tail::Bounds(f) => {
            let (l, h) = f(s_end);
            if !h.is_finite() {
                return Bracket::divergent(lower + l);
            }
            Bracket { lower: lower + l, upper: upper + h, tail_exact: false, divergent: false }
        }
        Tail::Extend { s_max } => {
            let mut a = s_end;
            let mut last = (0.0, 0.0);
            while a < s_max {
                let b = (2.0 * a).min(s_max);
                let (l, h) = linear_block(k, a, b, EXTENSION_CELLS);
                lower += l;
                upper += h;
                if lower > DIVERGENCE_LEVEL {
                    return Bracket::divergent(lower);
                }
                if b == 2.0 * a {
                    last = (last.1, l);
                }
                a = b;
            }
            let (prev, cur) = last;
            if prev > 0.0 {
                let r = cur / prev;
                if r >= STALL_RATIO {
                    return Bracket::divergent(lower);
                }
                upper += cur * r / (1.0 - r);
            }
            Bracket { lower, upper, tail_exact: false, divergent: false }
        }
    }
}
