//! Bellman functions `B(x,y) = x²m(y)` and `B̃(f,N)`, the dyadic and
//! `n`-point concavity gaps, and the two embedding sums.

use serde::{Deserialize, Serialize};

use crate::bumps::{CAlpha, Convention, PenaltyFn};
use crate::error::{Error, Result};
use crate::functionals::{distribution_fn, lorentz_norm, mass_functional, u_star_all, DistributionFn, QuasiconcaveFn, Variant};
use crate::model::{CarlesonSequence, DyadicModel, Weight};
use crate::tol;

/// Decreasing step function `φ = level_k` on `(r_{k−1}, r_k]`, zero beyond the last `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFn {
    steps: Vec<(f64, f64)>,
}

impl StepFn {
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev_r = 0.0;
        let mut prev_level = f64::INFINITY;
        for (k, &(r, level)) in steps.iter().enumerate() {
            if !(r > prev_r) || !r.is_finite() {
                return Err(Error::InvalidInput(format!("step end {k} not increasing")));
            }
            if !(level >= 0.0) || !level.is_finite() {
                return Err(Error::InvalidInput(format!("step level {k} not finite and nonnegative")));
            }
            if level > prev_level {
                return Err(Error::NotDecreasing(k));
            }
            prev_r = r;
            prev_level = level;
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn eval(&self, y: f64) -> f64 {
        let i = self.steps.partition_point(|&(r, _)| r < y);
        self.steps.get(i).map_or(0.0, |s| s.1)
    }

    /// `φ(0⁺)`.
    pub fn at_zero(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.1)
    }

    pub fn l1_norm(&self) -> f64 {
        let mut lo = 0.0;
        let mut out = 0.0;
        for &(r, level) in &self.steps {
            out += (r - lo) * level;
            lo = r;
        }
        out
    }
}

/// `m(y) = Σ_j mass_j · 4/(1 + y/r_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BellmanM {
    atoms: Vec<(f64, f64)>,
}

impl BellmanM {
    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|&(r, w)| !(r > 0.0 && r.is_finite() && w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput("atoms need r > 0 and mass > 0".into()));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    fn sum(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(r, w)| f(r, w)).sum()
    }

    pub fn m(&self, y: f64) -> f64 {
        self.sum(|r, w| 4.0 * w / (1.0 + y / r))
    }
    pub fn dm(&self, y: f64) -> f64 {
        self.sum(|r, w| -4.0 * w / (r * (1.0 + y / r).powi(2)))
    }
    pub fn d2m(&self, y: f64) -> f64 {
        self.sum(|r, w| 8.0 * w / (r * r * (1.0 + y / r).powi(3)))
    }
    pub fn d3m(&self, y: f64) -> f64 {
        self.sum(|r, w| -24.0 * w / (r * r * r * (1.0 + y / r).powi(4)))
    }
    /// `m(0) = 4Σ mass_j`.
    pub fn m0(&self) -> f64 {
        4.0 * self.atoms.iter().map(|a| a.1).sum::<f64>()
    }
    /// `−m′(0⁺) = 4Σ mass_j/r_j`.
    pub fn slope0(&self) -> f64 {
        4.0 * self.atoms.iter().map(|&(r, w)| w / r).sum::<f64>()
    }
}

/// Layer-cake representation: a jump of height `h` at `r` becomes the atom `(r, r·h)`.
pub fn build_m(phi: &StepFn) -> Result<BellmanM> {
    let s = phi.steps();
    let mut atoms = Vec::new();
    for (k, &(r, level)) in s.iter().enumerate() {
        let next = s.get(k + 1).map_or(0.0, |n| n.1);
        let h = level - next;
        if h < 0.0 {
            return Err(Error::NotDecreasing(k + 1));
        }
        if h > 0.0 {
            atoms.push((r, r * h));
        }
    }
    Ok(BellmanM { atoms })
}

/// Geometric grid `1, ρ, ρ², …` up to `2^{k_max}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepGrid {
    pub ratio: f64,
    pub k_max: u32,
}

impl Default for StepGrid {
    fn default() -> Self {
        Self { ratio: 2f64.powf(1.0 / 16.0), k_max: 60 }
    }
}

/// Upper step majorant of `φ = 1/α(1)` on `(0,1]`, `1/(tα(t))` on `[1, 2^{k_max}]`.
pub fn step_majorant(alpha: &PenaltyFn, grid: StepGrid) -> Result<StepFn> {
    if !(grid.ratio > 1.0) {
        return Err(Error::InvalidInput("grid ratio must exceed 1".into()));
    }
    if alpha.c_alpha(Convention::With1OverAlpha1).divergent {
        return Err(Error::DivergentPenalty);
    }
    let ln_r = grid.ratio.ln();
    let cells = (grid.k_max as f64 * std::f64::consts::LN_2 / ln_r).ceil() as usize;
    let phi = |s: f64| (-s).exp() / alpha.alpha_log(s);
    let mut steps = vec![(1.0, phi(0.0))];
    for i in 1..=cells {
        let (a, b) = ((i - 1) as f64 * ln_r, i as f64 * ln_r);
        let level = phi(a);
        let last = steps.last_mut().expect("nonempty");
        if level >= last.1 {
            last.0 = b.exp();
            last.1 = last.1.max(level);
        } else {
            steps.push((b.exp(), level));
        }
    }
    StepFn::new(steps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conv02Report {
    /// Smallest `(m m″ − 2m′²)/(m m″)` on the grid.
    pub min_slack: f64,
    pub at: f64,
    /// Largest `φ(y) + m′(y)` on the grid, when `φ` is given.
    pub majorant_defect: f64,
    /// Smallest `m‴`-sign margin: `−m‴ ≤ 0` would break convexity of `−m′`.
    pub min_d3: f64,
    pub passed: bool,
}

/// Evaluates eq. `2m′² ≤ m m″`, `−m′ ≥ φ` and convexity of `−m′` on a grid.
pub fn check_conv02(m: &BellmanM, phi: Option<&StepFn>, ys: &[f64]) -> Conv02Report {
    let mut rep = Conv02Report { min_slack: f64::INFINITY, at: 0.0, majorant_defect: f64::NEG_INFINITY, min_d3: f64::INFINITY, passed: true };
    for &y in ys {
        let (v, d1, d2) = (m.m(y), m.dm(y), m.d2m(y));
        let prod = v * d2;
        let slack = if prod > 0.0 { (prod - 2.0 * d1 * d1) / prod } else { 0.0 };
        if slack < rep.min_slack {
            rep.min_slack = slack;
            rep.at = y;
        }
        if let Some(p) = phi {
            let need = p.eval(y);
            let defect = (need + d1) / need.max(f64::MIN_POSITIVE);
            rep.majorant_defect = rep.majorant_defect.max(if need > 0.0 { defect } else { 0.0 });
        }
        rep.min_d3 = rep.min_d3.min(-m.d3m(y));
    }
    rep.passed = rep.min_slack >= -1e-12 && rep.majorant_defect <= 1e-12 && rep.min_d3 >= 0.0;
    rep
}

/// `B̃` for a penalty rescaled to `C_α = 1`.
#[derive(Clone, Debug)]
pub struct BellmanB {
    /// The penalty as given.
    pub input: PenaltyFn,
    /// The rescaled penalty.
    pub alpha: PenaltyFn,
    /// Factor `λ` with `alpha = λ·α_input`.
    pub scale: f64,
    pub phi: StepFn,
    pub m: BellmanM,
    /// `C_α` of the rescaled penalty (at most 1).
    pub c_alpha: CAlpha,
    /// `‖φ_step‖₁/C_α − 1` for the rescaled penalty.
    pub grid_slack: f64,
}

impl BellmanB {
    pub fn new(alpha: &PenaltyFn) -> Result<Self> {
        Self::with_grid(alpha, StepGrid::default())
    }

    pub fn with_grid(alpha: &PenaltyFn, grid: StepGrid) -> Result<Self> {
        let c = alpha.c_alpha(Convention::With1OverAlpha1);
        if c.divergent {
            return Err(Error::DivergentPenalty);
        }
        let scale = c.upper;
        let input = alpha.clone();
        let alpha = alpha.scaled(scale);
        let c_alpha = alpha.c_alpha(Convention::With1OverAlpha1);
        let phi = step_majorant(&alpha, grid)?;
        let m = build_m(&phi)?;
        let grid_slack = phi.l1_norm() / c_alpha.lower - 1.0;
        Ok(Self { input, alpha, scale, phi, m, c_alpha, grid_slack })
    }

    /// `B(x,y) = x²m(y)`.
    pub fn b(&self, x: f64, y: f64) -> f64 {
        x * x * self.m.m(y)
    }

    /// `B₁(f,u,u*) = (f²/u)m(u*/u)`.
    pub fn b1(&self, f: f64, u: f64, u_star: f64) -> f64 {
        f * f / u * self.m.m(u_star / u)
    }

    /// `2B₁(f,u,u*) + f²/u`.
    pub fn value_scalar(&self, f: f64, u: f64, u_star: f64) -> f64 {
        2.0 * self.b1(f, u, u_star) + f * f / u
    }

    /// `B̃(f,N)` with `u = ∫N`, `u* = ∫ψ₀(N)`.
    pub fn value(&self, f: f64, n: &DistributionFn) -> Result<f64> {
        let (u, us) = moments(n)?;
        Ok(self.value_scalar(f, u, us))
    }

    /// `2m(0) + 1`, the constant in `B̃ ≤ C f²/u`.
    pub fn bound_constant(&self) -> f64 {
        2.0 * self.m.m0() + 1.0
    }

    /// Both sides of the two-point inequality at `N = (N₊+N₋)/2`.
    pub fn dyadic_gap(&self, f_plus: f64, n_plus: &DistributionFn, f_minus: f64, n_minus: &DistributionFn) -> Result<Gap> {
        let n = DistributionFn::combine(&[(0.5, n_plus), (0.5, n_minus)]);
        self.dyadic_gap_at(0.5 * (f_plus + f_minus), &n, f_plus, n_plus, f_minus, n_minus)
    }

    /// As [`BellmanB::dyadic_gap`] with the midpoint supplied and checked.
    pub fn dyadic_gap_at(
        &self,
        f: f64,
        n: &DistributionFn,
        f_plus: f64,
        n_plus: &DistributionFn,
        f_minus: f64,
        n_minus: &DistributionFn,
    ) -> Result<Gap> {
        let scale = f_plus.abs().max(f_minus.abs()).max(1.0);
        if (f - 0.5 * (f_plus + f_minus)).abs() > 1e-12 * scale {
            return Err(Error::MidpointMismatch { t: f64::NAN });
        }
        let mid = DistributionFn::combine(&[(0.5, n_plus), (0.5, n_minus)]);
        check_same(n, &mid)?;
        let (u, us) = moments(n)?;
        let lhs = 0.5 * (self.value(f_plus, n_plus)? + self.value(f_minus, n_minus)?) - self.value_scalar(f, u, us);
        let rhs = 0.5 * (f_plus - f).powi(2) / (self.alpha.alpha(us / u) * us);
        Ok(Gap { lhs, rhs })
    }

    /// Both sides of the `n`-point inequality with constant ¼, plus the extremal split.
    pub fn splitting_gap(&self, fs: &[f64], ns: &[DistributionFn], gammas: &[f64]) -> Result<SplitGap> {
        let k = fs.len();
        if k == 0 || ns.len() != k || gammas.len() != k {
            return Err(Error::ConvexityDataInvalid("weights must be nonnegative, sum to 1 and match the data".into()));
        }
        let total: f64 = gammas.iter().sum();
        if gammas.iter().any(|&g| !(g >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::ConvexityDataInvalid("weights must be nonnegative, sum to 1 and match the data".into()));
        }
        let f: f64 = fs.iter().zip(gammas).map(|(a, g)| a * g).sum();
        let parts: Vec<(f64, &DistributionFn)> = gammas.iter().copied().zip(ns.iter()).collect();
        let n = DistributionFn::combine(&parts);
        let (u, us) = moments(&n)?;
        let mut lhs = -self.value_scalar(f, u, us);
        for i in 0..k {
            if gammas[i] > 0.0 {
                lhs += gammas[i] * self.value(fs[i], &ns[i])?;
            }
        }
        let x: Vec<f64> = fs.iter().map(|a| a - f).collect();
        let l1: f64 = x.iter().zip(gammas).map(|(a, g)| g * a.abs()).sum();
        let rhs = 0.25 * l1 * l1 / (self.alpha.alpha(us / u) * us);
        let beta = extremal_split(&x, gammas);
        let quotient: f64 = x.iter().zip(gammas).zip(&beta).map(|((a, g), b)| a * g * b).sum();
        let wp: Vec<(f64, &DistributionFn)> = (0..k).map(|i| (gammas[i] * (1.0 + beta[i]), &ns[i])).collect();
        let wm: Vec<(f64, &DistributionFn)> = (0..k).map(|i| (gammas[i] * (1.0 - beta[i]), &ns[i])).collect();
        let fp: f64 = (0..k).map(|i| gammas[i] * (1.0 + beta[i]) * fs[i]).sum();
        let fm: f64 = (0..k).map(|i| gammas[i] * (1.0 - beta[i]) * fs[i]).sum();
        let pair = self.dyadic_gap_at(f, &n, fp, &DistributionFn::combine(&wp), fm, &DistributionFn::combine(&wm)).ok();
        Ok(SplitGap { lhs, rhs, l1, quotient, beta, pair })
    }
}

fn moments(n: &DistributionFn) -> Result<(f64, f64)> {
    let u = mass_functional(n);
    if !(u > 0.0) {
        return Err(Error::DivisionByZero("u(N) = 0".into()));
    }
    Ok((u, lorentz_norm(n, &QuasiconcaveFn::psi0())))
}

fn check_same(a: &DistributionFn, b: &DistributionFn) -> Result<()> {
    let ts = a.steps().iter().chain(b.steps()).map(|s| s.0);
    let mut probes: Vec<f64> = vec![0.0];
    for t in ts {
        probes.push(t);
        probes.push(t * (1.0 - 1e-9));
    }
    for t in probes {
        if (a.eval(t) - b.eval(t)).abs() > 1e-12 {
            return Err(Error::MidpointMismatch { t });
        }
    }
    Ok(())
}

/// Two sides of a concavity-gap inequality `lhs ≥ rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub lhs: f64,
    pub rhs: f64,
}

impl Gap {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs - 1e-10 * self.lhs.abs().max(self.rhs.abs()).max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitGap {
    pub lhs: f64,
    pub rhs: f64,
    /// `Σγ_k|f_k − f|`.
    pub l1: f64,
    /// `Σγ_kβ_k(f_k − f)`, at least `l1/2`.
    pub quotient: f64,
    pub beta: Vec<f64>,
    /// The two-point gap at the split `(f±, N±)`.
    pub pair: Option<Gap>,
}

impl SplitGap {
    pub fn holds(&self) -> bool {
        Gap { lhs: self.lhs, rhs: self.rhs }.holds()
    }
}

/// Maximizer of `Σγ_kβ_kx_k` over `|β_k| ≤ 1`, `Σγ_kβ_k = 0`.
pub fn extremal_split(x: &[f64], gammas: &[f64]) -> Vec<f64> {
    if x.len() <= 12 {
        exhaustive_split(x, gammas)
    } else {
        greedy_split(x, gammas)
    }
}

/// Vertices of the polytope have all but one coordinate at `±1`.
fn exhaustive_split(x: &[f64], g: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    for free in 0..n {
        if g[free] <= 0.0 {
            continue;
        }
        for signs in 0u32..(1 << (n - 1)) {
            let mut beta = vec![0.0; n];
            let mut bit = 0;
            let mut acc = 0.0;
            for k in 0..n {
                if k == free {
                    continue;
                }
                beta[k] = if signs >> bit & 1 == 1 { 1.0 } else { -1.0 };
                bit += 1;
                acc += g[k] * beta[k];
            }
            let b = -acc / g[free];
            if b.abs() > 1.0 + 1e-12 {
                continue;
            }
            beta[free] = b.clamp(-1.0, 1.0);
            let v: f64 = (0..n).map(|k| g[k] * beta[k] * x[k]).sum();
            if v > best.0 {
                best = (v, beta);
            }
        }
    }
    best.1
}

/// `β = +1` above a γ-weighted median, `−1` below, fractional at the median.
fn greedy_split(x: &[f64], g: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap());
    let total: f64 = g.iter().sum();
    let mut beta = vec![-1.0; n];
    let mut acc = 0.0;
    for &k in &order {
        if g[k] <= 0.0 {
            beta[k] = 0.0;
            continue;
        }
        if acc + g[k] <= 0.5 * total {
            beta[k] = 1.0;
            acc += g[k];
        } else {
            let rest = 0.5 * total - acc;
            beta[k] = (2.0 * rest - g[k]) / g[k];
            acc = 0.5 * total;
        }
    }
    beta
}

/// Two sides of an embedding inequality and any intermediate certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// The Bellman telescoping bound on `lhs`, when computed.
    pub telescoped: Option<f64>,
    pub c_alpha: f64,
}

impl EmbeddingCheck {
    fn new(lhs: f64, rhs: f64, telescoped: Option<f64>, c_alpha: f64) -> Self {
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
        Self { lhs, rhs, ratio, telescoped, c_alpha }
    }
    pub fn holds(&self) -> bool {
        tol::le(self.lhs, self.rhs)
    }
}

/// `Σ⟨fu⟩_I² a_I|I|/(α(u*/u)u*) ≤ 4C_α‖a‖_Carl‖f‖²_{L²(u)}` with maximal `u*`.
pub fn embedding_sum_carleson(
    model: &DyadicModel,
    u: &Weight,
    f: &Weight,
    a: &CarlesonSequence,
    alpha: &PenaltyFn,
) -> Result<EmbeddingCheck> {
    let c = alpha.c_alpha(Convention::With1OverAlpha1);
    if c.divergent {
        return Err(Error::DivergentPenalty);
    }
    let ua = model.averages(u);
    let fua = model.averages(&f.mul(u));
    let us = u_star_all(model, u, Variant::Maximal);
    let mut lhs = 0.0;
    for i in 0..model.len() {
        if a.entries[i] > 0.0 && ua[i] > 0.0 {
            lhs += fua[i] * fua[i] * a.entries[i] * model.mass(i) / (alpha.alpha(us[i] / ua[i]) * us[i]);
        }
    }
    let rhs = 4.0 * c.upper * a.carleson_norm * f.l2_norm_sq(model, u);
    Ok(EmbeddingCheck::new(lhs, rhs, None, c.upper))
}

/// `Σ‖Δ_I(fu)‖²_{L¹(I)}|I|/(α(u*/u)u*) ≤ 36C_α‖f‖²_{L²(u)}` with Lorentz `u*`,
/// together with the Bellman telescoping bound `4C_α(Σ_leaves|I|B̃ − |I₀|B̃(I₀))`.
pub fn embedding_sum_haar(model: &DyadicModel, u: &Weight, f: &Weight, alpha: &PenaltyFn) -> Result<EmbeddingCheck> {
    embedding_sum_haar_with(&BellmanB::new(alpha)?, model, u, f)
}

/// As [`embedding_sum_haar`] with a prebuilt Bellman function.
pub fn embedding_sum_haar_with(bell: &BellmanB, model: &DyadicModel, u: &Weight, f: &Weight) -> Result<EmbeddingCheck> {
    let alpha = &bell.input;
    let c = bell.scale;
    let fu = f.mul(u);
    let ua = model.averages(u);
    let fua = model.averages(&fu);
    let us = u_star_all(model, u, Variant::Lorentz);
    let mut lhs = 0.0;
    for i in 0..model.len() {
        if model.is_leaf(i) || ua[i] <= 0.0 {
            continue;
        }
        let l1: f64 = model.children(i).iter().map(|&ch| model.mass(ch) * (fua[ch] - fua[i]).abs()).sum::<f64>() / model.mass(i);
        lhs += l1 * l1 * model.mass(i) / (alpha.alpha(us[i] / ua[i]) * us[i]);
    }
    let rhs = 36.0 * c * f.l2_norm_sq(model, u);
    let root = model.root();
    let telescoped = if ua[root] > 0.0 {
        let b = |i: usize| -> Result<f64> {
            if ua[i] <= 0.0 {
                return Ok(0.0);
            }
            bell.value(fua[i], &distribution_fn(model, u, i))
        };
        let mut t = -model.mass(root) * b(root)?;
        for &leaf in model.leaves() {
            t += model.mass(leaf) * b(leaf)?;
        }
        Some(4.0 * c * t)
    } else {
        None
    };
    Ok(EmbeddingCheck::new(lhs, rhs, telescoped, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(v: &[(f64, f64)]) -> StepFn {
        StepFn::new(v.to_vec()).unwrap()
    }

    #[test]
    fn indicator_gives_the_building_block() {
        let m = build_m(&step(&[(1.0, 1.0)])).unwrap();
        for y in [0.0, 0.5, 3.0, 100.0] {
            assert!((m.m(y) - 4.0 / (1.0 + y)).abs() < 1e-15);
        }
    }

    #[test]
    fn layer_cake_atoms() {
        let m = build_m(&step(&[(2.0, 0.5)])).unwrap();
        assert_eq!(m.atoms(), &[(2.0, 1.0)]);
        assert_eq!(m.m0(), 4.0);
        let m = build_m(&step(&[(1.0, 1.0), (2.0, 0.5)])).unwrap();
        assert_eq!(m.atoms(), &[(1.0, 0.5), (2.0, 1.0)]);
        assert_eq!(m.m0(), 6.0);
    }

    #[test]
    fn increasing_step_is_rejected() {
        assert!(matches!(StepFn::new(vec![(1.0, 0.5), (2.0, 1.0)]), Err(Error::NotDecreasing(1))));
    }

    #[test]
    fn single_atom_is_extremal() {
        let m = build_m(&step(&[(1.0, 1.0)])).unwrap();
        let ys: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        let r = check_conv02(&m, None, &ys);
        assert!(r.min_slack.abs() < 1e-12);
        let m2 = build_m(&step(&[(1.0, 1.0), (2.0, 0.5)])).unwrap();
        assert!(check_conv02(&m2, None, &ys).min_slack > 0.0);
    }

    #[test]
    fn identity_penalty_dyadic_grid_mass() {
        let s = step_majorant(&PenaltyFn::identity(), StepGrid { ratio: 2.0, k_max: 40 }).unwrap();
        assert!((s.l1_norm() - (1.0 + 2.0 * (1.0 - 2f64.powi(-40)))).abs() < 1e-12);
        assert!(s.l1_norm() <= 2.0 * 2.0);
    }

    #[test]
    fn constant_penalty_is_rejected() {
        assert!(matches!(step_majorant(&PenaltyFn::constant(1.0), StepGrid::default()), Err(Error::DivergentPenalty)));
    }

    #[test]
    fn greedy_matches_exhaustive() {
        let x = [0.3, -1.2, 2.0, 0.1, -0.4, 0.9];
        let g = [0.1, 0.2, 0.15, 0.25, 0.2, 0.1];
        let v = |b: &[f64]| b.iter().zip(&x).zip(&g).map(|((b, x), g)| b * x * g).sum::<f64>();
        assert!((v(&exhaustive_split(&x, &g)) - v(&greedy_split(&x, &g))).abs() < 1e-12);
    }
}
