//! Luxemburg norms and the comparison chain Orlicz → Lorentz → entropy bump.

use serde::{Deserialize, Serialize};

use super::integral::Bracket;
use super::penalty::{CAlpha, Convention, PenaltyFn};
use super::young::YoungFn;
use crate::error::{Error, Result};
use crate::functionals::{distribution_fn, lorentz_norm, mass_functional, upper_hull, DistributionFn, QuasiconcaveFn};
use crate::model::{AtomId, DyadicModel, Weight};

/// Relative accuracy of the Luxemburg bisection.
pub const LUXEMBURG_TOL: f64 = 1e-12;

/// `inf{λ > 0 : Σ m_i Φ(|f_i|/λ) / Σ m_i ≤ 1}`.
pub fn luxemburg_values(values: &[f64], masses: &[f64], phi: &YoungFn) -> f64 {
    let total: f64 = masses.iter().sum();
    let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 || total <= 0.0 {
        return 0.0;
    }
    let gauge = |lam: f64| values.iter().zip(masses).map(|(v, m)| m * phi.phi(v.abs() / lam)).sum::<f64>() / total;
    let mut hi = max;
    while gauge(hi) > 1.0 {
        hi *= 2.0;
    }
    let mut lo = hi;
    while gauge(lo) <= 1.0 && lo > f64::MIN_POSITIVE {
        lo *= 0.5;
    }
    while hi - lo > LUXEMBURG_TOL * hi {
        let mid = (lo * hi).sqrt().clamp(lo.max(f64::MIN_POSITIVE), hi);
        let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
        if gauge(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `‖w‖_{L^Φ(I)}` with respect to `dμ/|I|`.
pub fn luxemburg_norm(model: &DyadicModel, w: &Weight, id: AtomId, phi: &YoungFn) -> Result<f64> {
    phi.validate()?;
    let r = model.leaf_span(id);
    Ok(luxemburg_values(&w.values[r.clone()], &model.leaf_masses()[r], phi))
}

/// Luxemburg norm of the simple function with distribution `N` on a unit-mass space.
pub fn luxemburg_of_distribution(n: &DistributionFn, phi: &YoungFn) -> f64 {
    let segs: Vec<(f64, f64, f64)> = n.segments().collect();
    let mut values = Vec::with_capacity(segs.len());
    let mut masses = Vec::with_capacity(segs.len() + 1);
    for (i, &(_, hi, level)) in segs.iter().enumerate() {
        let next = segs.get(i + 1).map_or(0.0, |s| s.2);
        values.push(hi);
        masses.push(level - next);
    }
    let used: f64 = masses.iter().sum();
    values.push(0.0);
    masses.push((1.0 - used).max(0.0));
    luxemburg_values(&values, &masses, phi)
}

/// The Lorentz profile produced from a Young function.
#[derive(Clone, Debug)]
pub struct LorentzProfile {
    pub psi: QuasiconcaveFn,
    /// `∫₁^∞ dt/Φ(t)`.
    pub young_tail: Bracket,
}

fn tau_of(phi: &YoungFn, lambda: f64) -> f64 {
    phi.ln_phi(lambda) + phi.ln_dphi(lambda)
}

/// Parametric profile `Ψ(s) = Φ'(t)` at `s = 1/(Φ(t)Φ'(t))`, tabulated as `τ = −ln s ↦ Ψ`.
pub fn orlicz_to_lorentz(phi: &YoungFn) -> Result<LorentzProfile> {
    let young_tail = phi.tail();
    if young_tail.divergent {
        return Err(Error::DivergentYoungTail(phi.name().into()));
    }
    let (mut a, mut b) = (-50.0, 50.0);
    if tau_of(phi, a) < 0.0 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if tau_of(phi, m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
    }
    let l0 = b;
    let mut lambdas: Vec<f64> = (0..=2000).map(|i| l0 + i as f64 * 0.02).collect();
    let mut l = *lambdas.last().unwrap();
    while l < 1e12 {
        l *= 1.01;
        lambdas.push(l);
    }
    let mut tau = Vec::with_capacity(lambdas.len());
    let mut big = Vec::with_capacity(lambdas.len());
    for &l in &lambdas {
        if phi.ln_dphi(l) > 700.0 {
            break;
        }
        let t = tau_of(phi, l);
        if let Some(&last) = tau.last() {
            if !(t > last) {
                continue;
            }
        }
        tau.push(t);
        big.push(phi.ln_dphi(l).exp());
    }
    for i in 1..tau.len() {
        let (dt, dl) = (tau[i] - tau[i - 1], big[i].ln() - big[i - 1].ln());
        if dl < -1e-12 || dl > dt * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::NotQuasiconcave(format!("profile fails near τ = {}", tau[i])));
        }
    }
    let psi = QuasiconcaveFn::from_profile(&format!("Lorentz({})", phi.name()), tau, big)?;
    Ok(LorentzProfile { psi, young_tail })
}

/// Penalty produced from a Lorentz profile by the convexity construction.
#[derive(Clone, Debug)]
pub struct PsiPenalty {
    pub alpha: PenaltyFn,
    /// The truncated profile `Ψ₁ ≥ Ψ` whose norm dominates the bump.
    pub psi1: QuasiconcaveFn,
    /// `τ` below which `Ψ(e^{−τ})` was frozen to restore convexity.
    pub truncation: f64,
    /// Integral-only `C_α`, equal to `∫₀¹ ds/(sΨ₁(s))`.
    pub c_alpha: CAlpha,
}

/// Two sides of a bump comparison `α(‖f‖*/‖f‖₁)‖f‖* ≤ ‖f‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
}

impl Comparison {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
    pub fn ratio(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs / self.rhs
        } else {
            0.0
        }
    }
}

/// `α(‖f‖*/‖f‖₁)‖f‖*` with `‖f‖* = ∫ψ₀(N)`.
pub fn bump_lhs(alpha: &PenaltyFn, n: &DistributionFn) -> f64 {
    let l1 = mass_functional(n);
    if l1 <= 0.0 {
        return 0.0;
    }
    let star = lorentz_norm(n, &QuasiconcaveFn::psi0());
    alpha.alpha((star / l1).max(1.0)) * star
}

impl PsiPenalty {
    pub fn predicate(&self, n: &DistributionFn) -> Comparison {
        Comparison { lhs: bump_lhs(&self.alpha, n), rhs: lorentz_norm(n, &self.psi1) }
    }
}

fn tau_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
    let mut t = 20.0;
    while t < 1e6 {
        t *= 1.01;
        g.push(t);
    }
    g
}

/// `α(t) = Ψ₁(e·e^{−t})/t` where `Ψ₁` freezes `Ψ` below the last convexity defect of
/// `τ ↦ Ψ(e^{−τ})`.
pub fn alpha_from_psi(psi: &QuasiconcaveFn) -> Result<PsiPenalty> {
    let g = tau_grid();
    let p: Vec<f64> = g.iter().map(|&t| psi.profile(t)).collect();
    if p.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::NotQuasiconcave(format!("{}: profile not positive", psi.name())));
    }
    if p.windows(2).any(|w| w[1] < w[0] * (1.0 - 1e-12)) {
        return Err(Error::NotQuasiconcave(format!("{}: Ψ is not decreasing", psi.name())));
    }
    let slopes: Vec<f64> = (0..g.len() - 1).map(|i| (p[i + 1] - p[i]) / (g[i + 1] - g[i])).collect();
    let mut a = 0.0;
    for i in 1..slopes.len() {
        let tol = 1e-9 * slopes[i - 1].abs() + 1e-12 * p[i];
        if slopes[i] < slopes[i - 1] - tol {
            a = g[i];
        }
    }
    if a > 0.1 * g[g.len() - 1] {
        return Err(Error::NotConvexAfterTruncation(a));
    }
    let psi1 = psi.truncated(a);
    let alpha = PenaltyFn::from_profile(psi1.clone());
    let c_alpha = alpha.c_alpha(Convention::IntegralOnly);
    if c_alpha.divergent {
        return Err(Error::DivergentPenalty);
    }
    Ok(PsiPenalty { alpha, psi1, truncation: a, c_alpha })
}

/// Output of the derivative-minimum construction.
#[derive(Clone, Debug)]
pub struct MinYoung {
    pub young: YoungFn,
    /// Largest `c` with `Φ ≥ c·min{Φ₁,Φ₂}` on the test grid.
    pub c: f64,
    /// Whether `Φ ≤ min{Φ₁,Φ₂}` held on the test grid.
    pub dominated: bool,
    pub tail: Bracket,
}

/// `Φ = ∫₀ᵗ min(Φ₁', Φ₂')` with its sandwich constant on `t ∈ [1, 10⁶]`.
pub fn min_young(a: &YoungFn, b: &YoungFn) -> MinYoung {
    let young = YoungFn::min_of(a, b);
    let mut c = f64::INFINITY;
    let mut dominated = true;
    for i in 0..=600 {
        let t = 10f64.powf(i as f64 * 0.01);
        let m = a.phi(t).min(b.phi(t));
        let v = young.phi(t);
        c = c.min(v / m);
        if v > m * (1.0 + 1e-10) {
            dominated = false;
        }
    }
    let tail = young.tail();
    MinYoung { young, c, dominated, tail }
}

/// Largest `c` with `Φ(t) ≥ c·t ln t` on a log grid of `[t0, 10⁸]`.
pub fn young_llogl_floor(phi: &YoungFn, t0: f64) -> Result<f64> {
    if !(t0 > 1.0) {
        return Err(Error::InvalidInput("floor needs t0 > 1".into()));
    }
    if phi.tail().divergent {
        return Err(Error::DivergentYoungTail(phi.name().into()));
    }
    let (l0, l1) = (t0.ln(), 1e8f64.ln());
    let c = (0..=1000)
        .map(|i| {
            let l = l0 + (l1 - l0) * i as f64 / 1000.0;
            (phi.ln_phi_over_t(l) - l.ln()).exp()
        })
        .fold(f64::INFINITY, f64::min);
    if !(c > 0.0) {
        return Err(Error::FloorViolated(format!("{}: c = {c}", phi.name())));
    }
    Ok(c)
}

/// Penalty produced from a Young function.
#[derive(Clone, Debug)]
pub struct YoungPenalty {
    pub alpha: PenaltyFn,
    pub young: YoungFn,
    /// `Φ₀ = ∫ min(Φ', (t ln²(e+t))')`.
    pub min_young: MinYoung,
    /// The free constant of the parametrization `s = c/(t ln⁴ t)`.
    pub c: f64,
    pub t0: f64,
    /// Smallest `φ⁻¹/φ̃⁻¹` over the table (at least ½ by the hull sandwich).
    pub hull_ratio: f64,
    /// Factor `K` with `α = α_raw/K`, fitted on the calibration family.
    pub normalization: f64,
    pub c_alpha: CAlpha,
}

impl YoungPenalty {
    pub fn predicate(&self, n: &DistributionFn) -> Comparison {
        Comparison { lhs: bump_lhs(&self.alpha, n), rhs: luxemburg_of_distribution(n, &self.young) }
    }
}

/// Indicators and two-level functions spanning many scales.
pub fn calibration_family() -> Vec<DistributionFn> {
    let mut out = Vec::new();
    for j in (0..=900).step_by(3) {
        let s = 2f64.powi(-j);
        out.push(DistributionFn::from_steps(vec![(1.0, s)]).expect("valid step"));
    }
    for j in (0..=60).step_by(4) {
        let s1 = 2f64.powi(-j);
        for i in [1, 4, 8, 16, 32] {
            let s2 = s1 * 2f64.powi(-i);
            for m in [1, 4, 8, 16, 32] {
                let h = 2f64.powi(m);
                out.push(DistributionFn::from_steps(vec![(1.0, s1), (h, s2)]).expect("valid steps"));
            }
        }
    }
    out
}

/// Safety factor applied to the fitted normalization.
pub const CALIBRATION_MARGIN: f64 = 2.0;

/// The full comparison pipeline: minimum with `t ln²(e+t)`, the profile
/// `Ψ₀(s) = Φ_min(t)/t` at `s = 1/(t ln⁴ t)`, the least concave majorant of its
/// inverse, and `alpha_from_psi`.
pub fn alpha_from_young(phi: &YoungFn, t0: f64) -> Result<YoungPenalty> {
    phi.validate()?;
    if phi.tail().divergent {
        return Err(Error::DivergentYoungTail(phi.name().into()));
    }
    let t0 = t0.max(std::f64::consts::E.exp());
    let l0 = t0.ln();
    let ratio_log = |l: f64| phi.ln_phi_over_t(l) - l.ln();
    let mut prev = ratio_log(l0);
    for i in 1..=2000 {
        let l = l0 + (700.0 - l0) * i as f64 / 2000.0;
        let r = ratio_log(l);
        if r < prev - 1e-10 * prev.abs().max(1.0) {
            return Err(Error::HypothesisViolated(format!("Φ(t)/(t ln t) decreases near t = e^{l}")));
        }
        prev = r;
    }
    let phi2 = YoungFn::tlog2();
    let min_young = min_young(phi, &phi2);
    if min_young.tail.divergent {
        return Err(Error::DivergentYoungTail(min_young.young.name().into()));
    }
    let c = 1.0;
    let mut lambdas: Vec<f64> = (0..=1000).map(|i| l0 + i as f64 * 0.05).collect();
    let mut l = *lambdas.last().unwrap();
    while l < 1e140 {
        l *= 1.02;
        lambdas.push(l);
    }
    let mut pts = vec![(0.0, 0.0)];
    for &l in &lambdas {
        let tau = l + 4.0 * l.ln() - f64::ln(c);
        let val = phi.ln_phi_over_t(l).min(phi2.ln_phi_over_t(l)).exp();
        pts.push((val, tau));
    }
    let hull = upper_hull(&pts);
    let inv_hull = |y: f64| -> f64 {
        let i = hull.partition_point(|p| p.0 <= y).clamp(1, hull.len() - 1);
        let (a, b) = (hull[i - 1], hull[i]);
        a.1 + (b.1 - a.1) * ((y - a.0) / (b.0 - a.0))
    };
    let hull_ratio = pts[1..].iter().map(|&(y, x)| x / inv_hull(y)).fold(f64::INFINITY, f64::min);
    let verts: Vec<(f64, f64)> = hull.iter().map(|&(y, x)| (x, y)).collect();
    let n = verts.len();
    let (tl, pl) = verts[n - 1];
    let (tp, pp) = verts[n - 2];
    let kappa = ((pl / pp).ln() / (tl / tp).ln()).max((pl - pp) / (tl - tp) * tl / pl).max(1.0);
    let tau_first = pts[1].1;
    let profile = move |tau: f64| -> f64 {
        let tau = tau.max(tau_first);
        if tau >= tl {
            return pl * (tau / tl).powf(kappa);
        }
        let i = verts.partition_point(|p| p.0 <= tau).clamp(1, n - 1);
        let (a, b) = (verts[i - 1], verts[i]);
        a.1 + (b.1 - a.1) * ((tau - a.0) / (b.0 - a.0))
    };
    let psi_tilde = QuasiconcaveFn::from_profile_fn(&format!("hull({})", phi.name()), profile);
    let raw = alpha_from_psi(&psi_tilde)?;
    let worst = calibration_family()
        .iter()
        .map(|nf| Comparison { lhs: bump_lhs(&raw.alpha, nf), rhs: luxemburg_of_distribution(nf, phi) }.ratio())
        .fold(0.0, f64::max);
    let normalization = (CALIBRATION_MARGIN * worst).max(1.0);
    let alpha = raw.alpha.scaled(1.0 / normalization);
    let c_alpha = alpha.c_alpha(Convention::IntegralOnly);
    if c_alpha.divergent {
        return Err(Error::DivergentPenalty);
    }
    Ok(YoungPenalty { alpha, young: phi.clone(), min_young, c, t0, hull_ratio, normalization, c_alpha })
}

/// `‖f‖_{Λψ}/‖f‖_{L^Φ}` for a simple function given by its distribution.
pub fn lorentz_orlicz_ratio(psi: &QuasiconcaveFn, phi: &YoungFn, n: &DistributionFn) -> f64 {
    let den = luxemburg_of_distribution(n, phi);
    if den > 0.0 {
        lorentz_norm(n, psi) / den
    } else {
        0.0
    }
}

/// Lorentz norm of `w` on `I` for a general `ψ`.
pub fn lorentz_norm_of(model: &DyadicModel, w: &Weight, id: AtomId, psi: &QuasiconcaveFn) -> f64 {
    lorentz_norm(&distribution_fn(model, w, id), psi)
}
