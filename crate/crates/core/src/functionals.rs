//! Distribution functions, Lorentz norms, the two `u*` functionals,
//! least concave majorants, A₂ / Wilson A∞ characteristics and the
//! concavity laws of the L log L functional.
//!
//! Every integral here is an exact finite step sum.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomId, DyadicModel, Weight};
use crate::tol;

/// `ψ₀(s) = s ln(e/s)`, with `ψ₀(0) = 0`.
pub fn psi0(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s * (1.0 - s.ln())
    }
}

/// Decreasing right-continuous step function `N: [0,∞) → [0,1]`.
///
/// `steps[k] = (t_k, N_k)` means `N(t) = N_k` on `[t_{k-1}, t_k)` with
/// `t_{-1} = 0`, and `N = 0` beyond the last threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DistributionFn {
    steps: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for DistributionFn {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_steps(v)
    }
}

impl From<DistributionFn> for Vec<(f64, f64)> {
    fn from(d: DistributionFn) -> Self {
        d.steps
    }
}

impl DistributionFn {
    pub fn zero() -> Self {
        Self { steps: Vec::new() }
    }

    /// Validated constructor: thresholds strictly increasing, levels strictly decreasing in (0,1].
    pub fn from_steps(steps: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev_t = 0.0;
        let mut prev_n = f64::INFINITY;
        for (k, &(t, n)) in steps.iter().enumerate() {
            if !(t > prev_t) || !t.is_finite() {
                return Err(Error::InvalidInput(format!("threshold {k} not increasing")));
            }
            if !(n > 0.0 && n <= 1.0 + tol::REL_TOL && n < prev_n) {
                return Err(Error::NotDecreasing(k));
            }
            prev_t = t;
            prev_n = n;
        }
        Ok(Self { steps })
    }

    /// Builds from raw segment levels, merging equal neighbours and dropping zero tails.
    fn from_segments(bounds: &[f64], levels: &[f64]) -> Self {
        let mut steps: Vec<(f64, f64)> = Vec::new();
        for (k, &n) in levels.iter().enumerate() {
            let t = bounds[k + 1];
            if n <= 0.0 {
                break;
            }
            match steps.last_mut() {
                Some(last) if last.1 == n => last.0 = t,
                _ => steps.push((t, n.min(1.0))),
            }
        }
        Self { steps }
    }

    /// Normalized distribution of the values with the given masses.
    pub fn from_values(values: &[f64], masses: &[f64]) -> Self {
        let total: f64 = masses.iter().sum();
        let mut pairs: Vec<(f64, f64)> =
            values.iter().zip(masses).filter(|(v, _)| **v > 0.0).map(|(&v, &m)| (v, m)).collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut steps_desc: Vec<(f64, f64)> = Vec::new();
        let mut acc = 0.0;
        let mut i = 0;
        while i < pairs.len() {
            let v = pairs[i].0;
            while i < pairs.len() && pairs[i].0 == v {
                acc += pairs[i].1;
                i += 1;
            }
            steps_desc.push((v, (acc / total).min(1.0)));
        }
        steps_desc.reverse();
        Self { steps: steps_desc }
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match self.steps.iter().find(|&&(tk, _)| t < tk) {
            Some(&(_, n)) => n,
            None => 0.0,
        }
    }

    /// Segments `(t_lo, t_hi, N)`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.steps.iter().scan(0.0, |lo, &(t, n)| {
            let seg = (*lo, t, n);
            *lo = t;
            Some(seg)
        })
    }

    pub fn support_end(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.0)
    }

    /// `t ↦ N(t/λ)`.
    pub fn scale_thresholds(&self, lambda: f64) -> Self {
        Self { steps: self.steps.iter().map(|&(t, n)| (t * lambda, n)).collect() }
    }

    /// `Σ γ_k N_k` on the merged threshold grid.
    pub fn combine(parts: &[(f64, &DistributionFn)]) -> Self {
        let bounds = merged_bounds(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
        let levels: Vec<f64> = bounds
            .windows(2)
            .map(|w| parts.iter().map(|(g, d)| g * d.eval(w[0])).sum())
            .collect();
        Self::from_segments(&bounds, &levels)
    }
}

/// `0 = b_0 < b_1 < ... ` covering every threshold of the inputs.
fn merged_bounds(ds: &[&DistributionFn]) -> Vec<f64> {
    let mut b: Vec<f64> = ds.iter().flat_map(|d| d.steps.iter().map(|s| s.0)).collect();
    b.push(0.0);
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup();
    b
}

/// Exact distribution of `w` restricted to atom `I`, normalized by `|I|`.
pub fn distribution_fn(model: &DyadicModel, w: &Weight, id: AtomId) -> DistributionFn {
    let r = model.leaf_span(id);
    DistributionFn::from_values(&w.values[r.clone()], &model.leaf_masses()[r])
}

/// `∫₀^∞ N(t) dt`.
pub fn mass_functional(n: &DistributionFn) -> f64 {
    n.segments().map(|(a, b, v)| v * (b - a)).sum()
}

/// Quasiconcave function `ψ` on `[0,1]`, also accessible through the profile
/// `τ ↦ Ψ(e^{−τ})` where `Ψ(s) = ψ(s)/s`, which stays finite for huge `τ`.
#[derive(Clone)]
pub struct QuasiconcaveFn {
    name: String,
    rule: PsiRule,
}

#[derive(Clone)]
enum PsiRule {
    Psi0,
    Identity,
    LogPower(f64),
    Power(f64),
    Grid { s: Vec<f64>, v: Vec<f64> },
    Profile { tau: Vec<f64>, big_psi: Vec<f64> },
    ProfileFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for QuasiconcaveFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuasiconcaveFn({})", self.name)
    }
}

impl QuasiconcaveFn {
    /// `ψ₀(s) = s ln(e/s)`.
    pub fn psi0() -> Self {
        Self { name: "s ln(e/s)".into(), rule: PsiRule::Psi0 }
    }
    /// `ψ(s) = s`.
    pub fn identity() -> Self {
        Self { name: "s".into(), rule: PsiRule::Identity }
    }
    /// `ψ(s) = s ln^p(e/s)`, `p ≥ 0`.
    pub fn log_power(p: f64) -> Self {
        Self { name: format!("s ln^{p}(e/s)"), rule: PsiRule::LogPower(p) }
    }
    /// `ψ(s) = s^p`, `0 < p ≤ 1`.
    pub fn power(p: f64) -> Self {
        Self { name: format!("s^{p}"), rule: PsiRule::Power(p) }
    }
    /// Named presets: `psi:s`, `psi:llogl`, `psi:log2`, `psi:logp=<p>`, `psi:power=<p>`.
    pub fn preset(name: &str) -> Result<Self> {
        let body = name.strip_prefix("psi:").unwrap_or(name);
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number in {name}")));
        match body {
            "s" => Ok(Self::identity()),
            "llogl" => Ok(Self::psi0()),
            "log2" => Ok(Self::log_power(2.0)),
            _ => {
                if let Some(p) = body.strip_prefix("logp=") {
                    let p = num(p)?;
                    if p >= 0.0 {
                        return Ok(Self::log_power(p));
                    }
                } else if let Some(p) = body.strip_prefix("power=") {
                    let p = num(p)?;
                    if p > 0.0 && p <= 1.0 {
                        return Ok(Self::power(p));
                    }
                }
                Err(Error::InvalidInput(format!("unknown profile preset {name}")))
            }
        }
    }
    /// Piecewise linear interpolation of samples `(s_i, ψ_i)`, with `ψ(0) = 0`.
    pub fn from_grid(s: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if s.len() != v.len() || s.is_empty() {
            return Err(Error::InvalidInput("grid and values differ in length".into()));
        }
        let (mut s, mut v) = (s, v);
        if s[0] > 0.0 {
            s.insert(0, 0.0);
            v.insert(0, 0.0);
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("grid not increasing".into()));
        }
        let f = Self { name: "grid".into(), rule: PsiRule::Grid { s: s.clone(), v: v.clone() } };
        validate_quasiconcave(&s, &v)?;
        Ok(f)
    }
    /// Tabulated `Ψ` profile: `big_psi[i] = Ψ(e^{-tau[i]})`, log-linear in between,
    /// extended by the last slope of `ln Ψ` beyond the table.
    pub fn from_profile(name: &str, tau: Vec<f64>, big_psi: Vec<f64>) -> Result<Self> {
        if tau.len() != big_psi.len() || tau.len() < 2 || tau.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("profile table malformed".into()));
        }
        Ok(Self { name: name.into(), rule: PsiRule::Profile { tau, big_psi } })
    }
    /// Profile given as a function `τ ↦ Ψ(e^{−τ})`.
    pub fn from_profile_fn(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), rule: PsiRule::ProfileFn(Arc::new(f)) }
    }
    /// `Ψ₁(e^{−τ}) = Ψ(e^{−max(τ,a)})`: `Ψ` frozen at its value at `e^{−a}` on `[e^{−a}, 1]`.
    pub fn truncated(&self, a: f64) -> Self {
        if a <= 0.0 {
            return self.clone();
        }
        let inner = self.clone();
        Self::from_profile_fn(&format!("{} truncated at {a}", self.name), move |tau| inner.profile(tau.max(a)))
    }
    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), rule: PsiRule::Custom(Arc::new(f)) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn psi(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.rule {
            PsiRule::Psi0 => psi0(s),
            PsiRule::Identity => s,
            PsiRule::LogPower(p) => s * (1.0 - s.ln()).powf(*p),
            PsiRule::Power(p) => s.powf(*p),
            PsiRule::Grid { s: gs, v } => interp(gs, v, s),
            PsiRule::Profile { .. } | PsiRule::ProfileFn(_) => s * self.profile(-s.ln()),
            PsiRule::Custom(f) => f(s),
        }
    }

    /// `Ψ(s) = ψ(s)/s`.
    pub fn big_psi(&self, s: f64) -> f64 {
        match &self.rule {
            PsiRule::Profile { .. } | PsiRule::ProfileFn(_) => self.profile(-s.ln()),
            _ => self.psi(s) / s,
        }
    }

    /// `Ψ(e^{−τ})` for `τ ≥ 0`, evaluated without underflow for closed forms.
    pub fn profile(&self, tau: f64) -> f64 {
        match &self.rule {
            PsiRule::Psi0 => 1.0 + tau,
            PsiRule::Identity => 1.0,
            PsiRule::LogPower(p) => (1.0 + tau).powf(*p),
            PsiRule::Power(p) => ((1.0 - p) * tau).exp(),
            PsiRule::Profile { tau: ts, big_psi } => log_interp(ts, big_psi, tau),
            PsiRule::ProfileFn(f) => f(tau.max(0.0)),
            PsiRule::Grid { s: gs, v } => {
                let s = (-tau).exp();
                if s < gs[1] {
                    v[1] / gs[1]
                } else {
                    interp(gs, v, s) / s
                }
            }
            PsiRule::Custom(f) => {
                let s = (-tau).exp();
                if s > 0.0 {
                    f(s) / s
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// Checks the three quasiconcavity conditions on a grid of `[0,1]`.
    pub fn validate(&self, grid: &[f64]) -> Result<()> {
        let v: Vec<f64> = grid.iter().map(|&s| self.psi(s)).collect();
        validate_quasiconcave(grid, &v)
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x >= *xs.last().unwrap() {
        return *ys.last().unwrap();
    }
    let i = xs.partition_point(|&g| g <= x).max(1);
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn log_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    let i = if x >= xs[n - 1] { n - 1 } else { xs.partition_point(|&g| g <= x).max(1) };
    let (x0, x1) = (xs[i - 1], xs[i]);
    let (l0, l1) = (ys[i - 1].ln(), ys[i].ln());
    (l0 + (l1 - l0) * (x - x0) / (x1 - x0)).exp()
}

fn validate_quasiconcave(s: &[f64], v: &[f64]) -> Result<()> {
    for i in 0..s.len() {
        if s[i] == 0.0 {
            if v[i] != 0.0 {
                return Err(Error::NotQuasiconcave("ψ(0) ≠ 0".into()));
            }
            continue;
        }
        if !(v[i] > 0.0) {
            return Err(Error::NotQuasiconcave(format!("ψ({}) = {} is not positive", s[i], v[i])));
        }
        if i > 0 {
            if !tol::le(v[i - 1], v[i]) {
                return Err(Error::NotQuasiconcave(format!("ψ decreases near s = {}", s[i])));
            }
            if s[i - 1] > 0.0 && !tol::le(v[i] / s[i], v[i - 1] / s[i - 1]) {
                return Err(Error::NotQuasiconcave(format!("ψ(s)/s increases near s = {}", s[i])));
            }
        }
    }
    Ok(())
}

/// `∫₀^∞ ψ(N(t)) dt` as an exact step sum.
pub fn lorentz_norm(n: &DistributionFn, psi: &QuasiconcaveFn) -> f64 {
    n.segments().map(|(a, b, v)| psi.psi(v) * (b - a)).sum()
}

/// Which `u*` functional to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `‖u‖_{Λψ₀(I)} = ∫ψ₀(N_I(t))dt`.
    Lorentz,
    /// `⟨M(u·1_I)⟩_I`.
    Maximal,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lorentz" => Ok(Variant::Lorentz),
            "maximal" => Ok(Variant::Maximal),
            _ => Err(Error::InvalidInput(format!("unknown variant {s}"))),
        }
    }
}

/// `u*_I` in the requested variant.
pub fn u_star(model: &DyadicModel, w: &Weight, id: AtomId, variant: Variant) -> f64 {
    match variant {
        Variant::Lorentz => lorentz_norm(&distribution_fn(model, w, id), &QuasiconcaveFn::psi0()),
        Variant::Maximal => {
            let m = model.maximal_function(w, id);
            model.leaf_span(id).map(|p| m.values[p] * model.leaf_masses()[p]).sum::<f64>() / model.mass(id)
        }
    }
}

/// `u*_I` for every atom.
pub fn u_star_all(model: &DyadicModel, w: &Weight, variant: Variant) -> Vec<f64> {
    match variant {
        Variant::Maximal => model.maximal_averages(w),
        Variant::Lorentz => (0..model.len()).map(|i| lorentz_psi0_atom(model, w, i)).collect(),
    }
}

fn lorentz_psi0_atom(model: &DyadicModel, w: &Weight, id: AtomId) -> f64 {
    let r = model.leaf_span(id);
    let total = model.mass(id);
    let mut pairs: Vec<(f64, f64)> = r.map(|p| (w.values[p], model.leaf_masses()[p])).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut acc = 0.0;
    let mut out = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        if v <= 0.0 {
            break;
        }
        while i < pairs.len() && pairs[i].0 == v {
            acc += pairs[i].1;
            i += 1;
        }
        let next = if i < pairs.len() { pairs[i].0.max(0.0) } else { 0.0 };
        out += psi0((acc / total).min(1.0)) * (v - next);
    }
    out
}

/// Upper concave hull of samples `(s_i, ψ_i)` on `[0,1]` (with the origin added).
pub fn least_concave_majorant(s: &[f64], v: &[f64]) -> Result<QuasiconcaveFn> {
    if s.len() != v.len() || s.is_empty() {
        return Err(Error::InvalidInput("grid and values differ in length".into()));
    }
    validate_quasiconcave(s, v)?;
    let mut pts: Vec<(f64, f64)> = s.iter().copied().zip(v.iter().copied()).collect();
    if pts[0].0 > 0.0 {
        pts.insert(0, (0.0, 0.0));
    }
    let hull = upper_hull(&pts);
    let hs: Vec<f64> = hull.iter().map(|p| p.0).collect();
    let hv: Vec<f64> = hull.iter().map(|p| p.1).collect();
    let samples: Vec<f64> = pts.iter().map(|&(x, _)| interp(&hs, &hv, x)).collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut out = QuasiconcaveFn::from_grid(xs, samples)?;
    out.name = "least concave majorant".into();
    Ok(out)
}

/// Upper convex hull (monotone chain) of points sorted by abscissa.
pub fn upper_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut h: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(p);
    }
    h
}

/// Result of the midpoint concavity law for `u*(N) = ∫ψ₀(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityGap {
    /// `u*(N) − ½(u*(N₁)+u*(N₂))`.
    pub gap: f64,
    /// `½ u_Δ² / u` with `u_Δ = ∫|N₁ − N|`.
    pub bound: f64,
    /// `½ (Δu)² / u` with `Δu = u(N₁) − u(N)`.
    pub mass_bound: f64,
}

/// Checks `N = (N₁+N₂)/2` exactly, then evaluates both sides of the law.
pub fn concavity_gap(n: &DistributionFn, n1: &DistributionFn, n2: &DistributionFn) -> Result<ConcavityGap> {
    let bounds = merged_bounds(&[n, n1, n2]);
    for w in bounds.windows(2) {
        let t = w[0];
        let (a, b, c) = (n.eval(t), n1.eval(t), n2.eval(t));
        if (a - 0.5 * (b + c)).abs() > tol::REL_TOL * a.abs().max(b.abs()).max(c.abs()).max(1e-300) {
            return Err(Error::MidpointMismatch { t });
        }
    }
    let psi = QuasiconcaveFn::psi0();
    let u = mass_functional(n);
    let gap = lorentz_norm(n, &psi) - 0.5 * (lorentz_norm(n1, &psi) + lorentz_norm(n2, &psi));
    let u_delta: f64 = bounds.windows(2).map(|w| (n1.eval(w[0]) - n.eval(w[0])).abs() * (w[1] - w[0])).sum();
    let du = mass_functional(n1) - u;
    let (bound, mass_bound) = if u > 0.0 { (0.5 * u_delta * u_delta / u, 0.5 * du * du / u) } else { (0.0, 0.0) };
    Ok(ConcavityGap { gap, bound, mass_bound })
}

/// One row of the second-derivative law along `N_θ = N + θ(N₁ − N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondDerivativeRow {
    pub theta: f64,
    /// `∫ ΔN² / N_θ`, equal to `−d²u*(N_θ)/dθ²`.
    pub integral: f64,
    /// `u_Δ² / u_θ`.
    pub bound: f64,
}

pub fn second_derivative_check(n: &DistributionFn, n1: &DistributionFn, thetas: &[f64]) -> Result<Vec<SecondDerivativeRow>> {
    let bounds = merged_bounds(&[n, n1]);
    let segs: Vec<(f64, f64, f64)> = bounds
        .windows(2)
        .map(|w| (w[1] - w[0], n.eval(w[0]), n1.eval(w[0]) - n.eval(w[0])))
        .collect();
    let u_delta: f64 = segs.iter().map(|(len, _, d)| d.abs() * len).sum();
    thetas
        .iter()
        .map(|&theta| {
            let mut integral = 0.0;
            let mut u_theta = 0.0;
            for &(len, base, d) in &segs {
                let nt = base + theta * d;
                if nt < -tol::REL_TOL || nt > 1.0 + tol::REL_TOL {
                    return Err(Error::InvalidPath { theta });
                }
                u_theta += nt * len;
                if d != 0.0 {
                    integral += if nt > 0.0 { d * d / nt * len } else { f64::INFINITY };
                }
            }
            let bound = if u_theta > 0.0 { u_delta * u_delta / u_theta } else if u_delta > 0.0 { f64::INFINITY } else { 0.0 };
            Ok(SecondDerivativeRow { theta, integral, bound })
        })
        .collect()
}

/// `A₂` and Wilson `A∞` characteristics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Characteristics {
    /// `sup_I ⟨v⟩_I⟨u⟩_I`.
    pub a2: f64,
    pub a2_atom: AtomId,
    /// `sup_I ⟨M(1_I v)⟩_I / ⟨v⟩_I`.
    pub ainfty: f64,
    pub ainfty_atom: AtomId,
}

/// Joint `[u,v]_{A₂}` (with `u = v⁻¹` when `u` is absent) and `[v]_{A∞}`.
pub fn a2_and_wilson(model: &DyadicModel, v: &Weight, u: Option<&Weight>) -> Result<Characteristics> {
    let owned;
    let u = match u {
        Some(u) => u,
        None => {
            owned = v.recip()?;
            &owned
        }
    };
    let av = model.averages(v);
    let au = model.averages(u);
    let mv = model.maximal_averages(v);
    let mut c = Characteristics { a2: 0.0, a2_atom: 0, ainfty: 0.0, ainfty_atom: 0 };
    for i in 0..model.len() {
        let a2 = av[i] * au[i];
        if a2 > c.a2 {
            c.a2 = a2;
            c.a2_atom = i;
        }
        if av[i] > 0.0 {
            let r = mv[i] / av[i];
            if r > c.ainfty {
                c.ainfty = r;
                c.ainfty_atom = i;
            }
        }
    }
    Ok(c)
}

/// `[u]_{A∞}` in Wilson's form for any weight.
pub fn wilson_ainfty(model: &DyadicModel, w: &Weight) -> f64 {
    let a = model.averages(w);
    let m = model.maximal_averages(w);
    a.iter().zip(&m).filter(|(a, _)| **a > 0.0).map(|(a, m)| m / a).fold(0.0, f64::max)
}
