//! Continuum counterexamples on the real line: `u = 1_{[−1,1]}` with a weight
//! `v` for which interval bumps stay bounded while `‖T(1_{[−1,1]}u)‖_{L^p(v)}`
//! diverges for the Hilbert transform `Tf(x) = ∫ f(y)/(x−y) dy`.
//!
//! Integrals over `|x| ≥ 1` are taken in `s = ln|x|`, where the lower-bound
//! integrand `x^{−p}v(x) dx` becomes `Ψ(e^{−s})^{1−p} ds` and the exact one is
//! that density times `h(s)^p`, `h(s) = 2 atanh(e^{−s}) e^s`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bumps::integral::{improper_to, Bracket, Tail, DEFAULT_BLOCKS};
use crate::bumps::{Convention, PenaltyFn};
use crate::error::{Error, Result};
use crate::functionals::QuasiconcaveFn;

/// Offset `ε` of the exact-kernel integral `∫_{1+ε}^X`.
pub const KERNEL_EPS: f64 = 1e-6;
/// Default divergence threshold.
pub const DEFAULT_THRESHOLD: f64 = 1e3;
/// Default cutoffs `X`.
pub const DEFAULT_CUTOFFS: [f64; 4] = [1e3, 1e6, 1e9, 1e12];
/// Largest log-coordinate cutoff `ln X` used when searching for the threshold.
pub const MAX_LOG_CUTOFF: f64 = 1e300;
/// Dyadic scales `2^j` of the interval family.
pub const DEFAULT_SCALES: (i32, i32) = (-10, 40);

const PANEL_TOL: f64 = 1e-13;
const ACCEPT_REL_ERR: f64 = 1e-8;
const MAX_BISECTIONS: usize = 40;
const TAIL_S_MAX: f64 = 1e6;
const TOTAL_REL_GAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// `v = 1/ψ(1/|x|)` outside `[−1,1]`.
    FundamentalPsi,
    /// `v = |x| / (ln(e|x|) α(ln(e|x|)))` outside `[−1,1]`.
    EntropyAlpha,
    /// `v = max{1/ψ(1), 1/ψ(1/|x|)}^{p/p′}`.
    GeneralP,
}

/// The pair `u = 1_{[−1,1]}`, `v` even.
#[derive(Clone, Debug)]
pub struct ContinuumWeightPair {
    pub construction: Construction,
    pub psi: Option<QuasiconcaveFn>,
    pub alpha: Option<PenaltyFn>,
    pub beta: Option<PenaltyFn>,
    pub p: f64,
}

/// `T(1_{[−1,1]})(x) = ln|(x+1)/(x−1)|`.
pub fn hilbert_of_indicator(x: f64) -> Result<f64> {
    if (x.abs() - 1.0).abs() == 0.0 {
        return Err(Error::SingularPoint(x));
    }
    Ok(if x.abs() > 1.0 { 2.0 * (1.0 / x).atanh() } else { 2.0 * x.atanh() })
}

/// `h(s) = 2 atanh(e^{−s}) e^s = |x| T(1_{[−1,1]})(x)` at `|x| = e^s`.
pub fn kernel_ratio(s: f64) -> f64 {
    if s > 20.0 {
        let y2 = (-2.0 * s).exp();
        return 2.0 * (1.0 + y2 / 3.0 + y2 * y2 / 5.0);
    }
    let y = (-s).exp();
    let atanh = 0.5 * (y.ln_1p() - (-(-s).exp_m1()).ln());
    2.0 * atanh / y
}

impl ContinuumWeightPair {
    pub fn fundamental(psi: QuasiconcaveFn) -> Self {
        Self { construction: Construction::FundamentalPsi, psi: Some(psi), alpha: None, beta: None, p: 2.0 }
    }

    pub fn general_p(psi: QuasiconcaveFn, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidInput(format!("exponent {p} is not in (1, ∞)")));
        }
        Ok(Self { construction: Construction::GeneralP, psi: Some(psi), alpha: None, beta: None, p })
    }

    /// Validates `∫ dt/(tα) = ∞`, `tα` and `tβ` increasing and `e^t/(tα(t))` increasing.
    pub fn entropy(alpha: PenaltyFn, beta: PenaltyFn) -> Result<Self> {
        if !alpha.c_alpha(Convention::IntegralOnly).divergent {
            return Err(Error::HypothesisViolated(format!("∫dt/(tα(t)) converges for α = {}", alpha.name())));
        }
        alpha.validate().map_err(|e| Error::HypothesisViolated(e.to_string()))?;
        beta.validate().map_err(|e| Error::HypothesisViolated(e.to_string()))?;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=2000 {
            let t = 1.0 + i as f64 * 0.01 * (1.0 + i as f64);
            let g = t - t.ln() - alpha.alpha(t).ln();
            if g < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(Error::HypothesisViolated(format!("e^t/(tα(t)) decreases near t = {t}")));
            }
            prev = g;
        }
        Ok(Self { construction: Construction::EntropyAlpha, psi: None, alpha: Some(alpha), beta: Some(beta), p: 2.0 })
    }

    fn psi_fn(&self) -> &QuasiconcaveFn {
        self.psi.as_ref().expect("construction carries ψ")
    }

    fn alpha_fn(&self) -> &PenaltyFn {
        self.alpha.as_ref().expect("construction carries α")
    }

    pub fn u(&self, x: f64) -> f64 {
        if x.abs() <= 1.0 {
            1.0
        } else {
            0.0
        }
    }

    /// `v` as a function of `r = |x|`.
    pub fn v(&self, x: f64) -> f64 {
        let r = x.abs().max(1.0);
        match self.construction {
            Construction::EntropyAlpha => {
                let t = 1.0 + r.ln();
                r / (t * self.alpha_fn().alpha(t))
            }
            _ => {
                let psi = self.psi_fn();
                let inside = 1.0 / psi.psi(1.0);
                let outside = r / psi.profile(r.ln());
                inside.max(outside).powf(self.p - 1.0)
            }
        }
    }

    /// Density of `∫ x^{−p} v dx` in `s = ln x`.
    pub fn lower_density(&self, s: f64) -> f64 {
        match self.construction {
            Construction::EntropyAlpha => {
                let t = 1.0 + s;
                1.0 / (t * self.alpha_fn().alpha(t))
            }
            _ => {
                self.psi_fn().profile(s).powf(1.0 - self.p)
            }
        }
    }

    /// Density of `∫ |T(1_{[−1,1]})|^p v dx` in `s = ln x`.
    pub fn exact_density(&self, s: f64) -> f64 {
        kernel_ratio(s).powf(self.p) * self.lower_density(s)
    }
}

/// `∫_a^b f` by double-exponential panels on `[0,1], [1,2], [2,4], …`.
fn panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut cuts = vec![a];
    let mut edge = 1.0;
    while edge < b {
        if edge > a {
            cuts.push(edge);
        }
        edge *= 2.0;
    }
    cuts.push(b);
    cuts.windows(2).map(|w| panel(f, w[0], w[1], 0)).sum()
}

/// One double-exponential panel, bisected where the error estimate is too large.
fn panel(f: &dyn Fn(f64) -> f64, x0: f64, x1: f64, depth: usize) -> Result<f64> {
    let scale = f(x0).abs().max(f(0.5 * (x0 + x1)).abs()).max(f(x1).abs());
    let out = quadrature::integrate(f, x0, x1, PANEL_TOL * (x1 - x0) * scale.max(1e-300));
    if out.integral.is_finite() && out.error_estimate <= ACCEPT_REL_ERR * out.integral.abs() {
        return Ok(out.integral);
    }
    if depth >= MAX_BISECTIONS {
        return Err(Error::QuadratureFailure { a: x0, b: x1 });
    }
    let mid = 0.5 * (x0 + x1);
    Ok(panel(f, x0, mid, depth + 1)? + panel(f, mid, x1, depth + 1)?)
}

/// Both testing partials at one cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partial {
    /// `ln X`.
    pub log_cutoff: f64,
    /// `2∫₁^X x^{−p} v(x) dx`.
    pub lower: f64,
    /// `2∫_{1+ε}^X |T(1_{[−1,1]})|^p v dx`.
    pub exact: f64,
}

/// Partials at the cutoff `X`.
pub fn divergence_witness(pair: &ContinuumWeightPair, cutoff: f64) -> Result<Partial> {
    Ok(partials_log(pair, &[cutoff.ln()])?[0])
}

/// Partials at ascending log-coordinate cutoffs `ln X`, accumulated panel by panel.
pub fn partials_log(pair: &ContinuumWeightPair, log_cutoffs: &[f64]) -> Result<Vec<Partial>> {
    if log_cutoffs.windows(2).any(|w| !(w[1] > w[0])) || log_cutoffs.first().is_some_and(|&s| s <= 0.0) {
        return Err(Error::InvalidInput("cutoffs must increase and exceed 1".into()));
    }
    let lo = |s: f64| pair.lower_density(s);
    let ex = |s: f64| pair.exact_density(s);
    let start = KERNEL_EPS.ln_1p();
    let mut out = Vec::with_capacity(log_cutoffs.len());
    let (mut lower, mut exact, mut prev) = (0.0, 0.0, 0.0);
    for &s in log_cutoffs {
        lower += 2.0 * panels(&lo, prev, s)?;
        exact += 2.0 * panels(&ex, prev.max(start), s)?;
        prev = s;
        out.push(Partial { log_cutoff: s, lower, exact });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Divergent,
    Bounded,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCertificate {
    pub verdict: Verdict,
    pub partials: Vec<Partial>,
    pub strictly_increasing: bool,
    /// Bracket of `2∫₀^∞` of the lower density.
    pub total: Bracket,
    pub threshold: f64,
    /// Whether the lower partial reaches the threshold at the last default cutoff.
    pub threshold_at_last_cutoff: bool,
    /// Smallest `ln X = 2^k` at which the lower partial reaches the threshold.
    pub threshold_log_cutoff: Option<f64>,
    /// Smallest increment of the lower partial over `ln X → 2 ln X` past the cutoffs.
    pub min_doubling_increment: f64,
}

/// Partials at the cutoffs, the improper bracket and a log-coordinate threshold search.
pub fn certify_divergence(pair: &ContinuumWeightPair, cutoffs: &[f64], threshold: f64) -> Result<DivergenceCertificate> {
    let logs: Vec<f64> = cutoffs.iter().map(|x| x.ln()).collect();
    let partials = partials_log(pair, &logs)?;
    let strictly_increasing = partials.windows(2).all(|w| w[1].lower > w[0].lower && w[1].exact > w[0].exact)
        && partials.iter().all(|p| p.exact > p.lower);
    let k = |s: f64| pair.lower_density(s);
    let b = match pair.construction {
        Construction::EntropyAlpha => pair.alpha_fn().tail_integral(),
        _ => improper_to(&k, DEFAULT_BLOCKS, Tail::Extend { s_max: TAIL_S_MAX }, TOTAL_REL_GAP),
    };
    let total = Bracket { lower: 2.0 * b.lower, upper: 2.0 * b.upper, ..b };
    let mut threshold_log_cutoff = None;
    let mut min_doubling_increment = f64::INFINITY;
    let mut s = logs.last().copied().unwrap_or(1.0);
    let mut acc = partials.last().map_or(0.0, |p| p.lower);
    let mut prev = s;
    while s < MAX_LOG_CUTOFF && threshold_log_cutoff.is_none() {
        s = (2.0 * s).min(MAX_LOG_CUTOFF);
        let inc = 2.0 * panels(&k, prev, s)?;
        min_doubling_increment = min_doubling_increment.min(inc);
        acc += inc;
        prev = s;
        if acc >= threshold {
            threshold_log_cutoff = Some(s);
        }
        if total.upper.is_finite() && acc < threshold && total.upper < threshold {
            break;
        }
    }
    let threshold_at_last_cutoff = partials.last().is_some_and(|p| p.lower >= threshold);
    let verdict = if total.divergent && strictly_increasing {
        Verdict::Divergent
    } else if !total.divergent && total.upper.is_finite() {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    };
    Ok(DivergenceCertificate {
        verdict,
        partials,
        strictly_increasing,
        total,
        threshold,
        threshold_at_last_cutoff,
        threshold_log_cutoff,
        min_doubling_increment,
    })
}

/// Supremum of the bump product over the interval family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpUniformity {
    pub b_observed: f64,
    pub worst: (f64, f64),
    pub intervals: usize,
}

/// Intervals of length `2^j` centered on the grid `2^{j−3}ℤ` that meet `[−1,1]`;
/// by symmetry only centers `c ≥ 0` are used.
pub fn interval_family(scales: (i32, i32)) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for j in scales.0..=scales.1 {
        let len = 2f64.powi(j);
        let step = 2f64.powi(j - 3);
        let kmax = ((1.0 + 0.5 * len) / step).floor() as i64;
        for k in 0..=kmax {
            let c = k as f64 * step;
            let (a, b) = (c - 0.5 * len, c + 0.5 * len);
            if a <= 1.0 && b >= -1.0 {
                out.push((a, b));
            }
        }
    }
    out
}

/// `|I ∩ [−1,1]| / |I|`.
fn overlap(a: f64, b: f64) -> f64 {
    ((b.min(1.0) - a.max(-1.0)).max(0.0)) / (b - a)
}

/// `∫₀¹ v♯(s) w(s) ds` over `I = [a, b]` for `v` even and nondecreasing in `|x|`.
fn rearranged(pair: &ContinuumWeightPair, a: f64, b: f64, w: &dyn Fn(f64) -> f64) -> Result<f64> {
    let len = b - a;
    let (m, big) = if a >= 0.0 {
        (a, b)
    } else if b <= 0.0 {
        (-b, -a)
    } else {
        (a.abs().min(b), a.abs().max(b))
    };
    let straddles = a < 0.0 && b > 0.0;
    let one_sided = if straddles { (big - m) / len } else { 1.0 };
    let r = move |s: f64| {
        if s <= one_sided {
            big - s * len
        } else {
            m - (s * len - (big - m)) / 2.0
        }
    };
    let mut cuts = vec![0.0, one_sided.clamp(0.0, 1.0), 1.0];
    let lo_r = if straddles { 0.0 } else { m };
    if big > 1.0 && lo_r < 1.0 {
        let s1 = if big - len * one_sided <= 1.0 { (big - 1.0) / len } else { one_sided + (m - 1.0) * 2.0 / len };
        cuts.push(s1.clamp(0.0, 1.0));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let f = |s: f64| pair.v(r(s)) * w(s);
    let mut total = 0.0;
    for c in cuts.windows(2) {
        if c[1] > c[0] {
            let out = quadrature::integrate(&f, c[0], c[1], 1e-12 * pair.v(big));
            if !out.integral.is_finite() {
                return Err(Error::QuadratureFailure { a: c[0], b: c[1] });
            }
            total += out.integral;
        }
    }
    Ok(total)
}

fn bump_product(pair: &ContinuumWeightPair, a: f64, b: f64) -> Result<f64> {
    let theta = overlap(a, b);
    if theta == 0.0 {
        return Ok(0.0);
    }
    let sup_v = pair.v(a.abs().max(b.abs()));
    match pair.construction {
        Construction::FundamentalPsi => Ok(pair.psi_fn().psi(theta) * sup_v),
        Construction::GeneralP => {
            let q = pair.p / (pair.p - 1.0);
            Ok(pair.psi_fn().psi(theta).powf(1.0 / q) * sup_v.powf(1.0 / pair.p))
        }
        Construction::EntropyAlpha => {
            let alpha = pair.alpha_fn();
            let beta = pair.beta.as_ref().expect("entropy pair carries β");
            let ratio_u = 1.0 - theta.ln();
            let u_star = theta * ratio_u;
            let v_avg = rearranged(pair, a, b, &|_| 1.0)?;
            let v_star = rearranged(pair, a, b, &|s: f64| -s.ln())?;
            let ratio_v = (v_star / v_avg).max(1.0);
            Ok(alpha.alpha(ratio_u) * u_star * v_star * beta.alpha(ratio_v))
        }
    }
}

/// Bump supremum over [`interval_family`].
pub fn bump_uniformity(pair: &ContinuumWeightPair, scales: (i32, i32)) -> Result<BumpUniformity> {
    let family = interval_family(scales);
    let mut best = BumpUniformity { b_observed: 0.0, worst: (0.0, 0.0), intervals: family.len() };
    for &(a, b) in &family {
        let p = bump_product(pair, a, b)?;
        if p > best.b_observed {
            best.b_observed = p;
            best.worst = (a, b);
        }
    }
    Ok(best)
}

/// Relative change of the bump supremum when one more dyadic scale is added.
pub fn bump_stability(pair: &ContinuumWeightPair, scales: (i32, i32)) -> Result<(BumpUniformity, BumpUniformity, f64)> {
    let base = bump_uniformity(pair, scales)?;
    let wider = bump_uniformity(pair, (scales.0, scales.1 + 1))?;
    let change = (wider.b_observed - base.b_observed).abs() / base.b_observed;
    Ok((base, wider, change))
}

/// Largest `v(x)/v(2x)` on a log grid of `[1/4, 10^{12}]`.
pub fn doubling_ratio(pair: &ContinuumWeightPair) -> f64 {
    (0..=600)
        .map(|i| {
            let x = 0.25 * 10f64.powf(i as f64 * 0.022);
            pair.v(x) / pair.v(2.0 * x)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub alpha: String,
    pub beta: String,
    pub bump: BumpUniformity,
    pub bump_change: f64,
    pub doubling: f64,
    pub increasing: bool,
    pub divergence: DivergenceCertificate,
}

/// The entropy construction for a non-integrable `α`.
pub fn entropy_sharpness(alpha: PenaltyFn, beta: PenaltyFn, cutoffs: &[f64], threshold: f64) -> Result<EntropyReport> {
    let names = (alpha.name().to_string(), beta.name().to_string());
    let pair = ContinuumWeightPair::entropy(alpha, beta)?;
    let (bump, _, bump_change) = bump_stability(&pair, DEFAULT_SCALES)?;
    let increasing = (0..=600).all(|i| {
        let x = 10f64.powf(i as f64 * 0.02);
        pair.v(1.05 * x) >= pair.v(x)
    });
    Ok(EntropyReport {
        alpha: names.0,
        beta: names.1,
        bump,
        bump_change,
        doubling: doubling_ratio(&pair),
        increasing,
        divergence: certify_divergence(&pair, cutoffs, threshold)?,
    })
}

/// CSV of `(X, ln X, 2 ln X, lower, exact, bump)` rows.
pub fn partials_csv(partials: &[Partial], bump: Option<f64>) -> String {
    let mut out = String::from("x,log_x,two_log_x,lower_partial,exact_partial,bump_sup\n");
    for p in partials {
        let b = bump.map_or(String::new(), |b| format!("{b:.12e}"));
        let s = p.log_cutoff;
        let _ = writeln!(out, "{:.12e},{s:.12e},{:.12e},{:.12e},{:.12e},{b}", s.exp(), 2.0 * s, p.lower, p.exact);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_closed_form() {
        assert!((hilbert_of_indicator(2.0).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((hilbert_of_indicator(3.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let x = 1e6;
        assert!((hilbert_of_indicator(x).unwrap() * x / 2.0 - 1.0).abs() < 1e-9);
        assert!(matches!(hilbert_of_indicator(-1.0), Err(Error::SingularPoint(_))));
        for i in 1..=800 {
            let x = 1.0 + 10f64.powf(-6.0 + i as f64 * 0.0175);
            assert!(hilbert_of_indicator(x).unwrap() >= 1.0 / x);
        }
    }

    #[test]
    fn kernel_ratio_matches_hilbert() {
        for &x in &[1.5, 2.0, 10.0, 1e4, 1e9] {
            let s: f64 = f64::ln(x);
            assert!((kernel_ratio(s) - x * hilbert_of_indicator(x).unwrap()).abs() < 1e-9 * kernel_ratio(s));
        }
    }

    #[test]
    fn identity_partial_is_two_log() {
        let pair = ContinuumWeightPair::fundamental(QuasiconcaveFn::identity());
        let p = divergence_witness(&pair, std::f64::consts::E).unwrap();
        assert!((p.lower - 2.0).abs() < 1e-12);
        assert!(p.exact > p.lower);
    }

    #[test]
    fn llogl_partials() {
        let pair = ContinuumWeightPair::fundamental(QuasiconcaveFn::psi0());
        let ps = partials_log(&pair, &[1e3f64.ln(), 1e6f64.ln()]).unwrap();
        for p in &ps {
            assert!((p.lower - 2.0 * (1.0 + p.log_cutoff).ln()).abs() < 1e-9);
        }
        assert!(ps[1].lower > ps[0].lower);
    }

    #[test]
    fn interval_products() {
        let pair = ContinuumWeightPair::fundamental(QuasiconcaveFn::identity());
        assert_eq!(bump_product(&pair, 2.0, 3.0).unwrap(), 0.0);
        assert!((bump_product(&pair, -4.0, 4.0).unwrap() - 1.0).abs() < 1e-15);
        let near = bump_product(&pair, 0.5, 1.5).unwrap();
        assert!(near <= 1.0 / QuasiconcaveFn::identity().psi(1.0 / 3.0));
    }

    #[test]
    fn entropy_rejects_integrable() {
        let r = ContinuumWeightPair::entropy(PenaltyFn::identity(), PenaltyFn::identity());
        assert!(matches!(r, Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn rearrangement_average() {
        let pair = ContinuumWeightPair::entropy(PenaltyFn::constant(1.0), PenaltyFn::identity()).unwrap();
        let v = |x: f64| pair.v(x);
        let (a, b) = (-2.0, 5.0);
        let direct = quadrature::integrate(v, a, -1.0, 1e-12).integral
            + 2.0 * v(1.0)
            + quadrature::integrate(v, 1.0, b, 1e-12).integral;
        let r = rearranged(&pair, a, b, &|_| 1.0).unwrap() * (b - a);
        assert!((r - direct).abs() < 1e-9 * direct);
    }
}
