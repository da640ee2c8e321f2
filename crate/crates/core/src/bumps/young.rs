//! Young functions `Φ` with derivative access, evaluated in logarithmic
//! coordinates `λ = ln t` so that parametric tables can reach huge `t`.

use std::fmt;
use std::sync::Arc;

use super::integral::{improper_to, Bracket, Tail, DEFAULT_BLOCKS};

const TAIL_REL_GAP: f64 = 1e-3;
use crate::error::{Error, Result};

const E_E: f64 = 15.154262241479262;
const DIRECT_LIMIT: f64 = 600.0;
const CROSSING_GRID: (f64, f64, usize) = (-30.0, 700.0, 7300);

fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Clone)]
enum Rule {
    Power(f64),
    TLog2,
    LogLog(f64),
    Min(Arc<MinData>),
    Custom { phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>, dphi: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

struct MinData {
    a: YoungFn,
    b: YoungFn,
    /// Points where the smaller derivative switches, ascending.
    breaks: Vec<f64>,
    /// Whether `a` carries the smaller derivative before the first break.
    first_a: bool,
    /// `Φ` at each break.
    offsets: Vec<f64>,
}

impl MinData {
    fn active(&self, j: usize) -> &YoungFn {
        if (j % 2 == 0) == self.first_a {
            &self.a
        } else {
            &self.b
        }
    }
    fn segment(&self, t: f64) -> usize {
        self.breaks.partition_point(|&c| c <= t)
    }
}

/// Convex increasing `Φ` with `Φ(0) = 0`.
#[derive(Clone)]
pub struct YoungFn {
    name: String,
    rule: Rule,
}

impl fmt::Debug for YoungFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "YoungFn({})", self.name)
    }
}

impl YoungFn {
    /// `Φ(t) = t^p`, `p ≥ 1`.
    pub fn power(p: f64) -> Self {
        Self { name: format!("t^{p}"), rule: Rule::Power(p) }
    }
    /// `Φ(t) = t`.
    pub fn linear() -> Self {
        Self { name: "t".into(), rule: Rule::Power(1.0) }
    }
    /// `Φ(t) = t ln²(e+t)`.
    pub fn tlog2() -> Self {
        Self { name: "t ln^2(e+t)".into(), rule: Rule::TLog2 }
    }
    /// `Φ(t) = t L (ln L)^{1+ε}` with `L = ln(e^e + t)`.
    pub fn loglog(eps: f64) -> Self {
        Self { name: format!("t ln t (ln ln t)^(1+{eps})"), rule: Rule::LogLog(eps) }
    }
    /// User-supplied `Φ` and `Φ'`, validated for convexity.
    pub fn custom(
        name: &str,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let out = Self { name: name.into(), rule: Rule::Custom { phi: Arc::new(phi), dphi: Arc::new(dphi) } };
        out.validate()?;
        Ok(out)
    }

    /// Parses `young:t`, `young:t2`, `young:power=<p>`, `young:tln2`, `young:loglog:eps=<ε>`.
    pub fn preset(name: &str) -> Result<Self> {
        let body = name.strip_prefix("young:").unwrap_or(name);
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number in {name}")));
        match body {
            "t" => Ok(Self::linear()),
            "t2" => Ok(Self::power(2.0)),
            "tln2" => Ok(Self::tlog2()),
            "loglog" => Ok(Self::loglog(1.0)),
            _ => {
                if let Some(p) = body.strip_prefix("power=") {
                    Ok(Self::power(num(p)?))
                } else if let Some(e) = body.strip_prefix("loglog:eps=") {
                    Ok(Self::loglog(num(e)?))
                } else {
                    Err(Error::InvalidInput(format!("unknown Young preset {name}")))
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `ln Φ(e^λ)`.
    pub fn ln_phi(&self, lambda: f64) -> f64 {
        match &self.rule {
            Rule::Power(p) => p * lambda,
            Rule::TLog2 => lambda + 2.0 * logaddexp(1.0, lambda).ln(),
            Rule::LogLog(eps) => {
                let l = logaddexp(E_E.ln(), lambda);
                lambda + l.ln() + (1.0 + eps) * l.ln().ln()
            }
            Rule::Min(m) => {
                if lambda < DIRECT_LIMIT {
                    let v = self.phi(lambda.exp());
                    if v.is_finite() {
                        return v.ln();
                    }
                }
                let j = m.breaks.len();
                let act = m.active(j);
                let base = act.ln_phi(lambda);
                let shift = match m.breaks.last() {
                    Some(&c) => m.offsets[j - 1] - act.phi(c),
                    None => 0.0,
                };
                base + (shift * (-base).exp()).ln_1p()
            }
            Rule::Custom { phi, .. } => phi(lambda.exp()).ln(),
        }
    }

    /// `ln(Φ(e^λ)/e^λ)`, free of cancellation for huge `λ` on closed forms.
    pub fn ln_phi_over_t(&self, lambda: f64) -> f64 {
        match &self.rule {
            Rule::Power(p) => (p - 1.0) * lambda,
            Rule::TLog2 => 2.0 * logaddexp(1.0, lambda).ln(),
            Rule::LogLog(eps) => {
                let l = logaddexp(E_E.ln(), lambda);
                l.ln() + (1.0 + eps) * l.ln().ln()
            }
            Rule::Min(m) if lambda >= DIRECT_LIMIT => {
                let j = m.breaks.len();
                let act = m.active(j);
                let shift = match m.breaks.last() {
                    Some(&c) => m.offsets[j - 1] - act.phi(c),
                    None => 0.0,
                };
                act.ln_phi_over_t(lambda) + (shift * (-act.ln_phi(lambda)).exp()).ln_1p()
            }
            _ => self.ln_phi(lambda) - lambda,
        }
    }

    /// `ln Φ'(e^λ)`.
    pub fn ln_dphi(&self, lambda: f64) -> f64 {
        match &self.rule {
            Rule::Power(p) => p.ln() + (p - 1.0) * lambda,
            Rule::TLog2 => {
                let l = logaddexp(1.0, lambda);
                l.ln() + (l + 2.0 * sigmoid(lambda - 1.0)).ln()
            }
            Rule::LogLog(eps) => {
                let l = logaddexp(E_E.ln(), lambda);
                let ll = l.ln();
                let w = sigmoid(lambda - E_E.ln());
                eps * ll.ln() + (l * ll + w * (ll + 1.0 + eps)).ln()
            }
            Rule::Min(m) => {
                let t = lambda.exp();
                let j = if t.is_finite() { m.segment(t) } else { m.breaks.len() };
                m.active(j).ln_dphi(lambda)
            }
            Rule::Custom { dphi, .. } => dphi(lambda.exp()).ln(),
        }
    }

    /// `Φ(t)`.
    pub fn phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.rule {
            Rule::Power(p) => t.powf(*p),
            Rule::TLog2 => t * (std::f64::consts::E + t).ln().powi(2),
            Rule::Min(m) => {
                let j = m.segment(t);
                let act = m.active(j);
                if j == 0 {
                    act.phi(t)
                } else {
                    m.offsets[j - 1] + act.phi(t) - act.phi(m.breaks[j - 1])
                }
            }
            Rule::Custom { phi, .. } => phi(t),
            _ => self.ln_phi(t.ln()).exp(),
        }
    }

    /// `Φ'(t)`.
    pub fn dphi(&self, t: f64) -> f64 {
        match &self.rule {
            Rule::Custom { dphi, .. } => dphi(t.max(0.0)),
            Rule::Power(p) if *p == 1.0 => 1.0,
            _ if t <= 0.0 => self.ln_dphi(-745.0).exp(),
            _ => self.ln_dphi(t.ln()).exp(),
        }
    }

    /// Checks `Φ(0) = 0`, `Φ'` nondecreasing and `Φ(t) ≤ tΦ'(t)` on a log grid.
    pub fn validate(&self) -> Result<()> {
        if self.phi(0.0) != 0.0 {
            return Err(Error::NonconvexYoung(0.0));
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=800 {
            let lambda = -20.0 + i as f64 * 0.05;
            let d = self.ln_dphi(lambda);
            if d.is_nan() || d < prev - 1e-10 * prev.abs().max(1.0) {
                return Err(Error::NonconvexYoung(lambda.exp()));
            }
            prev = d;
            if self.ln_phi(lambda) > lambda + d + 1e-10 * d.abs().max(1.0) {
                return Err(Error::NonconvexYoung(lambda.exp()));
            }
        }
        Ok(())
    }

    /// Largest observed `Φ(2t)/Φ(t)` over `t ∈ [e^{-10}, e^{40}]`.
    pub fn doubling_constant(&self) -> f64 {
        let l2 = std::f64::consts::LN_2;
        (0..=1000)
            .map(|i| {
                let lambda = -10.0 + i as f64 * 0.05;
                (self.ln_phi(lambda + l2) - self.ln_phi(lambda)).exp()
            })
            .fold(0.0, f64::max)
    }

    /// Bracket of `∫₁^∞ dt/Φ(t)`.
    pub fn tail(&self) -> Bracket {
        let k = |s: f64| (s - self.ln_phi(s)).exp();
        improper_to(&k, DEFAULT_BLOCKS, Tail::Extend { s_max: 1e6 }, TAIL_REL_GAP)
    }

    /// `∫₀ᵗ min(Φ₁', Φ₂')` in closed form between the crossing points of the derivatives.
    pub fn min_of(a: &YoungFn, b: &YoungFn) -> YoungFn {
        let (lo, hi, n) = CROSSING_GRID;
        let diff = |l: f64| a.ln_dphi(l) - b.ln_dphi(l);
        let step = (hi - lo) / n as f64;
        let mut breaks = Vec::new();
        let d0 = diff(lo);
        let first_a = d0 <= 0.0;
        let mut prev = (lo, d0);
        for i in 1..=n {
            let l = lo + i as f64 * step;
            let d = diff(l);
            if (d > 0.0) != (prev.1 > 0.0) && d != 0.0 && prev.1 != 0.0 {
                let (mut x0, mut x1) = (prev.0, l);
                for _ in 0..100 {
                    let mid = 0.5 * (x0 + x1);
                    if (diff(mid) > 0.0) == (prev.1 > 0.0) {
                        x0 = mid;
                    } else {
                        x1 = mid;
                    }
                }
                breaks.push((0.5 * (x0 + x1)).exp());
            }
            if d != 0.0 {
                prev = (l, d);
            }
        }
        let mut data = MinData { a: a.clone(), b: b.clone(), breaks, first_a, offsets: Vec::new() };
        let mut acc = 0.0;
        let mut last = 0.0;
        for j in 0..data.breaks.len() {
            let c = data.breaks[j];
            let act = data.active(j);
            acc += act.phi(c) - act.phi(last);
            data.offsets.push(acc);
            last = c;
        }
        let name = format!("min({}, {})", a.name, b.name);
        YoungFn { name, rule: Rule::Min(Arc::new(data)) }
    }

    /// Crossing points of the derivatives for a `min_of` function.
    pub fn breaks(&self) -> &[f64] {
        match &self.rule {
            Rule::Min(m) => &m.breaks,
            _ => &[],
        }
    }
}
