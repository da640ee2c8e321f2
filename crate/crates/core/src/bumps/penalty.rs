//! Penalty functions `α` on `[1,∞)` and the constant `C_α`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::integral::{improper, log_block, Bracket, Tail, DEFAULT_BLOCKS};
use crate::error::{Error, Result};
use crate::functionals::QuasiconcaveFn;

/// Upper end of the `s = ln t` range explored for tails without a closed form.
const LOG_TAIL_END: f64 = 1e6;
/// Same, for profile-based rules that exponentiate `s`.
const PROFILE_TAIL_END: f64 = 700.0;
const PROFILE_TAIL_CELLS: usize = 1 << 16;

/// Which form of `C_α` a theorem uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `1/α(1) + ∫₁^∞ dt/(tα(t))`.
    With1OverAlpha1,
    /// `∫₁^∞ dt/(tα(t))`.
    IntegralOnly,
}

/// Bracketed value of `C_α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CAlpha {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub tail_exact: bool,
    pub divergent: bool,
}

impl CAlpha {
    fn from_bracket(b: Bracket, offset: f64) -> Self {
        Self {
            value: b.value() + offset,
            lower: b.lower + offset,
            upper: b.upper + offset,
            tail_exact: b.tail_exact,
            divergent: b.divergent,
        }
    }
    pub fn is_finite(&self) -> bool {
        !self.divergent
    }
}

#[derive(Clone)]
enum Rule {
    Identity,
    LogPower(f64),
    Constant(f64),
    Capped(f64),
    Profile(QuasiconcaveFn),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Penalty `α`, stored with a positive multiplicative factor.
#[derive(Clone)]
pub struct PenaltyFn {
    name: String,
    rule: Rule,
    factor: f64,
    cache: Arc<OnceLock<Bracket>>,
}

impl fmt::Debug for PenaltyFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PenaltyFn({}, factor {})", self.name, self.factor)
    }
}

impl PenaltyFn {
    fn with_rule(name: String, rule: Rule) -> Self {
        Self { name, rule, factor: 1.0, cache: Arc::new(OnceLock::new()) }
    }
    /// `α(t) = t`.
    pub fn identity() -> Self {
        Self::with_rule("t".into(), Rule::Identity)
    }
    /// `α(t) = ln^p(et)`.
    pub fn log_power(p: f64) -> Self {
        Self::with_rule(format!("ln^{p}(et)"), Rule::LogPower(p))
    }
    /// `α ≡ c`.
    pub fn constant(c: f64) -> Self {
        Self::with_rule(format!("const {c}"), Rule::Constant(c))
    }
    /// `tα(t) = L` on `[1, L]` and `α = ∞` beyond, so that `C_α = 1`.
    pub fn capped(level: f64) -> Self {
        Self::with_rule(format!("capped {level}"), Rule::Capped(level.max(1.0)))
    }
    /// `α(t) = Ψ(e·e^{−t})/t` from a quasiconcave `ψ = sΨ`.
    pub fn from_profile(psi: QuasiconcaveFn) -> Self {
        Self::with_rule(format!("profile {}", psi.name()), Rule::Profile(psi))
    }
    /// Rule given in logarithmic coordinates: `alpha_log(s) = α(e^s)`.
    pub fn custom_log(name: &str, alpha_log: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::with_rule(name.into(), Rule::Custom(Arc::new(alpha_log)))
    }

    /// Parses `alpha:t`, `alpha:log2`, `alpha:log`, `alpha:logp=<p>`, `alpha:const`,
    /// `alpha:const=<c>`.
    pub fn preset(name: &str) -> Result<Self> {
        let body = name.strip_prefix("alpha:").unwrap_or(name);
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number in {name}")));
        match body {
            "t" => Ok(Self::identity()),
            "log" => Ok(Self::log_power(1.0)),
            "log2" => Ok(Self::log_power(2.0)),
            "const" => Ok(Self::constant(1.0)),
            _ => {
                if let Some(p) = body.strip_prefix("logp=") {
                    Ok(Self::log_power(num(p)?))
                } else if let Some(c) = body.strip_prefix("const=") {
                    Ok(Self::constant(num(c)?))
                } else {
                    Err(Error::InvalidInput(format!("unknown penalty preset {name}")))
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// `λ·α`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.factor *= lambda;
        out.cache = Arc::new(OnceLock::new());
        out
    }

    /// The rescaling with `C_α = 1` in the given convention.
    pub fn normalized(&self, conv: Convention) -> Result<Self> {
        let c = self.c_alpha(conv);
        if c.divergent {
            return Err(Error::DivergentPenalty);
        }
        Ok(self.scaled(c.upper))
    }

    /// `α(e^s)` for `s ≥ 0`.
    pub fn alpha_log(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        let raw = match &self.rule {
            Rule::Identity => s.exp(),
            Rule::LogPower(p) => (1.0 + s).powf(*p),
            Rule::Constant(c) => *c,
            Rule::Capped(l) => {
                if s <= l.ln() {
                    l * (-s).exp()
                } else {
                    f64::INFINITY
                }
            }
            Rule::Profile(psi) => psi.profile(s.exp() - 1.0) * (-s).exp(),
            Rule::Custom(f) => f(s),
        };
        self.factor * raw
    }

    /// `α(t)`, with arguments below 1 clamped to 1.
    pub fn alpha(&self, t: f64) -> f64 {
        self.alpha_log(t.max(1.0).ln())
    }

    fn closed_tail(&self) -> Option<Box<dyn Fn(f64) -> f64 + '_>> {
        let c = self.factor;
        match &self.rule {
            Rule::Identity => Some(Box::new(move |s: f64| (-s).exp() / c)),
            Rule::LogPower(p) => {
                let p = *p;
                Some(Box::new(move |s: f64| {
                    if p <= 1.0 {
                        f64::INFINITY
                    } else {
                        (1.0 + s).powf(1.0 - p) / ((p - 1.0) * c)
                    }
                }))
            }
            Rule::Constant(_) => Some(Box::new(|_| f64::INFINITY)),
            Rule::Capped(l) => {
                let l = *l;
                Some(Box::new(move |s: f64| ((l - s.exp()) / l).max(0.0) / c))
            }
            _ => None,
        }
    }

    /// `∫₁^∞ dt/(tα(t))` in closed form, for the rules where it is finite and elementary.
    fn closed_total(&self) -> Option<f64> {
        let c = self.factor;
        match &self.rule {
            Rule::Identity => Some(1.0 / c),
            Rule::LogPower(p) if *p > 1.0 => Some(1.0 / ((p - 1.0) * c)),
            Rule::Capped(l) => Some((l - 1.0) / (l * c)),
            _ => None,
        }
    }

    /// Bracket of `∫₁^∞ dt/(tα(t))`.
    pub fn tail_integral(&self) -> Bracket {
        *self.cache.get_or_init(|| {
            if let Some(v) = self.closed_total() {
                return Bracket { lower: v, upper: v, tail_exact: true, divergent: false };
            }
            let k = |s: f64| 1.0 / self.alpha_log(s);
            match self.closed_tail() {
                Some(f) => improper(&k, DEFAULT_BLOCKS, Tail::Closed(&*f)),
                None => match self.rule {
                    Rule::Profile(_) => {
                        let tail = |s: f64| log_block(&k, s, PROFILE_TAIL_END, PROFILE_TAIL_CELLS);
                        improper(&k, DEFAULT_BLOCKS, Tail::Bounds(&tail))
                    }
                    _ => improper(&k, DEFAULT_BLOCKS, Tail::Extend { s_max: LOG_TAIL_END }),
                },
            }
        })
    }

    pub fn c_alpha(&self, conv: Convention) -> CAlpha {
        let offset = match conv {
            Convention::With1OverAlpha1 => 1.0 / self.alpha_log(0.0),
            Convention::IntegralOnly => 0.0,
        };
        CAlpha::from_bracket(self.tail_integral(), offset)
    }

    /// Checks `α > 0` and `t ↦ tα(t)` increasing on a log grid of `[1, 2^60]`.
    pub fn validate(&self) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=600 {
            let s = i as f64 * 0.1 * std::f64::consts::LN_2;
            let a = self.alpha_log(s);
            if !(a > 0.0) {
                return Err(Error::InvalidPenalty(format!("α(e^{s}) = {a} is not positive")));
            }
            let lt = s + a.ln();
            if lt < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(Error::InvalidPenalty(format!("tα(t) decreases near t = e^{s}")));
            }
            prev = lt;
        }
        Ok(())
    }

    /// Whether `α` itself is nondecreasing on the grid.
    pub fn is_increasing(&self) -> bool {
        let mut prev = 0.0;
        for i in 0..=600 {
            let a = self.alpha_log(i as f64 * 0.1 * std::f64::consts::LN_2);
            if a < prev * (1.0 - 1e-12) {
                return false;
            }
            prev = a;
        }
        true
    }

    /// `(Σ_{k=1}^{K} 1/α(2^k), 2∫₁^{2^K} dt/(tα(t)))` with the integral bounded from below.
    pub fn riemann_check(&self, k_max: usize) -> (f64, f64) {
        let sum: f64 = (1..=k_max).map(|k| 1.0 / self.alpha_log(k as f64 * std::f64::consts::LN_2)).sum();
        let k = |s: f64| 1.0 / self.alpha_log(s);
        let zero = |_: f64| 0.0;
        let b = improper(&k, k_max, Tail::Closed(&zero));
        (sum, 2.0 * b.lower)
    }
}
