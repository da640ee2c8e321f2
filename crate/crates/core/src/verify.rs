//! Theorem registry, seeded sweeps, deterministic reports and counterexample
//! minimization by delta debugging over tree shape and leaf values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bellman::{build_m, check_conv02, embedding_sum_carleson, embedding_sum_haar_with, BellmanB, StepFn};
use crate::bumps::orlicz::{PsiPenalty, YoungPenalty};
use crate::bumps::{alpha_from_psi, alpha_from_young, bump_supremum, BumpMode, Convention, PenaltyFn, YoungFn};
use crate::error::{Error, Result};
use crate::functionals::{concavity_gap, DistributionFn, QuasiconcaveFn, Variant};
use crate::model::{AtomId, AtomRecord, CarlesonSequence, DyadicModel, Plan, SparseFamily, Weight};
use crate::operators::{dense_norm, weighted_norm, Block, BlockNorm, OperatorRecord, OperatorSpec, SymbolEntry, DENSE_LIMIT};
use crate::random::{
    random_carleson, random_distribution, random_midpoint_pair, random_model, random_paraproduct, random_shift, random_sparse,
    random_weight, trial_rng, ModelLaw, WeightLaw,
};
use crate::stopping::{one_sided_verify, one_weight_bounds, sawyer_constant, sawyer_k, PieceReport, DEFAULT_CAP};

/// Failures whose relative excess stays below this are reported as tolerance artifacts.
pub const ARTIFACT_BAND: f64 = 1e-6;
/// Evaluation budget of the minimizer.
pub const MINIMIZE_BUDGET: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TheoremId {
    EmbedCarleson,
    EmbedHaar,
    Lerner2Sided,
    Shift2Sided,
    Para2Sided,
    OneSided,
    SawyerK,
    BellmanM,
    ConvGap,
    OrliczEntropy,
    OneWeight,
}

impl TheoremId {
    pub const ALL: [TheoremId; 11] = [
        TheoremId::EmbedCarleson,
        TheoremId::EmbedHaar,
        TheoremId::Lerner2Sided,
        TheoremId::Shift2Sided,
        TheoremId::Para2Sided,
        TheoremId::OneSided,
        TheoremId::SawyerK,
        TheoremId::BellmanM,
        TheoremId::ConvGap,
        TheoremId::OrliczEntropy,
        TheoremId::OneWeight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::EmbedCarleson => "embed-carleson",
            TheoremId::EmbedHaar => "embed-haar",
            TheoremId::Lerner2Sided => "lerner-2sided",
            TheoremId::Shift2Sided => "shift-2sided",
            TheoremId::Para2Sided => "para-2sided",
            TheoremId::OneSided => "one-sided",
            TheoremId::SawyerK => "sawyer-K",
            TheoremId::BellmanM => "bellman-m",
            TheoremId::ConvGap => "conv-gap",
            TheoremId::OrliczEntropy => "orlicz-entropy",
            TheoremId::OneWeight => "one-weight",
        }
    }

    /// The inequality asserted on each trial.
    pub fn statement(self) -> &'static str {
        match self {
            TheoremId::EmbedCarleson => "Σ⟨fu⟩²a_I|I|/(α(u*/u)u*) ≤ 4C_α‖a‖_Carl‖f‖²_{L²(u)}",
            TheoremId::EmbedHaar => "Σ‖Δ_I(fu)‖²_{L¹}|I|/(α(u*/u)u*) ≤ 36C_α‖f‖²_{L²(u)}",
            TheoremId::Lerner2Sided => "‖T_a(·u)‖_{L²(u)→L²(v)} ≤ 4C_α‖a‖_Carl A^{1/2}",
            TheoremId::Shift2Sided => "‖Ш(·u)‖² ≤ (36C_αA^{1/2})²",
            TheoremId::Para2Sided => "‖Π(·u)‖² ≤ (24C_αA^{1/2})²",
            TheoremId::OneSided => "testing/(C_α²A u_{I₀}|I₀|) ≤ cap, with the stopping checks of every piece",
            TheoremId::SawyerK => "‖T(·u)‖² ≤ K·S, K = (8(2+√2))²",
            TheoremId::BellmanM => "−m′ ≥ φ, m(0) = 4‖φ‖₁, 2m′² ≤ mm″, −m′ convex; dyadic and splitting gaps",
            TheoremId::ConvGap => "u*(N) − ½(u*(N₁)+u*(N₂)) ≥ ½u_Δ²/u ≥ ½(Δu)²/u",
            TheoremId::OrliczEntropy => "α(u*/u)u* ≤ ‖u‖_{Λψ₁} and α(u*/u)u* ≤ ‖u‖_Φ on simple functions",
            TheoremId::OneWeight => "‖Ш(·v⁻¹)‖ ≤ 36 L[v]_{A₂}^{1/2} with the capped penalty",
        }
    }

    /// The `u*` functional the theorem is stated with.
    pub fn default_variant(self) -> Variant {
        match self {
            TheoremId::EmbedCarleson | TheoremId::Lerner2Sided | TheoremId::OneSided => Variant::Maximal,
            _ => Variant::Lorentz,
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            TheoremId::OneSided | TheoremId::SawyerK => 1000,
            _ => 10_000,
        }
    }

    /// Whether trials are dyadic instances the minimizer can shrink.
    pub fn is_dyadic(self) -> bool {
        !matches!(self, TheoremId::BellmanM | TheoremId::ConvGap | TheoremId::OrliczEntropy)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown theorem id {s}")))
    }
}

impl TryFrom<String> for TheoremId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TheoremId> for String {
    fn from(t: TheoremId) -> Self {
        t.name().into()
    }
}

/// Everything that determines a sweep. The JSON form mirrors the command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    /// `None` selects the theorem's default count.
    pub trials: Option<usize>,
    pub depth_min: usize,
    pub depth_max: usize,
    pub branching_min: usize,
    pub branching_max: usize,
    pub mass_spread: f64,
    pub early_leaf: f64,
    pub log_range: f64,
    pub zero_prob: f64,
    /// Inclusion probability for sparse families and Carleson sequences.
    pub density: f64,
    pub alpha: String,
    pub young: String,
    pub psi: String,
    /// `t₀` of the Young-function parametrization.
    pub young_t0: f64,
    /// `None` selects the theorem's own variant.
    pub variant: Option<Variant>,
    /// Relative tolerance of every asserted inequality.
    pub tolerance: f64,
    /// Worker threads; 0 uses the global pool. Left out of reports, which do not depend on it.
    #[serde(skip_serializing)]
    pub jobs: usize,
    /// Bound on the one-sided ratios.
    pub cap: f64,
    /// Multiplier on asserted constants; values below 1 inject violations.
    pub constant_scale: f64,
    /// Whether violations are minimized.
    pub minimize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let law = ModelLaw::default();
        let w = WeightLaw::default();
        Self {
            seed: 1,
            trials: None,
            depth_min: law.depth_min,
            depth_max: law.depth_max,
            branching_min: law.branching_min,
            branching_max: law.branching_max,
            mass_spread: law.mass_spread,
            early_leaf: law.early_leaf,
            log_range: w.log_range,
            zero_prob: w.zero_prob,
            density: 0.4,
            alpha: "alpha:t".into(),
            young: "young:loglog".into(),
            psi: "psi:llogl".into(),
            young_t0: 16.0,
            variant: None,
            tolerance: 1e-9,
            jobs: 0,
            cap: DEFAULT_CAP,
            constant_scale: 1.0,
            minimize: true,
            out: None,
            csv: None,
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn model_law(&self) -> ModelLaw {
        ModelLaw {
            depth_min: self.depth_min,
            depth_max: self.depth_max,
            branching_min: self.branching_min,
            branching_max: self.branching_max,
            mass_spread: self.mass_spread,
            early_leaf: self.early_leaf,
        }
    }

    pub fn weight_law(&self) -> WeightLaw {
        WeightLaw { log_range: self.log_range, zero_prob: self.zero_prob }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.into()));
        if self.depth_min > self.depth_max {
            return bad("depth_min exceeds depth_max");
        }
        if self.branching_min < 2 || self.branching_min > self.branching_max {
            return bad("branching needs 2 ≤ branching_min ≤ branching_max");
        }
        for (name, p) in [("early_leaf", self.early_leaf), ("zero_prob", self.zero_prob), ("density", self.density)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.mass_spread >= 0.0 && self.log_range >= 0.0) || !self.mass_spread.is_finite() || !self.log_range.is_finite() {
            return bad("mass_spread and log_range must be finite and nonnegative");
        }
        if !(self.tolerance >= 0.0 && self.tolerance < 1.0) {
            return bad("tolerance must lie in [0, 1)");
        }
        if !(self.cap > 0.0 && self.constant_scale > 0.0) || !self.constant_scale.is_finite() {
            return bad("cap and constant_scale must be positive");
        }
        if self.trials == Some(0) {
            return bad("trials must be positive");
        }
        Ok(())
    }
}

/// Both sides of an asserted inequality `lhs ≤ rhs`, plus any structural checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eval {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Exact side conditions (partitions, matrix positivity, certificates).
    pub structural: bool,
    /// Which part of a compound check this is.
    pub part: String,
    #[serde(skip)]
    pub stats: Vec<(&'static str, f64)>,
}

impl Eval {
    pub fn le(part: &str, lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Self { lhs, rhs, ratio, structural: true, part: part.into(), stats: Vec::new() }
    }

    pub fn with_structural(mut self, ok: bool) -> Self {
        self.structural &= ok;
        self
    }

    pub fn with_stat(mut self, name: &'static str, value: f64) -> Self {
        self.stats.push((name, value));
        self
    }

    /// `(lhs − rhs)` relative to the larger side.
    pub fn excess(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs()).max(f64::MIN_POSITIVE);
        if self.lhs.is_nan() || self.rhs.is_nan() {
            f64::INFINITY
        } else {
            (self.lhs - self.rhs) / scale
        }
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.structural && self.excess() <= tolerance
    }

    /// Keeps the worse of two parts, merging structural flags and statistics.
    pub fn worst(self, other: Eval) -> Eval {
        let structural = self.structural && other.structural;
        let mut stats = self.stats.clone();
        stats.extend(other.stats.iter().copied());
        let self_bad = !self.structural as u8;
        let other_bad = !other.structural as u8;
        let mut w = if (other_bad, other.excess()) > (self_bad, self.excess()) { other } else { self };
        w.structural = structural;
        w.stats = stats;
        w
    }
}

/// A dyadic instance in serialized form; weights map leaf ids to values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub model: Vec<AtomRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<BTreeMap<AtomId, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<BTreeMap<AtomId, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<BTreeMap<AtomId, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carleson: Option<Vec<f64>>,
}

/// A dyadic instance with a validated model.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub model: DyadicModel,
    pub u: Option<Weight>,
    pub v: Option<Weight>,
    pub f: Option<Weight>,
    pub operator: Option<OperatorRecord>,
    pub carleson: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    U,
    V,
    F,
}

impl Instance {
    pub fn decode(&self) -> Result<Decoded> {
        let model = DyadicModel::from_records(&self.model)?;
        let w = |m: &Option<BTreeMap<AtomId, f64>>| m.as_ref().map(|m| Weight::from_leaf_map(&model, m)).transpose();
        let (u, v, f) = (w(&self.u)?, w(&self.v)?, w(&self.f)?);
        if let Some(op) = &self.operator {
            OperatorSpec::from_record(&model, op)?;
        }
        if let Some(a) = &self.carleson {
            CarlesonSequence::new(&model, a.clone())?;
        }
        Ok(Decoded { model, u, v, f, operator: self.operator.clone(), carleson: self.carleson.clone() })
    }
}

impl Decoded {
    pub fn encode(&self) -> Instance {
        let w = |x: &Option<Weight>| x.as_ref().map(|w| w.to_leaf_map(&self.model));
        Instance {
            model: self.model.records(),
            u: w(&self.u),
            v: w(&self.v),
            f: w(&self.f),
            operator: self.operator.clone(),
            carleson: self.carleson.clone(),
        }
    }

    fn field(&self, which: Field) -> &Option<Weight> {
        match which {
            Field::U => &self.u,
            Field::V => &self.v,
            Field::F => &self.f,
        }
    }

    fn field_mut(&mut self, which: Field) -> &mut Option<Weight> {
        match which {
            Field::U => &mut self.u,
            Field::V => &mut self.v,
            Field::F => &mut self.f,
        }
    }

    /// Restricts to the subtree of `root` and turns `collapse` into a leaf.
    /// New leaf values are averages; operator data on removed atoms is dropped.
    pub fn reshape(&self, root: AtomId, collapse: Option<AtomId>) -> Result<Decoded> {
        let old = &self.model;
        let mut inv = Vec::new();
        fn build(m: &DyadicModel, id: AtomId, collapse: Option<AtomId>, inv: &mut Vec<AtomId>) -> Plan {
            inv.push(id);
            if m.is_leaf(id) || Some(id) == collapse {
                Plan::Leaf(m.mass(id))
            } else {
                Plan::Node(m.children(id).iter().map(|&c| build(m, c, collapse, inv)).collect())
            }
        }
        let plan = build(old, root, collapse, &mut inv);
        let model = DyadicModel::from_plan(&plan)?;
        let mut map = vec![None; old.len()];
        for (new, &o) in inv.iter().enumerate() {
            map[o] = Some(new);
        }
        let weight = |w: &Weight| {
            let ints = old.integrals(w);
            Weight::new(model.leaves().iter().map(|&l| ints[inv[l]] / old.mass(inv[l])).collect())
        };
        let per_atom = |a: &Vec<f64>| inv.iter().map(|&o| a[o]).collect::<Vec<f64>>();
        let internal = |o: AtomId| map[o].filter(|&n| !model.is_leaf(n));
        let operator = self.operator.as_ref().map(|rec| match rec {
            OperatorRecord::Sparse { members } => OperatorRecord::Sparse { members: members.iter().filter_map(|&i| map[i]).collect() },
            OperatorRecord::PositiveDyadic { coefficients } => OperatorRecord::PositiveDyadic { coefficients: per_atom(coefficients) },
            OperatorRecord::HaarShift { blocks, mode } => OperatorRecord::HaarShift {
                blocks: blocks.iter().filter_map(|b| internal(b.atom).map(|n| Block { atom: n, matrix: b.matrix.clone() })).collect(),
                mode: *mode,
            },
            OperatorRecord::Paraproduct { symbol } => OperatorRecord::Paraproduct {
                symbol: symbol
                    .iter()
                    .filter_map(|e| internal(e.atom).map(|n| SymbolEntry { atom: n, values: e.values.clone() }))
                    .collect(),
            },
        });
        Ok(Decoded {
            u: self.u.as_ref().map(weight),
            v: self.v.as_ref().map(weight),
            f: self.f.as_ref().map(weight),
            carleson: self.carleson.as_ref().map(per_atom),
            operator,
            model,
        })
    }

    fn require(&self, which: Field) -> Result<&Weight> {
        self.field(which).as_ref().ok_or_else(|| Error::InvalidInput(format!("instance lacks weight {which:?}")))
    }

    fn operator_spec(&self) -> Result<OperatorSpec> {
        let rec = self.operator.as_ref().ok_or_else(|| Error::InvalidInput("instance lacks an operator".into()))?;
        OperatorSpec::from_record(&self.model, rec)
    }
}

/// Trial data of any theorem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Dyadic(Instance),
    Bellman {
        phi: StepFn,
        f_plus: f64,
        n_plus: DistributionFn,
        f_minus: f64,
        n_minus: DistributionFn,
        fs: Vec<f64>,
        ns: Vec<DistributionFn>,
        gammas: Vec<f64>,
    },
    Midpoint {
        n1: DistributionFn,
        n2: DistributionFn,
    },
    Distribution {
        n: DistributionFn,
    },
}

#[derive(Clone, Debug)]
pub enum Sample {
    Dyadic(Decoded),
    Other(Case),
}

impl Sample {
    pub fn to_case(&self) -> Case {
        match self {
            Sample::Dyadic(d) => Case::Dyadic(d.encode()),
            Sample::Other(c) => c.clone(),
        }
    }

    pub fn from_case(case: &Case) -> Result<Sample> {
        match case {
            Case::Dyadic(i) => Ok(Sample::Dyadic(i.decode()?)),
            other => Ok(Sample::Other(other.clone())),
        }
    }
}

/// Parsed presets and derived objects shared by all trials of a sweep.
pub struct Context {
    pub theorem: TheoremId,
    pub config: SweepConfig,
    pub trials: usize,
    pub alpha: PenaltyFn,
    pub variant: Variant,
    /// Re-evaluate norms with the dense oracle where possible.
    pub tight: bool,
    bellman: Option<BellmanB>,
    psi_penalty: Option<PsiPenalty>,
    young_penalty: Option<YoungPenalty>,
}

impl Context {
    pub fn new(theorem: TheoremId, config: &SweepConfig) -> Result<Self> {
        config.validate()?;
        let alpha = PenaltyFn::preset(&config.alpha)?;
        alpha.validate()?;
        let needs_c_alpha = !matches!(theorem, TheoremId::ConvGap | TheoremId::OrliczEntropy | TheoremId::OneWeight);
        if needs_c_alpha && alpha.c_alpha(Convention::With1OverAlpha1).divergent {
            return Err(Error::DivergentPenalty);
        }
        if theorem == TheoremId::OneSided && !alpha.is_increasing() {
            return Err(Error::InvalidInput(format!("one-sided bounds need an increasing penalty, got {}", alpha.name())));
        }
        let bellman = if matches!(theorem, TheoremId::BellmanM | TheoremId::EmbedHaar) { Some(BellmanB::new(&alpha)?) } else { None };
        let (psi_penalty, young_penalty) = if theorem == TheoremId::OrliczEntropy {
            let psi = QuasiconcaveFn::preset(&config.psi)?;
            let young = YoungFn::preset(&config.young)?;
            (Some(alpha_from_psi(&psi)?), Some(alpha_from_young(&young, config.young_t0)?))
        } else {
            (None, None)
        };
        let mut config = config.clone();
        let trials = config.trials.unwrap_or(theorem.default_trials());
        config.trials = Some(trials);
        let variant = config.variant.unwrap_or(theorem.default_variant());
        config.variant = Some(variant);
        Ok(Self { theorem, config, trials, alpha, variant, tight: false, bellman, psi_penalty, young_penalty })
    }

    pub fn tolerance(&self) -> f64 {
        self.config.tolerance
    }

    pub fn generate(&self, trial: u64) -> Result<Sample> {
        let mut rng = trial_rng(self.config.seed, trial);
        let law = self.config.model_law();
        let wl = self.config.weight_law();
        let rng = &mut rng;
        if !self.theorem.is_dyadic() {
            return Ok(Sample::Other(self.generate_case(rng)));
        }
        let model = random_model(rng, &law);
        let mut d = Decoded { model, u: None, v: None, f: None, operator: None, carleson: None };
        let m = &d.model;
        let density = self.config.density;
        match self.theorem {
            TheoremId::EmbedCarleson | TheoremId::EmbedHaar => {
                d.u = Some(random_weight(rng, m, &wl));
                let f = random_weight(rng, m, &wl);
                d.f = Some(Weight::new(f.values.iter().map(|&x| if rng.random_bool(0.5) { -x } else { x }).collect()));
                if self.theorem == TheoremId::EmbedCarleson {
                    d.carleson = Some(random_carleson(rng, m, density));
                }
            }
            TheoremId::OneWeight => {
                d.v = Some(random_weight(rng, m, &WeightLaw { zero_prob: 0.0, ..wl }));
                d.operator = Some(random_shift(rng, m, BlockNorm::L1xL1)?.to_record(m));
            }
            _ => {
                d.u = Some(random_weight(rng, m, &wl));
                d.v = Some(random_weight(rng, m, &wl));
                d.operator = Some(match self.theorem {
                    TheoremId::Lerner2Sided => OperatorRecord::PositiveDyadic { coefficients: random_carleson(rng, m, density) },
                    TheoremId::Shift2Sided => random_shift(rng, m, BlockNorm::L1xL1)?.to_record(m),
                    TheoremId::Para2Sided => random_paraproduct(rng, m)?.to_record(m),
                    _ => OperatorRecord::Sparse { members: random_sparse(rng, m, density) },
                });
            }
        }
        Ok(Sample::Dyadic(d))
    }

    fn generate_case(&self, rng: &mut impl Rng) -> Case {
        let lr = self.config.log_range;
        match self.theorem {
            TheoremId::BellmanM => {
                let k = rng.random_range(1..=5);
                let mut levels: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0f64).exp()).collect();
                levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let mut r = 0.0;
                let steps = levels
                    .into_iter()
                    .map(|l| {
                        r += rng.random_range(-2.0..2.0f64).exp();
                        (r, l)
                    })
                    .collect();
                let phi = StepFn::new(steps).expect("increasing ends, decreasing levels");
                let (mp, mm) = (rng.random_range(0.05..=1.0), rng.random_range(0.05..=1.0));
                let n_plus = random_distribution(rng, 4, lr, mp);
                let n_minus = random_distribution(rng, 4, lr, mm);
                let k = rng.random_range(2..=5);
                let fs = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
                let ns = (0..k)
                    .map(|_| {
                        let mass = rng.random_range(0.05..=1.0);
                        random_distribution(rng, 4, lr, mass)
                    })
                    .collect();
                let g: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
                let total: f64 = g.iter().sum();
                let mut gammas: Vec<f64> = g.iter().map(|x| x / total).collect();
                let head: f64 = gammas[..k - 1].iter().sum();
                gammas[k - 1] = 1.0 - head;
                Case::Bellman {
                    phi,
                    f_plus: rng.random_range(-3.0..3.0),
                    n_plus,
                    f_minus: rng.random_range(-3.0..3.0),
                    n_minus,
                    fs,
                    ns,
                    gammas,
                }
            }
            TheoremId::ConvGap => {
                let (_, n1, n2) = random_midpoint_pair(rng, 5, lr);
                Case::Midpoint { n1, n2 }
            }
            _ => {
                let mass = rng.random_range(0.01..=1.0);
                Case::Distribution { n: random_distribution(rng, 6, lr, mass) }
            }
        }
    }

    fn norm(&self, op: &OperatorSpec, model: &DyadicModel, u: &Weight, v: &Weight) -> Result<f64> {
        if self.tight && model.n_leaves() <= DENSE_LIMIT {
            dense_norm(op, model, u, v)
        } else {
            weighted_norm(op, model, u, v)
        }
    }

    fn c_alpha(&self) -> f64 {
        self.alpha.c_alpha(Convention::With1OverAlpha1).upper
    }

    fn two_sided_bump(&self, d: &Decoded) -> Result<f64> {
        let (u, v) = (d.require(Field::U)?, d.require(Field::V)?);
        Ok(bump_supremum(&d.model, u, v, &self.alpha, BumpMode::TwoSided, self.variant).value)
    }

    /// Evaluates the asserted inequality on one sample.
    pub fn evaluate(&self, sample: &Sample) -> Result<Eval> {
        let s = self.config.constant_scale;
        match sample {
            Sample::Dyadic(d) => self.evaluate_dyadic(d, s),
            Sample::Other(c) => self.evaluate_case(c, s),
        }
    }

    fn evaluate_dyadic(&self, d: &Decoded, s: f64) -> Result<Eval> {
        let m = &d.model;
        match self.theorem {
            TheoremId::EmbedCarleson => {
                let a = CarlesonSequence::new(m, d.carleson.clone().ok_or_else(|| Error::InvalidInput("missing Carleson sequence".into()))?)?;
                let r = embedding_sum_carleson(m, d.require(Field::U)?, d.require(Field::F)?, &a, &self.alpha)?;
                Ok(Eval::le("embedding", r.lhs, s * r.rhs).with_stat("ratio", r.ratio))
            }
            TheoremId::EmbedHaar => {
                let bell = self.bellman.as_ref().expect("built for embed-haar");
                let r = embedding_sum_haar_with(bell, m, d.require(Field::U)?, d.require(Field::F)?)?;
                let telescoped = r.telescoped.map_or(true, |t| r.lhs <= t + 1e-9 * r.rhs);
                Ok(Eval::le("embedding", r.lhs, s * r.rhs).with_structural(telescoped).with_stat("ratio", r.ratio))
            }
            TheoremId::Lerner2Sided | TheoremId::Shift2Sided | TheoremId::Para2Sided => {
                let op = d.operator_spec()?;
                let (u, v) = (d.require(Field::U)?, d.require(Field::V)?);
                let a = self.two_sided_bump(d)?;
                let c = self.c_alpha();
                let norm = self.norm(&op, m, u, v)?;
                let e = match self.theorem {
                    TheoremId::Lerner2Sided => {
                        let carl = m.carleson_norm(op.coefficients().unwrap_or(&[])).0;
                        Eval::le("norm", norm, s * 4.0 * c * carl * a.sqrt())
                    }
                    TheoremId::Shift2Sided => Eval::le("norm²", norm * norm, s * (36.0 * c * a.sqrt()).powi(2)),
                    _ => Eval::le("norm²", norm * norm, s * (24.0 * c * a.sqrt()).powi(2)),
                };
                let r = e.ratio;
                Ok(e.with_stat("ratio", r))
            }
            TheoremId::OneSided => {
                let family = match &d.operator {
                    Some(OperatorRecord::Sparse { members }) => SparseFamily::new(m, members)?,
                    _ => return Err(Error::InvalidInput("one-sided trials need a sparse operator".into())),
                };
                let (u, v) = (d.require(Field::U)?, d.require(Field::V)?);
                let r = one_sided_verify(&family, m, u, v, &self.alpha, m.root(), self.config.cap)?;
                let worst = r.ratio.max(r.max_piece_ratio);
                let structural = r.pieces.iter().all(PieceReport::checks_hold) && r.envelope <= r.envelope_bound * (1.0 + 1e-9);
                Ok(Eval::le("ratio", worst, s * r.cap)
                    .with_structural(structural)
                    .with_stat("ratio", r.ratio)
                    .with_stat("piece_ratio", r.max_piece_ratio))
            }
            TheoremId::SawyerK => {
                let op = d.operator_spec()?;
                let (u, v) = (d.require(Field::U)?, d.require(Field::V)?);
                let testing = sawyer_constant(&op, m, u, v)?;
                let norm = self.norm(&op, m, u, v)?;
                let e = Eval::le("norm²", norm * norm, s * sawyer_k() * testing.value);
                let r = e.ratio;
                Ok(e.with_stat("ratio", r))
            }
            TheoremId::OneWeight => {
                let op = d.operator_spec()?;
                let r = one_weight_bounds(&op, m, d.require(Field::V)?)?;
                Ok(Eval::le("norm", r.norm, s * r.bound)
                    .with_stat("ratio", r.norm / r.bound)
                    .with_stat("c_fit", r.c_fit)
                    .with_stat("ainfty_over_a2", r.ainfty_v / r.a2))
            }
            _ => Err(Error::InvalidInput(format!("{} does not take dyadic instances", self.theorem))),
        }
    }

    fn evaluate_case(&self, case: &Case, s: f64) -> Result<Eval> {
        match (self.theorem, case) {
            (TheoremId::BellmanM, Case::Bellman { phi, f_plus, n_plus, f_minus, n_minus, fs, ns, gammas }) => {
                let m = build_m(phi)?;
                let top = phi.steps().last().map_or(1.0, |x| x.0) * 2.0;
                let ys: Vec<f64> = (0..1000).map(|i| top * i as f64 / 999.0).collect();
                let rep = check_conv02(&m, Some(phi), &ys);
                let l1 = 4.0 * phi.l1_norm();
                let construction = Eval::le("m(0) = 4‖φ‖₁", (m.m0() - l1).abs(), 1e-12 * l1)
                    .with_structural(rep.passed)
                    .with_stat("min_slack", -rep.min_slack);
                let bell = self.bellman.as_ref().expect("built for bellman-m");
                let g = bell.dyadic_gap(*f_plus, n_plus, *f_minus, n_minus)?;
                let dyadic = Eval::le("dyadic gap", s.recip() * g.rhs, g.lhs);
                let sg = bell.splitting_gap(fs, ns, gammas)?;
                let pair_ok = sg.pair.map_or(true, |p| p.holds());
                let splitting = Eval::le("splitting gap", s.recip() * sg.rhs, sg.lhs).with_structural(pair_ok);
                Ok(construction.worst(dyadic).worst(splitting))
            }
            (TheoremId::ConvGap, Case::Midpoint { n1, n2 }) => {
                let n = DistributionFn::combine(&[(0.5, n1), (0.5, n2)]);
                let g = concavity_gap(&n, n1, n2)?;
                Ok(Eval::le("gap", s.recip() * g.bound, g.gap).worst(Eval::le("mass", g.mass_bound, g.bound)))
            }
            (TheoremId::OrliczEntropy, Case::Distribution { n }) => {
                let p = self.psi_penalty.as_ref().expect("built for orlicz-entropy").predicate(n);
                let y = self.young_penalty.as_ref().expect("built for orlicz-entropy").predicate(n);
                Ok(Eval::le("lorentz", p.lhs, s * p.rhs)
                    .with_stat("lorentz_ratio", p.ratio())
                    .worst(Eval::le("orlicz", y.lhs, s * y.rhs).with_stat("orlicz_ratio", y.ratio())))
            }
            _ => Err(Error::InvalidInput(format!("case does not match theorem {}", self.theorem))),
        }
    }

    /// `(config hash, preset hash)`, both sha256 hex.
    pub fn hashes(&self) -> (String, String) {
        let cfg = serde_json::to_string(&self.config).expect("config serializes");
        let presets = format!(
            "{}\n{}\n{}\n{}\n{:?}",
            self.theorem, self.config.alpha, self.config.young, self.config.psi, self.variant
        );
        (sha256_hex(cfg.as_bytes()), sha256_hex(presets.as_bytes()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub trial: u64,
    pub eval: Eval,
    pub case: Case,
    /// The violation disappears at a looser tolerance or with the dense oracle.
    pub tolerance_artifact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimized: Option<Minimized>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimized {
    pub instance: Instance,
    pub eval: Eval,
    pub depth: usize,
    pub leaves: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialError {
    pub trial: u64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub theorem: TheoremId,
    pub statement: String,
    pub config: SweepConfig,
    pub config_hash: String,
    pub preset_hash: String,
    pub trials: usize,
    pub failures: usize,
    pub errors: usize,
    pub max_ratio: f64,
    pub worst_trial: Option<u64>,
    /// Maxima of per-trial statistics.
    pub stats: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Failure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_error: Option<TrialError>,
    pub passed: bool,
    /// sha256 of the report serialized with this field empty.
    pub content_hash: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report: {e}")))
    }

    fn seal(mut self) -> Self {
        self.content_hash.clear();
        self.content_hash = sha256_hex(self.to_json().as_bytes());
        self
    }

    /// Recomputes the content hash.
    pub fn verify_hash(&self) -> bool {
        self.clone().seal().content_hash == self.content_hash
    }
}

enum Outcome {
    Pass(Eval),
    Fail(Eval),
    Error(String),
}

/// One line of the per-trial table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub passed: bool,
    pub error: Option<String>,
}

impl Outcome {
    fn row(&self, trial: u64) -> TrialRow {
        match self {
            Outcome::Pass(e) | Outcome::Fail(e) => TrialRow {
                trial,
                lhs: e.lhs,
                rhs: e.rhs,
                ratio: e.ratio,
                passed: matches!(self, Outcome::Pass(_)),
                error: None,
            },
            Outcome::Error(m) => TrialRow { trial, lhs: f64::NAN, rhs: f64::NAN, ratio: f64::NAN, passed: false, error: Some(m.clone()) },
        }
    }
}

/// CSV of per-trial rows.
pub fn rows_csv(rows: &[TrialRow]) -> String {
    let mut out = String::from("trial,lhs,rhs,ratio,passed,error\n");
    for r in rows {
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        out.push_str(&format!("{},{:.12e},{:.12e},{:.12e},{},{err}\n", r.trial, r.lhs, r.rhs, r.ratio, r.passed));
    }
    out
}

fn run_trial(ctx: &Context, trial: u64) -> Outcome {
    match ctx.generate(trial).and_then(|s| ctx.evaluate(&s)) {
        Ok(e) if e.passes(ctx.tolerance()) => Outcome::Pass(e),
        Ok(e) => Outcome::Fail(e),
        Err(e) => Outcome::Error(e.to_string()),
    }
}

/// Runs the sweep and assembles a sealed report.
pub fn run_sweep(ctx: &Context) -> Result<Report> {
    Ok(sweep(ctx)?.0)
}

/// As [`run_sweep`], also returning the per-trial table.
pub fn sweep(ctx: &Context) -> Result<(Report, Vec<TrialRow>)> {
    let go = || (0..ctx.trials as u64).into_par_iter().map(|t| run_trial(ctx, t)).collect::<Vec<_>>();
    let outcomes = if ctx.config.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.config.jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(go)
    } else {
        go()
    };
    let mut stats: BTreeMap<String, f64> = BTreeMap::new();
    let (mut failures, mut errors) = (0, 0);
    let mut max_ratio = f64::NEG_INFINITY;
    let mut worst_trial = None;
    let mut first_fail = None;
    let mut first_error = None;
    let rows: Vec<TrialRow> = outcomes.iter().enumerate().map(|(t, o)| o.row(t as u64)).collect();
    for (t, o) in outcomes.into_iter().enumerate() {
        let t = t as u64;
        let e = match o {
            Outcome::Pass(e) => e,
            Outcome::Fail(e) => {
                failures += 1;
                if first_fail.is_none() {
                    first_fail = Some(t);
                }
                e
            }
            Outcome::Error(message) => {
                errors += 1;
                first_error.get_or_insert(TrialError { trial: t, message });
                continue;
            }
        };
        if e.ratio > max_ratio || worst_trial.is_none() {
            max_ratio = e.ratio;
            worst_trial = Some(t);
        }
        for (k, v) in &e.stats {
            let slot = stats.entry((*k).to_string()).or_insert(f64::NEG_INFINITY);
            *slot = slot.max(*v);
        }
    }
    let first_failure = first_fail.map(|t| failure_record(ctx, t)).transpose()?;
    let (config_hash, preset_hash) = ctx.hashes();
    let report = Report {
        theorem: ctx.theorem,
        statement: ctx.theorem.statement().into(),
        config: ctx.config.clone(),
        config_hash,
        preset_hash,
        trials: ctx.trials,
        failures,
        errors,
        max_ratio: if worst_trial.is_some() { max_ratio } else { 0.0 },
        worst_trial,
        stats,
        first_failure,
        first_error,
        passed: failures == 0 && errors == 0,
        content_hash: String::new(),
    }
    .seal();
    Ok((report, rows))
}

fn failure_record(ctx: &Context, trial: u64) -> Result<Failure> {
    let sample = ctx.generate(trial)?;
    let eval = ctx.evaluate(&sample)?;
    let tolerance_artifact = is_artifact(ctx, &sample, &eval);
    let minimized = match (&sample, ctx.config.minimize) {
        (Sample::Dyadic(d), true) => minimize(ctx, d),
        _ => None,
    };
    Ok(Failure { trial, eval, case: sample.to_case(), tolerance_artifact, minimized })
}

/// A failure is an artifact when its excess is inside [`ARTIFACT_BAND`] or the
/// dense re-evaluation passes.
pub fn is_artifact(ctx: &Context, sample: &Sample, eval: &Eval) -> bool {
    if eval.structural && eval.excess() <= ARTIFACT_BAND {
        return true;
    }
    let tight = Context { tight: true, ..ctx.shallow_clone() };
    matches!(tight.evaluate(sample), Ok(e) if e.passes(ctx.tolerance()))
}

impl Context {
    fn shallow_clone(&self) -> Context {
        Context {
            theorem: self.theorem,
            config: self.config.clone(),
            trials: self.trials,
            alpha: self.alpha.clone(),
            variant: self.variant,
            tight: self.tight,
            bellman: self.bellman.clone(),
            psi_penalty: self.psi_penalty.clone(),
            young_penalty: self.young_penalty.clone(),
        }
    }
}

/// Greedy delta debugging: re-rooting, collapsing subtrees, then resetting leaf
/// values to 1, keeping every change that still fails. `None` when `start` passes.
pub fn minimize(ctx: &Context, start: &Decoded) -> Option<Minimized> {
    let mut evaluations = 0;
    let mut fails = |d: &Decoded| -> Option<Eval> {
        if evaluations >= MINIMIZE_BUDGET {
            return None;
        }
        evaluations += 1;
        ctx.evaluate(&Sample::Dyadic(d.clone())).ok().filter(|e| !e.passes(ctx.tolerance()))
    };
    let mut cur = start.clone();
    let mut eval = fails(&cur)?;
    'outer: loop {
        let root = cur.model.root();
        let candidates = cur.model.children(root).iter().map(|&c| (c, None)).chain(
            (0..cur.model.len()).filter(|&a| !cur.model.is_leaf(a)).map(|a| (root, Some(a))),
        );
        for (r, collapse) in candidates.collect::<Vec<_>>() {
            if let Ok(cand) = cur.reshape(r, collapse) {
                if let Some(e) = fails(&cand) {
                    (cur, eval) = (cand, e);
                    continue 'outer;
                }
            }
        }
        let mut changed = false;
        for field in [Field::U, Field::V, Field::F] {
            let Some(w) = cur.field(field).clone() else { continue };
            if w.values.iter().all(|&x| x == 1.0) {
                continue;
            }
            let mut cand = cur.clone();
            *cand.field_mut(field) = Some(Weight::constant(&cur.model, 1.0));
            if let Some(e) = fails(&cand) {
                (cur, eval, changed) = (cand, e, true);
                continue;
            }
            for p in 0..w.len() {
                if cur.field(field).as_ref().map_or(true, |w| w.values[p] == 1.0) {
                    continue;
                }
                let mut cand = cur.clone();
                if let Some(w) = cand.field_mut(field).as_mut() {
                    w.values[p] = 1.0;
                }
                if let Some(e) = fails(&cand) {
                    (cur, eval, changed) = (cand, e, true);
                }
            }
        }
        if !changed {
            break;
        }
    }
    Some(Minimized { depth: cur.model.depth(), leaves: cur.model.n_leaves(), instance: cur.encode(), eval, evaluations })
}

/// Outcome of re-examining a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizeOutcome {
    /// The report has no violation.
    NoViolation,
    /// The recorded failure passes on re-evaluation, or only within the tolerance band.
    Vanished { trial: u64, tolerance_artifact: bool, eval: Option<Eval> },
    /// Scalar counterexamples are reported unchanged.
    NotMinimizable { trial: u64, case: Case, eval: Eval },
    Minimized { trial: u64, minimized: Minimized },
}

/// Re-evaluates and minimizes the first violation of a report.
pub fn minimize_report(report: &Report) -> Result<MinimizeOutcome> {
    let Some(failure) = &report.first_failure else {
        return Ok(MinimizeOutcome::NoViolation);
    };
    let ctx = Context::new(report.theorem, &report.config)?;
    let sample = Sample::from_case(&failure.case)?;
    let eval = ctx.evaluate(&sample).ok();
    let trial = failure.trial;
    match eval {
        Some(e) if !e.passes(ctx.tolerance()) => {
            if is_artifact(&ctx, &sample, &e) {
                return Ok(MinimizeOutcome::Vanished { trial, tolerance_artifact: true, eval: Some(e) });
            }
            match &sample {
                Sample::Dyadic(d) => match minimize(&ctx, d) {
                    Some(minimized) => Ok(MinimizeOutcome::Minimized { trial, minimized }),
                    None => Ok(MinimizeOutcome::Vanished { trial, tolerance_artifact: false, eval: Some(e) }),
                },
                Sample::Other(case) => Ok(MinimizeOutcome::NotMinimizable { trial, case: case.clone(), eval: e }),
            }
        }
        e => Ok(MinimizeOutcome::Vanished { trial, tolerance_artifact: false, eval: e }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_ids_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.name().parse::<TheoremId>().unwrap(), t);
            let s = serde_json::to_string(&t).unwrap();
            assert_eq!(serde_json::from_str::<TheoremId>(&s).unwrap(), t);
        }
        assert!("nope".parse::<TheoremId>().is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(SweepConfig::from_json(r#"{"seed": 3, "trials": 5}"#).is_ok());
        assert!(SweepConfig::from_json(r#"{"sede": 3}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"variant": "lorentz"}"#).unwrap().variant == Some(Variant::Lorentz));
    }

    #[test]
    fn reshape_preserves_integrals() {
        let ctx = Context::new(TheoremId::Shift2Sided, &SweepConfig { trials: Some(1), ..Default::default() }).unwrap();
        for t in 0..20 {
            let Sample::Dyadic(d) = ctx.generate(t).unwrap() else { unreachable!() };
            let r = d.model.root();
            for a in 0..d.model.len() {
                let c = d.reshape(r, Some(a)).unwrap();
                let u0 = d.u.as_ref().unwrap().integral(&d.model);
                let u1 = c.u.as_ref().unwrap().integral(&c.model);
                assert!((u0 - u1).abs() <= 1e-12 * u0);
                assert!(OperatorSpec::from_record(&c.model, c.operator.as_ref().unwrap()).is_ok());
            }
            for &ch in d.model.children(r) {
                let c = d.reshape(ch, None).unwrap();
                assert!((c.model.mass(c.model.root()) - d.model.mass(ch)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn instance_round_trip() {
        let ctx = Context::new(TheoremId::EmbedCarleson, &SweepConfig::default()).unwrap();
        let Sample::Dyadic(d) = ctx.generate(4).unwrap() else { unreachable!() };
        let text = serde_json::to_string(&d.encode()).unwrap();
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(back.decode().unwrap(), d);
    }
}
