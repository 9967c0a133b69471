//! Seeded randomized search over every check: proved statements as
//! regression suites, the two conjectures as counterexample hunts.
//!
//! Trial `i` draws from its own ChaCha8 stream seeded with `seed ^ i`, and
//! per-trial outcomes are merged with an associative, commutative rule, so a
//! report does not depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{certify, ExactVerdict, RationalLaw, Sign};
use crate::forms::{scaled_residual, tolerance, CheckId, Forms, ESCALATION_FACTOR};
use crate::law::{DiscreteLaw, Precision};
use crate::sample::{random_law, random_rational_law, LawShape};

/// Bound on numerators, denominators and mass weights of rational laws drawn
/// in rational mode. Small terms keep exact certification cheap.
pub const RATIONAL_MAX_TERM: i64 = 12;
/// A DoubleDouble residual below `−FINDING_THRESHOLD·scale` counts as a
/// violation when no exact certificate is available.
pub const FINDING_THRESHOLD: f64 = 1e-6;
/// Width of the window holding every order of a clustered tuple.
pub const CLUSTER_WIDTH: f64 = 0.1;
/// Probabilities of the uniform, clustered and integer sampling regimes.
pub const REGIME_WEIGHTS: [f64; 3] = [0.5, 0.3, 0.2];

/// Restricts Conjecture 1 to the parameter submanifold on which it reduces to
/// Theorem 4 (`r₁=u₁=r₂, s₁=u₂, v₁=s₂=v₂`) or Theorem 5
/// (`r₁=r₂, s₁=u₁=s₂=u₂, v₁=u, v₂=v`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Theorem4,
    Theorem5,
}

impl Manifold {
    /// Expands `(r, s, v)` or `(r, s, u, v)` to the eight Conjecture 1 parameters.
    pub fn expand(self, p: &[f64]) -> Vec<f64> {
        match self {
            Manifold::Theorem4 => {
                let (r, s, v) = (p[0], p[1], p[2]);
                vec![r, s, r, v, r, v, s, v]
            }
            Manifold::Theorem5 => {
                let (r, s, u, v) = (p[0], p[1], p[2], p[3]);
                vec![r, s, s, u, r, s, s, v]
            }
        }
    }

    pub fn check(self) -> CheckId {
        match self {
            Manifold::Theorem4 => CheckId::Theorem4,
            Manifold::Theorem5 => CheckId::Theorem5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub atom_count_range: (usize, usize),
    /// Range of `ln(value)` for float laws.
    pub value_log_range: (f64, f64),
    pub order_range: (f64, f64),
    /// Draw rational laws so that near-violations at integer orders can be
    /// certified exactly.
    pub rational_mode: bool,
    pub trials: u64,
    pub seed: u64,
    /// Conjecture 1 only: sample on a reduction manifold.
    pub manifold: Option<Manifold>,
    /// Parameters held fixed, as `(index, value)`.
    pub pinned: Vec<(usize, f64)>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        let shape = LawShape::default();
        Self {
            atom_count_range: shape.atoms,
            value_log_range: shape.log_values,
            order_range: (-6.0, 6.0),
            rational_mode: false,
            trials: 1000,
            seed: 0,
            manifold: None,
            pinned: Vec::new(),
        }
    }
}

impl SamplerConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let (a0, a1) = self.atom_count_range;
        if a0 == 0 || a0 > a1 {
            return bad("atom_count_range must be a non-empty range of positive counts");
        }
        let (v0, v1) = self.value_log_range;
        if !(v0.is_finite() && v1.is_finite() && v0 <= v1) {
            return bad("value_log_range must be a finite, non-empty interval");
        }
        let (o0, o1) = self.order_range;
        if !(o0.is_finite() && o1.is_finite() && o0 < o1) {
            return bad("order_range must be a finite interval with lo < hi");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.pinned.iter().any(|&(_, v)| !v.is_finite()) {
            return bad("pinned parameters must be finite");
        }
        Ok(())
    }

    fn shape(&self) -> LawShape {
        LawShape {
            atoms: self.atom_count_range,
            log_values: self.value_log_range,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Regime {
    Uniform,
    Clustered,
    Integer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ParamKind {
    Order,
    /// A difference of orders (`a` of μ_a, σ_a, θ_a).
    Shift,
    Weight,
}

fn param_kinds(id: CheckId) -> Vec<ParamKind> {
    use ParamKind::*;
    match id {
        CheckId::Corollary1 | CheckId::Corollary2 => vec![Shift, Order, Order],
        CheckId::Conjecture2 => vec![Shift, Order, Order, Order, Order],
        CheckId::Theorem2 => vec![Weight, Weight, Order, Order, Order, Order],
        other => vec![Order; other.arity()],
    }
}

fn pick_regime<R: Rng + ?Sized>(rng: &mut R) -> Regime {
    let x: f64 = rng.random();
    if x < REGIME_WEIGHTS[0] {
        Regime::Uniform
    } else if x < REGIME_WEIGHTS[0] + REGIME_WEIGHTS[1] {
        Regime::Clustered
    } else {
        Regime::Integer
    }
}

fn integers_in(lo: f64, hi: f64, keep: impl Fn(i64) -> bool) -> Vec<i64> {
    (lo.ceil() as i64..=hi.floor() as i64)
        .filter(|&k| keep(k))
        .collect()
}

/// Draws parameters for `kinds` in one regime.
///
/// Integer tuples put every order in one residue class mod 4 and make every
/// shift even, so all the nested midpoints the checks visit are integers and
/// exact certification applies (unless a midpoint lands on 0 or 1).
fn sample_kinds<R: Rng + ?Sized>(rng: &mut R, kinds: &[ParamKind], range: (f64, f64)) -> Vec<f64> {
    let (lo, hi) = range;
    let regime = pick_regime(rng);
    let residue = rng.random_range(0..4i64);
    let orders = integers_in(lo, hi, |k| k.rem_euclid(4) == residue);
    let evens = integers_in(lo, hi, |k| k % 2 == 0);
    let base = rng.random_range(lo..=(hi - CLUSTER_WIDTH).max(lo));
    kinds
        .iter()
        .map(|kind| match (kind, regime) {
            (ParamKind::Weight, _) => rng.random_range(0.0..=1.0),
            (_, Regime::Uniform) => rng.random_range(lo..=hi),
            (ParamKind::Order, Regime::Clustered) => base + rng.random_range(0.0..=CLUSTER_WIDTH),
            (ParamKind::Shift, Regime::Clustered) => {
                rng.random_range(-CLUSTER_WIDTH..=CLUSTER_WIDTH)
            }
            (ParamKind::Order, Regime::Integer) if !orders.is_empty() => {
                orders[rng.random_range(0..orders.len())] as f64
            }
            (ParamKind::Shift, Regime::Integer) if !evens.is_empty() => {
                evens[rng.random_range(0..evens.len())] as f64
            }
            _ => rng.random_range(lo..=hi),
        })
        .collect()
}

/// Parameters for one trial of `id` under `config`.
pub fn sample_params<R: Rng + ?Sized>(
    rng: &mut R,
    id: CheckId,
    config: &SamplerConfig,
) -> Vec<f64> {
    let mut params = match (id, config.manifold) {
        (CheckId::Conjecture1, Some(m)) => {
            let free = sample_kinds(
                rng,
                &vec![ParamKind::Order; m.check().arity()],
                config.order_range,
            );
            m.expand(&free)
        }
        (CheckId::TheoremB, _) => loop {
            let mut p = sample_kinds(rng, &param_kinds(id), config.order_range);
            p.sort_by(f64::total_cmp);
            if p[0] < p[1] && p[1] < p[2] {
                break p;
            }
        },
        _ => sample_kinds(rng, &param_kinds(id), config.order_range),
    };
    for &(i, v) in &config.pinned {
        if let Some(slot) = params.get_mut(i) {
            *slot = v;
        }
    }
    params
}

/// The lowest scaled residual seen in a campaign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstCase {
    pub trial: u64,
    pub scaled_residual: f64,
    pub residual: f64,
    pub scale: f64,
    pub precision: Precision,
    pub law: DiscreteLaw,
    pub params: Vec<f64>,
}

/// A residual that survived double-double re-evaluation and either carries an
/// exact negative certificate or lies below `−FINDING_THRESHOLD·scale`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub trial: u64,
    pub law: DiscreteLaw,
    pub params: Vec<f64>,
    /// Double-precision residual.
    pub residual: f64,
    pub dd_residual: f64,
    pub scale: f64,
    pub exact: Option<ExactVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzReport {
    pub check_id: CheckId,
    pub seed: u64,
    pub rational_mode: bool,
    pub manifold: Option<Manifold>,
    pub trials_run: u64,
    /// Trials whose moments overflowed.
    pub skipped: u64,
    /// Trials re-evaluated in double-double.
    pub precision_escalations: u64,
    /// Double-precision failures that passed in double-double.
    pub cleared_by_escalation: u64,
    /// Double-double failures whose exact residual is non-negative.
    pub cleared_by_certificate: u64,
    /// Double-double failures too small to report as violations.
    pub near_misses: u64,
    pub worst: Option<WorstCase>,
    pub violations: Vec<Violation>,
}

impl FuzzReport {
    fn empty(id: CheckId, config: &SamplerConfig) -> Self {
        Self {
            check_id: id,
            seed: config.seed,
            rational_mode: config.rational_mode,
            manifold: config.manifold,
            trials_run: 0,
            skipped: 0,
            precision_escalations: 0,
            cleared_by_escalation: 0,
            cleared_by_certificate: 0,
            near_misses: 0,
            worst: None,
            violations: Vec::new(),
        }
    }

    /// Associative and commutative: counts add, the worst case is the minimum
    /// by `(scaled_residual, trial)`, violations are kept sorted by trial.
    fn merge(mut self, other: Self) -> Self {
        self.trials_run += other.trials_run;
        self.skipped += other.skipped;
        self.precision_escalations += other.precision_escalations;
        self.cleared_by_escalation += other.cleared_by_escalation;
        self.cleared_by_certificate += other.cleared_by_certificate;
        self.near_misses += other.near_misses;
        self.worst = match (self.worst.take(), other.worst) {
            (Some(a), Some(b)) => {
                if (b.scaled_residual, b.trial) < (a.scaled_residual, a.trial) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
            (a, b) => a.or(b),
        };
        self.violations.extend(other.violations);
        self.violations.sort_by_key(|v| v.trial);
        self
    }

    pub fn has_violations(&self) -> bool {
        !self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Evaluates one `(law, params)` candidate with escalation and certification
/// and folds it into a single-trial report.
fn evaluate_trial(
    id: CheckId,
    config: &SamplerConfig,
    trial: u64,
    law: &DiscreteLaw,
    exact: Option<&RationalLaw>,
    params: &[f64],
) -> FuzzReport {
    let mut out = FuzzReport::empty(id, config);
    out.trials_run = 1;

    let double = match scaled_residual(id, law, params, Precision::Double) {
        Ok(r) => r,
        Err(_) => {
            out.skipped = 1;
            return out;
        }
    };
    let ((mut residual, mut scale), mut precision) = (double, Precision::Double);
    let mut dd_residual = None;
    if double.0.is_nan() || double.0 < ESCALATION_FACTOR * tolerance(double.1) {
        match scaled_residual(id, law, params, Precision::DoubleDouble) {
            Ok(r) => {
                out.precision_escalations = 1;
                (residual, scale) = r;
                precision = Precision::DoubleDouble;
                dd_residual = Some(residual);
                if double.0 < -tolerance(double.1) && residual >= -tolerance(scale) {
                    out.cleared_by_escalation = 1;
                }
            }
            Err(_) => {
                out.skipped = 1;
                return out;
            }
        }
    }

    let scaled = if scale > 0.0 { residual / scale } else { 0.0 };
    out.worst = Some(WorstCase {
        trial,
        scaled_residual: scaled,
        residual,
        scale,
        precision,
        law: law.clone(),
        params: params.to_vec(),
    });

    let Some(dd) = dd_residual else { return out };
    if dd >= -tolerance(scale) {
        return out;
    }
    let verdict = exact.and_then(|r| certify(id, r, params).ok());
    let is_violation = match &verdict {
        Some(v) => v.sign == Sign::Negative,
        None => dd < -FINDING_THRESHOLD * scale,
    };
    if is_violation {
        out.violations.push(Violation {
            trial,
            law: law.clone(),
            params: params.to_vec(),
            residual: double.0,
            dd_residual: dd,
            scale,
            exact: verdict,
        });
    } else if verdict.is_some() {
        out.cleared_by_certificate = 1;
    } else {
        out.near_misses = 1;
    }
    out
}

fn run_trial(id: CheckId, config: &SamplerConfig, trial: u64) -> FuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ trial);
    let (law, exact) = if config.rational_mode {
        let r = random_rational_law(&mut rng, config.atom_count_range, RATIONAL_MAX_TERM);
        (r.to_float_law().expect("rational law converts"), Some(r))
    } else {
        (random_law(&mut rng, &config.shape()), None)
    };
    let params = sample_params(&mut rng, id, config);
    evaluate_trial(id, config, trial, &law, exact.as_ref(), &params)
}

/// Runs `config.trials` seeded trials of `id` on the global rayon pool.
pub fn fuzz(id: CheckId, config: &SamplerConfig) -> Result<FuzzReport> {
    config.validate()?;
    if config.manifold.is_some() && id != CheckId::Conjecture1 {
        return Err(Error::InvalidConfig(
            "a manifold restriction applies to conjecture1 only".into(),
        ));
    }
    Ok((0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(id, config, i))
        .reduce(|| FuzzReport::empty(id, config), FuzzReport::merge))
}

/// [`fuzz`] on a dedicated pool of `jobs` threads.
pub fn fuzz_with_jobs(id: CheckId, config: &SamplerConfig, jobs: usize) -> Result<FuzzReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| fuzz(id, config))
}

/// One fuzz campaign per check in `ids`, all with the same configuration.
pub fn run_suite(ids: &[CheckId], config: &SamplerConfig) -> Result<Vec<FuzzReport>> {
    ids.iter().map(|&id| fuzz(id, config)).collect()
}

/// Largest disagreement between Conjecture 1 on a reduction manifold and the
/// theorem it reduces to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    pub trials: u64,
    pub seed: u64,
    pub skipped: u64,
    pub theorem4_max_scaled_gap: f64,
    pub theorem5_max_scaled_gap: f64,
    /// Both gaps are within [`REDUCTION_TOLERANCE`].
    pub passed: bool,
}

/// Allowed `|conjecture1 − theorem| / scale` on a manifold.
pub const REDUCTION_TOLERANCE: f64 = 1e-10;

/// Compares Conjecture 1 on both reduction manifolds with Theorems 4 and 5
/// over random laws, evaluating both sides in double-double.
pub fn reduction_crosscheck(trials: u64, seed: u64) -> ReductionReport {
    let gaps: Vec<Option<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i);
            let law = random_law(&mut rng, &LawShape::default());
            let orders: Vec<f64> = (0..4).map(|_| rng.random_range(-6.0..=6.0)).collect();
            let forms = Forms::double_double(&law);
            let gap = |m: Manifold, free: &[f64]| -> Option<f64> {
                let conj = forms.residual(CheckId::Conjecture1, &m.expand(free)).ok()?;
                let thm = forms.residual(m.check(), free).ok()?;
                let scale = conj.scale.to_f64().max(thm.scale.to_f64());
                let diff = (conj.residual - thm.residual).abs().to_f64();
                Some(if scale > 0.0 { diff / scale } else { diff })
            };
            Some((
                gap(Manifold::Theorem4, &orders[..3])?,
                gap(Manifold::Theorem5, &orders)?,
            ))
        })
        .collect();
    let skipped = gaps.iter().filter(|g| g.is_none()).count() as u64;
    let (g4, g5) = gaps
        .iter()
        .flatten()
        .fold((0.0f64, 0.0f64), |(a, b), &(x, y)| (a.max(x), b.max(y)));
    ReductionReport {
        trials,
        seed,
        skipped,
        theorem4_max_scaled_gap: g4,
        theorem5_max_scaled_gap: g5,
        passed: g4 <= REDUCTION_TOLERANCE && g5 <= REDUCTION_TOLERANCE,
    }
}
