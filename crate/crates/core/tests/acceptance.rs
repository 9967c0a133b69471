//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p mominq-core --test acceptance -- 1 4`.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mominq_core::divergence::ks;
use mominq_core::sample::{random_law, random_pair, LawShape};
use mominq_core::{
    evaluate_form, exact_phi, fuzz, fuzz_with_jobs, kl_bounds, lambda, lambda_dd, law_from_pair,
    lemma3_criterion, reduction_crosscheck, run_suite, symmetric_measures, theorem7_residuals,
    theorem8_residuals, CheckId, DistributionPair, FiniteDistribution, FormId, FuzzReport, LawKind,
    Lemma3Coefficients, Precision, RationalLaw, SamplerConfig, Sign,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 8] = [
    (1, "sharp example identity", sharp_example),
    (2, "proved-inequality suites", proved_suites),
    (3, "bridge identity", bridge_identity),
    (4, "KL bounds ordering and improvement", kl_bound_ordering),
    (
        5,
        "symmetric divergence inequalities",
        symmetric_divergences,
    ),
    (6, "near-singular accuracy", near_singular_accuracy),
    (7, "conjecture campaigns", conjecture_campaigns),
    (
        8,
        "quadratic form criterion vs brute force",
        lemma3_brute_force,
    ),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::new(false, format!("panicked: {msg}"))
        });
        let status = if verdict.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} [{id}] {name}: {} ({:.2}s)",
            verdict.detail,
            start.elapsed().as_secs_f64()
        );
        if !verdict.pass {
            failures += 1;
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow(x: &BigRational, n: u32) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, _| acc * x)
}

/// `C(p,q)(x − y)^14` for the two-point law with masses `p, q = 1 − p`.
fn sharp_value(x: &BigRational, y: &BigRational, p: &BigRational) -> BigRational {
    let q = BigRational::one() - p;
    let d2 = pow(&(p - &q), 2);
    let poly = int(35) + int(11) * &d2 + int(17) * pow(&d2, 2) + pow(&d2, 3);
    pow(&(p * &q), 4) / int(5_529_600) * poly * pow(&(x - y), 14)
}

fn sharp_example() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases = vec![(int(2), int(1), ratio(1, 2))];
    while cases.len() < 51 {
        let x = ratio(rng.random_range(1..=12), rng.random_range(1..=12));
        let y = ratio(rng.random_range(1..=12), rng.random_range(1..=12));
        let m = rng.random_range(2..=12);
        let p = ratio(rng.random_range(1..m), m);
        if x != y {
            cases.push((x, y, p));
        }
    }

    let mut worst_rel = 0.0f64;
    for (i, (x, y, p)) in cases.iter().enumerate() {
        let law = RationalLaw::two_point(x.clone(), y.clone(), p.clone()).unwrap();
        let exact = exact_phi(&law, 2, 4, 2, 6).unwrap();
        let expected = sharp_value(x, y, p);
        if exact != expected {
            return Verdict::new(false, format!("case {i}: exact {exact} != {expected}"));
        }
        let float = evaluate_form(
            FormId::Phi,
            &law.to_float_law().unwrap(),
            &[2.0, 4.0, 2.0, 6.0],
            Precision::DoubleDouble,
        )
        .unwrap();
        let reference = expected.to_f64().unwrap();
        worst_rel = worst_rel.max((float - reference).abs() / reference.abs());
    }
    let elapsed = start.elapsed();
    Verdict::new(
        worst_rel <= 1e-9 && elapsed < Duration::from_secs(5),
        format!(
            "{} laws exact, float max rel err {worst_rel:.1e}, {:.2}s",
            cases.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn proved_suites() -> Verdict {
    let start = Instant::now();
    let reports = run_suite(&CheckId::PROVED, &SamplerConfig::new(10_000, 7)).unwrap();
    let elapsed = start.elapsed();
    let violations: usize = reports.iter().map(|r| r.violations.len()).sum();
    let trials: u64 = reports.iter().map(|r| r.trials_run).sum();
    let skipped: u64 = reports.iter().map(|r| r.skipped).sum();
    let escalations: u64 = reports.iter().map(|r| r.precision_escalations).sum();
    let worst = reports
        .iter()
        .filter_map(|r| r.worst.as_ref().map(|w| (r.check_id, w.scaled_residual)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    Verdict::new(
        violations == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{} checks, {trials} trials, {skipped} skipped, {escalations} escalated, \
             {violations} violations, worst scaled residual {worst:?}",
            reports.len()
        ),
    )
}

const BRIDGE_ORDERS: [f64; 9] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0];

fn bridge_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let pair = random_pair(&mut rng);
        let law = law_from_pair(LawKind::QOverQRatio, &pair).unwrap();
        for s in BRIDGE_ORDERS {
            let forward = ks(&pair, s).unwrap();
            let backward = ks(&pair.reversed(), s).unwrap();
            let e1 = (lambda(&law, s).unwrap() - forward).abs() / (1.0 + forward);
            let e2 = (lambda(&law, 1.0 - s).unwrap() - backward).abs() / (1.0 + backward);
            worst = worst.max(e1).max(e2);
        }
    }
    Verdict::new(
        worst <= 1e-10,
        format!("1000 pairs x 9 orders, max scaled gap {worst:.1e}"),
    )
}

/// `K(p‖q)` for `p = (1/2, 1/2)`, `q = (1/4, 3/4)`: `(1/2) ln(4/3)`.
const WORKED_KL: f64 = 0.143_841_036_225_890_45;

fn kl_bound_ordering() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_order = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let r = kl_bounds(&random_pair(&mut rng));
        let tol = 1e-10 * (1.0 + r.kl);
        worst_order = worst_order
            .max((r.f1 - r.kl) / tol)
            .max((r.kl - r.f2) / tol);
    }
    let ordered = worst_order <= 1.0;

    let mut strict = 0;
    let mut min_lower_gain = f64::INFINITY;
    let mut min_upper_gain = f64::INFINITY;
    let mut tested = 0;
    while tested < 100 {
        let pair = random_pair(&mut rng);
        if pair.total_variation() < 0.05 {
            continue;
        }
        tested += 1;
        let r = kl_bounds(&pair);
        min_lower_gain = min_lower_gain.min(r.f1 - r.h2);
        min_upper_gain = min_upper_gain.min(r.classical_upper - r.f2);
        if r.f1 > r.h2 && r.f2 < r.classical_upper {
            strict += 1;
        }
    }

    let worked = DistributionPair::new(
        FiniteDistribution::new(vec![0.5, 0.5]).unwrap(),
        FiniteDistribution::new(vec![0.25, 0.75]).unwrap(),
    )
    .unwrap();
    let w = kl_bounds(&worked);
    let worked_ok = (w.kl - WORKED_KL).abs() <= 1e-15 && w.ordered && w.f1 <= w.kl && w.kl <= w.f2;

    Verdict::new(
        ordered && strict == 100 && worked_ok,
        format!(
            "1000 pairs ordered: {ordered}; strict on {strict}/100 (min gains {min_lower_gain:.1e}, \
             {min_upper_gain:.1e}); worked pair f1 {:.6} <= kl {:.6} <= f2 {:.6}",
            w.f1, w.kl, w.f2
        ),
    )
}

fn symmetric_divergences() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut worst_half = 0.0f64;
    for i in 0..1000 {
        let pair = random_pair(&mut rng);
        let s = rng.random_range(-4.0..=4.0);
        let a = rng.random_range(-4.0..=4.0);
        let b = rng.random_range(-4.0..=4.0);
        let (product, sum) = theorem7_residuals(s, &pair).unwrap();
        let (s_res, p_res) = theorem8_residuals(a, b, &pair).unwrap();
        if !(product.passes() && sum.passes() && s_res.passes() && p_res.passes()) {
            failures.push(i);
        }
        let (s_half, p_half) = symmetric_measures(0.5, &pair).unwrap();
        worst_half = worst_half.max(s_half.abs()).max(p_half.abs());
    }
    Verdict::new(
        failures.is_empty() && worst_half <= 1e-12,
        format!("1000 pairs, failing pairs {failures:?}, max |S|,|P| at 1/2 {worst_half:.1e}"),
    )
}

const NEAR_SINGULAR: [f64; 8] = [
    1e-3,
    -1e-3,
    5e-4,
    -5e-4,
    1.0 + 1e-3,
    1.0 - 1e-3,
    1.0 + 5e-4,
    1.0 - 5e-4,
];

fn near_singular_accuracy() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_series = 0.0f64;
    let mut worst_lambda = 0.0f64;
    for _ in 0..1000 {
        let law = random_law(&mut rng, &LawShape::default());
        let cache = law.log_moments();
        for s in NEAR_SINGULAR {
            let reference = lambda_dd(&law, s).unwrap().to_f64();
            let series = if s.abs() < 0.5 {
                cache.near_zero(s).0
            } else {
                cache.near_one(s).0
            };
            worst_series = worst_series.max((series - reference).abs() / reference.abs());
            let value = lambda(&law, s).unwrap();
            worst_lambda = worst_lambda.max((value - reference).abs() / reference.abs());
        }
    }
    Verdict::new(
        worst_series <= 1e-9 && worst_lambda <= 1e-9,
        format!(
            "1000 laws x 8 orders, max rel err series {worst_series:.1e}, lambda {worst_lambda:.1e}"
        ),
    )
}

fn certified(report: &FuzzReport) -> bool {
    report.violations.iter().all(|v| {
        v.exact.as_ref().is_some_and(|e| e.sign == Sign::Negative)
            || v.dd_residual < -1e-6 * v.scale
    })
}

fn conjecture_campaigns() -> Verdict {
    let config = SamplerConfig::new(100_000, 42);
    let start = Instant::now();
    let reports: Vec<FuzzReport> = [CheckId::Conjecture1, CheckId::Conjecture2]
        .into_iter()
        .map(|id| fuzz(id, &config).unwrap())
        .collect();
    let elapsed = start.elapsed();

    // Determinism: the same campaign on a different worker count.
    let small = SamplerConfig::new(5_000, 42);
    let deterministic = [CheckId::Conjecture1, CheckId::Conjecture2]
        .into_iter()
        .all(|id| {
            fuzz_with_jobs(id, &small, 1).unwrap().to_json()
                == fuzz_with_jobs(id, &small, 3).unwrap().to_json()
        });

    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    for r in &reports {
        std::fs::write(dir.join(format!("{}.json", r.check_id)), r.to_json()).unwrap();
    }

    let reduction = reduction_crosscheck(1000, 42);
    let summary = reports
        .iter()
        .map(|r| {
            format!(
                "{} {} trials, {} skipped, {} violations",
                r.check_id,
                r.trials_run,
                r.skipped,
                r.violations.len()
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Verdict::new(
        elapsed < Duration::from_secs(600)
            && deterministic
            && reports.iter().all(certified)
            && reduction.passed,
        format!(
            "{summary}; {:.1}s; deterministic: {deterministic}; reduction gaps {:.1e}, {:.1e}; \
             reports in {}",
            elapsed.as_secs_f64(),
            reduction.theorem4_max_scaled_gap,
            reduction.theorem5_max_scaled_gap,
            dir.display()
        ),
    )
}

/// Minimum of `F` over the 101 x 101 integer grid on `[-50, 50]²` and at its
/// stationary point, when one exists.
fn brute_force_min(k: &Lemma3Coefficients) -> f64 {
    let mut min = f64::INFINITY;
    for i in -50..=50 {
        for j in -50..=50 {
            min = min.min(k.value(f64::from(i), f64::from(j)));
        }
    }
    let d = k.alpha * k.beta - k.gamma * k.gamma;
    if d != 0.0 {
        let a = (k.gamma * k.epsilon - k.beta * k.delta) / d;
        let c = (k.gamma * k.delta - k.alpha * k.epsilon) / d;
        min = min.min(k.value(a, c));
    }
    min
}

/// Coefficient tuples kept away from the psd boundary so the finite grid can
/// witness every negative value: `|α| >= 0.05`, `|D| >= 0.25`, and for
/// `α, D > 0` an `E` offset of at least `1e-3`. Half the draws have
/// `α, D > 0`, and about half of those are psd.
fn random_tuple(rng: &mut ChaCha8Rng) -> Lemma3Coefficients {
    loop {
        let definite = rng.random_bool(0.5);
        let mut u = || rng.random_range(-2.0f64..=2.0);
        let (mut alpha, mut beta, gamma, delta, epsilon) = (u(), u(), u(), u(), u());
        let offset = u();
        if definite {
            // α in [0.05, 2], D in [0.25, 4]
            alpha = 0.05 + (alpha + 2.0) * 0.4875;
            let d = 0.25 + (beta + 2.0) * 0.9375;
            beta = (d + gamma * gamma) / alpha;
        }
        let d = alpha * beta - gamma * gamma;
        if alpha.abs() < 0.05 || d.abs() < 0.25 {
            continue;
        }
        let eta = if alpha > 0.0 && d > 0.0 {
            if offset.abs() < 1e-3 {
                continue;
            }
            let cross = alpha * epsilon - gamma * delta;
            (delta * delta + cross * cross / d) / alpha + offset
        } else {
            offset
        };
        return Lemma3Coefficients::new(alpha, beta, gamma, delta, epsilon, eta);
    }
}

fn lemma3_brute_force() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tuples: Vec<Lemma3Coefficients> = (0..1000).map(|_| random_tuple(&mut rng)).collect();
    // Boundary cases decided without the completed square.
    tuples.extend([
        Lemma3Coefficients::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
        Lemma3Coefficients::new(1.0, 1.0, 1.0, 0.0, 1.0, 0.0),
        Lemma3Coefficients::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0),
        Lemma3Coefficients::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0),
        Lemma3Coefficients::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
        Lemma3Coefficients::new(0.0, 1.0, 0.0, 0.0, 0.0, -1.0),
    ]);

    let mut mismatches = Vec::new();
    let mut psd_count = 0;
    for (i, k) in tuples.iter().enumerate() {
        let verdict = lemma3_criterion(k);
        let brute = brute_force_min(k) >= -1e-9 * (k.eta.abs() + 1.0);
        psd_count += usize::from(verdict.psd);
        if verdict.psd != brute {
            mismatches.push(i);
        }
    }
    Verdict::new(
        mismatches.is_empty(),
        format!(
            "{} tuples ({psd_count} psd), mismatches {mismatches:?}",
            tuples.len()
        ),
    )
}
