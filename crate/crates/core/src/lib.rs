//! Moment-difference functionals of discrete laws, the convexity and
//! log-convexity forms built from them, checks of the inequalities those forms
//! satisfy, f-divergence bounds, an exact rational oracle and a seeded
//! counterexample search.
//!
//! ```
//! use mominq_core::{lambda, DiscreteLaw};
//!
//! let law = DiscreteLaw::new(&[(1.0, 0.5), (2.0, 0.5)], false).unwrap();
//! assert!((lambda(&law, 2.0).unwrap() - 0.125).abs() < 1e-15);
//! ```

pub mod dd;
pub mod divergence;
pub mod error;
pub mod exact;
pub mod forms;
pub mod io;
pub mod law;
pub mod sample;
pub mod scalar;
pub mod search;
pub mod sum;

pub use dd::DoubleDouble;
pub use divergence::{
    csiszar, divergence, kl_bounds, law_from_pair, symmetric_measures, theorem7_residuals,
    theorem8_residuals, DistributionPair, FiniteDistribution, KLBoundsReport, LawKind, Measure,
};
pub use error::{Error, Result};
pub use exact::{
    certify, exact_lambda, exact_phi, exact_power_moment, exact_xi, ExactLambda, ExactVerdict,
    RationalLaw, Sign,
};
pub use forms::{
    check_inequality, check_inequality_from, check_with_precision, evaluate_form, lemma3_criterion,
    mu, phi, psi_form, sigma, tau, theta, w_form, xi, CheckId, FormId, FormParams, Forms,
    LambdaSource, Lemma3Coefficients, Lemma3Verdict, Residual, ResidualReport,
};
pub use law::{
    f_pointwise, lambda, lambda_dd, lambda_with, make_law, power_moment, Branch, DiscreteLaw,
    LogMomentCache, OrderParam, Precision, SINGULAR_WINDOW,
};
pub use search::{
    fuzz, fuzz_with_jobs, reduction_crosscheck, run_suite, FuzzReport, Manifold, ReductionReport,
    SamplerConfig,
};
