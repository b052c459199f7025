//! Small-deviation experiments: Monte-Carlo small-ball probabilities, rate
//! and constant fits, the Laplace-transform route, dominance checks and
//! closed-form Brownian references.

mod dominance;
mod estimate;
mod fit;
mod laplace;
mod lmp;
mod oracle;

pub use dominance::{
    dominance_check, DominanceBranch, DominancePoint, DominanceReport, DKW_CONFIDENCE,
};
pub use estimate::{
    mc_small_ball, norm_samples, Estimator, SmallBallEstimate, SmallBallOptions, SmallBallRun,
    MIN_SAMPLES,
};
pub use fit::{fit_rate, ConstantPoint, RateFit};
pub use laplace::{log_laplace, LaplacePoint, LaplaceSummary, SubadditivityCheck};
pub use lmp::{lmp_negligible, NegligibleReport, NegligibleRow, MIN_HITS};
pub use oracle::{bm_sup_oracle, bridge_stay_probability, tauberian_constant};
