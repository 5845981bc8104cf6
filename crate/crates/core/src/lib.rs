//! One-mutation model of cancer age incidence.
//!
//! Mutations arrive as a non-homogeneous Poisson process with rate μ(t); each
//! expands independently with probability σ, so successful mutations form a
//! Poisson process with cumulative mean M(t) = σ∫₀ᵗμ. The probability of
//! cancer by age t is I(t) = 1 − exp(−M(t)) ≈ M(t).
//!
//! - [`rate`]: μ(t), σ and the cumulative integrals.
//! - [`process`]: event sampling (inversion and thinning), marking, Poisson pmf.
//! - [`expansion`]: Moran fixation and branching survival probabilities.
//! - [`incidence`]: analytic incidence curves.
//! - [`calibration`]: power-law fits and rate recovery from incidence.
//! - [`cohort`]: Monte Carlo cohorts and validation against the analytic curve.
//! - [`cli`]: the `oncopoisson` command line.

pub mod calibration;
pub mod cli;
pub mod cohort;
pub mod error;
pub mod expansion;
pub mod incidence;
pub mod io;
pub mod model_spec;
pub mod process;
pub mod quadrature;
pub mod rate;
pub mod selfcheck;
pub mod stats;
pub mod stream;

pub use calibration::{fit_power_law, power_law_mu0, rate_from_incidence, PowerLawFit, RateEstimate};
pub use cohort::{simulate_cohort, validate_against_analytic, CohortConfig, CohortResult, ValidationReport};
pub use error::{Error, Result};
pub use expansion::{branching_survival, extinction_fixed_point, moran_fixation, BranchingParams, MoranParams};
pub use incidence::{incidence_approx, incidence_exact, incidence_with_delay, IncidenceCurve, Provenance};
pub use process::{first_success_time, mark_events, poisson_pmf, sample_nhpp, EventTrajectory};
pub use rate::{RateModel, SuccessModel};
pub use stream::RandomStream;
