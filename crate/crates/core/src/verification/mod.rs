//! Empirical checks of the differentiability and regularity results:
//! remainder decay of the first-order expansion, a priori estimates, the
//! discrete maximum principle and semismooth Newton convergence.

pub mod estimates;
pub mod max_principle;
pub mod newton;
pub mod remainder;

pub use estimates::{
    check_energy_estimate, check_estimates, check_first_order_estimates, check_linf_estimate,
    EstimateReport, EstimateSource, FirstOrderEstimates,
};
pub use max_principle::{check_max_principle, MaxPrincipleReport};
pub use newton::{semismooth_newton_solve, NewtonOptions, NewtonRunReport};
pub use remainder::{run_remainder_study, RemainderReport, RemainderStudy, DEFAULT_LADDER};
