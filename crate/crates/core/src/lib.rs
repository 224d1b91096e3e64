//! Optimal reinsurance between an insurer and a reinsurer who each report a
//! risk-aversion level, possibly not their true one.
//!
//! Risk is priced with a one-parameter family of distortion risk measures.
//! Given the reported levels the crate computes the Pareto-optimal cover,
//! the premium from asymmetric Nash bargaining, the resulting welfare gains,
//! best responses, and the Nash and Stackelberg equilibria of the reporting
//! game. Each analytic result has a brute-force counterpart.

pub mod bargaining;
pub mod cli;
pub mod contract;
pub mod distributions;
pub mod error;
pub mod game;
pub mod quadrature;
pub mod riskmeasure;
pub mod roots;

pub use bargaining::{welfare, GameSpec, WelfareReport};
pub use contract::{pareto_indemnity_general, pareto_indemnity_parametric, Contract, Cover, Indemnity};
pub use distributions::LossDistribution;
pub use error::{Error, Result};
pub use game::{nash_equilibria, stackelberg, verify_equilibria_bruteforce, BestResponse, Leader};
pub use riskmeasure::{rho, DistortionFamily, PayoutSlice, RiskAversion, RiskMeasure};

/// The guide's snippets, compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/risk-measures.md")]
    pub struct RiskMeasures;
    #[doc = include_str!("../../../book/src/cover.md")]
    pub struct Cover;
    #[doc = include_str!("../../../book/src/bargaining.md")]
    pub struct Bargaining;
    #[doc = include_str!("../../../book/src/equilibria.md")]
    pub struct Equilibria;
    #[doc = include_str!("../../../book/src/verification.md")]
    pub struct Verification;
    #[doc = include_str!("../../../book/src/command-line.md")]
    pub struct CommandLine;
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadMe;
