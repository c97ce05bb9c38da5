//! Delay estimation between two weak incoherent signals from the
//! frequency-resolved interference of one of their photons with a reference
//! photon on a balanced beam splitter.
//!
//! Times are expressed in units of the single-photon temporal width
//! `sigma_t` unless a [`SpectralProfile`] with another width is supplied;
//! frequencies are in the reciprocal unit.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod direct;
pub mod error;
pub mod estimation;
pub mod fisher;
pub mod interference;
pub mod quadrature;
pub mod sampling;
pub mod spectral;

pub use direct::{arrival_density, trd_fisher_binned, trd_fisher_unbinned, BinnedFisher, DetectionGrid};
pub use error::{Error, Result};
pub use estimation::{
    fit_inverse_n, log_likelihood, mle_estimate, monte_carlo_study, FitResult, MleResult, MonteCarloReport, NRecord,
    ReportDocument, StudyOptions,
};
pub use fisher::{
    bucket_fisher, crb, fisher_asymptote, fisher_indistinguishable, fisher_partial, precision_budget, quantum_limit,
    EtaConvention, FisherMethod, FisherReport, PrecisionBudget,
};
pub use interference::{
    amplitude_oracle, conditional_bunching_probability, delay_probability, joint_probability, ExperimentConfig,
    Outcome, PortPattern,
};
pub use sampling::{sample_batch, sample_outcome, SampleSet};
pub use spectral::SpectralProfile;
