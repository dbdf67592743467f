//! Partition functions, pressure, Kolmogorov–Sinai entropy of Markov and
//! product measures, equilibrium states and variational certificates.

mod equilibrium;
mod measure;
mod partition;
mod pressure;
mod transfer;
mod variational;

pub use equilibrium::{equilibrium_state_1d, EquilibriumState, CERTIFICATE_TOL};
pub use measure::{integral_of_setmap, ks_entropy, EntropyReport, IntegralReport, MarkovMeasure};
pub use partition::{log_partition_function, log_partition_of, partition_function};
pub use pressure::{
    pressure, pressure_of_realization, pressure_with_cap, MethodComparison, PressureEstimate, PressureMethod,
    PressurePoint, RealizationPressure, SandwichPoint, AGREEMENT_TOL, CONVENTION, LABEL_EXACT, LABEL_UPPER_BOUND,
};
pub use transfer::{PerronData, TransferMatrix};
pub use variational::{
    variational_certificate, variational_value, MeasureFamily, PotentialSource, VariationalOptions, VariationalReport,
};
