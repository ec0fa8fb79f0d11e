//! Hahn-echo decay from the cluster correlation expansion.

mod ensemble;
mod expansion;
mod kernels;
mod system;

pub use ensemble::{
    adaptive_echo, default_times, ensemble_average, ensemble_average_with, EchoCurve, EchoMeta, EnsembleParams,
    ADAPTIVE_T_MAX, DEFAULT_T_MAX,
};
pub use expansion::{
    cce_combine, cluster_contributions, cluster_factor, configuration_echo, CceOptions, ClusterContribution, Kernel,
    DIVISION_GUARD,
};
pub use kernels::{cluster_echo_fast, hahn_echo_exact, pair_echo_fast};
pub use system::{pair_lookup, ClusterSystem, EchoContext, PairLookup, MAX_CLUSTER};
