//! Fidelity, quantum and classical Fisher information, and the bulk phase.

pub mod bulk;
pub mod counting;
pub mod fidelity;
pub mod orders;
pub mod qfi;

pub use bulk::{bulk_crossover_time, bulk_phase, bulk_qfi, BulkQfi, BulkState, BulkWavenumber};
pub use counting::{classical_fisher, phonon_distribution, required_j_max, CfiResult, CountDistribution, CountVariant};
pub use fidelity::{fidelity_from_pair, uhlmann_fidelity, FidelityBreakdown, LocalPair};
pub use orders::{qfi_term_orders, temperature_correction_scan, TemperatureScan, TermOrderReport};
pub use qfi::{qfi, ChannelFamily, DifferencingPolicy, QfiResult, StateFamily};
