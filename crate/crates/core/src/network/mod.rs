//! Network data model `w = G w + r + v`, simulation and exact I/O-map oracles.

mod case_study;
mod model;
mod netfile;
mod random;
mod sim;
mod truth;

pub use case_study::{build_case_study, CASE_STUDY_NODES, CASE_STUDY_TARGET};
pub use model::{LocalTopology, NetworkModel, WELL_POSED_CONDITION};
pub use netfile::{load_network, parse_network, save_network, write_network};
pub use random::{random_fir_network, RandomNetworkSpec};
pub use sim::{simulate, simulate_signals, ExcitationSpec, NoiseNodes, SignalRecord};
pub use truth::{
    is_internally_stable, true_t, true_t_impulse, winding_number, FreqResponseMatrix, StabilityCheck,
};
