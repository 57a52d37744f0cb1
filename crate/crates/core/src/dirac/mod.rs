//! Dirac phases built from exterior algebras and their pairing with Fermi
//! projections.

mod exterior;
mod pairing;

pub use exterior::{creation, det_winding, dirac_f, dirac_phase, CMatrix, ExteriorAlgebra, SpinorReduction};
pub use pairing::{
    auto_threshold, gapped_projection, index_pairing, kitaev_chern_oracle, pairing_window, run_pairing_experiment,
    weak_phase_experiment, ExperimentOptions, LadderStep, OracleResult, PairingExperiment, PairingOptions,
    PairingResult, Tripartition, WindowPairing,
};
