//! Stochastic electrons: forward and backward D-process paths driven by the
//! complex velocity of a wavefunction, ensemble statistics, the probability
//! at the mean position and the radiation formula built on it.

pub mod density;
pub mod ensemble;
pub mod noise;
pub mod radiation;
pub mod wavepacket;

pub use density::{fokker_planck_residual, osmotic_check, FpOptions, FpReport, Kde3, OsmoticReport};
pub use ensemble::{
    dprocess_step, run_ensemble, stochastic_ll_step, DPath, Direction, EnsembleConfig, EnsembleDynamics, EnsembleRun,
    EnsembleState, InitialProbability, LlWalker, SliceStats,
};
pub use noise::{path_rng, wiener_increment};
pub use radiation::{a_dot, delta_p_diagnostic, effective_radiation_field, prob_ave, radiation_formula, MeanPath, RadiationRate};
pub use wavepacket::{complex_velocity, ComplexFourVector, DriftSource, Wavepacket, WavepacketSpec};
