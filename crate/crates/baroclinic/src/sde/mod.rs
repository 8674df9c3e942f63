//! Stochastic time integration: noise spectrum, semi-implicit stepping,
//! checkpoints and the inviscid-limit rescaling.

mod integrator;
mod noise;
mod rescale;

pub use integrator::{
    resume, semi_implicit_step, simulate, BlowUp, IntegratorConfig, Observer, RngPosition,
    SimulateError, SimulationOutcome, TrajectoryCheckpoint, CHECKPOINT_VERSION,
};
pub use noise::{Layer, NoiseEntry, NoiseError, NoiseSpectrum};
pub use rescale::{rescale_config, RescaleError, RescaledSystem};
