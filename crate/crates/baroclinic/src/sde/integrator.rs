//! Semi-implicit Euler-Maruyama stepping and trajectory management.
//!
//! One step solves, mode by mode,
//!
//!   (A1 + dt (nu A2 + A3)) u+ = A1 u - dt B(u) + dzeta
//!
//! so the stiff linear part is implicit (exact 2x2 solves) while the
//! advection term and the additive noise increment enter explicitly.
//! Trajectories are reproducible: a counter-based generator is seeded
//! from (seed, stream) and its position is part of every checkpoint, so a
//! restarted run continues bit-exactly.

use crate::model::{a1_apply, b_nonlinear, ModelParams, PerModeOperators, State};
use crate::num::Real;
use crate::sphere::{SphereError, SphericalGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::noise::NoiseSpectrum;

#[derive(Debug, thiserror::Error)]
pub enum SimulateError {
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error("checkpoint not usable: {0}")]
    Checkpoint(String),
}

fn default_stream() -> u64 {
    0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub seed: u64,
    /// Sub-stream of the generator; ensemble members get distinct values.
    #[serde(default = "default_stream")]
    pub stream: u64,
    /// Initial time span discarded before sampling starts.
    pub burn_in: T,
    /// Sampling stride in steps.
    pub sample_every: usize,
    /// Divergence threshold on |||u|||_2.
    pub blowup_norm: T,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<(), SimulateError> {
        let fail = |msg: &str| Err(SimulateError::InvalidConfig(msg.to_string()));
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return fail("dt must be positive and finite");
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return fail("t_end must be nonnegative and finite");
        }
        if !(self.burn_in >= T::zero()) || (self.t_end > T::zero() && self.burn_in >= self.t_end) {
            return fail("burn_in must satisfy 0 <= burn_in < t_end");
        }
        if self.sample_every == 0 {
            return fail("sample_every must be at least 1");
        }
        if !(self.blowup_norm > T::zero()) {
            return fail("blowup_norm must be positive");
        }
        Ok(())
    }

    fn steps(&self, span: T) -> u64 {
        (span / self.dt).round().to_u64().unwrap_or(0)
    }
}

/// Receives the state every `sample_every` steps once burn-in has passed.
pub trait Observer<T> {
    fn observe(&mut self, time: T, state: &State<T>);
}

impl<T, F: FnMut(T, &State<T>)> Observer<T> for F {
    fn observe(&mut self, time: T, state: &State<T>) {
        self(time, state)
    }
}

/// Divergence record: the step at which |||u|||_2 left the admissible
/// ball (or stopped being finite).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUp<T> {
    pub time: T,
    pub norm2_sq: T,
}

/// Saved generator coordinates; enough to reconstruct the exact stream.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RngPosition {
    pub seed: u64,
    pub stream: u64,
    pub word_pos_lo: u64,
    pub word_pos_hi: u64,
}

impl RngPosition {
    fn capture(seed: u64, stream: u64, rng: &ChaCha8Rng) -> Self {
        let pos = rng.get_word_pos();
        Self {
            seed,
            stream,
            word_pos_lo: pos as u64,
            word_pos_hi: (pos >> 64) as u64,
        }
    }

    fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos((self.word_pos_lo as u128) | ((self.word_pos_hi as u128) << 64));
        rng
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to continue a trajectory bit-exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryCheckpoint<T> {
    pub version: u32,
    pub time: T,
    pub step_index: u64,
    pub state: State<T>,
    pub rng: RngPosition,
}

#[derive(Clone, Debug)]
pub struct SimulationOutcome<T> {
    pub final_state: State<T>,
    pub final_time: T,
    pub steps_taken: u64,
    pub samples_recorded: u64,
    pub blow_up: Option<BlowUp<T>>,
    pub checkpoint: TrajectoryCheckpoint<T>,
}

/// One semi-implicit step. `grid` selects the full dynamics; `None` drops
/// the nonlinear term (the linearized system).
pub fn semi_implicit_step<T: Real, R: Rng + ?Sized>(
    state: &State<T>,
    params: &ModelParams<T>,
    ops: &PerModeOperators<T>,
    noise: &NoiseSpectrum<T>,
    grid: Option<&SphericalGrid<T>>,
    dt: T,
    rng: &mut R,
) -> Result<State<T>, SphereError> {
    let mut rhs = a1_apply(params, state);
    if let Some(g) = grid {
        let b = b_nonlinear(params, state, g)?;
        rhs.axpy(-dt, &b);
    }
    noise.add_increment(rng, params.nu, dt, &mut rhs);
    ops.implicit_solve_inplace(&mut rhs);
    Ok(rhs)
}

fn norm2_sq<T: Real>(state: &State<T>) -> T {
    state.u1.weighted_energy(|lam| lam * lam) + state.u2.weighted_energy(|lam| lam * lam)
}

struct RunStart<T> {
    state: State<T>,
    step_index: u64,
    rng: ChaCha8Rng,
}

fn run<T: Real>(
    start: RunStart<T>,
    params: &ModelParams<T>,
    noise: &NoiseSpectrum<T>,
    grid: Option<&SphericalGrid<T>>,
    config: &IntegratorConfig<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<SimulationOutcome<T>, SimulateError> {
    config.validate()?;
    let RunStart {
        mut state,
        step_index,
        mut rng,
    } = start;
    let ops = PerModeOperators::new(params, state.l_max(), config.dt);
    let total_steps = config.steps(config.t_end);
    let burn_steps = config.steps(config.burn_in);
    let blowup_sq = config.blowup_norm * config.blowup_norm;

    let mut time = T::of_usize(step_index as usize) * config.dt;
    let mut samples = 0u64;
    let mut blow_up = None;
    let mut step = step_index;
    while step < total_steps {
        state = semi_implicit_step(&state, params, &ops, noise, grid, config.dt, &mut rng)?;
        step += 1;
        time = T::of_usize(step as usize) * config.dt;
        let n2 = norm2_sq(&state);
        if !n2.is_finite() || n2 > blowup_sq {
            blow_up = Some(BlowUp { time, norm2_sq: n2 });
            break;
        }
        if step > burn_steps && (step - burn_steps).is_multiple_of(config.sample_every as u64) {
            for obs in observers.iter_mut() {
                obs.observe(time, &state);
            }
            samples += 1;
        }
    }

    let checkpoint = TrajectoryCheckpoint {
        version: CHECKPOINT_VERSION,
        time,
        step_index: step,
        state: state.clone(),
        rng: RngPosition::capture(config.seed, config.stream, &rng),
    };
    Ok(SimulationOutcome {
        final_state: state,
        final_time: time,
        steps_taken: step - step_index,
        samples_recorded: samples,
        blow_up,
        checkpoint,
    })
}

/// Advances `initial` to t_end, reporting blow-up as an outcome rather
/// than an error.
pub fn simulate<T: Real>(
    initial: &State<T>,
    params: &ModelParams<T>,
    noise: &NoiseSpectrum<T>,
    grid: Option<&SphericalGrid<T>>,
    config: &IntegratorConfig<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<SimulationOutcome<T>, SimulateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(config.stream);
    run(
        RunStart {
            state: initial.clone(),
            step_index: 0,
            rng,
        },
        params,
        noise,
        grid,
        config,
        observers,
    )
}

/// Continues a checkpointed trajectory to the configured t_end. The
/// continuation is bit-identical to the uninterrupted run as long as
/// params, noise, grid and dt are unchanged.
pub fn resume<T: Real>(
    checkpoint: &TrajectoryCheckpoint<T>,
    params: &ModelParams<T>,
    noise: &NoiseSpectrum<T>,
    grid: Option<&SphericalGrid<T>>,
    config: &IntegratorConfig<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<SimulationOutcome<T>, SimulateError> {
    if checkpoint.version != CHECKPOINT_VERSION {
        return Err(SimulateError::Checkpoint(format!(
            "unsupported checkpoint version {}",
            checkpoint.version
        )));
    }
    if checkpoint.rng.seed != config.seed || checkpoint.rng.stream != config.stream {
        return Err(SimulateError::Checkpoint(
            "checkpoint was recorded under a different (seed, stream)".to_string(),
        ));
    }
    run(
        RunStart {
            state: checkpoint.state.clone(),
            step_index: checkpoint.step_index,
            rng: checkpoint.rng.restore(),
        },
        params,
        noise,
        grid,
        config,
        observers,
    )
}
