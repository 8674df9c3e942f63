//! Shared simulation drivers: single trajectories, ensembles and the
//! viscosity sweep.
//!
//! Ensemble members are independent sub-streams of one seeded generator
//! and run in a parallel worker pool; their accumulators are merged in
//! member order afterwards, so results do not depend on scheduling.

use baroclinic::model::{
    constants_report, pairings, sobolev_norm_sq, ConstantsReport, ModelParams,
};
use baroclinic::sde::{simulate, BlowUp, IntegratorConfig, NoiseSpectrum, SimulationOutcome};
use baroclinic::sphere::SphericalGrid;
use baroclinic::stats::{EmpiricalSample, MomentAccumulator};
use baroclinic::{Scalar, State64};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Failure;

/// Everything one trajectory needs; `grid: None` runs the linearized
/// system (nonlinear term off).
pub struct RunSpec<'a> {
    pub params: ModelParams<Scalar>,
    pub noise: NoiseSpectrum<Scalar>,
    pub integrator: IntegratorConfig<Scalar>,
    pub l_max: usize,
    pub grid: Option<&'a SphericalGrid<Scalar>>,
    pub initial: Option<State64>,
}

impl<'a> RunSpec<'a> {
    pub fn of(cfg: &ExperimentConfig, grid: Option<&'a SphericalGrid<Scalar>>) -> Self {
        Self {
            params: cfg.params,
            noise: cfg.noise.clone(),
            integrator: cfg.integrator,
            l_max: cfg.l_max,
            grid,
            initial: None,
        }
    }

    /// kappa* nu, the coefficient of the exponential functional; zero
    /// (the functional degenerates to 1) when the spectrum is silent.
    pub fn exp_coefficient(&self) -> Scalar {
        match constants_report(&self.params, &self.noise) {
            Ok(r) => r.kappa_star,
            Err(_) => 0.0,
        }
    }
}

/// One recorded sample of the tracked functionals.
#[derive(Clone, Copy, Debug)]
pub struct SampleRow {
    pub time: Scalar,
    /// |||u|||_p^2 for p = 0..3.
    pub norms_sq: [Scalar; 4],
    pub a2_a1: Scalar,
    pub a3_u: Scalar,
    pub a3_prime_u: Scalar,
    pub a1_norm0_sq: Scalar,
}

pub struct RunArtifacts {
    pub acc: MomentAccumulator<Scalar>,
    /// |||u|||_2 at every sample time, the observable whose law the
    /// measure-distance diagnostics compare.
    pub norm2: EmpiricalSample<Scalar>,
    pub rows: Vec<SampleRow>,
    pub outcome: SimulationOutcome<Scalar>,
}

pub fn run_one(spec: &RunSpec, record_rows: bool) -> Result<RunArtifacts, Failure> {
    let params = spec.params;
    let kappa_star = spec.exp_coefficient();
    let mut acc = MomentAccumulator::new(params.nu, kappa_star);
    let mut norm2 = EmpiricalSample::new();
    let mut rows = Vec::new();
    let initial = spec
        .initial
        .clone()
        .unwrap_or_else(|| State64::zeros(spec.l_max));
    let mut observer = |time: Scalar, state: &State64| {
        acc.record(state, &params);
        norm2.push(time, sobolev_norm_sq(state, 2.0).sqrt());
        if record_rows {
            let p = pairings(&params, state);
            rows.push(SampleRow {
                time,
                norms_sq: [
                    sobolev_norm_sq(state, 0.0),
                    sobolev_norm_sq(state, 1.0),
                    sobolev_norm_sq(state, 2.0),
                    sobolev_norm_sq(state, 3.0),
                ],
                a2_a1: p.a2_a1,
                a3_u: p.a3_u,
                a3_prime_u: p.a3_prime_u,
                a1_norm0_sq: p.a1_norm0_sq,
            });
        }
    };
    let outcome = simulate(
        &initial,
        &params,
        &spec.noise,
        spec.grid,
        &spec.integrator,
        &mut [&mut observer],
    )
    .map_err(Failure::other)?;
    Ok(RunArtifacts {
        acc,
        norm2,
        rows,
        outcome,
    })
}

/// Blow-up of one ensemble member.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct MemberBlowUp {
    pub member: usize,
    pub time: Scalar,
    pub norm2_sq: Scalar,
}

pub struct EnsembleStats {
    pub acc: MomentAccumulator<Scalar>,
    pub norm2: EmpiricalSample<Scalar>,
    pub members: usize,
    /// Lowest-membered blow-up, if any; statistics cover the samples
    /// every member recorded before stopping.
    pub blow_up: Option<MemberBlowUp>,
}

/// Runs `members` independent trajectories of `spec` (sub-streams
/// `stream + 0 .. stream + members - 1`) in parallel and merges their
/// statistics in member order.
pub fn run_ensemble(spec: &RunSpec, members: usize) -> Result<EnsembleStats, Failure> {
    let results: Vec<Result<RunArtifacts, Failure>> = (0..members)
        .into_par_iter()
        .map(|j| {
            let mut member_spec = RunSpec {
                params: spec.params,
                noise: spec.noise.clone(),
                integrator: spec.integrator,
                l_max: spec.l_max,
                grid: spec.grid,
                initial: spec.initial.clone(),
            };
            member_spec.integrator.stream = spec.integrator.stream + j as u64;
            run_one(&member_spec, false)
        })
        .collect();

    let mut acc = MomentAccumulator::new(spec.params.nu, spec.exp_coefficient());
    let mut norm2 = EmpiricalSample::new();
    let mut blow_up: Option<MemberBlowUp> = None;
    for (member, result) in results.into_iter().enumerate() {
        let artifacts = result?;
        acc.merge(&artifacts.acc);
        for (&t, &v) in artifacts.norm2.times().iter().zip(artifacts.norm2.values()) {
            norm2.push(t, v);
        }
        if blow_up.is_none() {
            if let Some(BlowUp { time, norm2_sq }) = artifacts.outcome.blow_up {
                blow_up = Some(MemberBlowUp {
                    member,
                    time,
                    norm2_sq,
                });
            }
        }
    }
    Ok(EnsembleStats {
        acc,
        norm2,
        members,
        blow_up,
    })
}

/// One viscosity point of a sweep.
pub struct SweepPoint {
    pub nu: Scalar,
    pub constants: Option<ConstantsReport<Scalar>>,
    pub stats: EnsembleStats,
}

/// Runs the configured ensemble at every viscosity in `cfg.sweep`
/// (descending order), all trajectories in one parallel pool. Point i,
/// member j uses sub-stream `stream + i * ensemble + j`. Blow-ups are
/// recorded per point; the sweep always completes.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    grid: Option<&SphericalGrid<Scalar>>,
) -> Result<Vec<SweepPoint>, Failure> {
    let members = cfg.sweep.ensemble;
    let jobs: Vec<(usize, usize)> = (0..cfg.sweep.nu_list.len())
        .flat_map(|i| (0..members).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<RunArtifacts, Failure>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let mut spec = RunSpec::of(cfg, grid);
            spec.params.nu = cfg.sweep.nu_list[i];
            spec.integrator.stream = cfg.integrator.stream + (i * members + j) as u64;
            run_one(&spec, false)
        })
        .collect();

    let mut by_point: Vec<Vec<RunArtifacts>> =
        cfg.sweep.nu_list.iter().map(|_| Vec::new()).collect();
    for (&(i, _), result) in jobs.iter().zip(results) {
        by_point[i].push(result?);
    }

    let mut points = Vec::with_capacity(by_point.len());
    for (i, artifacts) in by_point.into_iter().enumerate() {
        let nu = cfg.sweep.nu_list[i];
        let mut params = cfg.params;
        params.nu = nu;
        let constants = constants_report(&params, &cfg.noise).ok();
        let kappa_star = constants.as_ref().map_or(0.0, |r| r.kappa_star);
        let mut acc = MomentAccumulator::new(nu, kappa_star);
        let mut norm2 = EmpiricalSample::new();
        let mut blow_up = None;
        for (member, a) in artifacts.iter().enumerate() {
            acc.merge(&a.acc);
            for (&t, &v) in a.norm2.times().iter().zip(a.norm2.values()) {
                norm2.push(t, v);
            }
            if blow_up.is_none() {
                if let Some(BlowUp { time, norm2_sq }) = a.outcome.blow_up {
                    blow_up = Some(MemberBlowUp {
                        member,
                        time,
                        norm2_sq,
                    });
                }
            }
        }
        points.push(SweepPoint {
            nu,
            constants,
            stats: EnsembleStats {
                acc,
                norm2,
                members,
                blow_up,
            },
        });
    }
    Ok(points)
}
