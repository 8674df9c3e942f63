//! Strong-convergence diagnostic for the time stepper.
//!
//! For the linearized system every forced mode is a 2x2 OU pair whose
//! transition kernel is known exactly: over a step of length dt,
//!
//!   x(t+dt) = e^{-M dt} x(t) + C (dW/dt) + r,
//!
//! where C = M^{-1}(I - e^{-M dt}) N is the covariance of the stochastic
//! convolution with the Brownian increment dW and r is an independent
//! Gaussian residual. Simulating that kernel on a fine grid gives a
//! pathwise-exact reference coupled to the scheme through shared Brownian
//! increments, so the semi-implicit Euler error can be measured directly
//! and its strong order fitted. A control run using the exact coarse
//! kernel with the same increments separates discretization error from
//! the irreducible conditional-sampling noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ou::{forced_modes, OracleError};
use crate::linalg::Mat2;
use crate::model::ModelParams;
use crate::num::Real;
use crate::sde::NoiseSpectrum;

/// Strong-error ladder and fitted log-log slopes.
#[derive(Clone, Debug)]
pub struct StrongOrderReport<T> {
    pub dts: Vec<T>,
    /// RMS endpoint error of semi-implicit Euler against the exact kernel.
    pub errors: Vec<T>,
    /// RMS endpoint error of the exact coarse kernel (sampling floor).
    pub control_errors: Vec<T>,
    pub slope: T,
    /// `None` when the control errors vanish (deterministic runs).
    pub control_slope: Option<T>,
}

/// Exact transition kernel and Euler map over one step of length dt for a
/// single mode.
struct StepMaps<T> {
    /// e^{-M dt}.
    propagator: Mat2<T>,
    /// C / dt, applied directly to the Brownian increment.
    conv_per_dt: Mat2<T>,
    /// Cholesky factor of the conditional residual covariance.
    residual_chol: Mat2<T>,
    /// (A1 + dt D)^{-1} A1.
    euler_drift: Mat2<T>,
    /// (A1 + dt D)^{-1} diag(b).
    euler_noise: Mat2<T>,
}

fn step_maps<T: Real>(
    params: &ModelParams<T>,
    l: usize,
    amplitudes: [T; 2],
    drift: &Mat2<T>,
    sigma: &Mat2<T>,
    dt: T,
) -> Result<StepMaps<T>, OracleError> {
    let propagator = drift.scale(-dt).expm();
    let [a1_1, a1_2] = params.a1_diag(l);
    let n = Mat2::diag(amplitudes[0] / a1_1, amplitudes[1] / a1_2);
    let conv = drift
        .inverse()
        .ok_or(OracleError::SingularLyapunov { l })?
        .mul(&Mat2::identity().sub(&propagator))
        .mul(&n);
    // Covariance over one step, then conditionally on the increment.
    let v_step = sigma.sub(&propagator.mul(sigma).mul(&propagator.transpose()));
    let v_res = v_step.sub(&conv.mul(&conv.transpose()).scale(dt.recip()));
    let inv = params
        .implicit_matrix(l, dt)
        .inverse()
        .expect("implicit matrix is invertible for dt >= 0");
    Ok(StepMaps {
        propagator,
        conv_per_dt: conv.scale(dt.recip()),
        residual_chol: psd_cholesky(&v_res),
        euler_drift: inv.mul(&Mat2::diag(a1_1, a1_2)),
        euler_noise: inv.mul(&Mat2::diag(amplitudes[0], amplitudes[1])),
    })
}

/// Lower Cholesky factor of a symmetric matrix that is PSD up to rounding.
fn psd_cholesky<T: Real>(v: &Mat2<T>) -> Mat2<T> {
    let scale = v.a.abs().max(v.d.abs()) + T::epsilon();
    let l11 = v.a.max(T::zero()).sqrt();
    let l21 = if l11 * l11 > scale * T::epsilon() {
        v.c / l11
    } else {
        T::zero()
    };
    let l22 = (v.d - l21 * l21).max(T::zero()).sqrt();
    Mat2::new(l11, T::zero(), l21, l22)
}

fn ratio_as_steps<T: Real>(span: T, step: T, what: &str) -> Result<usize, OracleError> {
    let ratio = span / step;
    let rounded = ratio.round();
    if rounded < T::one() || (ratio - rounded).abs() > T::of(1e-9) * rounded {
        return Err(OracleError::Ladder(format!(
            "{what}: {span} is not an integer multiple of {step}"
        )));
    }
    Ok(rounded.to_usize().expect("step count fits in usize"))
}

fn log_log_slope<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    if ys.iter().any(|&y| !(y > T::zero())) {
        return None;
    }
    let n = T::of_usize(xs.len());
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let mut num = T::zero();
    let mut den = T::zero();
    for (x, y) in lx.iter().zip(&ly) {
        num += (*x - mx) * (*y - my);
        den += (*x - mx) * (*x - mx);
    }
    Some(num / den)
}

/// Measures the strong order of semi-implicit Euler on the linearized
/// system over the step ladder `dts` (strictly decreasing). Every path is
/// driven on a common fine grid (one eighth of the smallest step) whose
/// increments are summed into each level's Brownian increments, and all
/// levels are compared to the same pathwise-exact fine solution at
/// `t_end`. Every mode starts from (1, 0.5) so deterministic error is
/// exercised too.
pub fn strong_order_check<T: Real>(
    params: &ModelParams<T>,
    noise: &NoiseSpectrum<T>,
    dts: &[T],
    t_end: T,
    paths: usize,
    seed: u64,
) -> Result<StrongOrderReport<T>, OracleError> {
    if dts.len() < 2 {
        return Err(OracleError::Ladder(
            "need at least two step sizes to fit a slope".into(),
        ));
    }
    for w in dts.windows(2) {
        if !(w[1] < w[0]) {
            return Err(OracleError::Ladder(
                "step sizes must be strictly decreasing".into(),
            ));
        }
    }
    if !(*dts.last().unwrap() > T::zero()) || !(t_end > T::zero()) {
        return Err(OracleError::Ladder(
            "step sizes and horizon must be positive".into(),
        ));
    }
    if paths < 2 {
        return Err(OracleError::Ladder("need at least two paths".into()));
    }
    if noise.entries().is_empty() {
        return Err(OracleError::Ladder(
            "spectrum must name at least one harmonic (zero amplitude is fine)".into(),
        ));
    }

    let fine = *dts.last().unwrap() / T::of(8.0);
    let n_fine = ratio_as_steps(t_end, fine, "horizon")?;
    let substeps: Vec<usize> = dts
        .iter()
        .map(|&dt| ratio_as_steps(dt, fine, "step size"))
        .collect::<Result<_, _>>()?;
    for (&m, &dt) in substeps.iter().zip(dts) {
        if n_fine % m != 0 {
            return Err(OracleError::Ladder(format!(
                "horizon {t_end} is not an integer multiple of step {dt}"
            )));
        }
    }

    let modes = forced_modes(params, noise)?;
    let fine_maps: Vec<StepMaps<T>> = modes
        .iter()
        .map(|mo| step_maps(params, mo.l, mo.amplitudes, &mo.drift, &mo.sigma, fine))
        .collect::<Result<_, _>>()?;
    let level_maps: Vec<Vec<StepMaps<T>>> = dts
        .iter()
        .map(|&dt| {
            modes
                .iter()
                .map(|mo| step_maps(params, mo.l, mo.amplitudes, &mo.drift, &mo.sigma, dt))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;

    let n_levels = dts.len();
    let n_modes = modes.len();
    let x0 = [T::one(), T::of(0.5)];
    let sqrt_fine = fine.sqrt();
    let mut err_sq = vec![T::zero(); n_levels];
    let mut ctrl_sq = vec![T::zero(); n_levels];
    let stride = (2 + n_levels) as u64;

    for path in 0..paths {
        let stream = |role: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(path as u64 * stride + role);
            r
        };
        let mut rng_w = stream(0);
        let mut rng_ref = stream(1);
        let mut rng_ctrl: Vec<ChaCha8Rng> = (0..n_levels).map(|k| stream(2 + k as u64)).collect();

        let mut x_ref = vec![x0; n_modes];
        let mut x_euler = vec![vec![x0; n_modes]; n_levels];
        let mut x_ctrl = vec![vec![x0; n_modes]; n_levels];
        let mut acc = vec![vec![[T::zero(); 2]; n_modes]; n_levels];

        for step in 0..n_fine {
            for (s, maps) in fine_maps.iter().enumerate() {
                let dw = [
                    T::standard_normal(&mut rng_w) * sqrt_fine,
                    T::standard_normal(&mut rng_w) * sqrt_fine,
                ];
                for level in acc.iter_mut() {
                    level[s][0] += dw[0];
                    level[s][1] += dw[1];
                }
                let drift = maps.propagator.apply(x_ref[s]);
                let conv = maps.conv_per_dt.apply(dw);
                let res = maps.residual_chol.apply([
                    T::standard_normal(&mut rng_ref),
                    T::standard_normal(&mut rng_ref),
                ]);
                x_ref[s] = [drift[0] + conv[0] + res[0], drift[1] + conv[1] + res[1]];
            }
            for k in 0..n_levels {
                if (step + 1) % substeps[k] != 0 {
                    continue;
                }
                for s in 0..n_modes {
                    let maps = &level_maps[k][s];
                    let dw = acc[k][s];
                    let drift = maps.euler_drift.apply(x_euler[k][s]);
                    let kick = maps.euler_noise.apply(dw);
                    x_euler[k][s] = [drift[0] + kick[0], drift[1] + kick[1]];
                    let cdrift = maps.propagator.apply(x_ctrl[k][s]);
                    let conv = maps.conv_per_dt.apply(dw);
                    let res = maps.residual_chol.apply([
                        T::standard_normal(&mut rng_ctrl[k]),
                        T::standard_normal(&mut rng_ctrl[k]),
                    ]);
                    x_ctrl[k][s] = [cdrift[0] + conv[0] + res[0], cdrift[1] + conv[1] + res[1]];
                    acc[k][s] = [T::zero(); 2];
                }
            }
        }

        for k in 0..n_levels {
            for s in 0..n_modes {
                for i in 0..2 {
                    let de = x_euler[k][s][i] - x_ref[s][i];
                    err_sq[k] += de * de;
                    let dc = x_ctrl[k][s][i] - x_ref[s][i];
                    ctrl_sq[k] += dc * dc;
                }
            }
        }
    }

    let norm = T::of_usize(paths);
    let errors: Vec<T> = err_sq.iter().map(|&e| (e / norm).sqrt()).collect();
    let control_errors: Vec<T> = ctrl_sq.iter().map(|&e| (e / norm).sqrt()).collect();
    let slope = log_log_slope(dts, &errors)
        .ok_or_else(|| OracleError::Ladder("scheme error vanished; nothing to fit".into()))?;
    let control_slope = log_log_slope(dts, &control_errors);
    Ok(StrongOrderReport {
        dts: dts.to_vec(),
        errors,
        control_errors,
        slope,
        control_slope,
    })
}
