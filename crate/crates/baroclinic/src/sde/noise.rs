//! The forcing spectrum: which harmonics are driven and how strongly.
//!
//! The noise is a sum over entries of b_i dW_i(t) E_i, where each E_i is a
//! real orthonormal harmonic placed in one layer and the W_i are
//! independent scalar Wiener processes. Effective amplitudes scale with
//! viscosity as b_i = nu^alpha * b_i', which is the knob the inviscid-limit
//! experiments sweep.

use crate::model::State;
use crate::num::Real;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum NoiseError {
    #[error("entry {index}: degree l = {l} must be at least 1")]
    DegreeOutOfRange { index: usize, l: usize },
    #[error("entry {index}: order |m| = {m_abs} exceeds degree l = {l}")]
    OrderOutOfRange {
        index: usize,
        l: usize,
        m_abs: usize,
    },
    #[error("entry {index}: amplitude must be finite and nonnegative")]
    BadAmplitude { index: usize },
    #[error("entries {first} and {second} drive the same harmonic")]
    DuplicateEntry { first: usize, second: usize },
    #[error("scaling exponent alpha must be finite")]
    BadAlpha,
}

/// Which layer an entry forces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Layer {
    Barotropic,
    Baroclinic,
}

impl TryFrom<u8> for Layer {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Layer::Barotropic),
            2 => Ok(Layer::Baroclinic),
            other => Err(format!("layer must be 1 or 2, got {other}")),
        }
    }
}

impl From<Layer> for u8 {
    fn from(l: Layer) -> u8 {
        match l {
            Layer::Barotropic => 1,
            Layer::Baroclinic => 2,
        }
    }
}

/// One forced real harmonic. Signed order selects the branch of the real
/// basis: m >= 0 is the cosine harmonic (sqrt(2) Re Y_l^m, or Y_l^0 for
/// m = 0), m < 0 the sine harmonic sqrt(2) Im Y_l^{|m|}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseEntry<T> {
    pub layer: Layer,
    pub l: usize,
    pub m: i64,
    /// Primed (viscosity-free) amplitude b'.
    pub amplitude: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NoiseSpectrumRepr<T>", bound(deserialize = "T: Real"))]
pub struct NoiseSpectrum<T> {
    entries: Vec<NoiseEntry<T>>,
    alpha: T,
}

/// Serde staging type so deserialized spectra go through validation.
#[derive(Deserialize)]
struct NoiseSpectrumRepr<T> {
    entries: Vec<NoiseEntry<T>>,
    alpha: T,
}

impl<T: Real> TryFrom<NoiseSpectrumRepr<T>> for NoiseSpectrum<T> {
    type Error = NoiseError;
    fn try_from(r: NoiseSpectrumRepr<T>) -> Result<Self, NoiseError> {
        NoiseSpectrum::new(r.entries, r.alpha)
    }
}

impl<T: Real> NoiseSpectrum<T> {
    pub fn new(entries: Vec<NoiseEntry<T>>, alpha: T) -> Result<Self, NoiseError> {
        if !alpha.is_finite() {
            return Err(NoiseError::BadAlpha);
        }
        for (i, e) in entries.iter().enumerate() {
            if e.l < 1 {
                return Err(NoiseError::DegreeOutOfRange { index: i, l: e.l });
            }
            if e.m.unsigned_abs() as usize > e.l {
                return Err(NoiseError::OrderOutOfRange {
                    index: i,
                    l: e.l,
                    m_abs: e.m.unsigned_abs() as usize,
                });
            }
            if !(e.amplitude >= T::zero()) || !e.amplitude.is_finite() {
                return Err(NoiseError::BadAmplitude { index: i });
            }
            for (j, f) in entries[..i].iter().enumerate() {
                if (f.layer, f.l, f.m) == (e.layer, e.l, e.m) {
                    return Err(NoiseError::DuplicateEntry {
                        first: j,
                        second: i,
                    });
                }
            }
        }
        Ok(Self { entries, alpha })
    }

    /// Unit amplitude on every real harmonic with l <= l_cut, both layers.
    pub fn low_modes(l_cut: usize, amplitude: T, alpha: T) -> Self {
        let mut entries = Vec::new();
        for layer in [Layer::Barotropic, Layer::Baroclinic] {
            for l in 1..=l_cut {
                for m in -(l as i64)..=(l as i64) {
                    entries.push(NoiseEntry {
                        layer,
                        l,
                        m,
                        amplitude,
                    });
                }
            }
        }
        Self::new(entries, alpha).expect("low-mode spectrum is valid by construction")
    }

    pub fn entries(&self) -> &[NoiseEntry<T>] {
        &self.entries
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn with_alpha(&self, alpha: T) -> Result<Self, NoiseError> {
        Self::new(self.entries.clone(), alpha)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest forced degree (0 when empty).
    pub fn max_degree(&self) -> usize {
        self.entries.iter().map(|e| e.l).max().unwrap_or(0)
    }

    /// nu^alpha, the common scale factor of all amplitudes.
    pub fn amplitude_scale(&self, nu: T) -> T {
        nu.powf(self.alpha)
    }

    /// Effective per-entry amplitude b_i = nu^alpha b_i'.
    pub fn effective_amplitude(&self, nu: T, entry: &NoiseEntry<T>) -> T {
        self.amplitude_scale(nu) * entry.amplitude
    }

    /// sum_i b_i^2 at viscosity nu.
    pub fn sum_b_sq(&self, nu: T) -> T {
        let s = self.amplitude_scale(nu);
        self.entries
            .iter()
            .map(|e| (s * e.amplitude) * (s * e.amplitude))
            .sum()
    }

    /// sup_i b_i at viscosity nu.
    pub fn sup_b(&self, nu: T) -> T {
        self.amplitude_scale(nu)
            * self
                .entries
                .iter()
                .map(|e| e.amplitude)
                .fold(T::zero(), T::max)
    }

    /// sum_i b_i^2 <A1^{-1} E_i, E_i>; the A1 weight is 1/lambda_l for
    /// barotropic entries and 1/(lambda_l + gamma) for baroclinic ones.
    pub fn weighted_a1_inverse_sum(&self, nu: T, gamma: T) -> T {
        let s2 = self.amplitude_scale(nu).powi(2);
        self.entries
            .iter()
            .map(|e| {
                let lam = crate::sphere::laplacian_eigenvalue::<T>(e.l);
                let w = match e.layer {
                    Layer::Barotropic => lam.recip(),
                    Layer::Baroclinic => (lam + gamma).recip(),
                };
                s2 * e.amplitude * e.amplitude * w
            })
            .sum()
    }

    /// Adds the Euler-Maruyama noise increment sum_i b_i sqrt(dt) xi_i E_i
    /// to `target`, drawing one standard normal per entry in storage order.
    pub fn add_increment<R: Rng + ?Sized>(&self, rng: &mut R, nu: T, dt: T, target: &mut State<T>) {
        let scale = self.amplitude_scale(nu) * dt.sqrt();
        let inv_sqrt2 = T::of(0.5).sqrt();
        for e in &self.entries {
            let xi = T::standard_normal(rng);
            let amount = scale * e.amplitude * xi;
            let field = match e.layer {
                Layer::Barotropic => &mut target.u1,
                Layer::Baroclinic => &mut target.u2,
            };
            let m_abs = e.m.unsigned_abs() as usize;
            let c = field.coeff_mut(e.l, m_abs);
            if e.m == 0 {
                c.re += amount;
            } else if e.m > 0 {
                c.re += amount * inv_sqrt2;
            } else {
                c.im -= amount * inv_sqrt2;
            }
        }
    }

    /// The noise increment over one step as a fresh state.
    pub fn noise_increment<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        nu: T,
        dt: T,
        l_max: usize,
    ) -> State<T> {
        let mut z = State::zeros(l_max);
        self.add_increment(rng, nu, dt, &mut z);
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sobolev_norm_sq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn entry(layer: Layer, l: usize, m: i64, b: f64) -> NoiseEntry<f64> {
        NoiseEntry {
            layer,
            l,
            m,
            amplitude: b,
        }
    }

    #[test]
    fn validation_rejects_bad_entries() {
        let a = NoiseSpectrum::new(vec![entry(Layer::Barotropic, 0, 0, 1.0)], 0.5);
        assert!(matches!(a, Err(NoiseError::DegreeOutOfRange { .. })));
        let b = NoiseSpectrum::new(vec![entry(Layer::Barotropic, 2, 3, 1.0)], 0.5);
        assert!(matches!(b, Err(NoiseError::OrderOutOfRange { .. })));
        let c = NoiseSpectrum::new(vec![entry(Layer::Barotropic, 2, -1, -1.0)], 0.5);
        assert!(matches!(c, Err(NoiseError::BadAmplitude { .. })));
        let d = NoiseSpectrum::new(
            vec![
                entry(Layer::Barotropic, 2, 1, 1.0),
                entry(Layer::Barotropic, 2, 1, 0.5),
            ],
            0.5,
        );
        assert!(matches!(d, Err(NoiseError::DuplicateEntry { .. })));
    }

    #[test]
    fn effective_amplitude_scales_as_nu_to_alpha() {
        let s = NoiseSpectrum::new(vec![entry(Layer::Barotropic, 1, 0, 2.0)], 0.5).unwrap();
        let b = s.effective_amplitude(0.04, &s.entries()[0]);
        assert!((b - 0.4).abs() < 1e-15);
        let s0 = NoiseSpectrum::new(vec![entry(Layer::Barotropic, 1, 0, 2.0)], 0.0).unwrap();
        assert_eq!(s0.effective_amplitude(0.04, &s0.entries()[0]), 2.0);
    }

    #[test]
    fn weighted_a1_inverse_sum_uses_layer_dependent_weights() {
        let s = NoiseSpectrum::new(
            vec![
                entry(Layer::Barotropic, 1, 0, 1.0),
                entry(Layer::Baroclinic, 1, 0, 1.0),
            ],
            0.0,
        )
        .unwrap();
        // 1/2 + 1/(2 + 2) with gamma = 2.
        assert!((s.weighted_a1_inverse_sum(1.0, 2.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zonal_increment_variance_matches_b_sq_dt() {
        let s = NoiseSpectrum::new(vec![entry(Layer::Barotropic, 2, 0, 1.0)], 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let dt = 0.01;
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let z = s.noise_increment(&mut rng, 1.0, dt, 3);
            let v = z.u1.get(2, 0).re;
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        // Var = b^2 dt = 0.01; sample variance SE ~ var * sqrt(2/n).
        let se = var * (2.0 / n as f64).sqrt();
        assert!((var - dt).abs() < 3.0 * se, "var {var}");
    }

    #[test]
    fn increment_h0_norm_is_isometric_on_average() {
        // E ||dzeta||_0^2 = dt * sum b_i^2 regardless of which branches
        // (zonal/cos/sin) are driven.
        let s = NoiseSpectrum::new(
            vec![
                entry(Layer::Barotropic, 1, 0, 1.0),
                entry(Layer::Barotropic, 2, 1, 0.7),
                entry(Layer::Baroclinic, 2, -2, 1.3),
            ],
            0.0,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let dt = 0.25;
        let n = 60_000;
        let mut total = 0.0;
        for _ in 0..n {
            let z = s.noise_increment(&mut rng, 1.0, dt, 3);
            total += sobolev_norm_sq(&z, 0.0);
        }
        let mean = total / n as f64;
        let expect = dt * s.sum_b_sq(1.0);
        assert!(
            (mean - expect).abs() < 4.0 * expect * (2.0f64 / n as f64).sqrt() * 2.0,
            "{mean} vs {expect}"
        );
    }

    #[test]
    fn distinct_entries_are_independent() {
        let s = NoiseSpectrum::new(
            vec![
                entry(Layer::Barotropic, 1, 0, 1.0),
                entry(Layer::Baroclinic, 1, 0, 1.0),
            ],
            0.0,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 50_000;
        let mut cross = 0.0;
        for _ in 0..n {
            let z = s.noise_increment(&mut rng, 1.0, 1.0, 1);
            cross += z.u1.get(1, 0).re * z.u2.get(1, 0).re;
        }
        let corr = cross / n as f64;
        assert!(corr.abs() < 3.0 / (n as f64).sqrt() * 1.5, "corr {corr}");
    }

    #[test]
    fn serde_round_trip_preserves_spectrum_and_validates() {
        let s = NoiseSpectrum::<f64>::low_modes(2, 1.0, 0.5);
        let json = serde_json::to_string(&s).unwrap();
        let back: NoiseSpectrum<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
        // 2 layers * (3 + 5) harmonics.
        assert_eq!(s.entries().len(), 16);
        let bad = r#"{"entries":[{"layer":3,"l":1,"m":0,"amplitude":1.0}],"alpha":0.0}"#;
        assert!(serde_json::from_str::<NoiseSpectrum<f64>>(bad).is_err());
    }
}
