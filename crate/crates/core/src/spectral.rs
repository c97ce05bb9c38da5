//! Gaussian single-photon spectral profile.
//!
//! All quantities are nondimensional: times are measured in units of a
//! reference temporal width and frequencies in its reciprocal.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Temporal/spectral shape of a single-photon wavepacket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct SpectralProfile {
    sigma_t: f64,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    sigma_t: f64,
}

impl TryFrom<RawProfile> for SpectralProfile {
    type Error = crate::Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        Self::new(raw.sigma_t)
    }
}

impl From<SpectralProfile> for RawProfile {
    fn from(p: SpectralProfile) -> Self {
        Self { sigma_t: p.sigma_t }
    }
}

impl Default for SpectralProfile {
    fn default() -> Self {
        Self { sigma_t: 1.0 }
    }
}

impl SpectralProfile {
    pub fn new(sigma_t: f64) -> Result<Self> {
        if !(sigma_t.is_finite() && sigma_t > 0.0) {
            return Err(invalid(
                "sigma_t",
                format!("must be positive and finite, got {sigma_t}"),
            ));
        }
        Ok(Self { sigma_t })
    }

    /// Temporal standard deviation.
    pub fn sigma_t(&self) -> f64 {
        self.sigma_t
    }

    /// Spectral standard deviation, `1 / (2 sigma_t)`.
    pub fn sigma_omega(&self) -> f64 {
        0.5 / self.sigma_t
    }

    /// Density of the frequency difference of two independent photons,
    /// a Gaussian of variance `2 sigma_omega^2`.
    pub fn envelope_density(&self, delta_omega: f64) -> f64 {
        let var = self.sigma_omega().powi(2);
        (-delta_omega * delta_omega / (4.0 * var)).exp() / (4.0 * PI * var).sqrt()
    }

    /// Characteristic function of the envelope at half the delay,
    /// `∫ C(Δω) cos(Δω Δt / 2) dΔω = exp(-sigma_omega² Δt² / 4)`.
    pub fn temporal_overlap(&self, delta_t: f64) -> f64 {
        (-self.overlap_exponent(delta_t)).exp()
    }

    /// `sigma_omega² Δt² / 4`, the exponent of [`Self::temporal_overlap`].
    pub(crate) fn overlap_exponent(&self, delta_t: f64) -> f64 {
        let s = self.sigma_omega() * delta_t;
        0.25 * s * s
    }

    /// Normalized amplitude of the single-photon spectrum centred at
    /// `center`, so that its square is a Gaussian density of variance
    /// `sigma_omega²`.
    pub fn spectral_amplitude(&self, omega: f64, center: f64) -> f64 {
        let var = self.sigma_omega().powi(2);
        let d = omega - center;
        ((-d * d / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()).sqrt()
    }
}
