//! Fisher information of the frequency-resolved scheme, its bucket-detector
//! reduction, the quantum limit, and the Cramér–Rao bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interference::ExperimentConfig;
use crate::quadrature::{integrate, uniform_breaks, Tolerance};
use crate::spectral::SpectralProfile;

/// Half-width of the Δω integration window in units of sigma_omega; the
/// envelope tail beyond it is below 1e-20.
const WINDOW: f64 = 14.0;

/// How a Fisher value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FisherMethod {
    Analytic,
    Quadrature,
    Asymptote,
    Bucket,
    QuantumLimit,
}

/// Normalization of a Fisher value with respect to detector efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaConvention {
    /// Information per emitted pair (carries the factor η).
    PerEmittedPair,
    /// Information per detected pair (η divided out).
    PerDetectedPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    pub value: f64,
    pub method: FisherMethod,
    /// Estimated absolute quadrature error, zero for closed forms.
    pub quadrature_error: f64,
    pub convention: EtaConvention,
    /// Efficiency the value was computed with.
    pub eta: f64,
}

impl FisherReport {
    fn closed(value: f64, method: FisherMethod, eta: f64) -> Self {
        Self {
            value,
            method,
            quadrature_error: 0.0,
            convention: EtaConvention::PerEmittedPair,
            eta,
        }
    }

    /// Same information expressed per detected pair.
    pub fn per_detected_pair(self) -> Self {
        match self.convention {
            EtaConvention::PerDetectedPair => self,
            EtaConvention::PerEmittedPair => Self {
                value: self.value / self.eta,
                quadrature_error: self.quadrature_error / self.eta,
                convention: EtaConvention::PerDetectedPair,
                ..self
            },
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(invalid("eta", format!("must lie in (0, 1], got {eta}")))
    }
}

/// Quantum Fisher information for the delay, `sigma_omega²`.
pub fn quantum_limit(profile: &SpectralProfile) -> FisherReport {
    let q = profile.sigma_omega().powi(2);
    FisherReport {
        value: q,
        method: FisherMethod::QuantumLimit,
        quadrature_error: 0.0,
        convention: EtaConvention::PerDetectedPair,
        eta: 1.0,
    }
}

/// Fisher information for identical photons, `η sigma_omega² / 2`, for
/// every delay.
pub fn fisher_indistinguishable(profile: &SpectralProfile, eta: f64) -> Result<FisherReport> {
    check_eta(eta)?;
    let f = eta * profile.sigma_omega().powi(2) / 2.0;
    Ok(FisherReport::closed(f, FisherMethod::Analytic, eta))
}

/// Large-delay limit `(1 − √(1−ν²)) η sigma_omega² / 2`.
pub fn fisher_asymptote(profile: &SpectralProfile, nu: f64, eta: f64) -> Result<FisherReport> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(invalid("nu", format!("must lie in [0, 1], got {nu}")));
    }
    let base = fisher_indistinguishable(profile, eta)?.value;
    let factor = 1.0 - ((1.0 - nu) * (1.0 + nu)).sqrt();
    Ok(FisherReport::closed(factor * base, FisherMethod::Asymptote, eta))
}

/// Fisher information of the frequency-resolved measurement at the
/// configured delay and indistinguishability.
///
/// `ν = 1` is answered in closed form. Otherwise
/// `(η/4) ∫ C(Δω) Δω² ν² sin²x / ((1 − ν cos x)(1 + ν cos x)) dΔω` with
/// `x = Δω Δt / 2` is integrated adaptively over a window of ±14 sigma_omega,
/// with initial panels no wider than an eighth of the beat period `4π/Δt`.
pub fn fisher_partial(cfg: &ExperimentConfig) -> Result<FisherReport> {
    let profile = cfg.profile();
    let (nu, eta, dt) = (cfg.nu(), cfg.eta(), cfg.delta_t());
    if nu == 1.0 {
        return fisher_indistinguishable(&profile, eta);
    }
    if nu == 0.0 || dt == 0.0 {
        return Ok(FisherReport {
            value: 0.0,
            method: FisherMethod::Quadrature,
            quadrature_error: 0.0,
            convention: EtaConvention::PerEmittedPair,
            eta,
        });
    }

    let sigma_w = profile.sigma_omega();
    let nu2 = nu * nu;
    let integrand = |w: f64| {
        let x = 0.5 * w * dt;
        let (s, c) = x.sin_cos();
        let ratio = nu2 * s * s / ((1.0 - nu * c) * (1.0 + nu * c));
        profile.envelope_density(w) * w * w * ratio
    };
    let panel = (sigma_w).min(4.0 * PI / dt / 8.0);
    let breaks = uniform_breaks(0.0, WINDOW * sigma_w, panel);
    let scale = 0.5 * eta * sigma_w * sigma_w;
    let tol = Tolerance {
        abs: 1e-13 * scale,
        rel: 1e-11,
    };
    // The integrand is even; integrate the positive half and double.
    let half = integrate(integrand, &breaks, tol, 200_000)?;
    let prefactor = 0.25 * eta * 2.0;
    Ok(FisherReport {
        value: prefactor * half.value,
        method: FisherMethod::Quadrature,
        quadrature_error: prefactor * half.abs_error,
        convention: EtaConvention::PerEmittedPair,
        eta,
    })
}

/// Fisher information of the port pattern alone (no frequency resolution).
///
/// With `p_B = ½(1 + ν g(Δt))` and `g(Δt) = exp(−sigma_omega² Δt² / 4)` the
/// binary outcome carries `η (dp_B/dΔt)² / (p_B (1 − p_B))`. `1 − g` is formed
/// with `expm1` so the `ν = 1, Δt → 0` limit `η sigma_omega² / 2` is reached
/// without cancellation; `Δt = 0` itself returns that limit for `ν = 1`.
pub fn bucket_fisher(cfg: &ExperimentConfig) -> FisherReport {
    let profile = cfg.profile();
    let (nu, eta, dt) = (cfg.nu(), cfg.eta(), cfg.delta_t());
    let sigma_w2 = profile.sigma_omega().powi(2);
    let bucket = |value| FisherReport::closed(value, FisherMethod::Bucket, eta);

    if nu == 0.0 {
        return bucket(0.0);
    }
    if dt == 0.0 {
        return bucket(if nu == 1.0 { eta * sigma_w2 / 2.0 } else { 0.0 });
    }

    let s = profile.overlap_exponent(dt);
    let g = (-s).exp();
    let one_minus_g = -(-s).exp_m1();
    let dp = 0.5 * nu * (-0.5 * sigma_w2 * dt * g);
    let p_b = 0.5 * (1.0 + nu * g);
    let p_a = 0.5 * ((1.0 - nu) + nu * one_minus_g);
    if p_a <= 0.0 {
        return bucket(0.0);
    }
    bucket(eta * dp * dp / (p_b * p_a))
}

/// Cramér–Rao variance bound `1 / (N F)`.
pub fn crb(fisher: &FisherReport, n_pairs: u64) -> Result<f64> {
    if n_pairs == 0 {
        return Err(invalid("n_pairs", "must be at least 1"));
    }
    if !(fisher.value > 0.0) {
        return Err(Error::UnboundedVariance);
    }
    Ok(1.0 / (n_pairs as f64 * fisher.value))
}

/// Timing precision reachable in a measurement campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionBudget {
    /// Pairs reaching the detectors over the campaign, `rate · duration`.
    pub pairs: f64,
    /// Fisher information per pair in 1/s².
    pub fisher: f64,
    /// CRB-limited standard deviation of the delay, in seconds.
    pub std_seconds: f64,
}

/// CRB-limited standard deviation after `duration` seconds at a pair rate
/// `rate` (per second), for photons of temporal width `sigma_t` seconds.
///
/// `ν = 1` uses the delay-independent closed form; `ν < 1` uses the
/// large-delay asymptote.
pub fn precision_budget(rate: f64, duration: f64, sigma_t: f64, eta: f64, nu: f64) -> Result<PrecisionBudget> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(invalid("rate", "must be positive"));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(invalid("duration", "must be positive"));
    }
    if !(nu > 0.0) {
        return Err(invalid("nu", "must be positive"));
    }
    // Work with sigma_t as the time unit and restore seconds at the end.
    let unit = SpectralProfile::default();
    let f_unit = if nu == 1.0 {
        fisher_indistinguishable(&unit, eta)?
    } else {
        fisher_asymptote(&unit, nu, eta)?
    };
    SpectralProfile::new(sigma_t)?;
    let pairs = rate * duration;
    let std_unit = 1.0 / (pairs * f_unit.value).sqrt();
    Ok(PrecisionBudget {
        pairs,
        fisher: f_unit.value / (sigma_t * sigma_t),
        std_seconds: std_unit * sigma_t,
    })
}
