//! Outcome probabilities of the frequency-resolved two-photon interferometer.
//!
//! A probe photon, emitted at one of two incoherent times `t_s ∓ Δt/2`, meets
//! a reference photon emitted at `t_r` on a balanced beam splitter. Each
//! detected pair is summarized by its frequency difference `Δω = ω − ω'` and
//! whether both photons left by the same port (bunching, `B`) or by different
//! ports (antibunching/coincidence, `A`):
//!
//! ```text
//! P(Δω, X) = ½ η C(Δω) {1 + α(X) ν cos(Δω Δt/2) cos(Δω τ_r)},   α(B) = +1, α(A) = −1
//! ```
//!
//! [`amplitude_oracle`] recomputes the same quantity from two-photon
//! amplitudes and is used to check the closed form.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, uniform_breaks, Tolerance};
use crate::spectral::SpectralProfile;

/// Which output ports fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PortPattern {
    /// One photon at each camera (coincidence).
    A,
    /// Both photons at the same camera.
    B,
}

impl PortPattern {
    pub const ALL: [PortPattern; 2] = [PortPattern::A, PortPattern::B];

    /// Sign of the interference term.
    pub fn alpha(self) -> f64 {
        match self {
            PortPattern::A => -1.0,
            PortPattern::B => 1.0,
        }
    }
}

impl fmt::Display for PortPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PortPattern::A => "A",
            PortPattern::B => "B",
        })
    }
}

impl FromStr for PortPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(PortPattern::A),
            "B" => Ok(PortPattern::B),
            other => Err(invalid("pattern", format!("expected A or B, got {other:?}"))),
        }
    }
}

/// One detected pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub delta_omega: f64,
    pub pattern: PortPattern,
}

impl Outcome {
    pub fn new(delta_omega: f64, pattern: PortPattern) -> Self {
        Self { delta_omega, pattern }
    }
}

/// Physical scenario: spectral profile, delay, indistinguishability,
/// detection efficiency and reference offset `τ_r = t_r − t_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct ExperimentConfig {
    profile: SpectralProfile,
    delta_t: f64,
    nu: f64,
    eta: f64,
    tau_r: f64,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    profile: SpectralProfile,
    delta_t: f64,
    nu: f64,
    eta: f64,
    #[serde(default)]
    tau_r: f64,
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = Error;

    fn try_from(r: RawConfig) -> Result<Self> {
        Self::new(r.profile, r.delta_t, r.nu, r.eta)?.with_tau_r(r.tau_r)
    }
}

impl From<ExperimentConfig> for RawConfig {
    fn from(c: ExperimentConfig) -> Self {
        Self {
            profile: c.profile,
            delta_t: c.delta_t,
            nu: c.nu,
            eta: c.eta,
            tau_r: c.tau_r,
        }
    }
}

impl ExperimentConfig {
    pub fn new(profile: SpectralProfile, delta_t: f64, nu: f64, eta: f64) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t >= 0.0) {
            return Err(invalid(
                "delta_t",
                format!("must be finite and nonnegative, got {delta_t}"),
            ));
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(invalid("nu", format!("must lie in [0, 1], got {nu}")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid("eta", format!("must lie in (0, 1], got {eta}")));
        }
        Ok(Self {
            profile,
            delta_t,
            nu,
            eta,
            tau_r: 0.0,
        })
    }

    /// Unit-width profile, unit efficiency, no reference offset.
    pub fn unit(delta_t: f64, nu: f64) -> Result<Self> {
        Self::new(SpectralProfile::default(), delta_t, nu, 1.0)
    }

    pub fn with_tau_r(mut self, tau_r: f64) -> Result<Self> {
        if !tau_r.is_finite() {
            return Err(invalid("tau_r", "must be finite"));
        }
        self.tau_r = tau_r;
        Ok(self)
    }

    pub fn with_delta_t(self, delta_t: f64) -> Result<Self> {
        Self::new(self.profile, delta_t, self.nu, self.eta)?.with_tau_r(self.tau_r)
    }

    pub fn with_nu(self, nu: f64) -> Result<Self> {
        Self::new(self.profile, self.delta_t, nu, self.eta)?.with_tau_r(self.tau_r)
    }

    pub fn profile(&self) -> SpectralProfile {
        self.profile
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn tau_r(&self) -> f64 {
        self.tau_r
    }

    /// `1 + α(X) ν cos(Δω Δt/2) cos(Δω τ_r)` evaluated at an arbitrary
    /// (possibly negative) delay.
    pub fn bracket(&self, outcome: Outcome, delta_t: f64) -> f64 {
        let w = outcome.delta_omega;
        1.0 + outcome.pattern.alpha() * self.nu * (0.5 * w * delta_t).cos() * (w * self.tau_r).cos()
    }

    /// Closed-form outcome density at an arbitrary delay, with the configured
    /// `ν`, `η` and `τ_r`.
    pub fn density_at(&self, outcome: Outcome, delta_t: f64) -> f64 {
        0.5 * self.eta * self.profile.envelope_density(outcome.delta_omega) * self.bracket(outcome, delta_t)
    }
}

/// Joint density of `(Δω, X)` including the reference offset.
pub fn joint_probability(cfg: &ExperimentConfig, outcome: Outcome) -> f64 {
    cfg.density_at(outcome, cfg.delta_t)
}

/// Joint density with the reference synchronized to the signal centroid
/// (`τ_r = 0`).
pub fn delay_probability(cfg: &ExperimentConfig, outcome: Outcome) -> f64 {
    let w = outcome.delta_omega;
    let bracket = 1.0 + outcome.pattern.alpha() * cfg.nu * (0.5 * w * cfg.delta_t).cos();
    0.5 * cfg.eta * cfg.profile.envelope_density(w) * bracket
}

/// Probability of a bunching event given a detected pair with frequency
/// difference `delta_omega`.
pub fn conditional_bunching_probability(cfg: &ExperimentConfig, delta_omega: f64) -> f64 {
    let p = 0.5 * (1.0 + cfg.nu * (0.5 * delta_omega * cfg.delta_t).cos() * (delta_omega * cfg.tau_r).cos());
    p.clamp(0.0, 1.0)
}

/// Settings of the amplitude-level computation. The result must not depend
/// on either field; they exist so tests can move the spectrum and the time
/// origin around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    /// Carrier frequency of the common spectral amplitude.
    pub center_frequency: f64,
    /// Absolute centroid time `t_s` of the two signal emission times.
    pub t_s: f64,
    /// Absolute quadrature tolerance for a unit-width photon; scaled with
    /// sigma_t like the densities themselves.
    pub tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            center_frequency: 0.0,
            t_s: 0.0,
            tolerance: 1e-14,
        }
    }
}

/// Outcome density computed from two-photon amplitudes: for each emission
/// branch the probe/reference pair is propagated through a balanced beam
/// splitter, the reference is split into a part identical to the probe mode
/// (amplitude `√ν`) and an orthogonal part, detection probabilities are
/// summed over unobserved mode labels, branches are averaged, and the sum
/// frequency is integrated out numerically.
pub fn amplitude_oracle(cfg: &ExperimentConfig, outcome: Outcome) -> Result<f64> {
    amplitude_oracle_with(cfg, outcome, OracleSettings::default())
}

pub fn amplitude_oracle_with(cfg: &ExperimentConfig, outcome: Outcome, settings: OracleSettings) -> Result<f64> {
    let profile = cfg.profile;
    let sigma_w = profile.sigma_omega();
    let t_r = settings.t_s + cfg.tau_r;
    let emission = [settings.t_s - 0.5 * cfg.delta_t, settings.t_s + 0.5 * cfg.delta_t];
    let center = settings.center_frequency;
    let dw = outcome.delta_omega;

    // Two-photon amplitude with the probe at frequency w_probe and the
    // reference at w_ref, for probe emission time t_probe.
    let pair = |w_probe: f64, w_ref: f64, t_probe: f64| -> Complex64 {
        let mag = profile.spectral_amplitude(w_probe, center) * profile.spectral_amplitude(w_ref, center);
        Complex64::from_polar(mag, -(w_probe * t_probe + w_ref * t_r))
    };

    // Beam-splitter transfer: probe port → (c − e)/√2, reference port → (c + e)/√2.
    // Density over ordered frequencies (w, w') with w at camera c for
    // coincidences; bunching densities are spread symmetrically over both
    // orderings and summed over the two cameras.
    let density = |w: f64, w_prime: f64, t_probe: f64| -> f64 {
        let f = pair(w, w_prime, t_probe);
        let f_swapped = pair(w_prime, w, t_probe);
        let (same, distinct) = match outcome.pattern {
            PortPattern::A => {
                // probe→c, ref→e: (+½) f ; probe→e, ref→c: (−½) f_swapped
                let same = (0.5 * f - 0.5 * f_swapped).norm_sqr();
                let distinct = (0.5 * f).norm_sqr() + (0.5 * f_swapped).norm_sqr();
                (same, distinct)
            }
            PortPattern::B => {
                // both at c: (+½); both at e: (−½); each camera holds half of
                // the ordered density.
                let at_c = 0.5 * (0.5 * f + 0.5 * f_swapped).norm_sqr();
                let at_e = 0.5 * (-0.5 * f - 0.5 * f_swapped).norm_sqr();
                let distinct_c = 0.5 * ((0.5 * f).norm_sqr() + (0.5 * f_swapped).norm_sqr());
                let distinct_e = 0.5 * ((-0.5 * f).norm_sqr() + (-0.5 * f_swapped).norm_sqr());
                (at_c + at_e, distinct_c + distinct_e)
            }
        };
        cfg.nu * same + (1.0 - cfg.nu) * distinct
    };

    let integrand = |mean: f64| -> f64 {
        let w = mean + 0.5 * dw;
        let w_prime = mean - 0.5 * dw;
        0.5 * (density(w, w_prime, emission[0]) + density(w, w_prime, emission[1]))
    };

    let half_width = 12.0 * sigma_w;
    let breaks = uniform_breaks(center - half_width, center + half_width, 0.5 * sigma_w);
    let marginal = integrate(
        integrand,
        &breaks,
        Tolerance::absolute(settings.tolerance * profile.sigma_t()),
        5_000,
    )?;
    Ok(cfg.eta * marginal.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(dt: f64, nu: f64) -> ExperimentConfig {
        ExperimentConfig::unit(dt, nu).unwrap()
    }

    #[test]
    fn config_validation() {
        let p = SpectralProfile::default();
        assert!(ExperimentConfig::new(p, -0.1, 0.5, 1.0).is_err());
        assert!(ExperimentConfig::new(p, 1.0, 1.1, 1.0).is_err());
        assert!(ExperimentConfig::new(p, 1.0, -0.1, 1.0).is_err());
        assert!(ExperimentConfig::new(p, 1.0, 0.5, 0.0).is_err());
        assert!(ExperimentConfig::new(p, 1.0, 0.5, 1.01).is_err());
        assert!(ExperimentConfig::new(p, 0.0, 0.0, 1.0).is_ok());
        assert!(cfg(1.0, 1.0).with_tau_r(f64::INFINITY).is_err());
    }

    #[test]
    fn config_serde_validates() {
        let c = cfg(0.8, 0.95).with_tau_r(0.3).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&s).unwrap(), c);
        let bad = s.replace("0.95", "1.5");
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn perfect_hom_dip() {
        let c = cfg(0.0, 1.0);
        for w in [-3.0, -0.2, 0.0, 0.7, 5.0] {
            assert_eq!(joint_probability(&c, Outcome::new(w, PortPattern::A)), 0.0);
            assert_eq!(delay_probability(&c, Outcome::new(w, PortPattern::A)), 0.0);
        }
    }

    #[test]
    fn fig2_values() {
        let b = joint_probability(&cfg(8.0, 1.0), Outcome::new(0.0, PortPattern::B));
        assert!((b - 0.564_190).abs() < 1e-6);
        let a = delay_probability(&cfg(8.0, 0.9), Outcome::new(0.0, PortPattern::A));
        assert!((a - 0.028_209).abs() < 1e-6);
        assert!((a - 0.05 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bunching_vanishes_at_half_beat() {
        for dt in [0.5, 2.0, 8.0] {
            let w = 2.0 * PI / dt;
            let p = joint_probability(&cfg(dt, 1.0), Outcome::new(w, PortPattern::B));
            assert!(p.abs() < 1e-15, "{p}");
        }
    }

    #[test]
    fn delay_probability_matches_joint_at_zero_offset() {
        let c = cfg(2.7, 0.83);
        for w in [-2.0, 0.1, 1.9] {
            for x in PortPattern::ALL {
                let o = Outcome::new(w, x);
                assert_eq!(delay_probability(&c, o), joint_probability(&c, o));
                assert_eq!(delay_probability(&c, o), delay_probability(&c, Outcome::new(-w, x)));
            }
        }
    }

    #[test]
    fn conditional_bunching_values() {
        assert_eq!(conditional_bunching_probability(&cfg(3.0, 1.0), 0.0), 1.0);
        assert_eq!(conditional_bunching_probability(&cfg(3.0, 0.0), 1.234), 0.5);
        let p = conditional_bunching_probability(&cfg(8.0, 0.95), PI / 4.0);
        assert!((p - 0.025).abs() < 1e-15);
    }

    #[test]
    fn oracle_examples() {
        let c = cfg(0.0, 1.0);
        for w in [0.0, 0.4, 2.0] {
            let p = amplitude_oracle(&c, Outcome::new(w, PortPattern::A)).unwrap();
            assert!(p.abs() < 1e-15);
        }
        let o = Outcome::new(0.0, PortPattern::B);
        let p = amplitude_oracle(&cfg(8.0, 1.0), o).unwrap();
        assert!((p - 0.564_190).abs() < 1e-6);

        let c = cfg(3.0, 0.9).with_tau_r(1.5).unwrap();
        let o = Outcome::new(1.0, PortPattern::A);
        assert!((amplitude_oracle(&c, o).unwrap() - joint_probability(&c, o)).abs() < 1e-10);
    }

    #[test]
    fn oracle_is_independent_of_carrier_and_time_origin() {
        let c = ExperimentConfig::new(SpectralProfile::new(0.7).unwrap(), 1.9, 0.6, 0.8)
            .unwrap()
            .with_tau_r(-0.4)
            .unwrap();
        let settings = OracleSettings {
            center_frequency: 3.0,
            t_s: -2.5,
            ..OracleSettings::default()
        };
        for x in PortPattern::ALL {
            for w in [-1.3, 0.0, 0.45, 2.2] {
                let o = Outcome::new(w, x);
                let moved = amplitude_oracle_with(&c, o, settings).unwrap();
                assert!((moved - joint_probability(&c, o)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pattern_parsing() {
        assert_eq!("A".parse::<PortPattern>().unwrap(), PortPattern::A);
        assert_eq!(PortPattern::B.to_string(), "B");
        assert!("C".parse::<PortPattern>().is_err());
    }
}
