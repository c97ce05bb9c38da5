//! Classical baseline: time-resolved direct detection of the arrival time of
//! a photon from either of the two incoherent signals.
//!
//! The arrival time is an equal mixture of two Gaussians of width sigma_t
//! centred at `±Δt/2` (origin at the signal centroid). A detector with
//! finite resolution `T` only reports which bin of width `T` the photon fell
//! into.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};
use crate::fisher::{EtaConvention, FisherMethod, FisherReport};
use crate::quadrature::{integrate, uniform_breaks, Tolerance};
use crate::spectral::SpectralProfile;

/// Probability mass below which a bin is dropped from the Fisher sum.
const MIN_BIN_MASS: f64 = 1e-300;
/// Tail mass allowed outside the binned window.
const MAX_OUTSIDE_MASS: f64 = 1e-10;

/// Rectangular binning of the arrival-time axis.
///
/// Bin edges sit at `offset + k·resolution`; with the default zero offset the
/// edge set is symmetric about the signal centroid. Edges are laid over
/// `[-extent, extent]` and the two half-lines beyond it form one overflow bin
/// each. All lengths are in units of sigma_t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionGrid {
    pub resolution: f64,
    pub extent: f64,
    pub offset: f64,
}

impl DetectionGrid {
    pub const DEFAULT_EXTENT: f64 = 12.0;

    pub fn new(resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(invalid("resolution", format!("must be positive, got {resolution}")));
        }
        Ok(Self {
            resolution,
            extent: Self::DEFAULT_EXTENT,
            offset: 0.0,
        })
    }

    /// Grid whose window is wide enough for the given delay:
    /// `extent = max(12, 5·max(1, Δt))` sigma_t.
    pub fn covering(resolution: f64, delta_t: f64) -> Result<Self> {
        let mut grid = Self::new(resolution)?;
        grid.extent = Self::DEFAULT_EXTENT.max(5.0 * delta_t.abs().max(1.0));
        Ok(grid)
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_extent(mut self, extent: f64) -> Self {
        self.extent = extent;
        self
    }

    fn validate(&self, profile: &SpectralProfile, delta_t: f64) -> Result<()> {
        let sigma = profile.sigma_t();
        let needed = 5.0 * sigma.max(delta_t.abs());
        if !(self.extent * sigma >= needed) {
            return Err(invalid(
                "extent",
                format!("{} sigma_t is narrower than 5·max(sigma_t, Δt)", self.extent),
            ));
        }
        let outside = 2.0 * gaussian_mass(self.extent * sigma - 0.5 * delta_t.abs(), f64::INFINITY, 0.0, sigma);
        if outside > MAX_OUTSIDE_MASS {
            return Err(invalid("extent", format!("mass outside window is {outside:.3e}")));
        }
        Ok(())
    }

    /// Bin edges including the two infinite ends, in units of sigma_t.
    pub fn edges(&self) -> Vec<f64> {
        let t = self.resolution;
        let k_lo = ((-self.extent - self.offset) / t).floor() as i64;
        let k_hi = ((self.extent - self.offset) / t).ceil() as i64;
        let mut edges = Vec::with_capacity((k_hi - k_lo + 3) as usize);
        edges.push(f64::NEG_INFINITY);
        edges.extend((k_lo..=k_hi).map(|k| self.offset + k as f64 * t));
        edges.push(f64::INFINITY);
        edges
    }
}

/// Mass of `N(mean, sigma²)` on `[lo, hi]`, accurate in both tails.
fn gaussian_mass(lo: f64, hi: f64, mean: f64, sigma: f64) -> f64 {
    let za = (lo - mean) / sigma;
    let zb = (hi - mean) / sigma;
    let upper = |z: f64| 0.5 * erfc(z / SQRT_2);
    if za >= 0.0 {
        upper(za) - upper(zb)
    } else if zb <= 0.0 {
        upper(-zb) - upper(-za)
    } else {
        1.0 - upper(-za) - upper(zb)
    }
}

fn gaussian(u: f64, sigma: f64) -> f64 {
    (-0.5 * (u / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Arrival-time density `½[G(t + Δt/2) + G(t − Δt/2)]`.
pub fn arrival_density(profile: &SpectralProfile, delta_t: f64, t: f64) -> f64 {
    let s = profile.sigma_t();
    0.5 * (gaussian(t + 0.5 * delta_t, s) + gaussian(t - 0.5 * delta_t, s))
}

fn arrival_density_derivative(profile: &SpectralProfile, delta_t: f64, t: f64) -> f64 {
    let s = profile.sigma_t();
    let g_prime = |u: f64| -u / (s * s) * gaussian(u, s);
    0.25 * (g_prime(t + 0.5 * delta_t) - g_prime(t - 0.5 * delta_t))
}

/// Fisher information of a perfectly resolved arrival time,
/// `∫ (∂p/∂Δt)² / p dt`.
pub fn trd_fisher_unbinned(profile: &SpectralProfile, delta_t: f64) -> Result<FisherReport> {
    if !(delta_t.is_finite() && delta_t >= 0.0) {
        return Err(invalid("delta_t", "must be finite and nonnegative"));
    }
    let report = |value, err| FisherReport {
        value,
        method: FisherMethod::Quadrature,
        quadrature_error: err,
        convention: EtaConvention::PerDetectedPair,
        eta: 1.0,
    };
    if delta_t == 0.0 {
        return Ok(report(0.0, 0.0));
    }
    let s = profile.sigma_t();
    let integrand = |t: f64| {
        let p = arrival_density(profile, delta_t, t);
        if p < MIN_BIN_MASS {
            return 0.0;
        }
        let d = arrival_density_derivative(profile, delta_t, t);
        d * d / p
    };
    // Even in t: integrate the positive half-line and double.
    let hi = 0.5 * delta_t + 14.0 * s;
    let breaks = uniform_breaks(0.0, hi, 0.5 * s);
    let half = integrate(
        integrand,
        &breaks,
        Tolerance {
            abs: 1e-300,
            rel: 1e-11,
        },
        100_000,
    )?;
    Ok(report(2.0 * half.value, 2.0 * half.abs_error))
}

/// Binned Fisher information together with bookkeeping about the bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinnedFisher {
    pub report: FisherReport,
    pub bins: usize,
    /// Bins whose mass fell below 1e-300 and were left out of the sum.
    pub excluded_bins: usize,
}

/// Probability of each bin at the given delay.
pub fn bin_masses(profile: &SpectralProfile, delta_t: f64, grid: &DetectionGrid) -> Vec<f64> {
    let s = profile.sigma_t();
    let edges: Vec<f64> = grid.edges().into_iter().map(|e| e * s).collect();
    edges
        .windows(2)
        .map(|w| 0.5 * (gaussian_mass(w[0], w[1], -0.5 * delta_t, s) + gaussian_mass(w[0], w[1], 0.5 * delta_t, s)))
        .collect()
}

/// Multinomial Fisher information `Σ_k (dq_k/dΔt)² / q_k` of the bin
/// counts, with `dq_k/dΔt` from a central difference of step `1e-4 sigma_t`.
pub fn trd_fisher_binned(profile: &SpectralProfile, delta_t: f64, grid: &DetectionGrid) -> Result<BinnedFisher> {
    if !(delta_t.is_finite() && delta_t >= 0.0) {
        return Err(invalid("delta_t", "must be finite and nonnegative"));
    }
    grid.validate(profile, delta_t)?;
    let h = 1e-4 * profile.sigma_t();
    let q = bin_masses(profile, delta_t, grid);
    let q_plus = bin_masses(profile, delta_t + h, grid);
    let q_minus = bin_masses(profile, delta_t - h, grid);

    let mut value = 0.0;
    let mut excluded = 0;
    for k in 0..q.len() {
        if q[k] < MIN_BIN_MASS {
            excluded += 1;
            continue;
        }
        let dq = (q_plus[k] - q_minus[k]) / (2.0 * h);
        value += dq * dq / q[k];
    }
    Ok(BinnedFisher {
        report: FisherReport {
            value,
            method: FisherMethod::Quadrature,
            quadrature_error: 0.0,
            convention: EtaConvention::PerDetectedPair,
            eta: 1.0,
        },
        bins: q.len(),
        excluded_bins: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SpectralProfile {
        SpectralProfile::default()
    }

    #[test]
    fn density_values() {
        let p = unit();
        assert!((arrival_density(&p, 0.0, 0.0) - 0.398_942).abs() < 1e-6);
        let far = arrival_density(&p, 6.0, 3.0);
        assert!((far - 0.5 / (2.0 * PI).sqrt()).abs() < 1e-8);
        assert!((far - 0.199_476).abs() < 1e-5);
        assert_eq!(arrival_density(&p, 2.0, 0.7), arrival_density(&p, 2.0, -0.7));
    }

    #[test]
    fn density_is_normalized() {
        let p = SpectralProfile::new(1.7).unwrap();
        for dt in [0.0, 1.0, 6.0] {
            let lim = 0.5 * dt + 15.0 * 1.7;
            let r = integrate(
                |t| arrival_density(&p, dt, t),
                &uniform_breaks(-lim, lim, 0.8),
                Tolerance::absolute(1e-13),
                1000,
            )
            .unwrap();
            assert!((r.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = unit();
        for (dt, t) in [(0.5, 0.3), (2.0, -1.1), (4.0, 2.5)] {
            let h = 1e-6;
            let fd = (arrival_density(&p, dt + h, t) - arrival_density(&p, dt - h, t)) / (2.0 * h);
            assert!((fd - arrival_density_derivative(&p, dt, t)).abs() < 1e-9);
        }
    }

    #[test]
    fn unbinned_examples() {
        let p = unit();
        assert_eq!(trd_fisher_unbinned(&p, 0.0).unwrap().value, 0.0);
        let far = trd_fisher_unbinned(&p, 10.0).unwrap().value;
        assert!((far / 0.25 - 1.0).abs() < 0.01, "{far}");
        let f1 = trd_fisher_unbinned(&p, 0.01).unwrap().value;
        let f2 = trd_fisher_unbinned(&p, 0.02).unwrap().value;
        assert!((f2 / f1 - 4.0).abs() < 0.2, "{}", f2 / f1);
    }

    #[test]
    fn gaussian_mass_tails() {
        assert!((gaussian_mass(f64::NEG_INFINITY, f64::INFINITY, 0.3, 1.0) - 1.0).abs() < 1e-15);
        let tail = gaussian_mass(30.0, f64::INFINITY, 0.0, 1.0);
        assert!(tail > 0.0 && tail < 1e-190);
        let a = gaussian_mass(-1.0, 2.0, 0.0, 1.0);
        assert!((a - 0.818_594_614_3).abs() < 1e-9);
    }

    #[test]
    fn grid_edges() {
        let g = DetectionGrid::new(5.0).unwrap();
        let e = g.edges();
        assert_eq!(e.first(), Some(&f64::NEG_INFINITY));
        assert_eq!(e.last(), Some(&f64::INFINITY));
        let finite: Vec<f64> = e[1..e.len() - 1].to_vec();
        assert!(finite.contains(&0.0));
        for x in &finite {
            assert!(finite.contains(&-x));
        }
        assert!(DetectionGrid::new(0.0).is_err());
    }

    #[test]
    fn grid_rejects_narrow_window() {
        let g = DetectionGrid::new(1.0).unwrap();
        assert!(trd_fisher_binned(&unit(), 6.0, &g).is_err());
        let g = DetectionGrid::covering(1.0, 6.0).unwrap();
        assert!(trd_fisher_binned(&unit(), 6.0, &g).is_ok());
    }

    #[test]
    fn finite_difference_bin_derivative_matches_analytic() {
        let p = unit();
        let grid = DetectionGrid::covering(1.5, 2.0).unwrap();
        let dt = 2.0;
        let h = 1e-4;
        let plus = bin_masses(&p, dt + h, &grid);
        let minus = bin_masses(&p, dt - h, &grid);
        let edges = grid.edges();
        let phi = |z: f64| {
            if z.is_infinite() {
                0.0
            } else {
                (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
            }
        };
        for (k, w) in edges.windows(2).enumerate() {
            // d/dμ of mass on [a, b] for N(μ, 1) is φ(a − μ) − φ(b − μ).
            let dm = |mu: f64| phi(w[0] - mu) - phi(w[1] - mu);
            let analytic = 0.5 * (0.5 * dm(0.5 * dt) - 0.5 * dm(-0.5 * dt));
            let fd = (plus[k] - minus[k]) / (2.0 * h);
            assert!((fd - analytic).abs() < 1e-9, "bin {k}: {fd} vs {analytic}");
        }
    }

    #[test]
    fn binned_examples() {
        let p = unit();
        for t in [0.05, 5.0, 10.0] {
            let g = DetectionGrid::new(t).unwrap();
            assert_eq!(trd_fisher_binned(&p, 0.0, &g).unwrap().report.value, 0.0);
        }
        let fine = trd_fisher_binned(&p, 2.0, &DetectionGrid::new(0.05).unwrap()).unwrap();
        let exact = trd_fisher_unbinned(&p, 2.0).unwrap().value;
        assert!((fine.report.value / exact - 1.0).abs() < 0.02);

        let coarse = trd_fisher_binned(&p, 3.0, &DetectionGrid::covering(10.0, 3.0).unwrap()).unwrap();
        assert!(coarse.report.value < 0.05 * 0.25);
    }

    #[test]
    fn offset_changes_binned_information() {
        let p = unit();
        let g = DetectionGrid::new(5.0).unwrap();
        let centred = trd_fisher_binned(&p, 1.0, &g).unwrap().report.value;
        let shifted = trd_fisher_binned(&p, 1.0, &g.with_offset(2.5)).unwrap().report.value;
        assert!((centred - shifted).abs() > 1e-6);
    }
}
