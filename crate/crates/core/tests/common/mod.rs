#![allow(dead_code)]

use std::f64::consts::PI;

use beatdelay::quadrature::{integrate, uniform_breaks, Tolerance};
use beatdelay::{delay_probability, ExperimentConfig, Outcome, PortPattern, SampleSet};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// ∫ delay_probability dΔω over [lo, hi] for one pattern.
pub fn cell_probability(cfg: &ExperimentConfig, pattern: PortPattern, lo: f64, hi: f64) -> f64 {
    let sigma_w = cfg.profile().sigma_omega();
    let lo = lo.max(-14.0 * sigma_w);
    let hi = hi.min(14.0 * sigma_w);
    if hi <= lo {
        return 0.0;
    }
    let width = if cfg.delta_t() > 0.0 {
        (4.0 * PI / cfg.delta_t() / 8.0).min(sigma_w)
    } else {
        sigma_w
    };
    integrate(
        |w| delay_probability(cfg, Outcome::new(w, pattern)),
        &uniform_breaks(lo, hi, width),
        Tolerance::absolute(1e-14),
        100_000,
    )
    .unwrap()
    .value
}

#[derive(Debug)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub cells: usize,
    pub p_value: f64,
}

/// Chi-square goodness of fit of the joint `(Δω, X)` histogram against the
/// closed-form law, with `bins` equiprobable Δω bins per pattern. Adjacent
/// cells of one pattern are pooled until each expects at least five counts.
pub fn chi_square_joint(samples: &SampleSet, bins: usize) -> ChiSquareOutcome {
    let cfg = &samples.cfg;
    let n = samples.len() as f64;
    let marginal = Normal::new(0.0, std::f64::consts::SQRT_2 * cfg.profile().sigma_omega()).unwrap();
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend((1..bins).map(|k| marginal.inverse_cdf(k as f64 / bins as f64)));
    edges.push(f64::INFINITY);

    let bin_of = |w: f64| edges.partition_point(|e| *e <= w) - 1;
    let mut statistic = 0.0;
    let mut cells = 0;
    for pattern in PortPattern::ALL {
        let mut observed = vec![0.0; bins];
        for o in samples.outcomes.iter().filter(|o| o.pattern == pattern) {
            observed[bin_of(o.delta_omega)] += 1.0;
        }
        let expected: Vec<f64> = edges
            .windows(2)
            .map(|w| n * cell_probability(cfg, pattern, w[0], w[1]) / cfg.eta())
            .collect();

        let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
        for k in 0..bins {
            obs_acc += observed[k];
            exp_acc += expected[k];
            if exp_acc >= 5.0 {
                statistic += (obs_acc - exp_acc).powi(2) / exp_acc;
                cells += 1;
                obs_acc = 0.0;
                exp_acc = 0.0;
            }
        }
        if exp_acc > 0.0 || obs_acc > 0.0 {
            // Fold the remainder into a final cell.
            statistic += (obs_acc - exp_acc).powi(2) / exp_acc.max(1e-300);
            cells += 1;
        }
    }
    let dof = (cells - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(statistic);
    ChiSquareOutcome {
        statistic,
        cells,
        p_value,
    }
}

/// Monte Carlo `E[score²]` with the score from a central difference of
/// `ln delay_probability` in the delay.
pub fn score_fisher(samples: &SampleSet, step: f64) -> f64 {
    let cfg = &samples.cfg;
    let dt = cfg.delta_t();
    let sum: f64 = samples
        .outcomes
        .iter()
        .map(|&o| {
            let up = cfg.density_at(o, dt + step).ln();
            let down = cfg.density_at(o, dt - step).ln();
            let s = (up - down) / (2.0 * step);
            s * s
        })
        .sum();
    sum / samples.len() as f64
}
