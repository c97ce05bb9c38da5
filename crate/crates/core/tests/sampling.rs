mod common;

use beatdelay::sampling::stream_rng;
use beatdelay::{sample_batch, sample_outcome, ExperimentConfig, PortPattern};

#[test]
fn frequency_difference_has_envelope_variance() {
    let cfg = ExperimentConfig::unit(2.0, 1.0).unwrap();
    let s = sample_batch(&cfg, 1_000_000, 1, 0).unwrap();
    let mean_sq = s.outcomes.iter().map(|o| o.delta_omega.powi(2)).sum::<f64>() / s.len() as f64;
    let expected = 2.0 * cfg.profile().sigma_omega().powi(2);
    assert!((mean_sq / expected - 1.0).abs() < 0.01, "{mean_sq} vs {expected}");
}

#[test]
fn bunching_fraction_matches_overlap() {
    // ν = 1, Δt = 2: P(B) = ½(1 + e^{-1/4}) = 0.889400...
    let cfg = ExperimentConfig::unit(2.0, 1.0).unwrap();
    let n = 1_000_000;
    let s = sample_batch(&cfg, n, 2, 0).unwrap();
    let p = 0.5 * (1.0 + (-0.25f64).exp());
    assert!((p - 0.889400).abs() < 1e-6);
    let observed = s.outcomes.iter().filter(|o| o.pattern == PortPattern::B).count() as f64 / n as f64;
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    assert!((observed - p).abs() < 3.0 * sd, "{observed} vs {p}");
}

#[test]
fn joint_histogram_fits_closed_form() {
    for (k, (nu, dt)) in [(1.0, 0.6), (0.95, 0.6), (0.5, 3.0), (0.0, 1.0)]
        .into_iter()
        .enumerate()
    {
        let cfg = ExperimentConfig::unit(dt, nu).unwrap();
        let s = sample_batch(&cfg, 200_000, 3, k as u64).unwrap();
        let fit = common::chi_square_joint(&s, 50);
        assert!(fit.p_value > 0.001, "nu={nu} dt={dt}: {fit:?}");
    }
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let cfg = ExperimentConfig::unit(0.8, 1.0).unwrap();
    let a = sample_batch(&cfg, 1000, 7, 3).unwrap();
    let b = sample_batch(&cfg, 1000, 7, 3).unwrap();
    let c = sample_batch(&cfg, 1000, 7, 4).unwrap();
    let d = sample_batch(&cfg, 1000, 8, 3).unwrap();
    assert_eq!(a.outcomes, b.outcomes);
    assert_ne!(a.outcomes, c.outcomes);
    assert_ne!(a.outcomes, d.outcomes);

    let mut rng = stream_rng(7, 3);
    let first: Vec<_> = (0..1000).map(|_| sample_outcome(&cfg, &mut rng)).collect();
    assert_eq!(first, a.outcomes);
}

#[test]
fn zero_samples_rejected() {
    let cfg = ExperimentConfig::unit(0.8, 1.0).unwrap();
    assert!(sample_batch(&cfg, 0, 1, 0).is_err());
}
