//! Maximum-likelihood delay estimation and Monte Carlo convergence studies.
//!
//! Only the delay-dependent factor `1 + α(X) ν cos(Δω Δt/2)` of each outcome
//! probability enters the likelihood. The likelihood is even in `Δt`, so the
//! estimator returns `|Δt|` on `[0, search_max]`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Error, Result};
use crate::fisher::fisher_partial;
use crate::interference::ExperimentConfig;
use crate::sampling::{sample_batch, SampleSet};

/// Brackets below this are floored before taking the log.
const BRACKET_FLOOR: f64 = 1e-300;
/// Brackets below this are logged individually instead of multiplied in.
const DIRECT_LOG_BELOW: f64 = 1e-50;
/// Running products are flushed into the log sum once they leave this range.
const PRODUCT_FLUSH_LOW: f64 = 1e-200;
const PRODUCT_FLUSH_HIGH: f64 = 1e200;

const MAX_GRID_SPACING: f64 = 0.05;
const REFINE_TOLERANCE: f64 = 1e-6;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// `Σ_i ln(1 + α(X_i) ν cos(Δω_i Δt/2))` for the sample set's `ν`.
///
/// Returns negative infinity when some bracket is exactly zero.
pub fn log_likelihood(samples: &SampleSet, delta_t: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let nu = samples.cfg.nu();
    Ok(samples
        .outcomes
        .iter()
        .map(|o| (1.0 + o.pattern.alpha() * nu * (0.5 * o.delta_omega * delta_t).cos()).ln())
        .sum())
}

/// Log-likelihood accumulator that batches logarithms through running
/// products and floors vanishing brackets.
#[derive(Debug, Clone, Copy)]
struct LogAccumulator {
    log_sum: f64,
    product: f64,
    floored: u64,
}

impl LogAccumulator {
    const fn new() -> Self {
        Self {
            log_sum: 0.0,
            product: 1.0,
            floored: 0,
        }
    }

    #[inline]
    fn push(&mut self, bracket: f64) {
        if bracket < DIRECT_LOG_BELOW {
            if bracket < BRACKET_FLOOR {
                self.floored += 1;
            }
            self.log_sum += bracket.max(BRACKET_FLOOR).ln();
        } else {
            self.product *= bracket;
            if !(PRODUCT_FLUSH_LOW..=PRODUCT_FLUSH_HIGH).contains(&self.product) {
                self.log_sum += self.product.ln();
                self.product = 1.0;
            }
        }
    }

    fn finish(self) -> f64 {
        self.log_sum + self.product.ln()
    }
}

/// Per-sample data in the form the likelihood loops need.
struct Terms {
    half_omega: Vec<f64>,
    weight: Vec<f64>,
}

impl Terms {
    fn new(samples: &SampleSet) -> Self {
        let nu = samples.cfg.nu();
        Self {
            half_omega: samples.outcomes.iter().map(|o| 0.5 * o.delta_omega).collect(),
            weight: samples.outcomes.iter().map(|o| o.pattern.alpha() * nu).collect(),
        }
    }

    fn eval(&self, delta_t: f64) -> (f64, u64) {
        let mut acc = LogAccumulator::new();
        for (w, a) in self.half_omega.iter().zip(&self.weight) {
            acc.push(1.0 + a * (w * delta_t).cos());
        }
        (acc.finish(), acc.floored)
    }

    /// Log-likelihood at `k · step` for `k = 0..points`. Cosines along the
    /// grid come from a rotation recurrence, re-anchored every 64 steps.
    fn scan(&self, step: f64, points: usize) -> (Vec<f64>, u64) {
        let mut acc = vec![LogAccumulator::new(); points];
        for (w, a) in self.half_omega.iter().zip(&self.weight) {
            let (sin_d, cos_d) = (w * step).sin_cos();
            let (mut s, mut c) = (0.0_f64, 1.0_f64);
            for (k, slot) in acc.iter_mut().enumerate() {
                if k % 64 == 0 && k > 0 {
                    let exact = (w * step * k as f64).sin_cos();
                    s = exact.0;
                    c = exact.1;
                }
                slot.push(1.0 + a * c);
                let c_next = c * cos_d - s * sin_d;
                s = s * cos_d + c * sin_d;
                c = c_next;
            }
        }
        let floored = acc.iter().map(|a| a.floored).max().unwrap_or(0);
        (acc.into_iter().map(LogAccumulator::finish).collect(), floored)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub estimate: f64,
    pub log_likelihood: f64,
    pub n_samples: usize,
    pub converged: bool,
    pub grid_points_used: usize,
    /// Likelihood terms whose bracket was floored at 1e-300.
    pub floored_terms: u64,
}

/// Maximizes the likelihood over `[0, search_max]`.
///
/// A grid with spacing `min(0.05 sigma_t, π / (2 max|Δω|))` locates the
/// global maximum among the beat-induced local maxima; golden-section search
/// on the two neighbouring cells then refines it to 1e-6 sigma_t.
pub fn mle_estimate(samples: &SampleSet, search_max: f64) -> Result<MleResult> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(search_max > 0.0 && search_max.is_finite()) {
        return Err(invalid("search_max", "must be positive"));
    }
    if samples.cfg.nu() == 0.0 {
        return Err(Error::NonIdentifiable);
    }
    let terms = Terms::new(samples);
    let sigma_t = samples.cfg.profile().sigma_t();

    let max_w = samples.max_abs_delta_omega();
    let mut spacing = MAX_GRID_SPACING * sigma_t;
    if max_w > 0.0 {
        spacing = spacing.min(PI / (2.0 * max_w));
    }
    let cells = (search_max / spacing).ceil() as usize;
    let step = search_max / cells as f64;
    let (grid, floored_grid) = terms.scan(step, cells + 1);

    let (best_k, best_ll) =
        grid.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |(bk, bv), (k, v)| if v > bv { (k, v) } else { (bk, bv) },
        );
    let worst = grid.iter().copied().fold(f64::INFINITY, f64::min);
    if !(best_ll - worst > 1e-12 * (1.0 + best_ll.abs())) {
        return Err(Error::NonIdentifiable);
    }

    let lo = step * best_k.saturating_sub(1) as f64;
    let hi = (step * (best_k + 1) as f64).min(search_max);
    let (x, fx, converged) = golden_max(|t| terms.eval(t).0, lo, hi, REFINE_TOLERANCE * sigma_t);

    let (estimate, ll) = if fx >= best_ll {
        (x, fx)
    } else {
        (step * best_k as f64, best_ll)
    };
    let floored = floored_grid.max(terms.eval(estimate).1);
    Ok(MleResult {
        estimate,
        log_likelihood: ll,
        n_samples: samples.len(),
        converged: converged && ll.is_finite(),
        grid_points_used: cells + 1,
        floored_terms: floored,
    })
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, bool) {
    let ratio = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let converged = b - a <= tol;
    if fc >= fd {
        (c, fc, converged)
    } else {
        (d, fd, converged)
    }
}

/// Statistics of the estimator at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NRecord {
    pub n: usize,
    /// Trials that produced an estimate.
    pub trials: usize,
    pub mean_estimate: f64,
    pub variance: f64,
    /// `variance · N · F`, with `F` per detected pair at the true delay.
    pub variance_over_crb: f64,
    pub mean_over_truth: f64,
    /// 95% jackknife half-width of `variance_over_crb`.
    pub ci_halfwidth: f64,
    /// Trials rejected as non-identifiable.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub per_n: Vec<NRecord>,
    pub truth: f64,
    pub cfg: ExperimentConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub search_max: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self { search_max: 10.0 }
    }
}

/// Stream id of trial `trial` at the `n_index`-th sample size.
pub fn trial_stream(n_index: usize, trial: usize) -> u64 {
    ((n_index as u64) << 32) | trial as u64
}

/// Runs `trials` independent estimates at each sample size in `n_list`.
///
/// Trials run on the ambient rayon pool; each draws from its own stream, so
/// the report does not depend on the number of workers.
pub fn monte_carlo_study(
    cfg: &ExperimentConfig,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    options: StudyOptions,
) -> Result<MonteCarloReport> {
    if trials < 3 {
        return Err(invalid("trials", format!("need at least 3 trials, got {trials}")));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(invalid("n_list", "sample sizes must be positive"));
    }
    if !(cfg.delta_t() > 0.0) {
        return Err(invalid("delta_t", "the study needs a positive true delay"));
    }
    let cfg = cfg.with_tau_r(0.0)?;
    let fisher = fisher_partial(&cfg)?.per_detected_pair().value;
    if !(fisher > 0.0) {
        return Err(Error::UnboundedVariance);
    }
    let search_max = options.search_max * cfg.profile().sigma_t();
    let truth = cfg.delta_t();

    let mut per_n = Vec::with_capacity(n_list.len());
    for (n_index, &n) in n_list.iter().enumerate() {
        let outcomes: Vec<Result<MleResult>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let samples = sample_batch(&cfg, n, seed, trial_stream(n_index, trial))?;
                mle_estimate(&samples, search_max)
            })
            .collect();

        let mut estimates = Vec::with_capacity(trials);
        let mut failures = 0;
        for r in outcomes {
            match r {
                Ok(m) => estimates.push(m.estimate),
                Err(Error::NonIdentifiable) => failures += 1,
                Err(e) => return Err(e),
            }
        }
        if estimates.len() < 3 {
            return Err(Error::NonIdentifiable);
        }
        let stats = VarianceStats::new(&estimates);
        let scale = n as f64 * fisher;
        per_n.push(NRecord {
            n,
            trials: estimates.len(),
            mean_estimate: stats.mean,
            variance: stats.variance,
            variance_over_crb: stats.variance * scale,
            mean_over_truth: stats.mean / truth,
            ci_halfwidth: 1.96 * stats.jackknife_se * scale,
            failures,
        });
    }

    Ok(MonteCarloReport {
        per_n,
        truth,
        cfg,
        seed,
    })
}

/// Sample mean and unbiased variance with the jackknife standard error of
/// the variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceStats {
    pub mean: f64,
    pub variance: f64,
    pub jackknife_se: f64,
}

impl VarianceStats {
    /// Needs at least three values.
    pub fn new(xs: &[f64]) -> Self {
        let m = xs.len() as f64;
        assert!(xs.len() >= 3, "jackknife variance needs at least three values");
        let mean = xs.iter().sum::<f64>() / m;
        let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let variance = ss / (m - 1.0);
        // Leave-one-out variances in closed form.
        let loo: Vec<f64> = xs
            .iter()
            .map(|x| (ss - m / (m - 1.0) * (x - mean).powi(2)) / (m - 2.0))
            .collect();
        let loo_mean = loo.iter().sum::<f64>() / m;
        let jk_var = (m - 1.0) / m * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>();
        Self {
            mean,
            variance,
            jackknife_se: jk_var.sqrt(),
        }
    }
}

/// Weighted one-parameter fit of `variance_over_crb ≈ 1 + a/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    /// 95% confidence interval `(a_min, a_max)`.
    pub a_ci: (f64, f64),
    /// Weighted sum of squared residuals.
    pub sse: f64,
    pub r_squared: f64,
}

/// Fits `1 + a/N` by weighted least squares in the regressor `1/N`, with
/// weights `1/ci_halfwidth²`. The interval uses the residual mean square
/// and Student's t with `points − 1` degrees of freedom. `R²` compares the
/// weighted residuals with the weighted spread of the data about its mean
/// and is negative when the curve fits worse than a constant.
pub fn fit_inverse_n(report: &MonteCarloReport) -> Result<FitResult> {
    let records = &report.per_n;
    let mut distinct: Vec<usize> = records.iter().map(|r| r.n).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateFit("need at least two distinct sample sizes".into()));
    }
    if records.iter().any(|r| !(r.ci_halfwidth > 0.0)) {
        return Err(Error::DegenerateFit("confidence half-widths must be positive".into()));
    }

    let w: Vec<f64> = records.iter().map(|r| r.ci_halfwidth.powi(-2)).collect();
    let x: Vec<f64> = records.iter().map(|r| 1.0 / r.n as f64).collect();
    let v: Vec<f64> = records.iter().map(|r| r.variance_over_crb).collect();

    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = (0..v.len()).map(|i| w[i] * x[i] * (v[i] - 1.0)).sum();
    let a = sxy / sxx;

    let sse: f64 = (0..v.len()).map(|i| w[i] * (v[i] - 1.0 - a * x[i]).powi(2)).sum();
    let w_sum: f64 = w.iter().sum();
    let v_mean = w.iter().zip(&v).map(|(w, v)| w * v).sum::<f64>() / w_sum;
    let sst: f64 = w.iter().zip(&v).map(|(w, v)| w * (v - v_mean).powi(2)).sum();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };

    let dof = (v.len() - 1) as f64;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(FitResult {
        a,
        a_ci: (a - t * se, a + t * se),
        sse,
        r_squared,
    })
}

/// Versioned serialized form of a study and its fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub report: MonteCarloReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit: Option<FitResult>,
}

impl ReportDocument {
    pub fn new(report: MonteCarloReport, fit: Option<FitResult>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            report,
            fit,
        }
    }
}
