use std::fs::File;
use std::io::{self, BufWriter, Write};

use beatdelay::{
    delay_probability, fisher_partial, fit_inverse_n, joint_probability, monte_carlo_study, precision_budget,
    quantum_limit, trd_fisher_binned, trd_fisher_unbinned, DetectionGrid, ExperimentConfig, Outcome, PortPattern,
    ReportDocument, SpectralProfile, StudyOptions,
};
use serde_json::json;

use crate::args::{BeatCurveArgs, BudgetArgs, Cli, Command, Common, FisherScanArgs, Format, SimulateArgs};
use crate::error::CliError;

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|k| lo + step * k as f64).collect()
}

fn open_output(common: &Common) -> Result<Box<dyn Write>, CliError> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_positive_count(name: &'static str, value: usize) -> Result<(), CliError> {
    if value == 0 {
        return Err(beatdelay::Error::InvalidParameter {
            name,
            reason: "must be at least 1".into(),
        }
        .into());
    }
    Ok(())
}

fn check_sigma_fs(common: &Common) -> Result<(), CliError> {
    match common.sigma_t_fs {
        Some(fs) if !(fs > 0.0 && fs.is_finite()) => Err(beatdelay::Error::InvalidParameter {
            name: "sigma-t-fs",
            reason: format!("must be positive, got {fs}"),
        }
        .into()),
        _ => Ok(()),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    check_sigma_fs(cli.command.common())?;
    match cli.command {
        Command::BeatCurve(a) => beat_curve(a),
        Command::FisherScan(a) => fisher_scan(a),
        Command::Simulate(a) => simulate(a),
        Command::Budget(a) => budget(a),
    }
}

fn beat_curve(args: BeatCurveArgs) -> Result<(), CliError> {
    check_positive_count("points", args.points)?;
    if !(args.range > 0.0 && args.range.is_finite()) {
        return Err(beatdelay::Error::InvalidParameter {
            name: "range",
            reason: "must be positive".into(),
        }
        .into());
    }
    let c = &args.common;
    let cfg = ExperimentConfig::new(
        SpectralProfile::default(),
        c.to_sigma_units(args.delta_t),
        args.nu,
        args.eta,
    )?
    .with_tau_r(c.to_sigma_units(args.tau_r))?;
    let sigma_w = cfg.profile().sigma_omega();

    let rows: Vec<(f64, f64, f64)> = linspace(-args.range, args.range, args.points)
        .into_iter()
        .map(|x| {
            let w = x * sigma_w;
            let p = |pattern| {
                let o = Outcome::new(w, pattern);
                if cfg.tau_r() == 0.0 {
                    delay_probability(&cfg, o)
                } else {
                    joint_probability(&cfg, o)
                }
            };
            (x, p(PortPattern::A), p(PortPattern::B))
        })
        .collect();

    let mut out = open_output(c)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "delta_omega_over_sigma_omega,p_coincidence,p_bunching")?;
            for (x, a, b) in rows {
                writeln!(out, "{},{},{}", num(x), num(a), num(b))?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .into_iter()
                .map(|(x, a, b)| json!({"delta_omega_over_sigma_omega": x, "p_coincidence": a, "p_bunching": b}))
                .collect();
            serde_json::to_writer_pretty(&mut out, &json!({ "cfg": cfg, "rows": rows })).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

struct ScanRow {
    delta_t: f64,
    series: &'static str,
    label: String,
    f_over_q: f64,
}

fn fisher_scan(args: FisherScanArgs) -> Result<(), CliError> {
    check_positive_count("points", args.points)?;
    let c = &args.common;
    let profile = SpectralProfile::default();
    let q = quantum_limit(&profile).value;
    let dt_max = c.to_sigma_units(args.dt_max);
    if !(dt_max >= 0.0 && dt_max.is_finite()) {
        return Err(beatdelay::Error::InvalidParameter {
            name: "dt-max",
            reason: "must be nonnegative".into(),
        }
        .into());
    }
    // Validate every series before computing anything.
    let base = ExperimentConfig::new(profile, 0.0, 1.0, args.eta)?;
    for &nu in &args.nu {
        base.with_nu(nu)?;
    }
    let resolutions: Vec<f64> = args.resolutions.iter().map(|&t| c.to_sigma_units(t)).collect();
    for &t in &resolutions {
        DetectionGrid::new(t)?;
    }

    let mut rows = Vec::new();
    for dt in linspace(0.0, dt_max, args.points) {
        for &nu in &args.nu {
            let cfg = base.with_delta_t(dt)?.with_nu(nu)?;
            rows.push(ScanRow {
                delta_t: dt,
                series: "fr",
                label: format!("nu={nu}"),
                f_over_q: fisher_partial(&cfg)?.value / q,
            });
        }
        for (&t, &raw) in resolutions.iter().zip(&args.resolutions) {
            let grid = DetectionGrid::covering(t, dt)?;
            rows.push(ScanRow {
                delta_t: dt,
                series: "trd",
                label: format!("T={raw}"),
                f_over_q: trd_fisher_binned(&profile, dt, &grid)?.report.value / q,
            });
        }
        rows.push(ScanRow {
            delta_t: dt,
            series: "trd",
            label: "unbinned".into(),
            f_over_q: trd_fisher_unbinned(&profile, dt)?.value / q,
        });
    }

    let mut out = open_output(c)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "delta_t_over_sigma_t,series,label,f_over_q")?;
            for r in rows {
                writeln!(out, "{},{},{},{}", num(r.delta_t), r.series, r.label, num(r.f_over_q))?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .into_iter()
                .map(|r| {
                    json!({
                        "delta_t_over_sigma_t": r.delta_t,
                        "series": r.series,
                        "label": r.label,
                        "f_over_q": r.f_over_q,
                    })
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &rows).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let c = &args.common;
    let cfg = ExperimentConfig::new(
        SpectralProfile::default(),
        c.to_sigma_units(args.delta_t),
        args.nu,
        args.eta,
    )?;
    if let Some(0) = c.workers {
        return Err(beatdelay::Error::InvalidParameter {
            name: "workers",
            reason: "must be at least 1".into(),
        }
        .into());
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = c.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    let options = StudyOptions {
        search_max: args.search_max,
    };
    let report = pool.install(|| monte_carlo_study(&cfg, &args.n_list, args.trials, c.seed, options))?;
    let fit = match fit_inverse_n(&report) {
        Ok(fit) => Some(fit),
        Err(beatdelay::Error::DegenerateFit(reason)) => {
            eprintln!("note: fit skipped: {reason}");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let mut out = open_output(c)?;
    match c.format.unwrap_or(Format::Json) {
        Format::Json => {
            let doc = ReportDocument::new(report, fit);
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(
                out,
                "n,trials,mean_estimate,variance,variance_over_crb,mean_over_truth,ci_halfwidth,failures"
            )?;
            for r in &report.per_n {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.n,
                    r.trials,
                    num(r.mean_estimate),
                    num(r.variance),
                    num(r.variance_over_crb),
                    num(r.mean_over_truth),
                    num(r.ci_halfwidth),
                    r.failures
                )?;
            }
            if let Some(fit) = fit {
                eprintln!(
                    "a = {:.4} ({:.4}, {:.4}), SSE = {:.4e}, R^2 = {:.4}",
                    fit.a, fit.a_ci.0, fit.a_ci.1, fit.sse, fit.r_squared
                );
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn budget(args: BudgetArgs) -> Result<(), CliError> {
    let c = &args.common;
    let sigma_t = c.sigma_t_fs.unwrap_or(60.0) / 1e15;
    let b = precision_budget(args.rate_hz, args.duration_s, sigma_t, args.eta, args.nu)?;
    let mut out = open_output(c)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(
                out,
                "rate_hz,duration_s,sigma_t_s,eta,nu,pairs,std_seconds,std_attoseconds"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                num(args.rate_hz),
                num(args.duration_s),
                num(sigma_t),
                num(args.eta),
                num(args.nu),
                num(b.pairs),
                num(b.std_seconds),
                num(b.std_seconds * 1e18)
            )?;
        }
        Format::Json => {
            let doc = json!({
                "rate_hz": args.rate_hz,
                "duration_s": args.duration_s,
                "sigma_t_s": sigma_t,
                "eta": args.eta,
                "nu": args.nu,
                "pairs": b.pairs,
                "std_seconds": b.std_seconds,
                "std_attoseconds": b.std_seconds * 1e18,
            });
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}
