use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use stablefield::actions::{
    verify_action_axioms, verify_cocycle, verify_rn_chain_rule, ActionFamily, Point,
    RosinskiTriplet, ViolationReport,
};
use stablefield::classifier::{classify, Classification, Verdict};
use stablefield::decomposition::decomposition_consistency;
use stablefield::diagnostics::{
    dispersion_experiment, empirical_cf, maxima_growth, scale_fit, stationarity_test,
    BoundedFunction, EmpiricalVerdict,
};
use stablefield::fields::{realize, FieldSampler, TripletSampler};
use stablefield::markov::{invariant_measure, sample_two_sided_path, truncated_state_set};
use stablefield::rng::{stream_rng, stream_seed};
use stablefield::{FieldRealization, GroupElement, Window};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::svg::LinePlot;

pub struct RunContext {
    pub config: ExperimentConfig,
    pub out_dir: std::path::PathBuf,
    pub threads: usize,
}

impl RunContext {
    fn seed(&self) -> u64 {
        self.config.seed
    }

    fn prepare_out(&self) -> CliResult<()> {
        fs::create_dir_all(&self.out_dir)?;
        // timestamps are confined to this sidecar log
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut log = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.out_dir.join("run.log"))?;
        writeln!(log, "unix_time={now} seed={} threads={}", self.seed(), self.threads)?;
        Ok(())
    }

    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serialization: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .map_err(|e| CliError::Internal(format!("csv: {e}")))
}

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
struct SimulateMeta {
    seed: u64,
    realizations: usize,
    method: String,
    truncation: Option<u64>,
    truncated_mass: Option<f64>,
    tail_magnitude: Option<f64>,
    realization_seeds: Vec<u64>,
}

pub fn cmd_simulate(ctx: &RunContext) -> CliResult<()> {
    ctx.prepare_out()?;
    let triplet = ctx.config.build_triplet()?;
    let window = ctx.config.window()?;
    if window.dim() != triplet.family().dim() {
        return Err(CliError::Config(format!(
            "window dimension {} does not match family dimension {}",
            window.dim(),
            triplet.family().dim()
        )));
    }
    let settings = ctx.config.settings();
    let r = ctx.config.simulation.realizations;
    let seeds: Vec<u64> = (0..r)
        .map(|k| stream_seed(ctx.seed(), &format!("realization/{k}")))
        .collect();

    let pool = ctx.pool()?;
    let realizations: Vec<FieldRealization> = pool.install(|| {
        seeds
            .par_iter()
            .map(|seed| realize(&triplet, &window, &settings, *seed))
            .collect::<Result<Vec<_>, _>>()
    })?;

    // all file writes happen on this thread, in realization order
    for (k, realization) in realizations.iter().enumerate() {
        let mut w = csv_writer(&ctx.out_dir.join(format!("realization_{k:04}.csv")))?;
        let d = realization.dim();
        let mut header: Vec<String> = (1..=d).map(|i| format!("t{i}")).collect();
        header.push("value".into());
        w.write_record(&header).map_err(|e| CliError::Internal(e.to_string()))?;
        for (t, v) in realization.window().points().iter().zip(realization.values()) {
            let mut record: Vec<String> = t.coords().iter().map(|c| c.to_string()).collect();
            record.push(format!("{v}"));
            w.write_record(&record).map_err(|e| CliError::Internal(e.to_string()))?;
        }
        w.flush()?;
    }

    let meta0 = &realizations[0].meta;
    write_json(
        &ctx.out_dir.join("meta.json"),
        &SimulateMeta {
            seed: ctx.seed(),
            realizations: r,
            method: meta0.method.clone(),
            truncation: meta0.truncation,
            truncated_mass: meta0.truncated_mass,
            tail_magnitude: meta0.tail_magnitude,
            realization_seeds: seeds,
        },
    )?;
    println!(
        "wrote {r} realization(s) of a {}-point window to {}",
        window.len(),
        ctx.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- classify

#[derive(Serialize)]
struct VerdictJson {
    verdict: String,
    basis: String,
    neveu: NeveuJson,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct NeveuJson {
    positive: Vec<String>,
    null: Vec<String>,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::ErgodicWeaklyMixing => "ErgodicWeaklyMixing",
        Verdict::CompletelyNonErgodic => "CompletelyNonErgodic",
        Verdict::MixedErgodicity => "MixedErgodicity",
    }
}

fn classification_json(c: &Classification) -> VerdictJson {
    VerdictJson {
        verdict: verdict_name(c.verdict).into(),
        basis: match c.basis {
            stablefield::classifier::VerdictBasis::NeveuRoute => "NeveuRoute".into(),
            stablefield::classifier::VerdictBasis::LedgerRoute => "LedgerRoute".into(),
        },
        neveu: NeveuJson {
            positive: c.neveu.positive_labels.iter().cloned().collect(),
            null: c.neveu.null_labels.iter().cloned().collect(),
        },
        warnings: c.warnings.clone(),
    }
}

pub fn cmd_classify(ctx: &RunContext) -> CliResult<Classification> {
    ctx.prepare_out()?;
    let triplet = ctx.config.build_triplet()?;
    let classification = classify(&triplet)?;
    write_json(&ctx.out_dir.join("verdict.json"), &classification_json(&classification))?;
    write_json(&ctx.out_dir.join("ledger.json"), &classification.ledger.json())?;
    println!(
        "verdict: {} (via {:?})",
        verdict_name(classification.verdict),
        classification.basis
    );
    for w in &classification.warnings {
        eprintln!("warning: {w}");
    }
    Ok(classification)
}

// ---------------------------------------------------------------- verify

#[derive(Serialize)]
struct CheckJson {
    name: String,
    checked: usize,
    passed: bool,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct VerifyJson {
    checks: Vec<CheckJson>,
    full_support: Option<bool>,
    minimal: Option<bool>,
    all_passed: bool,
}

fn check_json(name: &str, report: &ViolationReport) -> CheckJson {
    CheckJson {
        name: name.into(),
        checked: report.checked,
        passed: report.is_clean(),
        violations: report.violations.clone(),
    }
}

fn sample_points(triplet: &RosinskiTriplet, seed: u64) -> CliResult<Vec<Point>> {
    let family = triplet.family();
    Ok(match family {
        ActionFamily::FiniteDiscrete(a) => (0..a.space().len()).map(Point::Atom).collect(),
        ActionFamily::MixedMovingAverage(m) => {
            let mut points = Vec::new();
            for y in 0..m.labels().len() {
                for z in Window::cube(m.dim(), 1).points() {
                    points.push(Point::Mma { y, z });
                }
            }
            points
        }
        ActionFamily::MarkovShift(ms) => {
            let settings = stablefield::fields::SimulationSettings::default();
            let mut points = Vec::new();
            for (pos, class) in ms.classes().iter().enumerate() {
                let (f_states, _) =
                    truncated_state_set(class, ms.spec(), settings.path_truncation)?;
                let mut rng = stream_rng(seed, &format!("verify/paths/{pos}"));
                for _ in 0..6 {
                    let (path, _) =
                        sample_two_sided_path(class, ms.spec(), 12, &f_states, &mut rng)?;
                    points.push(Point::Path { class_pos: pos, path });
                }
            }
            points
        }
        ActionFamily::SubGaussianShift(f) => {
            let mut rng = stream_rng(seed, "verify/fields");
            let window = Window::cube(f.dim(), 6);
            (0..5)
                .map(|_| {
                    let values: Vec<f64> = (0..window.len())
                        .map(|_| {
                            use rand::Rng;
                            rng.random::<f64>() * 2.0 - 1.0
                        })
                        .collect();
                    Point::real_field(window.clone(), values)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    })
}

pub fn cmd_verify(ctx: &RunContext) -> CliResult<()> {
    ctx.prepare_out()?;
    let triplet = ctx.config.build_triplet()?;
    let family = triplet.family();
    let points = sample_points(&triplet, ctx.seed())?;
    let ts = Window::cube(family.dim(), if matches!(family, ActionFamily::FiniteDiscrete(_)) { 3 } else { 2 })
        .points();

    let mut checks = vec![
        check_json("action-axioms", &verify_action_axioms(family, &points, &ts)),
        check_json("cocycle-identity", &verify_cocycle(triplet.cocycle(), family, &points, &ts)),
        check_json("rn-chain-rule", &verify_rn_chain_rule(family, &points, &ts)),
    ];

    let mut full_support = None;
    let mut minimal = None;
    if let ActionFamily::FiniteDiscrete(a) = family {
        full_support = Some(triplet.has_full_support()?);
        minimal = Some(triplet.is_minimal_finite()?);
        let n = a.space().len();
        let sets: Vec<Vec<usize>> = if n <= 10 {
            (0u32..(1 << n))
                .map(|mask| (0..n).filter(|s| mask & (1 << s) != 0).collect())
                .collect()
        } else {
            let mut rng = stream_rng(ctx.seed(), "verify/subsets");
            (0..256)
                .map(|_| {
                    use rand::Rng;
                    (0..n).filter(|_| rng.random::<bool>()).collect()
                })
                .collect()
        };
        checks.push(check_json(
            "decomposition-consistency",
            &decomposition_consistency(family, &sets)?,
        ));
    }

    if let ActionFamily::MarkovShift(ms) = family {
        // invariant-measure construction carries its own residual guards
        let mut report = ViolationReport::default();
        for class in ms.classes() {
            report.checked += 1;
            if let Err(e) = invariant_measure(class, ms.spec()) {
                report.violations.push(format!("class {}: {e}", class.id));
            }
        }
        checks.push(check_json("invariant-measures", &report));
    }

    // a quick distributional stationarity probe
    {
        let sampler = TripletSampler::new(&triplet, ctx.config.settings());
        let lags = ctx.config.lags()?;
        let draws = ctx.config.diagnostics.stationarity_draws.min(400);
        let reports =
            stationarity_test(&sampler, &lags, draws, stream_seed(ctx.seed(), "verify/stationarity"))?;
        let mut report = ViolationReport::default();
        for lag in &reports {
            report.checked += 1;
            if lag.ks_p < 0.001 {
                report.violations.push(format!(
                    "lag {:?}: KS p = {:.6}",
                    lag.lag.coords(),
                    lag.ks_p
                ));
            }
        }
        checks.push(check_json("stationarity-probe", &report));
    }

    let all_passed = checks.iter().all(|c| c.passed);
    let verify = VerifyJson { checks, full_support, minimal, all_passed };
    write_json(&ctx.out_dir.join("verify.json"), &verify)?;
    for c in &verify.checks {
        println!(
            "{}: {} ({} checks{})",
            c.name,
            if c.passed { "ok" } else { "FAILED" },
            c.checked,
            if c.violations.is_empty() {
                String::new()
            } else {
                format!(", {} violations", c.violations.len())
            }
        );
    }
    if let Some(fs) = verify.full_support {
        println!("full-support: {fs}");
    }
    if let Some(m) = verify.minimal {
        println!("minimal-representation: {m}");
    }
    if !verify.all_passed {
        return Err(CliError::Model("structural checks reported violations".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------- report

#[derive(Serialize)]
struct CfRow {
    theta: f64,
    re: f64,
    im: f64,
    se_re: f64,
    se_im: f64,
    target: f64,
    agree: bool,
}

#[derive(Serialize)]
struct SummaryJson {
    symbolic_verdict: String,
    basis: String,
    empirical_verdict: String,
    dispersion_rho: f64,
    thresholds: [f64; 2],
    verdict_agreement: bool,
    marginal_scale: f64,
    fitted_scale: Option<f64>,
    cf_all_agree: bool,
    stationarity_all_pass: bool,
    maxima_exponent: Option<f64>,
    warnings: Vec<String>,
}

pub fn cmd_report(ctx: &RunContext) -> CliResult<()> {
    ctx.prepare_out()?;
    let triplet = ctx.config.build_triplet()?;
    let classification = classify(&triplet)?;
    let settings = ctx.config.settings();
    let sampler = TripletSampler::new(&triplet, settings);
    let diag = &ctx.config.diagnostics;

    let h = match diag.h.as_str() {
        "cos" => BoundedFunction::cosine(),
        "sign" => BoundedFunction::sign(),
        other => return Err(CliError::Config(format!("unknown diagnostic function {other:?}"))),
    };

    // dispersion of the cube averages across realizations
    let (dispersion, table) = dispersion_experiment(
        &sampler,
        &h,
        &diag.n_grid,
        diag.dispersion_realizations,
        ctx.config.thresholds(),
        stream_seed(ctx.seed(), "dispersion"),
    )?;
    {
        let mut w = csv_writer(&ctx.out_dir.join("dispersion.csv"))?;
        w.write_record(["n", "realization", "theta_hat"])
            .map_err(|e| CliError::Internal(e.to_string()))?;
        for (k, trace) in table.theta_hats.iter().enumerate() {
            for (i, n) in table.n_grid.iter().enumerate() {
                w.write_record([n.to_string(), k.to_string(), format!("{}", trace[i])])
                    .map_err(|e| CliError::Internal(e.to_string()))?;
            }
        }
        w.flush()?;
    }
    {
        let mut plot = LinePlot::new(
            &format!("cube averages of {} across realizations", h.name),
            "n",
            "theta_hat",
        );
        for (k, trace) in table.theta_hats.iter().enumerate().take(30) {
            let pts: Vec<(f64, f64)> = table
                .n_grid
                .iter()
                .zip(trace)
                .map(|(n, v)| (*n as f64, *v))
                .collect();
            plot = plot.series(if k == 0 { "realizations" } else { "" }, pts);
        }
        let mean_pts: Vec<(f64, f64)> = table
            .n_grid
            .iter()
            .zip(&table.mean)
            .map(|(n, v)| (*n as f64, *v))
            .collect();
        plot = plot.series("mean", mean_pts);
        fs::write(ctx.out_dir.join("dispersion.svg"), plot.render())?;
    }

    // marginal law against the characteristic-function formula
    let origin = [GroupElement::identity(triplet.family().dim())];
    let pool = ctx.pool()?;
    let samples: Vec<f64> = pool.install(|| {
        (0..diag.cf_samples)
            .into_par_iter()
            .map(|k| {
                sampler
                    .sample_at(&origin, stream_seed(ctx.seed(), &format!("cf/{k}")))
                    .map(|v| v[0])
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let sigma = triplet.marginal_scale()?;
    let alpha = triplet.alpha();
    let estimates = empirical_cf(&samples, &diag.theta_grid)?;
    let mut cf_rows = Vec::new();
    let mut cf_all_agree = true;
    for e in &estimates {
        let target = (-(sigma * e.theta.abs()).powf(alpha)).exp();
        // slack absorbs series-truncation bias on path-space fields
        let agree = (e.re - target).abs() < 4.0 * e.se_re + 0.005;
        cf_all_agree &= agree;
        cf_rows.push(CfRow {
            theta: e.theta,
            re: e.re,
            im: e.im,
            se_re: e.se_re,
            se_im: e.se_im,
            target,
            agree,
        });
    }
    {
        let mut w = csv_writer(&ctx.out_dir.join("cf.csv"))?;
        w.write_record(["theta", "re", "im", "se_re", "se_im", "target", "agree"])
            .map_err(|e| CliError::Internal(e.to_string()))?;
        for r in &cf_rows {
            w.write_record([
                format!("{}", r.theta),
                format!("{}", r.re),
                format!("{}", r.im),
                format!("{}", r.se_re),
                format!("{}", r.se_im),
                format!("{}", r.target),
                r.agree.to_string(),
            ])
            .map_err(|e| CliError::Internal(e.to_string()))?;
        }
        w.flush()?;
    }
    {
        let empirical: Vec<(f64, f64)> =
            cf_rows.iter().map(|r| (r.theta, r.re)).collect();
        let target: Vec<(f64, f64)> = cf_rows.iter().map(|r| (r.theta, r.target)).collect();
        let plot = LinePlot::new("empirical CF against exp(-(sigma theta)^alpha)", "theta", "Re CF")
            .series("empirical", empirical)
            .series("target", target);
        fs::write(ctx.out_dir.join("cf.svg"), plot.render())?;
    }
    let fitted_scale = scale_fit(&samples, alpha).ok();

    // distributional stationarity per lag
    let lags = ctx.config.lags()?;
    let stationarity = stationarity_test(
        &sampler,
        &lags,
        diag.stationarity_draws,
        stream_seed(ctx.seed(), "stationarity"),
    )?;
    let mut stationarity_all_pass = true;
    {
        let mut w = csv_writer(&ctx.out_dir.join("stationarity.csv"))?;
        w.write_record(["lag", "ks_distance", "ks_p", "joint_cf_distance", "pass"])
            .map_err(|e| CliError::Internal(e.to_string()))?;
        for r in &stationarity {
            let pass = r.ks_p > 0.01;
            stationarity_all_pass &= pass;
            w.write_record([
                format!("{:?}", r.lag.coords()),
                format!("{}", r.ks_distance),
                format!("{}", r.ks_p),
                format!("{}", r.joint_cf_distance),
                pass.to_string(),
            ])
            .map_err(|e| CliError::Internal(e.to_string()))?;
        }
        w.flush()?;
    }

    // growth of partial maxima (soft, exploratory)
    let maxima = if diag.maxima_n_grid.len() >= 2 {
        match maxima_growth(
            &sampler,
            &diag.maxima_n_grid,
            diag.maxima_realizations,
            stream_seed(ctx.seed(), "maxima"),
        ) {
            Ok(m) => Some(m),
            Err(stablefield::Error::ModelPrecondition(_)) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    if let Some(m) = &maxima {
        let mut w = csv_writer(&ctx.out_dir.join("maxima.csv"))?;
        w.write_record(["n", "median_max"]).map_err(|e| CliError::Internal(e.to_string()))?;
        for (n, v) in m.n_grid.iter().zip(&m.median_maxima) {
            w.write_record([n.to_string(), format!("{v}")])
                .map_err(|e| CliError::Internal(e.to_string()))?;
        }
        w.flush()?;
        let pts: Vec<(f64, f64)> = m
            .n_grid
            .iter()
            .zip(&m.median_maxima)
            .map(|(n, v)| (*n as f64, *v))
            .collect();
        let plot = LinePlot::new(
            &format!("median partial maxima (exponent {:.3})", m.exponent),
            "n",
            "median max",
        )
        .log_log()
        .series("median", pts);
        fs::write(ctx.out_dir.join("maxima.svg"), plot.render())?;
    }

    let symbolically_ergodic = classification.verdict == Verdict::ErgodicWeaklyMixing;
    let verdict_agreement = if symbolically_ergodic {
        dispersion.verdict == EmpiricalVerdict::EmpiricallyErgodic
    } else {
        dispersion.verdict == EmpiricalVerdict::EmpiricallyNonErgodic
    };

    let summary = SummaryJson {
        symbolic_verdict: verdict_name(classification.verdict).into(),
        basis: format!("{:?}", classification.basis),
        empirical_verdict: format!("{:?}", dispersion.verdict),
        dispersion_rho: dispersion.rho,
        thresholds: [dispersion.thresholds.ergodic, dispersion.thresholds.non_ergodic],
        verdict_agreement,
        marginal_scale: sigma,
        fitted_scale,
        cf_all_agree,
        stationarity_all_pass,
        maxima_exponent: maxima.as_ref().map(|m| m.exponent),
        warnings: classification.warnings.clone(),
    };
    write_json(&ctx.out_dir.join("summary.json"), &summary)?;
    println!(
        "symbolic {} | empirical {:?} (rho = {:.3}) | agreement: {}",
        summary.symbolic_verdict, dispersion.verdict, dispersion.rho, verdict_agreement
    );
    Ok(())
}
