use crate::config::{FlowConfig, SolitonConfig, SolitonMode, SweepConfig, TorsionConfig};
use crate::output::{fmt_num, render_polylines, write_file, write_json, CsvWriter};
use crate::CliError;
use g2flow::flow::{evolve, FlowParams, FlowState};
use g2flow::geometry::{compute_abc, default_class_tol, torsion_class, torsion_components};
use g2flow::soliton::{
    catalog_entry_residual, cy_closed_form, cy_periodicity, first_integral_r2, nk_constant_catalog,
    solve_soliton_bvp, CYFamily, CatalogValue, FamilyKind, SolitonParams, SolitonState,
};
use g2flow::verify::{run_suite, CheckReport, SUITES};
use serde_json::json;
use std::fs;
use std::path::Path;

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))
}

pub fn torsion(config: &Path, out: &Path, format: &str) -> Result<(), CliError> {
    let cfg = TorsionConfig::parse(&read_config(config)?)?;
    let profile = cfg
        .profile
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let t = compute_abc(&profile);
    let comps = torsion_components(&t);
    let tol = cfg.tol.unwrap_or_else(|| default_class_tol(&t));
    let flags = torsion_class(&t, tol);

    let mut csv = CsvWriter::new(&[
        "r",
        "G",
        "h",
        "theta",
        "alpha",
        "beta",
        "gamma",
        "tau1",
        "tau7_coeff",
        "tau27_scale",
        "traceT",
    ]);
    let grid = profile.grid;
    for i in 0..grid.len() {
        csv.row(&[
            grid.node(i),
            profile.g.value(i),
            profile.h.value(i),
            profile.theta.value(i),
            t.alpha.value(i),
            t.beta.value(i),
            t.gamma.value(i),
            comps.tau1.value(i),
            comps.tau7_coeff.value(i),
            comps.tau27_scale.value(i),
            comps.trace_t.value(i),
        ]);
    }
    write_file(out, "torsion.csv", &csv.finish())?;

    let summary = json!({
        "lambda": profile.lambda(),
        "tol": tol,
        "class": {
            "torsion_free": flags.torsion_free,
            "closed": flags.closed,
            "co_closed": flags.co_closed,
            "nearly_parallel": flags.nearly_parallel,
            "pure_27": flags.pure_27,
        },
        "max_abs": {
            "alpha": t.alpha.max_abs(),
            "beta": t.beta.max_abs(),
            "gamma": t.gamma.max_abs(),
        },
    });
    write_json(out, "torsion_summary.json", &summary)?;
    if format == "json" {
        println!(
            "{}",
            serde_json::to_string_pretty(&summary).expect("serializable")
        );
    }
    eprintln!(
        "class flags: torsion_free={} closed={} co_closed={} nearly_parallel={} pure_27={}",
        flags.torsion_free, flags.closed, flags.co_closed, flags.nearly_parallel, flags.pure_27
    );
    Ok(())
}

pub fn flow(config: &Path, out: &Path, stride_flag: Option<usize>) -> Result<(), CliError> {
    let cfg = FlowConfig::parse(&read_config(config)?)?;
    let profile = cfg
        .profile
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let params = FlowParams::new(cfg.k, cfg.c);
    let stride = stride_flag.unwrap_or(cfg.snapshot_stride).max(1);
    let traj = evolve(
        &FlowState { t: 0.0, profile },
        &params,
        cfg.t_end,
        &cfg.step,
    )
    .map_err(|e| match e {
        // rejected before any stepping: the supplied profile is at fault
        g2flow::flow::FlowError::NotCoClosed { .. } => CliError::Config(e.to_string()),
        other => CliError::Numerical(other.to_string()),
    })?;

    let mut csv = CsvWriter::new(&[
        "t", "r", "G", "h", "theta", "alpha", "beta", "gamma", "tau1", "traceT",
    ]);
    let last_idx = traj.samples.len() - 1;
    for (si, sample) in traj.samples.iter().enumerate() {
        if si % stride != 0 && si != last_idx {
            continue;
        }
        let p = &sample.state.profile;
        let grid = p.grid;
        for i in 0..grid.len() {
            let a = sample.alpha.value(i);
            let b = sample.beta.value(i);
            csv.row(&[
                sample.state.t,
                grid.node(i),
                p.g.value(i),
                p.h.value(i),
                p.theta.value(i),
                a,
                b,
                sample.gamma.value(i),
                (a - 6.0 * b) / 7.0,
                a - 6.0 * b,
            ]);
        }
    }
    write_file(out, "flow.csv", &csv.finish())?;

    let last = traj.last();
    let mut summary = json!({
        "k": cfg.k,
        "C": cfg.c,
        "t_end_requested": cfg.t_end,
        "t_last": last.state.t,
        "accepted_steps": traj.samples.len(),
        "snapshot_stride": stride,
        "max_alpha": last.alpha.max_abs(),
        "max_gamma": last.gamma.max_abs(),
    });
    if let Some(b) = traj.blow_up {
        summary["blow_up"] = json!({ "t_last": b.t_last });
    }
    write_json(out, "flow_summary.json", &summary)?;
    Ok(())
}

pub fn soliton(config: &Path, out: &Path, format: &str) -> Result<(), CliError> {
    let mode = SolitonConfig::parse(&read_config(config)?)?;
    emit_soliton(&mode, out, format)
}

fn emit_soliton(mode: &SolitonMode, out: &Path, format: &str) -> Result<(), CliError> {
    match mode {
        &SolitonMode::ClosedForm {
            family,
            r_span,
            samples,
        } => {
            let mut csv = CsvWriter::new(&["r", "alpha", "l", "theta", "R2"]);
            let mut portrait = Vec::with_capacity(samples);
            for i in 0..samples {
                let r = r_span[0] + (r_span[1] - r_span[0]) * i as f64 / (samples - 1) as f64;
                let (a, l, th) =
                    cy_closed_form(&family, r).map_err(|e| CliError::Numerical(e.to_string()))?;
                let r2 = first_integral_r2(&SolitonState::cy(a, l), family.c);
                csv.row(&[r, a, l, th, r2]);
                portrait.push((a, l));
            }
            write_file(out, "soliton.csv", &csv.finish())?;
            let summary = json!({
                "mode": "closed-form",
                "kind": kind_name(&family),
                "C": family.c,
                "R": family.radius,
                "Q": family.q(),
                "alpha0": family.alpha0(),
                "r0": family.r0,
                "theta0": family.theta0,
                "sign": family.sign,
                "periodicity": periodicity_json(&family),
            });
            write_json(out, "soliton_summary.json", &summary)?;
            if format == "svg" {
                let svg = render_polylines(
                    &format!(
                        "{} family: C={}, R={}",
                        kind_name(&family),
                        family.c,
                        family.radius
                    ),
                    "alpha",
                    "l",
                    &[("(alpha, l)".to_string(), portrait)],
                );
                write_file(out, "soliton.svg", &svg)?;
            }
            Ok(())
        }
        SolitonMode::Integrate {
            ics,
            c,
            mu,
            lambda,
            r_span,
            theta0,
            step,
        } => {
            let (c, mu, lambda, r_span, theta0) = (*c, *mu, *lambda, *r_span, *theta0);
            let state = SolitonState::new(ics.alpha, ics.beta, ics.l);
            let params = SolitonParams::canonical(c, mu);
            let traj = solve_soliton_bvp(
                &state,
                &params,
                lambda,
                (r_span[0], r_span[1]),
                theta0,
                step,
            )
            .map_err(|e| CliError::Numerical(e.to_string()))?;
            let mut csv = CsvWriter::new(&["r", "alpha", "l", "theta", "R2"]);
            let mut portrait = Vec::with_capacity(traj.rs.len());
            let mut betas = Vec::with_capacity(traj.rs.len());
            for (i, r) in traj.rs.iter().enumerate() {
                let s = &traj.states[i];
                csv.row(&[*r, s.alpha, s.l, traj.thetas[i], first_integral_r2(s, c)]);
                portrait.push((s.alpha, s.l));
                betas.push(s.beta);
            }
            write_file(out, "soliton.csv", &csv.finish())?;
            let mut summary = json!({
                "mode": "integrate",
                "lambda": lambda,
                "C": c,
                "mu": mu,
                "ics": { "alpha": ics.alpha, "beta": ics.beta, "l": ics.l },
                "accepted_steps": traj.rs.len(),
                "r_last": traj.rs.last().copied().unwrap_or(r_span[0]),
            });
            if let Some(drift) = traj.r2_drift {
                summary["r2_drift"] = json!(drift);
            }
            if lambda != 0.0 {
                summary["beta_series"] = json!(betas);
            }
            write_json(out, "soliton_summary.json", &summary)?;
            if format == "svg" {
                let svg = render_polylines(
                    &format!("soliton trajectory: C={c}, mu={mu}, lambda={lambda}"),
                    "alpha",
                    "l",
                    &[("(alpha, l)".to_string(), portrait)],
                );
                write_file(out, "soliton.svg", &svg)?;
            }
            Ok(())
        }
        &SolitonMode::Catalog { c, mu } => {
            let params = SolitonParams::canonical(c, mu);
            let entries: Vec<serde_json::Value> = nk_constant_catalog(c, mu)
                .iter()
                .map(|e| {
                    let residual = catalog_entry_residual(e, &params);
                    json!({
                        "id": e.id,
                        "alpha": catalog_value_json(&e.alpha),
                        "beta": catalog_value_json(&e.beta),
                        "l": catalog_value_json(&e.l),
                        "mu": e.mu,
                        "validity": e.validity,
                        "residual": residual,
                    })
                })
                .collect();
            write_json(
                out,
                "catalog.json",
                &json!({ "C": c, "mu": mu, "entries": entries }),
            )?;
            Ok(())
        }
    }
}

fn kind_name(f: &CYFamily) -> &'static str {
    match f.kind {
        FamilyKind::Parabolic => "parabolic",
        FamilyKind::Hyperbolic => "hyperbolic",
        FamilyKind::Trigonometric => "trig",
    }
}

fn periodicity_json(f: &CYFamily) -> serde_json::Value {
    if f.kind != FamilyKind::Trigonometric {
        return serde_json::Value::Null;
    }
    let p = cy_periodicity(f.c, f.radius, 2.0 * std::f64::consts::PI);
    json!({
        "periodic": p.periodic,
        "Q": p.q,
        "n_from_q_eq_2n": p.n_half_q,
        "n_from_q2_eq_2n": p.n_half_q_squared,
    })
}

fn catalog_value_json(v: &CatalogValue) -> serde_json::Value {
    match v {
        CatalogValue::Value(x) => json!(x),
        CatalogValue::Arbitrary => json!("arbitrary"),
        CatalogValue::LinearInR { slope } => json!({ "linear_in_r": { "slope": slope } }),
    }
}

pub fn sweep(config: &Path, out: &Path, workers: usize) -> Result<(), CliError> {
    let runs = SweepConfig::parse(&read_config(config)?)?;
    if workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let results: Vec<(String, Result<(), CliError>)> = std::thread::scope(|scope| {
        let chunk = runs.len().div_ceil(workers);
        let mut handles = Vec::new();
        for batch in runs.chunks(chunk) {
            handles.push(scope.spawn(move || {
                batch
                    .iter()
                    .map(|(name, mode)| (name.clone(), emit_soliton(mode, &out.join(name), "csv")))
                    .collect::<Vec<_>>()
            }));
        }
        let mut all = Vec::new();
        for h in handles {
            all.extend(h.join().expect("worker panicked"));
        }
        all
    });
    let mut results = results;
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let mut failures = Vec::new();
    let mut listing = Vec::new();
    for (name, res) in &results {
        match res {
            Ok(()) => listing.push(json!({ "run": name, "status": "ok" })),
            Err(e) => {
                listing.push(json!({ "run": name, "status": "failed", "error": e.to_string() }));
                failures.push(format!("{name}: {e}"));
            }
        }
    }
    write_json(out, "sweep_summary.json", &json!({ "runs": listing }))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(failures.join("; ")))
    }
}

/// In-process determinism checks for the emitters (the cross-process check
/// lives in the acceptance suite, which invokes the binary twice).
fn cli_suite_checks() -> Vec<CheckReport> {
    let start = std::time::Instant::now();
    let family = CYFamily::new(FamilyKind::Trigonometric, 1.0, 0.5, 0.0, 0.0, -1).unwrap();
    let render = || {
        let mut csv = CsvWriter::new(&["r", "alpha", "l", "theta", "R2"]);
        for i in 0..200 {
            let r = 2.0 * std::f64::consts::PI * i as f64 / 199.0;
            let (a, l, th) = cy_closed_form(&family, r).unwrap();
            csv.row(&[
                r,
                a,
                l,
                th,
                first_integral_r2(&SolitonState::cy(a, l), family.c),
            ]);
        }
        csv.finish()
    };
    let deterministic = render() == render();
    let mut reports = vec![CheckReport {
        suite: "cli",
        name: "render-determinism",
        passed: deterministic,
        measured: if deterministic { 1.0 } else { 0.0 },
        tolerance: 1.0,
        elapsed_s: start.elapsed().as_secs_f64(),
        detail: "identical inputs render byte-identical CSV".to_string(),
    }];

    let start = std::time::Instant::now();
    let mut worst = 0.0_f64;
    let mut ok = true;
    for x in [
        std::f64::consts::PI,
        -2.25e-13,
        7.1e300,
        1.0 / 3.0,
        -0.0,
        6.02e23,
    ] {
        let back: f64 = fmt_num(x).parse().unwrap_or(f64::NAN);
        if back.to_bits() != x.to_bits() {
            ok = false;
            worst = worst.max((back - x).abs());
        }
    }
    reports.push(CheckReport {
        suite: "cli",
        name: "csv-17-digit-round-trip",
        passed: ok,
        measured: worst,
        tolerance: 0.0,
        elapsed_s: start.elapsed().as_secs_f64(),
        detail: "every CSV numeric reparses to the same bits".to_string(),
    });
    reports
}

pub fn verify(
    suite: &str,
    format: &str,
    out: Option<&Path>,
    inject_failure: bool,
) -> Result<(), CliError> {
    let mut reports: Vec<CheckReport> = Vec::new();
    if suite == "cli" || suite == "all" {
        reports.extend(cli_suite_checks());
    }
    if suite != "cli" {
        match run_suite(suite) {
            Some(core_reports) => reports.extend(core_reports),
            None => {
                return Err(CliError::Config(format!(
                    "unknown suite \"{suite}\"; expected one of {}, cli, all",
                    SUITES.join(", ")
                )))
            }
        }
    }
    if inject_failure {
        reports.push(CheckReport {
            suite: "cli",
            name: "injected-failure",
            passed: false,
            measured: 1.0,
            tolerance: 0.0,
            elapsed_s: 0.0,
            detail: "deliberate failure requested via --inject-failure".to_string(),
        });
    }
    reports.sort_by(|a, b| (a.suite, a.name).cmp(&(b.suite, b.name)));

    let as_json = json!({
        "suite": suite,
        "passed": reports.iter().all(|r| r.passed),
        "checks": reports,
    });
    match format {
        "json" => println!(
            "{}",
            serde_json::to_string_pretty(&as_json).expect("serializable")
        ),
        _ => {
            println!(
                "{:<12} {:<42} {:>6} {:>12} {:>12} {:>9}",
                "suite", "check", "status", "measured", "tolerance", "time"
            );
            for r in &reports {
                println!(
                    "{:<12} {:<42} {:>6} {:>12.3e} {:>12.3e} {:>8.2}s",
                    r.suite,
                    r.name,
                    if r.passed { "pass" } else { "FAIL" },
                    r.measured,
                    r.tolerance,
                    r.elapsed_s
                );
            }
        }
    }
    if let Some(dir) = out {
        write_json(dir, "verify_report.json", &as_json)?;
    }
    let failures: Vec<&CheckReport> = reports.iter().filter(|r| !r.passed).collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(
            failures
                .iter()
                .map(|r| format!("{}/{}", r.suite, r.name))
                .collect::<Vec<_>>()
                .join(", "),
        ))
    }
}
