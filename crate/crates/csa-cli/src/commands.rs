//! The five subcommand implementations.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use csa_core::density::{threshold_with, StabilityBound, ThresholdOptions, ThresholdReport};
use csa_core::ensemble::{random_code_counts, EnsembleStats};
use csa_core::optim::{optimize, verify_with, Candidates};
use serde_json::json;

use crate::config::{AnyEnsemble, ConfigFile, Mode};
use crate::output::{emit, fmt_f64, json_doc, json_f64, with_suffix, write_file, Csv};
use crate::{Format, RunManifest};

fn threshold_options(cfg: &ConfigFile, manifest: &RunManifest) -> Result<ThresholdOptions> {
    let mut opts = ThresholdOptions::default();
    if let Some(tol) = manifest
        .tol
        .or(cfg.threshold.as_ref().and_then(|t| t.tol))
    {
        anyhow::ensure!(tol > 0.0, "tolerance must be positive, got {tol}");
        opts.tol = tol;
    }
    Ok(opts)
}

fn ensemble_label(cfg: &ConfigFile) -> &str {
    cfg.ensemble.as_ref().map(|e| e.label()).unwrap_or("ensemble")
}

/// `analyze`: ensemble summary (mean length, rate, edge weights, pair
/// multiplicities) plus per-component code profiles.
pub fn cmd_analyze(cfg: &ConfigFile, manifest: &RunManifest) -> Result<()> {
    let ensemble = cfg.build_ensemble()?;
    let stats = ensemble.stats()?;
    let section = cfg.ensemble.as_ref().expect("build_ensemble checked");

    let content = match manifest.format {
        Format::Json => json_doc(&analyze_json(section.label(), &section.mode, &ensemble, &stats)),
        Format::Csv => analyze_text(section.label(), &section.mode, &ensemble, &stats),
    };
    emit(
        manifest.out.as_deref(),
        match manifest.format {
            Format::Json => "json",
            Format::Csv => "txt",
        },
        &content,
    )
}

fn analyze_text(
    label: &str,
    mode: &Mode,
    ensemble: &AnyEnsemble,
    stats: &EnsembleStats,
) -> String {
    let mut s = String::new();
    let mode_name = match mode {
        Mode::Explicit => "explicit",
        Mode::Random => "random",
    };
    let _ = writeln!(s, "ensemble     {label} (k = {}, mode = {mode_name})", stats.k);
    let _ = writeln!(s, "mean length  n_bar = {}", fmt_f64(stats.mean_length));
    let _ = writeln!(s, "rate         R = {}", fmt_f64(stats.rate));
    let _ = writeln!(
        s,
        "load step    dP = {} slots per burst (1/R)",
        fmt_f64(1.0 / stats.rate)
    );
    let _ = writeln!(s, "pair weight  A2_bar = {}", fmt_f64(stats.avg_a2));
    let _ = writeln!(s, "components:");
    for (h, &n) in stats.lengths.iter().enumerate() {
        let _ = writeln!(
            s,
            "  [{h}] n = {n}  P = {}  lambda = {}",
            fmt_f64(stats.pmf[h]),
            fmt_f64(stats.edge_probs[h]),
        );
        match ensemble {
            AnyEnsemble::Explicit(e) => {
                let code = &e.codes()[h];
                let prof = code.code_profile();
                let _ = writeln!(
                    s,
                    "      matrix {code}  d_min = {}  A_2 = {}",
                    prof.d_min,
                    prof.a2()
                );
            }
            AnyEnsemble::Random(_) => {
                let counts = random_code_counts(stats.k, n).expect("validated at build");
                let _ = writeln!(s, "      random model: {} qualifying matrices", counts.total);
            }
        }
        let coeffs: Vec<String> = stats.a_coeffs[h].iter().map(|&a| fmt_f64(a)).collect();
        let _ = writeln!(s, "      a = [{}]", coeffs.join(", "));
    }
    s
}

fn analyze_json(
    label: &str,
    mode: &Mode,
    ensemble: &AnyEnsemble,
    stats: &EnsembleStats,
) -> serde_json::Value {
    let components: Vec<serde_json::Value> = stats
        .lengths
        .iter()
        .enumerate()
        .map(|(h, &n)| {
            let mut obj = json!({
                "n": n,
                "prob": json_f64(stats.pmf[h]),
                "lambda": json_f64(stats.edge_probs[h]),
                "a": stats.a_coeffs[h].iter().map(|&a| json_f64(a)).collect::<Vec<_>>(),
            });
            match ensemble {
                AnyEnsemble::Explicit(e) => {
                    let code = &e.codes()[h];
                    let prof = code.code_profile();
                    obj["matrix"] = json!(code.to_string());
                    obj["d_min"] = json!(prof.d_min);
                    obj["a2"] = json!(prof.a2());
                }
                AnyEnsemble::Random(_) => {
                    let counts = random_code_counts(stats.k, n).expect("validated at build");
                    obj["qualifying_matrices"] = json!(counts.total);
                }
            }
            obj
        })
        .collect();
    json!({
        "id": label,
        "k": stats.k,
        "mode": match mode { Mode::Explicit => "explicit", Mode::Random => "random" },
        "mean_length": json_f64(stats.mean_length),
        "rate": json_f64(stats.rate),
        "delta_p": json_f64(1.0 / stats.rate),
        "avg_a2": json_f64(stats.avg_a2),
        "components": components,
    })
}

fn bound_text(b: &StabilityBound) -> String {
    match b {
        StabilityBound::Bounded(v) => fmt_f64(*v),
        StabilityBound::Unbounded => "unbounded".to_owned(),
    }
}

fn threshold_record(
    id: &str,
    k: usize,
    rate: f64,
    report: &ThresholdReport,
    tol: f64,
    format: Format,
) -> String {
    match format {
        Format::Csv => {
            let mut csv = Csv::new();
            csv.row(["ensemble_id", "k", "R", "G_star", "G_star_sb", "tol"]);
            csv.row([
                id.to_owned(),
                k.to_string(),
                fmt_f64(rate),
                fmt_f64(report.threshold),
                bound_text(&report.stability_bound),
                fmt_f64(tol),
            ]);
            csv.finish()
        }
        Format::Json => json_doc(&json!({
            "ensemble_id": id,
            "k": k,
            "R": json_f64(rate),
            "G_star": json_f64(report.threshold),
            "G_star_sb": match report.stability_bound {
                StabilityBound::Bounded(v) => json_f64(v),
                StabilityBound::Unbounded => json!("unbounded"),
            },
            "tol": json_f64(tol),
        })),
    }
}

/// `threshold`: decoding threshold and stability bound for the configured
/// ensemble.
pub fn cmd_threshold(cfg: &ConfigFile, manifest: &RunManifest) -> Result<()> {
    let ensemble = cfg.build_ensemble()?;
    let stats = ensemble.stats()?;
    let opts = threshold_options(cfg, manifest)?;
    let report = threshold_with(&stats, &opts)?;
    let content = threshold_record(
        ensemble_label(cfg),
        stats.k,
        stats.rate,
        &report,
        opts.tol,
        manifest.format,
    );
    let ext = match manifest.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    emit(manifest.out.as_deref(), ext, &content)
}

/// `verify`: re-score the `[verify]` distribution over the `[problem]`
/// candidates at fine tolerance.
pub fn cmd_verify(cfg: &ConfigFile, manifest: &RunManifest) -> Result<()> {
    let problem = cfg.build_problem()?;
    let section = cfg
        .verify
        .as_ref()
        .context("config has no [verify] section")?;
    let pmf = section.pmf()?;
    let opts = threshold_options(cfg, manifest)?;
    let report = verify_with(&problem, &pmf, &opts)?;
    let label = cfg.problem.as_ref().expect("build_problem checked").label();
    let content = threshold_record(
        label,
        problem.candidates.k(),
        problem.target_rate,
        &report,
        opts.tol,
        manifest.format,
    );
    let ext = match manifest.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    emit(manifest.out.as_deref(), ext, &content)
}

/// `optimize`: run the differential-evolution search and write the result
/// (JSON) plus the per-generation audit trail (CSV).
pub fn cmd_optimize(cfg: &ConfigFile, manifest: &RunManifest) -> Result<()> {
    let mut problem = cfg.build_problem()?;
    problem.de.seed = manifest.seed;
    let label = cfg.problem.as_ref().expect("build_problem checked").label();
    let out = manifest
        .out
        .as_deref()
        .context("optimize writes two artifacts; --out is required")?;

    let result = optimize(&problem)?;

    let candidates = match &problem.candidates {
        Candidates::Explicit(codes) => {
            json!(codes.iter().map(|c| c.to_string()).collect::<Vec<_>>())
        }
        Candidates::RandomLengths { lengths, .. } => json!(lengths),
    };
    let result_json = json!({
        "id": label,
        "k": problem.candidates.k(),
        "candidates": candidates,
        "target_rate": json_f64(problem.target_rate),
        "achieved_rate": json_f64(result.rate),
        "G_star": json_f64(result.threshold),
        "pmf": result.pmf.iter().map(|&p| json_f64(p)).collect::<Vec<_>>(),
        "generations": result.generations,
        "population": problem.de.population,
        "seed": result.seed,
    });
    write_file(&crate::output::with_ext(out, "json"), &json_doc(&result_json))?;

    let mut history = Csv::new();
    history.row(["generation", "best_G_star"]);
    for (generation, best) in result.history.iter().enumerate() {
        history.row([generation.to_string(), fmt_f64(*best)]);
    }
    write_file(&with_suffix(out, "_history", "csv"), &history.finish())?;
    Ok(())
}

/// `simulate`: Monte Carlo throughput sweep; writes the per-load CSV and a
/// summary JSON next to it.
pub fn cmd_simulate(cfg: &ConfigFile, manifest: &RunManifest) -> Result<()> {
    let ensemble = cfg.build_ensemble()?;
    let sim = cfg.sim.as_ref().context("config has no [sim] section")?;
    let grid = sim.load_grid()?;
    anyhow::ensure!(sim.trials >= 1, "[sim] trials must be at least 1");
    let out = manifest
        .out
        .as_deref()
        .context("simulate writes two artifacts; --out is required")?;

    let points = crate::simulate_parallel(
        &ensemble.as_sim(),
        sim.n_slots,
        &grid,
        sim.trials,
        manifest.seed,
        manifest.jobs,
    )?;

    let mut csv = Csv::new();
    csv.row([
        "G_requested",
        "G_actual",
        "M",
        "N",
        "trials",
        "S_mean",
        "S_stderr",
        "PLR",
        "avg_peel_iters",
    ]);
    for p in &points {
        csv.row([
            fmt_f64(p.g_requested),
            fmt_f64(p.g_actual),
            p.m.to_string(),
            p.n_slots.to_string(),
            p.trials.to_string(),
            fmt_f64(p.s_mean),
            p.s_stderr.map(fmt_f64).unwrap_or_default(),
            fmt_f64(p.plr),
            fmt_f64(p.avg_peel_iters),
        ]);
    }
    write_file(&crate::output::with_ext(out, "csv"), &csv.finish())?;

    let peak = points
        .iter()
        .map(|p| p.s_mean)
        .fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({
        "ensemble_id": ensemble_label(cfg),
        "k": ensemble.k(),
        "n_slots": sim.n_slots,
        "trials": sim.trials,
        "seed": manifest.seed,
        "points": points.len(),
        "peak_S": json_f64(peak),
        "grid": grid.iter().map(|&g| json_f64(g)).collect::<Vec<_>>(),
    });
    write_file(&crate::output::with_ext(out, "json"), &json_doc(&summary))?;
    Ok(())
}
