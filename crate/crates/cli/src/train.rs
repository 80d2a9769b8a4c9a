use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;

use qtsvm::data::{self, LabelColumn};
use qtsvm::eval::{accuracy, Confusion};
use qtsvm::solver::cl1::{self, Branch};
use qtsvm::solver::{lsq, FitReport, LsqConfig, SolverConfig};
use qtsvm::{Label, LiftingMode};

use crate::manifest::{beside, Clock, RunManifest};
use crate::{Cli, CliError, Method, TrainArgs};

#[derive(Serialize)]
struct TrainReport {
    method: Method,
    mode: LiftingMode,
    n: usize,
    positives: usize,
    negatives: usize,
    resubstitution_accuracy: f64,
    solver: Option<SolverConfig>,
    lsq: Option<LsqConfig>,
    fit: Option<FitReport>,
}

fn report_path(a: &TrainArgs) -> PathBuf {
    a.report.clone().unwrap_or_else(|| {
        let mut p = a.model_out.as_os_str().to_owned();
        p.push(".report.json");
        PathBuf::from(p)
    })
}

pub fn run(a: &TrainArgs, cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let clock = Clock::start();
    let label_column: LabelColumn = a.label_column.parse().expect("label column parsing is infallible");
    let mode = LiftingMode::from(a.mode);
    let (solver, lsq_cfg) = match a.method {
        Method::Cl1qtsvm => {
            let d = SolverConfig::default();
            let cfg = SolverConfig {
                cap_eps: a.eps,
                max_iter: a.max_iter,
                ..SolverConfig::with_params(a.c1.unwrap_or(d.c1), a.c2.unwrap_or(d.c2))
            };
            cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
            (Some(cfg), None)
        }
        Method::Lsqtsvm => {
            if a.c2.is_some() {
                return Err(CliError::usage("lsqtsvm takes a single parameter; pass it as --c1"));
            }
            let cfg = LsqConfig::with_c(a.c1.unwrap_or(1.0));
            cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
            (None, Some(cfg))
        }
    };

    let d = data::load_csv(&a.data, &label_column, &a.positive_label)?;
    let (model, fit) = match (&solver, &lsq_cfg) {
        (Some(cfg), _) => {
            let (m, r) = cl1::fit(&d, cfg, mode)?;
            (m, Some(r))
        }
        (_, Some(cfg)) => (lsq::fit_lsq(&d, cfg, mode)?, None),
        _ => unreachable!("one configuration is always set"),
    };
    let predicted = model.predict_rows(d.features())?;
    let acc = accuracy(&Confusion::from_predictions(d.labels(), &predicted)?)?;

    model.save(&a.model_out)?;
    let report = TrainReport {
        method: a.method,
        mode,
        n: d.dim(),
        positives: d.count(Label::Positive),
        negatives: d.count(Label::Negative),
        resubstitution_accuracy: acc,
        solver,
        lsq: lsq_cfg,
        fit,
    };
    let rpath = report_path(a);
    let text = serde_json::to_string_pretty(&report).context("serializing fit report")? + "\n";
    std::fs::write(&rpath, text).with_context(|| format!("writing {}", rpath.display()))?;

    if let Some(fit) = &report.fit {
        for (name, s) in [("positive", &fit.positive), ("negative", &fit.negative)] {
            let status = if s.converged { "converged" } else { "did not converge" };
            println!(
                "{name} surface: {} iterations, {status}, {} branch, objective {:.6e}",
                s.iterations_used,
                match s.branch {
                    Branch::Smw => "smw",
                    Branch::Direct => "direct",
                },
                s.objective_trace.last().copied().unwrap_or(f64::NAN)
            );
            if !s.converged {
                eprintln!("warning: {name} surface stopped at --max-iter {}", a.max_iter);
            }
        }
    }
    println!("training accuracy {acc:.6}");
    println!("model written to {}", a.model_out.display());
    RunManifest::new(
        "train",
        argv,
        a,
        cli.seed.unwrap_or(0),
        &clock,
        vec![a.model_out.clone(), rpath],
    )?
    .save(&beside(&a.model_out))?;
    Ok(())
}
