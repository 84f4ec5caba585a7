//! The three batch commands. Each computes everything first and writes its
//! output files at the end from a single place.

use std::path::{Path, PathBuf};

use gamlss_boost::{
    boost_noncyclical, kfold_cv, run_study, BoostModel64, CvSettings, Dataset64, SimDesign,
};

use crate::config::{CvConfig, FitConfig, SimulateConfig};
use crate::io;
use crate::{CliError, CliResult};

fn ensure_out_dir(out: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))
}

fn write_fit_outputs(out: &Path, model: &BoostModel64, data: &Dataset64) -> CliResult<()> {
    let risks = model.risk_path(data)?;
    io::write_coefficients(&out.join("coefficients.csv"), model)?;
    io::write_trace(&out.join("trace.csv"), model)?;
    io::write_risk_path(&out.join("risk_path.csv"), &risks)?;
    Ok(())
}

/// `fit`: boost on a CSV dataset for a fixed number of iterations and emit
/// `coefficients.csv`, `trace.csv` and `risk_path.csv`.
pub fn cmd_fit(config: &FitConfig) -> CliResult<()> {
    let data = io::read_dataset(&config.input, &config.response)?;
    let model = boost_noncyclical(&data, &config.policy, config.mstop)?;
    io::warn_fit_diagnostics(&model);
    ensure_out_dir(&config.out)?;
    write_fit_outputs(&config.out, &model, &data)
}

/// `cv`: pick the stopping iteration by k-fold cross-validation and emit
/// `cv_curve.csv` and `m_best.txt`; optionally refit at `m_best` and emit the
/// fit outputs as well.
pub fn cmd_cv(config: &CvConfig) -> CliResult<()> {
    let data = io::read_dataset(&config.input, &config.response)?;
    let cv = kfold_cv(&data, &config.policy, config.m_max, config.folds, config.seed)?;
    let refit = if config.refit {
        let model = boost_noncyclical(&data, &config.policy, cv.m_best)?;
        io::warn_fit_diagnostics(&model);
        Some(model)
    } else {
        None
    };
    ensure_out_dir(&config.out)?;
    io::write_cv_curve(&config.out.join("cv_curve.csv"), &cv.mean_risk)?;
    io::write_m_best(&config.out.join("m_best.txt"), cv.m_best)?;
    if let Some(model) = refit {
        write_fit_outputs(&config.out, &model, &data)?;
    }
    Ok(())
}

/// Derives the cross-validation seed stream from the master seed; kept apart
/// from the data-generation stream so the two cannot collide.
pub fn cv_seed_for(master_seed: u64) -> u64 {
    master_seed ^ 0x9E37_79B9_7F4A_7C15
}

/// `simulate`: run a seeded study over the configured policies and emit
/// `study.csv`.
pub fn cmd_simulate(config: &SimulateConfig) -> CliResult<()> {
    let design = SimDesign {
        kind: config.design,
        n: config.n,
        p_ninf: config.p_ninf,
        seed: config.seed,
    };
    let cv = CvSettings {
        folds: config.folds,
        cv_base_seed: cv_seed_for(config.seed),
    };
    let rows = run_study(&design, &config.entries, config.runs, cv)?;
    for row in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: run {} ({}) failed: {}",
            row.run,
            row.label,
            row.error.as_deref().unwrap_or("unknown")
        );
    }
    ensure_out_dir(&config.out)?;
    io::write_study(&config.out.join("study.csv"), &rows)
}

/// Output file names of `fit` (also written by `cv --refit`).
pub fn fit_output_files(out: &Path) -> [PathBuf; 3] {
    [
        out.join("coefficients.csv"),
        out.join("trace.csv"),
        out.join("risk_path.csv"),
    ]
}
