//! CSV input and output.
//!
//! All emitted files are plain comma-separated UTF-8 with a header row and a
//! decimal point regardless of locale. Floats are written with 17 significant
//! digits so equal runs produce byte-identical files and values round-trip
//! exactly through a parser.

use std::path::Path;

use gamlss_boost::{BoostModel64, Dataset64, Parameter, StudyRow};

use crate::{CliError, CliResult};

/// 17 significant digits, enough to reproduce any f64 bit pattern.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads a CSV file with a header row into a dataset, taking `response` as
/// the outcome and every remaining column as a numeric covariate. Missing or
/// non-numeric values are rejected.
pub fn read_dataset(path: &Path, response: &str) -> CliResult<Dataset64> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let response_index = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| {
            CliError::Data(format!(
                "response column `{response}` not found in {}",
                path.display()
            ))
        })?;

    let covariate_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != response_index)
        .map(|(_, h)| h.clone())
        .collect();

    let mut y = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); covariate_names.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(CliError::Data(format!(
                "row {}: expected {} fields, found {}",
                row + 2,
                headers.len(),
                record.len()
            )));
        }
        let mut col = 0;
        for (i, field) in record.iter().enumerate() {
            let trimmed = field.trim();
            if trimmed.is_empty() {
                return Err(CliError::Data(format!(
                    "row {}, column `{}`: missing value",
                    row + 2,
                    headers[i]
                )));
            }
            let value: f64 = trimmed.parse().map_err(|_| {
                CliError::Data(format!(
                    "row {}, column `{}`: `{trimmed}` is not numeric",
                    row + 2,
                    headers[i]
                ))
            })?;
            if i == response_index {
                y.push(value);
            } else {
                columns[col].push(value);
                col += 1;
            }
        }
    }
    Dataset64::new(y, columns, covariate_names).map_err(CliError::from)
}

/// Writes the coefficient table: one `(Intercept)` row holding the offsets
/// plus all accumulated intercept contributions, then one row per covariate
/// with its accumulated slope for each predictor.
pub fn write_coefficients(path: &Path, model: &BoostModel64) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["term", "eta_mu", "eta_sigma"])?;
    w.write_record([
        "(Intercept)",
        &fmt_float(model.total_intercept_mu()),
        &fmt_float(model.total_intercept_sigma()),
    ])?;
    for (j, name) in model.names.iter().enumerate() {
        w.write_record([
            name.as_str(),
            &fmt_float(model.coef_mu[j].slope),
            &fmt_float(model.coef_sigma[j].slope),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed coefficient table, sufficient to reproduce model predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub intercept_mu: f64,
    pub intercept_sigma: f64,
    /// `(name, mu_slope, sigma_slope)` in file order.
    pub slopes: Vec<(String, f64, f64)>,
}

impl CoefficientTable {
    /// Additive predictors for covariate columns given in table order.
    pub fn predictors(&self, columns: &[Vec<f64>]) -> CliResult<(Vec<f64>, Vec<f64>)> {
        if columns.len() != self.slopes.len() {
            return Err(CliError::Data(format!(
                "coefficient table has {} covariates but {} columns were given",
                self.slopes.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, |c| c.len());
        let mut eta_mu = vec![self.intercept_mu; n];
        let mut eta_sigma = vec![self.intercept_sigma; n];
        for (j, col) in columns.iter().enumerate() {
            for i in 0..n {
                eta_mu[i] += self.slopes[j].1 * col[i];
                eta_sigma[i] += self.slopes[j].2 * col[i];
            }
        }
        Ok((eta_mu, eta_sigma))
    }
}

/// Reads a file produced by [`write_coefficients`].
pub fn read_coefficients(path: &Path) -> CliResult<CoefficientTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut intercepts = None;
    let mut slopes = Vec::new();
    for record in reader.records() {
        let record = record?;
        let term = record
            .get(0)
            .ok_or_else(|| CliError::Data("empty coefficient row".into()))?
            .to_string();
        let parse = |k: usize| -> CliResult<f64> {
            record
                .get(k)
                .ok_or_else(|| CliError::Data(format!("row `{term}`: missing field {k}")))?
                .parse()
                .map_err(|_| CliError::Data(format!("row `{term}`: non-numeric coefficient")))
        };
        let mu = parse(1)?;
        let sigma = parse(2)?;
        if term == "(Intercept)" {
            intercepts = Some((mu, sigma));
        } else {
            slopes.push((term, mu, sigma));
        }
    }
    let (intercept_mu, intercept_sigma) =
        intercepts.ok_or_else(|| CliError::Data("coefficient table has no intercept row".into()))?;
    Ok(CoefficientTable {
        intercept_mu,
        intercept_sigma,
        slopes,
    })
}

/// One row per applied update: iteration, updated parameter, covariate name
/// and the step-lengths around it.
pub fn write_trace(path: &Path, model: &BoostModel64) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["m", "parameter", "covariate", "nu_star", "nu", "risk_after"])?;
    for rec in &model.trace {
        w.write_record([
            rec.m.to_string().as_str(),
            rec.parameter.as_str(),
            model.names[rec.covariate].as_str(),
            &fmt_float(rec.nu_star),
            &fmt_float(rec.nu),
            &fmt_float(rec.risk_after),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_risk_path(path: &Path, risks: &[f64]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["m", "risk"])?;
    for (m, risk) in risks.iter().enumerate() {
        w.write_record([m.to_string().as_str(), &fmt_float(*risk)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cv_curve(path: &Path, mean_risk: &[f64]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["m", "mean_out_of_fold_risk"])?;
    for (m, risk) in mean_risk.iter().enumerate() {
        w.write_record([m.to_string().as_str(), &fmt_float(*risk)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_m_best(path: &Path, m_best: usize) -> CliResult<()> {
    std::fs::write(path, format!("{m_best}\n"))?;
    Ok(())
}

/// Study table: run and policy identifiers, the per-run seed, all metrics and
/// a status column (`ok` or the error text for failed runs, whose metric
/// fields stay empty).
pub fn write_study(path: &Path, rows: &[StudyRow<f64>]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "run",
        "policy",
        "seed",
        "m_stop_used",
        "mse_mu",
        "mse_sigma",
        "in_sample_mse",
        "fp_mu",
        "fp_sigma",
        "fn_mu",
        "fn_sigma",
        "p_m_mu",
        "status",
    ])?;
    for row in rows {
        match (&row.metrics, &row.error) {
            (Some(m), None) => w.write_record([
                row.run.to_string().as_str(),
                row.label.as_str(),
                row.seed.to_string().as_str(),
                m.m_stop_used.to_string().as_str(),
                &fmt_float(m.mse_mu),
                &fmt_float(m.mse_sigma),
                &fmt_float(m.in_sample_mse),
                m.fp_mu.to_string().as_str(),
                m.fp_sigma.to_string().as_str(),
                m.fn_mu.to_string().as_str(),
                m.fn_sigma.to_string().as_str(),
                &fmt_float(m.p_m_mu),
                "ok",
            ])?,
            (_, Some(error)) => w.write_record([
                row.run.to_string().as_str(),
                row.label.as_str(),
                row.seed.to_string().as_str(),
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                "",
                &format!("error: {error}"),
            ])?,
            (None, None) => {
                return Err(CliError::Data("study row without metrics or error".into()))
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Prints boundary-hit and clamp warnings for a fitted model to standard
/// error.
pub fn warn_fit_diagnostics(model: &BoostModel64) {
    for (parameter, hits, flag) in [
        (Parameter::Mu, model.boundary_hits_mu, "--interval-mu"),
        (Parameter::Sigma, model.boundary_hits_sigma, "--interval-sigma"),
    ] {
        if hits > 0 {
            eprintln!(
                "warning: optimal step-length for {parameter} ended at the search-interval \
                 boundary in {hits} candidate evaluations; consider widening {flag}"
            );
        }
    }
    if model.sigma_clamp_reached {
        eprintln!(
            "warning: the scale predictor reached the exponentiation guard (|eta_sigma| >= {}); \
             results at this scale are numerically meaningless — consider rescaling the response",
            gamlss_boost::family::ETA_SIGMA_CLAMP
        );
    }
}
