//! Run configuration: JSON config file merged with command-line flags,
//! flags taking precedence.

use std::path::{Path, PathBuf};

use gamlss_boost::{DesignKind, Interval, StepKind, StepPolicy64, StudyEntry};
use serde::Deserialize;

use crate::{CliError, CliResult};

/// Raw option set shared by the config file and the flags. Every field is
/// optional here; requiredness is checked per command after merging.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// Optional command name in the file; must match the subcommand if given.
    pub command: Option<String>,
    pub input: Option<PathBuf>,
    pub response: Option<String>,
    /// Policy kind, or a comma-separated list for `simulate`.
    pub policy: Option<String>,
    pub lambda: Option<f64>,
    pub nu0: Option<f64>,
    /// Search interval as `LO:HI`.
    pub interval_mu: Option<String>,
    pub interval_sigma: Option<String>,
    pub tol: Option<f64>,
    pub mstop: Option<u64>,
    /// Iteration budget, or a comma-separated list matching `policy` for
    /// `simulate`.
    pub mmax: Option<NumberOrString>,
    pub folds: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub design: Option<String>,
    pub n: Option<u64>,
    pub p_ninf: Option<u64>,
    pub runs: Option<u64>,
    pub refit: Option<bool>,
}

/// JSON convenience: `mmax` may be a number or a string list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumberOrString {
    Number(u64),
    Text(String),
}

impl NumberOrString {
    fn as_text(&self) -> String {
        match self {
            NumberOrString::Number(v) => v.to_string(),
            NumberOrString::Text(s) => s.clone(),
        }
    }
}

impl RawConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Overlays `flags` on top of `self` (flags win where present).
    pub fn merged_with(self, flags: RawConfig) -> RawConfig {
        RawConfig {
            command: flags.command.or(self.command),
            input: flags.input.or(self.input),
            response: flags.response.or(self.response),
            policy: flags.policy.or(self.policy),
            lambda: flags.lambda.or(self.lambda),
            nu0: flags.nu0.or(self.nu0),
            interval_mu: flags.interval_mu.or(self.interval_mu),
            interval_sigma: flags.interval_sigma.or(self.interval_sigma),
            tol: flags.tol.or(self.tol),
            mstop: flags.mstop.or(self.mstop),
            mmax: flags.mmax.or(self.mmax),
            folds: flags.folds.or(self.folds),
            seed: flags.seed.or(self.seed),
            out: flags.out.or(self.out),
            design: flags.design.or(self.design),
            n: flags.n.or(self.n),
            p_ninf: flags.p_ninf.or(self.p_ninf),
            runs: flags.runs.or(self.runs),
            refit: flags.refit.or(self.refit),
        }
    }

    pub fn check_command(&self, subcommand: &str) -> CliResult<()> {
        if let Some(cmd) = &self.command {
            if cmd != subcommand {
                return Err(CliError::Usage(format!(
                    "config file says command `{cmd}` but subcommand `{subcommand}` was invoked"
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_interval(text: &str) -> CliResult<Interval<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "interval must look like LO:HI, got `{text}`"
        )));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid interval bound `{}`", parts[0])))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid interval bound `{}`", parts[1])))?;
    Interval::new(lo, hi).map_err(CliError::from)
}

/// Builds one policy from the merged options, using the given kind.
fn build_policy(raw: &RawConfig, kind: StepKind) -> CliResult<StepPolicy64> {
    let mut policy = StepPolicy64::new(kind);
    if let Some(lambda) = raw.lambda {
        policy = policy.with_lambda(lambda);
    }
    if let Some(nu0) = raw.nu0 {
        policy = policy.with_nu0(nu0);
    }
    if let Some(text) = &raw.interval_mu {
        policy = policy.with_interval_mu(parse_interval(text)?);
    }
    if let Some(text) = &raw.interval_sigma {
        policy = policy.with_interval_sigma(parse_interval(text)?);
    }
    if let Some(tol) = raw.tol {
        policy = policy.with_tol(tol);
    }
    policy.validate()?;
    Ok(policy)
}

fn single_policy(raw: &RawConfig) -> CliResult<StepPolicy64> {
    let kind_text = raw.policy.as_deref().unwrap_or("saasl");
    if kind_text.contains(',') {
        return Err(CliError::Usage(
            "a policy list is only valid for `simulate`".into(),
        ));
    }
    build_policy(raw, kind_text.parse()?)
}

fn require<T>(value: Option<T>, what: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required option --{what}")))
}

const DEFAULT_FOLDS: u64 = 10;

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub input: PathBuf,
    pub response: String,
    pub policy: StepPolicy64,
    pub mstop: usize,
    pub out: PathBuf,
}

impl FitConfig {
    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        Ok(FitConfig {
            input: require(raw.input.clone(), "input")?,
            response: require(raw.response.clone(), "response")?,
            policy: single_policy(raw)?,
            mstop: require(raw.mstop, "mstop")? as usize,
            out: raw.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CvConfig {
    pub input: PathBuf,
    pub response: String,
    pub policy: StepPolicy64,
    pub m_max: usize,
    pub folds: usize,
    pub seed: u64,
    pub refit: bool,
    pub out: PathBuf,
}

impl CvConfig {
    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        let mmax_text = require(raw.mmax.clone(), "mmax")?.as_text();
        if mmax_text.contains(',') {
            return Err(CliError::Usage(
                "an mmax list is only valid for `simulate`".into(),
            ));
        }
        let m_max: usize = mmax_text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid --mmax `{mmax_text}`")))?;
        Ok(CvConfig {
            input: require(raw.input.clone(), "input")?,
            response: require(raw.response.clone(), "response")?,
            policy: single_policy(raw)?,
            m_max,
            folds: raw.folds.unwrap_or(DEFAULT_FOLDS) as usize,
            seed: raw.seed.unwrap_or(1),
            refit: raw.refit.unwrap_or(false),
            out: raw.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub design: DesignKind,
    pub n: usize,
    pub p_ninf: usize,
    pub runs: usize,
    pub folds: usize,
    pub entries: Vec<StudyEntry<f64>>,
    pub seed: u64,
    pub out: PathBuf,
}

impl SimulateConfig {
    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        let design: DesignKind = require(raw.design.as_deref(), "design")?.parse()?;
        let kinds: Vec<StepKind> = raw
            .policy
            .as_deref()
            .unwrap_or("saasl")
            .split(',')
            .map(|s| s.trim().parse::<StepKind>().map_err(CliError::from))
            .collect::<CliResult<_>>()?;

        let mmax_text = require(raw.mmax.clone(), "mmax")?.as_text();
        let mmax_list: Vec<usize> = mmax_text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("invalid --mmax entry `{s}`")))
            })
            .collect::<CliResult<_>>()?;
        let budgets: Vec<usize> = match (kinds.len(), mmax_list.len()) {
            (k, 1) => vec![mmax_list[0]; k],
            (k, m) if k == m => mmax_list,
            (k, m) => {
                return Err(CliError::Usage(format!(
                    "--mmax lists {m} budgets for {k} policies"
                )))
            }
        };

        let entries = kinds
            .iter()
            .zip(&budgets)
            .map(|(&kind, &m_max)| {
                Ok(StudyEntry {
                    label: kind.to_string(),
                    policy: build_policy(raw, kind)?,
                    m_max,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;

        let p_ninf = raw.p_ninf.unwrap_or(match design {
            DesignKind::Balanced => 0,
            DesignKind::LargeVariance => 2,
        }) as usize;

        Ok(SimulateConfig {
            design,
            n: raw.n.unwrap_or(500) as usize,
            p_ninf,
            runs: raw.runs.unwrap_or(1) as usize,
            folds: raw.folds.unwrap_or(DEFAULT_FOLDS) as usize,
            entries,
            seed: raw.seed.unwrap_or(1),
            out: raw.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}
