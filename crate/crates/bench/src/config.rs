//! Flat `key = value` experiment files.
//!
//! ```text
//! # Lines starting with '#' are comments.
//! preset = euclidean-desk
//! rules = av, pav, seq_pav
//! seed = 100
//! out_csv = rows.csv
//! ```
//!
//! `preset` or `dataset` must be given; every other key overrides a field of
//! the resulting spec and is applied in file order.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use pb_core::datagen::{EuclideanConfig, PartyListConfig};

use crate::experiment::{Dataset, ExperimentSpec, TCap};
use crate::rules::Rule;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 40 voters, 15 projects, 50 seeds.
    EuclideanDesk,
    /// 20 voters in groups of 2 to 5, 50 seeds.
    PartyListDesk,
    City,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::EuclideanDesk, Preset::PartyListDesk, Preset::City];

    pub fn name(self) -> &'static str {
        match self {
            Self::EuclideanDesk => "euclidean-desk",
            Self::PartyListDesk => "partylist-desk",
            Self::City => "city",
        }
    }

    pub fn spec(self) -> ExperimentSpec {
        match self {
            Self::EuclideanDesk => ExperimentSpec {
                t_cap: TCap::Full,
                ..ExperimentSpec::new(self.name(), Dataset::Euclidean(EuclideanConfig::desk()))
            },
            Self::PartyListDesk => ExperimentSpec {
                t_cap: TCap::Full,
                ..ExperimentSpec::new(self.name(), Dataset::PartyList(PartyListConfig::desk()))
            },
            Self::City => ExperimentSpec { t_cap: TCap::Full, count: 1, ..ExperimentSpec::new("city", Dataset::City) },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            BenchError::Spec(format!("unknown preset `{s}` (expected euclidean-desk, partylist-desk or city)"))
        })
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, BenchError> {
    value.parse().map_err(|_| BenchError::Spec(format!("`{key}` expects a number, got `{value}`")))
}

fn parse_range(key: &str, value: &str) -> Result<(usize, usize), BenchError> {
    let (lo, hi) = value
        .split_once("..")
        .ok_or_else(|| BenchError::Spec(format!("`{key}` expects a range like 2..5, got `{value}`")))?;
    Ok((parse_num(key, lo.trim())?, parse_num(key, hi.trim())?))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, BenchError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(BenchError::Spec(format!("`{key}` expects true or false, got `{value}`"))),
    }
}

/// Applies one setting to `spec`.
pub fn apply(spec: &mut ExperimentSpec, key: &str, value: &str) -> Result<(), BenchError> {
    let dataset_name = spec.dataset.to_string();
    let wrong_dataset = || BenchError::Spec(format!("`{key}` does not apply to dataset {dataset_name}"));
    match key {
        "label" => spec.label = value.to_string(),
        "rules" => spec.rules = Rule::parse_list(value)?,
        "tiebreak" => spec.tiebreak = value.parse()?,
        "seed" => spec.seed = parse_num(key, value)?,
        "count" => spec.count = parse_num(key, value)?,
        "tcap" | "t_cap" => spec.t_cap = value.parse()?,
        "max_nodes" => spec.max_nodes = parse_num(key, value)?,
        "rx_eps_mode" => {
            spec.eps_mode = value.parse().map_err(|e: pb_core::Error| BenchError::Spec(e.to_string()))?
        }
        "timing" => spec.timing = parse_bool(key, value)?,
        "out_csv" => spec.out_csv = Some(PathBuf::from(value)),
        "out_svg" => spec.out_svg = Some(PathBuf::from(value)),
        "n_voters" => match &mut spec.dataset {
            Dataset::Euclidean(c) => c.n_voters = parse_num(key, value)?,
            Dataset::PartyList(c) => c.n_voters = parse_num(key, value)?,
            _ => return Err(wrong_dataset()),
        },
        "n_projects" | "budget" | "approvals_mean" | "approvals_std" => {
            let Dataset::Euclidean(c) = &mut spec.dataset else {
                return Err(wrong_dataset());
            };
            match key {
                "n_projects" => c.n_projects = parse_num(key, value)?,
                "budget" => c.budget = parse_num(key, value)?,
                "approvals_mean" => c.approvals_mean = parse_num(key, value)?,
                _ => c.approvals_std = parse_num(key, value)?,
            }
        }
        "group_size" | "projects_per_group" | "cost_per_voter" | "budget_fraction" => {
            let Dataset::PartyList(c) = &mut spec.dataset else {
                return Err(wrong_dataset());
            };
            match key {
                "group_size" => c.group_size_range = parse_range(key, value)?,
                "projects_per_group" => c.projects_per_group_range = parse_range(key, value)?,
                "cost_per_voter" => c.cost_per_voter = parse_num(key, value)?,
                _ => {
                    let (num, den) = value
                        .split_once('/')
                        .ok_or_else(|| BenchError::Spec(format!("`{key}` expects a fraction like 1/2")))?;
                    c.budget_fraction = (parse_num(key, num.trim())?, parse_num(key, den.trim())?);
                }
            }
        }
        _ => return Err(BenchError::Spec(format!("unknown setting `{key}`"))),
    }
    Ok(())
}

/// Parses an experiment file.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, BenchError> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| BenchError::Spec(format!("line {}: expected key = value, got `{line}`", n + 1)))?;
        pairs.push((n + 1, key.trim(), value.trim()));
    }
    let base = pairs.iter().find(|(_, k, _)| *k == "preset" || *k == "dataset");
    let mut spec = match base {
        Some((_, "preset", value)) => value.parse::<Preset>()?.spec(),
        Some((_, _, value)) => {
            let dataset: Dataset = value.parse()?;
            let label = match &dataset {
                Dataset::Adversarial(f) => f.name().to_ascii_lowercase(),
                Dataset::Pabulib(_) => "pabulib".into(),
                other => other.to_string(),
            };
            ExperimentSpec::new(label, dataset)
        }
        None => return Err(BenchError::Spec("the config needs a `preset` or `dataset` line".into())),
    };
    let mut seen_base = false;
    for (line, key, value) in pairs {
        if key == "preset" || key == "dataset" {
            if seen_base {
                return Err(BenchError::Spec(format!("line {line}: only one preset or dataset line is allowed")));
            }
            seen_base = true;
            continue;
        }
        apply(&mut spec, key, value).map_err(|e| BenchError::Spec(format!("line {line}: {e}")))?;
    }
    spec.validate()?;
    Ok(spec)
}
