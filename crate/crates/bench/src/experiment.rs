use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use pb_core::adversarial::{build, Family};
use pb_core::datagen::{gen_euclidean, gen_party_list, EuclideanConfig, PartyListConfig};
use pb_core::exact::{max_representation, max_social_welfare, SearchBudget, DEFAULT_MAX_NODES};
use pb_core::fairness::{default_t_cap, ejr_percentage, find_ejr_violation, full_t_cap, EjrState};
use pb_core::model::to_f64;
use pb_core::pabulib::{parse_pb, write_pb, Meta};
use pb_core::samples::city;
use pb_core::scoring::{ratios, representation, social_welfare};
use pb_core::sequential::RxEpsMode;
use pb_core::{ApprovalProfile, PbInstance, Rational};
use rayon::prelude::*;

use crate::rules::{run_rule, Rule, TieBreak};
use crate::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// The three-district example.
    City,
    Euclidean(EuclideanConfig),
    PartyList(PartyListConfig),
    /// Every `.pb` file in a directory.
    Pabulib(PathBuf),
    /// The default sweep of one worst-case family.
    Adversarial(Family),
}

impl Dataset {
    fn is_seeded(&self) -> bool {
        matches!(self, Self::Euclidean(_) | Self::PartyList(_))
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::City => f.write_str("city"),
            Self::Euclidean(_) => f.write_str("euclidean"),
            Self::PartyList(_) => f.write_str("partylist"),
            Self::Pabulib(dir) => write!(f, "pabulib:{}", dir.display()),
            Self::Adversarial(family) => write!(f, "adversarial:{family}"),
        }
    }
}

impl FromStr for Dataset {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "city" => Ok(Self::City),
            "euclidean" => Ok(Self::Euclidean(EuclideanConfig::default())),
            "partylist" | "party-list" => Ok(Self::PartyList(PartyListConfig::default())),
            _ => {
                if let Some(dir) = s.strip_prefix("pabulib:") {
                    Ok(Self::Pabulib(PathBuf::from(dir)))
                } else if let Some(family) = s.strip_prefix("adversarial:") {
                    Ok(Self::Adversarial(family.parse().map_err(|e: pb_core::Error| BenchError::Spec(e.to_string()))?))
                } else {
                    Err(BenchError::Spec(format!(
                        "unknown dataset `{s}` (expected city, euclidean, partylist, pabulib:<dir> or adversarial:<family>)"
                    )))
                }
            }
        }
    }
}

/// Largest `|T|` searched by the EJR check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TCap {
    /// `min(⌊L/c_min⌋, 10)`.
    Auto,
    /// Large enough that no cohesive group is skipped.
    Full,
    Fixed(usize),
}

impl TCap {
    fn resolve(self, instance: &PbInstance, profile: &ApprovalProfile) -> usize {
        match self {
            Self::Auto => default_t_cap(instance),
            Self::Full => full_t_cap(instance, profile).max(1),
            Self::Fixed(cap) => cap,
        }
    }
}

impl fmt::Display for TCap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Full => f.write_str("full"),
            Self::Fixed(cap) => write!(f, "{cap}"),
        }
    }
}

impl FromStr for TCap {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "auto" => Ok(Self::Auto),
            "full" => Ok(Self::Full),
            _ => match s.parse::<usize>() {
                Ok(cap) if cap > 0 => Ok(Self::Fixed(cap)),
                _ => Err(BenchError::Spec(format!("bad t_cap `{s}` (expected auto, full or a positive integer)"))),
            },
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Dataset name used in summaries and plots.
    pub label: String,
    pub dataset: Dataset,
    pub rules: Vec<Rule>,
    pub tiebreak: TieBreak,
    /// First seed of generated datasets.
    pub seed: u64,
    /// Number of generated instances (seeds `seed..seed + count`).
    pub count: u64,
    pub t_cap: TCap,
    pub max_nodes: u64,
    pub eps_mode: RxEpsMode,
    /// Adds a wall-time column, which makes the CSV non-reproducible.
    pub timing: bool,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(label: impl Into<String>, dataset: Dataset) -> Self {
        Self {
            label: label.into(),
            dataset,
            rules: Rule::ALL.to_vec(),
            tiebreak: TieBreak::Worst,
            seed: 0,
            count: 50,
            t_cap: TCap::Auto,
            max_nodes: DEFAULT_MAX_NODES,
            eps_mode: RxEpsMode::Limit,
            timing: false,
            out_csv: None,
            out_svg: None,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.rules.is_empty() {
            return Err(BenchError::Spec("the rule list is empty".into()));
        }
        if self.dataset.is_seeded() && self.count == 0 {
            return Err(BenchError::Spec("count must be positive for generated datasets".into()));
        }
        if self.seed.checked_add(self.count).is_none() {
            return Err(BenchError::Spec("seed + count overflows".into()));
        }
        if self.max_nodes == 0 {
            return Err(BenchError::Spec("max_nodes must be positive".into()));
        }
        if self.label.is_empty() || self.label.contains([',', '\n']) {
            return Err(BenchError::Spec(format!("bad dataset label `{}`", self.label)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedInstance {
    pub id: String,
    pub instance: PbInstance,
    pub profile: ApprovalProfile,
}

/// Materializes the dataset, in a fixed order.
pub fn load_instances(spec: &ExperimentSpec) -> Result<Vec<NamedInstance>, BenchError> {
    let seeds = spec.seed..spec.seed + spec.count;
    let width = (spec.seed + spec.count).saturating_sub(1).to_string().len().max(3);
    let named = |id: String, (instance, profile): (PbInstance, ApprovalProfile)| NamedInstance { id, instance, profile };
    match &spec.dataset {
        Dataset::City => Ok(vec![named("city".into(), city())]),
        Dataset::Euclidean(config) => seeds
            .map(|s| Ok(named(format!("{}-{s:0width$}", spec.label), gen_euclidean(config, s)?)))
            .collect(),
        Dataset::PartyList(config) => seeds
            .map(|s| Ok(named(format!("{}-{s:0width$}", spec.label), gen_party_list(config, s)?)))
            .collect(),
        Dataset::Adversarial(family) => family
            .sweep()
            .iter()
            .map(|params| {
                let case = build(*family, params)?;
                Ok(named(format!("{family}[{params}]"), (case.instance, case.profile)))
            })
            .collect(),
        Dataset::Pabulib(dir) => {
            let entries = std::fs::read_dir(dir).map_err(|e| BenchError::Dataset(format!("{}: {e}", dir.display())))?;
            let mut paths: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "pb"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(BenchError::Dataset(format!("no .pb files in {}", dir.display())));
            }
            paths
                .iter()
                .map(|path| {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| BenchError::Dataset(format!("{}: {e}", path.display())))?;
                    let (instance, profile, _) =
                        parse_pb(&text).map_err(|e| BenchError::Dataset(format!("{}: {e}", path.display())))?;
                    let id = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
                    Ok(NamedInstance { id, instance, profile })
                })
                .collect()
        }
    }
}

/// Pabulib text for every instance of a generated dataset, as
/// `(file name, contents)` pairs in load order.
pub fn write_corpus(spec: &ExperimentSpec, instances: &[NamedInstance]) -> Result<Vec<(String, String)>, BenchError> {
    instances
        .iter()
        .map(|named| {
            let mut meta = Meta::for_instance(&named.instance, &named.profile, &named.id)?;
            meta.set("dataset", spec.dataset.to_string());
            if let Dataset::PartyList(config) = &spec.dataset {
                let (num, den) = config.budget_fraction;
                meta.set("budget_rule", format!("{num}/{den} of the total project cost"));
            }
            let text = write_pb(&named.instance, &named.profile, &meta)?;
            Ok((format!("{}.pb", named.id), text))
        })
        .collect()
}

/// Scores of a successful row.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub sw: u64,
    pub rp: u64,
    pub util_ratio: Rational,
    pub rep_ratio: Rational,
    pub ejr: EjrState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub rule: Rule,
    /// The scores, or why the row could not be computed.
    pub result: Result<Scores, String>,
    pub wall_ms: f64,
}

/// Runs every rule on every instance. Rows come back ordered by instance
/// (in load order), then rule, whatever the thread count.
pub fn run_experiment(spec: &ExperimentSpec, instances: &[NamedInstance]) -> Result<Vec<ResultRow>, BenchError> {
    spec.validate()?;
    let search_budget = SearchBudget::with_max_nodes(spec.max_nodes);
    let mut indexed: Vec<(usize, ResultRow)> = instances
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, named)| instance_rows(spec, named, search_budget).into_iter().map(move |r| (i, r)))
        .collect();
    indexed.sort_by(|a, b| (a.0, a.1.rule).cmp(&(b.0, b.1.rule)));
    let rows: Vec<ResultRow> = indexed.into_iter().map(|(_, r)| r).collect();
    if let Some(first) = rows.first() {
        if rows.iter().all(|r| r.result.is_err()) {
            return Err(BenchError::AllFailed(first.result.clone().err().unwrap_or_default()));
        }
    }
    Ok(rows)
}

fn instance_rows(spec: &ExperimentSpec, named: &NamedInstance, search_budget: SearchBudget) -> Vec<ResultRow> {
    let (inst, prof) = (&named.instance, &named.profile);
    let optima = max_social_welfare(inst, prof, search_budget)
        .and_then(|sw| Ok((sw, max_representation(inst, prof, search_budget)?)))
        .map_err(|e| format!("optimum: {e}"))
        .and_then(|(sw, rp)| {
            if sw == 0 {
                Err("optimum: no voter approves a fundable project".to_string())
            } else {
                Ok((sw, rp))
            }
        });
    let t_cap = spec.t_cap.resolve(inst, prof);
    spec.rules
        .iter()
        .map(|&rule| {
            let start = Instant::now();
            let result = optima.clone().and_then(|(opt_sw, opt_rp)| {
                let bundle = run_rule(rule, inst, prof, spec.tiebreak, &spec.eps_mode, search_budget)
                    .map_err(|e| e.to_string())?;
                let score = || -> pb_core::Result<Scores> {
                    let (util_ratio, rep_ratio) = ratios(inst, prof, &bundle, opt_sw, opt_rp)?;
                    Ok(Scores {
                        sw: social_welfare(prof, &bundle)?,
                        rp: representation(prof, &bundle)?,
                        util_ratio,
                        rep_ratio,
                        ejr: find_ejr_violation(inst, prof, &bundle, t_cap)?.state(),
                    })
                };
                score().map_err(|e| e.to_string())
            });
            ResultRow {
                instance: named.id.clone(),
                rule,
                result,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect()
}

/// `value` rounded half away from zero to six decimal places.
pub fn decimal6(value: &Rational) -> String {
    let scale = BigInt::from(1_000_000);
    let scaled = value * Rational::from_integer(scale.clone());
    let magnitude = scaled.abs();
    let twice: BigInt = magnitude.numer() * 2 + magnitude.denom();
    let rounded = twice.div_floor(&(magnitude.denom() * 2));
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if value.is_negative() && !rounded.is_zero() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part:0>6}")
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("fields are UTF-8")
}

/// One line per row: `instance,rule,sw,rp,util_ratio,rep_ratio,ejr[,wall_ms],reason`.
pub fn rows_csv(rows: &[ResultRow], timing: bool) -> String {
    let mut w = csv_writer();
    let mut header = vec!["instance", "rule", "sw", "rp", "util_ratio", "rep_ratio", "ejr"];
    if timing {
        header.push("wall_ms");
    }
    header.push("reason");
    w.write_record(&header).expect("in-memory");
    for row in rows {
        let mut record: Vec<String> = vec![row.instance.clone(), row.rule.to_string()];
        match &row.result {
            Ok(s) => record.extend([
                s.sw.to_string(),
                s.rp.to_string(),
                decimal6(&s.util_ratio),
                decimal6(&s.rep_ratio),
                s.ejr.to_string(),
            ]),
            Err(_) => record.extend(std::iter::repeat_n(String::new(), 5)),
        }
        if timing {
            record.push(format!("{:.3}", row.wall_ms));
        }
        record.push(row.result.as_ref().err().cloned().unwrap_or_default());
        w.write_record(&record).expect("in-memory");
    }
    finish(w)
}

/// Per-rule averages over the successful rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub dataset: String,
    pub rule: Rule,
    /// Successful rows.
    pub count: usize,
    pub failed: usize,
    pub util_mean: Rational,
    pub util_stderr: f64,
    pub rep_mean: Rational,
    pub rep_stderr: f64,
    /// Share of rows satisfying EJR; `None` when some verdicts are unknown.
    pub ejr_share: Option<Rational>,
    pub ejr_unknown: usize,
}

/// Mean and standard error (sample standard deviation over √k).
fn mean_and_stderr(values: &[&Rational]) -> (Rational, f64) {
    let k = values.len();
    let kr = Rational::from_integer(BigInt::from(k));
    let mean: Rational = values.iter().copied().sum::<Rational>() / &kr;
    if k < 2 {
        return (mean, 0.0);
    }
    let squares: Rational = values.iter().map(|v| (*v - &mean) * (*v - &mean)).sum();
    let variance = squares / Rational::from_integer(BigInt::from(k - 1));
    (mean, (to_f64(&variance) / k as f64).sqrt())
}

/// Summarizes rows per rule, in rule order. Rules without any successful
/// row are left out; having no successful row at all is an error.
pub fn aggregate(dataset: &str, rows: &[ResultRow]) -> Result<Vec<Summary>, BenchError> {
    let mut summaries = Vec::new();
    for rule in Rule::ALL {
        let mine: Vec<&ResultRow> = rows.iter().filter(|r| r.rule == rule).collect();
        let ok: Vec<&Scores> = mine.iter().filter_map(|r| r.result.as_ref().ok()).collect();
        if ok.is_empty() {
            continue;
        }
        let (util_mean, util_stderr) = mean_and_stderr(&ok.iter().map(|s| &s.util_ratio).collect::<Vec<_>>());
        let (rep_mean, rep_stderr) = mean_and_stderr(&ok.iter().map(|s| &s.rep_ratio).collect::<Vec<_>>());
        let states: Vec<EjrState> = ok.iter().map(|s| s.ejr).collect();
        summaries.push(Summary {
            dataset: dataset.to_string(),
            rule,
            count: ok.len(),
            failed: mine.len() - ok.len(),
            util_mean,
            util_stderr,
            rep_mean,
            rep_stderr,
            ejr_share: ejr_percentage(&states).ok(),
            ejr_unknown: states.iter().filter(|s| **s == EjrState::Unknown).count(),
        });
    }
    if summaries.is_empty() {
        return Err(BenchError::AllFailed("no successful rows to aggregate".into()));
    }
    Ok(summaries)
}

fn ejr_percent(summary: &Summary) -> String {
    match &summary.ejr_share {
        Some(share) => decimal6(&(share * Rational::from_integer(BigInt::from(100)))),
        None => "unknown".into(),
    }
}

pub fn summary_csv(summaries: &[Summary]) -> String {
    let mut w = csv_writer();
    w.write_record(["dataset", "rule", "n", "failed", "util_mean", "util_se", "rep_mean", "rep_se", "ejr_pct"])
        .expect("in-memory");
    for s in summaries {
        w.write_record([
            s.dataset.clone(),
            s.rule.to_string(),
            s.count.to_string(),
            s.failed.to_string(),
            decimal6(&s.util_mean),
            format!("{:.6}", s.util_stderr),
            decimal6(&s.rep_mean),
            format!("{:.6}", s.rep_stderr),
            ejr_percent(s),
        ])
        .expect("in-memory");
    }
    finish(w)
}

/// Fixed-width table in the shape of the usual ratio tables.
pub fn summary_table(summaries: &[Summary]) -> String {
    let mut out = format!(
        "{:<16} {:<11} {:>4} {:>21} {:>21} {:>11}\n",
        "dataset", "rule", "n", "utilitarian", "representation", "EJR%"
    );
    for s in summaries {
        let util = format!("{:.4} ± {:.4}", to_f64(&s.util_mean), s.util_stderr);
        let rep = format!("{:.4} ± {:.4}", to_f64(&s.rep_mean), s.rep_stderr);
        let ejr = match &s.ejr_share {
            Some(share) => format!("{:.1}", to_f64(share) * 100.0),
            None => format!("? ({} capped)", s.ejr_unknown),
        };
        let failed = if s.failed > 0 { format!("  [{} failed]", s.failed) } else { String::new() };
        out.push_str(&format!(
            "{:<16} {:<11} {:>4} {:>21} {:>21} {:>11}{failed}\n",
            s.dataset, s.rule.name(), s.count, util, rep, ejr
        ));
    }
    out
}
