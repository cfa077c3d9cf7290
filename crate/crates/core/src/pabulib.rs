//! Reader and writer for Pabulib `.pb` files with approval ballots.
//!
//! A file has three `;`-separated sections, each introduced by a marker line
//! and a header row:
//!
//! ```text
//! META
//! key;value
//! budget;1000
//! PROJECTS
//! project_id;cost
//! p1;100
//! VOTES
//! voter_id;vote
//! 1;p1
//! ```
//!
//! Unknown meta keys and extra project/vote columns are kept verbatim.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{ApprovalProfile, PbInstance, Project, Rational};

/// A parse failure with its 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u64,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(col) => write!(f, "line {}, column {}: {}", self.line, col, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

fn err(line: u64, column: Option<usize>, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

/// Ordered `key;value` pairs of the META section.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Meta(Vec<(String, String)>);

impl Meta {
    pub fn new() -> Self {
        Self::default()
    }

    /// Minimal metadata for `instance`/`profile`: description, vote type and
    /// the three required counts.
    pub fn for_instance(instance: &PbInstance, profile: &ApprovalProfile, description: &str) -> Result<Self> {
        let budget = format_decimal(instance.budget())
            .ok_or_else(|| Error::InvalidInput("budget has no finite decimal form".into()))?;
        let mut meta = Self::new();
        meta.set("description", description);
        meta.set("vote_type", "approval");
        meta.set("budget", budget);
        meta.set("num_projects", instance.num_projects().to_string());
        meta.set("num_votes", profile.num_voters().to_string());
        Ok(meta)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Replaces the value of `key`, or appends it.
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.0.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.0.push((key, value)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// Everything in a `.pb` file beyond the instance and profile.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PabulibFile {
    pub meta: Meta,
    /// Names of project columns other than `project_id` and `cost`.
    pub project_columns: Vec<String>,
    /// One row per project, aligned with `project_columns`.
    pub project_extras: Vec<Vec<String>>,
    /// Names of vote columns other than `voter_id` and `vote`.
    pub vote_columns: Vec<String>,
    pub vote_extras: Vec<Vec<String>>,
    /// Voter ids as written in the file, in ballot order.
    pub voter_ids: Vec<String>,
}

struct Row {
    line: u64,
    fields: Vec<String>,
}

/// Parses an approval `.pb` file.
pub fn parse_pb(text: &str) -> Result<(PbInstance, ApprovalProfile, PabulibFile), ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b';')
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut sections: HashMap<&'static str, (u64, Vec<Row>)> = HashMap::new();
    let mut current: Option<&'static str> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, None, format!("malformed line: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<String> = record.iter().map(str::to_string).collect();
        if fields.iter().all(String::is_empty) {
            continue;
        }
        if fields.len() == 1 {
            let marker = match fields[0].to_ascii_uppercase().as_str() {
                "META" => Some("META"),
                "PROJECTS" => Some("PROJECTS"),
                "VOTES" => Some("VOTES"),
                _ => None,
            };
            if let Some(marker) = marker {
                if sections.contains_key(marker) {
                    return Err(err(line, None, format!("duplicate {marker} section")));
                }
                sections.insert(marker, (line, Vec::new()));
                current = Some(marker);
                continue;
            }
        }
        match current {
            Some(section) => sections.get_mut(section).expect("inserted").1.push(Row { line, fields }),
            None => return Err(err(line, None, "content before the META section")),
        }
    }
    let last_line = text.lines().count() as u64;
    let mut take = |name: &str| {
        sections.remove(name).ok_or_else(|| err(last_line.max(1), None, format!("missing {name} section")))
    };
    let meta_rows = take("META")?;
    let project_rows = take("PROJECTS")?;
    let vote_rows = take("VOTES")?;

    let meta = parse_meta(meta_rows)?;
    if let Some(kind) = meta.get("vote_type") {
        if kind != "approval" {
            return Err(err(1, None, format!("unsupported vote_type `{kind}`; only approval ballots are accepted")));
        }
    }
    let budget_text = meta.get("budget").ok_or_else(|| err(1, None, "META lacks the budget key"))?;
    let budget = parse_decimal(budget_text)
        .filter(Signed::is_positive)
        .ok_or_else(|| err(1, None, format!("budget `{budget_text}` is not a positive decimal")))?;

    let (projects_line, project_rows) = project_rows;
    let (header, rows) = split_header(projects_line, project_rows, "PROJECTS")?;
    let id_col = column(&header, "project_id", "PROJECTS")?;
    let cost_col = column(&header, "cost", "PROJECTS")?;
    let project_columns: Vec<String> =
        header.fields.iter().enumerate().filter(|(i, _)| *i != id_col && *i != cost_col).map(|(_, c)| c.clone()).collect();
    let mut projects = Vec::new();
    let mut project_extras = Vec::new();
    let mut seen = HashSet::new();
    for row in &rows {
        let id = field(row, id_col)?;
        if id.is_empty() {
            return Err(err(row.line, Some(id_col + 1), "empty project id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(err(row.line, Some(id_col + 1), format!("duplicate project id `{id}`")));
        }
        let cost_text = field(row, cost_col)?;
        let cost = parse_decimal(cost_text)
            .ok_or_else(|| err(row.line, Some(cost_col + 1), format!("malformed decimal `{cost_text}`")))?;
        if !cost.is_positive() {
            return Err(err(row.line, Some(cost_col + 1), format!("cost `{cost_text}` is not positive")));
        }
        projects.push(Project::new(id, cost));
        project_extras.push(extras(row, &[id_col, cost_col], header.fields.len()));
    }
    let instance = PbInstance::new(projects, budget).map_err(|e| err(projects_line, None, e.to_string()))?;

    let (votes_line, vote_rows) = vote_rows;
    let (header, rows) = split_header(votes_line, vote_rows, "VOTES")?;
    let voter_col = column(&header, "voter_id", "VOTES")?;
    let vote_col = column(&header, "vote", "VOTES")?;
    let vote_columns: Vec<String> = header
        .fields
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != voter_col && *i != vote_col)
        .map(|(_, c)| c.clone())
        .collect();
    let mut ballots = Vec::new();
    let mut voter_ids = Vec::new();
    let mut vote_extras = Vec::new();
    let mut seen_voters = HashSet::new();
    for row in &rows {
        let voter = field(row, voter_col)?;
        if !seen_voters.insert(voter.to_string()) {
            return Err(err(row.line, Some(voter_col + 1), format!("duplicate voter id `{voter}`")));
        }
        // A missing trailing vote field is an empty ballot.
        let vote = row.fields.get(vote_col).map_or("", String::as_str);
        let mut ballot = Vec::new();
        for id in vote.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let p = instance
                .index_of(id)
                .ok_or_else(|| err(row.line, Some(vote_col + 1), format!("vote references unknown project `{id}`")))?;
            ballot.push(p);
        }
        ballots.push(ballot);
        voter_ids.push(voter.to_string());
        vote_extras.push(extras(row, &[voter_col, vote_col], header.fields.len()));
    }
    let profile = ApprovalProfile::new(&instance, ballots).map_err(|e| err(votes_line, None, e.to_string()))?;

    check_count(&meta, "num_projects", instance.num_projects())?;
    check_count(&meta, "num_votes", profile.num_voters())?;

    let file = PabulibFile { meta, project_columns, project_extras, vote_columns, vote_extras, voter_ids };
    Ok((instance, profile, file))
}

fn parse_meta((line, rows): (u64, Vec<Row>)) -> Result<Meta, ParseError> {
    let (header, rows) = split_header(line, rows, "META")?;
    if header.fields.len() < 2 || header.fields[0] != "key" || header.fields[1] != "value" {
        return Err(err(header.line, Some(1), "META header must be `key;value`"));
    }
    let mut meta = Meta::new();
    for row in rows {
        if row.fields.len() < 2 {
            return Err(err(row.line, Some(2), "META row needs a value"));
        }
        if meta.get(&row.fields[0]).is_some() {
            return Err(err(row.line, Some(1), format!("duplicate meta key `{}`", row.fields[0])));
        }
        // Values may legitimately contain `;`.
        meta.set(row.fields[0].clone(), row.fields[1..].join(";"));
    }
    Ok(meta)
}

fn split_header(line: u64, mut rows: Vec<Row>, section: &str) -> Result<(Row, Vec<Row>), ParseError> {
    if rows.is_empty() {
        return Err(err(line, None, format!("{section} section has no header row")));
    }
    let header = rows.remove(0);
    Ok((header, rows))
}

fn column(header: &Row, name: &str, section: &str) -> Result<usize, ParseError> {
    header
        .fields
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| err(header.line, None, format!("{section} header lacks the `{name}` column")))
}

fn field(row: &Row, col: usize) -> Result<&str, ParseError> {
    row.fields.get(col).map(String::as_str).ok_or_else(|| err(row.line, Some(col + 1), "missing field"))
}

fn extras(row: &Row, skip: &[usize], width: usize) -> Vec<String> {
    (0..width).filter(|i| !skip.contains(i)).map(|i| row.fields.get(i).cloned().unwrap_or_default()).collect()
}

fn check_count(meta: &Meta, key: &str, actual: usize) -> Result<(), ParseError> {
    if let Some(text) = meta.get(key) {
        let declared: usize = text.parse().map_err(|_| err(1, None, format!("{key} `{text}` is not a count")))?;
        if declared != actual {
            return Err(err(1, None, format!("{key} is {declared} but the file has {actual}")));
        }
    }
    Ok(())
}

/// Writes canonical `.pb` text: META in the given order, then
/// `project_id;cost` and `voter_id;vote` rows with 1-based voter ids.
pub fn write_pb(instance: &PbInstance, profile: &ApprovalProfile, meta: &Meta) -> Result<String> {
    let file = PabulibFile { meta: meta.clone(), ..PabulibFile::default() };
    write_pb_file(instance, profile, &file)
}

/// Like [`write_pb`], but also writes the extra columns and voter ids kept in
/// `file`.
pub fn write_pb_file(instance: &PbInstance, profile: &ApprovalProfile, file: &PabulibFile) -> Result<String> {
    if profile.num_projects() != instance.num_projects() {
        return Err(Error::InvalidInput("profile and instance disagree on the project count".into()));
    }
    let meta = &file.meta;
    let budget = format_decimal(instance.budget())
        .ok_or_else(|| Error::InvalidInput("budget has no finite decimal form".into()))?;
    let expect = [
        ("budget", budget),
        ("num_projects", instance.num_projects().to_string()),
        ("num_votes", profile.num_voters().to_string()),
    ];
    for (key, value) in &expect {
        match meta.get(key) {
            None => return Err(Error::InvalidInput(format!("meta lacks the required key `{key}`"))),
            Some(v) if key == &"budget" => {
                if parse_decimal(v).as_ref() != Some(instance.budget()) {
                    return Err(Error::InvalidInput(format!("meta budget `{v}` differs from the instance budget {value}")));
                }
            }
            Some(v) if v != value => {
                return Err(Error::InvalidInput(format!("meta {key} is `{v}` but should be {value}")));
            }
            Some(_) => {}
        }
    }
    let use_extras = !file.project_columns.is_empty() && file.project_extras.len() == instance.num_projects();
    let use_vote_extras = !file.vote_columns.is_empty() && file.vote_extras.len() == profile.num_voters();
    let use_voter_ids = file.voter_ids.len() == profile.num_voters();

    let mut out = String::new();
    out.push_str("META\nkey;value\n");
    for (k, v) in meta.iter() {
        push_row(&mut out, [k, v]);
    }
    out.push_str("PROJECTS\n");
    let mut header = vec!["project_id", "cost"];
    if use_extras {
        header.extend(file.project_columns.iter().map(String::as_str));
    }
    push_row(&mut out, header);
    for (p, project) in instance.projects().iter().enumerate() {
        let cost = format_decimal(&project.cost)
            .ok_or_else(|| Error::InvalidInput(format!("cost of `{}` has no finite decimal form", project.id)))?;
        let mut row = vec![project.id.as_str(), cost.as_str()];
        if use_extras {
            row.extend(file.project_extras[p].iter().map(String::as_str));
        }
        push_row(&mut out, row);
    }
    out.push_str("VOTES\n");
    let mut header = vec!["voter_id", "vote"];
    if use_vote_extras {
        header.extend(file.vote_columns.iter().map(String::as_str));
    }
    push_row(&mut out, header);
    for (v, ballot) in profile.ballots().iter().enumerate() {
        let id = if use_voter_ids { file.voter_ids[v].clone() } else { (v + 1).to_string() };
        let vote = ballot.iter().map(|&p| instance.project(p).id.as_str()).collect::<Vec<_>>().join(",");
        let mut row = vec![id.as_str(), vote.as_str()];
        if use_vote_extras {
            row.extend(file.vote_extras[v].iter().map(String::as_str));
        }
        push_row(&mut out, row);
    }
    Ok(out)
}

fn push_row<'a>(out: &mut String, fields: impl IntoIterator<Item = &'a str>) {
    let mut first = true;
    for f in fields {
        if !first {
            out.push(';');
        }
        first = false;
        out.push_str(f);
    }
    out.push('\n');
}

/// Parses a plain decimal such as `12`, `-3.5` or `0.125` exactly.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let denom = BigInt::from(10).pow(frac_part.len() as u32);
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Shortest exact decimal for `value`, or `None` if it has no finite
/// expansion (a denominator with prime factors other than 2 and 5).
pub fn format_decimal(value: &Rational) -> Option<String> {
    let mut denom = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while denom.is_even() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if denom != BigInt::from(1) {
        return None;
    }
    let places = twos.max(fives);
    let scaled = value.numer() * (BigInt::from(10).pow(places) / value.denom());
    let sign = if scaled.is_negative() { "-" } else { "" };
    let digits = scaled.abs().to_string();
    if places == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let places = places.to_usize()?;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    Some(format!("{sign}{int_part}.{frac_part}"))
}
