//! Instances, approval profiles and bundles.
//!
//! Projects are addressed by their position in the instance (`usize`) once an
//! instance is built; string ids are only resolved at the edges.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Builds the exact rational `numer / denom`.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    BigRational::from_integer(BigInt::from(value))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Project {
    pub id: String,
    pub cost: Rational,
}

impl Project {
    pub fn new(id: impl Into<String>, cost: Rational) -> Self {
        Self { id: id.into(), cost }
    }
}

/// Projects with strictly positive costs and a strictly positive budget.
///
/// The approval profile is kept separately so that one instance can be paired
/// with many profiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbInstance {
    projects: Vec<Project>,
    budget: Rational,
    index: HashMap<String, usize>,
}

impl PbInstance {
    pub fn new(projects: Vec<Project>, budget: Rational) -> Result<Self> {
        if projects.is_empty() {
            return Err(Error::InvalidInput("an instance needs at least one project".into()));
        }
        if !budget.is_positive() {
            return Err(Error::InvalidInput(format!("budget must be positive, got {budget}")));
        }
        let mut index = HashMap::with_capacity(projects.len());
        for (pos, project) in projects.iter().enumerate() {
            if !project.cost.is_positive() {
                return Err(Error::InvalidInput(format!(
                    "project `{}` has non-positive cost {}",
                    project.id, project.cost
                )));
            }
            if index.insert(project.id.clone(), pos).is_some() {
                return Err(Error::InvalidInput(format!("duplicate project id `{}`", project.id)));
            }
        }
        Ok(Self { projects, budget, index })
    }

    /// Convenience constructor for integer costs.
    pub fn from_costs(costs: &[(&str, i64)], budget: i64) -> Result<Self> {
        let projects = costs.iter().map(|(id, c)| Project::new(*id, int(*c))).collect();
        Self::new(projects, int(budget))
    }

    pub fn projects(&self) -> &[Project] {
        &self.projects
    }

    pub fn project(&self, idx: usize) -> &Project {
        &self.projects[idx]
    }

    pub fn num_projects(&self) -> usize {
        self.projects.len()
    }

    pub fn budget(&self) -> &Rational {
        &self.budget
    }

    pub fn cost(&self, idx: usize) -> &Rational {
        &self.projects[idx].cost
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn resolve(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownProject(id.to_string()))
    }

    pub fn c_min(&self) -> &Rational {
        self.projects.iter().map(|p| &p.cost).min().expect("non-empty")
    }

    pub fn c_max(&self) -> &Rational {
        self.projects.iter().map(|p| &p.cost).max().expect("non-empty")
    }

    /// ⌊L / c_min⌋, the largest number of projects any feasible bundle can hold.
    pub fn max_bundle_size(&self) -> usize {
        (&self.budget / self.c_min()).floor().to_integer().to_usize().unwrap_or(usize::MAX)
    }

    pub fn bundle_cost(&self, bundle: &Bundle) -> Rational {
        bundle.iter().map(|p| &self.projects[p].cost).sum()
    }

    /// Costs and budget multiplied by the least common denominator, as integers.
    pub fn integer_costs(&self) -> Result<IntegerCosts> {
        let denom = self
            .projects
            .iter()
            .map(|p| p.cost.denom().clone())
            .fold(self.budget.denom().clone(), |acc, d| acc.lcm(&d));
        let scale = |value: &Rational| -> Result<i128> {
            (value.numer() * (&denom / value.denom()))
                .to_i128()
                .ok_or_else(|| Error::Overflow("project costs".into()))
        };
        let costs = self.projects.iter().map(|p| scale(&p.cost)).collect::<Result<Vec<_>>>()?;
        let budget = scale(&self.budget)?;
        Ok(IntegerCosts { costs, budget })
    }
}

/// Costs rescaled to a common integer unit. Ratios between costs are preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerCosts {
    pub costs: Vec<i128>,
    pub budget: i128,
}

/// One approval ballot per voter; voter `i` is the `i`-th ballot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApprovalProfile {
    ballots: Vec<Vec<usize>>,
    num_projects: usize,
}

impl ApprovalProfile {
    /// Ballots are sorted and deduplicated; indices must exist in `instance`.
    pub fn new(instance: &PbInstance, ballots: Vec<Vec<usize>>) -> Result<Self> {
        let num_projects = instance.num_projects();
        let ballots = ballots
            .into_iter()
            .map(|mut ballot| {
                ballot.sort_unstable();
                ballot.dedup();
                match ballot.last() {
                    Some(&p) if p >= num_projects => {
                        Err(Error::UnknownProject(format!("#{p}")))
                    }
                    _ => Ok(ballot),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ballots, num_projects })
    }

    pub fn from_ids<S: AsRef<str>>(instance: &PbInstance, ballots: &[&[S]]) -> Result<Self> {
        let ballots = ballots
            .iter()
            .map(|ballot| ballot.iter().map(|id| instance.resolve(id.as_ref())).collect())
            .collect::<Result<Vec<_>>>()?;
        Self::new(instance, ballots)
    }

    pub fn num_voters(&self) -> usize {
        self.ballots.len()
    }

    pub fn num_projects(&self) -> usize {
        self.num_projects
    }

    pub fn ballot(&self, voter: usize) -> &[usize] {
        &self.ballots[voter]
    }

    pub fn ballots(&self) -> &[Vec<usize>] {
        &self.ballots
    }

    pub fn approves(&self, voter: usize, project: usize) -> bool {
        self.ballots[voter].binary_search(&project).is_ok()
    }

    /// Number of approvals per project.
    pub fn approval_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_projects];
        for p in self.ballots.iter().flatten() {
            counts[*p] += 1;
        }
        counts
    }

    /// Voters approving each project, in increasing voter order.
    pub fn approvers(&self) -> Vec<Vec<usize>> {
        let mut approvers = vec![Vec::new(); self.num_projects];
        for (voter, ballot) in self.ballots.iter().enumerate() {
            for p in ballot {
                approvers[*p].push(voter);
            }
        }
        approvers
    }

    /// Same voters, with ballots reordered by `order` (voter `i` becomes `order[i]`'s ballot).
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            ballots: order.iter().map(|&v| self.ballots[v].clone()).collect(),
            num_projects: self.num_projects,
        }
    }

    pub(crate) fn check_bundle(&self, bundle: &Bundle) -> Result<()> {
        match bundle.funded.last() {
            Some(&p) if p >= self.num_projects => Err(Error::UnknownProject(format!("#{p}"))),
            _ => Ok(()),
        }
    }
}

/// A set of funded projects, stored as sorted project indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bundle {
    funded: Vec<usize>,
}

impl Bundle {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut funded: Vec<usize> = indices.into_iter().collect();
        funded.sort_unstable();
        funded.dedup();
        Self { funded }
    }

    pub fn from_ids<S: AsRef<str>>(instance: &PbInstance, ids: &[S]) -> Result<Self> {
        let indices = ids.iter().map(|id| instance.resolve(id.as_ref())).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_indices(indices))
    }

    pub fn len(&self) -> usize {
        self.funded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funded.is_empty()
    }

    pub fn contains(&self, project: usize) -> bool {
        self.funded.binary_search(&project).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.funded.iter().copied()
    }

    pub fn indices(&self) -> &[usize] {
        &self.funded
    }

    pub fn insert(&mut self, project: usize) {
        if let Err(pos) = self.funded.binary_search(&project) {
            self.funded.insert(pos, project);
        }
    }

    pub fn union(&self, other: &Bundle) -> Bundle {
        Bundle::from_indices(self.iter().chain(other.iter()))
    }

    pub fn is_subset(&self, other: &Bundle) -> bool {
        self.iter().all(|p| other.contains(p))
    }

    /// Project ids in lexicographic order.
    pub fn sorted_ids<'a>(&self, instance: &'a PbInstance) -> Vec<&'a str> {
        let mut ids: Vec<&str> = self.iter().map(|p| instance.project(p).id.as_str()).collect();
        ids.sort_unstable();
        ids
    }

    pub fn display<'a>(&'a self, instance: &'a PbInstance) -> BundleDisplay<'a> {
        BundleDisplay { bundle: self, instance }
    }
}

pub struct BundleDisplay<'a> {
    bundle: &'a Bundle,
    instance: &'a PbInstance,
}

impl fmt::Display for BundleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, p) in self.bundle.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", self.instance.project(p).id)?;
        }
        write!(f, "}}")
    }
}

/// `value` as an exact `f64` approximation, for reporting and irrational bounds.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}
