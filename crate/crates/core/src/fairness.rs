//! Cohesive groups and extended justified representation (EJR).
//!
//! A group `S` is `T`-cohesive when every member approves all of `T` and the
//! group's share of the budget covers it: `(L/N)·|S| ≥ cost(T)`. A bundle `B`
//! violates EJR when some `T`-cohesive group has every member approving fewer
//! than `|T|` funded projects.
//!
//! For a fixed `T` only the largest candidate group matters, namely every
//! supporter of `T` that is under-represented, so the search enumerates `T`
//! alone.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{ApprovalProfile, Bundle, PbInstance, Rational};
use crate::scoring::coverage;

/// Upper limit on `|T|` used when no cap is given.
pub const DEFAULT_T_CAP_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohesiveWitness {
    /// Voter indices, ascending.
    pub voters: Vec<usize>,
    /// Project indices, ascending.
    pub projects: Vec<usize>,
}

impl CohesiveWitness {
    pub fn project_ids<'a>(&self, instance: &'a PbInstance) -> Vec<&'a str> {
        self.projects.iter().map(|&p| instance.project(p).id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EjrStatus {
    Satisfied,
    Violated(CohesiveWitness),
    /// No violation with `|T| ≤ cap`, but larger groups were not searched.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EjrVerdict {
    pub status: EjrStatus,
    pub cap: usize,
}

impl EjrVerdict {
    pub fn state(&self) -> EjrState {
        match self.status {
            EjrStatus::Satisfied => EjrState::Satisfied,
            EjrStatus::Violated(_) => EjrState::Violated,
            EjrStatus::Unknown => EjrState::Unknown,
        }
    }

    pub fn witness(&self) -> Option<&CohesiveWitness> {
        match &self.status {
            EjrStatus::Violated(w) => Some(w),
            _ => None,
        }
    }
}

/// Witness-free summary of an [`EjrVerdict`], as stored in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EjrState {
    Satisfied,
    Violated,
    Unknown,
}

impl fmt::Display for EjrState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Satisfied => "yes",
            Self::Violated => "no",
            Self::Unknown => "unknown",
        })
    }
}

/// Whether `voters` is `projects`-cohesive.
pub fn is_cohesive(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    voters: &[usize],
    projects: &[usize],
) -> Result<bool> {
    check_indices(instance, profile, voters, projects)?;
    let jointly = voters.iter().all(|&v| projects.iter().all(|&p| profile.approves(v, p)));
    if !jointly {
        return Ok(false);
    }
    let n = profile.num_voters();
    let cost: Rational = projects.iter().map(|&p| instance.cost(p)).sum();
    if n == 0 {
        return Ok(cost.is_zero());
    }
    let share = instance.budget() * Rational::new(BigInt::from(voters.len()), BigInt::from(n));
    Ok(share >= cost)
}

/// Whether `witness` certifies an EJR violation of `bundle`.
pub fn is_valid_witness(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    bundle: &Bundle,
    witness: &CohesiveWitness,
) -> Result<bool> {
    if witness.voters.is_empty() || witness.projects.is_empty() {
        return Ok(false);
    }
    if !is_cohesive(instance, profile, &witness.voters, &witness.projects)? {
        return Ok(false);
    }
    let cov = coverage(profile, bundle)?;
    Ok(witness.voters.iter().all(|&v| cov[v] < witness.projects.len()))
}

/// The largest `|T|` any cohesive group can have: bounded by the number of
/// cheapest projects that fit the budget and by the longest ballot.
pub fn full_t_cap(instance: &PbInstance, profile: &ApprovalProfile) -> usize {
    let mut costs: Vec<&Rational> = instance.projects().iter().map(|p| &p.cost).collect();
    costs.sort();
    let mut total = Rational::zero();
    let mut fitting = 0;
    for c in costs {
        total += c;
        if &total > instance.budget() {
            break;
        }
        fitting += 1;
    }
    let longest = profile.ballots().iter().map(Vec::len).max().unwrap_or(0);
    fitting.min(longest)
}

/// `min(⌊L / c_min⌋, 10)`.
pub fn default_t_cap(instance: &PbInstance) -> usize {
    instance.max_bundle_size().min(DEFAULT_T_CAP_LIMIT)
}

/// Searches every `T` with `|T| ≤ t_cap` for an EJR violation of `bundle`.
pub fn find_ejr_violation(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    bundle: &Bundle,
    t_cap: usize,
) -> Result<EjrVerdict> {
    if profile.num_projects() != instance.num_projects() {
        return Err(Error::InvalidInput("profile and instance disagree on the project count".into()));
    }
    let cov = coverage(profile, bundle)?;
    let scaled = instance.integer_costs()?;
    let n = profile.num_voters() as i128;
    let approvers = profile.approvers();

    // Only projects some voter could still be owed are worth enumerating.
    let candidates: Vec<usize> = (0..instance.num_projects())
        .filter(|&p| scaled.costs[p] <= scaled.budget)
        .filter(|&p| approvers[p].iter().any(|&v| cov[v] < t_cap))
        .collect();

    let mut search = ViolationSearch {
        candidates: &candidates,
        approvers: &approvers,
        costs: &scaled.costs,
        budget: scaled.budget,
        voters: n,
        coverage: &cov,
        t_cap,
        chosen: Vec::new(),
    };
    let everyone: Vec<usize> = (0..profile.num_voters()).collect();
    let found = search.extend(0, &everyone, 0);

    let status = match found {
        Some(witness) => EjrStatus::Violated(witness),
        None if t_cap >= full_t_cap(instance, profile) => EjrStatus::Satisfied,
        None => EjrStatus::Unknown,
    };
    Ok(EjrVerdict { status, cap: t_cap })
}

struct ViolationSearch<'a> {
    candidates: &'a [usize],
    approvers: &'a [Vec<usize>],
    costs: &'a [i128],
    budget: i128,
    voters: i128,
    coverage: &'a [usize],
    t_cap: usize,
    chosen: Vec<usize>,
}

impl ViolationSearch<'_> {
    /// Tries every extension of `chosen` by candidates at index ≥ `from`.
    /// `supporters` approve all of `chosen`, whose total cost is `cost`.
    fn extend(&mut self, from: usize, supporters: &[usize], cost: i128) -> Option<CohesiveWitness> {
        if self.chosen.len() == self.t_cap {
            return None;
        }
        for idx in from..self.candidates.len() {
            let p = self.candidates[idx];
            let new_cost = cost + self.costs[p];
            let next = intersect(supporters, &self.approvers[p]);
            // Supporters only shrink and cost only grows along a branch.
            if (next.len() as i128) * self.budget < self.voters * new_cost {
                continue;
            }
            self.chosen.push(p);
            let size = self.chosen.len();
            let owed: Vec<usize> = next.iter().copied().filter(|&v| self.coverage[v] < size).collect();
            if !owed.is_empty() && (owed.len() as i128) * self.budget >= self.voters * new_cost {
                let witness = CohesiveWitness { voters: owed, projects: sorted(&self.chosen) };
                self.chosen.pop();
                return Some(witness);
            }
            let found = self.extend(idx + 1, &next, new_cost);
            self.chosen.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn sorted(values: &[usize]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v
}

/// Fraction of satisfied verdicts. Unknown verdicts make the share undefined.
pub fn ejr_percentage<'a>(verdicts: impl IntoIterator<Item = &'a EjrState>) -> Result<Rational> {
    let mut total = 0u64;
    let mut satisfied = 0u64;
    let mut unknown = 0usize;
    for state in verdicts {
        total += 1;
        match state {
            EjrState::Satisfied => satisfied += 1,
            EjrState::Violated => {}
            EjrState::Unknown => unknown += 1,
        }
    }
    if unknown > 0 {
        return Err(Error::CappedSearch(unknown));
    }
    if total == 0 {
        return Err(Error::InvalidInput("no EJR verdicts to aggregate".into()));
    }
    Ok(Rational::new(BigInt::from(satisfied), BigInt::from(total)))
}

fn check_indices(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    voters: &[usize],
    projects: &[usize],
) -> Result<()> {
    if let Some(&v) = voters.iter().find(|&&v| v >= profile.num_voters()) {
        return Err(Error::InvalidInput(format!("voter #{v} out of range")));
    }
    if let Some(&p) = projects.iter().find(|&&p| p >= instance.num_projects()) {
        return Err(Error::UnknownProject(format!("#{p}")));
    }
    Ok(())
}
