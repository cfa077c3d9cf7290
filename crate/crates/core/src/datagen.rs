//! Seeded synthetic instances: a 2-D Euclidean model and party lists.
//!
//! Every generator draws from `ChaCha8Rng` seeded with the caller's seed and
//! uses one stream per kind of entity, so new draws appended to one stream
//! never shift the values of another.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::error::{Error, Result};
use crate::model::{ApprovalProfile, PbInstance, Project, Rational};

const STREAM_VOTER_POSITIONS: u64 = 0;
const STREAM_PROJECT_POSITIONS: u64 = 1;
const STREAM_COSTS: u64 = 2;
const STREAM_BALLOTS: u64 = 3;
const STREAM_GROUPS: u64 = 4;
const STREAM_SHUFFLE: u64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanConfig {
    pub n_voters: usize,
    pub n_projects: usize,
    /// Budget in whole currency units.
    pub budget: u64,
    pub position_mean: (f64, f64),
    pub position_std: f64,
    pub c_min_range: (f64, f64),
    pub c_avg_range: (f64, f64),
    pub approvals_mean: f64,
    pub approvals_std: f64,
}

impl Default for EuclideanConfig {
    fn default() -> Self {
        Self {
            n_voters: 1000,
            n_projects: 100,
            budget: 100_000,
            position_mean: (0.5, 0.5),
            position_std: 0.2,
            c_min_range: (100.0, 500.0),
            c_avg_range: (10_000.0, 20_000.0),
            approvals_mean: 10.0,
            approvals_std: 3.0,
        }
    }
}

impl EuclideanConfig {
    /// 40 voters and 15 projects: small enough for exact PAV/CC.
    ///
    /// The budget keeps the full-scale ratio between money and total project
    /// cost roughly intact for the smaller project count, and ballot lengths
    /// shrink with it.
    pub fn desk() -> Self {
        Self {
            n_voters: 40,
            n_projects: 15,
            budget: 50_000,
            approvals_mean: 4.0,
            approvals_std: 1.2,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.n_projects > 0
            && self.budget > 0
            && self.position_std > 0.0
            && self.c_min_range.0 > 0.0
            && self.c_min_range.0 <= self.c_min_range.1
            && self.c_avg_range.0 <= self.c_avg_range.1
            && self.c_avg_range.0 > self.c_min_range.1
            && self.approvals_std >= 0.0
            && [self.approvals_mean, self.position_mean.0, self.position_mean.1].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid Euclidean config: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartyListConfig {
    pub n_voters: usize,
    pub group_size_range: (usize, usize),
    pub projects_per_group_range: (usize, usize),
    /// Cost of a project per member of the group approving it.
    pub cost_per_voter: u64,
    /// Budget as a fraction of the total project cost.
    pub budget_fraction: (u64, u64),
}

impl Default for PartyListConfig {
    fn default() -> Self {
        Self {
            n_voters: 200,
            group_size_range: (5, 20),
            projects_per_group_range: (10, 30),
            cost_per_voter: 100,
            budget_fraction: (1, 2),
        }
    }
}

impl PartyListConfig {
    /// 20 voters in groups of 2 to 5, each group approving 2 to 4 projects.
    ///
    /// With the default half-of-total budget a group's share then buys at
    /// least one of its own projects on average, so cohesive groups exist.
    pub fn desk() -> Self {
        Self { n_voters: 20, group_size_range: (2, 5), projects_per_group_range: (2, 4), ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        let (gmin, gmax) = self.group_size_range;
        let (pmin, pmax) = self.projects_per_group_range;
        let (num, den) = self.budget_fraction;
        let ok = self.n_voters > 0
            && gmin > 0
            && gmin <= gmax
            && pmin > 0
            && pmin <= pmax
            && self.cost_per_voter > 0
            && num > 0
            && den > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid party-list config: {self:?}")))
        }
    }
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `p000`, `p001`, ... wide enough for `count` projects.
fn project_id(index: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len().max(3);
    format!("p{index:0width$}")
}

/// Amount rounded to cents, as an exact rational.
fn cents(amount: f64) -> Rational {
    Rational::new(BigInt::from((amount * 100.0).round() as i64), BigInt::from(100))
}

fn positions(rng: &mut ChaCha8Rng, count: usize, mean: (f64, f64), std: f64) -> Vec<(f64, f64)> {
    let x = Normal::new(mean.0, std).expect("validated");
    let y = Normal::new(mean.1, std).expect("validated");
    (0..count)
        .map(|_| {
            let px = x.sample(rng).clamp(0.0, 1.0);
            let py = y.sample(rng).clamp(0.0, 1.0);
            (px, py)
        })
        .collect()
}

/// Voters and projects placed in the unit square; each voter approves the
/// `a_i` nearest projects. Costs are `c_min` plus an exponential amount with
/// mean `c_avg − c_min`, rounded to cents.
pub fn gen_euclidean(config: &EuclideanConfig, seed: u64) -> Result<(PbInstance, ApprovalProfile)> {
    config.validate()?;
    let voters = positions(
        &mut stream(seed, STREAM_VOTER_POSITIONS),
        config.n_voters,
        config.position_mean,
        config.position_std,
    );
    let sites = positions(
        &mut stream(seed, STREAM_PROJECT_POSITIONS),
        config.n_projects,
        config.position_mean,
        config.position_std,
    );

    let mut rng = stream(seed, STREAM_COSTS);
    let c_min = cents(rng.random_range(config.c_min_range.0..=config.c_min_range.1));
    let c_avg: f64 = rng.random_range(config.c_avg_range.0..=config.c_avg_range.1);
    let mean_extra = c_avg - crate::model::to_f64(&c_min);
    let extra = Exp::new(1.0 / mean_extra).expect("validated");
    let projects: Vec<Project> = (0..config.n_projects)
        .map(|j| Project::new(project_id(j, config.n_projects), &c_min + cents(extra.sample(&mut rng))))
        .collect();
    let instance = PbInstance::new(projects, Rational::from_integer(BigInt::from(config.budget)))?;

    let mut rng = stream(seed, STREAM_BALLOTS);
    let sizes = Normal::new(config.approvals_mean, config.approvals_std).expect("validated");
    let ballots = voters
        .iter()
        .map(|&(vx, vy)| {
            let a = sizes.sample(&mut rng).round_ties_even().max(1.0).min(config.n_projects as f64) as usize;
            let mut by_distance: Vec<(f64, usize)> = sites
                .iter()
                .enumerate()
                .map(|(j, &(px, py))| ((px - vx).powi(2) + (py - vy).powi(2), j))
                .collect();
            by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            by_distance[..a].iter().map(|&(_, j)| j).collect()
        })
        .collect();
    let profile = ApprovalProfile::new(&instance, ballots)?;
    Ok((instance, profile))
}

/// Voters split into groups; each group approves its own list of projects,
/// each costing `cost_per_voter × group size`. The budget is the configured
/// fraction of the total cost.
pub fn gen_party_list(config: &PartyListConfig, seed: u64) -> Result<(PbInstance, ApprovalProfile)> {
    config.validate()?;
    let mut rng = stream(seed, STREAM_GROUPS);
    let mut group_sizes = Vec::new();
    let mut remaining = config.n_voters;
    while remaining > 0 {
        let size = rng.random_range(config.group_size_range.0..=config.group_size_range.1);
        if size >= remaining {
            group_sizes.push(remaining);
            remaining = 0;
        } else {
            group_sizes.push(size);
            remaining -= size;
        }
    }
    let project_counts: Vec<usize> = group_sizes
        .iter()
        .map(|_| rng.random_range(config.projects_per_group_range.0..=config.projects_per_group_range.1))
        .collect();

    let total_projects: usize = project_counts.iter().sum();
    let mut projects = Vec::with_capacity(total_projects);
    let mut group_projects = Vec::with_capacity(group_sizes.len());
    for (&size, &count) in group_sizes.iter().zip(&project_counts) {
        let first = projects.len();
        for _ in 0..count {
            let cost = BigInt::from(config.cost_per_voter) * BigInt::from(size);
            projects.push(Project::new(project_id(projects.len(), total_projects), Rational::from_integer(cost)));
        }
        group_projects.push((first..projects.len()).collect::<Vec<_>>());
    }
    let total: Rational = projects.iter().map(|p| &p.cost).sum();
    let (num, den) = config.budget_fraction;
    let budget = total * Rational::new(BigInt::from(num), BigInt::from(den));
    let instance = PbInstance::new(projects, budget)?;

    let mut membership: Vec<usize> =
        group_sizes.iter().enumerate().flat_map(|(g, &size)| std::iter::repeat_n(g, size)).collect();
    membership.shuffle(&mut stream(seed, STREAM_SHUFFLE));
    let ballots = membership.iter().map(|&g| group_projects[g].clone()).collect();
    let profile = ApprovalProfile::new(&instance, ballots)?;
    Ok((instance, profile))
}
