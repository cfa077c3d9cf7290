//! Brute-force oracles and random small instances for testing `pb-core`.
//!
//! Everything here enumerates exhaustively and is only meant for instances
//! with a handful of projects and voters.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use pb_core::model::{ApprovalProfile, Bundle, PbInstance, Project, Rational};
use pb_core::scoring::{coverage, pav_score, representation, social_welfare};
use pb_core::sequential::{QValue, VoterBudgets};
use rand::Rng;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Every subset of the projects, feasible or not, as bitmask-ordered bundles.
pub fn all_bundles(instance: &PbInstance) -> impl Iterator<Item = Bundle> + '_ {
    let m = instance.num_projects();
    assert!(m <= 20, "brute force limited to 20 projects");
    (0u32..1 << m).map(move |mask| Bundle::from_indices((0..m).filter(|&p| mask >> p & 1 == 1)))
}

pub fn feasible_bundles(instance: &PbInstance) -> impl Iterator<Item = Bundle> + '_ {
    all_bundles(instance).filter(|b| &instance.bundle_cost(b) <= instance.budget())
}

/// Feasible and no unfunded project fits in the leftover money.
pub fn is_exhaustive(instance: &PbInstance, bundle: &Bundle) -> bool {
    let left = instance.budget() - instance.bundle_cost(bundle);
    !left.is_negative() && (0..instance.num_projects()).all(|p| bundle.contains(p) || instance.cost(p) > &left)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Welfare,
    Representation,
    Pav,
}

pub fn objective(profile: &ApprovalProfile, bundle: &Bundle, goal: Goal) -> Rational {
    match goal {
        Goal::Welfare => int(social_welfare(profile, bundle).unwrap() as i64),
        Goal::Representation => int(representation(profile, bundle).unwrap() as i64),
        Goal::Pav => pav_score(profile, bundle).unwrap(),
    }
}

/// Maximum of `goal` over all feasible bundles.
pub fn brute_optimum(instance: &PbInstance, profile: &ApprovalProfile, goal: Goal) -> Rational {
    feasible_bundles(instance).map(|b| objective(profile, &b, goal)).max().expect("empty bundle is feasible")
}

/// All exhaustive bundles attaining the optimum of `goal`.
pub fn brute_exhaustive_optima(instance: &PbInstance, profile: &ApprovalProfile, goal: Goal) -> Vec<Bundle> {
    let best = brute_optimum(instance, profile, goal);
    feasible_bundles(instance)
        .filter(|b| is_exhaustive(instance, b) && objective(profile, b, goal) == best)
        .collect()
}

fn cohesive(instance: &PbInstance, profile: &ApprovalProfile, voters: &[usize], projects: &[usize]) -> bool {
    if voters.is_empty() || projects.is_empty() {
        return false;
    }
    let jointly = voters.iter().all(|&v| projects.iter().all(|p| profile.ballot(v).contains(p)));
    let cost: Rational = projects.iter().map(|&p| instance.cost(p)).sum();
    let share = instance.budget() * Rational::new(BigInt::from(voters.len()), BigInt::from(profile.num_voters()));
    jointly && share >= cost
}

/// EJR by enumerating every project set `T` with the largest group of its
/// under-represented supporters.
pub fn brute_ejr_satisfied(instance: &PbInstance, profile: &ApprovalProfile, bundle: &Bundle) -> bool {
    let cov = coverage(profile, bundle).unwrap();
    for t in all_bundles(instance).filter(|t| !t.is_empty()) {
        let owed: Vec<usize> = (0..profile.num_voters())
            .filter(|&v| t.iter().all(|p| profile.ballot(v).contains(&p)) && cov[v] < t.len())
            .collect();
        if cohesive(instance, profile, &owed, t.indices()) {
            return false;
        }
    }
    true
}

/// EJR straight from the definition: every voter group `S` and every `T`.
/// Exponential in both voters and projects.
pub fn brute_ejr_all_groups(instance: &PbInstance, profile: &ApprovalProfile, bundle: &Bundle) -> bool {
    let n = profile.num_voters();
    assert!(n <= 12, "group enumeration limited to 12 voters");
    let cov = coverage(profile, bundle).unwrap();
    for mask in 1u32..1 << n {
        let group: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        for t in all_bundles(instance).filter(|t| !t.is_empty()) {
            if cohesive(instance, profile, &group, t.indices()) && group.iter().all(|&v| cov[v] < t.len()) {
                return false;
            }
        }
    }
    true
}

/// Minimal `q` with `Σ min(b_i, u_i·q) ≥ cost`, found by bisecting over the
/// sorted breakpoints `b_i/u_i` and solving the final linear piece exactly.
pub fn bisect_q(cost: &Rational, budgets: &VoterBudgets, utilities: &[Rational]) -> QValue {
    let b = budgets.as_slice();
    let pay = |q: &Rational| -> Rational {
        b.iter().zip(utilities).map(|(bi, u)| if (q * u) < *bi { q * u } else { bi.clone() }).sum()
    };
    let mut breaks: Vec<Rational> =
        b.iter().zip(utilities).filter(|(_, u)| u.is_positive()).map(|(bi, u)| bi / u).collect();
    breaks.sort();
    breaks.dedup();
    let Some(last) = breaks.last() else {
        return QValue::Infinite;
    };
    if &pay(last) < cost {
        return QValue::Infinite;
    }
    // First breakpoint where the payment reaches the cost.
    let (mut lo, mut hi) = (0usize, breaks.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if &pay(&breaks[mid]) >= cost {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let start = if lo == 0 { Rational::zero() } else { breaks[lo - 1].clone() };
    // On (start, breaks[lo]] the payment is linear with slope Σ u_i over
    // voters not yet capped.
    let slope: Rational =
        b.iter().zip(utilities).filter(|(bi, u)| u.is_positive() && (*bi / *u) > start).map(|(_, u)| u.clone()).sum();
    QValue::Finite(&start + (cost - pay(&start)) / slope)
}

/// Settings for [`random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct RandomSpec {
    pub projects: (usize, usize),
    pub voters: (usize, usize),
    pub max_cost: i64,
    /// Probability that a voter approves a given project.
    pub density: f64,
    /// Make sure every project has at least one approver.
    pub all_approved: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self { projects: (1, 8), voters: (1, 8), max_cost: 10, density: 0.4, all_approved: false }
    }
}

/// A random instance with integer costs in `1..=max_cost` and a budget
/// between the cheapest cost and the total cost.
pub fn random_instance<R: Rng>(rng: &mut R, spec: &RandomSpec) -> (PbInstance, ApprovalProfile) {
    let m = rng.random_range(spec.projects.0..=spec.projects.1);
    let n = rng.random_range(spec.voters.0..=spec.voters.1);
    let costs: Vec<i64> = (0..m).map(|_| rng.random_range(1..=spec.max_cost)).collect();
    let total: i64 = costs.iter().sum();
    let cheapest = *costs.iter().min().unwrap();
    let budget = rng.random_range(cheapest..=total);
    let projects = costs.iter().enumerate().map(|(j, &c)| Project::new(format!("p{j:02}"), int(c))).collect();
    let instance = PbInstance::new(projects, int(budget)).unwrap();
    let mut ballots: Vec<Vec<usize>> =
        (0..n).map(|_| (0..m).filter(|_| rng.random_bool(spec.density)).collect()).collect();
    if spec.all_approved {
        for p in 0..m {
            if !ballots.iter().any(|b| b.contains(&p)) {
                let v = rng.random_range(0..n);
                ballots[v].push(p);
            }
        }
    }
    let profile = ApprovalProfile::new(&instance, ballots).unwrap();
    (instance, profile)
}

/// Random budgets in cents and 0/1 utilities (some voters approve) for
/// q-value checks; the cost is positive.
pub fn random_q_input<R: Rng>(rng: &mut R) -> (Rational, VoterBudgets, Vec<Rational>) {
    let n = rng.random_range(1..=8);
    let budgets = (0..n).map(|_| Rational::new(BigInt::from(rng.random_range(0..=500)), BigInt::from(100))).collect();
    let utilities = (0..n).map(|_| if rng.random_bool(0.7) { Rational::one() } else { Rational::zero() }).collect();
    let cost = Rational::new(BigInt::from(rng.random_range(1..=2000)), BigInt::from(100));
    (cost, VoterBudgets::from_vec(budgets), utilities)
}
