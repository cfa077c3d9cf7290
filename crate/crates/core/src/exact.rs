//! Exact optimizers for AV (max SW), CC (max RP) and PAV (max PAV score).
//!
//! All three share one depth-first branch and bound over include/exclude
//! decisions. Costs are rescaled to integers and PAV scores are multiplied by
//! `lcm(1..=K)` so the whole search runs on `i128`.
//!
//! A rule's outcome set is the set of optimal bundles that are *exhaustive*:
//! no unfunded project fits in the leftover budget. Every optimum extends to
//! an exhaustive one with the same objective, so the optimal value is
//! unchanged; tie-breaking then ranges over exhaustive optima only.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ApprovalProfile, Bundle, PbInstance, Rational};

/// Maximum number of tied optima collected before the policy is applied.
pub const TIE_CAP: usize = 10_000;

pub const DEFAULT_MAX_NODES: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TieBreakPolicy {
    /// Among optima, the one with the lowest social welfare.
    WorstSw,
    /// Among optima, the one with the lowest representation.
    WorstRp,
    /// Uniformly among (up to [`TIE_CAP`]) optima, reproducible from the seed.
    Random(u64),
    /// Lexicographically smallest sorted id list.
    LexById,
    /// Cheapest optimum, then lexicographic.
    CheapestFirst,
}

impl fmt::Display for TieBreakPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WorstSw => f.write_str("worst-sw"),
            Self::WorstRp => f.write_str("worst-rp"),
            Self::Random(seed) => write!(f, "random:{seed}"),
            Self::LexById => f.write_str("lex"),
            Self::CheapestFirst => f.write_str("cheapest-first"),
        }
    }
}

impl FromStr for TieBreakPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "worst-sw" => Ok(Self::WorstSw),
            "worst-rp" => Ok(Self::WorstRp),
            "lex" | "lex-by-id" => Ok(Self::LexById),
            "cheapest-first" => Ok(Self::CheapestFirst),
            _ => match s.strip_prefix("random:") {
                Some(seed) => seed
                    .parse()
                    .map(Self::Random)
                    .map_err(|_| Error::InvalidInput(format!("bad random seed in `{s}`"))),
                None => Err(Error::InvalidInput(format!(
                    "unknown tie-break `{s}` (expected worst-sw, worst-rp, random:<seed>, lex, cheapest-first)"
                ))),
            },
        }
    }
}

/// Node limit for one exact solve. Exceeding it is an error, never a silent
/// approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBudget {
    pub max_nodes: u64,
    /// Informational only; the node limit is what is enforced.
    pub time_hint: Option<f64>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_nodes: DEFAULT_MAX_NODES, time_hint: None }
    }
}

impl SearchBudget {
    pub fn with_max_nodes(max_nodes: u64) -> Self {
        Self { max_nodes, time_hint: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    SocialWelfare,
    Representation,
    Pav,
}

pub fn solve_av(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    tiebreak: TieBreakPolicy,
    budget: SearchBudget,
) -> Result<Bundle> {
    solve(Objective::SocialWelfare, instance, profile, tiebreak, budget)
}

pub fn solve_cc(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    tiebreak: TieBreakPolicy,
    budget: SearchBudget,
) -> Result<Bundle> {
    solve(Objective::Representation, instance, profile, tiebreak, budget)
}

pub fn solve_pav(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    tiebreak: TieBreakPolicy,
    budget: SearchBudget,
) -> Result<Bundle> {
    solve(Objective::Pav, instance, profile, tiebreak, budget)
}

/// Returns an exhaustive optimal bundle chosen by `tiebreak`.
pub fn solve(
    objective: Objective,
    instance: &PbInstance,
    profile: &ApprovalProfile,
    tiebreak: TieBreakPolicy,
    budget: SearchBudget,
) -> Result<Bundle> {
    let outcome = search(objective, instance, profile, Some(tiebreak), budget)?;
    Ok(pick(instance, outcome.ties, tiebreak))
}

/// max SW over feasible bundles.
pub fn max_social_welfare(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    budget: SearchBudget,
) -> Result<u64> {
    let outcome = search(Objective::SocialWelfare, instance, profile, None, budget)?;
    to_u64(&outcome.value)
}

/// max RP over feasible bundles.
pub fn max_representation(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    budget: SearchBudget,
) -> Result<u64> {
    let outcome = search(Objective::Representation, instance, profile, None, budget)?;
    to_u64(&outcome.value)
}

/// max PAV score over feasible bundles.
pub fn max_pav_score(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    budget: SearchBudget,
) -> Result<Rational> {
    let outcome = search(Objective::Pav, instance, profile, None, budget)?;
    Ok(Rational::new(outcome.value, outcome.scale))
}

fn to_u64(value: &BigInt) -> Result<u64> {
    value.to_u64().ok_or_else(|| Error::Overflow("optimal value".into()))
}

fn pick(instance: &PbInstance, mut ties: Vec<Bundle>, tiebreak: TieBreakPolicy) -> Bundle {
    ties.sort_by(|a, b| a.sorted_ids(instance).cmp(&b.sorted_ids(instance)));
    match tiebreak {
        TieBreakPolicy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let idx = rng.random_range(0..ties.len());
            ties.swap_remove(idx)
        }
        _ => ties.swap_remove(0),
    }
}

struct Outcome {
    /// Optimal objective, multiplied by `scale`.
    value: BigInt,
    scale: BigInt,
    /// Collected exhaustive optima (empty in value-only mode).
    ties: Vec<Bundle>,
}

/// Runs the search on `i128` when every intermediate value provably fits,
/// and on big integers otherwise.
fn search(
    objective: Objective,
    instance: &PbInstance,
    profile: &ApprovalProfile,
    tiebreak: Option<TieBreakPolicy>,
    budget: SearchBudget,
) -> Result<Outcome> {
    let layout = Layout::new(objective, instance, profile)?;
    if layout.fits_i128() {
        Search::<i128>::new(&layout, tiebreak, budget).run(&layout)
    } else {
        Search::<BigInt>::new(&layout, tiebreak, budget).run(&layout)
    }
}

/// Search-independent preprocessing: branching order, integer costs and the
/// PAV gain table.
struct Layout {
    objective: Objective,
    /// Branching position -> project index in the instance.
    order: Vec<usize>,
    cost: Vec<i128>,
    budget: i128,
    approvers: Vec<Vec<usize>>,
    voter_positions: Vec<Vec<usize>>,
    /// PAV: `gain[k]` is the scaled value of a voter's (k+1)-th funded project.
    gain: Vec<BigInt>,
    scale: BigInt,
}

impl Layout {
    fn new(objective: Objective, instance: &PbInstance, profile: &ApprovalProfile) -> Result<Self> {
        if profile.num_projects() != instance.num_projects() {
            return Err(Error::InvalidInput("profile and instance disagree on the project count".into()));
        }
        let scaled = instance.integer_costs()?;
        let approval_counts = profile.approval_counts();
        let all_approvers = profile.approvers();

        let mut order: Vec<usize> =
            (0..instance.num_projects()).filter(|&p| scaled.costs[p] <= scaled.budget).collect();
        // Descending approvals per unit cost; ties by index.
        order.sort_by(|&a, &b| {
            let lhs = BigInt::from(approval_counts[b]) * scaled.costs[a];
            let rhs = BigInt::from(approval_counts[a]) * scaled.costs[b];
            lhs.cmp(&rhs).then(a.cmp(&b))
        });
        let cost: Vec<i128> = order.iter().map(|&p| scaled.costs[p]).collect();
        let approvers: Vec<Vec<usize>> = order.iter().map(|&p| all_approvers[p].clone()).collect();
        let mut voter_positions = vec![Vec::new(); profile.num_voters()];
        for (pos, voters) in approvers.iter().enumerate() {
            for &v in voters {
                voter_positions[v].push(pos);
            }
        }

        let (gain, scale) = match objective {
            Objective::Pav => {
                let mut sorted_costs = cost.clone();
                sorted_costs.sort_unstable();
                let max_count = count_fitting(&sorted_costs, &scaled.budget);
                let k = voter_positions.iter().map(|ps| ps.len().min(max_count)).max().unwrap_or(0).max(1);
                let mut scale = BigInt::from(1);
                for j in 1..=k {
                    scale = scale.lcm(&BigInt::from(j));
                }
                ((1..=k).map(|j| &scale / BigInt::from(j)).collect(), scale)
            }
            _ => (vec![BigInt::from(1)], BigInt::from(1)),
        };
        Ok(Self { objective, order, cost, budget: scaled.budget, approvers, voter_positions, gain, scale })
    }

    /// Whether products like `N · scale · max(budget, K) · 4` stay within `i128`.
    fn fits_i128(&self) -> bool {
        let voters = BigInt::from(self.voter_positions.len().max(1));
        let span = BigInt::from(self.budget.max(self.gain.len() as i128));
        let headroom: BigInt = voters * &self.scale * span * 4;
        headroom.to_i128().is_some()
    }
}

/// Integer type the search runs on.
trait Value:
    Clone
    + Ord
    + Zero
    + From<i64>
    + TryFrom<BigInt>
    + Into<BigInt>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
{
    fn from_big(value: &BigInt) -> Self {
        Self::try_from(value.clone()).unwrap_or_else(|_| unreachable!("range checked by Layout::fits_i128"))
    }
}

impl Value for i128 {}
impl Value for BigInt {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Secondary {
    None,
    MinSw,
    MinRp,
    MinCost,
}

#[derive(Debug, Clone)]
struct Best<V> {
    value: V,
    secondary: V,
}

struct Search<V> {
    m: usize,
    objective: Objective,
    cost: Vec<V>,
    budget: V,
    suffix_cost: Vec<V>,
    gain: Vec<V>,
    prefix_gain: Vec<V>,
    secondary: Secondary,
    collect: bool,
    max_nodes: u64,
    nodes: u64,

    counts: Vec<usize>,
    value: V,
    sw: i64,
    rp: i64,
    spent: V,
    chosen: Vec<usize>,
    best: Option<Best<V>>,
    ties: Vec<Vec<usize>>,
}

impl<V: Value> Search<V> {
    fn new(layout: &Layout, tiebreak: Option<TieBreakPolicy>, budget: SearchBudget) -> Self {
        let m = layout.order.len();
        let cost: Vec<V> = layout.cost.iter().map(|&c| V::from_big(&BigInt::from(c))).collect();
        let mut suffix_cost = vec![V::zero(); m + 1];
        for pos in (0..m).rev() {
            suffix_cost[pos] = suffix_cost[pos + 1].clone() + cost[pos].clone();
        }
        let gain: Vec<V> = layout.gain.iter().map(V::from_big).collect();
        let mut prefix_gain = vec![V::zero(); gain.len() + 1];
        for (k, g) in gain.iter().enumerate() {
            prefix_gain[k + 1] = prefix_gain[k].clone() + g.clone();
        }
        let secondary = match tiebreak {
            Some(TieBreakPolicy::WorstSw) => Secondary::MinSw,
            Some(TieBreakPolicy::WorstRp) => Secondary::MinRp,
            Some(TieBreakPolicy::CheapestFirst) => Secondary::MinCost,
            _ => Secondary::None,
        };
        Self {
            m,
            objective: layout.objective,
            cost,
            budget: V::from_big(&BigInt::from(layout.budget)),
            suffix_cost,
            gain,
            prefix_gain,
            secondary,
            collect: tiebreak.is_some(),
            max_nodes: budget.max_nodes,
            nodes: 0,
            counts: vec![0; layout.voter_positions.len()],
            value: V::zero(),
            sw: 0,
            rp: 0,
            spent: V::zero(),
            chosen: Vec::new(),
            best: None,
            ties: Vec::new(),
        }
    }

    fn run(mut self, layout: &Layout) -> Result<Outcome> {
        self.dfs(layout, 0, None)?;
        let best = self.best.expect("the empty completion is always evaluated");
        let ties = self
            .ties
            .iter()
            .map(|positions| Bundle::from_indices(positions.iter().map(|&pos| layout.order[pos])))
            .collect();
        Ok(Outcome { value: best.value.into(), scale: layout.scale.clone(), ties })
    }

    fn voter_gain(&self, count: usize) -> V {
        match self.objective {
            Objective::SocialWelfare => V::from(1),
            Objective::Representation => V::from((count == 0) as i64),
            Objective::Pav => self.gain[count].clone(),
        }
    }

    fn secondary_value(&self) -> V {
        match self.secondary {
            Secondary::None => V::zero(),
            Secondary::MinSw => V::from(self.sw),
            Secondary::MinRp => V::from(self.rp),
            Secondary::MinCost => self.spent.clone(),
        }
    }

    /// `min_excluded` is the cheapest project excluded so far, if any.
    fn dfs(&mut self, layout: &Layout, pos: usize, min_excluded: Option<&V>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::SearchBudgetExceeded { max_nodes: self.max_nodes });
        }
        let residual = self.budget.clone() - self.spent.clone();
        if self.collect {
            // Even funding everything left would leave room for an excluded project.
            if let Some(min) = min_excluded {
                if residual.clone() - self.suffix_cost[pos].clone() >= *min {
                    return Ok(());
                }
            }
        }
        if pos == self.m {
            let exhaustive = min_excluded.is_none_or(|min| *min > residual);
            self.leaf(exhaustive);
            return Ok(());
        }
        if self.best.is_some() {
            let upper = self.bound(layout, pos, &residual);
            if self.prunes(&upper) {
                return Ok(());
            }
        }
        let cost = self.cost[pos].clone();
        if cost <= residual {
            self.include(layout, pos);
            let res = self.dfs(layout, pos + 1, min_excluded);
            self.exclude(layout, pos);
            res?;
        }
        let next_min = match min_excluded {
            Some(min) if *min <= cost => min.clone(),
            _ => cost,
        };
        self.dfs(layout, pos + 1, Some(&next_min))
    }

    fn prunes(&self, upper: &V) -> bool {
        let best = self.best.as_ref().expect("checked by caller");
        if *upper != best.value {
            return *upper < best.value;
        }
        if !self.collect {
            return true;
        }
        let full = self.ties.len() >= TIE_CAP;
        match self.secondary {
            Secondary::None => full,
            _ => {
                let lower = self.secondary_value();
                lower > best.secondary || (lower == best.secondary && full)
            }
        }
    }

    fn leaf(&mut self, exhaustive: bool) {
        if self.collect && !exhaustive {
            return;
        }
        let value = self.value.clone();
        let secondary = self.secondary_value();
        match &self.best {
            Some(best) if value < best.value => {}
            Some(best) if value == best.value => {
                if !self.collect || secondary > best.secondary {
                    return;
                }
                if secondary < best.secondary {
                    self.best = Some(Best { value, secondary });
                    self.ties.clear();
                }
                if self.ties.len() < TIE_CAP {
                    self.ties.push(self.chosen.clone());
                }
            }
            _ => {
                self.best = Some(Best { value, secondary });
                self.ties.clear();
                if self.collect {
                    self.ties.push(self.chosen.clone());
                }
            }
        }
    }

    fn include(&mut self, layout: &Layout, pos: usize) {
        self.spent += self.cost[pos].clone();
        self.chosen.push(pos);
        for &v in &layout.approvers[pos] {
            let k = self.counts[v];
            let gain = self.voter_gain(k);
            self.value += gain;
            self.sw += 1;
            if k == 0 {
                self.rp += 1;
            }
            self.counts[v] = k + 1;
        }
    }

    fn exclude(&mut self, layout: &Layout, pos: usize) {
        self.spent -= self.cost[pos].clone();
        self.chosen.pop();
        for &v in &layout.approvers[pos] {
            let k = self.counts[v] - 1;
            self.counts[v] = k;
            let gain = self.voter_gain(k);
            self.value -= gain;
            self.sw -= 1;
            if k == 0 {
                self.rp -= 1;
            }
        }
    }

    /// Upper bound on the objective of any completion of the current node.
    ///
    /// Minimum of two relaxations: a fractional knapsack over current marginal
    /// gains (valid because every objective is submodular), and a per-voter
    /// bound where voter `i` gains from at most `min(r_i, R)` more projects,
    /// with `R` the most projects that still fit together.
    fn bound(&self, layout: &Layout, pos: usize, residual: &V) -> V {
        let mut items: Vec<(V, V)> = Vec::new();
        let mut fitting: Vec<V> = Vec::new();
        for p in pos..self.m {
            let cost = &self.cost[p];
            if cost > residual {
                continue;
            }
            fitting.push(cost.clone());
            let mut gain = V::zero();
            for &v in &layout.approvers[p] {
                gain += self.voter_gain(self.counts[v]);
            }
            if gain > V::zero() {
                items.push((gain, cost.clone()));
            }
        }
        items.sort_by(|a, b| (b.0.clone() * a.1.clone()).cmp(&(a.0.clone() * b.1.clone())));
        let mut capacity = residual.clone();
        let mut knapsack = V::zero();
        for (gain, cost) in items {
            if cost <= capacity {
                knapsack += gain;
                capacity -= cost;
            } else {
                knapsack += gain * capacity / cost;
                break;
            }
        }

        fitting.sort_unstable();
        let most = count_fitting(&fitting, residual);
        let mut per_voter = V::zero();
        for (v, positions) in layout.voter_positions.iter().enumerate() {
            let start = positions.partition_point(|&p| p < pos);
            let reachable = positions[start..].iter().filter(|&&p| self.cost[p] <= *residual).count();
            let extra = reachable.min(most);
            if extra == 0 {
                continue;
            }
            let k = self.counts[v];
            per_voter += match self.objective {
                Objective::SocialWelfare => V::from(extra as i64),
                Objective::Representation => V::from((k == 0) as i64),
                Objective::Pav => self.prefix_gain[k + extra].clone() - self.prefix_gain[k].clone(),
            };
        }
        self.value.clone() + knapsack.min(per_voter)
    }
}

/// How many of the (ascending) costs fit together within `capacity`.
fn count_fitting<V: Clone + Ord + Zero + AddAssign>(sorted_costs: &[V], capacity: &V) -> usize {
    let mut total = V::zero();
    sorted_costs
        .iter()
        .take_while(|&c| {
            total += c.clone();
            total <= *capacity
        })
        .count()
}
