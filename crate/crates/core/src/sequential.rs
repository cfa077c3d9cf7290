//! Polynomial-time rules: sequential PAV, Rule X and the two variants of
//! Rule X that spend the money it leaves unused.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{solve_pav, SearchBudget, TieBreakPolicy};
use crate::model::{ApprovalProfile, Bundle, PbInstance, Project, Rational};

/// Money left to each voter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoterBudgets(Vec<Rational>);

impl VoterBudgets {
    /// `L / N` for each of the `voters` voters.
    pub fn equal_shares(total: &Rational, voters: usize) -> Self {
        if voters == 0 {
            return Self(Vec::new());
        }
        let share = total / Rational::from_integer(BigInt::from(voters));
        Self(vec![share; voters])
    }

    pub fn from_vec(budgets: Vec<Rational>) -> Self {
        Self(budgets)
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn total(&self) -> Rational {
        self.0.iter().sum()
    }

    fn charge(&mut self, voter: usize, amount: &Rational) {
        self.0[voter] -= amount;
    }
}

/// Price per unit of utility at which a project becomes affordable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QValue {
    Finite(Rational),
    Infinite,
}

impl QValue {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Self::Finite(q) => Some(q),
            Self::Infinite => None,
        }
    }
}

impl PartialOrd for QValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => a.cmp(b),
            (Self::Finite(_), Self::Infinite) => Ordering::Less,
            (Self::Infinite, Self::Finite(_)) => Ordering::Greater,
            (Self::Infinite, Self::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(q) => write!(f, "{q}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

/// Smallest `q` with `Σ_i min(b_i, u_i·q) ≥ cost`.
///
/// Follows the cap-and-remove loop: start from the uniform price, drop every
/// voter who cannot pay their share (they pay their whole budget instead) and
/// repeat until nobody is dropped. `utilities` may be arbitrary non-negative
/// weights; approval utilities are 0 or 1.
pub fn q_value(cost: &Rational, budgets: &VoterBudgets, utilities: &[Rational]) -> QValue {
    let budgets = budgets.as_slice();
    assert_eq!(budgets.len(), utilities.len(), "one utility per voter");
    let available: Rational = budgets
        .iter()
        .zip(utilities)
        .filter(|(_, u)| u.is_positive())
        .map(|(b, _)| b)
        .sum();
    if &available < cost {
        return QValue::Infinite;
    }
    let mut utility: Rational = utilities.iter().sum();
    let mut leftover = cost.clone();
    let mut active: Vec<usize> = (0..budgets.len()).filter(|&i| utilities[i].is_positive()).collect();
    loop {
        if !utility.is_positive() {
            return QValue::Infinite;
        }
        let q = &leftover / &utility;
        let mut removed = false;
        active.retain(|&i| {
            if &q * &utilities[i] > budgets[i] {
                utility -= &utilities[i];
                leftover -= &budgets[i];
                removed = true;
                false
            } else {
                true
            }
        });
        if !removed {
            return QValue::Finite(q);
        }
    }
}

/// One funding step of Rule X.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleXStep {
    pub project: usize,
    pub q: Rational,
    /// `(voter, amount)` for every voter charged a positive amount.
    pub charges: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleXRun {
    pub bundle: Bundle,
    pub steps: Vec<RuleXStep>,
    /// Money left to each voter at the end.
    pub budgets: VoterBudgets,
}

/// Rule X with approval utilities; see [`rule_x_run`].
pub fn rule_x(instance: &PbInstance, profile: &ApprovalProfile) -> Result<Bundle> {
    Ok(rule_x_run(instance, profile)?.bundle)
}

/// Every voter starts with `L/N`. Repeatedly fund the unfunded project with
/// the smallest finite q-value (ties: cheaper, then smaller id), charging each
/// approver `min(b_i, q)`, until every q-value is infinite.
pub fn rule_x_run(instance: &PbInstance, profile: &ApprovalProfile) -> Result<RuleXRun> {
    let utilities = approval_utilities(instance, profile, &Rational::zero())?;
    Ok(generalized_rule_x(instance, &utilities, VoterBudgets::equal_shares(instance.budget(), profile.num_voters())))
}

fn approval_utilities(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    others: &Rational,
) -> Result<Vec<Vec<Rational>>> {
    if profile.num_projects() != instance.num_projects() {
        return Err(Error::InvalidInput("profile and instance disagree on the project count".into()));
    }
    let approvers = profile.approvers();
    Ok(approvers
        .iter()
        .map(|voters| {
            let mut u = vec![others.clone(); profile.num_voters()];
            for &v in voters {
                u[v] = Rational::one();
            }
            u
        })
        .collect())
}

/// Rule X over arbitrary per-project utility vectors `utilities[p][i]`.
fn generalized_rule_x(instance: &PbInstance, utilities: &[Vec<Rational>], mut budgets: VoterBudgets) -> RuleXRun {
    let mut bundle = Bundle::empty();
    let mut steps = Vec::new();
    if budgets.as_slice().is_empty() {
        return RuleXRun { bundle, steps, budgets };
    }
    loop {
        let mut best: Option<(Rational, usize)> = None;
        for p in 0..instance.num_projects() {
            if bundle.contains(p) {
                continue;
            }
            let QValue::Finite(q) = q_value(instance.cost(p), &budgets, &utilities[p]) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((bq, bp)) => (&q, instance.cost(p), &instance.project(p).id)
                    .cmp(&(bq, instance.cost(*bp), &instance.project(*bp).id))
                    .is_lt(),
            };
            if better {
                best = Some((q, p));
            }
        }
        let Some((q, p)) = best else {
            return RuleXRun { bundle, steps, budgets };
        };
        let mut charges = Vec::new();
        for (voter, u) in utilities[p].iter().enumerate() {
            if u.is_zero() {
                continue;
            }
            let due = &q * u;
            let paid = if due < budgets.as_slice()[voter] { due } else { budgets.as_slice()[voter].clone() };
            if paid.is_positive() {
                budgets.charge(voter, &paid);
                charges.push((voter, paid));
            }
        }
        bundle.insert(p);
        steps.push(RuleXStep { project: p, q, charges });
    }
}

/// How Rule X-ε treats money of voters who do not approve a project.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RxEpsMode {
    /// The limit ε → 0: after Rule X stops, approvers of a project spend all
    /// their money on it and non-approvers top up with a uniform cap `r`;
    /// the project with the smallest `r` is funded first.
    Limit,
    /// Rule X with utility 1 for approvers and `ε` for everyone else.
    Fixed(Rational),
}

impl fmt::Display for RxEpsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Limit => f.write_str("limit"),
            Self::Fixed(eps) => write!(f, "fixed:{eps}"),
        }
    }
}

impl FromStr for RxEpsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "limit" {
            return Ok(Self::Limit);
        }
        let bad = || Error::InvalidInput(format!("bad rule_x_eps mode `{s}` (expected limit or fixed:<rational>)"));
        let eps: Rational = s.strip_prefix("fixed:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if !eps.is_positive() {
            return Err(bad());
        }
        Ok(Self::Fixed(eps))
    }
}

pub fn rule_x_eps(instance: &PbInstance, profile: &ApprovalProfile, mode: &RxEpsMode) -> Result<Bundle> {
    match mode {
        RxEpsMode::Fixed(eps) => {
            let utilities = approval_utilities(instance, profile, eps)?;
            let budgets = VoterBudgets::equal_shares(instance.budget(), profile.num_voters());
            Ok(generalized_rule_x(instance, &utilities, budgets).bundle)
        }
        RxEpsMode::Limit => {
            let RuleXRun { mut bundle, mut budgets, .. } = rule_x_run(instance, profile)?;
            let approvers = profile.approvers();
            loop {
                let mut best: Option<(Rational, usize)> = None;
                for p in 0..instance.num_projects() {
                    if bundle.contains(p) {
                        continue;
                    }
                    let own: Rational = approvers[p].iter().map(|&v| &budgets.as_slice()[v]).sum();
                    let missing = instance.cost(p) - own;
                    // Rule X stopped, so no approver group can pay on its own.
                    if !missing.is_positive() {
                        continue;
                    }
                    let others: Vec<Rational> = (0..profile.num_voters())
                        .map(|v| if approvers[p].binary_search(&v).is_ok() { Rational::zero() } else { Rational::one() })
                        .collect();
                    let QValue::Finite(r) = q_value(&missing, &budgets, &others) else {
                        continue;
                    };
                    let better = match &best {
                        None => true,
                        Some((br, bp)) => (&r, instance.cost(p), &instance.project(p).id)
                            .cmp(&(br, instance.cost(*bp), &instance.project(*bp).id))
                            .is_lt(),
                    };
                    if better {
                        best = Some((r, p));
                    }
                }
                let Some((r, p)) = best else {
                    return Ok(bundle);
                };
                for v in 0..profile.num_voters() {
                    let b = budgets.as_slice()[v].clone();
                    let paid = if approvers[p].binary_search(&v).is_ok() || b < r { b } else { r.clone() };
                    budgets.charge(v, &paid);
                }
                bundle.insert(p);
            }
        }
    }
}

/// Rule X, then an exact PAV optimum over the unfunded projects with the
/// money Rule X left unspent.
pub fn rule_x_pav(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    tiebreak: TieBreakPolicy,
    search_budget: SearchBudget,
) -> Result<Bundle> {
    let base = rule_x(instance, profile)?;
    let residual = instance.budget() - instance.bundle_cost(&base);
    let rest: Vec<usize> =
        (0..instance.num_projects()).filter(|&p| !base.contains(p) && instance.cost(p) <= &residual).collect();
    if rest.is_empty() || !residual.is_positive() {
        return Ok(base);
    }
    let sub_projects: Vec<Project> = rest.iter().map(|&p| instance.project(p).clone()).collect();
    let sub_instance = PbInstance::new(sub_projects, residual)?;
    let mut position = vec![usize::MAX; instance.num_projects()];
    for (j, &p) in rest.iter().enumerate() {
        position[p] = j;
    }
    let ballots: Vec<Vec<usize>> = profile
        .ballots()
        .iter()
        .map(|ballot| ballot.iter().map(|&p| position[p]).filter(|&j| j != usize::MAX).collect())
        .collect();
    let sub_profile = ApprovalProfile::new(&sub_instance, ballots)?;
    let extra = solve_pav(&sub_instance, &sub_profile, tiebreak, search_budget)?;
    Ok(base.union(&Bundle::from_indices(extra.iter().map(|j| rest[j]))))
}

/// Greedy PAV: repeatedly add the affordable project with the largest PAV
/// increment `Σ_{i approves p} 1/(|A(i) ∩ B| + 1)` until nothing fits.
///
/// Ties between equal increments follow `tiebreak`:
/// * `CheapestFirst`: cheaper, then smaller id;
/// * `LexById`: smaller id;
/// * `WorstSw` / `WorstRp`: smaller welfare / coverage increment, then
///   cheaper, then smaller id;
/// * `Random(seed)`: uniform among the tied projects.
pub fn seq_pav(instance: &PbInstance, profile: &ApprovalProfile, tiebreak: TieBreakPolicy) -> Result<Bundle> {
    if profile.num_projects() != instance.num_projects() {
        return Err(Error::InvalidInput("profile and instance disagree on the project count".into()));
    }
    let approvers = profile.approvers();
    let mut counts = vec![0usize; profile.num_voters()];
    let mut bundle = Bundle::empty();
    let mut residual = instance.budget().clone();
    let mut rng = match tiebreak {
        TieBreakPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    loop {
        let mut tied: Vec<usize> = Vec::new();
        let mut best_gain: Option<Rational> = None;
        for p in 0..instance.num_projects() {
            if bundle.contains(p) || instance.cost(p) > &residual {
                continue;
            }
            let gain = pav_increment(&approvers[p], &counts);
            match best_gain.as_ref().map(|g| gain.cmp(g)) {
                None | Some(Ordering::Greater) => {
                    best_gain = Some(gain);
                    tied.clear();
                    tied.push(p);
                }
                Some(Ordering::Equal) => tied.push(p),
                Some(Ordering::Less) => {}
            }
        }
        if tied.is_empty() {
            return Ok(bundle);
        }
        let cheaper_then_id = |a: usize, b: usize| {
            instance.cost(a).cmp(instance.cost(b)).then_with(|| instance.project(a).id.cmp(&instance.project(b).id))
        };
        let welfare = |p: usize| approvers[p].len();
        let coverage = |p: usize| approvers[p].iter().filter(|&&v| counts[v] == 0).count();
        let pick = match tiebreak {
            TieBreakPolicy::CheapestFirst => tied.iter().copied().min_by(|&a, &b| cheaper_then_id(a, b)),
            TieBreakPolicy::LexById => tied.iter().copied().min_by(|&a, &b| instance.project(a).id.cmp(&instance.project(b).id)),
            TieBreakPolicy::WorstSw => {
                tied.iter().copied().min_by(|&a, &b| welfare(a).cmp(&welfare(b)).then_with(|| cheaper_then_id(a, b)))
            }
            TieBreakPolicy::WorstRp => {
                tied.iter().copied().min_by(|&a, &b| coverage(a).cmp(&coverage(b)).then_with(|| cheaper_then_id(a, b)))
            }
            TieBreakPolicy::Random(_) => {
                let rng = rng.as_mut().expect("seeded above");
                Some(tied[rng.random_range(0..tied.len())])
            }
        }
        .expect("non-empty");
        for &v in &approvers[pick] {
            counts[v] += 1;
        }
        residual -= instance.cost(pick);
        bundle.insert(pick);
    }
}

/// `Σ_{i ∈ voters} 1/(counts[i] + 1)`, summed per distinct count.
fn pav_increment(voters: &[usize], counts: &[usize]) -> Rational {
    let mut per_count: Vec<(usize, u64)> = Vec::new();
    for &v in voters {
        match per_count.iter_mut().find(|(k, _)| *k == counts[v]) {
            Some((_, n)) => *n += 1,
            None => per_count.push((counts[v], 1)),
        }
    }
    per_count.into_iter().map(|(k, n)| Rational::new(BigInt::from(n), BigInt::from(k + 1))).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{int, ratio};
    use crate::samples;
    use crate::scoring::{representation, social_welfare};

    fn budgets(values: &[i64]) -> VoterBudgets {
        VoterBudgets::from_vec(values.iter().map(|&v| int(v)).collect())
    }

    fn ones(n: usize) -> Vec<Rational> {
        vec![int(1); n]
    }

    #[test]
    fn q_value_cases() {
        assert_eq!(q_value(&int(10), &budgets(&[2, 2, 2, 2, 2]), &ones(5)), QValue::Finite(int(2)));
        assert_eq!(q_value(&int(6), &budgets(&[1, 3, 3]), &ones(3)), QValue::Finite(ratio(5, 2)));
        assert_eq!(q_value(&int(6), &budgets(&[1, 2]), &ones(2)), QValue::Infinite);
        // Non-approvers hold money but cannot pay.
        let u = vec![int(1), int(0)];
        assert_eq!(q_value(&int(6), &budgets(&[5, 100]), &u), QValue::Infinite);
    }

    #[test]
    fn q_value_ordering() {
        assert!(QValue::Finite(int(1000)) < QValue::Infinite);
        assert!(QValue::Finite(int(1)) < QValue::Finite(int(2)));
    }

    #[test]
    fn city_rule_x() {
        let (inst, prof) = samples::city();
        let run = rule_x_run(&inst, &prof).unwrap();
        assert_eq!(social_welfare(&prof, &run.bundle).unwrap(), 770);
        assert_eq!(representation(&prof, &run.bundle).unwrap(), 190);
        assert_eq!(run.steps.len(), 8);
        assert_eq!(run.steps[0].q, int(1));
        assert_eq!(run.steps[7].q, ratio(5, 3));
    }

    #[test]
    fn city_seq_pav() {
        let (inst, prof) = samples::city();
        let b = seq_pav(&inst, &prof, TieBreakPolicy::CheapestFirst).unwrap();
        let mut ids = b.sorted_ids(&inst);
        ids.sort();
        assert_eq!(ids, vec!["A-G1", "A-G2", "A-G3", "A-G4", "A-G5", "B-E1", "B-E2", "B-E3"]);
    }

    #[test]
    fn city_variants_extend_rule_x() {
        let (inst, prof) = samples::city();
        let base = rule_x(&inst, &prof).unwrap();
        let eps = rule_x_eps(&inst, &prof, &RxEpsMode::Limit).unwrap();
        let pav = rule_x_pav(&inst, &prof, TieBreakPolicy::LexById, SearchBudget::default()).unwrap();
        assert!(base.is_subset(&eps) && base.is_subset(&pav));
        assert!(social_welfare(&prof, &eps).unwrap() >= 770);
        assert!(social_welfare(&prof, &pav).unwrap() >= 770);
    }

    #[test]
    fn single_voter_single_project() {
        let inst = PbInstance::from_costs(&[("a", 4)], 10).unwrap();
        let prof = ApprovalProfile::from_ids(&inst, &[&["a"][..]]).unwrap();
        let run = rule_x_run(&inst, &prof).unwrap();
        assert_eq!(run.steps[0].q, int(4));
        assert_eq!(seq_pav(&inst, &prof, TieBreakPolicy::CheapestFirst).unwrap().indices(), &[0]);
    }

    #[test]
    fn no_voters_funds_nothing() {
        let inst = PbInstance::from_costs(&[("a", 4)], 10).unwrap();
        let prof = ApprovalProfile::new(&inst, vec![]).unwrap();
        assert!(rule_x(&inst, &prof).unwrap().is_empty());
        assert!(rule_x_eps(&inst, &prof, &RxEpsMode::Limit).unwrap().is_empty());
    }

    #[test]
    fn eps_mode_parsing() {
        assert_eq!("limit".parse::<RxEpsMode>().unwrap(), RxEpsMode::Limit);
        assert_eq!("fixed:1/1000".parse::<RxEpsMode>().unwrap(), RxEpsMode::Fixed(ratio(1, 1000)));
        assert!("fixed:0".parse::<RxEpsMode>().is_err());
        assert!("fixed".parse::<RxEpsMode>().is_err());
        assert_eq!(RxEpsMode::Fixed(ratio(1, 1000)).to_string(), "fixed:1/1000");
    }
}
