//! Worst-case instance families, each with the exact ratio its target rule
//! achieves and the guarantee that ratio is measured against.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::exact::{max_representation, max_social_welfare, solve_av, solve_cc, solve_pav, SearchBudget, TieBreakPolicy};
use crate::model::{to_f64, ApprovalProfile, Bundle, PbInstance, Project, Rational};
use crate::pabulib::{format_decimal, parse_decimal};
use crate::scoring::{fraction, representation, social_welfare};
use crate::sequential::{rule_x, seq_pav};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    SpavWelfare,
    SpavRep,
    AvRep,
    CcWelfare,
    PavWelfare,
    PavRep,
    EjrRep,
    EjrWelfare,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::SpavWelfare,
        Family::SpavRep,
        Family::AvRep,
        Family::CcWelfare,
        Family::PavWelfare,
        Family::PavRep,
        Family::EjrRep,
        Family::EjrWelfare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SpavWelfare => "SPAV_WELFARE",
            Self::SpavRep => "SPAV_REP",
            Self::AvRep => "AV_REP",
            Self::CcWelfare => "CC_WELFARE",
            Self::PavWelfare => "PAV_WELFARE",
            Self::PavRep => "PAV_REP",
            Self::EjrRep => "EJR_REP",
            Self::EjrWelfare => "EJR_WELFARE",
        }
    }

    pub fn measure(self) -> Measure {
        match self {
            Self::SpavWelfare | Self::CcWelfare | Self::PavWelfare | Self::EjrWelfare => Measure::Welfare,
            Self::SpavRep | Self::AvRep | Self::PavRep | Self::EjrRep => Measure::Representation,
        }
    }

    pub fn target_rule(self) -> TargetRule {
        match self {
            Self::SpavWelfare | Self::SpavRep => TargetRule::SeqPav,
            Self::AvRep => TargetRule::Av,
            Self::CcWelfare => TargetRule::Cc,
            Self::PavWelfare | Self::PavRep => TargetRule::Pav,
            Self::EjrRep | Self::EjrWelfare => TargetRule::RuleX,
        }
    }

    /// The default parameter sweep: ten or more points per family.
    pub fn sweep(self) -> Vec<Params> {
        let with = |f: &dyn Fn(u64) -> Params, values: &[u64]| values.iter().map(|&v| f(v)).collect();
        match self {
            Self::SpavWelfare | Self::SpavRep => with(&|n| Params::new().n(n), &(1..=20).map(|k| 10 * k).collect::<Vec<_>>()),
            Self::AvRep => (2..=6).flat_map(|m| [1, 2, 3].map(|x| Params::new().m(m).x(x))).collect(),
            Self::CcWelfare => with(&|n| Params::new().n(n), &(2..=13).collect::<Vec<_>>()),
            Self::PavWelfare => with(&|x| Params::new().x(x), &(3..=14).collect::<Vec<_>>()),
            Self::PavRep => with(&|l| Params::new().budget_int(l), &[8, 12, 20, 21, 35, 54, 55, 100, 148, 149, 250, 403]),
            Self::EjrRep => with(&|n| Params::new().n(n), &(2..=13).collect::<Vec<_>>()),
            Self::EjrWelfare => with(&|n| Params::new().n(n), &[4, 6, 9, 12, 16, 20, 25, 30, 36, 49, 64]),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == wanted)
            .ok_or_else(|| Error::InvalidInput(format!("unknown adversarial family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Welfare,
    Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetRule {
    SeqPav,
    Av,
    Cc,
    Pav,
    RuleX,
}

impl fmt::Display for TargetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SeqPav => "seq_pav",
            Self::Av => "av",
            Self::Cc => "cc",
            Self::Pav => "pav",
            Self::RuleX => "rule_x",
        })
    }
}

/// Family parameters; which ones are required depends on the family.
///
/// Written as `key=value` pairs separated by commas, e.g. `n=10,L=1000`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params {
    pub n: Option<u64>,
    pub m: Option<u64>,
    pub x: Option<u64>,
    /// The budget `L`; 1000 when absent (PAV_REP requires it).
    pub budget: Option<Rational>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn m(mut self, m: u64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn x(mut self, x: u64) -> Self {
        self.x = Some(x);
        self
    }

    pub fn budget(mut self, budget: Rational) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn budget_int(self, budget: u64) -> Self {
        self.budget(Rational::from_integer(BigInt::from(budget)))
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (key, value) in [("n", self.n), ("m", self.m), ("x", self.x)] {
            if let Some(v) = value {
                parts.push(format!("{key}={v}"));
            }
        }
        if let Some(l) = &self.budget {
            parts.push(format!("L={}", format_decimal(l).unwrap_or_else(|| l.to_string())));
        }
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Params {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut params = Self::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || Error::InvalidInput(format!("bad parameter `{part}` (expected n=, m=, x= or L=)"));
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let count = || value.trim().parse::<u64>().map_err(|_| bad());
            match key.trim() {
                "n" => params.n = Some(count()?),
                "m" => params.m = Some(count()?),
                "x" => params.x = Some(count()?),
                "L" => params.budget = Some(parse_decimal(value.trim()).ok_or_else(bad)?),
                _ => return Err(bad()),
            }
        }
        Ok(params)
    }
}

/// A bound on the ratio: exact when rational, otherwise a float.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundValue {
    Exact(Rational),
    Approx(f64),
}

impl BoundValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Exact(r) => to_f64(r),
            Self::Approx(v) => *v,
        }
    }

    /// `ratio ≤ self`; float bounds allow a relative slack of 1e-12.
    pub fn admits(&self, ratio: &Rational) -> bool {
        match self {
            Self::Exact(bound) => ratio <= bound,
            Self::Approx(bound) => to_f64(ratio) <= bound * (1.0 + 1e-12),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdversarialCase {
    pub family: Family,
    pub params: Params,
    pub instance: PbInstance,
    pub profile: ApprovalProfile,
    pub target_rule: TargetRule,
    pub measure: Measure,
    /// The exact ratio the target rule attains on this instance.
    pub expected_ratio: Rational,
    /// The guarantee's closed form at these parameters.
    pub bound: BoundValue,
    /// The guarantee's asymptotic form (without constants) at these parameters.
    pub asymptotic: f64,
}

/// Builds one member of `family`.
pub fn build(family: Family, params: &Params) -> Result<AdversarialCase> {
    let budget = match (&params.budget, family) {
        (Some(l), _) => {
            if l <= &Rational::from_integer(BigInt::from(0)) {
                return Err(out_of_range("L must be positive"));
            }
            l.clone()
        }
        (None, Family::PavRep) => return Err(out_of_range("PAV_REP needs L")),
        (None, _) => int(1000),
    };
    let require = |value: Option<u64>, name: &str, min: u64| -> Result<u64> {
        match value {
            Some(v) if v >= min => Ok(v),
            Some(v) => Err(out_of_range(&format!("{family} needs {name} ≥ {min}, got {v}"))),
            None => Err(out_of_range(&format!("{family} needs parameter {name}"))),
        }
    };
    let l = &budget;
    let mut builder = Builder::default();
    let (expected_ratio, bound, asymptotic) = match family {
        Family::SpavWelfare | Family::SpavRep => {
            let n = require(params.n, "n", 2)?;
            if let Some(m) = params.m {
                if m != n {
                    return Err(out_of_range(&format!(
                        "{family} has one singleton project per singleton voter, so m must equal n (got n={n}, m={m})"
                    )));
                }
            }
            builder.project(l.clone(), [0, 1]);
            for j in 0..n as usize {
                builder.project(l / int(n), [2 + j]);
            }
            builder.voters(n as usize + 2);
            (ratio(2, n), BoundValue::Exact(ratio(2, n)), 1.0 / (n + 2) as f64)
        }
        Family::AvRep => {
            let m = require(params.m, "m", 2)?;
            let x = require(params.x, "x", 1)?;
            let voters = (m * x + 1) as usize;
            let mut start = 0usize;
            for g in 0..m {
                let size = if g == 0 { x + 1 } else { x } as usize;
                for _ in 0..m {
                    builder.project(l / int(m), start..start + size);
                }
                start += size;
            }
            builder.voters(voters);
            (ratio(x + 1, m * x + 1), BoundValue::Exact(ratio(x + 1, m * x)), 1.0 / m as f64)
        }
        Family::CcWelfare => {
            let n = require(params.n, "n", 2)?;
            for _ in 0..n {
                builder.project(l / int(n), 0..n as usize);
            }
            for j in 0..=n as usize {
                builder.project(l / int(n + 1), [n as usize + j]);
            }
            builder.voters(2 * n as usize + 1);
            let k = (n * n - 1) / n;
            let bound = ratio(2, n) - ratio(1, n * n * n);
            (ratio(n + k, n * n), BoundValue::Exact(bound), 1.0 / (n + 1) as f64)
        }
        Family::PavWelfare => {
            let x = require(params.x, "x", 2)?;
            let supporters = floor_ln(x) + 2;
            for _ in 0..x {
                builder.project(l / int(x), [0]);
            }
            builder.project(l.clone(), 1..=supporters as usize);
            builder.voters(supporters as usize + 1);
            let xf = x as f64;
            (ratio(supporters, x), BoundValue::Approx((xf.ln() + 2.0) / xf), xf.ln() / xf)
        }
        Family::PavRep => {
            let lv = l.to_integer();
            if l.denom() != &BigInt::from(1) || lv < BigInt::from(8) {
                return Err(out_of_range("PAV_REP needs an integer L ≥ 8"));
            }
            let lu: u64 = lv.try_into().map_err(|_| out_of_range("L too large"))?;
            if lu > 100_000 {
                return Err(out_of_range("PAV_REP needs L ≤ 100000"));
            }
            let n = floor_ln(lu) - 1;
            builder.project(l.clone(), 0..n as usize);
            for _ in 0..lu {
                builder.project(int(1), [0]);
            }
            builder.voters(n as usize);
            (ratio(1, n), BoundValue::Exact(ratio(1, n)), 1.0 / (lu as f64).ln())
        }
        Family::EjrRep => {
            let n = require(params.n, "n", 2)?;
            builder.project(l / int(2 * n), [0]);
            builder.project(l / int(2 * n), [0]);
            let epsilon = l / int(100 * n);
            builder.project(l * ratio(n - 1, n) + epsilon, 1..n as usize);
            builder.voters(n as usize);
            (ratio(1, n), BoundValue::Exact(ratio(1, n - 1)), 1.0 / n as f64)
        }
        Family::EjrWelfare => {
            let n = require(params.n, "n", 2)?;
            let s = n.isqrt();
            for _ in 0..n {
                builder.project(l / int(n), 0..s as usize);
            }
            for j in 0..(n - s) as usize {
                builder.project(l / int(n), [s as usize + j]);
            }
            builder.voters(n as usize);
            let nf = n as f64;
            (ratio(n - s + s * s, n * s), BoundValue::Approx(4.0 / nf.sqrt() - 1.0 / nf), 1.0 / nf.sqrt())
        }
    };
    let (instance, profile) = builder.finish(budget)?;
    Ok(AdversarialCase {
        family,
        params: params.clone(),
        instance,
        profile,
        target_rule: family.target_rule(),
        measure: family.measure(),
        expected_ratio,
        bound,
        asymptotic,
    })
}

/// The outcome of running a case's target rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub bundle: Bundle,
    pub achieved_ratio: Rational,
    pub exact_match: bool,
    pub within_bound: bool,
}

impl Verification {
    pub fn pass(&self) -> bool {
        self.exact_match && self.within_bound
    }
}

/// Runs the target rule (ties broken against the measured quantity) and
/// compares its ratio with the expected one and with the bound.
pub fn verify(case: &AdversarialCase, search_budget: SearchBudget) -> Result<Verification> {
    let (inst, prof) = (&case.instance, &case.profile);
    let worst = match case.measure {
        Measure::Welfare => TieBreakPolicy::WorstSw,
        Measure::Representation => TieBreakPolicy::WorstRp,
    };
    let bundle = match case.target_rule {
        TargetRule::SeqPav => seq_pav(inst, prof, worst)?,
        TargetRule::Av => solve_av(inst, prof, worst, search_budget)?,
        TargetRule::Cc => solve_cc(inst, prof, worst, search_budget)?,
        TargetRule::Pav => solve_pav(inst, prof, worst, search_budget)?,
        TargetRule::RuleX => rule_x(inst, prof)?,
    };
    let achieved_ratio = match case.measure {
        Measure::Welfare => fraction(social_welfare(prof, &bundle)?, max_social_welfare(inst, prof, search_budget)?),
        Measure::Representation => {
            fraction(representation(prof, &bundle)?, max_representation(inst, prof, search_budget)?)
        }
    };
    Ok(Verification {
        exact_match: achieved_ratio == case.expected_ratio,
        within_bound: case.bound.admits(&achieved_ratio),
        bundle,
        achieved_ratio,
    })
}

#[derive(Default)]
struct Builder {
    projects: Vec<(Rational, Vec<usize>)>,
    voters: usize,
}

impl Builder {
    fn project(&mut self, cost: Rational, approvers: impl IntoIterator<Item = usize>) {
        self.projects.push((cost, approvers.into_iter().collect()));
    }

    fn voters(&mut self, count: usize) {
        self.voters = count;
    }

    fn finish(self, budget: Rational) -> Result<(PbInstance, ApprovalProfile)> {
        let mut ballots = vec![Vec::new(); self.voters];
        let mut projects = Vec::with_capacity(self.projects.len());
        for (j, (cost, approvers)) in self.projects.into_iter().enumerate() {
            for v in approvers {
                ballots[v].push(j);
            }
            projects.push(Project::new(format!("p{}", j + 1), cost));
        }
        let instance = PbInstance::new(projects, budget)?;
        let profile = ApprovalProfile::new(&instance, ballots)?;
        Ok((instance, profile))
    }
}

fn out_of_range(message: &str) -> Error {
    Error::InvalidInput(format!("parameters out of range: {message}"))
}

fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn ratio(numer: u64, denom: u64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// ⌊ln x⌋ for `x ≥ 1`. `ln x` is irrational for integers `x > 1`, so the
/// float result never sits on an integer boundary.
fn floor_ln(x: u64) -> u64 {
    (x as f64).ln().floor() as u64
}
