use std::fmt;
use std::str::FromStr;

use pb_core::exact::{solve_av, solve_cc, solve_pav, SearchBudget, TieBreakPolicy};
use pb_core::sequential::{rule_x, rule_x_eps, rule_x_pav, seq_pav, RxEpsMode};
use pb_core::{ApprovalProfile, Bundle, PbInstance};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Av,
    Cc,
    Pav,
    SeqPav,
    RuleX,
    RuleXEps,
    RuleXPav,
}

impl Rule {
    pub const ALL: [Rule; 7] = [Rule::Av, Rule::Cc, Rule::Pav, Rule::SeqPav, Rule::RuleX, Rule::RuleXEps, Rule::RuleXPav];

    pub fn name(self) -> &'static str {
        match self {
            Self::Av => "av",
            Self::Cc => "cc",
            Self::Pav => "pav",
            Self::SeqPav => "seq_pav",
            Self::RuleX => "rule_x",
            Self::RuleXEps => "rule_x_eps",
            Self::RuleXPav => "rule_x_pav",
        }
    }

    /// Comma-separated names; `all` expands to every rule.
    pub fn parse_list(text: &str) -> Result<Vec<Rule>, BenchError> {
        let mut rules = Vec::new();
        for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if name == "all" {
                rules.extend(Self::ALL);
            } else {
                rules.push(name.parse()?);
            }
        }
        rules.sort();
        rules.dedup();
        if rules.is_empty() {
            return Err(BenchError::Spec("the rule list is empty".into()));
        }
        Ok(rules)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        let wanted = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match wanted.as_str() {
            "spav" => "seq_pav",
            "rx" => "rule_x",
            "rx_eps" => "rule_x_eps",
            "rx_pav" => "rule_x_pav",
            other => other,
        };
        Self::ALL
            .into_iter()
            .find(|r| r.name() == alias)
            .ok_or_else(|| BenchError::Spec(format!("unknown rule `{s}` (expected one of av, cc, pav, seq_pav, rule_x, rule_x_eps, rule_x_pav)")))
    }
}

/// Tie-breaking as configured for an experiment.
///
/// `Worst` picks, per rule, the optimum that is worst for the measure the
/// rule does not optimize: AV ties go to the lowest representation, every
/// other tie to the lowest welfare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    Worst,
    Fixed(TieBreakPolicy),
}

impl TieBreak {
    pub fn policy_for(self, rule: Rule) -> TieBreakPolicy {
        match self {
            Self::Fixed(policy) => policy,
            Self::Worst if rule == Rule::Av => TieBreakPolicy::WorstRp,
            Self::Worst => TieBreakPolicy::WorstSw,
        }
    }
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Worst => f.write_str("worst"),
            Self::Fixed(policy) => policy.fmt(f),
        }
    }
}

impl FromStr for TieBreak {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        if s == "worst" {
            return Ok(Self::Worst);
        }
        s.parse().map(Self::Fixed).map_err(|e: pb_core::Error| BenchError::Spec(e.to_string()))
    }
}

/// Runs one rule on one instance.
pub fn run_rule(
    rule: Rule,
    instance: &PbInstance,
    profile: &ApprovalProfile,
    tiebreak: TieBreak,
    eps_mode: &RxEpsMode,
    search_budget: SearchBudget,
) -> pb_core::Result<Bundle> {
    let policy = tiebreak.policy_for(rule);
    match rule {
        Rule::Av => solve_av(instance, profile, policy, search_budget),
        Rule::Cc => solve_cc(instance, profile, policy, search_budget),
        Rule::Pav => solve_pav(instance, profile, policy, search_budget),
        Rule::SeqPav => seq_pav(instance, profile, policy),
        Rule::RuleX => rule_x(instance, profile),
        Rule::RuleXEps => rule_x_eps(instance, profile, eps_mode),
        Rule::RuleXPav => rule_x_pav(instance, profile, policy, search_budget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for rule in Rule::ALL {
            assert_eq!(rule.name().parse::<Rule>().unwrap(), rule);
        }
        assert_eq!("sPAV".parse::<Rule>().unwrap(), Rule::SeqPav);
        assert_eq!(Rule::parse_list("pav, av,pav").unwrap(), vec![Rule::Av, Rule::Pav]);
        assert_eq!(Rule::parse_list("all").unwrap().len(), 7);
        assert!(Rule::parse_list(" , ").is_err());
        assert!("stv".parse::<Rule>().is_err());
    }

    #[test]
    fn worst_mapping() {
        assert_eq!(TieBreak::Worst.policy_for(Rule::Av), TieBreakPolicy::WorstRp);
        assert_eq!(TieBreak::Worst.policy_for(Rule::Cc), TieBreakPolicy::WorstSw);
        assert_eq!("random:4".parse::<TieBreak>().unwrap().policy_for(Rule::Av), TieBreakPolicy::Random(4));
        assert!("best".parse::<TieBreak>().is_err());
    }
}
