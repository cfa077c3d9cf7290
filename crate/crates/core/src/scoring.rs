//! Welfare, representation and PAV scores, plus the ratios against optima.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fairness::EjrState;
use crate::model::{ApprovalProfile, Bundle, PbInstance, Rational};

/// Number of funded projects each voter approves, |A(i) ∩ B|.
pub fn coverage(profile: &ApprovalProfile, bundle: &Bundle) -> Result<Vec<usize>> {
    profile.check_bundle(bundle)?;
    Ok(profile
        .ballots()
        .iter()
        .map(|ballot| ballot.iter().filter(|p| bundle.contains(**p)).count())
        .collect())
}

/// SW(A, B): total number of (voter, funded approved project) pairs.
pub fn social_welfare(profile: &ApprovalProfile, bundle: &Bundle) -> Result<u64> {
    Ok(coverage(profile, bundle)?.into_iter().map(|k| k as u64).sum())
}

/// RP(A, B): number of voters with at least one funded approved project.
pub fn representation(profile: &ApprovalProfile, bundle: &Bundle) -> Result<u64> {
    Ok(coverage(profile, bundle)?.into_iter().filter(|&k| k > 0).count() as u64)
}

/// H(k) = 1 + 1/2 + ... + 1/k, with H(0) = 0.
pub fn harmonic(k: usize) -> Rational {
    (1..=k).map(|j| Rational::new(BigInt::one(), BigInt::from(j))).sum()
}

/// Σ_i H(|A(i) ∩ B|).
pub fn pav_score(profile: &ApprovalProfile, bundle: &Bundle) -> Result<Rational> {
    let cov = coverage(profile, bundle)?;
    let max = cov.iter().copied().max().unwrap_or(0);
    let mut per_count = vec![0u64; max + 1];
    for k in cov {
        per_count[k] += 1;
    }
    // H(k) for each k is computed once, weighted by the number of voters at k.
    let mut score = Rational::zero();
    let mut h = Rational::zero();
    for (k, voters) in per_count.iter().enumerate().skip(1) {
        h += Rational::new(BigInt::one(), BigInt::from(k));
        if *voters > 0 {
            score += &h * Rational::from_integer(BigInt::from(*voters));
        }
    }
    Ok(score)
}

pub fn is_feasible(instance: &PbInstance, bundle: &Bundle) -> Result<bool> {
    if let Some(&p) = bundle.indices().last() {
        if p >= instance.num_projects() {
            return Err(Error::UnknownProject(format!("#{p}")));
        }
    }
    Ok(&instance.bundle_cost(bundle) <= instance.budget())
}

/// Utilitarian and representation ratios of `bundle` against the given optima.
pub fn ratios(
    instance: &PbInstance,
    profile: &ApprovalProfile,
    bundle: &Bundle,
    opt_sw: u64,
    opt_rp: u64,
) -> Result<(Rational, Rational)> {
    if profile.num_projects() != instance.num_projects() {
        return Err(Error::InvalidInput("profile and instance disagree on the project count".into()));
    }
    if opt_sw == 0 || opt_rp == 0 {
        return Err(Error::Degenerate("optimal welfare is zero; no voter approves a fundable project".into()));
    }
    let sw = social_welfare(profile, bundle)?;
    let rp = representation(profile, bundle)?;
    if sw > opt_sw || rp > opt_rp {
        return Err(Error::InvalidInput(format!(
            "bundle scores (SW {sw}, RP {rp}) exceed the supplied optima (SW {opt_sw}, RP {opt_rp})"
        )));
    }
    Ok((fraction(sw, opt_sw), fraction(rp, opt_rp)))
}

pub(crate) fn fraction(numer: u64, denom: u64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Scores of one rule's outcome on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeReport {
    pub rule: String,
    pub bundle: Bundle,
    pub sw: u64,
    pub rp: u64,
    pub pav_score: Rational,
    pub util_ratio: Rational,
    pub rep_ratio: Rational,
    pub ejr: EjrState,
}

impl OutcomeReport {
    pub fn evaluate(
        rule: impl Into<String>,
        instance: &PbInstance,
        profile: &ApprovalProfile,
        bundle: Bundle,
        opt_sw: u64,
        opt_rp: u64,
        ejr: EjrState,
    ) -> Result<Self> {
        let (util_ratio, rep_ratio) = ratios(instance, profile, &bundle, opt_sw, opt_rp)?;
        Ok(Self {
            rule: rule.into(),
            sw: social_welfare(profile, &bundle)?,
            rp: representation(profile, &bundle)?,
            pav_score: pav_score(profile, &bundle)?,
            util_ratio,
            rep_ratio,
            bundle,
            ejr,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{int, ratio};

    fn tiny() -> (PbInstance, ApprovalProfile) {
        let inst = PbInstance::from_costs(&[("p1", 1), ("p2", 1), ("p3", 2)], 3).unwrap();
        let prof = ApprovalProfile::from_ids(&inst, &[&["p1", "p2"][..], &["p1"], &["p3"]]).unwrap();
        (inst, prof)
    }

    #[test]
    fn tiny_scores() {
        let (inst, prof) = tiny();
        let b13 = Bundle::from_ids(&inst, &["p1", "p3"]).unwrap();
        let b12 = Bundle::from_ids(&inst, &["p1", "p2"]).unwrap();
        assert_eq!(social_welfare(&prof, &b13).unwrap(), 3);
        assert_eq!(representation(&prof, &b13).unwrap(), 3);
        assert_eq!(representation(&prof, &b12).unwrap(), 2);
        assert_eq!(pav_score(&prof, &b12).unwrap(), ratio(5, 2));
    }

    #[test]
    fn empty_bundle_scores_zero() {
        let (_, prof) = tiny();
        let empty = Bundle::empty();
        assert_eq!(social_welfare(&prof, &empty).unwrap(), 0);
        assert_eq!(representation(&prof, &empty).unwrap(), 0);
        assert_eq!(pav_score(&prof, &empty).unwrap(), int(0));
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(0), int(0));
        assert_eq!(harmonic(3), ratio(11, 6));
        assert_eq!(harmonic(5), ratio(137, 60));
    }

    #[test]
    fn single_voter_gets_harmonic_number() {
        let inst = PbInstance::from_costs(&[("a", 1), ("b", 1), ("c", 1)], 3).unwrap();
        let prof = ApprovalProfile::from_ids(&inst, &[&["a", "b", "c"][..]]).unwrap();
        let all = Bundle::from_indices(0..3);
        assert_eq!(pav_score(&prof, &all).unwrap(), ratio(11, 6));
    }

    #[test]
    fn feasibility() {
        let (inst, _) = tiny();
        assert!(!is_feasible(&inst, &Bundle::from_indices(0..3)).unwrap());
        assert!(is_feasible(&inst, &Bundle::empty()).unwrap());
        assert!(is_feasible(&inst, &Bundle::from_indices([7])).is_err());
    }

    #[test]
    fn unknown_project_in_bundle() {
        let (_, prof) = tiny();
        assert!(matches!(social_welfare(&prof, &Bundle::from_indices([9])), Err(Error::UnknownProject(_))));
    }

    #[test]
    fn ratio_errors() {
        let (inst, prof) = tiny();
        let b = Bundle::from_ids(&inst, &["p1", "p3"]).unwrap();
        assert!(matches!(ratios(&inst, &prof, &b, 0, 3), Err(Error::Degenerate(_))));
        assert_eq!(ratios(&inst, &prof, &b, 3, 3).unwrap(), (int(1), int(1)));
        assert!(ratios(&inst, &prof, &b, 2, 3).is_err());
    }
}
