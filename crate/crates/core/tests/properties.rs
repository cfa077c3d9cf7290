//! Invariants of the data model, the scores and the solvers on arbitrary
//! small inputs.

use num_bigint::BigInt;
use pb_core::exact::{max_pav_score, max_representation, max_social_welfare, solve_av, solve_cc, SearchBudget, TieBreakPolicy};
use pb_core::model::{int, ApprovalProfile, Bundle, PbInstance, Project, Rational};
use pb_core::scoring::{coverage, harmonic, pav_score, representation, social_welfare};
use pb_core::sequential::{rule_x, seq_pav};
use proptest::prelude::*;

fn arb_case() -> impl Strategy<Value = (PbInstance, ApprovalProfile)> {
    (1usize..9, 1usize..8).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(1i64..15, m),
            1i64..60,
            prop::collection::vec(prop::collection::vec(any::<bool>(), m), n),
        )
            .prop_map(|(costs, budget, marks)| {
                let projects = costs.iter().enumerate().map(|(j, &c)| Project::new(format!("p{j}"), int(c))).collect();
                let inst = PbInstance::new(projects, int(budget)).unwrap();
                let ballots =
                    marks.iter().map(|row| row.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect()).collect();
                let prof = ApprovalProfile::new(&inst, ballots).unwrap();
                (inst, prof)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bundles_are_sorted_sets(indices in prop::collection::vec(0usize..20, 0..30)) {
        let b = Bundle::from_indices(indices.clone());
        prop_assert!(b.indices().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(indices.iter().all(|&p| b.contains(p)));
        prop_assert_eq!(Bundle::from_indices(b.indices().iter().rev().copied()), b.clone());
        prop_assert!(b.is_subset(&b.union(&Bundle::from_indices([25]))));
    }

    #[test]
    fn score_relations((inst, prof) in arb_case(), mask in any::<u16>()) {
        let b = Bundle::from_indices((0..inst.num_projects()).filter(|p| mask >> p & 1 == 1));
        let sw = social_welfare(&prof, &b).unwrap();
        let rp = representation(&prof, &b).unwrap();
        let pav = pav_score(&prof, &b).unwrap();
        prop_assert!(rp <= sw);
        prop_assert!(int(rp as i64) <= pav && pav <= int(sw as i64));
        prop_assert_eq!(coverage(&prof, &b).unwrap().iter().sum::<usize>() as u64, sw);
        let expected: Rational = coverage(&prof, &b).unwrap().iter().map(|&c| harmonic(c)).sum();
        prop_assert_eq!(pav, expected);
    }

    #[test]
    fn voter_order_is_irrelevant((inst, prof) in arb_case(), shift in 0usize..8) {
        let n = prof.num_voters();
        let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let other = prof.permuted(&order);
        let nb = SearchBudget::default();
        prop_assert_eq!(max_social_welfare(&inst, &prof, nb).unwrap(), max_social_welfare(&inst, &other, nb).unwrap());
        prop_assert_eq!(max_representation(&inst, &prof, nb).unwrap(), max_representation(&inst, &other, nb).unwrap());
        prop_assert_eq!(max_pav_score(&inst, &prof, nb).unwrap(), max_pav_score(&inst, &other, nb).unwrap());
        prop_assert_eq!(rule_x(&inst, &prof).unwrap(), rule_x(&inst, &other).unwrap());
    }

    #[test]
    fn more_money_never_hurts((inst, prof) in arb_case(), extra in 1i64..20) {
        let richer = PbInstance::new(inst.projects().to_vec(), inst.budget() + int(extra)).unwrap();
        let nb = SearchBudget::default();
        prop_assert!(max_social_welfare(&richer, &prof, nb).unwrap() >= max_social_welfare(&inst, &prof, nb).unwrap());
        prop_assert!(max_representation(&richer, &prof, nb).unwrap() >= max_representation(&inst, &prof, nb).unwrap());
        prop_assert!(max_pav_score(&richer, &prof, nb).unwrap() >= max_pav_score(&inst, &prof, nb).unwrap());
    }

    #[test]
    fn optima_dominate_other_rules((inst, prof) in arb_case()) {
        let nb = SearchBudget::default();
        let av = solve_av(&inst, &prof, TieBreakPolicy::WorstSw, nb).unwrap();
        let cc = solve_cc(&inst, &prof, TieBreakPolicy::WorstRp, nb).unwrap();
        for other in [rule_x(&inst, &prof).unwrap(), seq_pav(&inst, &prof, TieBreakPolicy::LexById).unwrap()] {
            prop_assert!(social_welfare(&prof, &av).unwrap() >= social_welfare(&prof, &other).unwrap());
            prop_assert!(representation(&prof, &cc).unwrap() >= representation(&prof, &other).unwrap());
        }
    }

    #[test]
    fn integer_costs_preserve_ratios(costs in prop::collection::vec((1i64..1000, 1i64..40), 1..8), budget in (1i64..1000, 1i64..40)) {
        let frac = |(n, d): (i64, i64)| Rational::new(BigInt::from(n), BigInt::from(d));
        let projects = costs.iter().enumerate().map(|(j, &c)| Project::new(format!("p{j}"), frac(c))).collect();
        let inst = PbInstance::new(projects, frac(budget)).unwrap();
        let scaled = inst.integer_costs().unwrap();
        for (p, &c) in scaled.costs.iter().enumerate() {
            let lhs = Rational::from_integer(BigInt::from(c)) * inst.budget();
            let rhs = Rational::from_integer(BigInt::from(scaled.budget)) * inst.cost(p);
            prop_assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn harmonic_numbers() {
    assert_eq!(harmonic(0), int(0));
    assert_eq!(harmonic(3), Rational::new(11.into(), 6.into()));
    assert_eq!(harmonic(5), Rational::new(137.into(), 60.into()));
}

#[test]
fn instance_validation() {
    assert!(PbInstance::from_costs(&[], 10).is_err());
    assert!(PbInstance::from_costs(&[("a", 0)], 10).is_err());
    assert!(PbInstance::from_costs(&[("a", 1)], 0).is_err());
    assert!(PbInstance::from_costs(&[("a", 1), ("a", 2)], 10).is_err());
    let inst = PbInstance::from_costs(&[("a", 1), ("b", 2)], 10).unwrap();
    assert!(ApprovalProfile::new(&inst, vec![vec![2]]).is_err());
    assert!(ApprovalProfile::from_ids(&inst, &[&["c"]]).is_err());
    assert_eq!(inst.max_bundle_size(), 10);
}
