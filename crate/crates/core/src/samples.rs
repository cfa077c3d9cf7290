//! Small hand-built instances used in docs, tests and the CLI.

use crate::model::{ApprovalProfile, PbInstance};

/// Three districts A/B/C with 100/90/10 voters; every voter approves exactly
/// the projects of their own district. Diamonds cost 200, emeralds 150, gold
/// 100, and the budget is 1000.
///
/// | district | projects          |
/// |----------|-------------------|
/// | A        | 2 diamonds, 6 gold |
/// | B        | 3 diamonds, 3 emeralds |
/// | C        | 1 emerald, 1 gold |
pub fn city() -> (PbInstance, ApprovalProfile) {
    let districts: [(&str, &[(&str, usize, i64)], usize); 3] = [
        ("A", &[("D", 2, 200), ("G", 6, 100)], 100),
        ("B", &[("D", 3, 200), ("E", 3, 150)], 90),
        ("C", &[("E", 1, 150), ("G", 1, 100)], 10),
    ];
    let mut costs = Vec::new();
    let mut ballots = Vec::new();
    for (district, kinds, voters) in districts {
        let mut ballot = Vec::new();
        for &(kind, count, cost) in kinds {
            for j in 1..=count {
                ballot.push(costs.len());
                costs.push((format!("{district}-{kind}{j}"), cost));
            }
        }
        ballots.extend(std::iter::repeat_n(ballot, voters));
    }
    let named: Vec<(&str, i64)> = costs.iter().map(|(id, c)| (id.as_str(), *c)).collect();
    let instance = PbInstance::from_costs(&named, 1000).expect("valid instance");
    let profile = ApprovalProfile::new(&instance, ballots).expect("valid profile");
    (instance, profile)
}

/// Three projects, budget 3: `p1`, `p2` cost 1 and `p3` costs 2; ballots
/// `{p1,p2}`, `{p1}`, `{p3}`.
pub fn tiny() -> (PbInstance, ApprovalProfile) {
    let instance = PbInstance::from_costs(&[("p1", 1), ("p2", 1), ("p3", 2)], 3).expect("valid instance");
    let profile =
        ApprovalProfile::from_ids(&instance, &[&["p1", "p2"][..], &["p1"], &["p3"]]).expect("valid profile");
    (instance, profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn city_shape() {
        let (inst, prof) = city();
        assert_eq!(inst.num_projects(), 16);
        assert_eq!(prof.num_voters(), 200);
        assert_eq!(inst.project(0).id, "A-D1");
        assert_eq!(inst.project(15).id, "C-G1");
        assert_eq!(prof.ballot(0).len(), 8);
        assert_eq!(prof.ballot(199).len(), 2);
    }
}
