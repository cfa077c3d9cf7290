//! Synthetic generators: determinism, distributional shape and the
//! structural properties each dataset promises.

use pb_core::datagen::{gen_euclidean, gen_party_list, EuclideanConfig, PartyListConfig};
use pb_core::model::Rational;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn same_seed_same_instance() {
    let e = EuclideanConfig::default();
    assert_eq!(gen_euclidean(&e, 42).unwrap(), gen_euclidean(&e, 42).unwrap());
    assert_ne!(gen_euclidean(&e, 42).unwrap(), gen_euclidean(&e, 43).unwrap());
    let p = PartyListConfig::default();
    assert_eq!(gen_party_list(&p, 42).unwrap(), gen_party_list(&p, 42).unwrap());
    assert_ne!(gen_party_list(&p, 42).unwrap(), gen_party_list(&p, 43).unwrap());
}

#[test]
fn euclidean_costs_and_counts() {
    let config = EuclideanConfig::default();
    for seed in 0..20 {
        let (inst, prof) = gen_euclidean(&config, seed).unwrap();
        assert_eq!(inst.num_projects(), 100);
        assert_eq!(prof.num_voters(), 1000);
        assert_eq!(inst.budget(), &Rational::from_integer(100_000.into()));
        let floor = Rational::from_integer(100.into());
        for p in inst.projects() {
            assert!(p.cost >= floor);
            // Rounded to cents.
            assert!((&p.cost * Rational::from_integer(100.into())).is_integer());
        }
    }
}

/// Expected ballot length: `max(round(a), 1)` with `a ~ Normal(10, 3)`.
fn expected_ballot_size(mean: f64, std: f64) -> f64 {
    let normal = Normal::new(mean, std).unwrap();
    (-30i64..=60)
        .map(|k| {
            let mass = normal.cdf(k as f64 + 0.5) - normal.cdf(k as f64 - 0.5);
            k.max(1) as f64 * mass
        })
        .sum()
}

#[test]
fn mean_ballot_size_matches_the_truncated_normal() {
    let config = EuclideanConfig::default();
    let oracle = expected_ballot_size(config.approvals_mean, config.approvals_std);
    let (mut total, mut count) = (0usize, 0usize);
    for seed in 0..1000 {
        let (_, prof) = gen_euclidean(&config, seed).unwrap();
        total += prof.ballots().iter().map(Vec::len).sum::<usize>();
        count += prof.num_voters();
    }
    let mean = total as f64 / count as f64;
    assert!((mean - 10.0).abs() <= 0.3, "mean ballot size {mean}");
    // A million draws put the sample mean within a few hundredths of the oracle.
    assert!((mean - oracle).abs() <= 0.03, "mean {mean} vs oracle {oracle}");
}

#[test]
fn ballots_are_the_nearest_projects() {
    // Positions are not exposed, so check consistency indirectly: shrinking
    // the ballot-size spread to zero gives every voter the same length, and
    // each voter's ballot for a smaller size is a prefix-closed subset of the
    // ballot for a larger one.
    let mut small = EuclideanConfig::desk();
    small.approvals_std = 0.0;
    small.approvals_mean = 3.0;
    let mut large = small.clone();
    large.approvals_mean = 7.0;
    for seed in 0..50 {
        let (_, a) = gen_euclidean(&small, seed).unwrap();
        let (_, b) = gen_euclidean(&large, seed).unwrap();
        for (sa, sb) in a.ballots().iter().zip(b.ballots()) {
            assert_eq!(sa.len(), 3);
            assert_eq!(sb.len(), 7);
            assert!(sa.iter().all(|p| sb.contains(p)), "seed {seed}");
        }
    }
}

#[test]
fn party_lists_are_equal_or_disjoint() {
    let config = PartyListConfig::default();
    for seed in 0..1000 {
        let (inst, prof) = gen_party_list(&config, seed).unwrap();
        assert_eq!(prof.num_voters(), 200);
        let ballots = prof.ballots();
        let mut owner = vec![None; inst.num_projects()];
        for (v, ballot) in ballots.iter().enumerate() {
            assert!((10..=30).contains(&ballot.len()), "seed {seed}");
            for &p in ballot {
                match owner[p] {
                    None => owner[p] = Some(v),
                    Some(w) => assert_eq!(&ballots[w], ballot, "seed {seed}"),
                }
            }
        }
        assert!(owner.iter().all(Option::is_some), "every project belongs to a group");
        // Cost is linear in the size of the approving group.
        let approvers = prof.approvers();
        for p in 0..inst.num_projects() {
            let expected = Rational::from_integer((100 * approvers[p].len() as i64).into());
            assert_eq!(inst.cost(p), &expected);
        }
        let total: Rational = inst.projects().iter().map(|p| &p.cost).sum();
        assert_eq!(inst.budget() * Rational::from_integer(2.into()), total);
    }
}

#[test]
fn group_sizes_stay_in_range_except_the_last() {
    let config = PartyListConfig::default();
    for seed in 0..200 {
        let (_, prof) = gen_party_list(&config, seed).unwrap();
        let mut sizes: std::collections::BTreeMap<&[usize], usize> = Default::default();
        for ballot in prof.ballots() {
            *sizes.entry(ballot.as_slice()).or_default() += 1;
        }
        let oversized = sizes.values().filter(|&&s| s > 20).count();
        let undersized = sizes.values().filter(|&&s| s < 5).count();
        assert_eq!(oversized, 0);
        assert!(undersized <= 1, "seed {seed}");
        assert_eq!(sizes.values().sum::<usize>(), 200);
    }
}
