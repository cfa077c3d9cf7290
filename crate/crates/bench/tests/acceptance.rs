//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use pb_bench::{
    aggregate, emit_scatter, load_instances, rows_csv, run_experiment, write_corpus, Preset, ResultRow, Rule, Summary,
};
use pb_core::adversarial::{build, verify, Family};
use pb_core::exact::{
    max_pav_score, max_representation, max_social_welfare, solve, solve_av, solve_cc, solve_pav, Objective,
    SearchBudget, TieBreakPolicy,
};
use pb_core::fairness::{find_ejr_violation, full_t_cap, EjrState};
use pb_core::model::{ratio, to_f64, ApprovalProfile, Bundle, PbInstance, Rational};
use pb_core::pabulib::{parse_pb, write_pb_file};
use pb_core::samples::city;
use pb_core::scoring::{pav_score, ratios, representation, social_welfare};
use pb_core::sequential::{q_value, rule_x_eps, seq_pav, QValue, RxEpsMode};
use pb_testkit::{
    bisect_q, brute_ejr_satisfied, brute_optimum, feasible_bundles, int, objective, random_instance, random_q_input,
    Goal, RandomSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const SLACK: f64 = 1e-12;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn nb() -> SearchBudget {
    SearchBudget::default()
}

fn desk_random() -> RandomSpec {
    RandomSpec { projects: (1, 12), voters: (1, 10), max_cost: 12, density: 0.4, all_approved: false }
}

fn scores(prof: &ApprovalProfile, bundle: &Bundle) -> (u64, u64) {
    (social_welfare(prof, bundle).unwrap(), representation(prof, bundle).unwrap())
}

fn running_example() -> Outcome {
    let start = Instant::now();
    let (inst, prof) = city();
    let (opt_sw, opt_rp) = (max_social_welfare(&inst, &prof, nb()).unwrap(), max_representation(&inst, &prof, nb()).unwrap());
    ensure!((opt_sw, opt_rp) == (800, 200), "optima {opt_sw}/{opt_rp}");

    let av = solve_av(&inst, &prof, TieBreakPolicy::WorstRp, nb()).unwrap();
    ensure!(scores(&prof, &av) == (800, 100), "AV scores {:?}", scores(&prof, &av));
    ensure!(ratios(&inst, &prof, &av, opt_sw, opt_rp).unwrap() == (ratio(1, 1), ratio(1, 2)), "AV ratios");

    let pav = solve_pav(&inst, &prof, TieBreakPolicy::WorstSw, nb()).unwrap();
    let spav = seq_pav(&inst, &prof, TieBreakPolicy::WorstSw).unwrap();
    for (name, b) in [("PAV", &pav), ("sPAV", &spav)] {
        ensure!(scores(&prof, b) == (770, 190), "{name} scores {:?}", scores(&prof, b));
        ensure!(ratios(&inst, &prof, b, opt_sw, opt_rp).unwrap() == (ratio(77, 80), ratio(19, 20)), "{name} ratios");
    }

    let cc = solve_cc(&inst, &prof, TieBreakPolicy::WorstSw, nb()).unwrap();
    let (cc_sw, cc_rp) = scores(&prof, &cc);
    ensure!(cc_rp == 200, "CC representation {cc_rp}");
    ensure!(start.elapsed() < Duration::from_secs(1), "took {:?}", start.elapsed());
    ensure!(
        cc_sw == 390,
        "CC worst-SW welfare is {cc_sw} ({}), expected 390; the worst-welfare full-coverage bundle is {}",
        ratios(&inst, &prof, &cc, opt_sw, opt_rp).unwrap().0,
        cc.display(&inst)
    );
    Ok("AV 800/100, CC 390/200, PAV and sPAV 770/190".into())
}

fn outcome_traces() -> Outcome {
    let (inst, prof) = city();
    let ids = |b: &Bundle| b.sorted_ids(&inst).join(",");
    let av = solve_av(&inst, &prof, TieBreakPolicy::WorstRp, nb()).unwrap();
    ensure!(ids(&av) == "A-D1,A-D2,A-G1,A-G2,A-G3,A-G4,A-G5,A-G6", "AV funded {}", ids(&av));
    let golds_emeralds = "A-G1,A-G2,A-G3,A-G4,A-G5,B-E1,B-E2,B-E3";
    let pav = solve_pav(&inst, &prof, TieBreakPolicy::CheapestFirst, nb()).unwrap();
    let spav = seq_pav(&inst, &prof, TieBreakPolicy::CheapestFirst).unwrap();
    ensure!(ids(&pav) == golds_emeralds, "PAV funded {}", ids(&pav));
    ensure!(ids(&spav) == golds_emeralds, "sPAV funded {}", ids(&spav));

    let cc = solve_cc(&inst, &prof, TieBreakPolicy::WorstSw, nb()).unwrap();
    let cap = full_t_cap(&inst, &prof);
    let state = |b: &Bundle| find_ejr_violation(&inst, &prof, b, cap).unwrap().state();
    ensure!(state(&av) == EjrState::Violated, "AV verdict {:?}", state(&av));
    ensure!(state(&cc) == EjrState::Violated, "CC verdict {:?}", state(&cc));
    ensure!(state(&pav) == EjrState::Satisfied, "5G+3E verdict {:?}", state(&pav));
    Ok("AV 2D+6G, PAV/sPAV 5G+3E; AV and CC violate EJR, 5G+3E satisfies it".into())
}

fn adversarial_suite() -> Outcome {
    let start = Instant::now();
    let mut points = 0;
    for family in Family::ALL {
        let sweep = family.sweep();
        ensure!(sweep.len() >= 10, "{} sweeps {} points", family.name(), sweep.len());
        for params in sweep {
            let case = build(family, &params).map_err(|e| format!("{} {params}: {e}", family.name()))?;
            let v = verify(&case, nb()).map_err(|e| format!("{} {params}: {e}", family.name()))?;
            ensure!(v.exact_match, "{} {params}: achieved {} expected {}", family.name(), v.achieved_ratio, case.expected_ratio);
            ensure!(v.within_bound, "{} {params}: {} outside bound", family.name(), v.achieved_ratio);
            points += 1;
        }
    }
    ensure!(start.elapsed() < Duration::from_secs(60), "took {:?}", start.elapsed());
    Ok(format!("{} families, {points} points, {:.1?}", Family::ALL.len(), start.elapsed()))
}

fn lower_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0);
    let mut checked = 0;
    for case in 0..200 {
        let all_approved = case % 2 == 0;
        let (inst, prof) = random_instance(&mut rng, &RandomSpec { all_approved, max_cost: 20, ..desk_random() });
        let spread = to_f64(&(inst.budget() / inst.c_min()));
        let log_share = spread.ln() / spread;

        for bundle in feasible_bundles(&inst) {
            let sw = social_welfare(&prof, &bundle).unwrap();
            if sw > 0 {
                let per_unit = to_f64(&(pav_score(&prof, &bundle).unwrap() / int(sw as i64)));
                ensure!(per_unit + SLACK >= log_share, "case {case}: PAV score per welfare {per_unit} < {log_share}");
            }
        }
        let opt_sw = max_social_welfare(&inst, &prof, nb()).unwrap();
        let opt_rp = max_representation(&inst, &prof, nb()).unwrap();
        if opt_sw == 0 {
            continue;
        }
        let util = |b: &Bundle| social_welfare(&prof, b).unwrap() as f64 / opt_sw as f64;
        let rep = |b: &Bundle| representation(&prof, b).unwrap() as f64 / opt_rp as f64;

        let pav_w = solve_pav(&inst, &prof, TieBreakPolicy::WorstSw, nb()).unwrap();
        ensure!(util(&pav_w) + SLACK >= log_share, "case {case}: PAV welfare");
        if spread >= 3.0 {
            let pav_r = solve_pav(&inst, &prof, TieBreakPolicy::WorstRp, nb()).unwrap();
            ensure!(rep(&pav_r) + SLACK >= 1.0 / (2.0 * spread.ln()), "case {case}: PAV representation");
        }
        let av = solve_av(&inst, &prof, TieBreakPolicy::WorstRp, nb()).unwrap();
        let av_bound = to_f64(&(inst.c_min() * inst.c_min() / (inst.budget() * inst.c_max())));
        ensure!(rep(&av) + SLACK >= av_bound, "case {case}: AV representation");
        let cc = solve_cc(&inst, &prof, TieBreakPolicy::WorstSw, nb()).unwrap();
        ensure!(util(&cc) + SLACK >= 1.0 / spread, "case {case}: CC welfare");
        if all_approved {
            let eps = rule_x_eps(&inst, &prof, &RxEpsMode::Limit).unwrap();
            let fits = (inst.budget() / inst.c_max()).floor();
            let n = int(prof.num_voters() as i64);
            let bound = to_f64(&(inst.c_min() * fits / (inst.budget() * n)));
            ensure!(util(&eps) + SLACK >= bound, "case {case}: EJR welfare");
        }
        checked += 1;
    }
    Ok(format!("200 instances ({} with zero optimal welfare), zero violations", 200 - checked))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a);
    let goals = [(Objective::SocialWelfare, Goal::Welfare), (Objective::Representation, Goal::Representation), (Objective::Pav, Goal::Pav)];
    for case in 0..500 {
        let (inst, prof) = random_instance(&mut rng, &desk_random());
        for (obj, goal) in goals {
            let bundle = solve(obj, &inst, &prof, TieBreakPolicy::WorstSw, nb()).unwrap();
            ensure!(objective(&prof, &bundle, goal) == brute_optimum(&inst, &prof, goal), "case {case}: {obj:?}");
        }
        ensure!(max_pav_score(&inst, &prof, nb()).unwrap() == brute_optimum(&inst, &prof, Goal::Pav), "case {case}");
        let bundle = Bundle::from_indices((0..inst.num_projects()).filter(|_| rng.random_bool(0.3)));
        let verdict = find_ejr_violation(&inst, &prof, &bundle, full_t_cap(&inst, &prof)).unwrap();
        let expected = if brute_ejr_satisfied(&inst, &prof, &bundle) { EjrState::Satisfied } else { EjrState::Violated };
        ensure!(verdict.state() == expected, "case {case}: EJR verdict {:?}", verdict.state());
    }
    for case in 0..1000 {
        let (cost, budgets, utilities) = random_q_input(&mut rng);
        let exact = q_value(&cost, &budgets, &utilities);
        let oracle = bisect_q(&cost, &budgets, &utilities);
        ensure!(exact == oracle, "q case {case}: {exact:?} vs {oracle:?}");
        if let QValue::Finite(q) = &exact {
            ensure!(!q.is_zero() && *q > Rational::zero(), "q case {case}");
        }
    }
    Ok("500 solver/EJR instances and 1000 q-values agree".into())
}

fn desk_rows(preset: Preset, rules: &[Rule], count: u64) -> Result<Vec<ResultRow>, String> {
    let mut spec = preset.spec();
    spec.rules = rules.to_vec();
    spec.count = count;
    let instances = load_instances(&spec).map_err(|e| e.to_string())?;
    run_experiment(&spec, &instances).map_err(|e| e.to_string())
}

fn rule_x_ejr() -> Outcome {
    let mut total = 0;
    for preset in [Preset::EuclideanDesk, Preset::PartyListDesk] {
        for row in desk_rows(preset, &[Rule::RuleX], 150)? {
            let scores = row.result.map_err(|e| format!("{}: {e}", row.instance))?;
            ensure!(scores.ejr == EjrState::Satisfied, "{}: {:?}", row.instance, scores.ejr);
            total += 1;
        }
    }
    Ok(format!("{total}/{total} instances satisfy EJR"))
}

fn summary<'a>(all: &'a [Summary], rule: Rule) -> &'a Summary {
    all.iter().find(|s| s.rule == rule).expect("every rule is aggregated")
}

fn qualitative() -> Outcome {
    let run = |preset: Preset| -> Result<Vec<Summary>, String> {
        let rows = desk_rows(preset, &Rule::ALL, 50)?;
        ensure!(rows.iter().all(|r| r.result.is_ok()), "{preset}: failed rows");
        aggregate(preset.name(), &rows).map_err(|e| e.to_string())
    };
    let euclid = run(Preset::EuclideanDesk)?;
    let party = run(Preset::PartyListDesk)?;
    for all in [&euclid, &party] {
        ensure!(summary(all, Rule::Av).util_mean.is_one(), "AV util mean {}", summary(all, Rule::Av).util_mean);
        ensure!(summary(all, Rule::Cc).rep_mean.is_one(), "CC rep mean {}", summary(all, Rule::Cc).rep_mean);
    }
    let spav = &summary(&euclid, Rule::SeqPav).util_mean;
    for rule in [Rule::Av, Rule::Pav, Rule::RuleXEps, Rule::RuleXPav] {
        let other = &summary(&euclid, rule).util_mean;
        ensure!(spav < other, "sPAV util {} not below {rule} {}", to_f64(spav), to_f64(other));
    }
    for all in [&euclid, &party] {
        let rx = summary(all, Rule::RuleX);
        for rule in [Rule::RuleXEps, Rule::RuleXPav] {
            let s = summary(all, rule);
            ensure!(s.util_mean >= rx.util_mean && s.rep_mean >= rx.rep_mean, "{rule} does not dominate rule_x");
        }
    }
    let ejr = |rule| summary(&party, rule).ejr_share.clone();
    ensure!(ejr(Rule::Av) == Some(Rational::zero()), "AV EJR share {:?}", ejr(Rule::Av));
    for rule in [Rule::RuleX, Rule::RuleXEps, Rule::RuleXPav] {
        ensure!(ejr(rule) == Some(Rational::one()), "{rule} EJR share {:?}", ejr(rule));
    }
    Ok(format!(
        "sPAV util {:.3}; AV EJR 0%, RX variants 100% on party lists",
        to_f64(spav)
    ))
}

fn round_trips(inst: &PbInstance, prof: &ApprovalProfile, text: &str) -> Result<(), String> {
    let (i2, p2, file) = parse_pb(text).map_err(|e| e.to_string())?;
    ensure!(&i2 == inst && &p2 == prof, "parsed instance differs");
    ensure!(write_pb_file(&i2, &p2, &file).map_err(|e| e.to_string())? == text, "rewrite differs");
    Ok(())
}

fn determinism() -> Outcome {
    let artifacts = || -> Result<(String, String, Vec<(String, String)>), String> {
        let mut csv = String::new();
        let mut summaries = Vec::new();
        let mut corpus = Vec::new();
        for preset in [Preset::EuclideanDesk, Preset::PartyListDesk] {
            let mut spec = preset.spec();
            spec.count = 10;
            let instances = load_instances(&spec).map_err(|e| e.to_string())?;
            let rows = run_experiment(&spec, &instances).map_err(|e| e.to_string())?;
            csv.push_str(&rows_csv(&rows, false));
            summaries.extend(aggregate(preset.name(), &rows).map_err(|e| e.to_string())?);
            corpus.extend(write_corpus(&spec, &instances).map_err(|e| e.to_string())?);
        }
        Ok((csv, emit_scatter(&summaries).map_err(|e| e.to_string())?, corpus))
    };
    let first = artifacts()?;
    ensure!(first == artifacts()?, "a rerun produced different bytes");

    let mut files = 0;
    for preset in [Preset::EuclideanDesk, Preset::PartyListDesk] {
        let spec = preset.spec();
        let instances = load_instances(&spec).map_err(|e| e.to_string())?;
        for (named, (name, text)) in instances.iter().zip(write_corpus(&spec, &instances).map_err(|e| e.to_string())?) {
            round_trips(&named.instance, &named.profile, &text).map_err(|e| format!("{name}: {e}"))?;
            files += 1;
        }
    }
    Ok(format!("CSV, SVG and .pb reruns identical; {files} generated files round-trip"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("running example exactness", running_example),
        ("outcome traces", outcome_traces),
        ("adversarial bound suite", adversarial_suite),
        ("lower-bound property suite", lower_bounds),
        ("oracle equivalence", oracle_equivalence),
        ("EJR of Rule X", rule_x_ejr),
        ("qualitative desk-scale comparison", qualitative),
        ("determinism and format", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
