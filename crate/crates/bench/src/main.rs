use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pb_bench::config::apply;
use pb_bench::{
    aggregate, decimal6, emit_scatter, load_instances, parse_config, rows_csv, run_experiment, run_rule, summary_csv,
    summary_table, write_corpus, BenchError, Dataset, ExperimentSpec, Preset, Rule, Summary, TCap, TieBreak,
};
use pb_core::adversarial::{build, verify, BoundValue, Family, Params};
use pb_core::exact::{max_representation, max_social_welfare, SearchBudget, DEFAULT_MAX_NODES};
use pb_core::fairness::{find_ejr_violation, EjrStatus};
use pb_core::pabulib::{format_decimal, parse_pb};
use pb_core::samples::city;
use pb_core::scoring::{ratios, representation, social_welfare};
use pb_core::sequential::RxEpsMode;
use pb_core::{ApprovalProfile, Bundle, PbInstance};

#[derive(Parser)]
#[command(name = "pb-bench", version, about = "Participatory budgeting rules: solve, audit and benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one rule on one instance.
    Solve(SolveArgs),
    /// Run rules over a dataset and report ratio/EJR tables.
    Bench(BenchArgs),
    /// Write a generated dataset as .pb files.
    Generate(GenerateArgs),
    /// Check a given bundle for an EJR violation.
    CheckEjr(CheckEjrArgs),
    /// Build worst-case instances and verify their ratios.
    Adversarial(AdversarialArgs),
}

#[derive(Args)]
struct InstanceArg {
    /// A .pb file, or `city` for the built-in three-district example.
    #[arg(long)]
    instance: String,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[arg(long)]
    rule: Rule,
    /// worst, worst-sw, worst-rp, lex, cheapest-first or random:<seed>.
    #[arg(long, default_value = "worst")]
    tiebreak: TieBreak,
    #[arg(long, default_value = "auto")]
    tcap: TCap,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: u64,
    /// `limit` or `fixed:<rational>`.
    #[arg(long, default_value = "limit")]
    rx_eps_mode: RxEpsMode,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment file with `key = value` lines.
    #[arg(long, conflicts_with_all = ["preset", "dataset"])]
    config: Option<PathBuf>,
    /// euclidean-desk, partylist-desk or city; repeat to combine datasets.
    #[arg(long)]
    preset: Vec<Preset>,
    /// city, euclidean, partylist, pabulib:<dir> or adversarial:<family>.
    #[arg(long, conflicts_with = "preset")]
    dataset: Option<String>,
    /// Comma-separated rule names, or `all`.
    #[arg(long)]
    rules: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<u64>,
    #[arg(long)]
    tiebreak: Option<String>,
    #[arg(long)]
    tcap: Option<String>,
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    rx_eps_mode: Option<String>,
    /// Extra `key=value` settings, as in a config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    settings: Vec<String>,
    /// Per-row CSV.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Per-rule summary CSV.
    #[arg(long)]
    out_summary: Option<PathBuf>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    /// Add a wall-time column to the per-row CSV.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, conflicts_with = "dataset")]
    preset: Option<Preset>,
    /// euclidean or partylist.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<u64>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    settings: Vec<String>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CheckEjrArgs {
    #[command(flatten)]
    instance: InstanceArg,
    /// Comma-separated project ids of the funded projects.
    #[arg(long, allow_hyphen_values = true)]
    bundle: String,
    #[arg(long, default_value = "full")]
    tcap: TCap,
}

#[derive(Args)]
struct AdversarialArgs {
    /// A family name, or `all`.
    #[arg(long, default_value = "all")]
    family: String,
    /// Parameters such as `n=10,L=1000`; default is the family's sweep.
    #[arg(long)]
    params: Option<Params>,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: u64,
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Generate(args) => generate(args),
        Command::CheckEjr(args) => check_ejr(args),
        Command::Adversarial(args) => adversarial(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<BenchError>().map_or(1, BenchError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn spec_error(message: impl Into<String>) -> anyhow::Error {
    BenchError::Spec(message.into()).into()
}

fn load_instance(arg: &InstanceArg) -> anyhow::Result<(PbInstance, ApprovalProfile)> {
    if arg.instance == "city" {
        return Ok(city());
    }
    let text = std::fs::read_to_string(&arg.instance)
        .map_err(|e| BenchError::Dataset(format!("{}: {e}", arg.instance)))?;
    let (inst, prof, _) = parse_pb(&text).map_err(|e| BenchError::Dataset(format!("{}: {e}", arg.instance)))?;
    Ok((inst, prof))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn solve(args: SolveArgs) -> anyhow::Result<u8> {
    let (inst, prof) = load_instance(&args.instance)?;
    let nb = SearchBudget::with_max_nodes(args.max_nodes);
    let bundle = run_rule(args.rule, &inst, &prof, args.tiebreak, &args.rx_eps_mode, nb)?;
    let cost = inst.bundle_cost(&bundle);
    println!("rule: {}", args.rule);
    println!("bundle: {}", bundle.sorted_ids(&inst).join(","));
    println!(
        "cost: {} of {}",
        format_decimal(&cost).unwrap_or_else(|| cost.to_string()),
        format_decimal(inst.budget()).unwrap_or_else(|| inst.budget().to_string())
    );
    let sw = social_welfare(&prof, &bundle)?;
    let rp = representation(&prof, &bundle)?;
    let opt_sw = max_social_welfare(&inst, &prof, nb)?;
    let opt_rp = max_representation(&inst, &prof, nb)?;
    if opt_sw > 0 {
        let (u, r) = ratios(&inst, &prof, &bundle, opt_sw, opt_rp)?;
        println!("sw: {sw} of {opt_sw} ({})", decimal6(&u));
        println!("rp: {rp} of {opt_rp} ({})", decimal6(&r));
    } else {
        println!("sw: {sw}\nrp: {rp}");
    }
    let verdict = find_ejr_violation(&inst, &prof, &bundle, resolve_tcap(args.tcap, &inst, &prof))?;
    println!("ejr: {} (|T| <= {})", verdict.state(), verdict.cap);
    Ok(0)
}

fn resolve_tcap(cap: TCap, inst: &PbInstance, prof: &ApprovalProfile) -> usize {
    match cap {
        TCap::Auto => pb_core::fairness::default_t_cap(inst),
        TCap::Full => pb_core::fairness::full_t_cap(inst, prof).max(1),
        TCap::Fixed(c) => c,
    }
}

fn apply_setting(spec: &mut ExperimentSpec, setting: &str) -> Result<(), BenchError> {
    let (key, value) = setting
        .split_once('=')
        .ok_or_else(|| BenchError::Spec(format!("expected KEY=VALUE, got `{setting}`")))?;
    apply(spec, key.trim(), value.trim())
}

fn bench_specs(args: &BenchArgs) -> Result<Vec<ExperimentSpec>, BenchError> {
    let mut specs = if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Spec(format!("{}: {e}", path.display())))?;
        vec![parse_config(&text)?]
    } else if !args.preset.is_empty() {
        args.preset.iter().map(|p| p.spec()).collect()
    } else if let Some(dataset) = &args.dataset {
        let mut text = format!("dataset = {dataset}\n");
        if dataset.starts_with("pabulib:") {
            text.push_str("count = 1\n");
        }
        vec![parse_config(&text)?]
    } else {
        return Err(BenchError::Spec("give --config, --preset or --dataset".into()));
    };
    for spec in &mut specs {
        let overrides = [
            ("rules", args.rules.clone()),
            ("seed", args.seed.map(|v| v.to_string())),
            ("count", args.count.map(|v| v.to_string())),
            ("tiebreak", args.tiebreak.clone()),
            ("tcap", args.tcap.clone()),
            ("max_nodes", args.max_nodes.map(|v| v.to_string())),
            ("rx_eps_mode", args.rx_eps_mode.clone()),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                apply(spec, key, &value)?;
            }
        }
        for setting in &args.settings {
            apply_setting(spec, setting)?;
        }
        if args.timing {
            spec.timing = true;
        }
        if args.out_csv.is_some() {
            spec.out_csv = args.out_csv.clone();
        }
        if args.out_svg.is_some() {
            spec.out_svg = args.out_svg.clone();
        }
        spec.validate()?;
    }
    Ok(specs)
}

fn bench(args: BenchArgs) -> anyhow::Result<u8> {
    let specs = bench_specs(&args)?;
    let mut rows_text = String::new();
    let mut summaries: Vec<Summary> = Vec::new();
    let mut failures = 0;
    for (k, spec) in specs.iter().enumerate() {
        let instances = load_instances(spec)?;
        let rows = run_experiment(spec, &instances)?;
        failures += rows.iter().filter(|r| r.result.is_err()).count();
        let csv = rows_csv(&rows, spec.timing);
        // One header for the combined file.
        rows_text.push_str(if k == 0 { &csv } else { csv.split_once('\n').map_or("", |(_, rest)| rest) });
        summaries.extend(aggregate(&spec.label, &rows)?);
    }
    print!("{}", summary_table(&summaries));
    let first = &specs[0];
    if let Some(path) = &first.out_csv {
        write_file(path, &rows_text)?;
    }
    if let Some(path) = &args.out_summary {
        write_file(path, &summary_csv(&summaries))?;
    }
    if let Some(path) = &first.out_svg {
        write_file(path, &emit_scatter(&summaries)?)?;
    }
    if failures > 0 {
        eprintln!("{failures} rows failed; see the reason column");
        return Ok(1);
    }
    Ok(0)
}

fn generate(args: GenerateArgs) -> anyhow::Result<u8> {
    let mut spec = match (&args.preset, &args.dataset) {
        (Some(preset), _) => preset.spec(),
        (None, Some(name)) => {
            let dataset: Dataset = name.parse()?;
            ExperimentSpec::new(dataset.to_string(), dataset)
        }
        (None, None) => return Err(spec_error("give --preset or --dataset")),
    };
    if !matches!(spec.dataset, Dataset::Euclidean(_) | Dataset::PartyList(_)) {
        return Err(spec_error(format!("cannot generate dataset {}", spec.dataset)));
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(count) = args.count {
        spec.count = count;
    }
    for setting in &args.settings {
        apply_setting(&mut spec, setting)?;
    }
    spec.validate()?;
    let instances = load_instances(&spec)?;
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let files = write_corpus(&spec, &instances)?;
    for (name, text) in &files {
        write_file(&args.out_dir.join(name), text)?;
    }
    println!("wrote {} files to {}", files.len(), args.out_dir.display());
    Ok(0)
}

fn check_ejr(args: CheckEjrArgs) -> anyhow::Result<u8> {
    let (inst, prof) = load_instance(&args.instance)?;
    let ids: Vec<&str> = args.bundle.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let bundle = Bundle::from_ids(&inst, &ids).map_err(|e| BenchError::Spec(e.to_string()))?;
    let verdict = find_ejr_violation(&inst, &prof, &bundle, resolve_tcap(args.tcap, &inst, &prof))?;
    println!("ejr: {} (|T| <= {})", verdict.state(), verdict.cap);
    if let EjrStatus::Violated(w) = &verdict.status {
        println!("group: {} voters ({})", w.voters.len(), w.voters.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(","));
        println!("deserve: {}", w.project_ids(&inst).join(","));
    }
    Ok(0)
}

fn adversarial(args: AdversarialArgs) -> anyhow::Result<u8> {
    let families: Vec<Family> = if args.family == "all" {
        if args.params.is_some() {
            return Err(spec_error("--params needs a single --family"));
        }
        Family::ALL.to_vec()
    } else {
        vec![args.family.parse().map_err(|e: pb_core::Error| BenchError::Spec(e.to_string()))?]
    };
    let nb = SearchBudget::with_max_nodes(args.max_nodes);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["family", "params", "achieved_ratio", "expected_ratio", "bound_value", "pass"])?;
    let mut failed = 0;
    for family in families {
        let points = match &args.params {
            Some(p) => vec![p.clone()],
            None => family.sweep(),
        };
        for params in points {
            let case = build(family, &params).map_err(|e| BenchError::Spec(e.to_string()))?;
            let v = verify(&case, nb)?;
            if !v.pass() {
                failed += 1;
            }
            let bound = match &case.bound {
                BoundValue::Exact(r) => decimal6(r),
                BoundValue::Approx(x) => format!("{x:.6}"),
            };
            w.write_record([
                family.name().to_string(),
                params.to_string(),
                v.achieved_ratio.to_string(),
                case.expected_ratio.to_string(),
                bound,
                v.pass().to_string(),
            ])?;
        }
    }
    let text = String::from_utf8(w.into_inner()?)?;
    match &args.out_csv {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(if failed > 0 { 1 } else { 0 })
}
