//! Command line for the exact transport toolkit.
//!
//! Exit codes: 0 success; 1 internal failure (an output could not be
//! written or an invariant broke); 2 invalid input (unreadable,
//! malformed, or beyond a size guard); 3 cyclic plan support where a
//! forest is required (rerun with --auto-trim); 4 a checked bound
//! failed to hold; 5 a golden example produced an unexpected value.

mod golden;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use otstruct::bottleneck::{w_infinity, w_infinity_bruteforce, ThresholdCertificate};
use otstruct::bounds::{
    alpha_of_model, alpha_uniform, verify_lower_bound, verify_power_bound, BoundReport,
    LowerBoundReport, SUBSET_SUM_GUARD,
};
use otstruct::format::{
    bound_report_to_dto, certificate_to_dto, instance_hash, lower_bound_report_to_dto,
    model_to_dto, parse_instance, parse_plan, plan_to_dto, report_to_json, trace_to_dto,
    BoundReportDto, CertificateDto, LowerBoundReportDto, ModelDto, PlanDto, TraceDto,
};
use otstruct::measure::{CostSpec, Instance};
use otstruct::plan::TransportPlan;
use otstruct::random::{random_instance, rng};
use otstruct::solver::{brute_force_optimal_guarded, solve_optimal, ORACLE_CELL_GUARD};
use otstruct::structure::{
    decompose, is_trim_certified_guarded, minimize_support, reconstruct, DiffusiveModel,
    PeelBranch, PeelTrace, TrimCertificate,
};
use otstruct::{format_rational, parse_rational, Error, Rational};

#[derive(Parser)]
#[command(
    name = "otstruct",
    version,
    about = "Exact discrete optimal transport: plans, support reduction, two-map decompositions, bottleneck values, and bound checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Also write the structured (JSON) result to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Cell guard for exhaustive oracle checks; instances with more
    /// than this many cost cells skip oracle certification.
    #[arg(long, global = true, default_value_t = ORACLE_CELL_GUARD)]
    guard_oracle: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for an optimal plan with its dual certificate.
    Solve(SolveArgs),
    /// Decompose a plan (or a solved instance) into the two-map model.
    Decompose(DecomposeArgs),
    /// Exact bottleneck value with witness plan and infeasibility cut.
    Winf {
        /// Instance file.
        instance: PathBuf,
    },
    /// Check the bottleneck lower bounds on an instance or a random suite.
    Verify(VerifyArgs),
    /// Run the built-in examples and compare against their known exact values.
    Golden {
        /// Directory holding the example instance files.
        #[arg(long, default_value = "instances")]
        dir: PathBuf,
    },
    /// Exhaustive small-instance oracles: exact optimum, all minimal
    /// supports, bottleneck by subset checking.
    Oracle {
        /// Instance file.
        instance: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file.
    instance: PathBuf,
    /// Override the cost with |x - y|^p.
    #[arg(long)]
    p: Option<String>,
    /// Reduce the plan's support after solving; below the oracle guard
    /// the reduced plan is certified minimal.
    #[arg(long)]
    trim: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Instance file (solved first) or plan file.
    path: PathBuf,
    /// Instance file supplying marginals and costs when PATH is a plan.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Reduce a cyclic optimal plan to forest support before
    /// decomposing (needs instance costs).
    #[arg(long)]
    auto_trim: bool,
    /// Override the cost with |x - y|^p.
    #[arg(long)]
    p: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file; omit when using --random.
    instance: Option<PathBuf>,
    /// Random suite: MAX_SIDE COUNT SEED.  OTSTRUCT_SEED overrides SEED.
    #[arg(long, num_args = 3, value_names = ["MAX_SIDE", "COUNT", "SEED"])]
    random: Option<Vec<u64>>,
    /// Exponents to check, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    p: Vec<String>,
}

/// A classified failure: what to print and how to exit.
struct Failure {
    exit: u8,
    message: String,
}

impl Failure {
    fn invalid(err: impl Display) -> Self {
        Failure {
            exit: 2,
            message: err.to_string(),
        }
    }

    fn internal(err: impl Display) -> Self {
        Failure {
            exit: 1,
            message: err.to_string(),
        }
    }
}

/// Errors raised while acting on user input; a cyclic support gets its
/// own exit code because --auto-trim repairs it.
fn classify(err: Error) -> Failure {
    match err {
        Error::CyclicSupport { .. } => Failure {
            exit: 3,
            message: format!("{err}; rerun with --auto-trim"),
        },
        other => Failure::invalid(other),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let emitter = Emitter {
        format: cli.format,
        output: cli.output.as_deref(),
    };
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args, &cli, &emitter),
        Command::Decompose(args) => cmd_decompose(args, &cli, &emitter),
        Command::Winf { instance } => cmd_winf(instance, &cli, &emitter),
        Command::Verify(args) => cmd_verify(args, &cli, &emitter),
        Command::Golden { dir } => golden::cmd_golden(dir, &cli, &emitter),
        Command::Oracle { instance } => cmd_oracle(instance, &cli, &emitter),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.exit)
        }
    }
}

#[derive(Serialize)]
struct ManifestDto {
    command: String,
    inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    guard_oracle: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

fn manifest(command: &str, inputs: &[&Path], seed: Option<u64>, cli: &Cli) -> ManifestDto {
    ManifestDto {
        command: command.into(),
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        seed,
        guard_oracle: cli.guard_oracle,
        output: cli.output.as_ref().map(|p| p.display().to_string()),
    }
}

/// Writes results: text or JSON to stdout, and optionally the JSON to a
/// file.  Identical inputs produce identical bytes on both paths.
struct Emitter<'a> {
    format: Format,
    output: Option<&'a Path>,
}

impl Emitter<'_> {
    fn emit<T: Serialize>(&self, text: &str, doc: &T) -> Result<(), Failure> {
        let json = report_to_json(doc);
        match self.format {
            Format::Text => print!("{text}"),
            Format::Structured => print!("{json}"),
        }
        if let Some(path) = self.output {
            fs::write(path, &json).map_err(Failure::internal)?;
        }
        Ok(())
    }
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<(Instance, Vec<String>), Failure> {
    let (instance, warnings) = parse_instance(&read_to_string(path)?).map_err(Failure::invalid)?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    Ok((instance, warnings))
}

fn apply_power_override(instance: Instance, p: &Option<String>) -> Result<Instance, Failure> {
    match p {
        None => Ok(instance),
        Some(text) => {
            let p = parse_rational(text).map_err(Failure::invalid)?;
            instance
                .with_cost(CostSpec::euclidean(p).map_err(Failure::invalid)?)
                .map_err(Failure::invalid)
        }
    }
}

fn approx_suffix(value: &otstruct::CostValue) -> String {
    match value.as_rational() {
        Some(_) => String::new(),
        None => format!(" (~{:.6})", value.approx()),
    }
}

fn plan_text(plan: &TransportPlan, title: &str) -> String {
    let mut out = format!("{title} ({} arcs):\n", plan.support_size());
    for e in plan.entries() {
        out += &format!("  ({}, {})  {}\n", e.row, e.col, format_rational(&e.mass));
    }
    out
}

#[derive(Serialize)]
struct ReducedDoc {
    plan: PlanDto,
    support: usize,
    /// "trim" (certified minimal), or "unverified" above the oracle guard.
    trimness: String,
}

#[derive(Serialize)]
struct SolveDoc {
    manifest: ManifestDto,
    instance_hash: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
    objective: String,
    objective_approx: f64,
    plan: PlanDto,
    dual_u: Vec<String>,
    dual_v: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reduced: Option<ReducedDoc>,
}

fn cmd_solve(args: &SolveArgs, cli: &Cli, emitter: &Emitter) -> Result<u8, Failure> {
    let (instance, warnings) = read_instance(&args.instance)?;
    let instance = apply_power_override(instance, &args.p)?;
    let (plan, duals) = solve_optimal(&instance);
    let objective = plan.transport_cost(&instance).map_err(Failure::internal)?;
    let reduced = if args.trim {
        let mut reduced = minimize_support(&plan, &duals, &instance).map_err(Failure::internal)?;
        let trimness = match is_trim_certified_guarded(&reduced, &instance, cli.guard_oracle)
            .map_err(Failure::internal)?
        {
            TrimCertificate::Trim => "trim",
            // The plateau search missed; the oracle's minimal plan is
            // optimal, so ship that instead.
            TrimCertificate::NotTrim { witness } => {
                reduced = witness;
                "trim"
            }
            TrimCertificate::Unverifiable => "unverified",
        };
        Some(ReducedDoc {
            support: reduced.support_size(),
            plan: plan_to_dto(&reduced),
            trimness: trimness.into(),
        })
    } else {
        None
    };

    let mut text = format!(
        "instance {} ({} x {})\nobjective: {}{}\n",
        &instance_hash(&instance)[..12],
        instance.m(),
        instance.n(),
        objective,
        approx_suffix(&objective),
    );
    text += &plan_text(&plan, "plan");
    let join = |side: &[otstruct::CostValue]| {
        side.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
    };
    text += &format!("dual u: {}\ndual v: {}\n", join(&duals.u), join(&duals.v));
    if let Some(reduced_doc) = &reduced {
        text += &format!(
            "reduced support: {} arcs ({})\n",
            reduced_doc.support, reduced_doc.trimness
        );
    }
    let doc = SolveDoc {
        manifest: manifest("solve", &[&args.instance], None, cli),
        instance_hash: instance_hash(&instance),
        warnings,
        objective: objective.to_string(),
        objective_approx: objective.approx(),
        plan: plan_to_dto(&plan),
        dual_u: duals.u.iter().map(|c| c.to_string()).collect(),
        dual_v: duals.v.iter().map(|c| c.to_string()).collect(),
        reduced,
    };
    emitter.emit(&text, &doc)?;
    Ok(0)
}

#[derive(Serialize)]
struct DecomposeDoc {
    manifest: ManifestDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    instance_hash: Option<String>,
    plan_support: usize,
    diffusive_support: usize,
    alpha_model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_uniform: Option<String>,
    reconstruction_verified: bool,
    model: ModelDto,
    trace: TraceDto,
}

fn model_text(model: &DiffusiveModel) -> String {
    let atoms = |map: &std::collections::BTreeMap<usize, Rational>| -> String {
        if map.is_empty() {
            return "(empty)".into();
        }
        map.iter()
            .map(|(i, mass)| format!("{i}: {}", format_rational(mass)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let arrows = |map: &std::collections::BTreeMap<usize, usize>| -> String {
        if map.is_empty() {
            return "(empty)".into();
        }
        map.iter()
            .map(|(a, b)| format!("{a} -> {b}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "model:\n  mu_d: {}\n  h1:   {}\n  mu_c: {}\n  nu_d: {}\n  h2:   {}\n  nu_c: {}\n",
        atoms(&model.mu_d),
        arrows(&model.h1),
        atoms(&model.mu_c),
        atoms(&model.nu_d),
        arrows(&model.h2),
        atoms(&model.nu_c),
    )
}

fn trace_text(trace: &PeelTrace) -> String {
    let mut out = String::from("peel trace:\n");
    for (k, step) in trace.steps.iter().enumerate() {
        let rule = match &step.branch {
            PeelBranch::RowEquality { row, col } => format!("row equality ({row}, {col})"),
            PeelBranch::ColEquality { row, col } => format!("col equality ({row}, {col})"),
            PeelBranch::Double { row_leaf, col_leaf } => format!(
                "double peel row ({}, {}) col ({}, {})",
                row_leaf.0, row_leaf.1, col_leaf.0, col_leaf.1
            ),
            PeelBranch::RowOnly { row, col } => format!("row leaf ({row}, {col})"),
            PeelBranch::ColOnly { row, col } => format!("col leaf ({row}, {col})"),
        };
        let residuals = |list: &[(usize, Rational)]| -> String {
            if list.is_empty() {
                return "none".into();
            }
            list.iter()
                .map(|(i, mass)| format!("{i}: {}", format_rational(mass)))
                .collect::<Vec<_>>()
                .join(", ")
        };
        out += &format!(
            "  step {}: {rule}; residual mu {}; residual nu {}\n",
            k + 1,
            residuals(&step.residual_mu),
            residuals(&step.residual_nu),
        );
    }
    out
}

fn cmd_decompose(args: &DecomposeArgs, cli: &Cli, emitter: &Emitter) -> Result<u8, Failure> {
    let text = read_to_string(&args.path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("{}: {e}", args.path.display())))?;
    let keys = value
        .as_object()
        .ok_or_else(|| Failure::invalid("input is not a JSON object"))?;

    // Bare plan documents carry `entries`; solve/oracle output embeds
    // the same shape under `plan`, so those files feed back in directly.
    let embedded = if keys.contains_key("entries") {
        Some(&value)
    } else {
        keys.get("plan").filter(|v| v.is_object())
    };
    let (plan, instance) = if let Some(plan_value) = embedded {
        let plan = parse_plan(&plan_value.to_string()).map_err(Failure::invalid)?;
        let instance = match &args.instance {
            Some(path) => Some(apply_power_override(read_instance(path)?.0, &args.p)?),
            None => None,
        };
        if let Some(instance) = &instance {
            if !plan.is_coupling_of(instance) {
                return Err(Failure::invalid(
                    "plan marginals do not match the instance",
                ));
            }
        }
        let plan = if args.auto_trim {
            let instance = instance.as_ref().ok_or_else(|| {
                Failure::invalid("--auto-trim on a plan file needs --instance for the costs")
            })?;
            let (_, duals) = solve_optimal(instance);
            minimize_support(&plan, &duals, instance).map_err(Failure::invalid)?
        } else {
            plan
        };
        (plan, instance)
    } else if keys.contains_key("mu") {
        let (instance, _) = parse_instance(&text).map_err(Failure::invalid)?;
        let instance = apply_power_override(instance, &args.p)?;
        let (plan, duals) = solve_optimal(&instance);
        let plan = if args.auto_trim {
            minimize_support(&plan, &duals, &instance).map_err(Failure::internal)?
        } else {
            plan
        };
        (plan, Some(instance))
    } else {
        return Err(Failure::invalid(
            "input is neither a plan (entries) nor an instance (mu/nu/cost)",
        ));
    };

    let (model, trace) = decompose(&plan).map_err(classify)?;
    let rebuilt = reconstruct(&model).map_err(Failure::internal)?;
    if rebuilt != plan {
        return Err(Failure::internal("reconstruction does not match the plan"));
    }
    let alpha_model = alpha_of_model(&model).map_err(Failure::internal)?;
    let uniform = match &instance {
        Some(instance) if instance.m() + instance.n() <= SUBSET_SUM_GUARD => {
            Some(alpha_uniform(instance.mu(), instance.nu()).map_err(Failure::internal)?)
        }
        _ => None,
    };

    let mut text = plan_text(&plan, "plan");
    text += &model_text(&model);
    text += &trace_text(&trace);
    text += &format!(
        "diffusive support: {}\nalpha_model: {}\n",
        model.diffusive_support(),
        format_rational(&alpha_model)
    );
    if let Some((alpha, _)) = &uniform {
        text += &format!("alpha_uniform: {}\n", format_rational(alpha));
    }
    text += "reconstruction: verified\n";
    let doc = DecomposeDoc {
        manifest: manifest("decompose", &[&args.path], None, cli),
        instance_hash: instance.as_ref().map(instance_hash),
        plan_support: plan.support_size(),
        diffusive_support: model.diffusive_support(),
        alpha_model: format_rational(&alpha_model),
        alpha_uniform: uniform.as_ref().map(|(a, _)| format_rational(a)),
        reconstruction_verified: true,
        model: model_to_dto(&model),
        trace: trace_to_dto(&trace),
    };
    emitter.emit(&text, &doc)?;
    Ok(0)
}

#[derive(Serialize)]
struct WinfDoc {
    manifest: ManifestDto,
    instance_hash: String,
    certificate: CertificateDto,
}

fn certificate_text(cert: &ThresholdCertificate) -> String {
    let mut text = format!(
        "threshold: {}{}, index {} in the sorted distinct costs\n",
        cert.threshold,
        approx_suffix(&cert.threshold),
        cert.threshold_index,
    );
    text += &plan_text(&cert.witness, "witness");
    match &cert.below {
        None => text += "below: nothing (threshold is the smallest cost)\n",
        Some(cut) => {
            text += &format!(
                "below: at threshold {} max flow {} leaves deficit {}; rows {:?} see only cols {:?}\n",
                cut.threshold,
                format_rational(&cut.max_flow),
                format_rational(&cut.deficit),
                cut.rows,
                cut.cols,
            );
        }
    }
    text
}

fn cmd_winf(path: &Path, cli: &Cli, emitter: &Emitter) -> Result<u8, Failure> {
    let (instance, _) = read_instance(path)?;
    let cert = w_infinity(&instance);
    let doc = WinfDoc {
        manifest: manifest("winf", &[path], None, cli),
        instance_hash: instance_hash(&instance),
        certificate: certificate_to_dto(&cert),
    };
    emitter.emit(&certificate_text(&cert), &doc)?;
    Ok(0)
}

type Evaluation = otstruct::Result<(LowerBoundReport, Vec<BoundReport>)>;

fn evaluate_one(instance: &Instance, ps: &[Rational]) -> Evaluation {
    let lower = verify_lower_bound(instance)?;
    let powered = ps
        .iter()
        .map(|p| verify_power_bound(instance, p))
        .collect::<otstruct::Result<Vec<_>>>()?;
    Ok((lower, powered))
}

/// Checks the batch across worker threads; instances are independent
/// and results are merged back in input order, so the output bytes do
/// not depend on the thread count.
fn evaluate_batch(instances: &[(String, Instance)], ps: &[Rational]) -> Vec<Evaluation> {
    let workers = std::thread::available_parallelism()
        .map(std::num::NonZeroUsize::get)
        .unwrap_or(1)
        .min(instances.len());
    if workers <= 1 {
        return instances
            .iter()
            .map(|(_, instance)| evaluate_one(instance, ps))
            .collect();
    }
    let chunk_size = instances.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = instances
            .chunks(chunk_size)
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|(_, instance)| evaluate_one(instance, ps))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|handle| handle.join().expect("worker finishes"))
            .collect()
    })
}

#[derive(Serialize)]
struct InstanceVerifyDoc {
    name: String,
    instance_hash: String,
    m: usize,
    n: usize,
    lower: LowerBoundReportDto,
    powered: Vec<BoundReportDto>,
}

#[derive(Serialize)]
struct VerifyDoc {
    manifest: ManifestDto,
    reports: Vec<InstanceVerifyDoc>,
    all_hold: bool,
}

fn cmd_verify(args: &VerifyArgs, cli: &Cli, emitter: &Emitter) -> Result<u8, Failure> {
    let ps = args
        .p
        .iter()
        .map(|text| parse_rational(text).map_err(Failure::invalid))
        .collect::<Result<Vec<Rational>, Failure>>()?;
    let mut instances: Vec<(String, Instance)> = Vec::new();
    if let Some(path) = &args.instance {
        instances.push((path.display().to_string(), read_instance(path)?.0));
    }
    let mut seed = None;
    if let Some(random) = &args.random {
        let (max_side, count) = (random[0] as usize, random[1]);
        let effective = match std::env::var("OTSTRUCT_SEED") {
            Err(_) => random[2],
            Ok(text) => text
                .parse::<u64>()
                .map_err(|e| Failure::invalid(format!("OTSTRUCT_SEED: {e}")))?,
        };
        seed = Some(effective);
        let mut stream = rng(effective);
        for k in 0..count {
            instances.push((
                format!("random {k}"),
                random_instance(&mut stream, max_side.max(1), max_side.max(1)),
            ));
        }
    }
    if instances.is_empty() {
        return Err(Failure::invalid(
            "nothing to verify: give an instance file or --random MAX_SIDE COUNT SEED",
        ));
    }

    let inputs: Vec<&Path> = args.instance.iter().map(PathBuf::as_path).collect();
    let evaluations = evaluate_batch(&instances, &ps);
    let mut reports = Vec::new();
    let mut text = String::new();
    let mut all_hold = true;
    for ((name, instance), evaluation) in instances.iter().zip(evaluations) {
        let (lower, powered_reports) = evaluation.map_err(Failure::invalid)?;
        all_hold &= lower.holds;
        text += &format!(
            "{name} ({} x {}): lower bound {} (w_c = {}, alpha = {}, w_inf = {}{})\n",
            instance.m(),
            instance.n(),
            if lower.holds { "holds" } else { "VIOLATED" },
            lower.w_c,
            format_rational(&lower.alpha),
            lower.w_inf,
            if lower.tight { "; tight" } else { "" },
        );
        let mut powered = Vec::new();
        for (p, report) in ps.iter().zip(&powered_reports) {
            all_hold &= report.holds();
            if let Some(uniform) = &report.uniform {
                all_hold &= uniform.holds;
            }
            text += &format!(
                "  p = {}: {} (lhs = {}, rhs = {}{})\n",
                format_rational(p),
                if report.holds() { "holds" } else { "VIOLATED" },
                report.lhs,
                report.rhs,
                if report.tight { "; tight" } else { "" },
            );
            powered.push(bound_report_to_dto(report));
        }
        reports.push(InstanceVerifyDoc {
            name: name.clone(),
            instance_hash: instance_hash(instance),
            m: instance.m(),
            n: instance.n(),
            lower: lower_bound_report_to_dto(&lower),
            powered,
        });
    }
    text += &format!(
        "{} instance(s), {} exponent(s): {}\n",
        instances.len(),
        ps.len(),
        if all_hold { "all bounds hold" } else { "BOUND VIOLATED" },
    );
    let doc = VerifyDoc {
        manifest: manifest("verify", &inputs, seed, cli),
        reports,
        all_hold,
    };
    emitter.emit(&text, &doc)?;
    Ok(if all_hold { 0 } else { 4 })
}

#[derive(Serialize)]
struct OracleDoc {
    manifest: ManifestDto,
    instance_hash: String,
    optimal_value: String,
    optimal_value_approx: f64,
    minimal_support: usize,
    minimal_support_plans: usize,
    plan: PlanDto,
    /// Bottleneck threshold by exhaustive subset checking; absent when
    /// the instance has more rows than the subset guard.
    #[serde(skip_serializing_if = "Option::is_none")]
    bottleneck: Option<String>,
}

fn cmd_oracle(path: &Path, cli: &Cli, emitter: &Emitter) -> Result<u8, Failure> {
    let (instance, _) = read_instance(path)?;
    let result =
        brute_force_optimal_guarded(&instance, cli.guard_oracle).map_err(Failure::invalid)?;
    let bottleneck = match w_infinity_bruteforce(&instance) {
        Ok(threshold) => Some(threshold),
        Err(Error::InstanceTooLarge { .. }) => None,
        Err(other) => return Err(Failure::internal(other)),
    };
    let best = &result.minimal_support_plans[0];
    let mut text = format!(
        "optimum: {}{}\nminimal support: {} arcs across {} plan(s)\n",
        result.optimal_value,
        approx_suffix(&result.optimal_value),
        result.minimal_support,
        result.minimal_support_plans.len(),
    );
    text += &plan_text(best, "first minimal plan");
    match &bottleneck {
        Some(threshold) => text += &format!("bottleneck: {threshold}\n"),
        None => text += "bottleneck: skipped (more rows than the subset guard)\n",
    }
    let doc = OracleDoc {
        manifest: manifest("oracle", &[path], None, cli),
        instance_hash: instance_hash(&instance),
        optimal_value: result.optimal_value.to_string(),
        optimal_value_approx: result.optimal_value.approx(),
        minimal_support: result.minimal_support,
        minimal_support_plans: result.minimal_support_plans.len(),
        plan: plan_to_dto(best),
        bottleneck: bottleneck.map(|t| t.to_string()),
    };
    emitter.emit(&text, &doc)?;
    Ok(0)
}
