//! Command-line entry point: generate instances, run the solver, compare
//! variants, export the MILP and certify solutions.
//!
//! Every subcommand is file-in/file-out and deterministic given identical
//! files and seeds. Logs go to standard error; data goes to files or
//! standard output.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wsps_core::alnds::{solve, OperatorStats, SearchParams};
use wsps_core::exact::{
    brute_force_solve_with_limits, certify_milp_solution, export_milp, solution_to_values,
    OracleLimits,
};
use wsps_core::experiment::{run_manifest, Manifest, ReportFormat};
use wsps_core::generator::{
    generate_instance, generate_synthetic_network, load_network, CapacityClass, InstanceSpec,
};
use wsps_core::model::{
    evaluate_objective, read_instance, validate_instance, validate_solution, write_instance,
    CostBreakdown, Instance, Solution, VariantConfig,
};

/// Exit code used when validation or certification finds violations.
const EXIT_VIOLATIONS: u8 = 2;

#[derive(Parser)]
#[command(
    name = "wsps",
    about = "Warehouse-sharing network design: solver, oracles and benchmarks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file from a network or a synthetic spec
    Generate(GenerateArgs),
    /// Run the adaptive search on one instance
    Solve(SolveArgs),
    /// Run a manifest of replicated experiments and emit metric tables
    Bench(BenchArgs),
    /// Export the mixed-integer model as LP text
    ExportMilp(ExportMilpArgs),
    /// Check a solution file against every exported constraint row
    Certify(CertifyArgs),
    /// Exact optimum of a tiny instance by exhaustive enumeration
    Oracle(OracleArgs),
    /// Validate an instance file, and optionally a solution for it
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Distance matrix file (whitespace-delimited dense matrix)
    #[arg(long, requires_all = ["flows", "candidates"])]
    distances: Option<PathBuf>,
    /// Flow matrix file
    #[arg(long)]
    flows: Option<PathBuf>,
    /// Candidate warehouse id list file
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Generate a synthetic network with this many nodes instead
    #[arg(long, conflicts_with = "distances")]
    synthetic_nodes: Option<usize>,
    /// Candidate warehouse count of the synthetic network
    #[arg(long, default_value_t = 16)]
    synthetic_candidates: usize,
    /// Seed of the synthetic network
    #[arg(long, default_value_t = 0)]
    network_seed: u64,
    #[arg(long)]
    warehouses: usize,
    #[arg(long)]
    factories: usize,
    #[arg(long)]
    customers: usize,
    /// Capacity class: c, m, s or l
    #[arg(long)]
    capacity_class: String,
    /// Sampling seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output instance file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// wspsdp, sa or wi
    #[arg(long, default_value = "wspsdp")]
    variant: String,
    /// Overrides the seed in the parameter file
    #[arg(long)]
    seed: Option<u64>,
    /// Search parameter file (JSON); defaults apply when omitted
    #[arg(long)]
    params: Option<PathBuf>,
    /// Output result file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment manifest (JSON)
    #[arg(long)]
    manifest: PathBuf,
    /// Worker threads for replications and instances
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the manifest's report format: csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct ExportMilpArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "wspsdp")]
    variant: String,
    /// Output LP file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Solution file produced by solve or oracle
    #[arg(long)]
    solution: PathBuf,
    /// Overrides the variant recorded in the solution file
    #[arg(long)]
    variant: Option<String>,
    /// Optional JSON report output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "wspsdp")]
    variant: String,
    #[arg(long)]
    out: PathBuf,
    /// Enumeration guard: maximum non-warehouse nodes
    #[arg(long, default_value_t = 6)]
    max_nodes: usize,
    /// Enumeration guard: maximum warehouses
    #[arg(long, default_value_t = 3)]
    max_warehouses: usize,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Also validate this solution against the instance
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Variant for solution validation (overrides the solution file)
    #[arg(long)]
    variant: Option<String>,
}

/// On-disk solution record shared by solve, oracle, certify and validate.
#[derive(Serialize, Deserialize)]
struct SolutionFile {
    version: u32,
    variant: VariantConfig,
    cost: CostBreakdown,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elapsed_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_multi_allocation: Option<usize>,
    solution: Solution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    operator_stats: Option<OperatorStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost_trajectory: Option<Vec<f64>>,
}

const SOLUTION_FORMAT_VERSION: u32 = 1;

fn parse_variant(s: &str) -> Result<VariantConfig> {
    VariantConfig::parse_tag(s)
        .ok_or_else(|| anyhow!("unknown variant {s:?}; expected wspsdp, sa or wi"))
}

fn load_instance(path: &Path) -> Result<Instance> {
    let inst = read_instance(path).with_context(|| format!("reading {}", path.display()))?;
    let report = validate_instance(&inst);
    if !report.is_ok() {
        bail!("instance {} is invalid:\n{report}", path.display());
    }
    Ok(inst)
}

fn read_solution_file(path: &Path) -> Result<SolutionFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: SolutionFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if file.version != SOLUTION_FORMAT_VERSION {
        bail!("unknown solution format version {}", file.version);
    }
    Ok(file)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let class = CapacityClass::parse_letter(&args.capacity_class).ok_or_else(|| {
        anyhow!(
            "unknown capacity class {:?}; expected c, m, s or l",
            args.capacity_class
        )
    })?;
    let net = match (&args.distances, args.synthetic_nodes) {
        (Some(d), None) => load_network(
            d,
            args.flows.as_ref().expect("clap enforces"),
            args.candidates.as_ref().expect("clap enforces"),
        )?,
        (None, Some(n)) => {
            generate_synthetic_network(n, args.synthetic_candidates, args.network_seed)?
        }
        _ => bail!("provide either --distances/--flows/--candidates or --synthetic-nodes"),
    };
    let spec = InstanceSpec {
        num_warehouses: args.warehouses,
        num_factories: args.factories,
        num_customers: args.customers,
        capacity_class: class,
        seed: args.seed,
    };
    let inst = generate_instance(&net, &spec)?;
    write_instance(&inst, &args.out)?;
    eprintln!("wrote instance {} ({})", args.out.display(), spec.name());
    Ok(0)
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let variant = parse_variant(&args.variant)?;
    let mut params = match &args.params {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<SearchParams>(&text)
                .with_context(|| format!("parsing {}", p.display()))?
        }
        None => SearchParams::default(),
    };
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    let result = solve(&inst, variant, &params)?;
    eprintln!(
        "solved {} [{variant}] seed {}: total {:.2} in {:.2}s",
        args.instance.display(),
        params.seed,
        result.best_cost.total,
        result.elapsed_seconds
    );
    write_json(
        &SolutionFile {
            version: SOLUTION_FORMAT_VERSION,
            variant,
            cost: result.best_cost,
            seed: Some(params.seed),
            elapsed_seconds: Some(result.elapsed_seconds),
            n_multi_allocation: Some(result.n_multi_allocation),
            solution: result.best_solution,
            operator_stats: Some(result.operator_stats),
            cost_trajectory: Some(result.cost_trajectory),
        },
        &args.out,
    )?;
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    let mut manifest = Manifest::from_path(&args.manifest)?;
    if let Some(fmt) = &args.format {
        manifest.format = ReportFormat::parse_tag(fmt)
            .ok_or_else(|| anyhow!("unknown format {fmt:?}; expected csv or json"))?;
    }
    let rows = run_manifest(&manifest)?;
    eprintln!(
        "ran {} instance(s) x {} variant(s), {} replication(s); report in {}",
        manifest.instances.len(),
        manifest.variants.len(),
        manifest.replications,
        manifest.output_dir
    );
    for row in &rows {
        eprintln!(
            "  {}: S_best {:.2}, S_ave {:.2}, %R_SD {:.2}{}{}",
            row.instance,
            row.s_best,
            row.s_ave,
            row.pct_r_sd,
            row.pct_s_sa
                .map(|v| format!(", %S_SA {v:.2}"))
                .unwrap_or_default(),
            row.pct_s_wi
                .map(|v| format!(", %S_WI {v:.2}"))
                .unwrap_or_default(),
        );
    }
    Ok(0)
}

fn cmd_export_milp(args: ExportMilpArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let variant = parse_variant(&args.variant)?;
    let (model, text) = export_milp(&inst, variant);
    std::fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "wrote {} ({} variables, {} rows)",
        args.out.display(),
        model.num_variables(),
        model.num_rows()
    );
    Ok(0)
}

fn cmd_certify(args: CertifyArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let file = read_solution_file(&args.solution)?;
    let variant = match &args.variant {
        Some(v) => parse_variant(v)?,
        None => file.variant,
    };
    let (model, _) = export_milp(&inst, variant);
    let values = solution_to_values(&inst, &file.solution, variant);
    let report = certify_milp_solution(&model, &values)?;
    if let Some(out) = &args.out {
        write_json(&report, out)?;
    }
    let violated: Vec<_> = report.violated_rows().collect();
    if violated.is_empty() && report.domain_violations.is_empty() {
        eprintln!(
            "certified: objective {:.6}, {} rows all within tolerance",
            report.objective_value,
            report.rows.len()
        );
        Ok(0)
    } else {
        eprintln!(
            "error: {} violated row(s), {} domain violation(s), max violation {:.3e}",
            violated.len(),
            report.domain_violations.len(),
            report.max_violation
        );
        for row in violated.iter().take(10) {
            eprintln!("  {}: activity {} vs rhs {}", row.name, row.activity, row.rhs);
        }
        Ok(EXIT_VIOLATIONS)
    }
}

fn cmd_oracle(args: OracleArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let variant = parse_variant(&args.variant)?;
    let limits = OracleLimits {
        max_non_warehouse: args.max_nodes,
        max_warehouses: args.max_warehouses,
    };
    let (solution, cost) = brute_force_solve_with_limits(&inst, variant, limits)?;
    eprintln!("optimum [{variant}]: total {:.6}", cost.total);
    write_json(
        &SolutionFile {
            version: SOLUTION_FORMAT_VERSION,
            variant,
            cost,
            seed: None,
            elapsed_seconds: None,
            n_multi_allocation: Some(wsps_core::model::count_multi_allocation_nodes(&solution)),
            solution,
            operator_stats: None,
            cost_trajectory: None,
        },
        &args.out,
    )?;
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<u8> {
    let inst = read_instance(&args.instance)
        .with_context(|| format!("reading {}", args.instance.display()))?;
    let report = validate_instance(&inst);
    if !report.is_ok() {
        eprintln!(
            "error: instance {} is invalid:\n{report}",
            args.instance.display()
        );
        return Ok(EXIT_VIOLATIONS);
    }
    eprintln!("instance {} is valid", args.instance.display());
    if let Some(solution_path) = &args.solution {
        let file = read_solution_file(solution_path)?;
        let variant = match &args.variant {
            Some(v) => parse_variant(v)?,
            None => file.variant,
        };
        let feas = validate_solution(&inst, &file.solution, variant);
        if !feas.is_feasible() {
            eprintln!("error: solution violates constraints [{variant}]:\n{feas}");
            return Ok(EXIT_VIOLATIONS);
        }
        let cost = evaluate_objective(&inst, &file.solution)?;
        eprintln!(
            "solution is feasible [{variant}]: total {:.6} (file says {:.6})",
            cost.total, file.cost.total
        );
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::ExportMilp(args) => cmd_export_milp(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
