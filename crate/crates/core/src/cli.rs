//! Command-line front end. Reports go to stdout (or `--output`), diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid instance, 3 state space over the cap,
//! 4 LP failure, 5 a verified property failed, 6 policy does not fit the instance.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dp::{concavity_check, solve_full_dp, solve_subproblem_dp};
use crate::error::{Error, Result};
use crate::eval::{
    check_negative_cylinder, evaluate_block, search_dependency_counterexample, simulate, SearchSpace,
    MAX_CYLINDER_ELEMENTS,
};
use crate::lp::{
    build_lp_exante, build_lp_hierarchy, build_lp_optimal, solve_built, write_lp, BuiltLp, LpBackend, LpSolution,
};
use crate::model::{load_instance, Block, Instance, LaminarInstance, DEFAULT_STATE_CAP};
use crate::myerson::revenue_transform;
use crate::ptas::{ptas_laminar, ptas_production, Branch, PtasConfig};
use crate::rounding::{
    compose_policies, extract_pricing, mark_laminar, root_guard, Marking, MarkingSummary, PricingPolicy,
};

#[derive(Debug, Parser)]
#[command(name = "laminar-pricing", version, about = "Posted-price policies under laminar capacity constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Alg {
    Dp,
    LpOpt,
    ExAnte,
    Hierarchy,
    Ptas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Auto,
    Simplex,
    Decomposition,
}

impl From<Backend> for LpBackend {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Auto => LpBackend::Auto,
            Backend::Simplex => LpBackend::Simplex,
            Backend::Decomposition => LpBackend::Decomposition,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value = "ptas")]
    pub alg: Alg,
    /// Accuracy parameter; sets the capacity scale `1 − ε` and `δ = ε²/ln(1/ε)`.
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    /// Replaces the derived δ in the size threshold.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Capacity scale for `ex-ante` and `hierarchy`.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub state_cap: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub backend: Backend,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance and print the objective, branch, marking and policy.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        args: SolveArgs,
        /// Also write the policy document here.
        #[arg(long)]
        policy_out: Option<PathBuf>,
        /// Also write the LP in text form here (LP-based algorithms only).
        #[arg(long)]
        lp_out: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a policy on seeded random draws.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check relaxation ordering, rounding exactness, negative dependency and feasibility.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// Policy to check against the objective of `--alg`.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[command(flatten)]
        args: SolveArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Search small laminar trees for a pick that lowers a later optimal price.
    Search {
        /// Restrict to nested prefix bins.
        #[arg(long)]
        chains: bool,
        #[arg(long, default_value_t = 3)]
        max_bins: usize,
        #[arg(long, default_value_t = 3)]
        max_cap: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replace every value by its ironed virtual value.
    Transform {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInstance(_) => 2,
        Error::Sizing { .. } => 3,
        Error::Lp(_) | Error::IterationLimit(_) | Error::CorruptSolution(_) => 4,
        Error::PolicyMismatch(_) => 6,
        _ => 1,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(exit_code(&e), e.to_string())
    }
}

/// Everything `solve` produces.
pub struct Solved {
    pub objective: f64,
    pub branch: Option<Branch>,
    pub delta: Option<f64>,
    pub marking: Option<MarkingSummary>,
    pub policy: PricingPolicy,
    pub lp: Option<(BuiltLp, LpSolution)>,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    alg: &'a str,
    objective: f64,
    branch: Option<Branch>,
    delta: Option<f64>,
    marking: Option<&'a MarkingSummary>,
    policy: crate::rounding::PolicyDoc,
}

fn alg_name(alg: Alg) -> &'static str {
    match alg {
        Alg::Dp => "dp",
        Alg::LpOpt => "lp-opt",
        Alg::ExAnte => "ex-ante",
        Alg::Hierarchy => "hierarchy",
        Alg::Ptas => "ptas",
    }
}

fn config(args: &SolveArgs) -> PtasConfig {
    PtasConfig {
        epsilon: args.epsilon,
        delta_override: args.delta,
        state_cap: args.state_cap,
        backend: args.backend.into(),
    }
}

fn lp_route(built: BuiltLp, backend: LpBackend, n: usize, guards: Vec<crate::rounding::Guard>) -> Result<Solved> {
    let sol = solve_built(&built, backend)?;
    let policy = PricingPolicy::new(n, extract_pricing(&sol, &built)?, guards)?;
    Ok(Solved {
        objective: sol.objective,
        branch: None,
        delta: None,
        marking: None,
        policy,
        lp: Some((built, sol)),
    })
}

pub fn solve_instance(inst: &Instance, args: &SolveArgs) -> Result<Solved> {
    let lam = inst.to_laminar()?;
    let cfg = config(args);
    let backend = cfg.backend;
    let n = lam.num_elements();
    match args.alg {
        Alg::Dp => {
            let (table, policy) = solve_full_dp(&lam, args.state_cap)?;
            Ok(Solved {
                objective: table.initial_value(),
                branch: None,
                delta: None,
                marking: None,
                policy,
                lp: None,
            })
        }
        Alg::LpOpt => lp_route(build_lp_optimal(&lam, args.state_cap)?, backend, n, Vec::new()),
        Alg::ExAnte => {
            let p = inst.as_production().ok_or_else(|| {
                Error::InvalidInstance(vec!["kind: ex-ante needs a production instance".into()])
            })?;
            let built = build_lp_exante(p, args.scale, args.state_cap)?;
            lp_route(built, backend, n, vec![root_guard(&lam, p.shipping)])
        }
        Alg::Hierarchy => {
            let delta = cfg.delta()?;
            let mk = mark_laminar(&lam, delta)?;
            let built = build_lp_hierarchy(&lam, &mk, args.scale, args.state_cap)?;
            let sol = solve_built(&built, backend)?;
            let policy = compose_policies(&lam, &mk, extract_pricing(&sol, &built)?)?;
            Ok(Solved {
                objective: sol.objective,
                branch: None,
                delta: Some(delta),
                marking: Some(mk.summary()),
                policy,
                lp: Some((built, sol)),
            })
        }
        Alg::Ptas => {
            let out = match inst {
                Instance::Production(p) => ptas_production(p, &cfg)?,
                Instance::Laminar(l) => ptas_laminar(l, &cfg)?,
            };
            Ok(Solved {
                objective: out.lp_objective,
                branch: Some(out.branch),
                delta: Some(out.delta),
                marking: out.marking,
                policy: out.policy,
                lp: Some((out.built, out.solution)),
            })
        }
    }
}

fn read_instance(path: &Path) -> std::result::Result<Instance, Failure> {
    load_instance(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn read_policy(path: &Path, inst: &Instance) -> std::result::Result<PricingPolicy, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(6, format!("{}: {e}", path.display())))?;
    PricingPolicy::from_json(&text, inst).map_err(|e| Failure::new(6, format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    let res = match path {
        Some(p) => std::fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::new(1, e.to_string()))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> std::result::Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Failure::new(1, "--threads must be at least 1")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Failure::new(1, e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: &'static str,
    pub detail: String,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    passed: bool,
    checks: &'a [Check],
}

fn check(name: &str, ok: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        status: if ok { "pass" } else { "fail" },
        detail,
    }
}

fn skip(name: &str, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        status: "skip",
        detail: detail.into(),
    }
}

/// Sum of the policy's blocks evaluated exactly on their own; equals the LP objective when the
/// policy was rounded from that LP.
fn blockwise_welfare(policy: &PricingPolicy, lam: &LaminarInstance) -> Result<f64> {
    policy
        .blocks()
        .iter()
        .map(|bp| Ok(evaluate_block(bp, lam.elements())?.0))
        .sum()
}

fn relaxation_chain(inst: &Instance, lam: &LaminarInstance, args: &SolveArgs) -> Result<Check> {
    let cap = args.state_cap;
    let backend: LpBackend = args.backend.into();
    let dp = solve_full_dp(lam, cap)?.0.initial_value();
    let lp1 = solve_built(&build_lp_optimal(lam, cap)?, backend)?.objective;
    let mut notes = vec![format!("dp {dp}"), format!("lp-opt {lp1}")];
    let mut ok = (lp1 - dp).abs() <= 1e-6;
    if let Some(p) = inst.as_production() {
        let lp2 = solve_built(&build_lp_exante(p, 1.0, cap)?, backend)?.objective;
        ok &= lp2 >= dp - 1e-6;
        notes.push(format!("ex-ante {lp2}"));
    }
    let mk = mark_laminar(lam, config(args).delta()?)?;
    let lp4 = solve_built(&build_lp_hierarchy(lam, &mk, 1.0, cap)?, backend)?.objective;
    ok &= lp4 >= dp - 1e-6;
    notes.push(format!("hierarchy {lp4}"));
    let small = solve_built(&build_lp_hierarchy(lam, &Marking::all_small(lam), 1.0, cap)?, backend)?.objective;
    ok &= (small - lp1).abs() <= 1e-6;
    Ok(check("relaxation-chain", ok, notes.join(", ")))
}

fn rounding_exactness(lam: &LaminarInstance, args: &SolveArgs) -> Result<Check> {
    let built = build_lp_optimal(lam, args.state_cap)?;
    let sol = solve_built(&built, args.backend.into())?;
    let policies = extract_pricing(&sol, &built)?;
    let mut gap: f64 = 0.0;
    let mut welfare = 0.0;
    for (layout, bp) in built.blocks.iter().zip(&policies) {
        let (w, trace) = evaluate_block(bp, &built.dists)?;
        welfare += w;
        for (pos, vars) in layout.y.iter().enumerate() {
            for (s, &v) in vars {
                gap = gap.max((trace[pos].get(s).copied().unwrap_or(0.0) - sol.values[v]).abs());
            }
        }
    }
    let ok = gap <= 1e-7 && (welfare - sol.objective).abs() <= 1e-6;
    Ok(check(
        "rounding-exactness",
        ok,
        format!("lp {} policy {welfare}, largest state-probability gap {gap:e}", sol.objective),
    ))
}

/// Chain sub-problems: every production type, or a laminar tree that is a single path.
fn chain_blocks(inst: &Instance, lam: &LaminarInstance) -> Vec<Block> {
    match inst {
        Instance::Production(p) => (0..p.num_types())
            .map(|j| Block::for_type(p, j))
            .filter(|b| !b.is_empty())
            .collect(),
        Instance::Laminar(_) if lam.bins().iter().all(|b| b.child_bins.len() <= 1) => vec![Block::whole(lam)],
        Instance::Laminar(_) => Vec::new(),
    }
}

fn dependency_checks(inst: &Instance, lam: &LaminarInstance) -> Result<Vec<Check>> {
    let blocks = chain_blocks(inst, lam);
    if blocks.is_empty() {
        return Ok(vec![
            skip("negative-cylinder", "instance is not a chain"),
            skip("concavity", "instance is not a chain"),
        ]);
    }
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut where_ = String::new();
    let mut checked = 0;
    let mut concave = true;
    let mut concavity_note = String::from("one-dimensional tables checked");
    for b in &blocks {
        if b.len() > MAX_CYLINDER_ELEMENTS {
            continue;
        }
        for shift in [-1.0, 0.0, 0.7] {
            let r = check_negative_cylinder(b, lam.elements(), shift, 1e-9)?;
            checked += 1;
            if r.gap > worst {
                worst = r.gap;
                where_ = format!("{} shift {shift} subset {:?}", b.scope(), r.worst_subset);
            }
            if b.is_count_state() {
                let table = solve_subproblem_dp(b, lam.elements(), shift, DEFAULT_STATE_CAP)?;
                let c = concavity_check(&table)?;
                if !c.holds {
                    concave = false;
                    concavity_note = format!("{} shift {shift}: {:?}", b.scope(), c.worst);
                }
            }
        }
    }
    if checked == 0 {
        return Ok(vec![
            skip("negative-cylinder", "chains too long to enumerate"),
            skip("concavity", "chains too long to enumerate"),
        ]);
    }
    let mut out = vec![check(
        "negative-cylinder",
        worst <= 1e-9,
        format!("{checked} chain/shift pairs, worst gap {worst:e} at {where_}"),
    )];
    if blocks.iter().any(|b| b.is_count_state()) {
        out.push(check("concavity", concave, concavity_note));
    } else {
        out.push(skip("concavity", "state is not one-dimensional"));
    }
    Ok(out)
}

fn verify(
    inst: &Instance,
    policy: Option<&PricingPolicy>,
    args: &SolveArgs,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> std::result::Result<Vec<Check>, Failure> {
    let lam = inst.to_laminar()?;
    let mut checks = Vec::new();
    let guarded = |name: &str, r: Result<Check>| match r {
        Ok(c) => Ok(c),
        Err(e @ Error::Sizing { .. }) => Ok(skip(name, e.to_string())),
        Err(e) => Err(Failure::from(e)),
    };
    checks.push(guarded("relaxation-chain", relaxation_chain(inst, &lam, args))?);
    checks.push(guarded("rounding-exactness", rounding_exactness(&lam, args))?);
    if let Some(pol) = policy {
        let r = solve_instance(inst, args).and_then(|s| {
            let w = blockwise_welfare(pol, &lam)?;
            Ok(check(
                "rounding-exactness (policy file)",
                (w - s.objective).abs() <= 1e-6,
                format!("{} objective {}, policy blocks evaluate to {w}", alg_name(args.alg), s.objective),
            ))
        });
        checks.push(guarded("rounding-exactness (policy file)", r)?);
    }
    match dependency_checks(inst, &lam) {
        Ok(cs) => checks.extend(cs),
        Err(e @ Error::Sizing { .. }) => checks.push(skip("negative-cylinder", e.to_string())),
        Err(e) => return Err(e.into()),
    }
    let sim_policy = match policy {
        Some(p) => Ok(p.clone()),
        None => solve_instance(
            inst,
            &SolveArgs {
                alg: Alg::Ptas,
                ..args.clone()
            },
        )
        .map(|s| s.policy),
    };
    match sim_policy {
        Ok(pol) => {
            let report = with_threads(threads, || simulate(&pol, &lam, trials, seed))??;
            checks.push(check(
                "feasibility",
                report.total_violations() == 0,
                format!("{} trials, {} bin violations", report.trials, report.total_violations()),
            ));
        }
        Err(e @ Error::Sizing { .. }) => checks.push(skip("feasibility", e.to_string())),
        Err(e) => return Err(e.into()),
    }
    Ok(checks)
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Solve {
            instance,
            args,
            policy_out,
            lp_out,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let solved = solve_instance(&inst, &args)?;
            if let Some(p) = &policy_out {
                std::fs::write(p, solved.policy.to_json()).map_err(|e| Failure::new(1, e.to_string()))?;
            }
            if let Some(p) = &lp_out {
                let (built, _) = solved
                    .lp
                    .as_ref()
                    .ok_or_else(|| Failure::new(1, "--lp-out needs an LP-based --alg"))?;
                std::fs::write(p, write_lp(&built.model)?).map_err(|e| Failure::new(1, e.to_string()))?;
            }
            let report = SolveReport {
                alg: alg_name(args.alg),
                objective: solved.objective,
                branch: solved.branch,
                delta: solved.delta,
                marking: solved.marking.as_ref(),
                policy: solved.policy.to_doc(),
            };
            let text = serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n";
            emit(out, output.as_deref(), &text)
        }
        Command::Simulate {
            instance,
            policy,
            trials,
            seed,
            threads,
            format,
            output,
        } => {
            if trials == 0 {
                return Err(Failure::new(1, "--trials must be at least 1"));
            }
            let inst = read_instance(&instance)?;
            let pol = read_policy(&policy, &inst)?;
            let lam = inst.to_laminar()?;
            let report = with_threads(threads, || simulate(&pol, &lam, trials, seed))??;
            let text = match format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_csv()?,
            };
            emit(out, output.as_deref(), &text)
        }
        Command::Verify {
            instance,
            policy,
            args,
            trials,
            seed,
            threads,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let pol = match &policy {
                Some(p) => Some(read_policy(p, &inst)?),
                None => None,
            };
            let checks = verify(&inst, pol.as_ref(), &args, trials, seed, threads)?;
            let failed: Vec<&Check> = checks.iter().filter(|c| c.status == "fail").collect();
            let text = serde_json::to_string_pretty(&VerifyReport {
                passed: failed.is_empty(),
                checks: &checks,
            })
            .map_err(Error::from)?
                + "\n";
            emit(out, output.as_deref(), &text)?;
            if failed.is_empty() {
                Ok(())
            } else {
                for c in &failed {
                    let _ = writeln!(err, "property failed: {}: {}", c.name, c.detail);
                }
                let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
                Err(Failure::new(5, format!("failed: {}", names.join(", "))))
            }
        }
        Command::Search {
            chains,
            max_bins,
            max_cap,
            output,
        } => {
            let space = SearchSpace {
                chains_only: chains,
                max_bins,
                max_cap,
                ..SearchSpace::five_elements()
            };
            let found = search_dependency_counterexample(&space)?;
            if found.hits.is_empty() {
                let _ = writeln!(err, "no hit among {} trees", found.examined);
            }
            let text = serde_json::to_string_pretty(&found).map_err(Error::from)? + "\n";
            emit(out, output.as_deref(), &text)
        }
        Command::Transform { instance, output } => {
            let inst = read_instance(&instance)?;
            let t = revenue_transform(&inst).map_err(|e| Failure::new(2, e.to_string()))?;
            emit(out, output.as_deref(), &(t.to_json() + "\n"))
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 1;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
