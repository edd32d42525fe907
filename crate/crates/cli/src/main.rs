//! `fkd`: solve, inspect and generate fair k-division instances.
//!
//! Exit codes: 0 success, 1 invalid input or failed recognition, 2 usage
//! error, 3 a resource cap was hit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fkd_core::approx::{fptas, Epsilon, ExactMethod};
use fkd_core::convex::{
    convex_profiles, parse_ordering, recognize_convex, solve_convex, stage_structure, validate_convex_ordering,
    ConvexOrdering,
};
use fkd_core::cw::{check_expression_matches, cw_profiles, parse_k_expression, solve_cliquewidth, CliqueExpression};
use fkd_core::gen;
use fkd_core::oracle::{brute_force_optimum, brute_force_profiles};
use fkd_core::tin::{
    clique_tree_of_chordal, parse_tree_decomposition, solve_tin, tin_profiles, validate_td, TreeDecomposition,
};
use fkd_core::{parse_instance, ConflictInstance, Error, Limits, ProfileSet, Solution, SolveReport};

#[derive(Parser, Debug)]
#[command(name = "fkd", version, about = "Fair k-division under conflicts")]
struct Cli {
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for the parallel solvers (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest number of profiles any single set may hold.
    #[arg(long, global = true)]
    profile_cap: Option<usize>,
    /// Largest (k+1)^n the brute-force oracle may enumerate.
    #[arg(long, global = true)]
    oracle_cap: Option<u128>,
    /// Search-node budget for certifying a bag's independence number.
    #[arg(long, global = true)]
    alpha_cap: Option<u64>,
    /// Seed for the generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximum satisfaction level and an optimal coloring.
    Solve(SolveArgs),
    /// Every attainable profit profile, one per line.
    Profiles(SolveArgs),
    /// Find a convex ordering or report why none exists.
    Recognize {
        instance: PathBuf,
    },
    /// Check an instance and any supplied ordering, expression or decomposition.
    Validate {
        instance: PathBuf,
        #[command(flatten)]
        side: SideInputs,
    },
    /// A (1-ε)-approximate solution by profit scaling.
    Approx {
        instance: PathBuf,
        /// ε as a decimal or a fraction, strictly between 0 and 1.
        #[arg(long)]
        epsilon: String,
        #[arg(long, value_enum)]
        method: ApproxMethod,
        #[command(flatten)]
        side: SideInputs,
    },
    /// Write a random instance to standard output.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
}

#[derive(Args, Debug, Default)]
struct SideInputs {
    /// Ordering file (`A: ...` and `B: ...` lines).
    #[arg(long)]
    ordering: Option<PathBuf>,
    /// Clique-width expression file.
    #[arg(long)]
    expression: Option<PathBuf>,
    /// Tree decomposition in `.td` format.
    #[arg(long)]
    td: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    #[command(flatten)]
    side: SideInputs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Auto,
    Brute,
    Edgeless,
    Convex,
    Cw,
    Tin,
    Chordal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ApproxMethod {
    Convex,
    Cw,
    Tin,
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Convex bipartite graph; the identity ordering goes to --ordering-out.
    Convex {
        #[arg(long)]
        na: usize,
        #[arg(long)]
        nb: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        max_profit: u64,
        #[arg(long)]
        ordering_out: Option<PathBuf>,
    },
    /// Partial k-tree; its decomposition goes to --td-out.
    Ktree {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        max_profit: u64,
        /// Percentage of k-tree edges to delete.
        #[arg(long, default_value_t = 0)]
        delete_percent: u32,
        #[arg(long)]
        td_out: Option<PathBuf>,
    },
    /// Graph built by a random expression, written to --expression-out.
    Cw {
        #[arg(long)]
        leaves: usize,
        #[arg(long)]
        labels: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        max_profit: u64,
        #[arg(long)]
        expression_out: Option<PathBuf>,
    },
    /// Erdős–Rényi graph.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        edge_percent: u32,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        max_profit: u64,
    },
}

/// Failures, each tied to an exit code.
enum Failure {
    Input(String),
    Usage(String),
    Cap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> CliResult<ConflictInstance> {
    parse_instance(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

struct Loaded {
    ordering: Option<ConvexOrdering>,
    expression: Option<CliqueExpression>,
    td: Option<TreeDecomposition>,
}

fn load_side(inst: &ConflictInstance, side: &SideInputs) -> CliResult<Loaded> {
    let ordering = match &side.ordering {
        Some(p) => {
            let (a, b) = parse_ordering(&read(p)?)?;
            Some(validate_convex_ordering(inst, &a, &b)?)
        }
        None => None,
    };
    let expression = match &side.expression {
        Some(p) => Some(parse_k_expression(&read(p)?)?),
        None => None,
    };
    let td = match &side.td {
        Some(p) => Some(parse_tree_decomposition(&read(p)?)?),
        None => None,
    };
    Ok(Loaded {
        ordering,
        expression,
        td,
    })
}

fn need<'a, T>(x: &'a Option<T>, flag: &str, method: &str) -> CliResult<&'a T> {
    x.as_ref()
        .ok_or_else(|| Failure::Usage(format!("method {method} needs {flag}")))
}

/// The order `auto` tries: edgeless, convex recognition, supplied
/// expression or decomposition, then brute force.
fn auto_method(inst: &ConflictInstance, side: &Loaded, limits: &Limits) -> CliResult<Method> {
    if inst.is_edgeless() {
        return Ok(Method::Edgeless);
    }
    if side.ordering.is_some() || recognize_convex(inst).is_ok() {
        return Ok(Method::Convex);
    }
    if side.expression.is_some() {
        return Ok(Method::Cw);
    }
    if side.td.is_some() {
        return Ok(Method::Tin);
    }
    let required = (inst.k() as u128 + 1).checked_pow(inst.n() as u32);
    if required.is_some_and(|r| r <= limits.enumeration_cap) {
        return Ok(Method::Brute);
    }
    Err(Failure::Input(
        "no applicable solver: graph is not convex bipartite, no expression or decomposition was supplied, and brute force exceeds its cap".into(),
    ))
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Auto => "auto",
        Method::Brute => "brute",
        Method::Edgeless => "edgeless",
        Method::Convex => "convex",
        Method::Cw => "cw",
        Method::Tin => "tin",
        Method::Chordal => "chordal",
    }
}

fn resolve(args: &SolveArgs, limits: &Limits) -> CliResult<(ConflictInstance, Loaded, Method)> {
    let inst = load_instance(&args.instance)?;
    let side = load_side(&inst, &args.side)?;
    let method = match args.method {
        Method::Auto => auto_method(&inst, &side, limits)?,
        Method::Edgeless if !inst.is_edgeless() => {
            return Err(Failure::Input("method edgeless needs a graph without edges".into()))
        }
        m => m,
    };
    Ok((inst, side, method))
}

fn solve(args: &SolveArgs, limits: &Limits) -> CliResult<(Solution, Method)> {
    let (inst, side, method) = resolve(args, limits)?;
    let sol = match method {
        Method::Brute => brute_force_optimum(&inst, limits)?,
        Method::Edgeless => solve_convex(&inst, None, limits)?,
        Method::Convex => solve_convex(&inst, side.ordering.as_ref(), limits)?,
        Method::Cw => solve_cliquewidth(&inst, need(&side.expression, "--expression", "cw")?, limits)?,
        Method::Tin => solve_tin(&inst, need(&side.td, "--td", "tin")?, limits)?,
        Method::Chordal => solve_tin(&inst, &clique_tree_of_chordal(&inst)?, limits)?,
        Method::Auto => unreachable!("auto is resolved first"),
    };
    Ok((sol, method))
}

fn profiles(args: &SolveArgs, limits: &Limits) -> CliResult<(ProfileSet, Method)> {
    let (inst, side, method) = resolve(args, limits)?;
    let set = match method {
        Method::Brute => brute_force_profiles(&inst, limits)?,
        Method::Edgeless => convex_profiles(&inst, None, limits)?,
        Method::Convex => convex_profiles(&inst, side.ordering.as_ref(), limits)?,
        Method::Cw => cw_profiles(&inst, need(&side.expression, "--expression", "cw")?, limits)?,
        Method::Tin => tin_profiles(&inst, need(&side.td, "--td", "tin")?, limits)?,
        Method::Chordal => tin_profiles(&inst, &clique_tree_of_chordal(&inst)?, limits)?,
        Method::Auto => unreachable!("auto is resolved first"),
    };
    Ok((set, method))
}

fn human_solution(sol: &Solution, method: &str, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "optimum: {}", sol.optimum);
    let profile: Vec<String> = sol.profile.as_slice().iter().map(u64::to_string).collect();
    let _ = writeln!(out, "profile: {}", profile.join(" "));
    for (j, class) in sol.witness.to_one_based().iter().enumerate() {
        let ids: Vec<String> = class.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "agent {}: {}", j + 1, ids.join(" "));
    }
    let _ = writeln!(out, "method: {method}");
    for (key, value) in extra {
        let _ = writeln!(out, "{key}: {value}");
    }
    let _ = writeln!(
        out,
        "dp-cells: {}\nprofiles-stored: {}\nelapsed-ms: {}",
        sol.stats.dp_cells, sol.stats.profiles_stored, sol.stats.elapsed_ms
    );
    out
}

fn run(cli: &Cli) -> CliResult<String> {
    let defaults = Limits::default();
    let limits = Limits {
        profile_cap: cli.profile_cap.unwrap_or(defaults.profile_cap),
        enumeration_cap: cli.oracle_cap.unwrap_or(defaults.enumeration_cap),
        alpha_node_cap: cli.alpha_cap.unwrap_or(defaults.alpha_node_cap),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Solve(args) => {
            let (sol, method) = solve(args, &limits)?;
            Ok(if cli.json {
                SolveReport::new(&sol, method_name(method)).to_json() + "\n"
            } else {
                human_solution(&sol, method_name(method), &[])
            })
        }
        Command::Profiles(args) => {
            let (set, method) = profiles(args, &limits)?;
            Ok(if cli.json {
                let rows: Vec<Vec<u64>> = set.sorted().iter().map(|q| q.as_slice().to_vec()).collect();
                let v = serde_json::json!({ "method": method_name(method), "profiles": rows });
                serde_json::to_string_pretty(&v).expect("json") + "\n"
            } else {
                set.to_dump()
            })
        }
        Command::Recognize { instance } => {
            let inst = load_instance(instance)?;
            let co = recognize_convex(&inst)?;
            Ok(if cli.json {
                let one = |xs: &[usize]| xs.iter().map(|v| v + 1).collect::<Vec<_>>();
                let v = serde_json::json!({ "A": one(co.a_order()), "B": one(co.b()) });
                serde_json::to_string_pretty(&v).expect("json") + "\n"
            } else {
                co.to_text()
            })
        }
        Command::Validate { instance, side } => {
            let inst = load_instance(instance)?;
            let loaded = load_side(&inst, side)?;
            let mut facts: Vec<(&str, serde_json::Value)> = vec![
                ("n", inst.n().into()),
                ("m", inst.edges().len().into()),
                ("k", inst.k().into()),
                ("Q", inst.max_total_profit().into()),
            ];
            if let Some(co) = &loaded.ordering {
                facts.push(("stages", stage_structure(co).stages().into()));
            }
            if let Some(expr) = &loaded.expression {
                check_expression_matches(expr, &inst)?;
                facts.push(("labels", expr.labels().into()));
            }
            if let Some(td) = &loaded.td {
                let info = validate_td(&inst, td, &limits)?;
                facts.push(("width", info.width.into()));
                facts.push(("independence", info.independence.into()));
            }
            Ok(if cli.json {
                let map: serde_json::Map<String, serde_json::Value> =
                    facts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
                serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("json") + "\n"
            } else {
                let mut out = String::from("valid\n");
                for (k, v) in facts {
                    let _ = writeln!(out, "{k}: {v}");
                }
                out
            })
        }
        Command::Approx {
            instance,
            epsilon,
            method,
            side,
        } => {
            let eps: Epsilon = epsilon.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let inst = load_instance(instance)?;
            let loaded = load_side(&inst, side)?;
            let exact = match method {
                ApproxMethod::Convex => ExactMethod::Convex(loaded.ordering.as_ref()),
                ApproxMethod::Cw => ExactMethod::Cw(need(&loaded.expression, "--expression", "cw")?),
                ApproxMethod::Tin => ExactMethod::Tin(need(&loaded.td, "--td", "tin")?),
            };
            let outcome = fptas(&inst, eps, exact, &limits)?;
            let calls = outcome.calls;
            let sol = outcome.into_solution();
            let name = format!("approx-{}", exact.name());
            let guarantee = 1.0 - eps.as_f64();
            Ok(if cli.json {
                let mut report = SolveReport::new(&sol, &name);
                report.epsilon = Some(eps.as_f64());
                report.guarantee = Some(guarantee);
                report.to_json() + "\n"
            } else {
                human_solution(
                    &sol,
                    &name,
                    &[
                        ("epsilon", eps.to_string()),
                        ("guarantee", format!("value >= {guarantee} * optimum")),
                        ("solver-calls", calls.to_string()),
                    ],
                )
            })
        }
        Command::Gen { kind } => generate(kind, cli.seed),
    }
}

fn generate(kind: &GenKind, seed: u64) -> CliResult<String> {
    let positive_k = |k: usize| {
        if k == 0 {
            Err(Failure::Usage("--k must be at least 1".into()))
        } else {
            Ok(())
        }
    };
    match *kind {
        GenKind::Convex {
            na,
            nb,
            k,
            max_profit,
            ref ordering_out,
        } => {
            positive_k(k)?;
            let (inst, co) = gen::gen_convex_bipartite(na, nb, k, max_profit, seed);
            if let Some(p) = ordering_out {
                write(p, &co.to_text())?;
            }
            Ok(inst.to_text())
        }
        GenKind::Ktree {
            n,
            width,
            k,
            max_profit,
            delete_percent,
            ref td_out,
        } => {
            positive_k(k)?;
            if delete_percent > 100 {
                return Err(Failure::Usage("--delete-percent must be at most 100".into()));
            }
            let (inst, td) = gen::gen_partial_ktree(n, width, k, max_profit, delete_percent, seed)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(p) = td_out {
                write(p, &td.to_text())?;
            }
            Ok(inst.to_text())
        }
        GenKind::Cw {
            leaves,
            labels,
            k,
            max_profit,
            ref expression_out,
        } => {
            positive_k(k)?;
            if leaves == 0 || labels == 0 || labels > fkd_core::cw::MAX_LABELS {
                return Err(Failure::Usage(format!(
                    "--leaves must be positive and --labels in 1..={}",
                    fkd_core::cw::MAX_LABELS
                )));
            }
            let (inst, expr) = gen::gen_cw_instance(leaves, labels, k, max_profit, seed);
            if let Some(p) = expression_out {
                write(p, &expr.to_text())?;
            }
            Ok(inst.to_text())
        }
        GenKind::Random {
            n,
            edge_percent,
            k,
            max_profit,
        } => {
            positive_k(k)?;
            if edge_percent > 100 {
                return Err(Failure::Usage("--edge-percent must be at most 100".into()));
            }
            Ok(gen::gen_random_graph(n, k, edge_percent, max_profit, seed).to_text())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("resource cap: {msg}");
            ExitCode::from(3)
        }
    }
}
