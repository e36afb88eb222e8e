//! Command-line front end.
//!
//! Exit codes: 0 success, 1 infeasible or node limit reached, 2 input or
//! validation error, 3 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;

use crate::document::{parse_norm_net, parse_representation, serialize_norm_net};
use crate::generate::{generate_random_net, GeneratorParams};
use crate::ilp::{encode_problem, export_lp, InForceMode, Problem, ProblemConfig, RepresentationChoice, Weights};
use crate::norm_net::NormNet;
use crate::rational::{format_decimal, format_exact, parse_rational, Rational, DECIMAL_DIGITS};
use crate::solve::{solve_problem, SolveOptions, SolveReport, SolveStatus};
use crate::sweep::{sweep, write_csv, Grid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "normsel", version, about = "Select sound, maximally representative norm systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a norm-net document.
    Validate { file: PathBuf },
    /// Solve a norm-selection problem.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Print the solve report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write the 0/1 program in LP format.
    ExportLp {
        file: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output file (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a random norm net.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        branching: usize,
        /// Exclusivity probability per unrelated pair.
        #[arg(long, default_value_t = 0.0)]
        px: f64,
        /// Substitutability probability per unrelated pair.
        #[arg(long, default_value_t = 0.0)]
        ps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve over a grid of budgets or weights and write CSV.
    Sweep {
        file: PathBuf,
        /// Budgets as lo:hi:step, inclusive.
        #[arg(long, value_name = "LO:HI:STEP", conflicts_with = "weight_grid", required_unless_present = "weight_grid")]
        budget_range: Option<String>,
        /// Weight step over the simplex.
        #[arg(long, value_name = "STEP")]
        weight_grid: Option<String>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone)]
enum RepresentationSpec {
    Inclusion,
    Generalisation,
    Custom(PathBuf),
}

impl FromStr for RepresentationSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inclusion" => Ok(RepresentationSpec::Inclusion),
            "generalisation" => Ok(RepresentationSpec::Generalisation),
            _ => match s.strip_prefix("custom:") {
                Some(path) if !path.is_empty() => Ok(RepresentationSpec::Custom(path.into())),
                _ => Err(format!("expected inclusion, generalisation or custom:<file>, got `{s}`")),
            },
        }
    }
}

fn parse_exact(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone)]
struct WeightList(Vec<Rational>);

fn parse_weights(s: &str) -> Result<WeightList, String> {
    let parts = s.split(',').map(parse_exact).collect::<Result<Vec<_>, _>>()?;
    if !(2..=3).contains(&parts.len()) {
        return Err(format!("expected wr,wc or wr,wc,wv, got `{s}`"));
    }
    Ok(WeightList(parts))
}

#[derive(Debug, Clone, Args)]
struct ProblemArgs {
    #[arg(long)]
    problem: Problem,
    /// inclusion, generalisation or custom:<file>
    #[arg(long)]
    representation: RepresentationSpec,
    #[arg(long, value_parser = parse_exact)]
    budget: Option<Rational>,
    /// wr,wc or wr,wc,wv as exact decimals.
    #[arg(long, value_parser = parse_weights)]
    weights: Option<WeightList>,
    /// ignore, preserve or flexible.
    #[arg(long, default_value = "flexible")]
    in_force: InForceMode,
    /// Report every optimal norm system.
    #[arg(long)]
    all_optima: bool,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_optima: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    node_limit: Option<u64>,
    /// Search on the current thread only.
    #[arg(long)]
    sequential: bool,
}

impl ProblemArgs {
    fn config(&self) -> Result<ProblemConfig, String> {
        let representation = match &self.representation {
            RepresentationSpec::Inclusion => RepresentationChoice::Inclusion,
            RepresentationSpec::Generalisation => RepresentationChoice::Generalisation,
            RepresentationSpec::Custom(path) => {
                let text = read(path)?;
                RepresentationChoice::Custom(parse_representation(&text).map_err(|e| format!("{}: {e}", path.display()))?)
            }
        };
        let weights = match &self.weights {
            Some(WeightList(w)) => Weights::new(w[0].clone(), w[1].clone(), w.get(2).cloned().unwrap_or_else(Rational::zero)),
            None => ProblemConfig::mnsp(RepresentationChoice::Inclusion).weights,
        };
        Ok(ProblemConfig {
            problem: self.problem,
            representation,
            budget: self.budget.clone(),
            weights,
            in_force_mode: self.in_force,
        })
    }

    fn options(&self) -> SolveOptions {
        SolveOptions {
            enumerate_all_optima: self.all_optima,
            max_optima: usize::try_from(self.max_optima).unwrap_or(usize::MAX),
            node_limit: self.node_limit,
            parallel: !self.sequential,
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_net(path: &Path) -> Result<NormNet, String> {
    parse_norm_net(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_output(path: Option<&Path>, text: &[u8], out: &mut dyn Write) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => out.write_all(text).map_err(|e| e.to_string()),
    }
}

/// Runs the CLI on `args` (without the program name) and returns the exit
/// code.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("normsel")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_INPUT
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match command {
        Command::Validate { file } => {
            let net = load_net(&file)?;
            writeln!(
                out,
                "valid: {} norms, {} generalisation, {} exclusivity, {} substitutability pairs, {} in force",
                net.len(),
                net.relations().generalisation.len(),
                net.relations().exclusivity.len(),
                net.relations().substitutability.len(),
                net.in_force().len()
            )
            .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Solve { file, problem, json } => {
            let net = load_net(&file)?;
            let report = solve_problem(&net, &problem.config()?, &problem.options()).map_err(|e| e.to_string())?;
            if json {
                let text = serde_json::to_string_pretty(&report).expect("reports serialise");
                writeln!(out, "{text}").map_err(io)?;
            } else {
                print_report(&report, problem.all_optima, out).map_err(io)?;
            }
            Ok(match report.status {
                SolveStatus::Optimal => EXIT_OK,
                _ => EXIT_INFEASIBLE,
            })
        }
        Command::ExportLp { file, problem, output } => {
            let net = load_net(&file)?;
            let model = encode_problem(&net, &problem.config()?).map_err(|e| e.to_string())?;
            write_output(output.as_deref(), export_lp(&model).as_bytes(), out)?;
            Ok(EXIT_OK)
        }
        Command::Gen { n, depth, branching, px, ps, seed, output } => {
            let params = GeneratorParams { n, depth, branching, p_x: px, p_s: ps, seed };
            let net = generate_random_net(&params).map_err(|e| e.to_string())?;
            write_output(output.as_deref(), serialize_norm_net(&net).as_bytes(), out)?;
            Ok(EXIT_OK)
        }
        Command::Sweep { file, budget_range, weight_grid, problem, output } => {
            let net = load_net(&file)?;
            let grid = match (budget_range, weight_grid) {
                (Some(range), _) => Grid::parse_budget_range(&range),
                (None, Some(step)) => Grid::parse_weight_step(&step),
                (None, None) => unreachable!("clap requires one grid"),
            }
            .map_err(|e| e.to_string())?;
            let rows = sweep(&net, &problem.config()?, &grid, &problem.options()).map_err(|e| e.to_string())?;
            let mut csv = Vec::new();
            write_csv(&rows, &mut csv).map_err(|e| e.to_string())?;
            write_output(output.as_deref(), &csv, out)?;
            Ok(EXIT_OK)
        }
    }
}

fn print_report(report: &SolveReport, all: bool, out: &mut dyn Write) -> std::io::Result<()> {
    let status = match report.status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::NodeLimitReached => "node limit reached",
    };
    writeln!(out, "status: {status}")?;
    if let Some(obj) = &report.objective {
        writeln!(out, "objective: {} ({})", format_decimal(obj, DECIMAL_DIGITS), format_exact(obj))?;
    }
    if report.status == SolveStatus::Optimal {
        if all {
            let more = if report.truncated { ", more exist" } else { "" };
            writeln!(out, "optima: {}{more}", report.optima.len())?;
            for system in &report.optima {
                writeln!(out, "  {system}")?;
            }
        } else if let Some(system) = report.optima.first() {
            writeln!(out, "optimum: {system}")?;
        }
    }
    writeln!(out, "nodes: {}", report.stats.nodes)
}
