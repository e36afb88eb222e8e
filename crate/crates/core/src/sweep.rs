//! Budget and weight sweeps, one independent solve per grid point.
//!
//! CSV columns: `point, budget, w_r, w_c, w_v, status, objective,
//! objective_exact, optimum, optima, nodes`. Decimals carry twelve
//! significant digits. `optimum` is the first canonical optimum and `optima`
//! lists all of them separated by `;`. A point whose configuration or solve
//! fails has status `error: <message>` and empty result columns.

use std::io::Write;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ilp::{Problem, ProblemConfig, Weights};
use crate::norm_net::NormNet;
use crate::par;
use crate::rational::{format_decimal, format_exact, parse_rational, Rational, DECIMAL_DIGITS};
use crate::solve::{solve_problem, SolveOptions, SolveReport, SolveStatus};

pub const CSV_HEADER: [&str; 11] =
    ["point", "budget", "w_r", "w_c", "w_v", "status", "objective", "objective_exact", "optimum", "optima", "nodes"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grid {
    /// Budgets `lo, lo + step, ...` up to and including `hi`.
    Budget { lo: Rational, hi: Rational, step: Rational },
    /// Every weight vector on the simplex with coordinates in multiples of
    /// `step`, `w_r` outermost. Only the representation and cost weights vary
    /// for `mnsplb`.
    Weights { step: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

impl Grid {
    /// Parses `lo:hi:step`.
    pub fn parse_budget_range(text: &str) -> Result<Grid, SweepError> {
        let bad = || SweepError::InvalidGrid(format!("budget range `{text}` is not lo:hi:step"));
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else { return Err(bad()) };
        let num = |s: &str| parse_rational(s).map_err(|_| bad());
        Ok(Grid::Budget { lo: num(lo)?, hi: num(hi)?, step: num(step)? })
    }

    pub fn parse_weight_step(text: &str) -> Result<Grid, SweepError> {
        let step = parse_rational(text).map_err(|_| SweepError::InvalidGrid(format!("weight step `{text}` is not a number")))?;
        Ok(Grid::Weights { step })
    }

    /// Problem configurations for every grid point, in grid order.
    pub fn points(&self, base: &ProblemConfig) -> Result<Vec<ProblemConfig>, SweepError> {
        let bad = |m: &str| Err(SweepError::InvalidGrid(m.to_string()));
        match self {
            Grid::Budget { lo, hi, step } => {
                if !step.is_positive() {
                    return bad("budget step must be positive");
                }
                if lo > hi {
                    return bad("budget range is empty");
                }
                let mut out = Vec::new();
                let mut b = lo.clone();
                while b <= *hi {
                    out.push(ProblemConfig { budget: Some(b.clone()), ..base.clone() });
                    b += step;
                }
                Ok(out)
            }
            Grid::Weights { step } => {
                if !step.is_positive() || *step > Rational::one() {
                    return bad("weight step must lie in (0, 1]");
                }
                let ticks = |upto: &Rational| {
                    let mut v = Vec::new();
                    let mut w = Rational::zero();
                    while w <= *upto {
                        v.push(w.clone());
                        w += step;
                    }
                    v
                };
                let one = Rational::one();
                let mut out = Vec::new();
                match base.problem {
                    Problem::Mnsp => return bad("a weight grid needs mnsplb or vmnsplb"),
                    Problem::Mnsplb => {
                        for w_r in ticks(&one) {
                            let weights = Weights::new(w_r.clone(), &one - &w_r, Rational::zero());
                            out.push(ProblemConfig { weights, ..base.clone() });
                        }
                    }
                    Problem::Vmnsplb => {
                        for w_r in ticks(&one) {
                            for w_c in ticks(&(&one - &w_r)) {
                                let w_v = &one - &w_r - &w_c;
                                out.push(ProblemConfig { weights: Weights::new(w_r.clone(), w_c, w_v), ..base.clone() });
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: usize,
    pub config: ProblemConfig,
    pub outcome: Result<SolveReport, String>,
}

pub fn sweep(net: &NormNet, base: &ProblemConfig, grid: &Grid, options: &SolveOptions) -> Result<Vec<SweepRow>, SweepError> {
    let configs = grid.points(base)?;
    let indexed: Vec<(usize, ProblemConfig)> = configs.into_iter().enumerate().collect();
    Ok(par::map(&indexed, options.parallel, |(point, config)| SweepRow {
        point: *point,
        config: config.clone(),
        outcome: solve_problem(net, config, options).map_err(|e| e.to_string()),
    }))
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::NodeLimitReached => "node_limit_reached",
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let dec = |r: &Rational| format_decimal(r, DECIMAL_DIGITS);
    for row in rows {
        let c = &row.config;
        let mut record = vec![
            row.point.to_string(),
            c.budget.as_ref().map(dec).unwrap_or_default(),
            dec(&c.weights.representation),
            dec(&c.weights.cost),
            dec(&c.weights.value),
        ];
        match &row.outcome {
            Ok(report) => {
                record.push(status_name(report.status).to_string());
                record.push(report.objective.as_ref().map(dec).unwrap_or_default());
                record.push(report.objective.as_ref().map(format_exact).unwrap_or_default());
                record.push(report.optima.first().map(ToString::to_string).unwrap_or_default());
                record.push(report.optima.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"));
                record.push(report.stats.nodes.to_string());
            }
            Err(message) => {
                record.push(format!("error: {message}"));
                record.extend(std::iter::repeat_n(String::new(), 5));
            }
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::airport_with_costs;
    use crate::ilp::RepresentationChoice;
    use crate::norm_net::NormSystem;
    use crate::rational::{int, ratio};

    fn base() -> ProblemConfig {
        ProblemConfig::mnsplb(RepresentationChoice::Inclusion, int(1), ratio(1, 2), ratio(1, 2))
    }

    #[test]
    fn budget_points_include_the_upper_end() {
        let grid = Grid::parse_budget_range("4:10:3").unwrap();
        let budgets: Vec<_> = grid.points(&base()).unwrap().into_iter().map(|c| c.budget.unwrap()).collect();
        assert_eq!(budgets, [int(4), int(7), int(10)]);
        let one = Grid::parse_budget_range("4:5:9").unwrap().points(&base()).unwrap();
        assert_eq!(one.len(), 1);
        assert!(Grid::parse_budget_range("5:4:1").unwrap().points(&base()).is_err());
        assert!(Grid::parse_budget_range("5:4").is_err());
    }

    #[test]
    fn weight_grid_sizes() {
        let grid = Grid::parse_weight_step("0.25").unwrap();
        assert_eq!(grid.points(&base()).unwrap().len(), 5);
        let v = ProblemConfig { problem: Problem::Vmnsplb, ..base() };
        let points = grid.points(&v).unwrap();
        assert_eq!(points.len(), 15);
        assert!(points.iter().all(|p| p.validate().is_ok()));
        assert!(grid.points(&ProblemConfig::mnsp(RepresentationChoice::Inclusion)).is_err());
    }

    #[test]
    fn rows_match_direct_solves() {
        let net = airport_with_costs([6, 2, 5, 2, 2]);
        let grid = Grid::Budget { lo: int(4), hi: int(10), step: int(1) };
        let options = SolveOptions::default();
        let rows = sweep(&net, &base(), &grid, &options).unwrap();
        assert_eq!(rows.len(), 7);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.point, i);
            let direct = solve_problem(&net, &row.config, &options).unwrap();
            assert_eq!(row.outcome.clone().unwrap().without_timing(), direct.without_timing());
        }
        let first = rows[0].outcome.as_ref().unwrap();
        assert_eq!(first.optima, [NormSystem::new(["n2"]), NormSystem::new(["n4"]), NormSystem::new(["n5"])]);
    }

    #[test]
    fn errors_stay_in_their_row() {
        let net = airport_with_costs([0, 2, 5, 2, 2]);
        let grid = Grid::Budget { lo: int(0), hi: int(1), step: int(1) };
        let rows = sweep(&net, &base(), &grid, &SolveOptions::default()).unwrap();
        assert!(rows[0].outcome.is_err());
        assert!(rows[1].outcome.is_ok());
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("0,0,0.5,0.5,0,\"error: "), "{}", lines[1]);
        assert!(lines[2].starts_with("1,1,0.5,0.5,0,optimal,"), "{}", lines[2]);
    }
}
