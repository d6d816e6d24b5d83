use chrono::NaiveDate;
use rayon::prelude::*;

use super::functional::{assemble_functional, QuadraticForm};
use super::linalg::conjugate_gradient;
use super::problem::{GridFunction, QrmConfig, QrmProblem, SolveMethod, DIRECT_SOLVE_LIMIT};
use crate::error::{Error, Result};
use crate::market_data::OptionWindow;

/// Result of one window's solve.
#[derive(Debug, Clone, PartialEq)]
pub struct QrmSolution {
    pub u: GridFunction,
    /// One-day-ahead option price estimate.
    pub forecast: f64,
    /// Discrete L2 norm of `P_h u`.
    pub residual_norm: f64,
    /// Minimized functional value.
    pub objective: f64,
}

/// Tolerance on the relative normal-equation residual of direct solves.
const DIRECT_TOL: f64 = 1e-12;
const REFINEMENT_STEPS: usize = 3;

/// Returns the unique minimizer of `form`.
///
/// Solves for the correction `u − G` first, then polishes `u` against the
/// full normal equations with iterative refinement.
pub fn minimize(form: &QuadraticForm, config: &QrmConfig) -> Result<GridFunction> {
    let n = form.n_unknowns();
    let direct = match config.method {
        SolveMethod::Direct => true,
        SolveMethod::ConjugateGradient => false,
        SolveMethod::Auto => n < DIRECT_SOLVE_LIMIT,
    };
    let a = form.matrix();
    let b = form.rhs();
    let background = form.unknowns(form.background());
    let tol = if direct { DIRECT_TOL } else { config.cg_tol };

    let chol = if direct { Some(a.cholesky()?) } else { None };
    let solve = |rhs: &[f64]| -> Result<Vec<f64>> {
        match &chol {
            Some(c) => Ok(c.solve(rhs)),
            None => Ok(conjugate_gradient(
                a,
                rhs,
                config.cg_tol,
                config.cg_max_iter,
                form.level_size(),
            )?
            .x),
        }
    };
    let correction = solve(form.correction_rhs())?;
    let mut u: Vec<f64> = background
        .iter()
        .zip(&correction)
        .map(|(g, w)| g + w)
        .collect();

    for _ in 0..REFINEMENT_STEPS {
        if a.relative_residual(&u, b) <= tol {
            break;
        }
        let mut au = vec![0.0; n];
        a.mul_vec(&u, &mut au);
        let r: Vec<f64> = b.iter().zip(&au).map(|(b, a)| b - a).collect();
        for (uk, dk) in u.iter_mut().zip(solve(&r)?) {
            *uk += dk;
        }
    }
    Ok(form.grid_from_unknowns(&u))
}

/// Spatial average of `u` on the final time level (the next trading day).
pub fn forecast_price(solution: &GridFunction, problem: &QrmProblem) -> Result<f64> {
    if solution.nx() != problem.nx || solution.nt() != problem.nt {
        return Err(Error::invalid(format!(
            "solution grid {}×{} does not match problem grid {}×{}",
            solution.nx(),
            solution.nt(),
            problem.nx,
            problem.nt
        )));
    }
    let last = solution.time_level(problem.nt - 1);
    Ok(last.iter().sum::<f64>() / last.len() as f64)
}

/// Full pipeline for one window: ratios, boundary fit, functional, minimizer, forecast.
pub fn solve_window(window: &OptionWindow, config: &QrmConfig) -> Result<QrmSolution> {
    let problem = QrmProblem::from_window(window, config)?;
    solve_problem(&problem, config)
}

pub fn solve_problem(problem: &QrmProblem, config: &QrmConfig) -> Result<QrmSolution> {
    let form = assemble_functional(problem)?;
    let u = minimize(&form, config)?;
    let forecast = forecast_price(&u, problem)?;
    Ok(QrmSolution {
        residual_norm: form.residual_norm(&u),
        objective: form.evaluate(&u).max(0.0),
        forecast,
        u,
    })
}

/// One row of the forecast CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    pub option_id: String,
    /// Date of "today" in the window.
    pub date: NaiveDate,
    pub forecast: f64,
    pub residual_norm: f64,
    pub objective: f64,
}

pub const FORECAST_HEADER: &str = "option_id,date,forecast,residual_norm,objective";

impl ForecastRecord {
    pub fn new(window: &OptionWindow, solution: &QrmSolution) -> Self {
        ForecastRecord {
            option_id: window.option_id.clone(),
            date: window.today().date,
            forecast: solution.forecast,
            residual_norm: solution.residual_norm,
            objective: solution.objective,
        }
    }
}

/// Solves every window on a pool of `jobs` threads. Output order follows input order.
pub fn solve_windows(
    windows: &[OptionWindow],
    config: &QrmConfig,
    jobs: usize,
) -> Result<Vec<Result<QrmSolution>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        windows
            .par_iter()
            .map(|w| solve_window(w, config))
            .collect()
    }))
}

pub fn write_forecasts<W: std::io::Write>(mut out: W, records: &[ForecastRecord]) -> Result<()> {
    writeln!(out, "{FORECAST_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.option_id,
            r.date.format("%Y-%m-%d"),
            r.forecast,
            r.residual_norm,
            r.objective
        )?;
    }
    Ok(())
}

pub fn read_forecasts<R: std::io::Read>(reader: R) -> Result<Vec<ForecastRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    if header.join(",") != FORECAST_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{FORECAST_HEADER}`"),
        });
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let err = |message: String| Error::Parse { line, message };
        if record.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", record.len())));
        }
        let num = |k: usize| {
            record[k]
                .parse::<f64>()
                .map_err(|_| err(format!("bad number `{}`", &record[k])))
        };
        out.push(ForecastRecord {
            option_id: record[0].to_string(),
            date: NaiveDate::parse_from_str(&record[1], "%Y-%m-%d")
                .map_err(|e| err(format!("bad date `{}`: {e}", &record[1])))?,
            forecast: num(2)?,
            residual_norm: num(3)?,
            objective: num(4)?,
        });
    }
    Ok(out)
}
