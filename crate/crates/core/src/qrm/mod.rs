//! Quasi-reversibility solver for the backward Black-Scholes equation.
//!
//! For one three-day window the option bid and ask are fitted by quadratics
//! in time and extrapolated one trading day ahead. They serve as Dirichlet
//! data at the two ends of the nondimensional price axis `x ∈ [0, 1]`, and
//! the linear profile between them is the initial data. Instead of marching
//! the ill-posed equation `u_t + ½σ²x²u_xx = 0`, the solver minimizes the
//! squared finite-difference residual plus a Tikhonov penalty that pulls the
//! solution toward the background `G(x, t) = (1 − x)·bid(t) + x·ask(t)`.
//! The forecast is the average of the minimizer over `x` on the final time
//! level.

mod functional;
pub mod linalg;
mod problem;
mod solve;

pub use functional::{assemble_functional, QuadraticForm};
pub use problem::{
    fit_boundary_curves, nondimensionalize, GridFunction, QrmConfig, QrmProblem, Quadratic,
    SolveMethod, DIRECT_SOLVE_LIMIT, TRADING_DAYS_PER_YEAR,
};
pub use solve::{
    forecast_price, minimize, read_forecasts, solve_problem, solve_window, solve_windows,
    write_forecasts, ForecastRecord, QrmSolution, FORECAST_HEADER,
};
