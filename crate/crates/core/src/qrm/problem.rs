use crate::error::{Error, Result};
use crate::market_data::OptionWindow;

/// Trading days per year; converts annualized volatility to a daily variance.
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Quadratic polynomial `c0 + c1·s + c2·s²` in solver time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Quadratic {
    pub fn constant(c: f64) -> Self {
        Quadratic {
            c0: c,
            c1: 0.0,
            c2: 0.0,
        }
    }

    /// Unique quadratic through three points with distinct abscissae,
    /// built from Newton divided differences.
    pub fn through(points: [(f64, f64); 3]) -> Self {
        let [(s0, v0), (s1, v1), (s2, v2)] = points;
        let d01 = (v1 - v0) / (s1 - s0);
        let d12 = (v2 - v1) / (s2 - s1);
        let d012 = (d12 - d01) / (s2 - s0);
        // v0 + d01 (s - s0) + d012 (s - s0)(s - s1)
        Quadratic {
            c0: v0 - d01 * s0 + d012 * s0 * s1,
            c1: d01 - d012 * (s0 + s1),
            c2: d012,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.c0 + s * (self.c1 + s * self.c2)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.c1 + 2.0 * self.c2 * s
    }
}

/// Dimensionless spread ratios `x_a/x_b − 1` and `o_a/o_b − 1` of today's quote.
pub fn nondimensionalize(window: &OptionWindow) -> Result<(f64, f64)> {
    let q = window.today();
    let f_x = q.stock_ask / q.stock_bid - 1.0;
    let f_o = q.option_ask / q.option_bid - 1.0;
    if !(f_x > 0.0 && f_x.is_finite()) || !(f_o > 0.0 && f_o.is_finite()) {
        return Err(Error::invalid(format!(
            "{} on {}: spread ratios must be positive (f_x = {f_x}, f_o = {f_o})",
            window.option_id, q.date
        )));
    }
    Ok((f_x, f_o))
}

/// Option bid and ask as quadratics in solver time.
///
/// The three observed days sit at solver times `−τ, 0, τ`, so the solver
/// interval `[0, 2τ]` starts yesterday, passes today at `τ` and ends on the
/// next trading day at `2τ`. Values on `(τ, 2τ]` are extrapolated.
pub fn fit_boundary_curves(window: &OptionWindow, tau: f64) -> (Quadratic, Quadratic) {
    let times = [-tau, 0.0, tau];
    let pts = |f: &dyn Fn(usize) -> f64| [(times[0], f(0)), (times[1], f(1)), (times[2], f(2))];
    let bid = Quadratic::through(pts(&|k| window.quotes[k].option_bid));
    let ask = Quadratic::through(pts(&|k| window.quotes[k].option_ask));
    (bid, ask)
}

/// Solver settings; keys mirror the `[qrm]` config section.
#[derive(Debug, Clone, PartialEq)]
pub struct QrmConfig {
    pub beta: f64,
    pub nx: usize,
    pub nt: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub method: SolveMethod,
}

impl Default for QrmConfig {
    fn default() -> Self {
        QrmConfig {
            beta: 0.01,
            nx: 21,
            nt: 21,
            cg_tol: 1e-10,
            cg_max_iter: 20_000,
            method: SolveMethod::Auto,
        }
    }
}

/// How the normal equations are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Banded Cholesky below [`DIRECT_SOLVE_LIMIT`] unknowns, conjugate gradient above.
    Auto,
    Direct,
    ConjugateGradient,
}

impl std::str::FromStr for SolveMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolveMethod::Auto),
            "direct" => Ok(SolveMethod::Direct),
            "cg" => Ok(SolveMethod::ConjugateGradient),
            other => Err(Error::invalid(format!(
                "unknown solve method `{other}` (auto, direct or cg)"
            ))),
        }
    }
}

/// Largest unknown count solved directly under [`SolveMethod::Auto`].
pub const DIRECT_SOLVE_LIMIT: usize = 2_000;

/// Backward Black-Scholes problem on `x ∈ [0, 1]`, `t ∈ [0, 2τ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrmProblem {
    pub bid_curve: Quadratic,
    pub ask_curve: Quadratic,
    /// Annualized volatility, constant over the window.
    pub sigma: f64,
    pub f_x: f64,
    pub f_o: f64,
    /// One trading day in solver time units.
    pub tau: f64,
    pub nx: usize,
    pub nt: usize,
    pub beta: f64,
}

impl QrmProblem {
    pub fn from_window(window: &OptionWindow, config: &QrmConfig) -> Result<Self> {
        window.validate()?;
        let (f_x, f_o) = nondimensionalize(window)?;
        let tau = 1.0;
        let (bid_curve, ask_curve) = fit_boundary_curves(window, tau);
        let problem = QrmProblem {
            bid_curve,
            ask_curve,
            sigma: window.today().implied_vol,
            f_x,
            f_o,
            tau,
            nx: config.nx,
            nt: config.nt,
            beta: config.beta,
        };
        problem.validate().map_err(|e| {
            Error::invalid(format!(
                "{} on {}: {e}",
                window.option_id,
                window.today().date
            ))
        })?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.nt < 3 {
            return Err(Error::invalid(format!(
                "grid must be at least 3×3, got {}×{}",
                self.nx, self.nt
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma must be nonnegative, got {}",
                self.sigma
            )));
        }
        if !(self.f_x > 0.0 && self.f_x.is_finite()) {
            return Err(Error::invalid(format!(
                "f_x must be positive, got {}",
                self.f_x
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        for j in 0..self.nt {
            let t = self.t(j);
            let (b, a) = (self.bid_curve.eval(t), self.ask_curve.eval(t));
            if !(b < a) || !b.is_finite() || !a.is_finite() {
                return Err(Error::invalid(format!(
                    "boundary bid {b} is not below ask {a} at t = {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        1.0 / (self.nx - 1) as f64
    }

    pub fn ht(&self) -> f64 {
        2.0 * self.tau / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.ht()
    }

    /// Coefficient of `u_yy` on the unit grid.
    ///
    /// The operator `u_t + ½σ²s²u_ss` acts on the stock price `s ∈ (s_b, s_a)`.
    /// With `s = s_b + y·(s_a − s_b)` and `f_x = s_a/s_b − 1` this becomes
    /// `½σ²·((1 + y·f_x)/f_x)²·u_yy`, with σ² converted to a daily variance.
    pub fn diffusion(&self, i: usize) -> f64 {
        let scaled = (1.0 + self.x(i) * self.f_x) / self.f_x;
        0.5 * self.sigma * self.sigma / TRADING_DAYS_PER_YEAR * scaled * scaled
    }

    /// Background `G(x, t) = (1 − x)·bid(t) + x·ask(t)`.
    pub fn background(&self, x: f64, t: f64) -> f64 {
        (1.0 - x) * self.bid_curve.eval(t) + x * self.ask_curve.eval(t)
    }

    pub fn background_grid(&self) -> GridFunction {
        let mut g = GridFunction::zeros(self.nx, self.nt);
        for j in 0..self.nt {
            for i in 0..self.nx {
                g.set(i, j, self.background(self.x(i), self.t(j)));
            }
        }
        g
    }
}

/// Grid values `u(x_i, t_j)`, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nx: usize,
    nt: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(nx: usize, nt: usize) -> Self {
        GridFunction {
            nx,
            nt,
            values: vec![0.0; nx * nt],
        }
    }

    pub fn from_fn(nx: usize, nt: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut g = GridFunction::zeros(nx, nt);
        for j in 0..nt {
            for i in 0..nx {
                g.set(i, j, f(i, j));
            }
        }
        g
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.nx + i] = v;
    }

    /// Values at one time level.
    pub fn time_level(&self, j: usize) -> &[f64] {
        &self.values[j * self.nx..(j + 1) * self.nx]
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{OptionQuote, OptionWindow};
    use chrono::NaiveDate;

    pub(crate) fn window(
        stock: [(f64, f64); 3],
        option: [(f64, f64); 3],
        vol: f64,
    ) -> OptionWindow {
        let day = |d| NaiveDate::from_ymd_opt(2020, 1, d).unwrap();
        let quote = |k: usize| OptionQuote {
            date: day(6 + k as u32),
            option_id: "W".into(),
            stock_bid: stock[k].0,
            stock_ask: stock[k].1,
            option_bid: option[k].0,
            option_ask: option[k].1,
            implied_vol: vol,
        };
        OptionWindow {
            option_id: "W".into(),
            quotes: [quote(0), quote(1), quote(2)],
            next_mid: None,
        }
    }

    /// Independent Lagrange-form evaluation.
    fn lagrange(points: [(f64, f64); 3], s: f64) -> f64 {
        (0..3)
            .map(|k| {
                let (sk, vk) = points[k];
                let basis: f64 = (0..3)
                    .filter(|&m| m != k)
                    .map(|m| (s - points[m].0) / (sk - points[m].0))
                    .product();
                vk * basis
            })
            .sum()
    }

    #[test]
    fn spread_ratios() {
        let w = window([(100.0, 110.0); 3], [(5.0, 5.5); 3], 0.2);
        let (f_x, f_o) = nondimensionalize(&w).unwrap();
        assert!((f_x - 0.1).abs() < 1e-15);
        assert!((f_o - 0.1).abs() < 1e-15);
    }

    #[test]
    fn equal_bid_ask_is_rejected() {
        let w = window([(100.0, 100.0); 3], [(5.0, 5.5); 3], 0.2);
        assert!(nondimensionalize(&w).is_err());
    }

    #[test]
    fn collinear_extrapolation() {
        let w = window(
            [(100.0, 101.0); 3],
            [(1.0, 1.05), (1.1, 1.15), (1.2, 1.25)],
            0.2,
        );
        let (bid, _) = fit_boundary_curves(&w, 1.0);
        assert!((bid.eval(2.0) - 1.3).abs() < 1e-12);
        let w = window([(100.0, 101.0); 3], [(1.0, 1.05); 3], 0.2);
        let (bid, ask) = fit_boundary_curves(&w, 1.0);
        assert_eq!(bid.eval(2.0), 1.0);
        assert_eq!(ask.eval(2.0), 1.05);
    }

    #[test]
    fn curved_extrapolation_matches_lagrange() {
        let w = window(
            [(100.0, 101.0); 3],
            [(1.0, 1.3), (1.2, 1.4), (1.1, 1.5)],
            0.2,
        );
        let (bid, _) = fit_boundary_curves(&w, 1.0);
        let pts = [(-1.0, 1.0), (0.0, 1.2), (1.0, 1.1)];
        for s in [-1.0, 0.0, 0.5, 1.0, 2.0] {
            assert!((bid.eval(s) - lagrange(pts, s)).abs() < 1e-12);
        }
        // 1.0, 1.2, 1.1 continue to 3·1.1 − 3·1.2 + 1.0 = 0.7
        assert!((bid.eval(2.0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn quadratic_through_arbitrary_points() {
        let pts = [(-0.3, 2.0), (0.7, -1.0), (1.9, 4.5)];
        let q = Quadratic::through(pts);
        for s in [-2.0, 0.0, 0.1, 3.3] {
            assert!((q.eval(s) - lagrange(pts, s)).abs() < 1e-12);
        }
    }

    #[test]
    fn background_matches_boundaries() {
        let w = window(
            [(100.0, 101.0); 3],
            [(1.0, 1.3), (1.2, 1.4), (1.1, 1.5)],
            0.2,
        );
        let p = QrmProblem::from_window(&w, &QrmConfig::default()).unwrap();
        for j in 0..p.nt {
            let t = p.t(j);
            assert_eq!(p.background(0.0, t), p.bid_curve.eval(t));
            assert_eq!(p.background(1.0, t), p.ask_curve.eval(t));
        }
        // initial level is the linear profile between yesterday's bid and ask
        let x = 0.25;
        assert!((p.background(x, 0.0) - (1.2 * (1.0 - x) + 1.4 * x)).abs() < 1e-15);
    }

    #[test]
    fn crossing_extrapolation_is_rejected() {
        // bid accelerates up, ask down: they cross before the next day
        let w = window(
            [(100.0, 101.0); 3],
            [(1.0, 2.0), (1.2, 1.9), (1.6, 1.7)],
            0.2,
        );
        assert!(QrmProblem::from_window(&w, &QrmConfig::default()).is_err());
    }

    #[test]
    fn grid_too_small() {
        let w = window([(100.0, 101.0); 3], [(1.0, 1.1); 3], 0.2);
        let config = QrmConfig {
            nx: 2,
            ..QrmConfig::default()
        };
        assert!(QrmProblem::from_window(&w, &config).is_err());
    }
}
