//! Dense oracles for the QRM functional, written node by node.

use nalgebra::{DMatrix, DVector};
use qrm_forecast::qrm::{GridFunction, QrmConfig, QrmProblem, Quadratic, TRADING_DAYS_PER_YEAR};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn problem(
    bid: Quadratic,
    ask: Quadratic,
    sigma: f64,
    nx: usize,
    nt: usize,
    beta: f64,
) -> QrmProblem {
    QrmProblem {
        bid_curve: bid,
        ask_curve: ask,
        sigma,
        f_x: 0.005,
        f_o: 0.05,
        tau: 1.0,
        nx,
        nt,
        beta,
    }
}

pub fn config(p: &QrmProblem) -> QrmConfig {
    QrmConfig {
        beta: p.beta,
        nx: p.nx,
        nt: p.nt,
        ..QrmConfig::default()
    }
}

/// Functional written out node by node over the full grid, independent of the
/// library's term assembly.
pub fn oracle_objective(p: &QrmProblem, u: &GridFunction) -> f64 {
    let (nx, nt) = (p.nx, p.nt);
    let hx = 1.0 / (nx - 1) as f64;
    let ht = 2.0 * p.tau / (nt - 1) as f64;
    let x = |i: usize| i as f64 * hx;
    let t = |j: usize| j as f64 * ht;
    let g =
        |i: usize, j: usize| (1.0 - x(i)) * p.bid_curve.eval(t(j)) + x(i) * p.ask_curve.eval(t(j));
    let w = |i: usize, j: usize| u.at(i, j) - g(i, j);
    let var = p.sigma * p.sigma / TRADING_DAYS_PER_YEAR;
    let mut pde = 0.0;
    for j in 0..nt - 1 {
        for i in 1..nx - 1 {
            let ut = (u.at(i, j + 1) - u.at(i, j)) / ht;
            let uxx = (u.at(i - 1, j) - 2.0 * u.at(i, j) + u.at(i + 1, j)) / (hx * hx);
            // stock price s = s_b (1 + x f_x), so s/(s_a − s_b) = (1 + x f_x)/f_x
            let ratio = (1.0 + x(i) * p.f_x) / p.f_x;
            let r = ut + 0.5 * var * ratio * ratio * uxx;
            pde += r * r;
        }
    }
    let mut reg = 0.0;
    for j in 0..nt {
        for i in 0..nx {
            reg += w(i, j).powi(2);
            if i >= 1 && i + 1 < nx {
                reg += ((w(i - 1, j) - 2.0 * w(i, j) + w(i + 1, j)) / (hx * hx)).powi(2);
            }
            if j >= 1 && j + 1 < nt {
                reg += ((w(i, j - 1) - 2.0 * w(i, j) + w(i, j + 1)) / (ht * ht)).powi(2);
            }
        }
    }
    (pde + p.beta * reg) * hx * ht
}

/// Interior and final-time nodes, i.e. everything not fixed by data.
pub fn free_nodes(p: &QrmProblem) -> Vec<(usize, usize)> {
    let mut nodes = Vec::new();
    for j in 1..p.nt {
        for i in 1..p.nx - 1 {
            nodes.push((i, j));
        }
    }
    nodes
}

/// Dense Hessian and minimizer via polarization of the oracle objective.
pub fn oracle_minimizer(p: &QrmProblem) -> (DMatrix<f64>, GridFunction) {
    let base = p.background_grid();
    let nodes = free_nodes(p);
    let n = nodes.len();
    let shifted = |pairs: &[(usize, f64)]| {
        let mut u = base.clone();
        for &(k, d) in pairs {
            let (i, j) = nodes[k];
            u.set(i, j, u.at(i, j) + d);
        }
        oracle_objective(p, &u)
    };
    let j0 = shifted(&[]);
    let single: Vec<f64> = (0..n).map(|k| shifted(&[(k, 1.0)])).collect();
    let mut hess = DMatrix::zeros(n, n);
    let mut grad = DVector::zeros(n);
    for k in 0..n {
        grad[k] = (single[k] - shifted(&[(k, -1.0)])) / 2.0;
        for l in 0..n {
            let both = if k == l {
                shifted(&[(k, 2.0)])
            } else {
                shifted(&[(k, 1.0), (l, 1.0)])
            };
            hess[(k, l)] = both - single[k] - single[l] + j0;
        }
    }
    // J(w) = j0 + gᵀw + ½ wᵀHw
    let w = hess.clone().lu().solve(&(-grad)).expect("nonsingular");
    let mut u = base;
    for (k, &(i, j)) in nodes.iter().enumerate() {
        u.set(i, j, u.at(i, j) + w[k]);
    }
    (hess, u)
}

pub fn random_problem(rng: &mut ChaCha8Rng, max_grid: usize) -> QrmProblem {
    let bid0: f64 = rng.random_range(0.5..20.0);
    let spread: f64 = rng.random_range(0.01..2.0);
    let slope: f64 = rng.random_range(-0.3..0.3);
    let curv: f64 = rng.random_range(-0.05..0.05);
    let bid = Quadratic {
        c0: bid0,
        c1: slope,
        c2: curv,
    };
    let ask = Quadratic {
        c0: bid0 + spread,
        c1: slope + rng.random_range(-0.05..0.05),
        c2: curv,
    };
    let mut p = problem(
        bid,
        ask,
        rng.random_range(0.0..1.5),
        rng.random_range(3..=max_grid),
        rng.random_range(3..=max_grid),
        10f64.powf(rng.random_range(-3.0..0.0)),
    );
    p.f_x = 10f64.powf(rng.random_range(-3.3..-1.0));
    if p.validate().is_ok() {
        p
    } else {
        random_problem(rng, max_grid)
    }
}
