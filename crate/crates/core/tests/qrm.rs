mod common;

use chrono::NaiveDate;
use common::qrm::{
    config, free_nodes, oracle_minimizer, oracle_objective, problem, random_problem,
};
use qrm_forecast::market_data::{OptionQuote, OptionWindow};
use qrm_forecast::qrm::{
    assemble_functional, forecast_price, minimize, solve_problem, solve_window, GridFunction,
    QrmConfig, QrmProblem, Quadratic, SolveMethod,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn unknown_count_excludes_boundaries_and_initial_level() {
    let p = problem(
        Quadratic::constant(1.0),
        Quadratic::constant(2.0),
        0.2,
        4,
        4,
        0.01,
    );
    assert_eq!(assemble_functional(&p).unwrap().n_unknowns(), 6);
}

#[test]
fn grid_below_three_is_rejected() {
    let p = problem(
        Quadratic::constant(1.0),
        Quadratic::constant(2.0),
        0.2,
        2,
        4,
        0.01,
    );
    assert!(assemble_functional(&p).is_err());
}

#[test]
fn constant_data_background_has_zero_objective() {
    let p = problem(
        Quadratic::constant(2.0),
        Quadratic::constant(4.0),
        0.0,
        7,
        5,
        0.01,
    );
    let form = assemble_functional(&p).unwrap();
    assert_eq!(form.evaluate(&p.background_grid()), 0.0);
}

#[test]
fn constant_boundaries_return_background() {
    for sigma in [0.0, 0.3, 2.0] {
        let p = problem(
            Quadratic::constant(2.0),
            Quadratic::constant(4.0),
            sigma,
            21,
            21,
            0.01,
        );
        let sol = solve_problem(&p, &config(&p)).unwrap();
        let exact = GridFunction::from_fn(21, 21, |i, _| 2.0 + 2.0 * i as f64 / 20.0);
        assert!(
            sol.u.sup_distance(&exact) <= 1e-8,
            "sigma {sigma}: {}",
            sol.u.sup_distance(&exact)
        );
        assert!(
            sol.objective <= 1e-16,
            "sigma {sigma}: objective {:e}",
            sol.objective
        );
        assert!((sol.forecast - 3.0).abs() < 1e-8);
    }
}

#[test]
fn consistent_solution_is_beta_independent() {
    let base = problem(
        Quadratic::constant(1.5),
        Quadratic::constant(1.7),
        0.4,
        11,
        9,
        0.01,
    );
    let a = solve_problem(&base, &config(&base)).unwrap();
    let scaled = QrmProblem { beta: 0.1, ..base };
    let b = solve_problem(&scaled, &config(&scaled)).unwrap();
    assert!(a.u.sup_distance(&b.u) < 1e-10);
}

#[test]
fn refinement_keeps_exact_forecast() {
    let coarse = problem(
        Quadratic::constant(2.0),
        Quadratic::constant(4.0),
        0.25,
        11,
        11,
        0.01,
    );
    let fine = QrmProblem {
        nx: 21,
        nt: 21,
        ..coarse.clone()
    };
    let fc = solve_problem(&coarse, &config(&coarse)).unwrap().forecast;
    let ff = solve_problem(&fine, &config(&fine)).unwrap().forecast;
    assert!((fc - ff).abs() < 1e-8);
}

#[test]
fn tiny_grids_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let p = random_problem(&mut rng, 3);
        let (hess, expected) = oracle_minimizer(&p);
        let form = assemble_functional(&p).unwrap();
        let u = minimize(&form, &config(&p)).unwrap();
        assert!(
            u.sup_distance(&expected) < 1e-8,
            "{}",
            u.sup_distance(&expected)
        );
        // SPD Hessian
        let eig = hess.symmetric_eigen();
        assert!(
            eig.eigenvalues.iter().all(|&l| l > 0.0),
            "{:?}",
            eig.eigenvalues
        );
        // library objective agrees with the node-by-node formula
        let j_lib = form.evaluate(&u);
        let j_orc = oracle_objective(&p, &u);
        assert!((j_lib - j_orc).abs() <= 1e-10 * j_orc.abs().max(1.0));
    }
}

#[test]
fn small_grids_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10 {
        let p = random_problem(&mut rng, 6);
        let (_, expected) = oracle_minimizer(&p);
        let u = minimize(&assemble_functional(&p).unwrap(), &config(&p)).unwrap();
        assert!(
            u.sup_distance(&expected) < 1e-7,
            "{}",
            u.sup_distance(&expected)
        );
    }
}

#[test]
fn assembled_matrix_matches_oracle_hessian() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let p = random_problem(&mut rng, 5);
        let (hess, _) = oracle_minimizer(&p);
        let form = assemble_functional(&p).unwrap();
        let a = form.matrix();
        let nodes = free_nodes(&p);
        for (k, &(ik, jk)) in nodes.iter().enumerate() {
            for (l, &(il, jl)) in nodes.iter().enumerate() {
                let lib = a.get(
                    form.unknown_index(ik, jk).unwrap(),
                    form.unknown_index(il, jl).unwrap(),
                );
                // oracle Hessian is 2A
                let scale = hess.amax().max(1.0);
                assert!(
                    (2.0 * lib - hess[(k, l)]).abs() <= 1e-9 * scale,
                    "({k},{l}): lib {} oracle {} scale {scale}",
                    2.0 * lib,
                    hess[(k, l)]
                );
            }
        }
    }
}

#[test]
fn minimizer_beats_random_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let p = random_problem(&mut rng, 15);
        let form = assemble_functional(&p).unwrap();
        let u = minimize(&form, &config(&p)).unwrap();
        let best = form.evaluate(&u);
        assert!(form.normal_residual(&u) <= 1e-10);
        for _ in 0..20 {
            let mut v = u.clone();
            for j in 1..p.nt {
                for i in 1..p.nx - 1 {
                    v.set(i, j, v.at(i, j) + rng.random_range(-1e-3..1e-3));
                }
            }
            assert!(best <= form.evaluate(&v));
        }
    }
}

#[test]
fn conjugate_gradient_matches_direct() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let p = random_problem(&mut rng, 21);
        let form = assemble_functional(&p).unwrap();
        let direct = minimize(
            &form,
            &QrmConfig {
                method: SolveMethod::Direct,
                ..config(&p)
            },
        )
        .unwrap();
        let cg_config = QrmConfig {
            method: SolveMethod::ConjugateGradient,
            ..config(&p)
        };
        let cg = minimize(&form, &cg_config).unwrap();
        assert!(form.normal_residual(&cg) <= 1e-10);
        assert!(
            direct.sup_distance(&cg) < 1e-6,
            "{}",
            direct.sup_distance(&cg)
        );
    }
}

#[test]
fn large_grid_uses_conjugate_gradient() {
    let p = problem(
        Quadratic {
            c0: 1.0,
            c1: 0.05,
            c2: 0.0,
        },
        Quadratic {
            c0: 1.2,
            c1: 0.05,
            c2: 0.0,
        },
        0.3,
        52,
        42,
        0.01,
    );
    let form = assemble_functional(&p).unwrap();
    assert!(form.n_unknowns() >= 2000);
    let auto = minimize(&form, &config(&p)).unwrap();
    assert!(form.normal_residual(&auto) <= 1e-10);
}

#[test]
fn forecast_is_final_level_average() {
    let p = problem(
        Quadratic::constant(2.0),
        Quadratic::constant(4.0),
        0.2,
        5,
        4,
        0.01,
    );
    let linear = GridFunction::from_fn(5, 4, |i, _| 2.0 + 2.0 * i as f64 / 4.0);
    assert_eq!(forecast_price(&linear, &p).unwrap(), 3.0);
    let constant = GridFunction::from_fn(5, 4, |_, _| 1.25);
    assert_eq!(forecast_price(&constant, &p).unwrap(), 1.25);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let values: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..10.0)).collect();
    let arbitrary = GridFunction::from_fn(5, 4, |i, j| values[j * 5 + i]);
    let mut sum = 0.0;
    for i in 0..5 {
        sum += arbitrary.at(i, 3);
    }
    assert!((forecast_price(&arbitrary, &p).unwrap() - sum / 5.0).abs() < 1e-14);
    assert!(forecast_price(&GridFunction::zeros(4, 4), &p).is_err());
}

fn window(option: [(f64, f64); 3], vol: f64) -> OptionWindow {
    window_with_stock((100.0, 100.5), option, vol)
}

fn window_with_stock(stock: (f64, f64), option: [(f64, f64); 3], vol: f64) -> OptionWindow {
    let quote = |k: usize| OptionQuote {
        date: NaiveDate::from_ymd_opt(2020, 1, 6 + k as u32).unwrap(),
        option_id: "W".into(),
        stock_bid: stock.0,
        stock_ask: stock.1,
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

#[test]
fn constant_window_forecasts_today_mid() {
    let w = window([(5.0, 5.5); 3], 0.3);
    let sol = solve_window(&w, &QrmConfig::default()).unwrap();
    assert!((sol.forecast - 5.25).abs() < 1e-10);
}

#[test]
fn trending_window_forecast_is_bracketed() {
    let half = 0.005;
    let option = [
        (1.0 - half, 1.0 + half),
        (1.1 - half, 1.1 + half),
        (1.2 - half, 1.2 + half),
    ];
    let w = window_with_stock((100.0, 100.1), option, 0.05);
    let sol = solve_window(&w, &QrmConfig::default()).unwrap();
    assert!(
        sol.forecast >= 1.3 - half && sol.forecast <= 1.3 + half,
        "forecast {}",
        sol.forecast
    );
}

#[test]
fn residual_shrinks_as_beta_decreases() {
    let w = window([(1.0, 1.1), (1.05, 1.12), (1.2, 1.3)], 0.4);
    let mut last = f64::INFINITY;
    for beta in [1e-2, 1e-4, 1e-6] {
        let sol = solve_window(
            &w,
            &QrmConfig {
                beta,
                ..QrmConfig::default()
            },
        )
        .unwrap();
        assert!(
            sol.residual_norm <= last,
            "beta {beta}: {} > {last}",
            sol.residual_norm
        );
        last = sol.residual_norm;
    }
}

#[test]
fn nonnegative_data_gives_nonnegative_forecast() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let mut q = [(0.0, 0.0); 3];
        for slot in &mut q {
            let bid = rng.random_range(0.01..3.0);
            *slot = (bid, bid + rng.random_range(0.01..0.5));
        }
        let w = window(q, rng.random_range(0.05..1.0));
        let Ok(sol) = solve_window(&w, &QrmConfig::default()) else {
            continue;
        };
        let p = QrmProblem::from_window(&w, &QrmConfig::default()).unwrap();
        let nonneg = (0..p.nt).all(|j| p.bid_curve.eval(p.t(j)) >= 0.0);
        if nonneg {
            assert!(sol.forecast >= 0.0, "forecast {}", sol.forecast);
        }
    }
}
