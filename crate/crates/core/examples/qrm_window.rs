// Solves the quasi-reversibility problem for one trending window and
// compares the direct and iterative solvers.

use chrono::NaiveDate;
use qrm_forecast::market_data::{OptionQuote, OptionWindow};
use qrm_forecast::qrm::{solve_window, QrmConfig, SolveMethod};

fn quote(day: u32, bid: f64, ask: f64, vol: f64) -> OptionQuote {
    OptionQuote {
        date: NaiveDate::from_ymd_opt(2021, 6, day).expect("valid date"),
        option_id: "DEMO".into(),
        stock_bid: 100.0,
        stock_ask: 100.1,
        option_bid: bid,
        option_ask: ask,
        implied_vol: vol,
    }
}

fn window_at(vol: f64) -> OptionWindow {
    OptionWindow {
        option_id: "DEMO".into(),
        quotes: [
            quote(7, 0.995, 1.005, vol),
            quote(8, 1.115, 1.125, vol),
            quote(9, 1.195, 1.205, vol),
        ],
        next_mid: None,
    }
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let window = window_at(0.25);
    println!("mids: 1.00, 1.12, 1.20");
    for method in [SolveMethod::Direct, SolveMethod::ConjugateGradient] {
        let config = QrmConfig {
            method,
            ..QrmConfig::default()
        };
        let s = solve_window(&window, &config)?;
        println!(
            "{method:?}: forecast {:.6}, residual {:.3e}, objective {:.3e}",
            s.forecast, s.residual_norm, s.objective
        );
    }
    for vol in [0.02, 0.1, 0.5] {
        let s = solve_window(&window_at(vol), &QrmConfig::default())?;
        println!("implied vol {vol}: forecast {:.6}", s.forecast);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
