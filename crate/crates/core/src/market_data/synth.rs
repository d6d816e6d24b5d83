use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::quote::OptionQuote;
use super::window::next_trading_day;
use crate::seed::derive_seed;

const TRADING_DAYS_PER_YEAR: f64 = 252.0;
/// Day-to-day persistence of the latent trend.
const TREND_PERSISTENCE: f64 = 0.85;
/// Daily noise of the log option premium.
const PREMIUM_NOISE: f64 = 0.02;
/// Pull of the log premium back towards its starting level.
const PREMIUM_REVERSION: f64 = 0.02;
/// Keeps prices representable to six decimals for any signal strength.
const LOG_PREMIUM_BOUND: f64 = 6.0;

/// Generates call-option quotes with a plantable next-day signal.
///
/// Each option follows its own geometric Brownian motion stock path. Its mid
/// is the intrinsic value plus a premium whose log evolves with noise and a
/// drift of `signal_strength` times a persistent latent trend, so recent
/// price momentum carries information about the next move. The trend also
/// leaks weakly into the quoted implied volatility. Bid-ask spreads are fixed
/// per option. Output is sorted by date, then option, and depends only on the
/// arguments.
pub fn synthesize_quotes(
    n_options: usize,
    n_days: usize,
    signal_strength: f64,
    seed: u64,
) -> Vec<OptionQuote> {
    let start = NaiveDate::from_ymd_opt(2020, 1, 2).expect("valid start date");
    let mut dates = Vec::with_capacity(n_days);
    let mut d = start;
    for _ in 0..n_days {
        dates.push(d);
        d = next_trading_day(d);
    }

    let paths: Vec<Vec<OptionQuote>> = (0..n_options)
        .map(|k| {
            option_path(
                k,
                &dates,
                signal_strength.max(0.0),
                derive_seed(seed, k as u64),
            )
        })
        .collect();

    let mut quotes = Vec::with_capacity(n_options * n_days);
    for day in 0..n_days {
        for path in &paths {
            quotes.push(path[day].clone());
        }
    }
    quotes
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn option_path(k: usize, dates: &[NaiveDate], signal: f64, seed: u64) -> Vec<OptionQuote> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    // static contract parameters come from their own stream
    let mut uni = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let mut uniform = |lo: f64, hi: f64| uni.random_range(lo..hi);

    let id = format!("OPT{k:05}");
    let s0 = uniform(20.0, 200.0);
    let stock_vol = uniform(0.15, 0.45);
    let stock_half_spread = uniform(0.0005, 0.002);
    let strike = s0 * uniform(0.95, 1.2);
    let premium0 = 0.2 * s0 * stock_vol;
    let option_spread = (premium0 * uniform(0.01, 0.04)).max(0.01);
    let daily_vol = stock_vol / TRADING_DAYS_PER_YEAR.sqrt();

    let mut stock = s0;
    let mut log_premium = 0.0_f64;
    let mut trend: f64 = normal();
    let mut out = Vec::with_capacity(dates.len());
    for &date in dates {
        let mid = ((stock - strike).max(0.0) + premium0 * log_premium.exp()).max(option_spread);
        let mid = round6(mid);
        let stock_mid = round6(stock);
        let stock_spread = round6((stock * stock_half_spread).max(0.005));
        out.push(OptionQuote {
            date,
            option_id: id.clone(),
            stock_bid: round6(stock_mid - stock_spread),
            stock_ask: round6(stock_mid + stock_spread),
            option_bid: round6(mid - 0.5 * option_spread),
            option_ask: round6(mid + 0.5 * option_spread),
            implied_vol: round6((stock_vol * (1.0 + 0.05 * trend)).max(0.01)),
        });

        log_premium += -PREMIUM_REVERSION * log_premium + signal * trend + PREMIUM_NOISE * normal();
        log_premium = log_premium.clamp(-LOG_PREMIUM_BOUND, LOG_PREMIUM_BOUND);
        stock *= (daily_vol * normal() - 0.5 * daily_vol * daily_vol).exp();
        trend = TREND_PERSISTENCE * trend
            + (1.0 - TREND_PERSISTENCE * TREND_PERSISTENCE).sqrt() * normal();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{build_windows, label, write_quotes, Label};

    #[test]
    fn one_option_four_days() {
        let quotes = synthesize_quotes(1, 4, 0.0, 7);
        assert_eq!(quotes.len(), 4);
        let windows = build_windows(&quotes);
        assert_eq!(windows.iter().filter(|w| w.is_labeled()).count(), 1);
    }

    #[test]
    fn quotes_satisfy_invariants() {
        for q in synthesize_quotes(50, 40, 0.05, 3) {
            q.validate().unwrap();
            let mid = q.option_mid().value();
            assert!(q.option_bid < mid && mid < q.option_ask);
        }
    }

    #[test]
    fn same_seed_same_csv() {
        let render = |seed| {
            let mut buf = Vec::new();
            write_quotes(&mut buf, &synthesize_quotes(5, 10, 0.02, seed)).unwrap();
            buf
        };
        assert_eq!(render(11), render(11));
        assert_ne!(render(11), render(12));
    }

    #[test]
    fn no_signal_is_balanced() {
        let quotes = synthesize_quotes(800, 28, 0.0, 2024);
        let labels: Vec<Label> = build_windows(&quotes)
            .iter()
            .filter(|w| w.is_labeled())
            .map(|w| label(w).unwrap())
            .collect();
        assert!(labels.len() >= 20_000);
        let up = labels.iter().filter(|&&l| l == Label::Up).count() as f64;
        let majority = (up / labels.len() as f64).max(1.0 - up / labels.len() as f64);
        assert!(majority < 0.52, "majority rate {majority}");
    }
}
