// Grid and random hyperparameter search, selecting on validation accuracy.

use qrm_forecast::evaluation::{grid_search, random_search, Dimension, SearchSpace};
use qrm_forecast::features::featurize;
use qrm_forecast::market_data::{build_windows, split_dataset, synthesize_quotes, SplitFractions};
use qrm_forecast::model::{ModelFamily, ModelParams};
use qrm_forecast::qrm::{solve_windows, ForecastRecord, QrmConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let quotes = synthesize_quotes(60, 20, 0.1, 3);
    let windows = build_windows(&quotes);
    let forecasts = windows
        .iter()
        .zip(solve_windows(&windows, &QrmConfig::default(), 2)?)
        .map(|(w, s)| s.map(|s| ForecastRecord::new(w, &s)))
        .collect::<Result<Vec<_>, _>>()?;
    let data = featurize(&quotes, &forecasts)?.dataset;
    let splits = split_dataset(&data, SplitFractions::default(), 3)?;

    let base = ModelParams::defaults(ModelFamily::Tree, data.n_features());
    let grid = SearchSpace::parse("criterion=gini,entropy;max_depth=2,4,6")?;
    let outcome = grid_search(&grid, &splits.train, &splits.val, &base, 3)?;
    let mut trace = Vec::new();
    outcome.write_trace(&mut trace)?;
    print!("{}", String::from_utf8(trace)?);
    println!("grid best: {}", outcome.best().params);

    let space = SearchSpace::new()
        .with("max_depth", Dimension::UniformInt { lo: 1, hi: 10 })
        .with("min_samples_split", Dimension::UniformInt { lo: 2, hi: 40 });
    let outcome = random_search(&space, 8, &splits.train, &splits.val, &base, 3)?;
    let best = outcome.best();
    println!(
        "random best of {}: {} (validation accuracy {:.2}%)",
        outcome.trials.len(),
        best.params,
        100.0 * best.report.accuracy.unwrap_or(f64::NAN)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
