// Gradient boosting on QRM features from synthetic quotes: training loss by
// stage, held-out accuracy and a few predicted probabilities.

use qrm_forecast::boosting::{predict_boosted, train_boosted, BoostHyperparams};
use qrm_forecast::evaluation::{confusion, majority_baseline, metrics};
use qrm_forecast::features::featurize;
use qrm_forecast::market_data::{build_windows, split_dataset, synthesize_quotes, SplitFractions};
use qrm_forecast::qrm::{solve_windows, ForecastRecord, QrmConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let quotes = synthesize_quotes(80, 20, 0.1, 11);
    let windows = build_windows(&quotes);
    let solutions = solve_windows(&windows, &QrmConfig::default(), 2)?;
    let mut forecasts = Vec::new();
    for (w, s) in windows.iter().zip(solutions) {
        forecasts.push(ForecastRecord::new(w, &s?));
    }
    let data = featurize(&quotes, &forecasts)?.dataset;
    let splits = split_dataset(&data, SplitFractions::default(), 11)?;

    let hp = BoostHyperparams {
        n_stages: 60,
        learning_rate: 0.1,
        max_depth: 3,
        ..BoostHyperparams::default()
    };
    let model = train_boosted(&splits.train, &hp, 11)?;
    let losses = model.staged_log_loss(&splits.train)?;
    for m in (0..=hp.n_stages).step_by(15) {
        println!("stage {m:>3}: train log-loss {:.4}", losses[m]);
    }

    let preds = (0..splits.test.len())
        .map(|r| predict_boosted(&model, splits.test.row(r)).map(|(l, _)| l))
        .collect::<Result<Vec<_>, _>>()?;
    let cm = confusion(&preds, splits.test.labels())?;
    let acc = metrics(&cm).accuracy.unwrap_or(f64::NAN);
    let base = majority_baseline(&splits.test).unwrap_or(f64::NAN);
    println!(
        "test accuracy {:.2}% (majority baseline {:.2}%)",
        100.0 * acc,
        100.0 * base
    );
    for r in 0..3 {
        let (l, p) = predict_boosted(&model, splits.test.row(r))?;
        println!(
            "row {r}: P(up) = {p:.3} -> {l:?}, actual {:?}",
            splits.test.label(r)
        );
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
