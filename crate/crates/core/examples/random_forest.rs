// Random forest on QRM features: bagged trees with per-node feature
// subsets, majority-vote accuracy and impurity-based feature importance.

use qrm_forecast::evaluation::{confusion, metrics};
use qrm_forecast::features::{featurize, FEATURE_NAMES};
use qrm_forecast::forest::{default_feature_fraction, feature_importance, train_forest};
use qrm_forecast::market_data::{build_windows, split_dataset, synthesize_quotes, SplitFractions};
use qrm_forecast::qrm::{solve_windows, ForecastRecord, QrmConfig};
use qrm_forecast::tree::{grow_tree, TreeHyperparams};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let quotes = synthesize_quotes(80, 20, 0.1, 5);
    let windows = build_windows(&quotes);
    let forecasts = windows
        .iter()
        .zip(solve_windows(&windows, &QrmConfig::default(), 2)?)
        .map(|(w, s)| s.map(|s| ForecastRecord::new(w, &s)))
        .collect::<Result<Vec<_>, _>>()?;
    let data = featurize(&quotes, &forecasts)?.dataset;
    let splits = split_dataset(&data, SplitFractions::default(), 5)?;
    let d = data.n_features();

    let accuracy =
        |predict: &dyn Fn(&[f64]) -> qrm_forecast::Result<qrm_forecast::market_data::Label>| {
            let preds = (0..splits.test.len())
                .map(|r| predict(splits.test.row(r)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok::<f64, qrm_forecast::Error>(
                metrics(&confusion(&preds, splits.test.labels())?)
                    .accuracy
                    .unwrap_or(f64::NAN),
            )
        };

    let single = TreeHyperparams {
        max_depth: 8,
        ..TreeHyperparams::default()
    };
    let tree = grow_tree(&splits.train, &single, 5)?;
    println!(
        "single tree test accuracy {:.2}%",
        100.0 * accuracy(&|x| tree.predict(x))?
    );

    let hp = TreeHyperparams {
        max_depth: 8,
        feature_fraction: default_feature_fraction(d),
        ..single
    };
    let forest = train_forest(&splits.train, 50, &hp, true, 5)?;
    println!(
        "forest of {} trees test accuracy {:.2}%",
        forest.n_trees(),
        100.0 * accuracy(&|x| forest.predict(x))?
    );

    let report = feature_importance(&forest, &splits.train)?;
    println!("feature importance:");
    for k in report.ranking() {
        println!("  {:<14} {:.4}", FEATURE_NAMES[k], report.scores[k]);
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
