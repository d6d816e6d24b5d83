// Impurity measures, one exhaustive split search and a small tree in its
// text format.

use qrm_forecast::market_data::{Label, LabeledDataset};
use qrm_forecast::tree::{
    best_split, entropy, gini, grow_tree, information_gain, ClassCounts, Criterion, TreeHyperparams,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for (p, n) in [(5, 5), (10, 0), (9, 5)] {
        let c = ClassCounts::new(p, n);
        println!(
            "({p},{n}): entropy {:.6}, gini {:.6}",
            entropy(c)?,
            gini(c)?
        );
    }
    let gain = information_gain(
        ClassCounts::new(9, 5),
        &[ClassCounts::new(6, 2), ClassCounts::new(3, 3)],
    )?;
    println!("gain of (9,5) -> (6,2) + (3,3): {gain:.6}");

    let rows = vec![
        vec![1.0, 0.3],
        vec![2.0, 0.1],
        vec![3.0, 0.4],
        vec![4.0, 0.2],
        vec![5.0, 0.9],
    ];
    let labels = vec![Label::Down, Label::Down, Label::Up, Label::Up, Label::Up];
    let data = LabeledDataset::from_rows(rows, labels)?;
    let all: Vec<usize> = (0..data.len()).collect();
    for criterion in [Criterion::Entropy, Criterion::Gini] {
        if let Some(s) = best_split(&data, &all, &[0, 1], criterion) {
            println!(
                "{criterion}: x[{}] <= {} with gain {:.6}",
                s.feature_index, s.threshold, s.gain
            );
        }
    }

    let hp = TreeHyperparams {
        criterion: Criterion::Entropy,
        max_depth: 3,
        ..TreeHyperparams::default()
    };
    let model = grow_tree(&data, &hp, 0)?;
    print!("{}", model.to_text());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
