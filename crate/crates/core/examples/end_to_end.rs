// The command-line pipeline at desk scale: synthesize, forecast, featurize,
// train all three families and print one report.

use qrm_forecast::cli::run as cli;

fn step(args: &[&str]) -> Result<(), Box<dyn std::error::Error>> {
    let mut full = vec!["qrm-forecast"];
    full.extend_from_slice(args);
    match cli(full) {
        0 => Ok(()),
        code => Err(format!("`{}` exited with {code}", args.join(" ")).into()),
    }
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::TempDir::new()?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let (q, f, x) = (p("quotes.csv"), p("forecasts.csv"), p("features.csv"));
    step(&[
        "synth",
        "--options",
        "120",
        "--days",
        "20",
        "--seed",
        "1",
        "-o",
        &q,
    ])?;
    step(&["forecast", "--quotes", &q, "-o", &f])?;
    step(&["featurize", "--quotes", &q, "--forecasts", &f, "-o", &x])?;
    let mut models = Vec::new();
    for family in ["tree", "gbm", "forest"] {
        let m = p(&format!("{family}.model"));
        step(&[
            "train",
            "--model",
            family,
            "--features",
            &x,
            "-o",
            &m,
            "--seed",
            "1",
        ])?;
        models.push(m);
    }
    let mut report = vec!["report", "--features", &x, "--seed", "1", "--model-file"];
    report.extend(models.iter().map(String::as_str));
    step(&report)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
