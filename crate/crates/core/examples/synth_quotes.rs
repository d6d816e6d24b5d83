// Generates a small synthetic quote universe and shows how it splits into
// three-day windows and next-day labels.

use qrm_forecast::market_data::{build_windows, label, synthesize_quotes, write_quotes, Label};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let quotes = synthesize_quotes(4, 8, 0.1, 7);
    let mut csv = Vec::new();
    write_quotes(&mut csv, &quotes)?;
    let text = String::from_utf8(csv)?;
    for line in text.lines().take(5) {
        println!("{line}");
    }
    println!("... {} quotes in total", quotes.len());

    let windows = build_windows(&quotes);
    let labeled: Vec<_> = windows.iter().filter(|w| w.is_labeled()).collect();
    let up = labeled
        .iter()
        .filter(|w| label(w).ok() == Some(Label::Up))
        .count();
    println!(
        "{} windows, {} with a known next day ({} up, {} down)",
        windows.len(),
        labeled.len(),
        up,
        labeled.len() - up
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
