use std::path::{Path, PathBuf};
use std::process::Command;

use qrm_forecast::cli::run;
use qrm_forecast::market_data::{Label, LabeledDataset};
use tempfile::TempDir;

fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["qrm-forecast"];
    full.extend_from_slice(args);
    run(full)
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn read(p: &str) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn binary() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qrm-forecast"));
    cmd.env_remove("QRMCAST_SEED");
    cmd
}

/// Synthetic quotes, forecasts and features for a small universe.
fn pipeline(dir: &TempDir) -> String {
    let (q, f, x) = (path(dir, "q.csv"), path(dir, "f.csv"), path(dir, "x.csv"));
    assert_eq!(
        cli(&[
            "synth",
            "--options",
            "60",
            "--days",
            "20",
            "--seed",
            "3",
            "-o",
            &q
        ]),
        0
    );
    assert_eq!(
        cli(&["forecast", "--quotes", &q, "-o", &f, "--jobs", "2"]),
        0
    );
    assert_eq!(
        cli(&["featurize", "--quotes", &q, "--forecasts", &f, "-o", &x]),
        0
    );
    x
}

#[test]
fn synth_writes_one_row_per_option_day() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    assert_eq!(
        cli(&[
            "synth",
            "--options",
            "100",
            "--days",
            "30",
            "--seed",
            "7",
            "-o",
            &a
        ]),
        0
    );
    assert_eq!(read(&a).lines().count(), 3001);
    assert_eq!(
        cli(&[
            "synth",
            "--options",
            "100",
            "--days",
            "30",
            "--seed",
            "7",
            "-o",
            &b
        ]),
        0
    );
    assert_eq!(read(&a), read(&b));
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(cli(&["synth", "--options", "5"]), 2);
    assert_eq!(
        cli(&[
            "train",
            "--model",
            "svm",
            "--features",
            "x.csv",
            "-o",
            "m.txt"
        ]),
        2
    );
    assert_eq!(cli(&["frobnicate"]), 2);
    let x = path(&dir, "x.csv");
    std::fs::write(&x, "f0,label\n0.0,1\n").unwrap();
    assert_eq!(
        cli(&[
            "train",
            "--model",
            "tree",
            "--features",
            &x,
            "-o",
            &path(&dir, "m"),
            "--max-depth",
            "0"
        ]),
        2
    );

    let out = binary().args(["synth", "--options", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--out") && err.contains("Usage"), "{err}");
}

#[test]
fn help_exits_zero_without_side_effects() {
    let dir = TempDir::new().unwrap();
    for sub in [
        "synth",
        "forecast",
        "featurize",
        "train",
        "search",
        "evaluate",
        "report",
    ] {
        let out = binary()
            .current_dir(dir.path())
            .args([sub, "--help"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(!out.stdout.is_empty());
    }
    assert_eq!(
        binary().arg("--help").output().unwrap().status.code(),
        Some(0)
    );
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn corrupted_row_is_reported_with_its_line() {
    let dir = TempDir::new().unwrap();
    let q = path(&dir, "q.csv");
    assert_eq!(
        cli(&["synth", "--options", "3", "--days", "6", "-o", &q]),
        0
    );
    let mut lines: Vec<String> = read(&q).lines().map(String::from).collect();
    // swap the option bid and ask on file line 5
    let mut fields: Vec<String> = lines[4].split(',').map(String::from).collect();
    fields.swap(4, 5);
    lines[4] = fields.join(",");
    std::fs::write(&q, lines.join("\n") + "\n").unwrap();

    let out = binary()
        .args(["forecast", "--quotes", &q, "-o", &path(&dir, "f.csv")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5"), "{err}");
    assert!(!Path::new(&path(&dir, "f.csv")).exists());

    assert_eq!(
        cli(&[
            "forecast",
            "--quotes",
            &q,
            "-o",
            &path(&dir, "f.csv"),
            "--skip-bad"
        ]),
        0
    );
    assert!(read(&path(&dir, "f.csv")).lines().count() > 1);
}

#[test]
fn forecasts_do_not_depend_on_jobs() {
    let dir = TempDir::new().unwrap();
    let q = path(&dir, "q.csv");
    assert_eq!(
        cli(&["synth", "--options", "20", "--days", "12", "-o", &q]),
        0
    );
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    assert_eq!(
        cli(&["forecast", "--quotes", &q, "-o", &a, "--jobs", "1"]),
        0
    );
    assert_eq!(
        cli(&["forecast", "--quotes", &q, "-o", &b, "--jobs", "8"]),
        0
    );
    assert_eq!(read(&a), read(&b));
}

#[test]
fn constant_quotes_forecast_their_mid() {
    let dir = TempDir::new().unwrap();
    let q = path(&dir, "q.csv");
    let mut text =
        String::from("date,option_id,stock_bid,stock_ask,option_bid,option_ask,implied_vol\n");
    for day in [
        "2021-03-01",
        "2021-03-02",
        "2021-03-03",
        "2021-03-04",
        "2021-03-05",
    ] {
        text.push_str(&format!("{day},C1,50.0,50.2,2.0,2.5,0.3\n"));
        text.push_str(&format!("{day},C2,80.0,80.1,7.1,7.3,0.6\n"));
    }
    std::fs::write(&q, text).unwrap();
    let f = path(&dir, "f.csv");
    assert_eq!(cli(&["forecast", "--quotes", &q, "-o", &f]), 0);
    let body = read(&f);
    let rows: Vec<Vec<&str>> = body
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let mid = if row[0] == "C1" { 2.25 } else { 7.2 };
        let forecast: f64 = row[2].parse().unwrap();
        assert!((forecast - mid).abs() < 1e-8, "{row:?}");
    }
}

#[test]
fn degenerate_forest_reports_like_a_tree() {
    let dir = TempDir::new().unwrap();
    let x = pipeline(&dir);
    let (tr, tm) = (path(&dir, "tree.csv"), path(&dir, "tree.txt"));
    let (fr, fm) = (path(&dir, "forest.csv"), path(&dir, "forest.txt"));
    let hp = ["--max-depth", "5", "--seed", "9"];
    let mut args = vec![
        "train",
        "--model",
        "tree",
        "--features",
        &x,
        "-o",
        &tm,
        "--report",
        &tr,
    ];
    args.extend(hp);
    assert_eq!(cli(&args), 0);
    let mut args = vec![
        "train",
        "--model",
        "forest",
        "--features",
        &x,
        "-o",
        &fm,
        "--report",
        &fr,
    ];
    args.extend(hp);
    args.extend([
        "--trees",
        "1",
        "--no-bootstrap",
        "--feature-fraction",
        "1.0",
    ]);
    assert_eq!(cli(&args), 0);
    let metrics = |p: &str| {
        read(p)
            .lines()
            .nth(1)
            .unwrap()
            .split_once(',')
            .unwrap()
            .1
            .to_string()
    };
    assert_eq!(metrics(&tr), metrics(&fr));
}

#[test]
fn three_families_share_one_report() {
    let dir = TempDir::new().unwrap();
    let x = pipeline(&dir);
    let mut models = Vec::new();
    for family in ["tree", "gbm", "forest"] {
        let m = path(&dir, &format!("{family}.txt"));
        let mut args = vec!["train", "--model", family, "--features", &x, "-o", &m];
        match family {
            "gbm" => args.extend(["--stages", "20"]),
            "forest" => args.extend(["--trees", "10"]),
            _ => {}
        }
        assert_eq!(cli(&args), 0, "{family}");
        models.push(m);
    }
    let (r1, r2, imp) = (
        path(&dir, "r1.csv"),
        path(&dir, "r2.csv"),
        path(&dir, "imp.csv"),
    );
    let mut args = vec![
        "report",
        "--features",
        &x,
        "-o",
        &r1,
        "--importance",
        &imp,
        "--model-file",
    ];
    args.extend(models.iter().map(String::as_str));
    assert_eq!(cli(&args), 0);
    let report = read(&r1);
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "model,accuracy,precision,recall,tp,fp,fn,tn");
    let names: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(names, ["tree", "gbm", "forest"]);
    assert!(lines.iter().all(|l| l.split(',').count() == 8));
    assert_eq!(read(&imp).lines().count(), 1 + 2 * 10);

    for (k, m) in models.iter().enumerate() {
        let out = if k == 0 { &r1 } else { &r2 };
        assert_eq!(
            cli(&["evaluate", "--model-file", m, "--features", &x, "-o", out]),
            0
        );
        let again = path(&dir, "again.csv");
        assert_eq!(
            cli(&[
                "evaluate",
                "--model-file",
                m,
                "--features",
                &x,
                "-o",
                &again
            ]),
            0
        );
        assert_eq!(read(out), read(&again));
        assert_eq!(read(out).lines().nth(1), Some(lines[k + 1]));
    }
}

#[test]
fn perfect_model_scores_one() {
    let dir = TempDir::new().unwrap();
    // a wide gap between the classes, so any learned threshold separates them
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|i| vec![(i + 1000 * (i >= 17) as usize) as f64, (i % 7) as f64])
        .collect();
    let labels = (0..40)
        .map(|i| if i >= 17 { Label::Up } else { Label::Down })
        .collect();
    let ds = LabeledDataset::from_rows(rows, labels).unwrap();
    let x = path(&dir, "x.csv");
    let mut buf = Vec::new();
    ds.write_csv(&mut buf).unwrap();
    std::fs::write(&x, buf).unwrap();
    let (m, r) = (path(&dir, "m.txt"), path(&dir, "r.csv"));
    assert_eq!(
        cli(&[
            "train",
            "--model",
            "tree",
            "--features",
            &x,
            "-o",
            &m,
            "--split",
            "0.6,0.2,0.2"
        ]),
        0
    );
    assert_eq!(
        cli(&[
            "evaluate",
            "--model-file",
            &m,
            "--features",
            &x,
            "--part",
            "all",
            "--name",
            "perfect",
            "-o",
            &r
        ]),
        0
    );
    let row = read(&r).lines().nth(1).unwrap().to_string();
    assert!(row.starts_with("perfect,1.0,1.0,1.0,"), "{row}");
}

#[test]
fn config_file_and_seed_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.ini");
    let out: PathBuf = dir.path().join("q.csv");
    std::fs::write(
        &cfg,
        format!(
            "[run]\nseed = 5\n\n[paths]\nquotes = {}\n\n[synth]\noptions = 4\ndays = 5\n",
            out.display()
        ),
    )
    .unwrap();
    let cfg = cfg.to_string_lossy().into_owned();
    let synth = |env: Option<&str>, extra: &[&str]| -> String {
        let mut cmd = binary();
        if let Some(v) = env {
            cmd.env("QRMCAST_SEED", v);
        }
        let status = cmd
            .args(["synth", "--config", &cfg])
            .args(extra)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read_to_string(&out).unwrap()
    };
    let from_config = synth(None, &[]);
    assert_eq!(from_config.lines().count(), 21);
    assert_eq!(synth(None, &["--seed", "5"]), from_config);
    let from_env = synth(Some("6"), &[]);
    assert_ne!(from_env, from_config);
    assert_eq!(synth(Some("6"), &["--seed", "6"]), from_env);
    assert_eq!(synth(Some("6"), &["--seed", "5"]), from_config);
    assert_eq!(synth(None, &["--options", "2"]).lines().count(), 11);

    std::fs::write(dir.path().join("bad.ini"), "[synth]\nwidgets = 3\n").unwrap();
    let bad = path(&dir, "bad.ini");
    assert_eq!(
        cli(&["synth", "--config", &bad, "-o", &path(&dir, "z.csv")]),
        2
    );
}

#[test]
fn search_writes_trace_and_model() {
    let dir = TempDir::new().unwrap();
    let x = pipeline(&dir);
    let (trace, model) = (path(&dir, "trace.csv"), path(&dir, "best.txt"));
    let args = [
        "search",
        "--model",
        "tree",
        "--features",
        &x,
        "--space",
        "max_depth=1,2,3;criterion=gini,entropy",
    ];
    let mut full = args.to_vec();
    full.extend(["--trace", &trace, "-o", &model]);
    assert_eq!(cli(&full), 0);
    let t = read(&trace);
    assert_eq!(t.lines().count(), 7);
    assert!(t.starts_with("trial,max_depth,criterion,accuracy,"));
    assert!(read(&model).starts_with("tree v1"));
    let bad = [
        "search",
        "--model",
        "tree",
        "--features",
        &x,
        "--space",
        "colour=red",
    ];
    assert_eq!(cli(&bad), 2);
}
