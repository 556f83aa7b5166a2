//! Acceptance suite: criteria 1-11 against the library, criterion 12 against the built binary.
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use badic_qmc::selftest::{run_criterion, CRITERIA};

const BIN: &str = env!("CARGO_BIN_EXE_badic-qmc");

fn plot(dir: &Path, threads: u32) -> Result<Vec<(String, Vec<u8>)>, String> {
    let status = Command::new(BIN)
        .args(["plot", "--threads", &threads.to_string(), "--out"])
        .arg(dir)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("plot exited with {status}"));
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|entry| {
            let path = entry.map_err(|e| e.to_string())?.path();
            let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
            Ok((path.file_name().unwrap().to_string_lossy().into_owned(), bytes))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

/// `selftest` runs criteria 1-11 successfully, and `plot` emits 3 x 500 points with the
/// same bytes across runs and thread counts.
fn criterion_12() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs = [plot(&tmp.path().join("a"), 1)?, plot(&tmp.path().join("b"), 4)?, plot(&tmp.path().join("c"), 4)?];
    if runs[1..].iter().any(|r| *r != runs[0]) {
        return Err("plot output differs between runs".into());
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    if names != ["alt.csv", "natural.csv", "plot.svg", "rational.csv"] {
        return Err(format!("unexpected plot files {names:?}"));
    }
    let mut rows = 0;
    for (name, bytes) in runs[0].iter().filter(|(n, _)| n.ends_with(".csv")) {
        let text = String::from_utf8_lossy(bytes);
        let count = text.lines().skip(1).count();
        if count != 500 {
            return Err(format!("{name} has {count} points"));
        }
        rows += count;
    }
    let svg = String::from_utf8_lossy(&runs[0][2].1);
    let circles = svg.matches("<circle").count();
    if circles != 1500 {
        return Err(format!("plot.svg has {circles} points"));
    }

    let ids = (1..=11).map(|i| i.to_string()).collect::<Vec<_>>().join(",");
    let out = Command::new(BIN).args(["selftest", "--criteria", &ids]).output().map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let passed = stdout.lines().filter(|l| l.starts_with("[PASS]")).count();
    if !out.status.success() || passed != 11 {
        return Err(format!("selftest passed {passed} of 11:\n{stdout}"));
    }
    Ok(format!("{rows} CSV rows and {circles} SVG points, identical over 3 runs; selftest passed 11 of 11"))
}

fn main() {
    let mut failed = 0;
    for &(id, _, _) in CRITERIA.iter() {
        let outcome = run_criterion(id).expect("listed criterion");
        println!("{outcome}");
        failed += usize::from(!outcome.pass);
    }
    let start = Instant::now();
    let result = criterion_12();
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(120);
    let (pass, detail) = match result {
        Ok(detail) if elapsed <= limit => (true, detail),
        Ok(detail) => (false, format!("{detail}; time limit exceeded")),
        Err(e) => (false, e),
    };
    println!(
        "[{}] 12. CLI reproducibility ({:.2} s, limit {} s): {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs(),
        detail
    );
    failed += usize::from(!pass);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
