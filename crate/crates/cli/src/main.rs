mod params;
mod report;
mod scenarios;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use params::{config_err, ConfigError, Params};
use report::{write_series, Report};
use scenarios::{lookup, Context, SCENARIOS};

#[derive(Parser)]
#[command(name = "gauge-forms", version, about = "Run numerical verification scenarios")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario. Parameters are passed as `--name value`; `--out DIR`,
    /// `--config FILE.json`, `--seed N` and `--inject-fault monopole` are also accepted.
    Run {
        scenario: String,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
        params: Vec<String>,
    },
    /// Run every scenario with default parameters.
    VerifyAll {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "gauge-forms-out")]
        out: PathBuf,
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
    /// List scenario names.
    List,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Fault {
    Monopole,
}

/// Runs one scenario and writes `<out>/<name>/report.json` plus its CSV series.
fn run_scenario(name: &str, mut p: Params, out: &Path) -> anyhow::Result<Report> {
    let runner = lookup(name).ok_or_else(|| config_err(format!("unknown scenario `{name}`")))?;
    let seed = p.u64("seed", 0)?;
    let fault = p.choice("inject-fault", "none", &["none", "monopole"])?;
    let ctx = Context {
        seed,
        monopole: fault == "monopole",
    };
    let outcome = runner(&mut p, &ctx)?;
    let report = Report::new(name, p.resolved().clone(), outcome.checks);
    let dir = out.join(name);
    std::fs::create_dir_all(&dir)?;
    report.write(&dir)?;
    for s in &outcome.series {
        let header: Vec<&str> = s.header.iter().map(String::as_str).collect();
        write_series(&dir.join(s.file), &header, s.rows.iter().cloned())?;
    }
    Ok(report)
}

fn print_report(r: &Report, secs: f64) {
    for c in &r.checks {
        println!(
            "  [{}] {}: measured {:e}, expected {:e}, tolerance {:e}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.measured,
            c.expected,
            c.tolerance
        );
    }
    println!("{} {} ({secs:.2}s)", if r.pass { "PASS" } else { "FAIL" }, r.scenario);
}

fn cmd_run(scenario: &str, args: &[String]) -> anyhow::Result<bool> {
    let flags = Params::parse_args(args)?;
    let mut out = PathBuf::from("gauge-forms-out");
    let mut config = None;
    let mut rest = Vec::new();
    for (k, v) in flags {
        match k.as_str() {
            "out" => out = PathBuf::from(v),
            "config" => config = Some(PathBuf::from(v)),
            _ => rest.push((k, v)),
        }
    }
    // file first so that flags override it
    let mut pairs = match config {
        Some(path) => Params::read_config(&path)?,
        None => Vec::new(),
    };
    pairs.extend(rest);
    let start = Instant::now();
    let report = run_scenario(scenario, Params::from_pairs(pairs), &out)?;
    print_report(&report, start.elapsed().as_secs_f64());
    Ok(report.pass)
}

#[derive(Serialize)]
struct Entry {
    scenario: String,
    pass: bool,
    error: Option<String>,
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    inject_fault: Option<String>,
    scenarios: Vec<Entry>,
    pass: bool,
}

fn cmd_verify_all(seed: u64, out: &Path, fault: Option<Fault>) -> anyhow::Result<bool> {
    let results: Vec<(anyhow::Result<Report>, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = SCENARIOS
            .iter()
            .map(|(name, _)| {
                s.spawn(move || {
                    let mut pairs = vec![("seed".to_string(), seed.to_string())];
                    if fault == Some(Fault::Monopole) {
                        pairs.push(("inject-fault".to_string(), "monopole".to_string()));
                    }
                    let start = Instant::now();
                    let r = run_scenario(name, Params::from_pairs(pairs), out);
                    (r, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    let mut entries = Vec::new();
    for ((name, _), (res, secs)) in SCENARIOS.iter().zip(results) {
        match res {
            Ok(r) => {
                print_report(&r, secs);
                entries.push(Entry { scenario: name.to_string(), pass: r.pass, error: None });
            }
            Err(e) => {
                println!("FAIL {name}: {e:#}");
                entries.push(Entry { scenario: name.to_string(), pass: false, error: Some(format!("{e:#}")) });
            }
        }
    }
    let pass = entries.iter().all(|e| e.pass);
    let summary = Summary {
        seed,
        inject_fault: fault.map(|_| "monopole".to_string()),
        scenarios: entries,
        pass,
    };
    std::fs::create_dir_all(out)?;
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(out.join("summary.json"), text)?;
    let failed = summary.scenarios.iter().filter(|e| !e.pass).count();
    println!("{} of {} scenarios passed", summary.scenarios.len() - failed, summary.scenarios.len());
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { scenario, params } => cmd_run(&scenario, &params),
        Cmd::VerifyAll { seed, out, inject_fault } => cmd_verify_all(seed, &out, inject_fault),
        Cmd::List => {
            for (name, _) in SCENARIOS {
                println!("{name}");
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
