use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use microcontinuum::harness::{emit, exit_code, load_scenario, manufacture, run, Regime, RunReport, Scenario};
use microcontinuum::{Error, Result};

#[derive(Parser)]
#[command(name = "microcontinuum", version, about = "Balance-law checks for continua with microstructure")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file; the verb's built-in scenario when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Directory for report.json, residuals.csv and timeseries.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Validate and print the resolved scenario without running it.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Free or SCS regime residuals.
    Check(RunArgs),
    CheckMixture(RunArgs),
    /// Rigid-flow experiments.
    Gnr(RunArgs),
    /// Material covariance conditions.
    Material(RunArgs),
    /// Voids residuals and the bar simulation.
    SimulateVoids(RunArgs),
    /// Noether checks on a leapfrog trajectory.
    VerifyNoether(RunArgs),
    /// Writes a manufactured state and the scenario that produced it.
    Manufacture {
        #[arg(long)]
        regime: Regime,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn threads() -> Result<()> {
    if let Ok(v) = std::env::var("MICROCONTINUUM_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| Error::Parse(format!("MICROCONTINUUM_THREADS='{v}'")))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Unsupported(e.to_string()))?;
        }
    }
    Ok(())
}

fn scenario_for(args: &RunArgs, allowed: &[Regime]) -> Result<Scenario> {
    let mut s = match &args.scenario {
        Some(p) => load_scenario(p)?,
        None => Scenario::minimal(allowed[0], 0),
    };
    if !allowed.contains(&s.regime) {
        let names: Vec<&str> = allowed.iter().map(|r| r.name()).collect();
        return Err(Error::Schema {
            path: "regime".into(),
            message: format!("this command runs {} scenarios, found {}", names.join("/"), s.regime.name()),
        });
    }
    if let Some(seed) = args.seed {
        s.seed = seed;
    }
    s.validate()?;
    Ok(s)
}

fn summary(r: &RunReport) {
    for rep in &r.reports {
        for l in &rep.laws {
            let tag = if l.pass { "PASS" } else { "FAIL" };
            println!("{tag} {:<12} {:<30} linf={:.3e} tol={:.1e}", rep.regime, l.law, l.linf, l.tol);
        }
    }
    println!("{}: {} in {:.2}s", r.scenario, if r.passed { "passed" } else { "FAILED" }, r.wall_time_s);
}

fn execute(args: &RunArgs, allowed: &[Regime]) -> Result<i32> {
    let s = scenario_for(args, allowed)?;
    if args.dry_run {
        let resolved = s.with_defaults();
        println!("{}", serde_json::to_string_pretty(&resolved).map_err(|e| Error::Io(e.to_string()))?);
        return Ok(0);
    }
    let report = run(&s)?;
    summary(&report);
    if let Some(dir) = &args.out {
        for p in emit(&report, dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn write_manufactured(regime: Regime, seed: u64, out: &Path) -> Result<i32> {
    std::fs::create_dir_all(out)?;
    let scenario = Scenario::minimal(regime, seed).with_defaults();
    let bundle = manufacture(regime, seed);
    let values: BTreeMap<&str, Vec<f64>> = bundle.values().into_iter().collect();
    let doc = serde_json::json!({ "regime": regime, "seed": seed, "fields": values });
    let to_io = |e: serde_json::Error| Error::Io(e.to_string());
    std::fs::write(out.join("scenario.json"), serde_json::to_string_pretty(&scenario).map_err(to_io)?)?;
    std::fs::write(out.join("bundle.json"), serde_json::to_string_pretty(&doc).map_err(to_io)?)?;
    eprintln!("wrote {}/scenario.json and bundle.json", out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads().and_then(|_| match &cli.verb {
        Verb::Check(a) => execute(a, &[Regime::Free, Regime::Scs]),
        Verb::CheckMixture(a) => execute(a, &[Regime::Mixture]),
        Verb::Gnr(a) => execute(a, &[Regime::Gnr]),
        Verb::Material(a) => execute(a, &[Regime::Material]),
        Verb::SimulateVoids(a) => execute(a, &[Regime::Voids]),
        Verb::VerifyNoether(a) => execute(a, &[Regime::Variational]),
        Verb::Manufacture { regime, seed, out } => write_manufactured(*regime, *seed, out),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
