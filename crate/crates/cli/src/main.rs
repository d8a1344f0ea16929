mod commands;
mod fields;
mod proptests;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use commands::{prepare, COMMANDS};
use fields::Fields;

/// Batch driver for semialgebraic partition and extremal experiments.
///
/// Settings come from a flat JSON config (`--config`) and are overridden by
/// flags. Exit status is 0 when every asserted check passed, 1 when a check
/// failed and 2 for invalid input.
#[derive(Parser, Debug)]
#[command(name = "semialg", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key; the value is parsed as JSON, else taken as a string.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    eps: Option<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the command's CSV table here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Leave timings out so reports compare byte for byte.
    #[arg(long, global = true)]
    no_timings: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Oblivious cell partition of a point set.
    Partition,
    /// Partition every vertex set and measure the homogeneity error exactly.
    Regularity,
    /// Extract a complete sub-product from a dense hypergraph.
    Turan,
    /// Edge counts and biclique certificates along a size ladder.
    Zarankiewicz,
    /// Unit-distance counts at one squared distance or the most frequent one.
    Unitdist,
    /// Equilateral triangle counts in the plane.
    Equilateral,
    /// Cograph extraction (task = cograph) or the sampling tester (task = tester).
    Ramsey,
    /// Build and audit the blowup hard instance.
    Hardinstance,
    /// Seeded randomized cross-checks against reference implementations.
    Proptest,
    /// Run a certificate suite.
    Certificates,
    /// Run one command over every combination of varied config keys.
    Sweep,
    /// Take the command from the config's `command` key.
    Run,
}

impl Cmd {
    fn name(self) -> Option<&'static str> {
        let i = match self {
            Cmd::Partition => 0,
            Cmd::Regularity => 1,
            Cmd::Turan => 2,
            Cmd::Zarankiewicz => 3,
            Cmd::Unitdist => 4,
            Cmd::Equilateral => 5,
            Cmd::Ramsey => 6,
            Cmd::Hardinstance => 7,
            Cmd::Proptest => 8,
            Cmd::Certificates => 9,
            Cmd::Sweep => 10,
            Cmd::Run => return None,
        };
        Some(COMMANDS[i])
    }
}

fn input_error(msgs: &[String]) -> ExitCode {
    for m in msgs {
        eprintln!("error: {m}");
    }
    ExitCode::from(2)
}

fn exit_code(e: &semialg::Error) -> u8 {
    match e {
        semialg::Error::Internal(_) => 1,
        _ => 2,
    }
}

/// File config overlaid with flags.
fn merged_config(cli: &Cli) -> Result<Map<String, Value>, Vec<String>> {
    let mut map = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(vec![format!("{}: config must be a JSON object", path.display())]),
                Err(e) => return Err(vec![format!("{}: {e}", path.display())]),
            }
        }
        None => Map::new(),
    };
    let mut problems = Vec::new();
    for kv in &cli.set {
        match kv.split_once('=') {
            Some((k, v)) if !k.is_empty() => {
                let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
                map.insert(k.to_string(), value);
            }
            _ => problems.push(format!("--set {kv:?}: expected KEY=VALUE")),
        }
    }
    if let Some(s) = cli.seed {
        map.insert("seed".into(), json!(s));
    }
    if let Some(e) = &cli.eps {
        map.insert("eps".into(), json!(e));
    }
    if let Some(w) = cli.workers {
        map.insert("workers".into(), json!(w));
    }
    if problems.is_empty() {
        Ok(map)
    } else {
        Err(problems)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut map = match merged_config(&cli) {
        Ok(m) => m,
        Err(p) => return input_error(&p),
    };
    let from_file = map.get("command").cloned();
    let command = match (cli.command.name(), from_file) {
        (Some(c), None) => c.to_string(),
        (Some(c), Some(Value::String(f))) if f == c => f,
        (Some(c), Some(f)) => return input_error(&[format!("command: config says {f}, command line says {c:?}")]),
        (None, Some(Value::String(f))) => f,
        (None, _) => return input_error(&["command: `run` needs a string `command` key in the config".into()]),
    };
    map.insert("command".into(), json!(command));

    let mut f = Fields::new(map.clone());
    let workers: Option<usize> = f.opt("workers");
    if workers == Some(0) {
        f.problem("workers: must be positive");
    }
    let out: Option<PathBuf> = cli.out.clone().or_else(|| f.opt("out"));
    let csv_path: Option<PathBuf> = cli.csv.clone().or_else(|| f.opt("csv"));
    let job = prepare(&command, &mut f);
    if let Err(problems) = f.finish() {
        eprintln!("error: invalid {command} config ({} problems)", problems.len());
        return input_error(&problems);
    }
    let Some(job) = job else {
        return input_error(&["config could not be prepared".into()]);
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return input_error(&[format!("workers: {e}")]),
    };
    let start = Instant::now();
    let outcome = match pool.install(job) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {command} failed: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let elapsed = start.elapsed();
    // execution settings go with the timings so reports compare across worker counts
    map.remove("workers");

    let mut report = json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "monomial_order": semialg::MONOMIAL_ORDER,
        "command": command,
        "config": Value::Object(map),
        "passed": outcome.passed,
        "summary": Value::Object(outcome.summary),
        "result": outcome.result,
    });
    if !cli.no_timings {
        report["timings"] = json!({ "total_ms": elapsed.as_secs_f64() * 1e3, "workers": pool.current_num_threads() });
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                return input_error(&[format!("cannot write {}: {e}", p.display())]);
            }
        }
        None => print!("{text}"),
    }
    if let Some(p) = &csv_path {
        match &outcome.csv {
            Some(csv) => {
                if let Err(e) = std::fs::write(p, csv) {
                    return input_error(&[format!("cannot write {}: {e}", p.display())]);
                }
            }
            None => eprintln!("warning: {command} produces no CSV table"),
        }
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("{command}: an asserted check failed");
        ExitCode::from(1)
    }
}
