use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use inr_bench::corpus::{scan_corpus, RegimeRules};
use inr_bench::harness::{self, report, RunConfig, CONFIG_KEYS};
use inr_bench::metrics::{aggregate, read_metrics_csv};
use inr_bench::network::load_field;
use inr_bench::stats::{pairwise_for_pairs, write_pairwise_csv};
use inr_bench::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_TASKS: u8 = 2;
const EXIT_FATAL: u8 = 3;

fn config_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("Flat key = value config file"),
    );
    CONFIG_KEYS.iter().fold(cmd, |cmd, (key, help)| {
        cmd.arg(
            Arg::new(*key)
                .long(&*Box::leak(key.replace('_', "-").into_boxed_str()))
                .value_name("VALUE")
                .help(*help)
                .help_heading("Config keys"),
        )
    })
}

fn cli() -> Command {
    Command::new("inrbench")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Column-holdout benchmark for implicit neural image representations")
        .subcommand_required(true)
        .arg(
            Arg::new("verbose")
                .short('v')
                .long("verbose")
                .action(ArgAction::Count)
                .global(true)
                .help("More log output (repeat for more)"),
        )
        .subcommand(
            Command::new("make-demo")
                .about("Write the synthetic phantom corpus")
                .arg(Arg::new("out").long("out").required(true).value_name("DIR"))
                .arg(Arg::new("seed").long("seed").default_value("0").value_parser(clap::value_parser!(u64))),
        )
        .subcommand(
            Command::new("scan")
                .about("Scan a corpus and write its manifest")
                .arg(Arg::new("corpus").long("corpus").required(true).value_name("DIR"))
                .arg(Arg::new("regions-dir").long("regions-dir").default_value("regions"))
                .arg(Arg::new("out").long("out").required(true).value_name("FILE")),
        )
        .subcommand(config_args(Command::new("run").about("Run the full benchmark")))
        .subcommand(
            Command::new("render")
                .about("Render a trained-field file to a 16-bit PNG")
                .arg(Arg::new("field").long("field").required(true).value_name("FILE"))
                .arg(Arg::new("out").long("out").required(true).value_name("PNG")),
        )
        .subcommand(config_args(
            Command::new("stats")
                .about("Recompute pairwise.csv from a metrics.csv")
                .arg(Arg::new("metrics").long("metrics").required(true).value_name("CSV"))
                .arg(Arg::new("out").long("out").required(true).value_name("CSV")),
        ))
        .subcommand(config_args(
            Command::new("report")
                .about("Print result tables from a metrics.csv")
                .arg(Arg::new("metrics").long("metrics").value_name("CSV"))
                .arg(
                    Arg::new("show-config")
                        .long("show-config")
                        .action(ArgAction::SetTrue)
                        .help("Print every effective config value"),
                ),
        ))
}

/// Defaults, then the config file, then the output-dir env override, then flags.
fn resolve_config(m: &ArgMatches) -> inr_bench::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = m.get_one::<String>("config") {
        cfg.apply_file(Path::new(path))?;
    }
    cfg.apply_env();
    for (key, _) in CONFIG_KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

enum Failure {
    Usage(String),
    Fatal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidInput(_) => Failure::Usage(e.to_string()),
            _ => Failure::Fatal(e.to_string()),
        }
    }
}

fn require_file(path: &str) -> Result<PathBuf, Failure> {
    let p = PathBuf::from(path);
    if p.is_file() {
        Ok(p)
    } else {
        Err(Failure::Usage(format!("input file not found: {path}")))
    }
}

fn read_rows(path: &str) -> Result<Vec<inr_bench::metrics::MetricRow>, Failure> {
    let p = require_file(path)?;
    let file = std::fs::File::open(&p).map_err(|e| Failure::Fatal(format!("{}: {e}", p.display())))?;
    Ok(read_metrics_csv(file)?)
}

fn dispatch(matches: &ArgMatches) -> Result<u8, Failure> {
    match matches.subcommand() {
        Some(("make-demo", m)) => {
            let out = PathBuf::from(m.get_one::<String>("out").expect("required"));
            let written = harness::make_demo_corpus(&out, *m.get_one::<u64>("seed").expect("default"))?;
            println!("wrote {} images under {}", written.len(), out.display());
        }
        Some(("scan", m)) => {
            let root = PathBuf::from(m.get_one::<String>("corpus").expect("required"));
            if !root.is_dir() {
                return Err(Failure::Usage(format!("corpus directory not found: {}", root.display())));
            }
            let rules = RegimeRules {
                regions_dir: m.get_one::<String>("regions-dir").expect("default").clone(),
            };
            let corpus = scan_corpus(&root, &rules)?;
            corpus.write_manifest(Path::new(m.get_one::<String>("out").expect("required")))?;
            println!(
                "{} images ({} skipped), modal size {:?}",
                corpus.records.len(),
                corpus.skipped.len(),
                corpus.modal_size
            );
        }
        Some(("run", m)) => {
            let cfg = resolve_config(m)?;
            if !Path::new(&cfg.corpus).is_dir() {
                return Err(Failure::Usage(format!("corpus directory not found: {}", cfg.corpus)));
            }
            let outcome = harness::run_benchmark(&cfg)?;
            let failed = outcome.ledger.failures();
            println!(
                "{} rows written to {} ({} failed tasks)",
                outcome.rows.len(),
                cfg.out_dir,
                failed
            );
            if failed > 0 {
                return Ok(EXIT_TASKS);
            }
        }
        Some(("render", m)) => {
            let field = load_field(&require_file(m.get_one::<String>("field").expect("required"))?)?;
            let recon = field.render()?;
            harness::write_png16(recon.view(), Path::new(m.get_one::<String>("out").expect("required")))?;
        }
        Some(("stats", m)) => {
            let cfg = resolve_config(m)?;
            let rows = read_rows(m.get_one::<String>("metrics").expect("required"))?;
            let stats = pairwise_for_pairs(&rows, &cfg.active_pairs(), &cfg.pairwise_options())?;
            let out = m.get_one::<String>("out").expect("required");
            let file = std::fs::File::create(out).map_err(|e| Failure::Fatal(format!("{out}: {e}")))?;
            write_pairwise_csv(&stats, file)?;
        }
        Some(("report", m)) => {
            let cfg = resolve_config(m)?;
            if m.get_flag("show-config") {
                for (k, v) in cfg.entries() {
                    println!("{k} = {v}");
                }
            }
            match m.get_one::<String>("metrics") {
                Some(path) => {
                    let rows = read_rows(path)?;
                    let summary = aggregate(&rows)?;
                    print!("{}", report::full_report(&summary, &rows));
                }
                None if m.get_flag("show-config") => {}
                None => return Err(Failure::Usage("report needs --metrics (or --show-config)".into())),
            }
        }
        _ => unreachable!("subcommand required"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match matches.get_count("verbose") {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match dispatch(&matches) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Fatal(msg)) => {
            eprintln!("fatal: {msg}");
            ExitCode::from(EXIT_FATAL)
        }
    }
}
