use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pseudoset::harness::{sweep, ExperimentConfig, OutputFormat, ParameterGrid};
use pseudoset::measures::{
    all_patterns, correlation_exact_with, correlation_sampled_with, pattern_counts, symbol_counts,
    CorrelationOptions, CorrelationResult, DEFAULT_WORK_BUDGET,
};
use pseudoset::sequences::{derive, DerivedSequence, SequenceKind};
use pseudoset::subsets::{construct, ConstructionSpec, ResidueSet};
use pseudoset::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pseudoset",
    version,
    about = "Pseudorandom subsets of Z_q and their gap sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct Common {
    /// Input JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Elementary-operation budget for correlation work.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    GapMod,
    GapThreshold,
    Characteristic,
}

#[derive(Subcommand)]
enum Command {
    /// List the elements of a constructed set.
    Construct(Common),
    /// Derive a sequence from a set.
    Derive {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Kind,
        /// M for gap_mod, m for gap_threshold.
        #[arg(long)]
        param: Option<u64>,
    },
    /// Symbol and pattern counts of a sequence.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        length: usize,
    },
    /// Correlation measure of order k.
    Corr {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
        /// Sample this many lag tuples instead of enumerating all of them.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Run an experiment config and write its report.
    Verify(Common),
    /// Run an experiment config over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: PathBuf,
    },
}

fn read_json(path: &Path) -> Result<Value> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn parse<T: serde::de::DeserializeOwned>(value: Value, what: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| Error::Config {
        path: format!("{what}.{}", e.path()),
        message: e.inner().to_string(),
    })
}

/// Accepts a set listing, a construction spec or a full experiment config.
fn load_set(path: &Path) -> Result<ResidueSet> {
    let value = read_json(path)?;
    if value.get("construction").is_some() {
        let config = ExperimentConfig::from_json(&value.to_string())?;
        construct(&config.construction)
    } else if value.get("kind").is_some() {
        construct(&parse::<ConstructionSpec>(value, "construction")?)
    } else {
        parse(value, "set")
    }
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn options(common: &Common) -> CorrelationOptions {
    CorrelationOptions {
        budget: common.budget.map_or(DEFAULT_WORK_BUDGET, u128::from),
        parallel: true,
    }
}

fn install_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        // only fails if the global pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn cmd_construct(common: &Common) -> Result<ExitCode> {
    let set = load_set(&common.config)?;
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Csv => csv_text(
            &["element"],
            set.elements().iter().map(|e| vec![e.to_string()]),
        )?,
        Format::Text => {
            let parts: Vec<String> = set.elements().iter().map(u64::to_string).collect();
            format!("{}\n", parts.join(" "))
        }
        Format::Json => pretty(&set),
    };
    emit(common, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_derive(common: &Common, kind: Kind, param: Option<u64>) -> Result<ExitCode> {
    let set = load_set(&common.config)?;
    let need = |name: &'static str| {
        param.ok_or_else(|| Error::Config {
            path: "--param".into(),
            message: format!("{name} is required for this kind"),
        })
    };
    let kind = match kind {
        Kind::GapMod => SequenceKind::GapMod {
            modulus: need("M")?,
        },
        Kind::GapThreshold => SequenceKind::GapThreshold { m: need("m")? },
        Kind::Characteristic => SequenceKind::Characteristic,
    };
    let seq = derive(&set, kind)?;
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&seq),
        Format::Text => format!("{}\n", seq.to_text_line()),
        Format::Csv => csv_text(
            &["n", "symbol"],
            seq.symbols()
                .iter()
                .enumerate()
                .map(|(n, s)| vec![n.to_string(), s.to_string()]),
        )?,
    };
    emit(common, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(common: &Common, length: usize) -> Result<ExitCode> {
    let seq: DerivedSequence = parse(read_json(&common.config)?, "sequence")?;
    let counts = if length <= seq.len() {
        pattern_counts(&seq, length)?
    } else {
        return Err(Error::PatternTooLong {
            len: length,
            max: seq.len(),
        });
    };
    let patterns: Vec<(Vec<u64>, usize)> = all_patterns(&seq.kind().alphabet(), length)
        .into_iter()
        .map(|p| {
            let n = counts.get(&p).copied().unwrap_or(0);
            (p, n)
        })
        .collect();
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Csv | Format::Text => csv_text(
            &["pattern", "count"],
            patterns.iter().map(|(p, n)| {
                let parts: Vec<String> = p.iter().map(u64::to_string).collect();
                vec![parts.join(" "), n.to_string()]
            }),
        )?,
        Format::Json => {
            let symbols: Vec<Value> = symbol_counts(&seq)
                .into_iter()
                .map(|(s, n)| json!({"symbol": s, "count": n}))
                .collect();
            let patterns: Vec<Value> = patterns
                .iter()
                .map(|(p, n)| json!({"pattern": p, "count": n}))
                .collect();
            let mut doc = serde_json::to_value(seq.kind()).expect("json");
            doc["length"] = json!(seq.len());
            doc["symbol_counts"] = Value::from(symbols);
            doc["pattern_length"] = json!(length);
            doc["patterns"] = Value::from(patterns);
            pretty(&doc)
        }
    };
    emit(common, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_corr(common: &Common, k: usize, samples: Option<u64>) -> Result<ExitCode> {
    install_workers(common.workers);
    let set = load_set(&common.config)?;
    let opts = options(common);
    let result: CorrelationResult = match samples {
        Some(n) => correlation_sampled_with(&set, k, n, common.seed.unwrap_or(0), &opts)?,
        None => correlation_exact_with(&set, k, &opts)?,
    };
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&result),
        Format::Csv | Format::Text => {
            let lags: Vec<String> = result.lags.lags().iter().map(u64::to_string).collect();
            let mode = serde_json::to_value(result.mode).expect("json");
            csv_text(
                &["k", "num", "den", "window", "lags", "mode", "tuples"],
                [vec![
                    result.k.to_string(),
                    result.value.num.to_string(),
                    result.value.den.to_string(),
                    result.window.to_string(),
                    lags.join(" "),
                    mode.as_str().unwrap_or_default().to_string(),
                    result.tuples.to_string(),
                ]],
            )?
        }
    };
    emit(common, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_path(&common.config)?;
    if let Some(b) = common.budget {
        config.budget_ops = b;
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    Ok(config)
}

fn report_format(common: &Common, config: &ExperimentConfig) -> OutputFormat {
    match common.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(_) => OutputFormat::Json,
        None => config.output.as_ref().map(|o| o.format).unwrap_or_default(),
    }
}

fn cmd_verify(common: &Common) -> Result<ExitCode> {
    install_workers(common.workers);
    let config = load_config(common)?;
    let report = pseudoset::harness::run(&config)?;
    let text = match report_format(common, &config) {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv()?,
    };
    let out = common.out.clone().or_else(|| {
        config
            .output
            .as_ref()
            .and_then(|o| o.path.as_ref().map(PathBuf::from))
    });
    match out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    eprintln!("{}: {}", common.config.display(), report.status.as_str());
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_sweep(common: &Common, grid_path: &Path) -> Result<ExitCode> {
    let config = load_config(common)?;
    let grid = ParameterGrid::from_json(&read_json(grid_path)?.to_string())?;
    let workers = common
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcome = sweep(&config, &grid, workers)?;
    let text = match common.format {
        Some(Format::Json) => outcome.to_json(),
        _ => outcome.to_csv()?,
    };
    emit(common, &text)?;
    for point in &outcome.points {
        if let Err(message) = &point.report {
            eprintln!("grid point {:?} failed: {message}", point.params);
        }
    }
    Ok(if outcome.any_failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Construct(common) => cmd_construct(common),
        Command::Derive {
            common,
            kind,
            param,
        } => cmd_derive(common, *kind, *param),
        Command::Stats { common, length } => cmd_stats(common, *length),
        Command::Corr { common, k, samples } => cmd_corr(common, *k, *samples),
        Command::Verify(common) => cmd_verify(common),
        Command::Sweep { common, grid } => cmd_sweep(common, grid),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
