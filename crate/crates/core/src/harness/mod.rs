//! Experiment pipelines: construct a set, derive sequences, measure them and
//! compare against main terms within deviation budgets.

pub mod config;
pub mod report;
pub mod sweep;

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fraction::{big, big_ratio, decimal_string, exact_string};
use crate::measures::CorrelationResult;
use crate::measures::{
    all_patterns, correlation_exact_with, correlation_sampled_with, correlation_up_to_with,
    gamma_pattern, gamma_table, pattern_counts, symbol_counts, CorrelationOptions, SignVector,
};
use crate::predictions::{
    main_term_gamma, main_term_pattern_s, main_term_pattern_t, main_term_pattern_u,
    predicted_cardinality, DeviationBudget,
};
use crate::sequences::{derive, DerivedSequence, SequenceKind};
use crate::subsets::{construct, ConstructionSpec, ResidueSet};

pub use config::{
    AnalysisSpec, BudgetShape, BudgetSpec, ExperimentConfig, OutputFormat, OutputSpec,
};
pub use report::{strip_timing, ReportRow, Status, VerificationReport};
pub use sweep::{sweep, ParameterGrid, SweepOutcome, SweepPoint};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the compact JSON encoding, as lowercase hex.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

struct Context<'a> {
    spec: &'a ConstructionSpec,
    set: &'a ResidueSet,
    sequences: &'a [DerivedSequence],
    opts: CorrelationOptions,
    seed: u64,
}

impl Context<'_> {
    fn q(&self) -> u64 {
        self.set.modulus()
    }

    fn t(&self) -> u64 {
        self.set.len() as u64
    }
}

fn with_context(what: &str, err: Error) -> Error {
    match err {
        Error::Config { .. } | Error::Io(_) => err,
        other => Error::Config {
            path: what.into(),
            message: other.to_string(),
        },
    }
}

/// Runs the pipeline described by `config`. Identical configs give identical
/// reports apart from `timing_seconds`.
pub fn run(config: &ExperimentConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    config.validate()?;
    let set = construct(&config.construction).map_err(|e| with_context("construction", e))?;
    let sequences = config
        .derivations
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            derive(&set, kind).map_err(|e| with_context(&format!("derivations[{i}]"), e))
        })
        .collect::<Result<Vec<_>>>()?;
    let ctx = Context {
        spec: &config.construction,
        set: &set,
        sequences: &sequences,
        opts: CorrelationOptions {
            budget: config.budget_ops as u128,
            parallel: true,
        },
        seed: config.seed,
    };
    let mut rows = Vec::new();
    for (i, analysis) in config.analyses.iter().enumerate() {
        analyse(&ctx, analysis, &mut rows)
            .map_err(|e| with_context(&format!("analyses[{i}]"), e))?;
    }
    let status = if rows.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else {
        Status::Pass
    };
    Ok(VerificationReport {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        config_hash: config_hash(config),
        seed: config.seed,
        config: config.clone(),
        modulus: set.modulus(),
        set_size: set.len(),
        rows,
        status,
        timing_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Parameters that instantiate a budget shape.
struct Scale {
    pattern_len: usize,
    correlation: Option<BigRational>,
}

fn instantiate(spec: &BudgetSpec, q: u64, scale: &Scale) -> DeviationBudget {
    let formula = spec.shape.describe(spec.constant);
    let qf = q as f64;
    let sqrt_log = qf.sqrt() * qf.ln();
    let c = spec.constant;
    match spec.shape {
        BudgetShape::Absolute => DeviationBudget::from_f64(c, formula, spec.asserted),
        BudgetShape::SqrtLog => DeviationBudget::from_f64(c * sqrt_log, formula, spec.asserted),
        BudgetShape::SqrtLog2 => {
            DeviationBudget::from_f64(c * sqrt_log * qf.ln(), formula, spec.asserted)
        }
        BudgetShape::PatternSqrtLog => DeviationBudget::from_f64(
            c * 2f64.powi(scale.pattern_len as i32) * sqrt_log,
            formula,
            spec.asserted,
        ),
        BudgetShape::GammaCorrelation => {
            // exact: constant (as a decimal) · 2^s · C
            let constant = decimal_constant(c);
            let corr = scale.correlation.clone().unwrap_or_else(|| big(0));
            let value = constant * big(1i64 << scale.pattern_len) * corr;
            DeviationBudget::rational(value, formula, spec.asserted)
        }
    }
}

/// The shortest decimal that round-trips `c`, as an exact rational.
fn decimal_constant(c: f64) -> BigRational {
    let text = format!("{c}");
    match text.split_once('.') {
        None => big(text.parse::<BigInt>().expect("finite float")),
        Some((i, f)) => {
            let digits: BigInt = format!("{i}{f}").parse().expect("finite float");
            big_ratio(digits, BigInt::from(10).pow(f.len() as u32))
        }
    }
}

fn compare(
    analysis: &str,
    sequence: &str,
    item: String,
    empirical: BigRational,
    predicted: Option<BigRational>,
    budget: Option<DeviationBudget>,
) -> ReportRow {
    let deviation = predicted.as_ref().map(|p| (&empirical - p).abs());
    let status = match (&deviation, &budget) {
        (Some(d), Some(b)) if b.asserted => {
            if b.admits(d) {
                Status::Pass
            } else {
                Status::Fail
            }
        }
        _ => Status::ReportOnly,
    };
    ReportRow {
        analysis: analysis.into(),
        sequence: sequence.into(),
        item,
        empirical: exact_string(&empirical),
        predicted: predicted.as_ref().map(exact_string),
        predicted_decimal: predicted.as_ref().map(|p| decimal_string(p, 15)),
        deviation: deviation.as_ref().map(|d| decimal_string(d, 15)),
        budget: budget.as_ref().map(DeviationBudget::decimal),
        budget_formula: budget.map(|b| b.formula),
        status,
    }
}

fn format_pattern(p: &[u64]) -> String {
    let parts: Vec<String> = p.iter().map(u64::to_string).collect();
    format!("[{}]", parts.join(" "))
}

fn analyse(ctx: &Context, analysis: &AnalysisSpec, rows: &mut Vec<ReportRow>) -> Result<()> {
    let name = analysis.name();
    let (q, t) = (ctx.q(), ctx.t());
    match analysis {
        AnalysisSpec::Cardinality => {
            let prediction = predicted_cardinality(ctx.spec)?;
            rows.push(compare(
                name,
                "set",
                "|R|".into(),
                big(t),
                Some(prediction.main),
                Some(prediction.budget),
            ));
        }
        AnalysisSpec::Balance { budget } => {
            for seq in ctx.sequences {
                let scale = Scale {
                    pattern_len: 1,
                    correlation: None,
                };
                let b = budget.as_ref().map(|b| instantiate(b, q, &scale));
                for (symbol, count) in symbol_counts(seq) {
                    let main = pattern_main_term(seq.kind(), &[symbol], t, q)?;
                    rows.push(compare(
                        name,
                        &seq.kind().label(),
                        format!("[{symbol}]"),
                        big(count as u64),
                        main,
                        b.clone(),
                    ));
                }
            }
        }
        AnalysisSpec::Patterns { length, budget } => {
            for seq in ctx.sequences {
                let scale = Scale {
                    pattern_len: *length,
                    correlation: None,
                };
                let b = budget.as_ref().map(|b| instantiate(b, q, &scale));
                let counts = if *length <= seq.len() {
                    pattern_counts(seq, *length)?
                } else {
                    Default::default()
                };
                for pattern in all_patterns(&seq.kind().alphabet(), *length) {
                    let count = counts.get(&pattern).copied().unwrap_or(0);
                    let main = pattern_main_term(seq.kind(), &pattern, t, q)?;
                    rows.push(compare(
                        name,
                        &seq.kind().label(),
                        format_pattern(&pattern),
                        big(count as u64),
                        main,
                        b.clone(),
                    ));
                }
            }
        }
        AnalysisSpec::Gamma { s, budget } => {
            let table = gamma_table(&SignVector::new(ctx.set), *s)?;
            let correlation = match budget {
                Some(b) if b.shape == BudgetShape::GammaCorrelation => {
                    Some(correlation_up_to_with(ctx.set, *s, &ctx.opts)?)
                }
                _ => None,
            };
            let scale = Scale {
                pattern_len: *s,
                correlation: correlation.map(|c| big_ratio(*c.numer(), *c.denom())),
            };
            let b = budget.as_ref().map(|b| instantiate(b, q, &scale));
            for (code, &count) in table.iter().enumerate() {
                let eps = gamma_pattern(code, *s);
                let label: String = eps
                    .iter()
                    .map(|&e| if e == 1 { '+' } else { '-' })
                    .collect();
                rows.push(compare(
                    name,
                    "set",
                    label,
                    big(count as u64),
                    Some(main_term_gamma(&eps, t, q)?),
                    b.clone(),
                ));
            }
        }
        AnalysisSpec::Correlation { k, budget } => {
            let r = correlation_exact_with(ctx.set, *k, &ctx.opts)?;
            rows.push(correlation_row(name, &r, q, budget.as_ref(), t));
        }
        AnalysisSpec::CorrelationSampled {
            k,
            samples,
            seed,
            budget,
        } => {
            let r = correlation_sampled_with(
                ctx.set,
                *k,
                *samples,
                seed.unwrap_or(ctx.seed),
                &ctx.opts,
            )?;
            rows.push(correlation_row(name, &r, q, budget.as_ref(), t));
        }
    }
    Ok(())
}

fn correlation_row(
    name: &str,
    r: &CorrelationResult,
    q: u64,
    budget: Option<&BudgetSpec>,
    t: u64,
) -> ReportRow {
    let value = big_ratio(r.value.num, r.value.den);
    let scale = Scale {
        pattern_len: r.k,
        correlation: None,
    };
    // without an explicit budget, check the trivial bound min(T, q − T)
    let b = match budget {
        Some(b) => instantiate(b, q, &scale),
        None => DeviationBudget::rational(big(t.min(q - t)), "min(T, q-T)", true),
    };
    let lags: Vec<u64> = r.lags.lags().to_vec();
    compare(
        name,
        "set",
        format!(
            "k={} window={} lags={}",
            r.k,
            r.window,
            format_pattern(&lags)
        ),
        value,
        Some(big(0)),
        Some(b),
    )
}

/// Main term for a pattern of the given sequence kind, or `None` when the
/// density is degenerate (`T = 0`).
fn pattern_main_term(
    kind: SequenceKind,
    pattern: &[u64],
    t: u64,
    q: u64,
) -> Result<Option<BigRational>> {
    let bits = || pattern.iter().map(|&b| b as u8).collect::<Vec<u8>>();
    let value = match kind {
        SequenceKind::GapMod { modulus } => match main_term_pattern_s(pattern, t, q, modulus) {
            Err(Error::DegenerateDensity) => return Ok(None),
            other => other?,
        },
        SequenceKind::GapThreshold { m } => main_term_pattern_t(&bits(), t, q, m)?,
        SequenceKind::Characteristic => main_term_pattern_u(&bits(), t, q)?,
    };
    Ok(Some(value))
}
