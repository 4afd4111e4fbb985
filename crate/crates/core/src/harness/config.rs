use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::DEFAULT_WORK_BUDGET;
use crate::sequences::SequenceKind;
use crate::subsets::ConstructionSpec;

/// Most patterns a single `patterns` analysis may enumerate.
pub const MAX_PATTERNS: u64 = 1 << 16;
/// Longest `±1` window accepted by the `gamma` analysis.
pub const MAX_GAMMA_LENGTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub construction: ConstructionSpec,
    #[serde(default)]
    pub derivations: Vec<SequenceKind>,
    #[serde(default)]
    pub analyses: Vec<AnalysisSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    /// Default seed for sampled analyses.
    #[serde(default)]
    pub seed: u64,
    /// Elementary-operation cap shared by all correlation analyses.
    #[serde(default = "default_budget")]
    pub budget_ops: u64,
}

fn default_budget() -> u64 {
    DEFAULT_WORK_BUDGET as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalysisSpec {
    /// `|R|` against the construction's predicted size.
    Cardinality,
    /// Symbol counts of every derived sequence.
    Balance {
        #[serde(default)]
        budget: Option<BudgetSpec>,
    },
    /// Sliding-window counts of every pattern of the given length.
    Patterns {
        length: usize,
        #[serde(default)]
        budget: Option<BudgetSpec>,
    },
    /// `Γ(ε)` for every `±1` pattern of length `s`.
    Gamma {
        s: usize,
        #[serde(default)]
        budget: Option<BudgetSpec>,
    },
    Correlation {
        k: usize,
        #[serde(default)]
        budget: Option<BudgetSpec>,
    },
    CorrelationSampled {
        k: usize,
        samples: u64,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        budget: Option<BudgetSpec>,
    },
}

impl AnalysisSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AnalysisSpec::Cardinality => "cardinality",
            AnalysisSpec::Balance { .. } => "balance",
            AnalysisSpec::Patterns { .. } => "patterns",
            AnalysisSpec::Gamma { .. } => "gamma",
            AnalysisSpec::Correlation { .. } => "correlation",
            AnalysisSpec::CorrelationSampled { .. } => "correlation_sampled",
        }
    }

    pub fn budget(&self) -> Option<&BudgetSpec> {
        match self {
            AnalysisSpec::Cardinality => None,
            AnalysisSpec::Balance { budget }
            | AnalysisSpec::Patterns { budget, .. }
            | AnalysisSpec::Gamma { budget, .. }
            | AnalysisSpec::Correlation { budget, .. }
            | AnalysisSpec::CorrelationSampled { budget, .. } => budget.as_ref(),
        }
    }

    fn needs_sequences(&self) -> bool {
        matches!(
            self,
            AnalysisSpec::Balance { .. } | AnalysisSpec::Patterns { .. }
        )
    }
}

/// An asserted deviation budget `constant · shape(q, ℓ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub constant: f64,
    pub shape: BudgetShape,
    /// Set to `false` to report the comparison without failing on it.
    #[serde(default = "yes")]
    pub asserted: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetShape {
    /// `c`
    Absolute,
    /// `c·√q·log q`
    SqrtLog,
    /// `c·√q·log² q`
    SqrtLog2,
    /// `c·2^ℓ·√q·log q`, `ℓ` the pattern length
    PatternSqrtLog,
    /// `c·2^s·C(R, q, s)`
    GammaCorrelation,
}

impl BudgetShape {
    pub fn describe(self, constant: f64) -> String {
        match self {
            BudgetShape::Absolute => format!("{constant}"),
            BudgetShape::SqrtLog => format!("{constant} sqrt(q) log q"),
            BudgetShape::SqrtLog2 => format!("{constant} sqrt(q) log^2 q"),
            BudgetShape::PatternSqrtLog => format!("{constant} 2^l sqrt(q) log q"),
            BudgetShape::GammaCorrelation => format!("{constant} 2^s C(R,q,s)"),
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON, reporting the offending field path on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig =
            serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks that analyses fit the derivations and the feasibility guards.
    pub fn validate(&self) -> Result<()> {
        for (i, analysis) in self.analyses.iter().enumerate() {
            let path = format!("analyses[{i}]");
            let fail = |message: String| {
                Err(Error::Config {
                    path: path.clone(),
                    message,
                })
            };
            if analysis.needs_sequences() && self.derivations.is_empty() {
                return fail(format!(
                    "`{}` needs at least one derivation",
                    analysis.name()
                ));
            }
            match analysis {
                AnalysisSpec::Patterns { length, .. } => {
                    if *length == 0 {
                        return fail("pattern length must be positive".into());
                    }
                    for kind in &self.derivations {
                        let size = kind.alphabet().len() as u64;
                        let count = size.checked_pow(*length as u32).unwrap_or(u64::MAX);
                        if count > MAX_PATTERNS {
                            return fail(format!(
                                "{} has {count} patterns of length {length}, above {MAX_PATTERNS}",
                                kind.label()
                            ));
                        }
                    }
                }
                AnalysisSpec::Gamma { s, .. } => {
                    if *s == 0 || *s > MAX_GAMMA_LENGTH {
                        return fail(format!("s must be in 1..={MAX_GAMMA_LENGTH}"));
                    }
                }
                AnalysisSpec::Correlation { k, .. }
                | AnalysisSpec::CorrelationSampled { k, .. }
                    if *k == 0 =>
                {
                    return fail("k must be positive".into());
                }
                _ => {}
            }
            if let Some(b) = analysis.budget() {
                if !b.constant.is_finite() || b.constant < 0.0 {
                    return fail("budget constant must be finite and nonnegative".into());
                }
                if b.shape == BudgetShape::GammaCorrelation
                    && !matches!(analysis, AnalysisSpec::Gamma { .. })
                {
                    return fail("gamma_correlation budgets apply only to gamma".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = r#"{
            "construction": {"kind": "quadratic_residues", "params": {"p": 11}},
            "derivations": [{"kind": "gap_mod", "params": {"M": 2}}, {"kind": "characteristic"}],
            "analyses": [
                {"type": "cardinality"},
                {"type": "balance", "budget": {"constant": 4, "shape": "sqrt_log"}},
                {"type": "patterns", "length": 2},
                {"type": "gamma", "s": 2, "budget": {"constant": 2, "shape": "gamma_correlation"}},
                {"type": "correlation", "k": 2},
                {"type": "correlation_sampled", "k": 3, "samples": 10, "seed": 5}
            ],
            "output": {"path": "out.json", "format": "csv"},
            "seed": 1
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(config.analyses.len(), 6);
        assert_eq!(config.budget_ops, 1_000_000_000);
        assert_eq!(config.output.as_ref().unwrap().format, OutputFormat::Csv);
        let again = serde_json::to_string(&config).unwrap();
        assert_eq!(ExperimentConfig::from_json(&again).unwrap(), config);
    }

    #[test]
    fn errors_carry_field_paths() {
        let text = r#"{
            "construction": {"kind": "quadratic_residues", "params": {"p": 11}},
            "analyses": [{"type": "patterns", "length": "two"}]
        }"#;
        match ExperimentConfig::from_json(text) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("analyses[0]"), "{path}"),
            other => panic!("unexpected {other:?}"),
        }
        let text = r#"{"construction": {"kind": "quadratic_residues", "params": {"p": 11}},
                       "analyses": [{"type": "balance"}]}"#;
        assert!(matches!(
            ExperimentConfig::from_json(text),
            Err(Error::Config { path, .. }) if path == "analyses[0]"
        ));
        let text = r#"{"construction": {"kind": "quadratic_residues", "params": {"p": 11}},
                       "derivations": [{"kind": "gap_mod", "params": {"M": 9}}],
                       "analyses": [{"type": "patterns", "length": 6}]}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text =
            r#"{"construction": {"kind": "quadratic_residues", "params": {"p": 11}}, "extra": 1}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }
}
