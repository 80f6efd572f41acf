use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Difficulty, PatternKind};

/// Inclusive integer range, written `[lo, hi]` in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(i64, i64)", into = "(i64, i64)")]
pub struct Span {
    pub lo: i64,
    pub hi: i64,
}

impl Span {
    pub const fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    fn check(&self, what: &str, min: i64, max: i64) -> Result<(), ConfigError> {
        if self.lo > self.hi {
            return Err(ConfigError::EmptyRange(what.to_string()));
        }
        if self.lo < min || self.hi > max {
            return Err(ConfigError::OutOfBounds {
                what: what.to_string(),
                min,
                max,
            });
        }
        Ok(())
    }
}

impl From<(i64, i64)> for Span {
    fn from((lo, hi): (i64, i64)) -> Self {
        Self { lo, hi }
    }
}

impl From<Span> for (i64, i64) {
    fn from(s: Span) -> Self {
        (s.lo, s.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArithmeticParams {
    pub first: Span,
    pub difference: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricParams {
    pub first: Span,
    pub ratio: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FibonacciParams {
    pub first: Span,
    pub second: Span,
}

/// Sequences of consecutive squares or triangular numbers; `start` is the
/// index of the first stem term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigurateParams {
    pub start: Span,
}

/// `first, +addend, *factor, +addend, *factor, ...`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternatingParams {
    pub first: Span,
    pub addend: Span,
    pub factor: Span,
}

/// Parameter ranges for one difficulty. A kind is enabled iff its table is present.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifficultyParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arithmetic: Option<ArithmeticParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometric: Option<GeometricParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fibonacci_like: Option<FibonacciParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub square_numbers: Option<FigurateParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangular_numbers: Option<FigurateParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternating_rule: Option<AlternatingParams>,
}

impl DifficultyParams {
    /// Enabled kinds in `PatternKind::ALL` order; the draw index refers to this list.
    pub fn enabled_kinds(&self) -> Vec<PatternKind> {
        PatternKind::ALL
            .into_iter()
            .filter(|kind| match kind {
                PatternKind::Arithmetic => self.arithmetic.is_some(),
                PatternKind::Geometric => self.geometric.is_some(),
                PatternKind::FibonacciLike => self.fibonacci_like.is_some(),
                PatternKind::SquareNumbers => self.square_numbers.is_some(),
                PatternKind::TriangularNumbers => self.triangular_numbers.is_some(),
                PatternKind::AlternatingRule => self.alternating_rule.is_some(),
            })
            .collect()
    }

    fn validate(&self, level: &str) -> Result<(), ConfigError> {
        if self.enabled_kinds().is_empty() {
            return Err(ConfigError::NoKinds(level.to_string()));
        }
        let name = |field: &str| format!("{level}.{field}");
        if let Some(p) = &self.arithmetic {
            p.first.check(&name("arithmetic.first"), -LIMIT, LIMIT)?;
            p.difference
                .check(&name("arithmetic.difference"), 1, STEP_LIMIT)?;
        }
        if let Some(p) = &self.geometric {
            p.first.check(&name("geometric.first"), 1, STEP_LIMIT)?;
            p.ratio.check(&name("geometric.ratio"), 2, 5)?;
        }
        if let Some(p) = &self.fibonacci_like {
            p.first.check(&name("fibonacci_like.first"), 1, LIMIT)?;
            p.second.check(&name("fibonacci_like.second"), 1, LIMIT)?;
        }
        if let Some(p) = &self.square_numbers {
            p.start.check(&name("square_numbers.start"), 0, 10_000)?;
        }
        if let Some(p) = &self.triangular_numbers {
            p.start.check(&name("triangular_numbers.start"), 0, 10_000)?;
        }
        if let Some(p) = &self.alternating_rule {
            p.first.check(&name("alternating_rule.first"), 1, STEP_LIMIT)?;
            p.addend
                .check(&name("alternating_rule.addend"), 1, STEP_LIMIT)?;
            p.factor.check(&name("alternating_rule.factor"), 2, 5)?;
        }
        Ok(())
    }
}

// Hard bounds every configured range must sit inside. With them the largest
// reachable magnitude is below 2^40, far from i64 overflow.
const LIMIT: i64 = 1_000_000;
const STEP_LIMIT: i64 = 1_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("range {0} is empty")]
    EmptyRange(String),
    #[error("range {what} must lie within [{min}, {max}]")]
    OutOfBounds { what: String, min: i64, max: i64 },
    #[error("difficulty {0} enables no pattern kinds")]
    NoKinds(String),
    #[error("cannot parse generator config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot read generator config: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-difficulty parameter ranges. Construct through [`GeneratorConfig::new`],
/// [`GeneratorConfig::from_toml_str`] or `Default`; all three validate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    easy: DifficultyParams,
    medium: DifficultyParams,
    hard: DifficultyParams,
}

impl GeneratorConfig {
    pub fn new(
        easy: DifficultyParams,
        medium: DifficultyParams,
        hard: DifficultyParams,
    ) -> Result<Self, ConfigError> {
        let config = Self { easy, medium, hard };
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("generator config is always representable")
    }

    pub fn params(&self, difficulty: Difficulty) -> &DifficultyParams {
        match difficulty {
            Difficulty::Easy => &self.easy,
            Difficulty::Medium => &self.medium,
            Difficulty::Hard => &self.hard,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.easy.validate("easy")?;
        self.medium.validate("medium")?;
        self.hard.validate("hard")
    }
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let easy = DifficultyParams {
            arithmetic: Some(ArithmeticParams {
                first: Span::new(1, 20),
                difference: Span::new(2, 12),
            }),
            square_numbers: Some(FigurateParams {
                start: Span::new(1, 8),
            }),
            triangular_numbers: Some(FigurateParams {
                start: Span::new(1, 8),
            }),
            ..Default::default()
        };
        let medium = DifficultyParams {
            arithmetic: Some(ArithmeticParams {
                first: Span::new(-20, 50),
                difference: Span::new(4, 18),
            }),
            geometric: Some(GeometricParams {
                first: Span::new(1, 10),
                ratio: Span::new(2, 3),
            }),
            fibonacci_like: Some(FibonacciParams {
                first: Span::new(1, 10),
                second: Span::new(1, 15),
            }),
            square_numbers: Some(FigurateParams {
                start: Span::new(4, 15),
            }),
            triangular_numbers: Some(FigurateParams {
                start: Span::new(4, 15),
            }),
            ..Default::default()
        };
        let hard = DifficultyParams {
            arithmetic: Some(ArithmeticParams {
                first: Span::new(-100, 100),
                difference: Span::new(7, 25),
            }),
            geometric: Some(GeometricParams {
                first: Span::new(2, 20),
                ratio: Span::new(2, 5),
            }),
            fibonacci_like: Some(FibonacciParams {
                first: Span::new(5, 40),
                second: Span::new(5, 60),
            }),
            square_numbers: Some(FigurateParams {
                start: Span::new(10, 40),
            }),
            triangular_numbers: Some(FigurateParams {
                start: Span::new(10, 40),
            }),
            alternating_rule: Some(AlternatingParams {
                first: Span::new(1, 20),
                addend: Span::new(1, 15),
                factor: Span::new(2, 4),
            }),
        };
        Self::new(easy, medium, hard).expect("bundled generator defaults are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_enable_kinds_by_difficulty() {
        let config = GeneratorConfig::default();
        use PatternKind::*;
        assert_eq!(
            config.params(Difficulty::Easy).enabled_kinds(),
            vec![Arithmetic, SquareNumbers, TriangularNumbers]
        );
        assert_eq!(
            config.params(Difficulty::Medium).enabled_kinds(),
            vec![
                Arithmetic,
                Geometric,
                FibonacciLike,
                SquareNumbers,
                TriangularNumbers
            ]
        );
        assert_eq!(
            config.params(Difficulty::Hard).enabled_kinds(),
            PatternKind::ALL.to_vec()
        );
    }

    #[test]
    fn toml_round_trip() {
        let config = GeneratorConfig::default();
        let text = config.to_toml_string();
        assert_eq!(GeneratorConfig::from_toml_str(&text).unwrap(), config);
    }

    #[test]
    fn rejects_bad_ranges() {
        let text = r#"
            [easy.arithmetic]
            first = [1, 20]
            difference = [5, 2]
            [medium.square_numbers]
            start = [1, 3]
            [hard.square_numbers]
            start = [1, 3]
        "#;
        assert!(matches!(
            GeneratorConfig::from_toml_str(text),
            Err(ConfigError::EmptyRange(_))
        ));

        let text = r#"
            [easy.geometric]
            first = [1, 20]
            ratio = [1, 3]
            [medium.square_numbers]
            start = [1, 3]
            [hard.square_numbers]
            start = [1, 3]
        "#;
        assert!(matches!(
            GeneratorConfig::from_toml_str(text),
            Err(ConfigError::OutOfBounds { .. })
        ));

        let text = r#"
            [easy]
            [medium.square_numbers]
            start = [1, 3]
            [hard.square_numbers]
            start = [1, 3]
        "#;
        assert!(matches!(
            GeneratorConfig::from_toml_str(text),
            Err(ConfigError::NoKinds(_))
        ));
    }
}
