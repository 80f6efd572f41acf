//! Procedurally generated number-pattern questions.
//!
//! A card shows four terms of a sequence and asks for the fifth. Every card is
//! a pure function of `(seed, difficulty, config)`: the seed starts a
//! [`SplitMix64`] stream and the draws happen in this order:
//!
//! 1. kind index: `below(enabled.len())` over the enabled kinds in
//!    [`PatternKind::ALL`] order;
//! 2. the kind's parameters, each with `range_inclusive`, in the field order
//!    of its parameter table;
//! 3. distractors: the seven rule candidates are shuffled, the first three
//!    distinct ones that differ from the answer are kept;
//! 4. the four choices `[answer, d1, d2, d3]` are shuffled.

mod config;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{
    AlternatingParams, ArithmeticParams, ConfigError, DifficultyParams, FibonacciParams,
    FigurateParams, GeneratorConfig, GeometricParams, Span,
};

use crate::prng::SplitMix64;

pub const STEM_LEN: usize = 4;
pub const CHOICE_COUNT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Arithmetic,
    Geometric,
    FibonacciLike,
    SquareNumbers,
    TriangularNumbers,
    AlternatingRule,
}

impl PatternKind {
    pub const ALL: [PatternKind; 6] = [
        PatternKind::Arithmetic,
        PatternKind::Geometric,
        PatternKind::FibonacciLike,
        PatternKind::SquareNumbers,
        PatternKind::TriangularNumbers,
        PatternKind::AlternatingRule,
    ];

    /// Shortest stem from which the rule can be recovered.
    pub fn min_stem_len(self) -> usize {
        match self {
            PatternKind::FibonacciLike | PatternKind::AlternatingRule => 3,
            _ => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::Arithmetic => "arithmetic",
            PatternKind::Geometric => "geometric",
            PatternKind::FibonacciLike => "fibonacci_like",
            PatternKind::SquareNumbers => "square_numbers",
            PatternKind::TriangularNumbers => "triangular_numbers",
            PatternKind::AlternatingRule => "alternating_rule",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty `{other}` (easy|medium|hard)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("{kind} needs at least {needed} terms, got {got}")]
    StemTooShort {
        kind: PatternKind,
        needed: usize,
        got: usize,
    },
    #[error("stem {stem:?} does not follow the {kind} rule")]
    InconsistentStem { kind: PatternKind, stem: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuestionCard {
    pub id: String,
    pub kind: PatternKind,
    pub stem: [i64; STEM_LEN],
    pub choices: [i64; CHOICE_COUNT],
    pub correct_index: u8,
    pub difficulty: Difficulty,
    pub seed: u64,
}

impl QuestionCard {
    pub fn answer(&self) -> i64 {
        self.choices[self.correct_index as usize]
    }

    pub fn is_correct(&self, choice_index: usize) -> bool {
        choice_index == self.correct_index as usize
    }
}

/// The unique next term of `stem` under the rule of `kind`.
pub fn next_term(kind: PatternKind, stem: &[i64]) -> Result<i64, PatternError> {
    let needed = kind.min_stem_len();
    if stem.len() < needed {
        return Err(PatternError::StemTooShort {
            kind,
            needed,
            got: stem.len(),
        });
    }
    let inconsistent = || PatternError::InconsistentStem {
        kind,
        stem: stem.to_vec(),
    };
    let next = match kind {
        PatternKind::Arithmetic => {
            let d = stem[1].checked_sub(stem[0]);
            let ok = d.is_some() && stem.windows(2).all(|w| w[1].checked_sub(w[0]) == d);
            d.filter(|_| ok)
                .and_then(|d| stem[stem.len() - 1].checked_add(d))
        }
        PatternKind::Geometric => {
            let (a, b) = (stem[0], stem[1]);
            if a == 0 || b.checked_rem(a) != Some(0) {
                None
            } else {
                let r = b / a;
                let ok = stem.windows(2).all(|w| w[0].checked_mul(r) == Some(w[1]));
                if ok {
                    stem[stem.len() - 1].checked_mul(r)
                } else {
                    None
                }
            }
        }
        PatternKind::FibonacciLike => {
            let ok = stem
                .windows(3)
                .all(|w| w[0].checked_add(w[1]) == Some(w[2]));
            if ok {
                stem[stem.len() - 2].checked_add(stem[stem.len() - 1])
            } else {
                None
            }
        }
        PatternKind::SquareNumbers => {
            let roots: Option<Vec<i64>> = stem.iter().map(|&t| exact_sqrt(t)).collect();
            roots
                .filter(|r| r.windows(2).all(|w| w[1] == w[0] + 1))
                .and_then(|r| (r[r.len() - 1] + 1).checked_mul(r[r.len() - 1] + 1))
        }
        PatternKind::TriangularNumbers => {
            let indices: Option<Vec<i64>> = stem.iter().map(|&t| triangular_index(t)).collect();
            indices
                .filter(|k| k.windows(2).all(|w| w[1] == w[0] + 1))
                .and_then(|k| {
                    let n = k[k.len() - 1] + 1;
                    n.checked_mul(n + 1).map(|v| v / 2)
                })
        }
        PatternKind::AlternatingRule => {
            let addend = stem[1].checked_sub(stem[0]);
            let factor = if stem[1] != 0 && stem[2].checked_rem(stem[1]) == Some(0) {
                stem[2].checked_div(stem[1])
            } else {
                None
            };
            match (addend, factor) {
                (Some(p), Some(q)) => {
                    let step = |i: usize, prev: i64| {
                        if i % 2 == 1 {
                            prev.checked_add(p)
                        } else {
                            prev.checked_mul(q)
                        }
                    };
                    let ok = (1..stem.len()).all(|i| step(i, stem[i - 1]) == Some(stem[i]));
                    if ok {
                        step(stem.len(), stem[stem.len() - 1])
                    } else {
                        None
                    }
                }
                _ => None,
            }
        }
    };
    next.ok_or_else(inconsistent)
}

fn exact_sqrt(t: i64) -> Option<i64> {
    if t < 0 {
        return None;
    }
    let r = t.isqrt();
    (r * r == t).then_some(r)
}

/// `k` with `k(k+1)/2 == t`, if any.
fn triangular_index(t: i64) -> Option<i64> {
    if t < 0 {
        return None;
    }
    let disc = t.checked_mul(8)?.checked_add(1)?;
    let s = exact_sqrt(disc)?;
    let k = (s - 1) / 2;
    (k * (k + 1) / 2 == t).then_some(k)
}

/// Three distinct wrong answers.
///
/// Candidates, with `d` the last difference of the stem, in this order before
/// shuffling: `answer - d`, `answer + d`, `answer - 1`, `answer + 1`, the last
/// stem term, `answer - 2d`, `answer + 2d`.
pub fn make_distractors(answer: i64, stem: &[i64], rng: &mut SplitMix64) -> [i64; 3] {
    let last = stem[stem.len() - 1];
    let d = last - stem[stem.len() - 2];
    let mut candidates = [
        answer - d,
        answer + d,
        answer - 1,
        answer + 1,
        last,
        answer - 2 * d,
        answer + 2 * d,
    ];
    rng.shuffle(&mut candidates);
    let mut picked = Vec::with_capacity(3);
    for c in candidates {
        if c != answer && !picked.contains(&c) {
            picked.push(c);
            if picked.len() == 3 {
                break;
            }
        }
    }
    // answer +-1 and answer +-2d are four distinct values whenever d != 0, and
    // every configurable kind has a strictly positive last difference.
    debug_assert_eq!(picked.len(), 3, "distractor pool too small for {stem:?}");
    [picked[0], picked[1], picked[2]]
}

pub fn generate_question(
    seed: u64,
    difficulty: Difficulty,
    config: &GeneratorConfig,
) -> QuestionCard {
    let mut rng = SplitMix64::new(seed);
    let params = config.params(difficulty);
    let enabled = params.enabled_kinds();
    let kind = enabled[rng.below(enabled.len() as u64) as usize];
    let (stem, answer) = draw_sequence(kind, params, &mut rng);
    let [d1, d2, d3] = make_distractors(answer, &stem, &mut rng);
    let mut choices = [answer, d1, d2, d3];
    rng.shuffle(&mut choices);
    let correct_index = choices.iter().position(|&c| c == answer).unwrap() as u8;
    QuestionCard {
        id: format!("{difficulty}-{seed:016x}"),
        kind,
        stem,
        choices,
        correct_index,
        difficulty,
        seed,
    }
}

/// Draws the kind's parameters and returns the stem together with term five.
fn draw_sequence(
    kind: PatternKind,
    params: &DifficultyParams,
    rng: &mut SplitMix64,
) -> ([i64; STEM_LEN], i64) {
    let mut draw = |span: Span| rng.range_inclusive(span.lo, span.hi);
    let terms: [i64; STEM_LEN + 1] = match kind {
        PatternKind::Arithmetic => {
            let p = params.arithmetic.as_ref().expect("kind enabled");
            let a = draw(p.first);
            let d = draw(p.difference);
            std::array::from_fn(|i| a + d * i as i64)
        }
        PatternKind::Geometric => {
            let p = params.geometric.as_ref().expect("kind enabled");
            let a = draw(p.first);
            let r = draw(p.ratio);
            std::array::from_fn(|i| a * r.pow(i as u32))
        }
        PatternKind::FibonacciLike => {
            let p = params.fibonacci_like.as_ref().expect("kind enabled");
            let mut t = [draw(p.first), draw(p.second), 0, 0, 0];
            for i in 2..t.len() {
                t[i] = t[i - 1] + t[i - 2];
            }
            t
        }
        PatternKind::SquareNumbers => {
            let p = params.square_numbers.as_ref().expect("kind enabled");
            let k = draw(p.start);
            std::array::from_fn(|i| (k + i as i64).pow(2))
        }
        PatternKind::TriangularNumbers => {
            let p = params.triangular_numbers.as_ref().expect("kind enabled");
            let k = draw(p.start);
            std::array::from_fn(|i| {
                let n = k + i as i64;
                n * (n + 1) / 2
            })
        }
        PatternKind::AlternatingRule => {
            let p = params.alternating_rule.as_ref().expect("kind enabled");
            let a = draw(p.first);
            let add = draw(p.addend);
            let mul = draw(p.factor);
            let mut t = [a, 0, 0, 0, 0];
            for i in 1..t.len() {
                t[i] = if i % 2 == 1 { t[i - 1] + add } else { t[i - 1] * mul };
            }
            t
        }
    };
    let mut stem = [0; STEM_LEN];
    stem.copy_from_slice(&terms[..STEM_LEN]);
    (stem, terms[STEM_LEN])
}

/// Cards for seeds `base_seed, base_seed + 1, ...`, built in parallel when
/// the `parallel` feature is on.
pub fn generate_batch(
    base_seed: u64,
    count: usize,
    difficulty: Difficulty,
    config: &GeneratorConfig,
) -> Vec<QuestionCard> {
    use crate::par::*;
    (0..count as u64)
        .into_par_iter()
        .map(|i| generate_question(base_seed.wrapping_add(i), difficulty, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_term_examples() {
        assert_eq!(next_term(PatternKind::Arithmetic, &[2, 5, 8, 11]), Ok(14));
        assert_eq!(next_term(PatternKind::Geometric, &[3, 6, 12, 24]), Ok(48));
        assert_eq!(next_term(PatternKind::FibonacciLike, &[2, 3, 5, 8]), Ok(13));
        assert_eq!(next_term(PatternKind::SquareNumbers, &[1, 4, 9, 16]), Ok(25));
        assert_eq!(
            next_term(PatternKind::TriangularNumbers, &[1, 3, 6, 10]),
            Ok(15)
        );
        // 4, +3, *2, +3 -> next *2
        assert_eq!(
            next_term(PatternKind::AlternatingRule, &[4, 7, 14, 17]),
            Ok(34)
        );
        assert_eq!(next_term(PatternKind::AlternatingRule, &[4, 7, 14]), Ok(17));
        assert_eq!(next_term(PatternKind::Arithmetic, &[9, 4]), Ok(-1));
    }

    #[test]
    fn next_term_rejects_inconsistent_stems() {
        use PatternKind::*;
        for (kind, stem) in [
            (Arithmetic, vec![2, 5, 9, 11]),
            (Geometric, vec![3, 6, 12, 25]),
            (Geometric, vec![0, 0, 0]),
            (Geometric, vec![4, 6, 9]),
            (FibonacciLike, vec![2, 3, 6, 8]),
            (SquareNumbers, vec![1, 4, 10, 16]),
            (SquareNumbers, vec![1, 9, 25]),
            (TriangularNumbers, vec![1, 3, 7]),
            (AlternatingRule, vec![4, 7, 15]),
            (AlternatingRule, vec![4, 7, 14, 18]),
        ] {
            assert!(
                matches!(
                    next_term(kind, &stem),
                    Err(PatternError::InconsistentStem { .. })
                ),
                "{kind} {stem:?}"
            );
        }
        assert_eq!(
            next_term(FibonacciLike, &[1, 2]),
            Err(PatternError::StemTooShort {
                kind: FibonacciLike,
                needed: 3,
                got: 2
            })
        );
        assert!(next_term(Arithmetic, &[i64::MAX - 1, i64::MAX]).is_err());
    }

    #[test]
    fn distractors_come_from_the_rule_set() {
        let stem = [2, 5, 8, 11];
        let pool = [11, 17, 13, 15, 8, 20];
        for seed in 0..500 {
            let mut rng = SplitMix64::new(seed);
            let out = make_distractors(14, &stem, &mut rng);
            assert!(out.iter().all(|c| pool.contains(c)), "{out:?}");
            assert!(!out.contains(&14));
            assert!(out[0] != out[1] && out[1] != out[2] && out[0] != out[2]);
        }
    }

    #[test]
    fn last_term_is_an_admissible_distractor() {
        let stem = [3, 6, 12, 24];
        let seen = (0..200).any(|seed| {
            let mut rng = SplitMix64::new(seed);
            make_distractors(48, &stem, &mut rng).contains(&24)
        });
        assert!(seen);
    }

    #[test]
    fn generation_is_deterministic() {
        let config = GeneratorConfig::default();
        for d in [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard] {
            assert_eq!(
                generate_question(99, d, &config),
                generate_question(99, d, &config)
            );
        }
    }

    #[test]
    fn correct_index_is_not_pinned() {
        let config = GeneratorConfig::default();
        let mut seen = [false; CHOICE_COUNT];
        for seed in 0..200 {
            seen[generate_question(seed, Difficulty::Medium, &config).correct_index as usize] =
                true;
        }
        assert_eq!(seen, [true; CHOICE_COUNT]);
    }

    #[test]
    fn batch_matches_single_cards() {
        let config = GeneratorConfig::default();
        let batch = generate_batch(40, 25, Difficulty::Hard, &config);
        for (i, card) in batch.iter().enumerate() {
            assert_eq!(card, &generate_question(40 + i as u64, Difficulty::Hard, &config));
        }
    }
}
