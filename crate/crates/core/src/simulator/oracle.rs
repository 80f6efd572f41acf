//! Exact expected game length for a player who never answers wrong.
//!
//! With every answer correct the lifelines never matter and the game is a
//! Markov chain on board positions. For each transient position `p`
//!
//! ```text
//! E[p] = 1 + 1/6 * sum over d in 1..=6 of E[next(p, d)],   E[finish] = 0
//! ```
//!
//! where `next` overshoots in place and follows at most one jump. The system
//! is solved exactly over the rationals. The transition rule is written out
//! here on purpose instead of calling into the gameplay module, so the two
//! can be checked against each other.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::board::BoardSpec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("invalid board: {0}")]
    InvalidBoard(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Expected number of turns from tile 0.
    pub expected_turns: BigRational,
    /// Expected turns from every position reachable from tile 0.
    pub per_position: BTreeMap<u32, BigRational>,
}

impl OracleResult {
    pub fn as_f64(&self) -> f64 {
        self.expected_turns.to_f64().unwrap_or(f64::NAN)
    }

    /// `expected_turns` truncated to `digits` decimals.
    pub fn to_decimal(&self, digits: u32) -> String {
        decimal_string(&self.expected_turns, digits)
    }

    pub fn report(&self, board_name: &str) -> OracleReport {
        OracleReport {
            board: board_name.to_string(),
            expected_turns: self.to_decimal(12),
            numerator: self.expected_turns.numer().to_string(),
            denominator: self.expected_turns.denom().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub board: String,
    pub expected_turns: String,
    pub numerator: String,
    pub denominator: String,
}

pub fn decimal_string(value: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (value * BigRational::from_integer(scale.clone())).trunc().to_integer();
    let sign = if scaled.is_negative() { "-" } else { "" };
    let scaled = scaled.abs();
    let whole = &scaled / &scale;
    let frac = &scaled % &scale;
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{:0>width$}", frac.to_string(), width = digits as usize)
    }
}

pub fn expected_turns_oracle(board: &BoardSpec) -> Result<OracleResult, OracleError> {
    let jumps: Vec<(u32, u32)> = board.jumps().iter().map(|(&a, &b)| (a, b)).collect();
    expected_turns(board.tile_count(), &jumps)
}

/// Raw entry point: checks the jump table itself before solving.
pub fn expected_turns(tile_count: u32, jumps: &[(u32, u32)]) -> Result<OracleResult, OracleError> {
    let invalid = |m: String| Err(OracleError::InvalidBoard(m));
    if tile_count == 0 {
        return invalid("no tiles".into());
    }
    let mut table = BTreeMap::new();
    for &(from, to) in jumps {
        if !(1..tile_count).contains(&from) || !(1..=tile_count).contains(&to) || from == to {
            return invalid(format!("jump {from}->{to}"));
        }
        if table.insert(from, to).is_some() {
            return invalid(format!("two jumps on tile {from}"));
        }
    }
    if table.values().any(|to| table.contains_key(to)) {
        return invalid("chained jumps".into());
    }

    let finish = tile_count;
    let next = |p: u32, d: u32| -> u32 {
        if p + d > finish {
            p
        } else {
            *table.get(&(p + d)).unwrap_or(&(p + d))
        }
    };

    // Transient states: positions reachable from 0, excluding the finish.
    let mut seen = BTreeSet::from([0u32]);
    let mut queue = VecDeque::from([0u32]);
    while let Some(p) = queue.pop_front() {
        for d in 1..=6 {
            let q = next(p, d);
            if q != finish && seen.insert(q) {
                queue.push_back(q);
            }
        }
    }
    let states: Vec<u32> = seen.into_iter().collect();
    let index: BTreeMap<u32, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = states.len();

    // (I - Q) x = 1
    let sixth = BigRational::new(BigInt::one(), BigInt::from(6));
    let mut m: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n + 1]; n];
    for (i, &p) in states.iter().enumerate() {
        m[i][i] += BigRational::one();
        m[i][n] = BigRational::one();
        for d in 1..=6 {
            let q = next(p, d);
            if q != finish {
                m[i][index[&q]] -= &sixth;
            }
        }
    }
    let solution = solve(m).ok_or_else(|| {
        OracleError::InvalidBoard("finish is unreachable from some position".into())
    })?;
    let per_position: BTreeMap<u32, BigRational> = states.iter().copied().zip(solution).collect();
    Ok(OracleResult {
        expected_turns: per_position[&0].clone(),
        per_position,
    })
}

/// Gauss-Jordan elimination on an augmented `n x (n+1)` matrix.
fn solve(mut m: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for v in &mut m[col][col..] {
            *v = &*v * &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let factor = row[col].clone();
                for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= &factor * p;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}
