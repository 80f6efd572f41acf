//! Board topology and its plain-text format.
//!
//! ```text
//! # comments and blank lines are ignored
//! board 1
//! name default30
//! tiles 30
//! ladder 3 11
//! snake 12 2
//! ```
//!
//! `board 1` is the format version and must come first. `ladder a b` needs
//! `b > a`, `snake a b` needs `b < a`. The writer emits jumps sorted by
//! source tile, so a parsed-then-written board is stable.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub type Tile = u32;

pub const DICE_FACES: u32 = 6;
pub const BOARD_FORMAT_VERSION: u32 = 1;

/// The bundled 30-tile board.
pub const DEFAULT30_TEXT: &str = include_str!("../assets/default30.board");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoardError {
    #[error("board needs at least one tile")]
    NoTiles,
    #[error("jump {from}->{to} leaves the board 1..={tiles}")]
    OutOfRange { from: Tile, to: Tile, tiles: Tile },
    #[error("jump on tile {0} points to itself")]
    SelfJump(Tile),
    #[error("finish tile {0} cannot hold a jump")]
    JumpOnFinish(Tile),
    #[error("jump {from}->{to} lands on another jump source")]
    Chain { from: Tile, to: Tile },
    #[error("finish is unreachable from tile {0}")]
    Unwinnable(Tile),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardSpec {
    name: String,
    tile_count: Tile,
    jumps: BTreeMap<Tile, Tile>,
}

impl BoardSpec {
    /// Validates: jumps inside `1..=tile_count`, no jump from the finish, no
    /// self jumps, no jump landing on another jump's source, and the finish
    /// reachable from every position a token can rest on.
    pub fn new(
        name: impl Into<String>,
        tile_count: Tile,
        jumps: impl IntoIterator<Item = (Tile, Tile)>,
    ) -> Result<Self, BoardError> {
        if tile_count == 0 {
            return Err(BoardError::NoTiles);
        }
        let jumps: BTreeMap<Tile, Tile> = jumps.into_iter().collect();
        for (&from, &to) in &jumps {
            if from == 0 || to == 0 || from > tile_count || to > tile_count {
                return Err(BoardError::OutOfRange {
                    from,
                    to,
                    tiles: tile_count,
                });
            }
            if from == to {
                return Err(BoardError::SelfJump(from));
            }
            if from == tile_count {
                return Err(BoardError::JumpOnFinish(from));
            }
            if jumps.contains_key(&to) {
                return Err(BoardError::Chain { from, to });
            }
        }
        let board = Self {
            name: name.into(),
            tile_count,
            jumps,
        };
        board.check_winnable()?;
        Ok(board)
    }

    pub fn default30() -> Self {
        DEFAULT30_TEXT.parse().expect("bundled board is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BoardError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| BoardError::Parse {
            line: 0,
            message: format!("{}: {e}", path.as_ref().display()),
        })?;
        text.parse()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tile_count(&self) -> Tile {
        self.tile_count
    }

    pub fn finish_tile(&self) -> Tile {
        self.tile_count
    }

    pub fn jumps(&self) -> &BTreeMap<Tile, Tile> {
        &self.jumps
    }

    pub fn jump_from(&self, tile: Tile) -> Option<Tile> {
        self.jumps.get(&tile).copied()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "board {BOARD_FORMAT_VERSION}").unwrap();
        writeln!(out, "name {}", self.name).unwrap();
        writeln!(out, "tiles {}", self.tile_count).unwrap();
        for (from, to) in &self.jumps {
            let word = if to > from { "ladder" } else { "snake" };
            writeln!(out, "{word} {from} {to}").unwrap();
        }
        out
    }

    fn step(&self, position: Tile, dice: u32) -> Tile {
        let tentative = position + dice;
        if tentative > self.tile_count {
            position
        } else {
            self.jump_from(tentative).unwrap_or(tentative)
        }
    }

    fn check_winnable(&self) -> Result<(), BoardError> {
        let finish = self.tile_count;
        let mut reachable = BTreeSet::from([0]);
        let mut queue = VecDeque::from([0]);
        while let Some(p) = queue.pop_front() {
            if p == finish {
                continue;
            }
            for dice in 1..=DICE_FACES {
                let next = self.step(p, dice);
                if reachable.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        // Backward closure: positions with some roll into the winning set.
        let mut winning = BTreeSet::from([finish]);
        loop {
            let before = winning.len();
            for &p in &reachable {
                if !winning.contains(&p)
                    && (1..=DICE_FACES).any(|d| winning.contains(&self.step(p, d)))
                {
                    winning.insert(p);
                }
            }
            if winning.len() == before {
                break;
            }
        }
        match reachable.iter().find(|p| !winning.contains(p)) {
            Some(&trap) => Err(BoardError::Unwinnable(trap)),
            None => Ok(()),
        }
    }
}

impl FromStr for BoardSpec {
    type Err = BoardError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut version_seen = false;
        let mut name = String::from("custom");
        let mut tiles = None;
        let mut jumps = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| BoardError::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut words = content.split_whitespace();
            let key = words.next().unwrap();
            let args: Vec<&str> = words.collect();
            let number = |s: &str| {
                s.parse::<Tile>()
                    .map_err(|_| err(format!("`{s}` is not a tile number")))
            };
            if !version_seen {
                if key != "board" || args.len() != 1 {
                    return Err(err("expected `board <version>` header".into()));
                }
                let v = number(args[0])?;
                if v != BOARD_FORMAT_VERSION {
                    return Err(err(format!("unsupported board format version {v}")));
                }
                version_seen = true;
                continue;
            }
            match (key, args.as_slice()) {
                ("name", [n]) => name = n.to_string(),
                ("tiles", [n]) => tiles = Some(number(n)?),
                ("ladder" | "snake", [a, b]) => {
                    let (from, to) = (number(a)?, number(b)?);
                    if (key == "ladder") != (to > from) {
                        return Err(err(format!("{key} {from} {to} points the wrong way")));
                    }
                    if jumps.insert(from, to).is_some() {
                        return Err(err(format!("tile {from} already has a jump")));
                    }
                }
                _ => return Err(err(format!("unrecognised line `{content}`"))),
            }
        }
        let tiles = tiles.ok_or(BoardError::Parse {
            line: 0,
            message: "missing `tiles` line".into(),
        })?;
        BoardSpec::new(name, tiles, jumps)
    }
}

/// Where a token at `position` ends after rolling `dice`: overshooting the
/// finish leaves it in place, otherwise at most one snake or ladder applies.
pub fn apply_move(position: Tile, dice: u32, board: &BoardSpec) -> Tile {
    debug_assert!((1..=DICE_FACES).contains(&dice));
    board.step(position, dice)
}
