//! Service configuration file.
//!
//! ```toml
//! board = "boards/long.board"   # relative to this file; default30 if absent
//!
//! [economy]
//! energy_regen_minutes = 10
//!
//! [[avatars]]
//! id = "starter"
//! display_name = "Starter"
//! price_points = 0
//! perk = "None"
//!
//! [generator.easy.arithmetic]
//! first = [1, 20]
//! difference = [2, 12]
//! ```
//!
//! Every section is optional. `[[avatars]]` replaces the whole catalog and
//! `[generator]` must define all three difficulties.

use std::path::{Path, PathBuf};

use patternquest_core::economy::{Avatar, AvatarCatalog, Economy, EconomyConfig};
use patternquest_core::{BoardSpec, GeneratorConfig};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    board: Option<PathBuf>,
    economy: Option<EconomyConfig>,
    avatars: Option<Vec<Avatar>>,
    generator: Option<GeneratorConfig>,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub economy: Economy,
    pub generator: GeneratorConfig,
    pub board: BoardSpec,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            economy: Economy::default(),
            generator: GeneratorConfig::default(),
            board: BoardSpec::default30(),
        }
    }
}

impl ServiceConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
            .map_err(|e| format!("{}: {e}", path.display()))
    }

    /// `base_dir` anchors a relative `board` path.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, String> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| e.to_string())?;
        let catalog = match file.avatars {
            Some(entries) => AvatarCatalog::new(entries).map_err(|e| e.to_string())?,
            None => AvatarCatalog::default(),
        };
        let economy = Economy::new(file.economy.unwrap_or_default(), catalog).map_err(|e| e.to_string())?;
        let generator = match file.generator {
            Some(g) => {
                g.validate().map_err(|e| e.to_string())?;
                g
            }
            None => GeneratorConfig::default(),
        };
        let board = match file.board {
            Some(p) => load_board(&base_dir.join(p))?,
            None => BoardSpec::default30(),
        };
        Ok(Self {
            economy,
            generator,
            board,
        })
    }
}

/// `default30` names the bundled board; anything else is a file path.
pub fn load_board(arg: &Path) -> Result<BoardSpec, String> {
    if arg == Path::new("default30") {
        return Ok(BoardSpec::default30());
    }
    BoardSpec::load(arg).map_err(|e| format!("{}: {e}", arg.display()))
}
