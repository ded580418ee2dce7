//! Runtime selection between the maze and platformer domains.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{DomainPlugin, GaConfig};
use crate::level::{Alphabet, Level};
use crate::maze::{self, MazeDomain};
use crate::platformer::{self, PlatformerDomain};
use crate::policy::PolicyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Maze,
    Platformer,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Maze => "maze",
            DomainKind::Platformer => "platformer",
        }
    }

    pub fn alphabet(self) -> Arc<Alphabet> {
        match self {
            DomainKind::Maze => maze::alphabet(),
            DomainKind::Platformer => platformer::alphabet(),
        }
    }

    pub fn from_glyphs(glyphs: &str) -> Option<Self> {
        match glyphs {
            maze::GLYPHS => Some(DomainKind::Maze),
            platformer::GLYPHS => Some(DomainKind::Platformer),
            _ => None,
        }
    }

    pub fn ga_defaults(self) -> GaConfig {
        match self {
            DomainKind::Maze => GaConfig::maze_defaults(),
            DomainKind::Platformer => GaConfig::platformer_defaults(),
        }
    }

    pub fn policy_defaults(self) -> PolicyConfig {
        match self {
            DomainKind::Maze => PolicyConfig::maze_defaults(),
            DomainKind::Platformer => PolicyConfig::platformer_defaults(),
        }
    }

    /// Guess the domain of a text level from its glyphs.
    pub fn detect(level_text: &str) -> Option<Self> {
        let body = level_text.split_once('\n').map_or("", |(_, rest)| rest);
        let fits = |glyphs: &str| body.chars().all(|c| c == '\n' || glyphs.contains(c));
        if fits(maze::GLYPHS) {
            Some(DomainKind::Maze)
        } else if fits(platformer::GLYPHS) {
            Some(DomainKind::Platformer)
        } else {
            None
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maze" => Ok(DomainKind::Maze),
            "platformer" => Ok(DomainKind::Platformer),
            other => Err(Error::Config(format!("unknown domain {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum AnyDomain {
    Maze(MazeDomain),
    Platformer(PlatformerDomain),
}

/// Run `$body` with `$d` bound to the concrete domain.
#[macro_export]
macro_rules! with_domain {
    ($any:expr, $d:ident => $body:expr) => {
        match $any {
            $crate::domain::AnyDomain::Maze($d) => $body,
            $crate::domain::AnyDomain::Platformer($d) => $body,
        }
    };
}

impl AnyDomain {
    /// `size` is the maze side; ignored for the platformer.
    pub fn new(kind: DomainKind, size: usize) -> Result<Self> {
        Ok(match kind {
            DomainKind::Maze => AnyDomain::Maze(MazeDomain::with_size(size)?),
            DomainKind::Platformer => AnyDomain::Platformer(PlatformerDomain::default()),
        })
    }

    /// Domain matching an existing level's alphabet and shape.
    pub fn for_level(level: &Level) -> Result<Self> {
        let kind = DomainKind::from_glyphs(&level.alphabet().glyphs())
            .ok_or_else(|| Error::Config("level alphabet matches no domain".into()))?;
        if kind == DomainKind::Maze && level.width() != level.height() {
            return Err(Error::Config(format!(
                "mazes are square, got {}x{}",
                level.width(),
                level.height()
            )));
        }
        Self::new(kind, level.width())
    }

    pub fn kind(&self) -> DomainKind {
        match self {
            AnyDomain::Maze(_) => DomainKind::Maze,
            AnyDomain::Platformer(_) => DomainKind::Platformer,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            AnyDomain::Maze(m) => m.config().size,
            AnyDomain::Platformer(p) => p.config().width,
        }
    }

    pub fn fitness(&self, level: &Level) -> f64 {
        with_domain!(self, d => d.fitness(level))
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        with_domain!(self, d => d.alphabet())
    }
}

/// Parse level text, inferring the domain from its glyphs.
pub fn parse_level(text: &str) -> Result<Level> {
    let kind = DomainKind::detect(text).ok_or_else(|| Error::parse(2, "glyphs match no domain"))?;
    Level::parse(text, kind.alphabet())
}

pub fn read_level(path: &std::path::Path) -> Result<Level> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_level(&text)
}
