//! Tile grids, single-tile edits, and diffs between grids.
//!
//! A [`Level`] is a value: every edit returns a new level and the input is
//! left untouched, which is what lets replayed trajectories record each
//! intermediate state safely.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest accepted level side, so coordinates fit an [`Action`].
pub const MAX_SIDE: usize = u16::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileType {
    pub id: u8,
    pub glyph: char,
}

/// A domain's tile registry. Tile ids are positions in the glyph list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    glyphs: Vec<char>,
    lookup: [u8; 128],
}

const NO_TILE: u8 = u8::MAX;

impl Alphabet {
    pub fn new(glyphs: &str) -> Result<Self> {
        let glyphs: Vec<char> = glyphs.chars().collect();
        if glyphs.is_empty() {
            return Err(Error::Alphabet("no glyphs".into()));
        }
        if glyphs.len() >= NO_TILE as usize {
            return Err(Error::Alphabet(format!("{} glyphs is too many", glyphs.len())));
        }
        let mut lookup = [NO_TILE; 128];
        for (id, &g) in glyphs.iter().enumerate() {
            if !g.is_ascii_graphic() {
                return Err(Error::Alphabet(format!("glyph {g:?} is not printable ASCII")));
            }
            if lookup[g as usize] != NO_TILE {
                return Err(Error::Alphabet(format!("glyph {g:?} appears twice")));
            }
            lookup[g as usize] = id as u8;
        }
        Ok(Self { glyphs, lookup })
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn contains(&self, id: u8) -> bool {
        (id as usize) < self.glyphs.len()
    }

    pub fn glyph(&self, id: u8) -> Option<char> {
        self.glyphs.get(id as usize).copied()
    }

    pub fn id_of(&self, glyph: char) -> Option<u8> {
        if !glyph.is_ascii() {
            return None;
        }
        match self.lookup[glyph as usize] {
            NO_TILE => None,
            id => Some(id),
        }
    }

    pub fn tiles(&self) -> impl Iterator<Item = TileType> + '_ {
        self.glyphs.iter().enumerate().map(|(id, &glyph)| TileType {
            id: id as u8,
            glyph,
        })
    }

    pub fn glyphs(&self) -> String {
        self.glyphs.iter().collect()
    }
}

/// One tile edit: set cell `(x, y)` to tile `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub x: u16,
    pub y: u16,
    pub t: u8,
}

impl Action {
    pub fn new(x: usize, y: usize, t: u8) -> Self {
        debug_assert!(x <= MAX_SIDE && y <= MAX_SIDE);
        Self {
            x: x as u16,
            y: y as u16,
            t,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.x, self.y, self.t)
    }
}

/// Ordered edits in which no coordinate appears twice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeSet {
    actions: Vec<Action>,
}

impl ChangeSet {
    pub fn new(actions: Vec<Action>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(actions.len());
        for (index, a) in actions.iter().enumerate() {
            if !seen.insert((a.x, a.y)) {
                return Err(Error::InvalidAction {
                    index,
                    source: Box::new(Error::Config(format!(
                        "coordinate ({}, {}) already assigned",
                        a.x, a.y
                    ))),
                });
            }
        }
        Ok(Self { actions })
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn into_actions(self) -> Vec<Action> {
        self.actions
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Level {
    width: usize,
    height: usize,
    cells: Vec<u8>,
    alphabet: Arc<Alphabet>,
}

impl fmt::Debug for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Level({}x{})\n{}", self.width, self.height, self.grid_text())
    }
}

impl Level {
    pub fn new(alphabet: Arc<Alphabet>, width: usize, height: usize, cells: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || width > MAX_SIDE || height > MAX_SIDE {
            return Err(Error::Config(format!("invalid level size {width}x{height}")));
        }
        if cells.len() != width * height {
            return Err(Error::Config(format!(
                "{} cells for a {width}x{height} level",
                cells.len()
            )));
        }
        if let Some(&bad) = cells.iter().find(|&&c| !alphabet.contains(c)) {
            return Err(Error::UnknownTile(bad));
        }
        Ok(Self {
            width,
            height,
            cells,
            alphabet,
        })
    }

    pub fn filled(alphabet: Arc<Alphabet>, width: usize, height: usize, tile: u8) -> Result<Self> {
        Self::new(alphabet, width, height, vec![tile; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major tile ids.
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.cells[y * self.width + x]
    }

    pub fn same_shape(&self, other: &Level) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_shape(&self, other: &Level) -> Result<()> {
        if self.same_shape(other) && self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            })
        }
    }

    pub fn check_action(&self, a: Action) -> Result<()> {
        let (x, y) = (a.x as usize, a.y as usize);
        if x >= self.width || y >= self.height {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        if !self.alphabet.contains(a.t) {
            return Err(Error::UnknownTile(a.t));
        }
        Ok(())
    }

    /// Overwrite a cell in place. Callers own `self`, so no shared level changes.
    pub(crate) fn set(&mut self, x: usize, y: usize, t: u8) {
        debug_assert!(self.alphabet.contains(t));
        self.cells[y * self.width + x] = t;
    }

    pub(crate) fn apply_in_place(&mut self, a: Action) -> Result<()> {
        self.check_action(a)?;
        self.set(a.x as usize, a.y as usize, a.t);
        Ok(())
    }

    pub fn apply_action(&self, a: Action) -> Result<Level> {
        let mut next = self.clone();
        next.apply_in_place(a)?;
        Ok(next)
    }

    /// Fold [`Level::apply_action`] over `changes`; the first invalid action
    /// aborts with its index.
    pub fn apply_changes(&self, changes: &ChangeSet) -> Result<Level> {
        self.apply_actions(changes.actions())
    }

    pub fn apply_actions(&self, actions: &[Action]) -> Result<Level> {
        let mut next = self.clone();
        for (index, &a) in actions.iter().enumerate() {
            next.apply_in_place(a).map_err(|e| Error::InvalidAction {
                index,
                source: Box::new(e),
            })?;
        }
        Ok(next)
    }

    /// One action per differing cell, row-major by `(y, x)`.
    pub fn diff_to(&self, end: &Level) -> Result<ChangeSet> {
        self.check_shape(end)?;
        let actions = self
            .cells
            .iter()
            .zip(&end.cells)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (_, &t))| Action::new(i % self.width, i / self.width, t))
            .collect();
        Ok(ChangeSet { actions })
    }

    pub fn hamming(&self, other: &Level) -> Result<usize> {
        self.check_shape(other)?;
        Ok(hamming_cells(&self.cells, &other.cells))
    }

    /// Glyph rows without the size header.
    pub fn grid_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|&c| self.alphabet.glyph(c).unwrap_or('?')));
            out.push('\n');
        }
        out
    }

    pub fn row_glyphs(&self) -> String {
        self.cells
            .iter()
            .map(|&c| self.alphabet.glyph(c).unwrap_or('?'))
            .collect()
    }

    /// `"width height"` followed by one line of glyphs per row.
    pub fn to_text(&self) -> String {
        format!("{} {}\n{}", self.width, self.height, self.grid_text())
    }

    /// Strict parse of the text level format.
    pub fn parse(text: &str, alphabet: Arc<Alphabet>) -> Result<Level> {
        if !text.is_ascii() {
            return Err(Error::parse(1, "level text must be ASCII"));
        }
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or("");
        let mut dims = header.split(' ');
        let (width, height) = match (dims.next(), dims.next(), dims.next()) {
            (Some(w), Some(h), None) => (
                w.parse::<usize>()
                    .map_err(|_| Error::parse(1, format!("bad width {w:?}")))?,
                h.parse::<usize>()
                    .map_err(|_| Error::parse(1, format!("bad height {h:?}")))?,
            ),
            _ => return Err(Error::parse(1, "expected \"width height\"")),
        };
        if width == 0 || height == 0 || width > MAX_SIDE || height > MAX_SIDE {
            return Err(Error::parse(1, format!("invalid size {width}x{height}")));
        }
        let mut cells = Vec::with_capacity(width * height);
        for row in 0..height {
            let line_no = row + 2;
            let line = lines
                .next()
                .ok_or_else(|| Error::parse(line_no, "missing row"))?;
            if line.len() != width {
                return Err(Error::parse(
                    line_no,
                    format!("row has {} glyphs, expected {width}", line.len()),
                ));
            }
            for g in line.chars() {
                let id = alphabet
                    .id_of(g)
                    .ok_or_else(|| Error::parse(line_no, format!("unknown glyph {g:?}")))?;
                cells.push(id);
            }
        }
        // Rows are newline-terminated, so exactly one empty remainder is allowed.
        match (lines.next(), lines.next()) {
            (Some(""), None) => {}
            (None, _) => return Err(Error::parse(height + 1, "last row is not newline-terminated")),
            _ => return Err(Error::parse(height + 2, "trailing content after the last row")),
        }
        Level::new(alphabet, width, height, cells)
    }
}

pub(crate) fn hamming_cells(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn compute_diffs(start: &Level, end: &Level) -> Result<ChangeSet> {
    start.diff_to(end)
}

pub fn apply_action(level: &Level, a: Action) -> Result<Level> {
    level.apply_action(a)
}

pub fn apply_changes(level: &Level, changes: &ChangeSet) -> Result<Level> {
    level.apply_changes(changes)
}

pub fn hamming_distance(a: &Level, b: &Level) -> Result<usize> {
    a.hamming(b)
}
