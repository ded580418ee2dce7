//! Turn a GA run into ordered (state, action) pairs.
//!
//! Each start level is paired with an end level, the diff between them is
//! replayed one action at a time, and the state seen before every action is
//! recorded next to that action. Trajectories are kept contiguous so the
//! policy can keep executing the actions that follow a matched state.
//!
//! In memory a trajectory is stored as its first state plus its actions;
//! intermediate states are rebuilt on demand.
//!
//! # File format
//!
//! ```text
//! PCGDATA v1 <width> <height> alphabet=<glyphs>
//! trajectories <count> pairs <total>
//! delta_lengths <n0> <n1> ...
//! bounds <start0>:<end0> <start1>:<end1> ...
//! trajectory <i> <n_i>
//! <state glyphs, row-major> <x> <y> <t>     (n_i lines)
//! ```
//!
//! `t` is the tile id. `delta_lengths` and `bounds` are empty after the
//! keyword when there are no trajectories.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evolution::GaRunResult;
use crate::level::{Action, Alphabet, ChangeSet, Level};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPair {
    pub start: Level,
    pub end: Level,
    pub delta: ChangeSet,
}

impl TrajectoryPair {
    pub fn new(start: Level, end: Level) -> Result<Self> {
        let delta = start.diff_to(&end)?;
        Ok(Self { start, end, delta })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    /// `None` for an empty trajectory.
    first: Option<Level>,
    actions: Vec<Action>,
}

impl Trajectory {
    pub fn first_state(&self) -> Option<&Level> {
        self.first.as_ref()
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

    /// States before each action, in order.
    pub fn states(&self) -> impl Iterator<Item = Level> + '_ {
        let mut state = self.first.clone();
        self.actions.iter().map(move |&a| {
            let current = state.clone().expect("non-empty trajectory has a first state");
            let mut next = current.clone();
            next.apply_in_place(a).expect("dataset actions are valid");
            state = Some(next);
            current
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyDataset {
    width: usize,
    height: usize,
    alphabet: Arc<Alphabet>,
    trajectories: Vec<Trajectory>,
    offsets: Vec<usize>,
}

impl PolicyDataset {
    fn new(width: usize, height: usize, alphabet: Arc<Alphabet>, trajectories: Vec<Trajectory>) -> Self {
        let mut offsets = Vec::with_capacity(trajectories.len() + 1);
        offsets.push(0);
        for t in &trajectories {
            offsets.push(offsets.last().unwrap() + t.len());
        }
        Self {
            width,
            height,
            alphabet,
            trajectories,
            offsets,
        }
    }

    /// Replay each pair's diff and record (state, action) at every step.
    pub fn from_pairs(pairs: &[TrajectoryPair]) -> Result<Self> {
        let first = pairs.first().ok_or_else(|| Error::Empty("no trajectory pairs".into()))?;
        let trajectories = pairs
            .iter()
            .map(|p| {
                first.start.check_shape(&p.start)?;
                first.start.check_shape(&p.end)?;
                let actions = p.delta.actions().to_vec();
                // The replay must land on the recorded end level.
                if p.start.apply_actions(&actions)? != p.end {
                    return Err(Error::CorruptDataset("diff does not reach its end level".into()));
                }
                Ok(Trajectory {
                    first: (!actions.is_empty()).then(|| p.start.clone()),
                    actions,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(
            first.start.width(),
            first.start.height(),
            first.start.alphabet().clone(),
            trajectories,
        ))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// Total (state, action) pairs.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn delta_lengths(&self) -> Vec<usize> {
        self.trajectories.iter().map(Trajectory::len).collect()
    }

    pub fn bounds(&self) -> Vec<Range<usize>> {
        self.offsets.windows(2).map(|w| w[0]..w[1]).collect()
    }

    pub fn trajectory_bounds(&self, trajectory: usize) -> Range<usize> {
        self.offsets[trajectory]..self.offsets[trajectory + 1]
    }

    /// Trajectory holding pair `k`.
    pub fn trajectory_of(&self, k: usize) -> usize {
        assert!(k < self.len(), "pair index {k} out of range");
        self.offsets.partition_point(|&o| o <= k) - 1
    }

    pub fn action(&self, k: usize) -> Action {
        let t = self.trajectory_of(k);
        self.trajectories[t].actions[k - self.offsets[t]]
    }

    pub fn state(&self, k: usize) -> Level {
        let t = self.trajectory_of(k);
        let traj = &self.trajectories[t];
        let first = traj.first.as_ref().expect("non-empty trajectory");
        first
            .apply_actions(&traj.actions[..k - self.offsets[t]])
            .expect("dataset actions are valid")
    }

    /// Every (state, action) pair in dataset order.
    pub fn pairs(&self) -> impl Iterator<Item = (Level, Action)> + '_ {
        self.trajectories
            .iter()
            .flat_map(|t| t.states().zip(t.actions.iter().copied()))
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        let io = |e| Error::io("<dataset>", e);
        writeln!(
            w,
            "PCGDATA v1 {} {} alphabet={}",
            self.width,
            self.height,
            self.alphabet.glyphs()
        )
        .map_err(io)?;
        writeln!(w, "trajectories {} pairs {}", self.trajectories.len(), self.len()).map_err(io)?;
        let lengths: Vec<String> = self.delta_lengths().iter().map(|n| format!(" {n}")).collect();
        writeln!(w, "delta_lengths{}", lengths.concat()).map_err(io)?;
        let bounds: Vec<String> = self.bounds().iter().map(|r| format!(" {}:{}", r.start, r.end)).collect();
        writeln!(w, "bounds{}", bounds.concat()).map_err(io)?;
        for (i, traj) in self.trajectories.iter().enumerate() {
            writeln!(w, "trajectory {i} {}", traj.len()).map_err(io)?;
            for (state, a) in traj.states().zip(&traj.actions) {
                writeln!(w, "{} {} {} {}", state.row_glyphs(), a.x, a.y, a.t).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("dataset text is ASCII")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(file).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(file)
    }

    /// Strict reader; every record is checked against the replayed state.
    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let corrupt = |line: usize, m: String| Error::CorruptDataset(format!("line {line}: {m}"));
        let mut lines = BufReader::new(input).lines().enumerate().map(|(i, l)| {
            l.map(|text| (i + 1, text))
                .map_err(|e| Error::io("<dataset>", e))
        });
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::CorruptDataset(format!("missing {what}")))
        };

        let (ln, header) = next_line("header")?;
        let parts: Vec<&str> = header.split(' ').collect();
        let [magic, version, w, h, alpha] = parts[..] else {
            return Err(corrupt(ln, format!("bad header {header:?}")));
        };
        if magic != "PCGDATA" || version != "v1" {
            return Err(corrupt(ln, format!("bad header {header:?}")));
        }
        let num = |ln: usize, s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| corrupt(ln, format!("expected a number, got {s:?}")))
        };
        let (width, height) = (num(ln, w)?, num(ln, h)?);
        let glyphs = alpha
            .strip_prefix("alphabet=")
            .ok_or_else(|| corrupt(ln, "missing alphabet".into()))?;
        let alphabet = Arc::new(Alphabet::new(glyphs).map_err(|e| corrupt(ln, e.to_string()))?);
        let cells = width * height;
        if cells == 0 {
            return Err(corrupt(ln, "empty level shape".into()));
        }

        let (ln, counts) = next_line("counts")?;
        let (count, total) = match counts.split(' ').collect::<Vec<_>>()[..] {
            ["trajectories", n, "pairs", p] => (num(ln, n)?, num(ln, p)?),
            _ => return Err(corrupt(ln, format!("bad counts line {counts:?}"))),
        };
        let (ln, lengths_line) = next_line("delta_lengths")?;
        let lengths = keyword_list(&lengths_line, "delta_lengths")
            .ok_or_else(|| corrupt(ln, "bad delta_lengths line".into()))?
            .iter()
            .map(|s| num(ln, s))
            .collect::<Result<Vec<_>>>()?;
        let (ln, bounds_line) = next_line("bounds")?;
        let bounds = keyword_list(&bounds_line, "bounds")
            .ok_or_else(|| corrupt(ln, "bad bounds line".into()))?
            .iter()
            .map(|s| {
                let (a, b) = s
                    .split_once(':')
                    .ok_or_else(|| corrupt(ln, format!("bad bound {s:?}")))?;
                Ok(num(ln, a)?..num(ln, b)?)
            })
            .collect::<Result<Vec<_>>>()?;
        if lengths.len() != count || bounds.len() != count || lengths.iter().sum::<usize>() != total {
            return Err(corrupt(ln, "header counts disagree".into()));
        }
        let mut offset = 0;
        for (b, &n) in bounds.iter().zip(&lengths) {
            if b.start != offset || b.end != offset + n {
                return Err(corrupt(ln, "bounds disagree with delta_lengths".into()));
            }
            offset += n;
        }

        let mut trajectories = Vec::with_capacity(count);
        for (i, &n) in lengths.iter().enumerate() {
            let (ln, head) = next_line("trajectory header")?;
            if head != format!("trajectory {i} {n}") {
                return Err(corrupt(ln, format!("expected \"trajectory {i} {n}\", got {head:?}")));
            }
            let mut first: Option<Level> = None;
            let mut current: Option<Level> = None;
            let mut actions = Vec::with_capacity(n);
            for _ in 0..n {
                let (ln, record) = next_line("record")?;
                let fields: Vec<&str> = record.split(' ').collect();
                let [glyphs, x, y, t] = fields[..] else {
                    return Err(corrupt(ln, "expected \"<state> x y t\"".into()));
                };
                if glyphs.len() != cells {
                    return Err(corrupt(ln, format!("state has {} cells, expected {cells}", glyphs.len())));
                }
                let state_cells = glyphs
                    .chars()
                    .map(|g| alphabet.id_of(g).ok_or_else(|| corrupt(ln, format!("unknown glyph {g:?}"))))
                    .collect::<Result<Vec<u8>>>()?;
                let t = u8::try_from(num(ln, t)?).map_err(|_| corrupt(ln, "tile id too large".into()))?;
                let action = Action::new(num(ln, x)?.min(u16::MAX as usize), num(ln, y)?.min(u16::MAX as usize), t);
                let state = Level::new(alphabet.clone(), width, height, state_cells).map_err(|e| corrupt(ln, e.to_string()))?;
                if let Some(expected) = &current {
                    if *expected != state {
                        return Err(corrupt(ln, "state does not follow from the previous record".into()));
                    }
                }
                let next = state.apply_action(action).map_err(|e| corrupt(ln, e.to_string()))?;
                if first.is_none() {
                    first = Some(state);
                }
                current = Some(next);
                actions.push(action);
            }
            ChangeSet::new(actions.clone()).map_err(|e| Error::CorruptDataset(format!("trajectory {i}: {e}")))?;
            trajectories.push(Trajectory { first, actions });
        }
        if let Some((ln, extra)) = lines.next().transpose()? {
            return Err(corrupt(ln, format!("trailing content {extra:?}")));
        }
        Ok(Self::new(width, height, alphabet, trajectories))
    }
}

fn keyword_list<'a>(line: &'a str, keyword: &str) -> Option<Vec<&'a str>> {
    let rest = line.strip_prefix(keyword)?;
    if rest.is_empty() {
        return Some(Vec::new());
    }
    let rest = rest.strip_prefix(' ')?;
    Some(rest.split(' ').collect())
}

/// Zip initial level `i` with final level `i`; initial levels left over are
/// paired with their nearest final level (Hamming, lowest index on ties).
pub fn pair_levels(initial: &[Level], finals: &[Level]) -> Result<Vec<TrajectoryPair>> {
    if finals.is_empty() {
        return Err(Error::Empty("run has no final levels".into()));
    }
    initial
        .iter()
        .enumerate()
        .map(|(i, start)| {
            let end = match finals.get(i) {
                Some(end) => end,
                None => {
                    let mut best = (usize::MAX, 0);
                    for (j, f) in finals.iter().enumerate() {
                        let d = start.hamming(f)?;
                        if d < best.0 {
                            best = (d, j);
                        }
                    }
                    &finals[best.1]
                }
            };
            TrajectoryPair::new(start.clone(), end.clone())
        })
        .collect()
}

pub fn build_dataset(run: &GaRunResult) -> Result<PolicyDataset> {
    if run.initial_levels.is_empty() {
        return Err(Error::Empty("run has no initial levels".into()));
    }
    PolicyDataset::from_pairs(&pair_levels(&run.initial_levels, &run.final_levels)?)
}
