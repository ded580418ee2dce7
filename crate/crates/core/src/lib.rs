//! Procedural level generation by evolution plus behaviour cloning.
//!
//! A genetic algorithm evolves playable tile levels ([`evolution`]); the
//! edits that turn each random starting level into an evolved one are
//! replayed into (state, action) pairs ([`distill`]); a nearest-neighbour
//! policy over those pairs then turns fresh random levels into playable ones
//! ([`policy`]). [`bench`] times both routes to a required number of levels.

pub mod bench;
pub mod config;
pub mod distill;
pub mod domain;
pub mod error;
pub mod evolution;
pub mod level;
pub mod maze;
pub mod platformer;
pub mod plot;
pub mod policy;
pub mod rng;

pub use distill::{build_dataset, PolicyDataset};
pub use domain::{parse_level, read_level, AnyDomain, DomainKind};
pub use error::{Error, Result};
pub use evolution::{run_ga, DomainPlugin, GaConfig, GaRunResult};
pub use level::{Action, Alphabet, ChangeSet, Level};
pub use policy::{generate_level, NeighbourIndex, PolicyConfig};
