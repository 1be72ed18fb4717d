//! Cursed sequential equilibria of signaling games.
//!
//! A receiver with cursedness `chi` in `[0, 1]` underweights how the sender's
//! message depends on the sender's type: posteriors are a `chi`-mixture of
//! the prior and the Bayesian posterior. This crate enumerates and verifies
//! equilibria under such beliefs, refines them with the cursed intuitive
//! criterion, and evaluates the closed-form education-signaling results.
//!
//! ```
//! use cursed_sig::experiment::{kmn_game, regime};
//! use cursed_sig::solver::{enumerate_pure_cse, EquilibriumKind};
//! use cursed_sig::Chi;
//!
//! let chi = Chi::new(0.9)?;
//! let eqs = enumerate_pure_cse(&kmn_game(), chi)?;
//! assert!(eqs.iter().all(|e| e.kind == EquilibriumKind::Pooling));
//! assert!(regime(chi).pooling_survives);
//! # Ok::<(), cursed_sig::Error>(())
//! ```

pub mod chi;
pub mod continuum;
pub mod error;
pub mod experiment;
pub mod format;
pub mod game;
pub mod refine;
pub mod report;
pub mod solver;
pub mod spence;

pub use chi::Chi;
pub use error::{Error, Result};
pub use game::file::{load_game, parse_game, GameFile};
pub use game::SignalingGame;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cursed-beliefs.md")]
mod book_cursed_beliefs {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/solving.md")]
mod book_solving {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/refinement.md")]
mod book_refinement {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/education.md")]
mod book_education {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/continuum.md")]
mod book_continuum {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/lab-data.md")]
mod book_lab_data {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
