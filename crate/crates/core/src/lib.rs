//! Compositional difference-in-differences.
//!
//! Identification and estimation of counterfactual categorical quantities and
//! probability mass functions under *parallel growths*: the untreated
//! log-quantity of every category moves in parallel across groups. The crate
//! covers the canonical 2×2 design, covariate stratification, partial
//! identification under relaxed parallel growths, staggered adoption,
//! synthetic reweighting of controls, a parametric multinomial bootstrap, and
//! a random-utility-model generator used to validate all of the above.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line interface live in the companion `codid` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod bootstrap;
pub mod bounds;
pub mod estimator;
pub mod panel;
pub mod rum;
pub mod simplex;
pub mod staggered;
pub mod synthetic;

pub use error::{Error, Result};
pub use panel::{CellAddress, PanelDataset, PanelOptions, Record};
pub use simplex::{Categories, Composition, LogOdds, QuantityVector};
