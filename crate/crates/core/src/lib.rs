//! Computational dynamics on the compact annulus `S¹ × [-1, 1]`.
//!
//! The crate works with homeomorphisms isotopic to the identity through
//! their lifts to the universal cover, the strip `ℝ × [-1, 1]`.  It
//! provides:
//!
//! * [`cover`] — strip/annulus coordinates, covering projection, lifts,
//!   plane extensions and the registered map families;
//! * [`fixed_index`] — fixed point location, winding-number indices and
//!   Nielsen class bookkeeping;
//! * [`brickwork`] — certified free brick decompositions of the strip
//!   minus the fixed point set;
//! * [`flowgraph`] — the directed brick graph, attractor/repeller
//!   reachability and boundedness probes;
//! * [`dichotomy`] — extraction of witness objects: an essential curve
//!   bounding a strictly shrinking subannulus, or a crossing arc meeting
//!   its image only at fixed points;
//! * [`rotation`] — rotation numbers, rotation-set estimates, mean
//!   horizontal displacement and swept-area computations;
//! * [`config`] / [`report`] / [`verify`] — scenario configs, report and
//!   CSV emission, and the shipped verification suite.

pub mod brickwork;
pub mod config;
pub mod cover;
pub mod dichotomy;
pub mod error;
pub mod fixed_index;
pub mod flowgraph;
pub mod geom;
pub mod report;
pub mod rotation;
pub mod verify;

pub use cover::{AnnulusPoint, LiftedMap, PlaneMap, StripPoint};
pub use error::Error;
pub use geom::PolyCurve;
