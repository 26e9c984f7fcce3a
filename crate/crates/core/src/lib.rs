//! Growth-maximal hard-core germ-grain models.
//!
//! A configuration is a finite set of grains: germ position, birth time and a
//! convex shape containing the origin in its interior. Every grain grows
//! linearly from its birth until it is stopped, producing a packing of
//! non-overlapping bodies in which each stopped grain touches a grain that
//! stopped no later. Two independent engines compute the growth times (a
//! round-based builder and an event-driven oracle), and the analysis module
//! checks the structural consequences: hard-core separation, earlier
//! neighbours, clusters with a single simultaneous pair, and stabilization
//! radii for the zero-birth regime.
//!
//! The crate is `no_std`-compatible (with `alloc`); enable the `libm` feature
//! instead of `std` for that configuration.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod float;

pub mod analysis;
pub mod builder;
pub mod geometry;
pub mod model;
pub mod oracle;

pub use builder::{build, GrainStatus, GrownGrain, HardCoreResult};
pub use geometry::{PlacedBody, Shape};
pub use model::{Configuration, Grain, Window};
