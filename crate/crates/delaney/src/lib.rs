//! Delaney-Dress symbols over 2-orbifolds, and the classification of
//! crystallographic tilings whose tiles may be unbounded (ribbons and
//! branched ribbons).
//!
//! The pipeline, bottom up:
//!
//! * [`orbifold`]: orbifold symbols in Conway notation, exact Euler
//!   characteristics, geometry classification.
//! * [`dsym`]: Delaney symbols (chamber systems with involutions and
//!   branching weights), canonical forms, isomorphism, `.cds` I/O.
//! * [`quotgraph`]: the quotient graph of a tiling embedded on its
//!   orbifold, conversions to and from Delaney symbols, and the
//!   validity conditions for fundamental domains.
//! * [`stabiliser`]: the tile stabiliser of a marked tiling, computed
//!   from the quotient complex of the tile, and its classification
//!   (finite, frieze, branched, full).
//! * [`colourize`]: green cuts that recut a non-simply-connected or
//!   unbounded tile to a fundamental domain, producing coloured
//!   Delaney symbols.
//! * [`enumerate`]: exhaustive enumeration of fundamental tilings,
//!   edge erasures, splits, and ribbon classes per symmetry group.
//! * [`render`]: SVG pictures of tilings developed in the Euclidean or
//!   hyperbolic plane.

pub mod colourize;
pub mod dsym;
pub mod enumerate;
pub mod orbifold;
pub mod quotgraph;
pub mod render;
pub mod stabiliser;
pub mod verify;
