//! Enhanced linked-loop codes (eLLC) for the unsourced A- and B-channels
//! with erasures, and a Monte-Carlo harness around them.
//!
//! * [`gf2`]: GF(2) vectors, matrices, solving and seeded streams.
//! * [`codec`]: code layouts, encoding, stitching, list decoding and the
//!   registry of named code schemes.
//! * [`channel`]: the erasure channels and the set/multiset output
//!   coincidence probability.
//! * [`metrics`]: PDP/PHP per trial and across trials.
//! * [`sim`]: experiment specs, sweeps, threshold search and file output.

pub mod channel;
pub mod codec;
pub mod gf2;
pub mod metrics;
pub mod sim;
