//! Coded distributed linear inference at the network edge.
//!
//! Users want `y = W x` for a network-side matrix `W`. The rows of `W` are
//! protected by a straggler code (LT or MDS), replicated across edge nodes and
//! multiplied by the users' data in per-node queues. This crate models the
//! whole pipeline in terms of latency:
//!
//! * [`model`]: system constants, scheme designs and the per-product compute time.
//! * [`fountain`]: robust Soliton distribution, LT row sampling, inactivation
//!   decoding with operation counts, and the ML failure-probability bound.
//! * [`mds`]: Berlekamp–Massey operation-count model for Reed–Solomon decoding.
//! * [`placement`]: assignment matrices (queue orders) and feasible rate grids.
//! * [`runtime`]: one realization of the computation phase under exponential
//!   straggling.
//! * [`latency`]: per-phase latencies, including the closed forms of the
//!   regular-repetition baseline.
//! * [`bounds`]: converse bounds on the total latency.
//! * [`search`]: grid-search design optimizers using common random numbers.
//! * [`sweep`]: parameter sweeps producing one row per scheme and decoder.

pub mod bounds;
pub mod error;
pub mod fountain;
pub mod latency;
pub mod mds;
pub mod model;
pub mod placement;
pub mod runtime;
pub mod search;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{
    delta, psi, Decoder, LatencyBreakdown, LtParams, Rates, Scheme, SchemeDesign, SystemParams,
};
pub use placement::AssignmentMatrix;
pub use runtime::{ComputationOutcome, StragglerDraw};
