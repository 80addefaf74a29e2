//! Quasi-static rope-and-channel simulator.

pub mod ops;
pub mod params;
pub mod relax;
pub mod state;

pub use ops::Op;
pub use params::SimParams;
pub use relax::{relax, RelaxReport};
pub use state::{Particle, TraceEvent, UnseatCause, World};
