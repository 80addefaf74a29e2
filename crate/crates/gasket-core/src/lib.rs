//! Deterministic desk-scale simulator for pressing a deformable gasket cord
//! into rigid slotted molds, with a synthetic overhead camera, a classical
//! perception pipeline, procedural insertion strategies, and a scoring
//! rubric. Everything is reproducible from a single seed.

pub mod eval;
pub mod geom;
pub mod plan;
pub mod render;
pub mod replay;
pub mod rng;
pub mod sim;
pub mod vision;
