//! Element-level webpage annotation and grounded GUI training-data synthesis.
//!
//! The pipeline runs in stages that hand off through files on disk:
//! snapshots are annotated into minimal semantic units ([`annotate`]),
//! turned into template QA samples ([`synth`]), augmented ([`augment`]),
//! extended with model-assisted tasks ([`advanced`]) and written as a
//! content-addressed dataset ([`dataset`]). [`eval`] scores grounding
//! predictions.

pub mod advanced;
pub mod annotate;
pub mod augment;
pub mod capture;
pub mod codec;
pub mod config;
pub mod dataset;
pub mod eval;
pub mod geom;
pub mod icons;
pub mod pipeline;
pub mod raster;
pub mod sample;
pub mod seed;
pub mod snapshot;
pub mod synth;
pub mod templates;

pub use geom::{BBox, Point, Viewport};
