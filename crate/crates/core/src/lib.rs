//! Facial acupoint localization over 468-vertex face meshes.
//!
//! Acupoints are written in a small definition language (ADL), compiled into
//! a dependency-ordered program and evaluated per frame against landmarks
//! from any face-mesh estimator.
//!
//! ```
//! use faceatlas::adl::load_atlas;
//! use faceatlas::evaluator::evaluate_atlas;
//! use faceatlas::fixture;
//! use faceatlas::geometry::SemanticsConfig;
//!
//! let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap();
//! let atlas = evaluate_atlas(&program, &fixture::canonical_frame(0), &SemanticsConfig::default());
//! assert_eq!(atlas.points.len(), program.instance_count());
//! ```

pub mod adl;
pub mod channels;
pub mod cli;
pub mod evaluator;
pub mod fixture;
pub mod geometry;
pub mod pipeline;
pub mod service;
pub mod svg;
