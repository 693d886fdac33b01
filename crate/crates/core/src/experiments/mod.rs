//! Experiment drivers. Each returns a serializable result with a `write`
//! method producing CSV and SVG files.

pub mod depth;
pub mod embedding;
pub mod masking;

pub use depth::{
    depth_bound, run_depth_decay, verify_theorem, verify_theorem_with, DepthCurve,
    DepthDecayConfig, DepthDecayResult, TheoremReport, TheoremViolation,
};
pub use embedding::{
    analyze_features, run_embedding_experiment, EmbeddingConfig, EmbeddingReport,
    FeatureSetReport, FeatureTransform, PARAMETER_NAMES,
};
pub use masking::{run_masking_grid, MaskingGridConfig, MaskingGridResult, MaskingSetup};
