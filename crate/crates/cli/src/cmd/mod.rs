pub mod distribution;
pub mod estimate;
pub mod meanfield;
pub mod simulate;
pub mod synthesize;
pub mod validate;
