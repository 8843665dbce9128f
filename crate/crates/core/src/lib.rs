pub mod bp;
pub mod chess;
pub mod dataset;
pub mod experiment;
pub mod ml;
pub mod strategy;
pub mod synth;
