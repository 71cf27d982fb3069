pub mod analysis;
pub mod cli;
pub mod engine;
pub mod experiments;
pub mod strategies;
