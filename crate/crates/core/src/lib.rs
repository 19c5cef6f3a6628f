pub mod converters;
pub mod error;
pub mod llm;
pub mod metrics;
pub mod problem;
pub mod runner;
pub mod tasks;
