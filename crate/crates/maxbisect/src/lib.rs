pub mod config;
pub mod gaussian;
pub mod interval;
pub mod optimizer;
pub mod oracle;
pub mod pipeline;
pub mod prover;
pub mod rounding;
