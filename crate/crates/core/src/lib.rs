pub mod autgroup;
pub mod cli;
pub mod expr;
pub mod field;
pub mod graph;
pub mod laurent;
pub mod linalg;
pub mod rewrite;
pub mod structure;
pub mod toeplitz;
