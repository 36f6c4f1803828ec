//! Automated design of metaheuristic algorithms represented as component
//! graphs.

pub mod catalog;
pub mod cmaes;
pub mod components;
pub mod designer;
pub mod evaluator;
pub mod executor;
pub mod graph;
pub mod presets;
pub mod problems;
pub mod render;
pub mod seed;
pub mod serial;
pub mod space;
pub mod stats;
