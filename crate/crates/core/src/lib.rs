pub mod chem;
pub mod fitness;
pub mod genome;
pub mod grammar;
pub mod harness;
pub mod matrix;
pub mod ml;
pub mod rng;
pub mod search;
pub mod special;
pub mod stats;
