pub mod agents;
pub mod gbt;
pub mod geometry;
pub mod imaging;
pub mod predictors;
pub mod rng;
pub mod runner;
pub mod stub;
pub mod zoom;
