//! Reference implementations shared by the integration tests.

#![allow(dead_code)]

pub mod geometry;
pub mod imaging;
pub mod metrics;
pub mod wire;
