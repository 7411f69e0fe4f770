pub mod bench;
pub mod cg;
pub mod error;
pub mod evaluate;
pub mod export;
pub mod geo;
pub mod ingest;
pub mod lp;
pub mod model;
pub mod network;
pub mod oracle;
pub mod pricing;
pub mod rmp;
pub mod solution;
pub mod synthetic;

pub use error::{Error, Result};
