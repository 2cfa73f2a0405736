pub mod candidates;
pub mod config;
pub mod criteria;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod service;
pub mod stability;
pub mod synthetic;
pub mod template;

pub use error::{Error, Result};
pub use template::CategoryTemplate;
