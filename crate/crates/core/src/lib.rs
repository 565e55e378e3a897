//! Spin squeezing of a collective spin ensemble through the geometric phase
//! imprinted by a damped, thermal mechanical mode.

pub mod analytic;
pub mod bang_bang;
pub mod config;
pub mod dicke;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod output;
pub mod quadrature;
pub mod scenario;

pub use config::{parse_config, Scenario, ScenarioConfig};
pub use error::{Error, Result};
pub use output::{write_csv, Table};
pub use scenario::run_scenario;
